"""Experiment configuration: versioned JSON schema, defaults and a stable hash."""
from __future__ import annotations

import copy
import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path

import jsonschema

SCHEMA_VERSION = "kpzlab-config/1"
KINDS = ("kernel-verify", "asep-ensemble", "she-ensemble", "goe", "compare-asep-she", "compare-she-goe")


class ConfigError(ValueError):
    """Invalid experiment configuration (exit status 2)."""


_num = {"type": "number"}
_num_list = {"type": "array", "items": _num, "minItems": 1}

_ASEP = {
    "type": "object",
    "properties": {
        "epsilon": {"type": "number", "exclusiveMinimum": 0},
        "A": _num, "B": {"type": ["number", "null"]},
        "geometry": {"enum": ["half-line", "interval"]},
        "N": {"type": ["integer", "null"], "minimum": 1},
        "init": {"enum": ["empty", "bernoulli", "full"]},
        "density": {"type": "number", "minimum": 0, "maximum": 1},
        "normalization": {"enum": ["standard", "narrow-wedge"]},
        "T": _num_list, "X": _num_list,
    },
    "required": ["epsilon", "A", "T", "X"],
    "additionalProperties": False,
}

_SHE = {
    "type": "object",
    "properties": {
        "A": _num, "B": {"type": ["number", "null"]},
        "geometry": {"enum": ["half-line", "interval"]},
        "dx": {"type": "number", "exclusiveMinimum": 0},
        "dt": {"type": ["number", "null"], "exclusiveMinimum": 0},
        "X_max": {"type": "number", "exclusiveMinimum": 0},
        "init": {"enum": ["delta0", "flat"]},
        "T": _num_list, "X": _num_list,
    },
    "required": ["A", "T", "X"],
    "additionalProperties": False,
}

_GOE = {
    "type": "object",
    "properties": {
        "n": {"type": "integer", "minimum": 200},
        "k": {"type": "integer", "minimum": 1},
        "xi": _num_list, "T": _num_list, "x": _num_list,
    },
    "required": ["n"],
    "additionalProperties": False,
}

_KERNEL = {
    "type": "object",
    "properties": {"profile": {"enum": ["quick", "full"]}},
    "additionalProperties": False,
}

_ASEP_PANEL = {**_ASEP, "required": ["A", "T", "X"]}

_COMPARE_AS = {
    "type": "object",
    "properties": {"epsilons": _num_list, "asep": _ASEP_PANEL, "she": _SHE},
    "required": ["epsilons", "asep", "she"],
    "additionalProperties": False,
}

_COMPARE_SG = {
    "type": "object",
    "properties": {"she": {"type": "array", "items": _SHE, "minItems": 1}, "goe": {"type": "array", "items": _GOE, "minItems": 1},
                   "xi": _num_list},
    "required": ["she", "goe", "xi"],
    "additionalProperties": False,
}

PARAM_SCHEMAS = {"kernel-verify": _KERNEL, "asep-ensemble": _ASEP, "she-ensemble": _SHE, "goe": _GOE,
                 "compare-asep-she": _COMPARE_AS, "compare-she-goe": _COMPARE_SG}

SCHEMA = {
    "type": "object",
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "kind": {"enum": list(KINDS)},
        "params": {"type": "object"},
        "replicas": {"type": "integer", "minimum": 0},
        "seed": {"type": "integer", "minimum": 0},
        "chunk": {"type": "integer", "minimum": 1},
        "out": {"type": "string"},
        "tolerances": {"type": "object", "additionalProperties": {"type": "number"}},
    },
    "required": ["schema", "kind", "params"],
    "additionalProperties": False,
}

DEFAULT_PARAMS = {
    "asep-ensemble": {"B": None, "geometry": "half-line", "N": None, "init": "empty", "density": 0.5,
                      "normalization": "standard"},
    "she-ensemble": {"B": None, "geometry": "half-line", "dx": 0.02, "dt": None, "X_max": 5.0, "init": "delta0"},
    "goe": {"k": 32, "xi": [1.0], "T": [1.0], "x": [0.0]},
    "kernel-verify": {"profile": "quick"},
}

# fields that change where or how fast a run happens but not what it computes
_NOT_HASHED = ("out",)


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    params: dict
    replicas: int = 0
    seed: int = 0
    chunk: int = 250
    out: str | None = None
    tolerances: dict | None = None

    def canonical(self) -> dict:
        d = {"schema": SCHEMA_VERSION, "kind": self.kind, "params": self.params, "replicas": self.replicas,
             "seed": self.seed, "chunk": self.chunk, "tolerances": self.tolerances or {}}
        if self.out is not None:
            d["out"] = self.out
        return d

    @property
    def hash(self) -> str:
        """SHA-256 of the canonical JSON without output location or chunking.

        The chunk size is left out since outputs do not depend on it.
        """
        d = {k: v for k, v in self.canonical().items() if k not in _NOT_HASHED + ("chunk",)}
        return hashlib.sha256(json.dumps(d, sort_keys=True, separators=(",", ":")).encode()).hexdigest()

    @property
    def tag(self) -> str:
        return f"{self.kind}-{self.hash[:12]}"

    def with_(self, **changes) -> "ExperimentConfig":
        d = {"kind": self.kind, "params": self.params, "replicas": self.replicas, "seed": self.seed,
             "chunk": self.chunk, "out": self.out, "tolerances": self.tolerances}
        d.update(changes)
        return ExperimentConfig(**d)


def _fill(kind: str, params: dict) -> dict:
    out = copy.deepcopy(DEFAULT_PARAMS.get(kind, {}))
    out.update(params)
    if kind == "compare-asep-she":
        out["asep"] = _fill("asep-ensemble", params["asep"])
        out["asep"].pop("epsilon", None)
        out["she"] = _fill("she-ensemble", params["she"])
    elif kind == "compare-she-goe":
        out["she"] = [_fill("she-ensemble", p) for p in params["she"]]
        out["goe"] = [_fill("goe", p) for p in params["goe"]]
    return out


def _semantic_checks(kind: str, p: dict) -> None:
    if kind in ("asep-ensemble", "she-ensemble"):
        if p.get("geometry") == "interval" and p.get("B") is None:
            raise ConfigError("interval geometry needs B")
        if kind == "asep-ensemble" and p.get("geometry") == "interval" and not p.get("N"):
            raise ConfigError("interval ASEP needs N")
        if any(t < 0 for t in p["T"]) or any(x < 0 for x in p["X"]):
            raise ConfigError("T and X must be nonnegative")
    if kind == "goe" and p["k"] >= p["n"]:
        raise ConfigError("k must be smaller than n")


def parse_config(raw: dict) -> ExperimentConfig:
    try:
        jsonschema.validate(raw, SCHEMA)
        jsonschema.validate(raw["params"], PARAM_SCHEMAS[raw["kind"]])
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from None
    params = _fill(raw["kind"], raw["params"])
    _semantic_checks(raw["kind"], params)
    return ExperimentConfig(raw["kind"], params, raw.get("replicas", 0), raw.get("seed", 0),
                            raw.get("chunk", 250), raw.get("out"), raw.get("tolerances"))


def load_config(path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return parse_config(raw)


def output_root(cli_out: str | None, config: ExperimentConfig | None = None) -> Path:
    """``--out`` wins over the config's ``out``, which wins over ``KPZLAB_OUT``."""
    for cand in (cli_out, config.out if config else None, os.environ.get("KPZLAB_OUT")):
        if cand:
            return Path(cand)
    return Path("kpzlab-out")
