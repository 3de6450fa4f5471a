from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..rng import stream_key, uniform
from ..scaling import Scaling
from . import _core

EVENT_NAMES = ("right", "left", "create_left", "annihilate_left", "annihilate_right", "create_right")

_EMPTY_I64 = np.zeros(0, dtype=np.int64)
_EMPTY_ACC = np.zeros((0, _core.N_ACC))


def default_window(t_max: float, x_max: int = 0) -> int:
    """Half-line window: Poisson(t_max) overshoot margin plus the observation range."""
    return int(x_max + math.ceil(t_max + 6.0 * math.sqrt(t_max) + 50))


@dataclass
class Event:
    kind: str
    site: int
    time: float


class AsepState:
    """Open ASEP on sites 1..L (half-line window) or 1..N (interval).

    ``h[x]`` is kept for x = 0..L; the left reservoir moves ``h[0]`` only,
    bulk jumps across bond (x, x+1) move ``h[x]`` only and the right
    reservoir moves ``h[N]`` only.
    """

    def __init__(self, scaling: Scaling, eta: np.ndarray, seed: int = 0, replica: int = 0,
                 draws_used: int = 0, log_capacity: int = 0, detect_overflow: bool | None = None):
        self.scaling = scaling
        eta = np.asarray(eta, dtype=np.int8)
        if not np.all(np.abs(eta) == 1):
            raise ValueError("occupations must be +-1")
        L = len(eta)
        if L < 2:
            raise ValueError("window needs at least two sites")
        if scaling.geometry == "interval" and L != scaling.N:
            raise ValueError(f"interval state needs {scaling.N} sites, got {L}")
        self.L = L
        self.eta = np.zeros(L + 2, dtype=np.int8)
        self.eta[1:L + 1] = eta
        self.h = np.zeros(L + 1, dtype=np.int64)
        self.h[1:] = np.cumsum(eta)
        self.catR = np.zeros(L, dtype=np.int32)
        self.catL = np.zeros(L, dtype=np.int32)
        self.posR = np.full(L + 1, -1, dtype=np.int32)
        self.posL = np.full(L + 1, -1, dtype=np.int32)
        interval = scaling.geometry == "interval"
        if detect_overflow is None:
            # only meaningful when the window starts empty beyond the occupied block
            detect_overflow = not interval and bool(np.all(eta == -1))
        self.ints = np.array([0, 0, 0, int(interval), L, 0, int(detect_overflow)], dtype=np.int64)
        self.reals = np.array([0.0, -1.0])
        self.counts = np.zeros(6, dtype=np.int64)
        self.rng = np.array([stream_key(seed, replica), draws_used], dtype=np.uint64)
        s = scaling
        self.rates = np.array([s.p, s.q, s.alpha, s.gamma,
                               s.beta if interval else 0.0, s.delta if interval else 0.0])
        self.audit = np.zeros(3, dtype=np.int64)
        self.log_t = np.zeros(log_capacity)
        self.log_type = np.zeros(log_capacity, dtype=np.uint8)
        self.log_site = np.zeros(log_capacity, dtype=np.uint32)
        _core.build_catalog(self.eta, self.catR, self.posR, self.catL, self.posL, self.ints)

    # construction -----------------------------------------------------------------
    @classmethod
    def init(cls, scaling: Scaling, init="empty", L: int | None = None, seed: int = 0,
             replica: int = 0, density: float = 0.5, log_capacity: int = 0) -> "AsepState":
        """``init`` is ``"empty"``, ``"full"``, ``"bernoulli"`` or an explicit +-1 array."""
        if scaling.geometry == "interval":
            if L is not None and L != scaling.N:
                raise ValueError("interval window is fixed to N sites")
            L = scaling.N
        elif L is None and isinstance(init, str):
            raise ValueError("half-line state needs a window L")
        draws = 0
        if isinstance(init, str):
            if init == "empty":
                eta = -np.ones(L, dtype=np.int8)
            elif init == "full":
                eta = np.ones(L, dtype=np.int8)
            elif init == "bernoulli":
                key = stream_key(seed, replica)
                u = np.array([uniform(key, i) for i in range(L)])
                eta = np.where(u < density, 1, -1).astype(np.int8)
                draws = L
            else:
                raise ValueError(f"unknown init {init!r}")
        else:
            eta = np.asarray(init)
            if L is not None and len(eta) != L:
                raise ValueError(f"explicit init has length {len(eta)}, window is {L}")
        return cls(scaling, eta, seed, replica, draws, log_capacity)

    # dynamics ---------------------------------------------------------------------
    def _advance(self, t_target: float, max_events: int, norm: float = 1.0,
                 track=_EMPTY_I64, acc=_EMPTY_ACC, audit_every: int = 0) -> int:
        s = self.scaling
        mu_B = s.mu_B if s.mu_B is not None else 1.0
        return _core.advance(self.eta, self.h, self.catR, self.posR, self.catL, self.posL,
                             self.ints, self.reals, self.counts, self.rng, self.rates,
                             float(t_target), int(max_events), math.sqrt(s.epsilon), s.nu, norm,
                             s.mu_A, mu_B, track, acc, int(audit_every), self.audit,
                             self.log_t, self.log_type, self.log_site)

    def step(self) -> Event | None:
        if self.overflow:
            raise RuntimeError("state overflowed its window")
        before = self.counts.copy()
        if self._advance(math.inf, 1) == 0:
            return None
        kind = int(np.flatnonzero(self.counts != before)[0])
        return Event(EVENT_NAMES[kind], -1, self.clock)

    def run_until(self, t_target: float, audit_every: int = 0) -> "AsepState":
        self._advance(t_target, 2**62, audit_every=audit_every)
        return self

    # observables ------------------------------------------------------------------
    @property
    def clock(self) -> float:
        return float(self.reals[0])

    @property
    def overflow(self) -> bool:
        return bool(self.ints[2])

    @property
    def occupation(self) -> np.ndarray:
        return self.eta[1:self.L + 1].copy()

    @property
    def h0(self) -> int:
        return int(self.h[0])

    def heights(self) -> np.ndarray:
        return self.h.copy()

    def rightmost_particle(self) -> int:
        occ = np.flatnonzero(self.eta[1:self.L + 1] == 1)
        return int(occ[-1] + 1) if len(occ) else 0

    def event_counts(self) -> dict[str, int]:
        return dict(zip(EVENT_NAMES, self.counts.tolist()))

    def enabled_rates(self) -> dict[str, float]:
        """Total enabled rate per event type, from the maintained catalogue."""
        out = {"right": self.rates[0] * self.ints[0], "left": self.rates[1] * self.ints[1]}
        e1 = self.eta[1]
        out["create_left"] = self.rates[2] if e1 == -1 else 0.0
        out["annihilate_left"] = self.rates[3] if e1 == 1 else 0.0
        if self.ints[3]:
            eN = self.eta[self.L]
            out["annihilate_right"] = self.rates[4] if eN == 1 else 0.0
            out["create_right"] = self.rates[5] if eN == -1 else 0.0
        return out

    def gartner(self, normalization: str = "standard") -> np.ndarray:
        """``Z_t(x) = norm exp(sqrt(eps) h_t(x) + nu t)`` for x = 0..L."""
        s = self.scaling
        norm = normalizer(s, normalization)
        return norm * np.exp(math.sqrt(s.epsilon) * self.h + s.nu * self.clock)

    def event_log(self) -> np.ndarray:
        """Logged events as a packed record array (time bits u64, type u8, site u32)."""
        n = int(self.ints[5])
        rec = np.zeros(n, dtype=EVENT_DTYPE)
        rec["time_bits"] = self.log_t[:n].view(np.uint64)
        rec["type"] = self.log_type[:n]
        rec["site"] = self.log_site[:n]
        return rec


EVENT_DTYPE = np.dtype([("time_bits", "<u8"), ("type", "u1"), ("site", "<u4")])


def normalizer(s: Scaling, normalization: str) -> float:
    if normalization == "standard":
        return 1.0
    if normalization == "narrow-wedge":
        return s.rho / math.sqrt(s.epsilon)
    raise ValueError(f"unknown normalization {normalization!r}")


def write_event_log(path, records: np.ndarray) -> None:
    """Binary framing: little-endian u64 time bits, u8 type, u32 site, no padding."""
    with open(path, "wb") as fh:
        fh.write(np.ascontiguousarray(records, dtype=EVENT_DTYPE).tobytes())


def read_event_log(path) -> np.ndarray:
    return np.fromfile(path, dtype=EVENT_DTYPE)
