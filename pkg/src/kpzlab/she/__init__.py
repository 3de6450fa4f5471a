"""Lattice SHE with Robin boundaries, its moment oracles and the martingale-problem statistic."""
from .grid import SheGrid
from .moments import VolterraOracle, first_moment_oracle, second_moment_exact
from .solver import SheTrajectory, solve

__all__ = ["SheGrid", "SheTrajectory", "VolterraOracle", "first_moment_oracle", "second_moment_exact", "solve"]
