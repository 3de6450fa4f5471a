"""Discrete Robin heat kernels: image series, interval recursion, spectral sum, ODE oracle."""
from .evaluator import ROUTES, KernelEvaluator, kernel_eval
from .spectral import RobinSpectrum, robin_spectrum

__all__ = ["ROUTES", "KernelEvaluator", "RobinSpectrum", "kernel_eval", "robin_spectrum"]
