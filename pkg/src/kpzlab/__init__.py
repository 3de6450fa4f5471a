"""Robin heat kernels, weakly asymmetric open ASEP, the SHE and GOE edge functionals."""
from .continuum import ContinuumKernel
from .kernels import KernelEvaluator, kernel_eval
from .scaling import Scaling, build_scaling, max_epsilon

__version__ = "0.1.0"

__all__ = ["ContinuumKernel", "KernelEvaluator", "Scaling", "build_scaling", "kernel_eval", "max_epsilon"]
