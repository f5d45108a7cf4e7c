"""Nonlinear tunneling loops in a Bose condensate double well.

Mean-field (Gross-Pitaevskii) branches, the two-mode classical and Fock
models derived from the same trap, and time-dependent sweeps through the
avoided crossing.
"""

__version__ = "0.1.0"

from .classical import ClassicalSolution, classical_roots
from .errors import (
    BecLoopsError,
    ConfigError,
    ConvergenceFailure,
    DegenerateOmega,
    GridMismatch,
    NoBoundMode,
    NoConvergence,
    NoDoubleWell,
    SingularJacobian,
    StepCollapse,
    WindowExit,
)
from .gpe import Branch, GpeSolution, StepControl, continue_branch, count_solutions, seed_from_linear, solve_gpe
from .grid import Grid, PotentialParams, SampledFunction, locate_wells, sample_potential
from .linear import build_h0, eigensolve
from .modes import TwoModeParams, build_modes, modes_for_trap, params_for_trap, two_mode_params
from .quantum import FockHamiltonian, FockVector, build_fock_hamiltonian, scan_spectrum, spectrum
from .sweep import SweepProtocol, propagate

__all__ = [n for n, v in dict(globals()).items() if not n.startswith("_") and not hasattr(v, "__path__")
           and getattr(v, "__module__", "").startswith("bec_loops")]
