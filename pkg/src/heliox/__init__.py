"""heliox: variational ground states and entanglement entropies of
two-electron atoms.

The package solves helium-like ions (nuclear charge Z, two electrons) with
an explicitly correlated exponential-polynomial basis, then Schmidt-
decomposes the one-electron reduced density matrix through its partial-wave
integral kernels to obtain occupation numbers and the von Neumann and linear
entanglement entropies.
"""

import os as _os

# HELIOX_THREADS caps parallelism: BLAS pools (when set before the first
# numpy import, e.g. through the CLI entry point) and the sweep job pool.
_threads = _os.environ.get("HELIOX_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)
del _os, _threads

from .basis import (  # noqa: E402
    BasisTerm,
    HylleraasExpansion,
    base_integral,
    enumerate_terms,
    hamiltonian_element,
    hamiltonian_matrix,
    norm_constant,
    normalize,
    overlap_element,
    overlap_matrix,
    term_count,
    wavefunction_value,
)
from .errors import (  # noqa: E402
    BracketError,
    ConditioningError,
    ConsistencyError,
    ConvergenceError,
    HelioxError,
    NumericalError,
)
from .kernel import (  # noqa: E402
    RadialKernel,
    kernel_value_analytic,
    kernel_value_quadrature,
    legendre_theta_integral,
)
from .linalg import MatrixPair, gen_sym_eig, sym_eig, sym_eigvals  # noqa: E402
from .spectrum import (  # noqa: E402
    EntropyResult,
    GridSpec,
    OccupationSpectrum,
    build_kernel_matrix,
    build_kernel_matrices,
    converge,
    default_schedule,
    entropies,
    occupations_from_kernel,
    partial_entropies,
    spectrum_for,
)
from .variational import (  # noqa: E402
    OMEGA_CAP,
    GroundState,
    optimize_mu,
    solve_at_mu,
)

__version__ = "0.1.0"

__all__ = [
    "BasisTerm",
    "BracketError",
    "ConditioningError",
    "ConsistencyError",
    "ConvergenceError",
    "EntropyResult",
    "GridSpec",
    "GroundState",
    "HelioxError",
    "HylleraasExpansion",
    "MatrixPair",
    "NumericalError",
    "OccupationSpectrum",
    "OMEGA_CAP",
    "RadialKernel",
    "base_integral",
    "build_kernel_matrices",
    "build_kernel_matrix",
    "converge",
    "default_schedule",
    "entropies",
    "enumerate_terms",
    "gen_sym_eig",
    "hamiltonian_element",
    "hamiltonian_matrix",
    "kernel_value_analytic",
    "kernel_value_quadrature",
    "legendre_theta_integral",
    "norm_constant",
    "normalize",
    "occupations_from_kernel",
    "optimize_mu",
    "overlap_element",
    "overlap_matrix",
    "partial_entropies",
    "solve_at_mu",
    "spectrum_for",
    "sym_eig",
    "sym_eigvals",
    "term_count",
    "wavefunction_value",
    "__version__",
]
