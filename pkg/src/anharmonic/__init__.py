"""Energy levels and wavefunctions of the quartic anharmonic oscillator.

The Hamiltonian H = (p^2 + omega^2 x^2)/2 + lambda x^4 is expanded over
harmonic-oscillator eigenfunctions of a tunable frequency omega0; truncated
sector matrices are banded, and their lowest eigenvalues converge to the
exact levels as the order grows.  A good omega0 makes that convergence fast
enough for hundreds of digits.
"""

from .eigensolve import (
    EigenPair,
    EigenvectorError,
    band_to_tridiagonal,
    eigenvalues_lowest,
    eigenvector,
    residual_norm,
)
from .hamiltonian import (
    BandedMatrix,
    BasisSpec,
    ModelParams,
    Parity,
    assemble_hamiltonian,
    xi2_element,
    xi4_element,
)
from .precision import (
    PrecisionContext,
    digits_agree,
    format_fixed,
    format_scientific,
    make_context,
)
from .spectrum import (
    DEFAULT_OMEGA0_MODEL,
    ConvergenceFailure,
    ConvergenceRow,
    Omega0Model,
    Omega0Policy,
    SolveRequest,
    SolveResult,
    convergence_table,
    fit_omega0_model,
    optimize_omega0,
    predict_omega0,
    solve_levels,
)
from .wavefunction import (
    Grid,
    WaveFunction,
    basis_function,
    evaluate,
    norm_check,
    sample,
    sample_potential,
    solution_wavefunction,
)

__version__ = "0.1.0"

__all__ = [
    "BandedMatrix",
    "BasisSpec",
    "ConvergenceFailure",
    "ConvergenceRow",
    "DEFAULT_OMEGA0_MODEL",
    "EigenPair",
    "EigenvectorError",
    "Grid",
    "ModelParams",
    "Omega0Model",
    "Omega0Policy",
    "Parity",
    "PrecisionContext",
    "SolveRequest",
    "SolveResult",
    "WaveFunction",
    "assemble_hamiltonian",
    "band_to_tridiagonal",
    "basis_function",
    "convergence_table",
    "digits_agree",
    "eigenvalues_lowest",
    "eigenvector",
    "evaluate",
    "fit_omega0_model",
    "format_fixed",
    "format_scientific",
    "make_context",
    "norm_check",
    "optimize_omega0",
    "predict_omega0",
    "residual_norm",
    "sample",
    "sample_potential",
    "solution_wavefunction",
    "solve_levels",
    "xi2_element",
    "xi4_element",
]
