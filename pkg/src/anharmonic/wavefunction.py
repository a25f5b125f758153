"""Coordinate-space reconstruction of eigenfunctions from sector coefficients.

Basis functions are harmonic-oscillator eigenfunctions of frequency omega0,
evaluated through the normalized three-term recurrence (never as a Hermite
polynomial times a Gaussian, which overflows and cancels at large index).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

from mpmath import mp, mpf, mpmathify

from .hamiltonian import BasisSpec, ModelParams, Parity
from .precision import PrecisionContext, digits_agree


@dataclass(frozen=True)
class WaveFunction:
    """Sector expansion psi(x) = sum_j c_j phi_{m(j)}(omega0; x).

    coefficients are the sector coefficients c (length basis.dim); m(j) is
    the full oscillator index basis.full_index(j).  Solver output satisfies
    sum c^2 = 1; the class does not force that, so a deliberately scaled
    function can still be built and fed to norm_check.
    """

    basis: BasisSpec
    coefficients: Tuple[mpf, ...]
    energy: mpf
    level: int

    def __post_init__(self):
        if len(self.coefficients) != self.basis.dim:
            raise ValueError("need one coefficient per basis function")
        if self.level < 0:
            raise ValueError("level must be >= 0")


def solution_wavefunction(result, level: int) -> WaveFunction:
    """Eigenfunction of one level from a solve_levels result."""
    pair = result.pair(level)
    basis = BasisSpec(
        omega0=result.omega0_used,
        parity=Parity.of_level(level),
        order=result.final_order,
    )
    return WaveFunction(
        basis=basis, coefficients=pair.vector, energy=pair.value, level=level
    )


@dataclass(frozen=True)
class Grid:
    """Inclusive 1-D sampling grid; a single point when x_min == x_max."""

    x_min: object
    x_max: object
    step: object = None

    def __post_init__(self):
        lo = float(mpmathify(self.x_min))
        hi = float(mpmathify(self.x_max))
        if lo > hi:
            raise ValueError("x_min must be <= x_max")
        if lo < hi and (self.step is None or not float(mpmathify(self.step)) > 0):
            raise ValueError("step must be > 0")

    def points(self, ctx: PrecisionContext) -> List[mpf]:
        with ctx.workdps():
            lo = mpmathify(self.x_min)
            hi = mpmathify(self.x_max)
            if lo == hi:
                return [lo]
            step = mpmathify(self.step)
            count = int(mp.floor((hi - lo) / step + mpf("1e-9"))) + 1
            return [lo + k * step for k in range(count)]


def _phi_iter(omega0, x, kmax: int):
    """Yield phi_0 .. phi_kmax at x; caller sets the mp context."""
    xi = mp.sqrt(omega0) * x
    phi = mp.power(omega0 / mp.pi, mpf(1) / 4) * mp.exp(-xi * xi / 2)
    prev = mpf(0)
    for k in range(kmax + 1):
        yield phi
        phi, prev = (
            mp.sqrt(mpf(2) / (k + 1)) * xi * phi - mp.sqrt(mpf(k) / (k + 1)) * prev,
            phi,
        )


def basis_function(n: int, omega0, x, ctx: PrecisionContext) -> mpf:
    """phi_n(omega0; x) by the stable normalized recurrence."""
    if n < 0:
        raise ValueError("n must be >= 0")
    with ctx.workdps():
        w = mpmathify(omega0)
        if w <= 0:
            raise ValueError("omega0 must be positive")
        last = mpf(0)
        for last in _phi_iter(w, mpmathify(x), n):
            pass
        return last


def evaluate(wf: WaveFunction, x, ctx: PrecisionContext) -> mpf:
    """psi(x) from the sector expansion, one recurrence pass."""
    basis = wf.basis
    kmax = basis.full_index(basis.order)
    start = 1 if basis.parity is Parity.ODD else 0
    with ctx.workdps():
        acc = mpf(0)
        j = 0
        for k, phi in enumerate(_phi_iter(mpmathify(basis.omega0), mpmathify(x), kmax)):
            if k >= start and (k - start) % 2 == 0:
                acc += wf.coefficients[j] * phi
                j += 1
        return acc


def sample(wf: WaveFunction, grid: Grid, ctx: PrecisionContext):
    """Pointwise (x, psi(x)) over the grid."""
    return [(x, evaluate(wf, x, ctx)) for x in grid.points(ctx)]


def norm_check(wf: WaveFunction, ctx: PrecisionContext) -> mpf:
    """Quadrature estimate of the squared norm, independent of sum c^2.

    Composite trapezoid on [-L, L]: L starts at 12/sqrt(omega0) (the
    wavefunction object carries no coupling, so the seed covers the widest
    basis scale) and doubles until both tails are below 10^-target; the step
    then halves until two successive estimates agree to target digits.
    """
    target = ctx.target_digits
    with ctx.workdps(10):
        L = mpf(12) / mp.sqrt(mpmathify(wf.basis.omega0))
        tail = mpf(10) ** (-target)
        while abs(evaluate(wf, L, ctx)) >= tail or abs(evaluate(wf, -L, ctx)) >= tail:
            L *= 2
        n = 64
        h = 2 * L / n
        ends = (evaluate(wf, -L, ctx) ** 2 + evaluate(wf, L, ctx) ** 2) / 2
        inner = mp.fsum(evaluate(wf, -L + k * h, ctx) ** 2 for k in range(1, n))
        est = (ends + inner) * h
        while n <= 1 << 20:
            half = h / 2
            inner += mp.fsum(
                evaluate(wf, -L + k * h + half, ctx) ** 2 for k in range(n)
            )
            n *= 2
            h = half
            refined = (ends + inner) * h
            if digits_agree(refined, est) >= target:
                return refined
            est = refined
        return est


def sample_potential(params: ModelParams, omega0, grid: Grid, ctx: PrecisionContext):
    """Harmonic-basis potential omega0^2 x^2 / 2 and perturbation lambda x^4."""
    with ctx.workdps():
        w0 = mpmathify(omega0)
        lam = mpmathify(params.lam)
        harmonic = []
        perturbation = []
        for x in grid.points(ctx):
            harmonic.append((x, w0 * w0 * x * x / 2))
            perturbation.append((x, lam * x**4))
    return {"harmonic": harmonic, "perturbation": perturbation}
