"""Model parameters, the sector basis, and the banded Hamiltonian matrix.

The quartic anharmonic oscillator H = (p^2 + omega^2 x^2)/2 + lambda x^4 is
expanded over harmonic-oscillator eigenfunctions of a tunable frequency
omega0.  Parity decouples the eigenproblem; each sector yields a real
symmetric pentadiagonal matrix over the reduced index i (full oscillator
index n = 2i or 2i+1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Tuple

from mpmath import mp, mpf, mpmathify

from .precision import PrecisionContext

NEGATIVE_LAMBDA_MESSAGE = (
    "negative quartic coupling destroys every bound state (Dyson instability):"
    " lambda must be >= 0"
)


class Parity(Enum):
    EVEN = "even"
    ODD = "odd"

    @classmethod
    def of_level(cls, level: int) -> "Parity":
        return cls.EVEN if level % 2 == 0 else cls.ODD


def _as_float(value, name: str) -> float:
    try:
        return float(mpmathify(value))
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{name} is not a real number: {value!r}") from exc


@dataclass(frozen=True)
class ModelParams:
    """Oscillator frequency omega and quartic coupling lambda (hbar = m = 1)."""

    omega: object = 1
    lam: object = 0

    def __post_init__(self):
        if not _as_float(self.omega, "omega") > 0:
            raise ValueError("omega must be > 0")
        if _as_float(self.lam, "lambda") < 0:
            raise ValueError(NEGATIVE_LAMBDA_MESSAGE)


@dataclass(frozen=True)
class BasisSpec:
    """Basis frequency omega0, parity sector, and reduced truncation order N."""

    omega0: object
    parity: Parity
    order: int

    def __post_init__(self):
        if not _as_float(self.omega0, "omega0") > 0:
            raise ValueError("omega0 must be > 0")
        if self.order < 0:
            raise ValueError("order must be >= 0")

    @property
    def dim(self) -> int:
        return self.order + 1

    def full_index(self, i: int) -> int:
        """Full oscillator index n for reduced index i."""
        return 2 * i + (1 if self.parity is Parity.ODD else 0)


@dataclass(frozen=True)
class BandedMatrix:
    """Symmetric banded matrix: main diagonal plus half_bandwidth superdiagonals.

    bands[d][i] holds entry (i, i+d); the sub-diagonals follow by symmetry.
    """

    dim: int
    half_bandwidth: int
    bands: Tuple[Tuple[mpf, ...], ...]
    dps: int = 15
    _cache: dict = field(default_factory=dict, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if len(self.bands) != self.half_bandwidth + 1:
            raise ValueError("need one band per diagonal up to half_bandwidth")
        for d, band in enumerate(self.bands):
            if len(band) != max(self.dim - d, 0):
                raise ValueError(f"band {d} has wrong length")

    def entry(self, i: int, j: int) -> mpf:
        if not (0 <= i < self.dim and 0 <= j < self.dim):
            raise IndexError("index out of range")
        d = abs(i - j)
        if d > self.half_bandwidth:
            return mpf(0)
        return self.bands[d][min(i, j)]

    def is_diagonal(self) -> bool:
        return all(v == 0 for band in self.bands[1:] for v in band)

    def max_abs_entry(self) -> mpf:
        return max(abs(v) for band in self.bands for v in band) if self.dim else mpf(0)

    def matvec(self, v):
        """H @ v using the symmetric band storage."""
        n = self.dim
        hb = self.half_bandwidth
        out = []
        for i in range(n):
            acc = mpf(0)
            for j in range(max(0, i - hb), min(n, i + hb + 1)):
                acc += self.entry(i, j) * v[j]
            out.append(acc)
        return out

    def to_dense(self):
        return [[self.entry(i, j) for j in range(self.dim)] for i in range(self.dim)]


def xi2_element(m: int, n: int) -> mpf:
    """Matrix element <m|xi^2|n> in the dimensionless oscillator basis."""
    if m < 0 or n < 0:
        raise ValueError("indices must be >= 0")
    if m == n:
        return mpf(n) + mpf(1) / 2
    if m == n - 2:
        return mp.sqrt(mpf(n * (n - 1))) / 2
    if m == n + 2:
        return mp.sqrt(mpf((n + 1) * (n + 2))) / 2
    return mpf(0)


def xi4_element(m: int, n: int) -> mpf:
    """Matrix element <m|xi^4|n>; nonzero only for |m-n| in {0, 2, 4}."""
    if m < 0 or n < 0:
        raise ValueError("indices must be >= 0")
    if m == n:
        return mpf(3 * (2 * n * n + 2 * n + 1)) / 4
    if m == n - 2:
        return mpf(2 * n - 1) * mp.sqrt(mpf(n * (n - 1))) / 2
    if m == n + 2:
        return mpf(2 * n + 3) * mp.sqrt(mpf((n + 1) * (n + 2))) / 2
    if m == n - 4:
        return mp.sqrt(mpf(n * (n - 1) * (n - 2) * (n - 3))) / 4
    if m == n + 4:
        return mp.sqrt(mpf((n + 1) * (n + 2) * (n + 3) * (n + 4))) / 4
    return mpf(0)


def _norm_guard_digits(params: ModelParams, basis: BasisSpec) -> int:
    """Extra digits so that absolute entry errors stay below 10^-working.

    Eigenvalues inherit absolute perturbations of order the matrix norm, so
    working precision alone cannot deliver target_digits significant digits
    once entries grow to 10^boost; raise the assembly precision accordingly.
    """
    w0 = _as_float(basis.omega0, "omega0")
    w = _as_float(params.omega, "omega")
    lam = _as_float(params.lam, "lambda")
    nmax = basis.full_index(basis.order)
    diag = (
        w0 * (nmax + 0.5)
        + abs(w * w - w0 * w0) / (2 * w0) * (nmax + 0.5)
        + lam / (w0 * w0) * 3 * (2 * nmax * nmax + 2 * nmax + 1) / 4
    )
    return max(0, math.ceil(math.log10(max(1.0, 2 * diag))))


def assemble_hamiltonian(
    params: ModelParams, basis: BasisSpec, ctx: PrecisionContext
) -> BandedMatrix:
    """Sector Hamiltonian H_mn = omega0(n+1/2)d_mn + A<xi^2>_mn + B<xi^4>_mn.

    A = (omega^2 - omega0^2)/(2 omega0), B = lambda/omega0^2; indices run over
    the parity-reduced sector, giving a pentadiagonal matrix in reduced form.
    """
    boost = _norm_guard_digits(params, basis)
    dps = ctx.working_digits + boost
    with mp.workdps(dps):
        omega = mpmathify(params.omega)
        omega0 = mpmathify(basis.omega0)
        lam = mpmathify(params.lam)
        coef2 = (omega**2 - omega0**2) / (2 * omega0)
        coef4 = lam / omega0**2
        half = mpf(1) / 2

        dim = basis.dim
        diag = []
        sup1 = []
        sup2 = []
        for i in range(dim):
            n = basis.full_index(i)
            diag.append(omega0 * (n + half) + coef2 * xi2_element(n, n)
                        + coef4 * xi4_element(n, n))
        for i in range(dim - 1):
            n = basis.full_index(i)
            # reduced offset 1 = full offset 2
            sup1.append(coef2 * xi2_element(n, n + 2) + coef4 * xi4_element(n, n + 2))
        for i in range(dim - 2):
            n = basis.full_index(i)
            # reduced offset 2 = full offset 4
            sup2.append(coef4 * xi4_element(n, n + 4))
    return BandedMatrix(
        dim=dim,
        half_bandwidth=2,
        bands=(tuple(diag), tuple(sup1), tuple(sup2)),
        dps=dps,
    )
