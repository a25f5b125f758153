"""Convergence-controlled level solving and basis-frequency (omega0) tools.

solve_levels raises the truncation order until the requested energies are
stable at the printed precision.  The omega0 helpers pick the basis frequency
that makes that convergence fast: predict_omega0 evaluates a fitted curve
omega0(lambda), optimize_omega0 minimizes the variational bound directly, and
fit_omega0_model rebuilds the curve from (lambda, omega0) data.
"""
from __future__ import annotations

import math
import operator
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
from mpmath import mpf, mpmathify

from .eigensolve import EigenPair, eigenvalues_lowest, eigenvector
from .hamiltonian import BasisSpec, ModelParams, Parity, assemble_hamiltonian
from .precision import PrecisionContext, format_fixed, make_context

_INVPHI = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class Omega0Model:
    """Parameters of omega0(lambda) = a + b*mu + c*mu^alpha with mu = ln(lambda)."""

    a: float
    b: float
    c: float
    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be > 0")


DEFAULT_OMEGA0_MODEL = Omega0Model(a=3.47542, b=1.92476, c=2.25163e-7, alpha=8.48258)


def predict_omega0(lam, model: Omega0Model = DEFAULT_OMEGA0_MODEL) -> float:
    """Basis frequency suggested by the fitted omega0(lambda) curve.

    Below lambda = 1 the power term has a negative base and is dropped; the
    linear part is clipped from below at 1, which stays inside the flat
    region of the convergence-rate landscape there.
    """
    lam = float(mpmathify(lam))
    if lam <= 0:
        raise ValueError("lambda must be > 0 to predict a basis frequency")
    mu = math.log(lam)
    if mu < 0:
        return max(1.0, model.a + model.b * mu)
    return model.a + model.b * mu + model.c * mu**model.alpha


@dataclass(frozen=True)
class Omega0Policy:
    """How solve_levels picks omega0: a fixed value, the fitted formula, or
    variational optimization at a small order."""

    kind: str
    value: object = None

    def __post_init__(self):
        if self.kind not in ("fixed", "formula", "optimize"):
            raise ValueError(f"unknown omega0 policy: {self.kind!r}")
        if self.kind == "fixed":
            if self.value is None or not float(mpmathify(self.value)) > 0:
                raise ValueError("fixed omega0 policy needs a positive value")
        elif self.value is not None:
            raise ValueError(f"omega0 policy {self.kind!r} takes no value")

    @classmethod
    def fixed(cls, value) -> "Omega0Policy":
        return cls("fixed", value)

    @classmethod
    def formula(cls) -> "Omega0Policy":
        return cls("formula")

    @classmethod
    def optimize(cls) -> "Omega0Policy":
        return cls("optimize")


@dataclass(frozen=True)
class SolveRequest:
    """One solving job: which levels of which Hamiltonian, to how many digits.

    levels are global quantum numbers n; parity sectors are inferred from
    n mod 2.  n_start/n_max bound the truncation orders the convergence loop
    may visit.
    """

    params: ModelParams
    levels: Tuple[int, ...]
    target_digits: int = 8
    omega0: Omega0Policy = Omega0Policy("optimize")
    n_start: int = 8
    n_max: int = 2000

    def __post_init__(self):
        try:
            levels = tuple(operator.index(n) for n in self.levels)
        except TypeError as exc:
            raise ValueError("levels must be integers") from exc
        object.__setattr__(self, "levels", levels)
        if not levels:
            raise ValueError("levels must not be empty")
        if any(n < 0 for n in levels):
            raise ValueError("levels must be >= 0")
        if len(set(levels)) != len(levels):
            raise ValueError("levels must be distinct")
        if self.target_digits < 1:
            raise ValueError("target_digits must be >= 1")
        if 2 * self.n_start < max(levels) + 4:
            raise ValueError("n_start must be >= max(levels)/2 + 2")
        if self.n_max < self.n_start:
            raise ValueError("n_max must be >= n_start")


@dataclass(frozen=True)
class ConvergenceRow:
    """Energies of the requested levels at one truncation order."""

    order: int
    energies: Tuple[mpf, ...]


@dataclass(frozen=True)
class SolveResult:
    """Converged eigenpairs plus the metadata needed to reuse them.

    pairs[i] belongs to global level levels[i]; each EigenPair.level is the
    index within its parity sector (n // 2), matching the sector matrix.
    """

    levels: Tuple[int, ...]
    pairs: Tuple[EigenPair, ...]
    final_order: int
    omega0_used: mpf
    rows: Tuple[ConvergenceRow, ...]

    @property
    def energies(self) -> Tuple[mpf, ...]:
        return tuple(p.value for p in self.pairs)

    def pair(self, level: int) -> EigenPair:
        try:
            return self.pairs[self.levels.index(level)]
        except ValueError:
            raise KeyError(level) from None


class ConvergenceFailure(RuntimeError):
    """Energies failed to stabilize by n_max; carries the last rows seen."""

    def __init__(self, message: str, rows: Tuple[ConvergenceRow, ...], omega0_used):
        super().__init__(message)
        self.rows = rows
        self.omega0_used = omega0_used


def _sector_energies(params, omega0, order, levels, ctx):
    """Energies of the given global levels at one truncation order.

    Returns (energies ordered like levels, sector matrices by parity) so the
    caller can reuse the assembled matrices for eigenvectors.
    """
    by_parity: Dict[Parity, List[int]] = {}
    for n in levels:
        by_parity.setdefault(Parity.of_level(n), []).append(n)
    matrices: Dict[Parity, object] = {}
    values: Dict[int, mpf] = {}
    for parity, group in by_parity.items():
        basis = BasisSpec(omega0=omega0, parity=parity, order=order)
        matrix = assemble_hamiltonian(params, basis, ctx)
        lowest = eigenvalues_lowest(matrix, max(n // 2 for n in group) + 1, ctx)
        matrices[parity] = matrix
        for n in group:
            values[n] = lowest[n // 2]
    return tuple(values[n] for n in levels), matrices


def _order_schedule(n_start: int, n_max: int):
    order = n_start
    while order <= n_max:
        yield order
        order += max(1, order // 4)


def _resolve_omega0(request: SolveRequest, ctx: PrecisionContext) -> mpf:
    params = request.params
    with ctx.workdps():
        if float(mpmathify(params.lam)) == 0:
            # the harmonic basis at omega0 = omega is exact; any other
            # frequency only slows convergence, so every policy collapses
            # to omega
            return mpmathify(params.omega)
        policy = request.omega0
        if policy.kind == "fixed":
            return mpmathify(policy.value)
        if policy.kind == "formula":
            return mpmathify(predict_omega0(params.lam))
    level = max(request.levels)
    order = max(min(request.n_start, 12), (level + 5) // 2)
    with ctx.workdps():
        return mpmathify(optimize_omega0(params, order, level, ctx))


def solve_levels(request: SolveRequest) -> SolveResult:
    """Raise the truncation order until every requested level is stable.

    Stability means the fixed-point rendering at target_digits decimals is
    identical across three consecutive tested orders (tested orders grow by
    25 percent, rounded down but at least by 1).  Eigenvectors are computed
    at the final order only.
    """
    ctx = make_context(request.target_digits)
    omega0 = _resolve_omega0(request, ctx)
    rows: List[ConvergenceRow] = []
    window: List[Tuple[str, ...]] = []
    for order in _order_schedule(request.n_start, request.n_max):
        energies, matrices = _sector_energies(
            request.params, omega0, order, request.levels, ctx
        )
        rows.append(ConvergenceRow(order=order, energies=energies))
        window.append(tuple(format_fixed(e, request.target_digits) for e in energies))
        if len(window) >= 3 and window[-1] == window[-2] == window[-3]:
            pairs = []
            for n, value in zip(request.levels, energies):
                vector = eigenvector(matrices[Parity.of_level(n)], value, ctx)
                pairs.append(EigenPair(level=n // 2, value=value, vector=vector))
            return SolveResult(
                levels=request.levels,
                pairs=tuple(pairs),
                final_order=order,
                omega0_used=omega0,
                rows=tuple(rows),
            )
    raise ConvergenceFailure(
        f"energies not stable to {request.target_digits} digits by order"
        f" {request.n_max} (omega0 = {omega0})",
        tuple(rows[-2:]),
        omega0,
    )


def convergence_table(
    params: ModelParams,
    omega0,
    orders: Sequence[int],
    ctx: PrecisionContext,
    level: int = 0,
) -> List[ConvergenceRow]:
    """Energy of one level at each requested truncation order, no smoothing."""
    orders = [operator.index(N) for N in orders]
    if not orders:
        raise ValueError("orders must not be empty")
    if any(b <= a for a, b in zip(orders, orders[1:])):
        raise ValueError("orders must be strictly increasing")
    if level < 0:
        raise ValueError("level must be >= 0")
    if orders[0] < level // 2:
        raise ValueError("smallest order does not contain the requested level")
    rows = []
    for order in orders:
        energies, _ = _sector_energies(params, omega0, order, (level,), ctx)
        rows.append(ConvergenceRow(order=order, energies=energies))
    return rows


def optimize_omega0(
    params: ModelParams, order: int, level: int, ctx: PrecisionContext
) -> float:
    """Variationally best basis frequency at a fixed small order.

    Any truncated eigenvalue is an upper bound on the true level, so golden
    section search on omega0 minimizes the bound directly.  The bracket is
    [max(omega, 0.5), 3*predict_omega0(lambda) + 10] and the search stops at
    width 0.05; the landscape is flat near the optimum, so that is plenty.
    """
    if 2 * order < level + 4:
        raise ValueError("order must be >= level/2 + 2")
    omega = float(mpmathify(params.omega))
    if float(mpmathify(params.lam)) == 0:
        return omega
    parity = Parity.of_level(level)
    index = level // 2

    def energy(w: float) -> mpf:
        basis = BasisSpec(omega0=w, parity=parity, order=order)
        matrix = assemble_hamiltonian(params, basis, ctx)
        return eigenvalues_lowest(matrix, index + 1, ctx)[index]

    a = max(omega, 0.5)
    b = 3 * predict_omega0(params.lam) + 10
    if b <= a:
        b = a + 10
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = energy(c), energy(d)
    while b - a > 0.05:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = energy(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = energy(d)
    return (a + b) / 2


def fit_omega0_model(points) -> Omega0Model:
    """Least-squares fit of omega0(lambda) = a + b*mu + c*mu^alpha, mu = ln(lambda).

    alpha runs over the fixed grid 1.0, 1.005, ..., 12.0 with an exact linear
    least-squares solve for (a, b, c) at each value; the grid keeps the fit
    deterministic, and ties keep the smallest alpha.
    """
    pts = [(float(mpmathify(l)), float(mpmathify(w))) for l, w in points]
    if len(pts) < 5:
        raise ValueError("need at least 5 (lambda, omega0) points")
    if any(l < 1 for l, _ in pts):
        raise ValueError("fit domain is lambda >= 1 (mu >= 0)")
    mu = np.array([math.log(l) for l, _ in pts])
    y = np.array([w for _, w in pts])
    ones = np.ones_like(mu)
    best = None
    for i in range(2201):
        alpha = 1.0 + 0.005 * i
        design = np.column_stack([ones, mu, mu**alpha])
        coef, *_ = np.linalg.lstsq(design, y, rcond=None)
        resid = design @ coef - y
        sse = float(resid @ resid)
        if best is None or sse < best[0]:
            best = (sse, alpha, coef)
    _, alpha, (a, b, c) = best
    return Omega0Model(a=float(a), b=float(b), c=float(c), alpha=float(alpha))
