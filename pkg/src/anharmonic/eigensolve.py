"""Lowest eigenvalues and eigenvectors of symmetric banded matrices.

Pipeline: plane-rotation reduction of the pentadiagonal matrix to tridiagonal
form, Sturm-sequence bisection for the eigenvalues, inverse iteration plus
rotation back-transformation for the eigenvectors.  Every step works at any
requested precision; tolerances derive from the context, not the hardware.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

from mpmath import fsum, mp, mpf

from .hamiltonian import BandedMatrix
from .precision import PrecisionContext


class EigenvectorError(RuntimeError):
    """Inverse iteration failed to converge; the input value is inaccurate."""


@dataclass(frozen=True)
class EigenPair:
    """Sector eigenpair: level is the index within the sorted sector spectrum."""

    level: int
    value: mpf
    vector: Tuple[mpf, ...]


def _precision_boost(matrix: BandedMatrix) -> int:
    """Extra digits compensating absolute rounding at the matrix-norm scale."""
    big = matrix.max_abs_entry()
    if big == 0 or big <= 1:
        return 0
    return max(0, int(mp.mag(big) * 0.30103) + 1)


def band_to_tridiagonal(matrix: BandedMatrix, ctx: PrecisionContext):
    """Reduce to tridiagonal form by symmetric plane rotations.

    Returns (tridiagonal, rotations).  Each rotation (q, c, s) acted on the
    plane (q, q+1); applying them in reverse order maps a tridiagonal
    eigenvector back to the original coordinates.
    """
    n = matrix.dim
    dps = ctx.working_digits + _precision_boost(matrix)
    if matrix.half_bandwidth <= 1:
        return matrix, ()
    if n <= 2 or all(v == 0 for v in matrix.bands[2]):
        tri = BandedMatrix(dim=n, half_bandwidth=1,
                           bands=(matrix.bands[0], matrix.bands[1]), dps=matrix.dps)
        return tri, ()

    with mp.workdps(dps):
        zero = mpf(0)
        d0 = list(matrix.bands[0])
        d1 = list(matrix.bands[1])
        d2 = list(matrix.bands[2])
        rots = []

        def apply_plane(q, c, s):
            """Symmetric rotation of rows/columns (q, q+1); returns new bulge."""
            # pair in row q-1 against columns (q, q+1)
            x, y = d1[q - 1], d2[q - 1]
            d1[q - 1] = c * x + s * y
            d2[q - 1] = c * y - s * x
            # 2x2 block
            al, be, ga = d0[q], d0[q + 1], d1[q]
            cc, ss, cs = c * c, s * s, c * s
            two_cs_ga = 2 * cs * ga
            d0[q] = cc * al + two_cs_ga + ss * be
            d0[q + 1] = ss * al - two_cs_ga + cc * be
            d1[q] = cs * (be - al) + (cc - ss) * ga
            # pair in rows (q, q+1) against column q+2
            if q + 2 <= n - 1:
                x, y = d2[q], d1[q + 1]
                d2[q] = c * x + s * y
                d1[q + 1] = c * y - s * x
            # bulge spills into (q, q+3)
            if q + 3 <= n - 1:
                y = d2[q + 1]
                d2[q + 1] = c * y
                return s * y
            return None

        for k in range(n - 2):
            if d2[k] == 0:
                continue
            # rotate plane (k+1, k+2) to zero entry (k, k+2)
            x, y = d1[k], d2[k]
            r = mp.sqrt(x * x + y * y)
            c, s = x / r, y / r
            bulge = apply_plane(k + 1, c, s)
            d1[k], d2[k] = r, zero
            rots.append((k + 1, c, s))
            # chase the bulge down the band, two rows at a time
            q = k + 3
            while bulge is not None and bulge != 0:
                x = d2[q - 2]
                r = mp.sqrt(x * x + bulge * bulge)
                c, s = x / r, bulge / r
                bulge = apply_plane(q, c, s)
                d2[q - 2] = r
                rots.append((q, c, s))
                q += 2

    tri = BandedMatrix(dim=n, half_bandwidth=1,
                       bands=(tuple(d0), tuple(d1)), dps=dps)
    return tri, tuple(rots)


class _Workspace:
    """Per-matrix, per-precision solver state (reduction, returned vectors)."""

    __slots__ = ("dps", "tri", "rots", "diag", "off", "off2", "pivmin", "scale",
                 "returned")

    def __init__(self, matrix, ctx, dps):
        self.dps = dps
        self.tri, self.rots = band_to_tridiagonal(matrix, ctx)
        self.diag = list(self.tri.bands[0])
        if len(self.tri.bands) > 1:
            self.off = list(self.tri.bands[1])
        else:
            self.off = [mpf(0)] * (matrix.dim - 1)
        with mp.workdps(dps):
            self.off2 = [e * e for e in self.off]
            self.scale = max(mpf(1), matrix.max_abs_entry())
            self.pivmin = self.scale * mpf(10) ** (-2 * dps)
        self.returned = []


def _workspace(matrix: BandedMatrix, ctx: PrecisionContext) -> _Workspace:
    dps = ctx.working_digits + _precision_boost(matrix)
    key = ("workspace", dps)
    ws = matrix._cache.get(key)
    if ws is None:
        ws = _Workspace(matrix, ctx, dps)
        matrix._cache[key] = ws
    return ws


def _sturm_count(diag, off2, x, pivmin):
    """Number of eigenvalues of the tridiagonal matrix below x (ties count)."""
    count = 0
    q = diag[0] - x
    if -pivmin < q < pivmin:
        q = -pivmin
    if q < 0:
        count = 1
    for i in range(1, len(diag)):
        q = diag[i] - x - off2[i - 1] / q
        if -pivmin < q < pivmin:
            q = -pivmin
        if q < 0:
            count += 1
    return count


def eigenvalues_lowest(matrix: BandedMatrix, k: int, ctx: PrecisionContext):
    """The k smallest eigenvalues, ascending, each correct to target digits."""
    n = matrix.dim
    if not 1 <= k <= n:
        raise ValueError(f"k must be in 1..{n}, got {k}")
    if matrix.is_diagonal():
        return sorted(matrix.bands[0])[:k]

    ws = _workspace(matrix, ctx)
    with mp.workdps(ws.dps):
        diag, off2 = ws.diag, ws.off2
        off = ws.off
        # Gershgorin bounds on the tridiagonal, padded into strict exteriority.
        lo = hi = diag[0]
        for i in range(n):
            radius = (abs(off[i - 1]) if i > 0 else 0) + (abs(off[i]) if i < n - 1 else 0)
            lo = min(lo, diag[i] - radius)
            hi = max(hi, diag[i] + radius)
        pad = (hi - lo) * mpf("1e-3") + ws.scale * mpf(10) ** (2 - ctx.working_digits)
        lo -= pad
        hi += pad

        tolcoef = mpf(10) ** (2 - ctx.working_digits)
        pivmin = ws.pivmin
        values = []
        for j in range(k):
            a, b = lo, hi
            while True:
                mid = (a + b) / 2
                if b - a <= tolcoef * max(1, abs(mid)):
                    break
                if _sturm_count(diag, off2, mid, pivmin) >= j + 1:
                    b = mid
                else:
                    a = mid
            values.append((a + b) / 2)
    return values


def _factor_shifted(diag, off, sigma, pivmin):
    """LU with partial pivoting of (T - sigma I); T tridiagonal symmetric."""
    n = len(diag)
    a = [diag[i] - sigma for i in range(n)]
    b = list(off)
    c = list(off)
    d2 = [mpf(0)] * max(n - 2, 0)
    mult = [mpf(0)] * max(n - 1, 0)
    swap = [False] * max(n - 1, 0)
    for i in range(n - 1):
        if abs(c[i]) > abs(a[i]):
            swap[i] = True
            a[i], c[i] = c[i], a[i]
            b[i], a[i + 1] = a[i + 1], b[i]
            if i <= n - 3:
                d2[i], b[i + 1] = b[i + 1], d2[i]
        if a[i] == 0:
            a[i] = pivmin
        m = c[i] / a[i]
        mult[i] = m
        a[i + 1] -= m * b[i]
        if i <= n - 3:
            b[i + 1] -= m * d2[i]
    if a[n - 1] == 0:
        a[n - 1] = pivmin
    return a, b, d2, mult, swap


def _lu_solve(factors, rhs):
    a, b, d2, mult, swap = factors
    n = len(a)
    y = list(rhs)
    for i in range(n - 1):
        if swap[i]:
            y[i], y[i + 1] = y[i + 1], y[i]
        y[i + 1] -= mult[i] * y[i]
    x = [mpf(0)] * n
    x[n - 1] = y[n - 1] / a[n - 1]
    if n > 1:
        x[n - 2] = (y[n - 2] - b[n - 2] * x[n - 1]) / a[n - 2]
    for i in range(n - 3, -1, -1):
        x[i] = (y[i] - b[i] * x[i + 1] - d2[i] * x[i + 2]) / a[i]
    return x


def _norm2(v):
    return mp.sqrt(fsum(x * x for x in v))


def _orthogonalize(v, others):
    for u in others:
        proj = fsum(a * b for a, b in zip(v, u))
        v = [a - proj * b for a, b in zip(v, u)]
    return v


def eigenvector(matrix: BandedMatrix, value, ctx: PrecisionContext):
    """Unit eigenvector for an eigenvalue estimate, by inverse iteration.

    Deterministic all-equal start vector; when the value sits within
    10^(-target/2) of a previously returned eigenvalue of the same matrix the
    iterate is re-orthogonalized against those vectors.  The first nonzero
    component of the result is positive.
    """
    n = matrix.dim
    ws = _workspace(matrix, ctx)
    target = ctx.target_digits
    with mp.workdps(ws.dps):
        sigma = mpf(value)
        for val, _tri, final in ws.returned:
            if val == sigma:
                return final
        bound = mpf(10) ** (1 - target) * max(1, abs(sigma))
        cluster_gap = mpf(10) ** mpf(-target / 2)
        cluster = [vec for val, vec, _f in ws.returned if abs(val - sigma) < cluster_gap]

        if n == 1:
            vec_tri = [mpf(1)]
            if abs(ws.diag[0] - sigma) > bound:
                raise EigenvectorError("value is not an eigenvalue of the matrix")
        else:
            factors = _factor_shifted(ws.diag, ws.off, sigma, ws.pivmin)
            start = [mpf(1)] * n
            if cluster:
                start = _orthogonalize(start, cluster)
                if _norm2(start) < mpf("1e-3") * mp.sqrt(n):
                    start = [mpf(0)] * n
                    start[len(cluster) % n] = mpf(1)
                    start = _orthogonalize(start, cluster)
            nrm = _norm2(start)
            b = [x / nrm for x in start]

            diag, off = ws.diag, ws.off
            vec_tri = None
            for _ in range(12):
                w = _lu_solve(factors, b)
                if cluster:
                    w = _orthogonalize(w, cluster)
                nrm = _norm2(w)
                if nrm == 0:
                    b = [mpf(0)] * n
                    b[len(cluster) % n] = mpf(1)
                    continue
                v = [x / nrm for x in w]
                resid = [diag[i] * v[i] - sigma * v[i]
                         + (off[i - 1] * v[i - 1] if i > 0 else 0)
                         + (off[i] * v[i + 1] if i < n - 1 else 0)
                         for i in range(n)]
                if _norm2(resid) <= bound / 2:
                    vec_tri = v
                    break
                b = v
            if vec_tri is None:
                raise EigenvectorError(
                    "inverse iteration did not converge; eigenvalue estimate "
                    "is not accurate to the requested precision")

        # Back-transform through the reduction rotations, newest first.
        v = list(vec_tri)
        for q, c, s in reversed(ws.rots):
            vq = c * v[q] - s * v[q + 1]
            v[q + 1] = s * v[q] + c * v[q + 1]
            v[q] = vq

        # Scrub numerical dust so canonical cases return exact basis vectors.
        big = max(abs(x) for x in v)
        floor = big * mpf(10) ** (2 - ws.dps)
        v = [x if abs(x) > floor else mpf(0) for x in v]
        nrm = _norm2(v)
        v = [x / nrm for x in v]
        for x in v:
            if x != 0:
                if x < 0:
                    v = [-y for y in v]
                break
        result = tuple(v)
        ws.returned.append((sigma, list(vec_tri), result))
    return result


def residual_norm(matrix: BandedMatrix, pair: EigenPair):
    """Infinity norm of H v - E v."""
    if len(pair.vector) != matrix.dim:
        raise ValueError("vector length does not match matrix dimension")
    dps = max(matrix.dps, mp.dps)
    with mp.workdps(dps):
        hv = matrix.matvec(pair.vector)
        return max(abs(hv[i] - pair.value * pair.vector[i]) for i in range(matrix.dim))
