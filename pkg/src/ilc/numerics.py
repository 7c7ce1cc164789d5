"""Extended-precision plumbing: circle quadrature, LU determinants, stencils, Newton.

Scalars are :mod:`mpmath` ``mpf``/``mpc`` values; the working precision is the
ambient ``mp.dps`` (use :func:`precision` to scope it).  Dense linear algebra is
delegated to :mod:`gmpy2` numbers held in numpy object arrays, which is roughly
ten times faster than looping over mpmath scalars.
"""
from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import gmpy2
import numpy as np
from mpmath import mp, mpc, mpf

from .errors import DomainError, NoConvergence, NodeSingularity

DEFAULT_DPS = 50
M_CAP = 2**16


def precision(dps: int):
    """Context manager fixing the working precision in decimal digits."""
    if dps < 15:
        raise DomainError(f"precision must be at least 15 digits, got {dps}")
    return mp.workdps(dps)


def default_tol(dps: int | None = None) -> mpf:
    """Internal tolerance 10^(-dps/2)."""
    dps = mp.dps if dps is None else dps
    return mpf(10) ** (-(dps // 2))


def is_finite(x) -> bool:
    if isinstance(x, mpc):
        return mp.isfinite(x.real) and mp.isfinite(x.imag)
    return bool(mp.isfinite(x))


# ---------------------------------------------------------------------------
# gmpy2 bridge

@contextlib.contextmanager
def fast_context(extra_bits: int = 16):
    """gmpy2 context matching the current mpmath precision (plus guard bits)."""
    with gmpy2.context(gmpy2.get_context(), precision=mp.prec + extra_bits) as ctx:
        yield ctx


def _mpf_to_gmpy(x: mpf):
    sign, man, exp, _ = x._mpf_
    if not man:
        if x != 0:
            raise NodeSingularity(f"non-finite value {x}")
        return gmpy2.mpfr(0)
    r = gmpy2.mul_2exp(gmpy2.mpfr(man), exp)
    return -r if sign else r


def to_gmpy(x):
    """Convert an mpmath (or Python) number to gmpy2 mpfr/mpc exactly."""
    if isinstance(x, mpc):
        return gmpy2.mpc(_mpf_to_gmpy(x.real), _mpf_to_gmpy(x.imag))
    if isinstance(x, complex):
        return gmpy2.mpc(x)
    if isinstance(x, mpf):
        return _mpf_to_gmpy(x)
    return gmpy2.mpfr(x)


def _gmpy_to_mpf(r) -> mpf:
    if not gmpy2.is_finite(r):
        raise NodeSingularity(f"non-finite value {r}")
    man, exp = r.as_mantissa_exp()
    return mpf((int(man), int(exp)))


_MPC_TYPE = type(gmpy2.mpc(0))
_MPFR_TYPE = type(gmpy2.mpfr(0))


def from_gmpy(x):
    if isinstance(x, _MPC_TYPE):
        return mpc(_gmpy_to_mpf(x.real), _gmpy_to_mpf(x.imag))
    if not isinstance(x, _MPFR_TYPE):
        x = gmpy2.mpfr(x)
    return _gmpy_to_mpf(x)


# ---------------------------------------------------------------------------
# Circle quadrature

@dataclass(frozen=True)
class CircleQuadrature:
    """M-point trapezoidal rule for the contour measure dz/(2 pi) on |z| = radius.

    With z = radius * e^{i theta}, dz/(2 pi) = i z dtheta/(2 pi), so each node
    carries weight i z_m / M.
    """

    radius: mpf
    M: int
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.M <= 0 or self.M % 2:
            raise DomainError(f"M must be a positive even integer, got {self.M}")
        object.__setattr__(self, "radius", mpf(self.radius))

    @property
    def nodes(self) -> list:
        key = ("nodes", mp.prec)
        if key not in self._cache:
            rho, M = self.radius, self.M
            self._cache[key] = [rho * mp.expjpi(mpf(2 * m) / M) for m in range(M)]
        return self._cache[key]

    @property
    def weights(self) -> list:
        key = ("weights", mp.prec)
        if key not in self._cache:
            self._cache[key] = [mpc(0, 1) * z / self.M for z in self.nodes]
        return self._cache[key]


def quad_circle(f: Callable, q: CircleQuadrature):
    """Trapezoidal approximation of the contour integral of f(z) dz/(2 pi)."""
    total = mpc(0)
    for z, w in zip(q.nodes, q.weights):
        try:
            fz = f(z)
        except ZeroDivisionError as exc:
            raise NodeSingularity(f"integrand singular at node {z}") from exc
        if not is_finite(fz):
            raise NodeSingularity(f"integrand non-finite at node {z}: {fz}")
        total += w * fz
    return total


def adaptive_circle(f: Callable, radius, tol, M_start: int = 64, M_cap: int = M_CAP):
    """Double M from ``M_start`` until successive trapezoid values agree within tol.

    Nodes are nested, so each doubling only evaluates the new odd-indexed nodes.
    Returns ``(value, M_used)`` where value is the finer of the two agreeing
    sums and M_used the coarser M, i.e. the first rule certified to tol.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    radius = mpf(radius)
    M = M_start
    value = quad_circle(f, CircleQuadrature(radius, M))
    while True:
        if 2 * M > M_cap:
            raise NoConvergence(f"adaptive_circle exceeded M cap {M_cap}", last=value)
        new = mpc(0)
        for m in range(1, 2 * M, 2):
            z = radius * mp.expjpi(mpf(m) / M)
            try:
                fz = f(z)
            except ZeroDivisionError as exc:
                raise NodeSingularity(f"integrand singular at node {z}") from exc
            if not is_finite(fz):
                raise NodeSingularity(f"integrand non-finite at node {z}: {fz}")
            new += z * fz
        refined = value / 2 + mpc(0, 1) * new / (2 * M)
        if abs(refined - value) < tol:
            return refined, M
        value = refined
        M *= 2


# ---------------------------------------------------------------------------
# Dense determinants

def _det_gmpy(A: np.ndarray):
    """LU with partial pivoting on an object array of gmpy2 numbers (destroyed)."""
    n = A.shape[0]
    det = gmpy2.mpfr(1)
    for k in range(n):
        col = [abs(x) for x in A[k:, k]]
        p = k + max(range(len(col)), key=col.__getitem__)
        if col[p - k] == 0:
            return gmpy2.mpfr(0)
        if p != k:
            A[[k, p]] = A[[p, k]]
            det = -det
        pivot = A[k, k]
        det = det * pivot
        if k + 1 < n:
            factors = A[k + 1:, k] / pivot
            A[k + 1:, k + 1:] -= np.outer(factors, A[k, k + 1:])
    return det


def det_fast(A: np.ndarray):
    """Determinant of an object array already holding gmpy2 numbers."""
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError(f"determinant needs a square matrix, got shape {A.shape}")
    if A.shape[0] == 0:
        return gmpy2.mpfr(1)
    return _det_gmpy(A.copy())


def lu_det(A):
    """Determinant of a square matrix of mpf/mpc entries at the working precision.

    Accepts nested sequences or an ``mpmath.matrix``. An exactly zero pivot
    column gives 0 rather than an error.
    """
    if isinstance(A, mp.matrix):
        rows = [[A[i, j] for j in range(A.cols)] for i in range(A.rows)]
    else:
        rows = [list(r) for r in A]
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise DomainError("lu_det needs a square matrix")
    if n == 0:
        return mpf(1)
    with fast_context():
        M = np.empty((n, n), dtype=object)
        for i, r in enumerate(rows):
            for j, x in enumerate(r):
                M[i, j] = to_gmpy(x)
        d = _det_gmpy(M)
    out = from_gmpy(d)
    if isinstance(out, mpc) and out.imag == 0 and not any(isinstance(x, mpc) for r in rows for x in r):
        return out.real
    return +out


# ---------------------------------------------------------------------------
# Finite differences

_STENCILS = {
    # (offsets, weights, divisor): fourth-order central differences
    1: ((-2, -1, 1, 2), (1, -8, 8, -1), 12),
    2: ((-2, -1, 0, 1, 2), (-1, 16, -30, 16, -1), 12),
    3: ((-3, -2, -1, 1, 2, 3), (1, -8, 13, -13, 8, -1), 8),
}


def default_step(dps: int | None = None) -> mpf:
    dps = mp.dps if dps is None else dps
    return mpf(10) ** (-(dps // 5))


def central_derivative(f: Callable, t, order: int = 1, step=None):
    """Fourth-order central difference of f at t (order 1, 2 or 3)."""
    if order not in _STENCILS:
        raise DomainError(f"unsupported derivative order {order}")
    t = mpf(t)
    h = default_step() if step is None else mpf(step)
    offsets, weights, div = _STENCILS[order]
    acc = mpf(0)
    for o, w in zip(offsets, weights):
        acc += w * f(t + o * h)
    return acc / (div * h**order)


def stencil_values(f: Callable, t, step, reach: int = 3) -> dict:
    """Evaluate f on t + j*step for |j| <= reach, so several derivatives share calls."""
    t, step = mpf(t), mpf(step)
    return {j: f(t + j * step) for j in range(-reach, reach + 1)}


def derivatives_from_values(values: dict, step, orders: Sequence[int] = (1, 2)) -> list:
    """Apply the central stencils to precomputed ``stencil_values`` output."""
    step = mpf(step)
    out = []
    for order in orders:
        offsets, weights, div = _STENCILS[order]
        acc = sum((w * values[o] for o, w in zip(offsets, weights)), mpf(0))
        out.append(acc / (div * step**order))
    return out


# ---------------------------------------------------------------------------
# Root polishing

def newton_polish(f: Callable, df: Callable, x0, tol=None, maxiter: int = 100):
    """Newton iteration from x0; stops when the correction falls below tol."""
    tol = mpf(10) ** (-mp.dps + 5) if tol is None else mpf(tol)
    x = x0
    for _ in range(maxiter):
        d = df(x)
        if d == 0:
            raise NoConvergence("zero derivative in Newton iteration", last=x)
        dx = f(x) / d
        x = x - dx
        if abs(dx) <= tol * max(1, abs(x)):
            return x
    raise NoConvergence(f"Newton did not converge in {maxiter} iterations", last=x)


def log_spaced(lo, hi, n: int) -> list:
    """n points from lo to hi (inclusive), equally spaced in log."""
    lo, hi = mpf(lo), mpf(hi)
    if n == 1:
        return [lo]
    a, b = mp.log(lo), mp.log(hi)
    return [mp.exp(a + (b - a) * i / (n - 1)) for i in range(n)]


def digits_for(tol) -> int:
    """Decimal digits needed to resolve tol."""
    return max(1, int(math.ceil(-float(mp.log10(mpf(tol))))))
