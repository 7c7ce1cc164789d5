"""The lambda-generalized diagonal correlation C^-(N, t; lambda) by four routes.

* Fredholm: the cyclic 2n-fold contour integrals F_N^(2n) assembled into
  ``exp(sum lambda^{2n} F^(2n)) = det(I + lambda^2 T)``.  T is available either
  as the Nystrom matrix on the circle |z| = rho or, equivalently, in the
  Laurent-coefficient basis where T becomes -H_Q H_P with Hankel matrices of
  the Fourier coefficients of Q(z)Q(1/z) and P(z)P(1/z).  The second form is
  real, about three times smaller at equal accuracy and is the default.
* Toeplitz (lambda = 1): N x N determinant of the symbol coefficients a_n.
* Theta (N = 0, 1): ratios of Jacobi theta functions in the nome of k.
* Algebraic: closed forms at lambda = cos(pi/4) and the quartic at cos(pi/3).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2
import numpy as np
from mpmath import mp, mpc, mpf

from . import numerics, specialfn
from .errors import (
    BranchCutError,
    BranchLost,
    DomainError,
    InternalError,
    NoConvergence,
    PrecisionExhausted,
)


class Method(str, enum.Enum):
    FREDHOLM = "fredholm"
    TOEPLITZ = "toeplitz"
    THETA = "theta"
    ALGEBRAIC = "algebraic"
    AUTO = "auto"




def _lam_pi4():
    return mp.sqrt(2) / 2


@dataclass(frozen=True)
class CorrelatorRequest:
    N: int
    t: mpf
    lam: mpf
    method: Method = Method.AUTO
    precision: int = numerics.DEFAULT_DPS

    def __post_init__(self):
        if self.N < 0:
            raise DomainError("N must be nonnegative")
        object.__setattr__(self, "method", Method(self.method))


@dataclass(frozen=True)
class CorrelatorValue:
    value: mpf
    est_error: mpf
    method: Method
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class FredholmConfig:
    """Discretization controls for the Fredholm route.

    radius: contour radius for the Nystrom basis (default (1 + k)/2).
    M: Nystrom points per contour, or Laurent truncation size; None = automatic.
    mode: "logdet" (det(I + lambda^2 T)) or "trace" (truncated sum of traces).
    n_max: cap on the lambda-series in trace mode.
    basis: "laurent" or "nystrom".
    tol: target truncation error; None = 10^(-dps/2).
    """

    radius: mpf | None = None
    M: int | None = None
    mode: str = "logdet"
    n_max: int = 12
    basis: str = "laurent"
    tol: mpf | None = None
    M_cap: int = numerics.M_CAP
    L_cap: int = 1500

    def __post_init__(self):
        if self.mode not in ("logdet", "trace"):
            raise DomainError(f"unknown Fredholm mode {self.mode!r}")
        if self.basis not in ("laurent", "nystrom"):
            raise DomainError(f"unknown Fredholm basis {self.basis!r}")


# ---------------------------------------------------------------------------
# Weights and symbol coefficients

def _principal_sqrt_checked(w):
    w = mpc(w)
    if w.imag == 0 and w.real <= 0:
        raise BranchCutError(f"square root evaluated on its branch cut at {w}")
    return mp.sqrt(w)


def weight_P(z, k):
    """P(z) = (1 - k z)^{1/2}, principal branch."""
    return _principal_sqrt_checked(1 - mpf(k) * z)


def weight_Q(z, k):
    """Q(z) = 1/P(z)."""
    return 1 / weight_P(z, k)


def _symbol(k):
    def phi(z):
        # [(1 - k/z)/(1 - k z)]^{1/2} as the product of two principal roots;
        # on |z| = 1 both factors have positive real part for k < 1.
        return _principal_sqrt_checked(1 - k / z) / _principal_sqrt_checked(1 - k * z)

    return phi


def fourier_coeffs(ns, k, tol=None) -> dict:
    """Toeplitz symbol coefficients a_n for each n in ns (adaptive trapezoid).

    a_n = (1/2pi) int e^{-in theta} [(1 - k e^{-i theta})/(1 - k e^{i theta})]^{1/2}.
    At k = 1 the symbol is e^{i(pi - theta)/2} and a_n = 2/(pi (2n + 1)) exactly.
    """
    k = mpf(k)
    ns = list(ns)
    if not 0 <= k <= 1:
        raise DomainError(f"fourier_coeff needs 0 <= k <= 1, got {k}")
    if k == 1:
        return {n: 2 / (mp.pi * (2 * n + 1)) for n in ns}
    if k == 0:
        return {n: mpf(1 if n == 0 else 0) for n in ns}
    tol = numerics.default_tol() if tol is None else mpf(tol)
    phi = _symbol(k)
    out = {}
    for n in ns:
        # a_n = (1/2 pi i) \oint z^{-n-1} phi(z) dz = -i * (contour sum of z^{-n-1} phi dz/2pi)
        val, _ = numerics.adaptive_circle(lambda z: z ** (-n - 1) * phi(z), 1, tol / 10)
        a = -mpc(0, 1) * val
        if abs(a.imag) > tol:
            raise InternalError(f"a_{n} has imaginary residue {a.imag}")
        out[n] = a.real
    return out


def fourier_coeff(n: int, k, tol=None) -> mpf:
    return fourier_coeffs([n], k, tol)[n]


def toeplitz_corr(N: int, t, tol=None) -> CorrelatorValue:
    """Ising (lambda = 1) correlation as the N x N Toeplitz determinant det[a_{i-j}]."""
    t = mpf(t)
    if N < 0:
        raise DomainError("N must be nonnegative")
    if not 0 <= t <= 1:
        raise DomainError(f"t must lie in [0, 1], got {t}")
    tol = numerics.default_tol() if tol is None else mpf(tol)
    if N == 0:
        return CorrelatorValue(mpf(1), mpf(0), Method.TOEPLITZ, {"size": 0})
    k = mp.sqrt(t)
    a = fourier_coeffs(range(-N + 1, N), k, tol)
    mat = [[a[i - j] for j in range(N)] for i in range(N)]
    value = numerics.lu_det(mat)
    return CorrelatorValue(value, tol * N, Method.TOEPLITZ, {"size": N})


# ---------------------------------------------------------------------------
# Fredholm: Laurent (Hankel) basis

def _laurent_nodes(k, jmax, tol):
    """Number of trapezoid nodes so that aliasing k^{M - jmax} stays below tol."""
    extra = math.ceil(float(mp.log(tol) / mp.log(k))) + 8
    return 2 * math.ceil((jmax + extra) / 2)


def laurent_coeffs_quadrature(k, jmax: int, tol=None):
    """Fourier coefficients gamma_j, pi_j (j = 0..jmax) of Q(z)Q(1/z) and P(z)P(1/z).

    Direct trapezoid cosine sums on |z| = 1, where the weights are |1 - k z|^{-1}
    and |1 - k z|.  O(jmax^2); kept as the independent check of the recurrence.
    Returns mpf lists.
    """
    k = mpf(k)
    tol = mpf(10) ** (-mp.dps - 5) if tol is None else mpf(tol)
    M = _laurent_nodes(k, jmax, tol)
    with numerics.fast_context():
        gk = numerics.to_gmpy(k)
        two_pi = 2 * gmpy2.const_pi()
        cos_table = np.array([gmpy2.cos(two_pi * r / M) for r in range(M)], dtype=object)
        half = M // 2
        wgt = np.array([1 if m in (0, half) else 2 for m in range(half + 1)], dtype=object)
        root = np.array([gmpy2.sqrt(1 - 2 * gk * cos_table[m] + gk * gk) for m in range(half + 1)],
                        dtype=object)
        fQ, fP = wgt / root, wgt * root
        idx = np.arange(half + 1)
        gam, pii = [], []
        for j in range(jmax + 1):
            c = cos_table[(j * idx) % M]
            gam.append(numerics.from_gmpy(fQ.dot(c) / M))
            pii.append(numerics.from_gmpy(fP.dot(c) / M))
    return gam, pii


def _miller(k, a, jmax, eps):
    """Coefficients c_0..c_jmax of ((1 - k z)(1 - k/z))^a by backward recurrence.

    From z(z-k)(1-kz) f' = -a k (z^2 - 1) f:
        k (n + a) c_n = (1 + k^2)(n - 1) c_{n-1} - k (n - 2 - a) c_{n-2},
    whose decaying solution is wanted; normalized with f(1) = (1 - k)^{2a}.
    The normalization sum stops D terms short of the start, where the
    dominant solution seeded at ``start`` is still below eps (k^D = eps).
    Works on gmpy2 numbers inside the caller's fast context.
    """
    D = math.ceil(math.log(eps) / math.log(k)) + 5
    start = jmax + 2 * D
    c = [gmpy2.mpfr(0)] * (start + 2)
    c[start] = gmpy2.mpfr(1e-300)
    kk = 1 + k * k
    for n in range(start + 1, 1, -1):
        # c_{n-2} from c_{n-1}, c_n
        c[n - 2] = (kk * (n - 1) * c[n - 1] - k * (n + a) * c[n]) / (k * (n - 2 - a))
        if abs(c[n - 2]) > gmpy2.mpfr(1e200):
            scale = c[n - 2]
            for i in range(n - 2, min(start, n + 2) + 1):
                c[i] = c[i] / scale
    total = c[0] + 2 * sum(c[1:jmax + D + 1])
    norm = (1 - k) ** (2 * a) / total
    return [x * norm for x in c[: jmax + 1]]


def laurent_coeffs(k, jmax: int):
    """gamma_j, pi_j for j = 0..jmax as gmpy2 numbers (caller holds a fast context)."""
    gk = numerics.to_gmpy(mpf(k))
    eps = 2.0 ** (-gmpy2.get_context().precision - 10)
    half = gmpy2.mpfr(1) / 2
    return _miller(gk, -half, jmax, eps), _miller(gk, half, jmax, eps)


def _laurent_size(N, k, t, tol, cap):
    """Smallest L with k^{2L}/L^2 below tol (1 - t)^2, an empirical truncation bound."""
    if k == 0:
        return 0
    target = mp.log(tol * (1 - t) ** 2 / 4)
    lk = mp.log(k)
    L = 2
    while (2 * L + N) * lk - 2 * mp.log(L) > target:
        L += 1 if L < 64 else max(1, L // 32)
        if L > cap:
            raise NoConvergence(f"Laurent truncation exceeds cap {cap} (k too close to 1)")
    return L


def _laurent_operator(N, k, L):
    """G = H_gamma H_pi restricted to L x L (gmpy2 object array) plus a tail estimate.

    The inner sum runs over all p with non-negligible coefficients; the
    displacement identity G[m+1, l+1] = G[m, l] - gamma_{N+m+1} pi_{N+l+1}
    fills the interior from the first row and column.
    """
    eps = 2.0 ** (-gmpy2.get_context().precision)
    P = math.ceil(math.log(eps) / math.log(float(k))) + 10
    jmax = N + P + L + 2
    gam, pii = laurent_coeffs(k, jmax)
    gam_a = np.array(gam, dtype=object)
    pii_a = np.array(pii, dtype=object)
    g_inner = gam_a[N + 1:N + 1 + P]
    p_inner = pii_a[N + 1:N + 1 + P]
    G = np.empty((L, L), dtype=object)
    for l in range(L):
        G[0, l] = g_inner.dot(pii_a[N + l + 1:N + l + 1 + P])
    for m in range(1, L):
        G[m, 0] = gam_a[N + m + 1:N + m + 1 + P].dot(p_inner)
    for m in range(1, L):
        G[m, 1:] = G[m - 1, :-1] - gam_a[N + m] * pii_a[N + 1:N + L]
    # dropped Hankel mass beyond the truncation, as a truncation-error proxy
    tail_g = sum(abs(x) for x in gam[N + L + 1:N + 2 * L + P])
    tail = tail_g * sum(abs(x) for x in pii[N + 1:N + 1 + P]) * abs(gam[N + 2 * L]) / abs(gam[N + L])
    return G, tail


# ---------------------------------------------------------------------------
# Fredholm: Nystrom basis

def _nystrom_points(k, rho, tol):
    # Trapezoid error for the Nystrom sums decays like max(k/rho, rho^2)^M.
    rate = max(k / rho, rho * rho)
    return max(16, 2 * math.ceil(float(mp.log(tol) / mp.log(rate)) / 2) + 8)


def nystrom_operator(N: int, k, rho, M: int):
    """M x M matrix T = A B on |z| = rho (gmpy2 complex object array).

    A_ab = w_a z_a^N Q(z_a)Q(1/z_a)/(1 - z_a z_b), B likewise with P(z)P(1/z),
    w_a = i z_a/M the trapezoid weight of dz/(2 pi).
    """
    k, rho = mpf(k), mpf(rho)
    if not k < rho < 1:
        raise BranchCutError(f"contour radius {rho} must satisfy k={k} < rho < 1")
    q = numerics.CircleQuadrature(rho, M)
    zs = [numerics.to_gmpy(z) for z in q.nodes]
    ws = [numerics.to_gmpy(w) for w in q.weights]
    gk = numerics.to_gmpy(k)
    dA, dB = [], []
    for z, w in zip(zs, ws):
        p1 = gmpy2.sqrt(1 - gk * z)
        p2 = gmpy2.sqrt(1 - gk / z)
        pp = p1 * p2
        base = w * z**N
        dA.append(base / pp)
        dB.append(base * pp)
    C = np.empty((M, M), dtype=object)
    for a in range(M):
        for b in range(a, M):
            C[a, b] = C[b, a] = 1 / (1 - zs[a] * zs[b])
    A = np.array(dA, dtype=object)[:, None] * C
    B = np.array(dB, dtype=object)[:, None] * C
    return A.dot(B)


# ---------------------------------------------------------------------------
# Fredholm front ends

def _resolve(N, t, cfg: FredholmConfig):
    t = mpf(t)
    if not 0 <= t < 1:
        raise DomainError(f"Fredholm route needs 0 <= t < 1, got {t}")
    k = mp.sqrt(t)
    tol = numerics.default_tol() if cfg.tol is None else mpf(cfg.tol)
    return t, k, tol


def _operator(N, k, tol, cfg: FredholmConfig):
    """Returns (matrix, sign, size, tail) with T = sign * matrix (gmpy2 array)."""
    if cfg.basis == "laurent":
        L = cfg.M if cfg.M is not None else _laurent_size(N, k, k * k, tol, cfg.L_cap)
        if L == 0:
            return np.empty((0, 0), dtype=object), -1, 0, gmpy2.mpfr(0)
        G, tail = _laurent_operator(N, k, L)
        return G, -1, L, tail
    rho = (1 + k) / 2 if cfg.radius is None else mpf(cfg.radius)
    if not k < rho < 1:
        raise BranchCutError(f"contour radius {rho} must satisfy k={k} < rho < 1")
    M = cfg.M if cfg.M is not None else _nystrom_points(k, rho, tol)
    if M > cfg.M_cap:
        raise NoConvergence(f"Nystrom size {M} exceeds cap {cfg.M_cap}")
    return nystrom_operator(N, k, rho, M), 1, M, gmpy2.mpfr(0)


def _trace_powers(T, n_max):
    """[Tr(T), Tr(T^2), ..., Tr(T^n_max)]."""
    traces = []
    if T.shape[0] == 0:
        return [gmpy2.mpfr(0)] * n_max
    P = T
    for n in range(1, n_max + 1):
        if n > 1:
            P = P.dot(T)
        traces.append(sum(P[i, i] for i in range(P.shape[0])))
    return traces


def _real(x, tol, what):
    x = numerics.from_gmpy(x)
    if isinstance(x, mpc):
        if abs(x.imag) > tol:
            raise InternalError(f"{what} has imaginary residue {x.imag}")
        return x.real
    return x


def fredholm_F2n(N: int, t, n: int, cfg: FredholmConfig | None = None) -> mpf:
    """F_N^(2n) = (-1)^{n+1}/n Tr(T^n) for the discretized cyclic operator."""
    cfg = cfg or FredholmConfig()
    if n < 1:
        raise DomainError("n must be >= 1")
    t, k, tol = _resolve(N, t, cfg)
    with numerics.fast_context():
        T, sign, _, _ = _operator(N, k, tol, cfg)
        tr = _trace_powers(T, n)[-1]
        value = (sign**n) * tr * (-1) ** (n + 1) / n
    return _real(value, tol, "F_N^(2n)")


def fredholm_corr(N: int, t, lam, cfg: FredholmConfig | None = None) -> CorrelatorValue:
    """C^- = (1 - t)^{1/4} exp(sum_n lambda^{2n} F_N^(2n))."""
    cfg = cfg or FredholmConfig()
    lam = mpf(lam)
    if not 0 <= lam <= 1:
        raise DomainError(f"lambda must lie in [0, 1], got {lam}")
    t, k, tol = _resolve(N, t, cfg)
    pref = (1 - t) ** (mpf(1) / 4)
    diag = {"basis": cfg.basis, "mode": cfg.mode}
    if lam == 0 or t == 0:
        return CorrelatorValue(pref, mpf(0), Method.FREDHOLM, {**diag, "size": 0})
    with numerics.fast_context():
        T, sign, size, tail = _operator(N, k, tol, cfg)
        diag["size"] = size
        l2 = numerics.to_gmpy(lam * lam)
        if cfg.mode == "logdet":
            I_plus = T * (sign * l2)
            for i in range(size):
                I_plus[i, i] += 1
            d = _real(numerics.det_fast(I_plus), tol, "Fredholm determinant")
            est = abs(d) * numerics.from_gmpy(l2 * tail) + abs(d) * mpf(10) ** (-mp.dps + 3) * max(size, 1)
            value = pref * d
            est = pref * est
        else:
            traces = _trace_powers(T, cfg.n_max)
            total = mpf(0)
            prev = None
            last = mpf(0)
            used = 0
            for n, tr in enumerate(traces, start=1):
                term = _real((sign * l2) ** n * tr * (-1) ** (n + 1) / n, tol, "trace term")
                total += term
                used = n
                last = abs(term)
                if last < tol:
                    break
                if prev is not None and n > 2 and last > prev:
                    raise NoConvergence(
                        f"lambda-series terms stopped decreasing at n={n}", last=total
                    )
                prev = last
            diag["n_used"] = used
            value = pref * mp.exp(total)
            est = value * (last + numerics.from_gmpy(l2 * tail))
    return CorrelatorValue(value, est, Method.FREDHOLM, diag)


# ---------------------------------------------------------------------------
# Closed forms

def theta_corr(N: int, t, lam) -> CorrelatorValue:
    """N = 0, 1 through theta-function ratios with lambda = cos u."""
    if N not in (0, 1):
        raise DomainError("theta formulas exist only for N = 0, 1")
    t, lam = mpf(t), mpf(lam)
    if not 0 <= lam <= 1:
        raise DomainError(f"lambda must lie in [0, 1], got {lam}")
    if not 0 <= t < 1:
        raise DomainError(f"theta route needs 0 <= t < 1, got {t}")
    if t == 0:
        return CorrelatorValue(mpf(1), mpf(0), Method.THETA, {})
    u = mp.acos(lam)
    c0, c1 = specialfn.theta_ratios(u, t)
    value = c0 if N == 0 else c1
    regime = "modular" if t > specialfn.MODULAR_SWITCH_T else "direct"
    return CorrelatorValue(value, mpf(10) ** (-mp.dps + 3), Method.THETA, {"series": regime})


def theta_corr_x(N: int, x, lam) -> mpf:
    """Theta route parametrized by x = 1 - t (no cancellation for tiny x)."""
    x = mpf(x)
    u = mp.acos(mpf(lam))
    c0, c1 = specialfn.theta_ratios(u, 1 - x, x)
    return c0 if N == 0 else c1


# Loose enough that a double literal such as 0.7071067811865476 selects cos(pi/4).
ALGEBRAIC_LAMBDA_TOL = mpf("1e-15")


def _is_close(a, b):
    return abs(mpf(a) - mpf(b)) <= ALGEBRAIC_LAMBDA_TOL


def algebraic_supported(N: int, lam) -> bool:
    lam = mpf(lam)
    return (_is_close(lam, _lam_pi4()) and N in (0, 1, 2)) or (_is_close(lam, mpf(1) / 2) and N == 0)


def _quartic(t):
    """Coefficients (highest first) of 16y^4 - 16y^3 + 8t(1-t)y + t(1-t) in y = C^3."""
    c = t * (1 - t)
    return [mpf(16), mpf(-16), mpf(0), 8 * c, c]


def _cos_pi3_rho(x, tol):
    """Positive root of rho^4 + 4 rho^3 - 16 x rho - 16 x, with C^3 = rho (rho + 2)/8.

    The quartic in y = C^3 is (4y^2 - 2y - 1/2)^2 - (t - 1/2)^2 (8y + 1), so the
    branch with y(0) = 1 is 4y^2 - 2y - 1/2 = (1/2 - t) sqrt(8y + 1).  In
    rho = sqrt(8y + 1) - 1 that branch becomes the quartic above, which has
    exactly one positive root (one sign change) lying in [(4x)^(1/3), (16x)^(1/3)).
    The polynomial is convex for rho > 0, so Newton from the upper bound
    decreases monotonically onto it; no continuation through the double root
    of the original quartic at t = 1/2 is needed.
    """
    x = mpf(x)
    coeffs = [mpf(1), mpf(4), mpf(0), -16 * x, -16 * x]
    dcoeffs = [mpf(4), mpf(12), mpf(0), -16 * x]
    rho0 = min(mpf(2), mp.cbrt(16 * x))
    rho = numerics.newton_polish(lambda r: mp.polyval(coeffs, r),
                                 lambda r: mp.polyval(dcoeffs, r), rho0, tol)
    if not mp.cbrt(4 * x) * (1 - mp.sqrt(tol)) <= rho <= rho0 * (1 + mp.sqrt(tol)):
        raise BranchLost(f"Newton left the positive root at x={x}: rho={rho}")
    return rho


def algebraic_corr(N: int, t, lam) -> CorrelatorValue:
    t, lam = mpf(t), mpf(lam)
    if not algebraic_supported(N, lam):
        raise DomainError(f"no algebraic closed form for N={N}, lambda={lam}")
    if not 0 <= t < 1:
        raise DomainError(f"algebraic route needs 0 <= t < 1, got {t}")
    if _is_close(lam, _lam_pi4()):
        x = 1 - t
        r = mp.sqrt(x)
        base = x ** (mpf(1) / 16)
        if N == 0:
            v = mpf(2) ** (-mpf(1) / 4) * base * (1 + r) ** (mpf(1) / 4)
        elif N == 1:
            v = mpf(2) ** (-mpf(3) / 4) * base * (1 + r) ** (mpf(3) / 4)
        else:
            v = mpf(2) ** (-mpf(5) / 4) * base * (1 + r) ** (mpf(5) / 4) * (5 - r) / 4
        return CorrelatorValue(v, mpf(10) ** (-mp.dps + 3), Method.ALGEBRAIC, {"form": "cos(pi/4)"})
    tol = mpf(10) ** (-mp.dps + 5)
    x = 1 - t
    rho = _cos_pi3_rho(x, tol)
    y = rho * (rho + 2) / 8
    if abs(mp.polyval(_quartic(t), y)) > mp.sqrt(tol):
        raise BranchLost(f"root does not satisfy the quartic at t={t}")
    return CorrelatorValue(mp.cbrt(y), tol, Method.ALGEBRAIC, {"form": "cos(pi/3) quartic"})


def algebraic_corr_x(N: int, x, lam) -> mpf:
    """algebraic_corr at t = 1 - x without forming 1 - x (useful for tiny x)."""
    x = mpf(x)
    if _is_close(lam, _lam_pi4()) or not algebraic_supported(N, lam):
        return algebraic_corr(N, 1 - x, lam).value
    rho = _cos_pi3_rho(x, mpf(10) ** (-mp.dps + 5))
    return mp.cbrt(rho * (rho + 2) / 8)


# ---------------------------------------------------------------------------
# Small-t expansion

def bcm_coefficient(N: int) -> Fraction:
    """(1/2)_N (3/2)_N / (4 [(N+1)!]^2), exactly."""
    num = Fraction(1)
    for i in range(N):
        num *= (Fraction(1, 2) + i) * (Fraction(3, 2) + i)
    return num / (4 * math.factorial(N + 1) ** 2)


def small_t_expansion(N: int, lam, order: int, cfg: FredholmConfig | None = None,
                      delta=None, extra_digits: int = 30) -> list:
    """Taylor coefficients c_0..c_order of C^-/(1-t)^{1/4} from Fredholm values at tiny t.

    Interpolates D(t) = det(I + lambda^2 T(t)) on t_j = j*delta (j = 0..P) in
    extended precision and reads off the polynomial coefficients.
    """
    if order < N + 1:
        raise DomainError("order must be at least N + 1")
    lam = mpf(lam)
    P = order + 12
    out_dps = mp.dps
    with mp.workdps(mp.dps + extra_digits):
        delta = mpf(10) ** -4 if delta is None else mpf(delta)
        base_cfg = cfg or FredholmConfig()
        cfg = FredholmConfig(
            radius=None, M=None, mode=base_cfg.mode, n_max=base_cfg.n_max,
            basis=base_cfg.basis, tol=mpf(10) ** (-mp.dps + 5),
        )
        ts = [j * delta for j in range(P + 1)]
        ys = []
        for tj in ts:
            val = fredholm_corr(N, tj, lam, cfg).value
            ys.append(val / (1 - tj) ** (mpf(1) / 4))
        # Newton divided differences -> monomial coefficients.
        coef = list(ys)
        for level in range(1, P + 1):
            for i in range(P, level - 1, -1):
                coef[i] = (coef[i] - coef[i - 1]) / (ts[i] - ts[i - level])
        poly = [mpf(0)] * (P + 1)
        for i in range(P, -1, -1):
            # poly <- poly * (t - ts[i]) + coef[i]
            new = [mpf(0)] * (P + 1)
            for d in range(P):
                new[d + 1] += poly[d]
                new[d] -= poly[d] * ts[i]
            new[0] += coef[i]
            poly = new
        noise = mpf(10) ** (-mp.dps + 5) / delta ** order
        result = poly[: order + 1]
    with mp.workdps(out_dps):
        lead = abs(result[N + 1]) if N + 1 <= order else mpf(1)
        if noise > lead * mpf(10) ** -6:
            raise PrecisionExhausted(f"differencing noise {noise} swamps coefficients")
        return [+c for c in result]


# ---------------------------------------------------------------------------
# Dispatcher

def choose_method(N: int, t, lam) -> Method:
    lam = mpf(lam)
    if N <= 1:
        return Method.THETA
    if algebraic_supported(N, lam):
        return Method.ALGEBRAIC
    if lam == 1:
        return Method.TOEPLITZ
    return Method.FREDHOLM


def check_request(req: CorrelatorRequest):
    lam, t = mpf(req.lam), mpf(req.t)
    if not 0 <= lam <= 1:
        raise DomainError(f"lambda must lie in [0, 1], got {lam}")
    if not 0 <= t < 1:
        raise DomainError(f"t must lie in [0, 1), got {t}")
    if req.method is Method.TOEPLITZ and lam != 1:
        raise DomainError("method toeplitz requires lambda = 1")
    if req.method is Method.THETA and req.N not in (0, 1):
        raise DomainError("method theta requires N in {0, 1}")
    if req.method is Method.ALGEBRAIC and not algebraic_supported(req.N, lam):
        raise DomainError("method algebraic requires (lambda, N) in {(cos pi/4, 0..2), (cos pi/3, 0)}")


def evaluate(req: CorrelatorRequest, cfg: FredholmConfig | None = None) -> CorrelatorValue:
    with numerics.precision(req.precision):
        check_request(req)
        t, lam = mpf(req.t), mpf(req.lam)
        method = req.method
        if method is Method.AUTO:
            method = choose_method(req.N, t, lam)
        if lam == 0:
            return CorrelatorValue((1 - t) ** (mpf(1) / 4), mpf(0), method, {"closed_form": "lambda=0"})
        if method is Method.THETA:
            return theta_corr(req.N, t, lam)
        if method is Method.ALGEBRAIC:
            return algebraic_corr(req.N, t, lam)
        if method is Method.TOEPLITZ:
            return toeplitz_corr(req.N, t)
        return fredholm_corr(req.N, t, lam, cfg)


def provider(method: Method | str = Method.AUTO, lam=None, cfg: FredholmConfig | None = None):
    """Function (N, t) -> C^- value for a fixed lambda, used by stencil-based checks."""
    method = Method(method)

    def corr(N, t, lam=lam):
        t = mpf(t)
        m = choose_method(N, t, lam) if method is Method.AUTO else method
        if m is Method.THETA:
            return theta_corr(N, t, lam).value
        if m is Method.ALGEBRAIC:
            return algebraic_corr(N, t, lam).value
        if m is Method.TOEPLITZ:
            return toeplitz_corr(N, t).value
        return fredholm_corr(N, t, lam, cfg).value

    return corr
