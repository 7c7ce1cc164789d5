"""Elliptic integrals, the nome, Jacobi theta series and a few scalar helpers.

Everything is real-valued: the theta argument u is real, and the imaginary
arguments produced by the modular transformation are handled by separate
``*_imag`` evaluators (cos -> cosh).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from mpmath import mp, mpf

from .errors import DomainError

# Beyond this t the theta series are evaluated through the modular transform,
# where the transformed nome is small.
MODULAR_SWITCH_T = mpf("0.99")


def _series_cutoff():
    return mpf(10) ** (-mp.dps - 5)


# ---------------------------------------------------------------------------
# Complete elliptic integrals and the nome

def agm(a, b):
    a, b = mpf(a), mpf(b)
    eps = mpf(2) ** (-mp.prec + 4)
    while abs(a - b) > eps * abs(a):
        a, b = (a + b) / 2, mp.sqrt(a * b)
    return (a + b) / 2


def elliptic_K(k) -> mpf:
    """Complete elliptic integral of the first kind K(k), modulus convention."""
    k = mpf(k)
    if not 0 <= k < 1:
        raise DomainError(f"elliptic_K needs 0 <= k < 1, got {k}")
    return mp.pi / (2 * agm(1, mp.sqrt((1 - k) * (1 + k))))


def _K_from_kprime(kp) -> mpf:
    # K at complementary modulus sqrt(1 - kp^2): agm(1, kp) needs kp only,
    # which avoids forming 1 - t when t is close to 1.
    return mp.pi / (2 * agm(1, kp))


@dataclass(frozen=True)
class EllipticPair:
    K: mpf
    Kprime: mpf


@dataclass(frozen=True)
class Nome:
    q: mpf
    t: mpf
    K: mpf
    Kprime: mpf

    @property
    def q_dual(self) -> mpf:
        """Nome of the complementary modulus, exp(-pi K/K')."""
        return mp.exp(-mp.pi * self.K / self.Kprime)


def elliptic_pair(t, x=None) -> EllipticPair:
    """K(k), K(k') for k^2 = t; ``x = 1 - t`` may be supplied exactly."""
    t = mpf(t)
    x = 1 - t if x is None else mpf(x)
    k, kp = mp.sqrt(t), mp.sqrt(x)
    return EllipticPair(_K_from_kprime(kp), _K_from_kprime(k))


def nome(t, x=None) -> Nome:
    """q = exp(-pi K'(k)/K(k)) with k = sqrt(t)."""
    t = mpf(t)
    if not 0 < t < 1:
        raise DomainError(f"nome needs 0 < t < 1, got {t}")
    pair = elliptic_pair(t, x)
    return Nome(mp.exp(-mp.pi * pair.Kprime / pair.K), t, pair.K, pair.Kprime)


# ---------------------------------------------------------------------------
# Theta series

def _check_q(q):
    q = mpf(q)
    if not 0 <= q < 1:
        raise DomainError(f"theta needs 0 <= q < 1, got {q}")
    return q


def theta(j: int, u, q) -> mpf:
    """Jacobi theta_j(u; q) for j in {2, 3, 4}, u real."""
    q, u = _check_q(q), mpf(u)
    cut = _series_cutoff()
    if j == 2:
        total, n = mpf(0), 0
        while True:
            term = q ** ((n + mpf(1) / 2) ** 2)
            if term < cut:
                return 2 * total
            total += term * mp.cos((2 * n + 1) * u)
            n += 1
    if j not in (3, 4):
        raise DomainError(f"theta index must be 2, 3 or 4, got {j}")
    total, n = mpf(0), 1
    while True:
        term = q ** (n * n)
        if term < cut:
            return 1 + 2 * total
        sgn = -1 if (j == 4 and n % 2) else 1
        total += sgn * term * mp.cos(2 * n * u)
        n += 1


def theta2_du(u, q) -> mpf:
    """d/du theta_2(u; q), summed termwise."""
    q, u = _check_q(q), mpf(u)
    cut = _series_cutoff()
    total, n = mpf(0), 0
    while True:
        m = 2 * n + 1
        term = q ** ((n + mpf(1) / 2) ** 2) * m
        if term < cut:
            return -2 * total
        total += term * mp.sin(m * u)
        n += 1


def theta2_du_over_sin(u, q) -> mpf:
    """-theta_2'(u; q)/sin(u), regular at u = 0.

    sin((2n+1)u)/sin(u) is the Chebyshev polynomial U_{2n}(cos u), generated by
    its three-term recurrence so u = 0 needs no special case.
    """
    q, u = _check_q(q), mpf(u)
    cut = _series_cutoff()
    c = mp.cos(u)
    u_prev, u_cur = mpf(1), 2 * c  # U_0, U_1
    total, n = mpf(0), 0
    while True:
        m = 2 * n + 1
        term = q ** ((n + mpf(1) / 2) ** 2) * m
        if term < cut:
            return 2 * total
        # u_prev holds U_{2n}
        total += term * u_prev
        u_prev, u_cur = 2 * c * u_cur - u_prev, 2 * c * (2 * c * u_cur - u_prev) - u_cur
        n += 1


def theta_imag(j: int, w, q) -> mpf:
    """theta_j(i w; q) for real w (j = 2, 3, 4); cos of imaginary argument -> cosh."""
    q, w = _check_q(q), mpf(w)
    cut = _series_cutoff()
    total = mpf(0)
    if j == 2:
        n = 0
        while True:
            e = (n + mpf(1) / 2) ** 2
            term = q**e * mp.cosh((2 * n + 1) * w)
            if q**e * mp.exp((2 * n + 1) * abs(w)) < cut and n > 0:
                return 2 * total
            total += term
            n += 1
    if j not in (3, 4):
        raise DomainError(f"theta index must be 2, 3 or 4, got {j}")
    n = 1
    while True:
        bound = q ** (n * n) * mp.exp(2 * n * abs(w))
        if bound < cut and n > 1:
            return 1 + 2 * total
        sgn = -1 if (j == 4 and n % 2) else 1
        total += sgn * q ** (n * n) * mp.cosh(2 * n * w)
        n += 1


def _theta4_imag_parts(w, q, a):
    """Returns (theta_4(iw;q), S) with S = d/du theta_4(i u a; q) / u evaluated at w = u a.

    S is sum 2 (-1)^n q^{n^2} (2 n a) sinh(2 n w)/u with u = w/a, written through
    sinh(x)/x so that w = 0 is regular.
    """
    cut = _series_cutoff()
    th, S, n = mpf(1), mpf(0), 1
    while True:
        qn = q ** (n * n)
        if qn * mp.exp(2 * n * abs(w)) * (1 + 4 * n * n * a * a) < cut and n > 1:
            return th, S
        sgn = -1 if n % 2 else 1
        th += 2 * sgn * qn * mp.cosh(2 * n * w)
        x = 2 * n * w
        sinhc = mp.sinh(x) / x if x != 0 else mpf(1)
        S += 2 * sgn * qn * (2 * n * a) * (2 * n * a) * sinhc
        n += 1


# ---------------------------------------------------------------------------
# Correlator building blocks used by the theta formulas

def theta_ratios(u, t, x=None) -> tuple[mpf, mpf]:
    """(C0, C1) building blocks at (u, t).

    C0 = theta_3(u;q)/theta_3(0;q)
    C1 = -theta_2'(u;q)/(sin u * theta_2(0;q) * theta_3(0;q)^2)

    Uses the direct q-series for t <= 0.99 and the modular transform (nome
    exp(-pi K/K')) above it.
    """
    u = mpf(u)
    nm = nome(t, x)
    if nm.t <= MODULAR_SWITCH_T:
        q = nm.q
        c0 = theta(3, u, q) / theta(3, 0, q)
        c1 = theta2_du_over_sin(u, q) / (theta(2, 0, q) * theta(3, 0, q) ** 2)
        return c0, c1
    return _theta_ratios_modular(u, nm)


def _theta_ratios_modular(u, nm: Nome) -> tuple[mpf, mpf]:
    a = nm.K / nm.Kprime
    qd = nm.q_dual
    w = u * a
    gauss = mp.exp(-u * u * a / mp.pi)
    sa = mp.sqrt(a)
    # theta_3(u;q) = sqrt(a) e^{-u^2 a/pi} theta_3(-i u a; qd), and theta_3 is even in w.
    th3_u = sa * gauss * theta_imag(3, w, qd)
    th3_0 = sa * theta_imag(3, 0, qd)
    # theta_2(u;q) = sqrt(a) e^{-u^2 a/pi} theta_4(-i u a; qd)
    th4_w, S = _theta4_imag_parts(w, qd, a)
    th2_0 = sa * theta_imag(4, 0, qd)
    # -theta_2'(u)/u = sqrt(a) e^{-u^2 a/pi} [(2a/pi) theta_4 - S]
    minus_d_over_u = sa * gauss * (2 * a / mp.pi * th4_w - S)
    u_over_sin = u / mp.sin(u) if u != 0 else mpf(1)
    c0 = th3_u / th3_0
    c1 = minus_d_over_u * u_over_sin / (th2_0 * th3_0**2)
    return c0, c1


# ---------------------------------------------------------------------------
# Scalar helpers

def pochhammer(a, n: int) -> mpf:
    """Rising factorial (a)_n; rational a is kept exact until the final conversion."""
    if n < 0:
        raise DomainError("pochhammer needs n >= 0")
    if isinstance(a, (int, Fraction)):
        acc = Fraction(1)
        for i in range(n):
            acc *= Fraction(a) + i
        return mpf(acc.numerator) / acc.denominator
    a = mpf(a)
    acc = mpf(1)
    for i in range(n):
        acc *= a + i
    return acc


def harmonic(N: int) -> mpf:
    if N < 0:
        raise DomainError("harmonic needs N >= 0")
    return mp.fsum(mpf(1) / n for n in range(1, N + 1))


def euler_gamma() -> mpf:
    return +mp.euler


def t_from_couplings(Ev_over_kT, Eh_over_kT) -> tuple[mpf, mpf]:
    """(t, k) with k = (sinh 2Ev/kT sinh 2Eh/kT)^-1 and t = k^2."""
    ev, eh = mpf(Ev_over_kT), mpf(Eh_over_kT)
    if ev <= 0 or eh <= 0:
        raise DomainError("coupling ratios must be positive")
    k = 1 / (mp.sinh(2 * ev) * mp.sinh(2 * eh))
    return k * k, k
