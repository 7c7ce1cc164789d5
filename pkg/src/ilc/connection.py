"""Connection constants sigma(lambda), shat(N, sigma), K(N; sigma) and their checks.

Also the Ising (sigma -> 0) limit at t = 1, the large-N form of K, the Toda
recursion in N, and the two identities that drive the inductive proof of the
constants (a ratio identity for K and a recursion for shat).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

from mpmath import mp, mpf

from . import numerics, painleve
from .errors import DegenerateExponent, DomainError


class Source(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    FITTED = "fitted"


def sigma_of_lambda(lam) -> mpf:
    lam = mpf(lam)
    if not 0 <= lam <= 1:
        raise DomainError(f"lambda must lie in [0, 1], got {lam}")
    return 2 * mp.acos(lam) / mp.pi


def lambda_of_sigma(sigma) -> mpf:
    sigma = mpf(sigma)
    if not 0 <= sigma <= 1:
        raise DomainError(f"sigma must lie in [0, 1], got {sigma}")
    return mp.cos(mp.pi * sigma / 2)


def _check(N: int, sigma):
    if N < 0:
        raise DomainError(f"N must be >= 0, got {N}")
    sigma = mpf(sigma)
    if not 0 <= sigma <= 1:
        raise DomainError(f"sigma must lie in [0, 1], got {sigma}")
    return sigma


def shat(N: int, sigma) -> mpf:
    sigma = _check(N, sigma)
    acc = mpf(16) ** sigma
    for n in range(1, N + 1):
        acc *= (1 - sigma / (2 * n)) / (1 + sigma / (2 * n))
    return acc


def bigK(N: int, sigma) -> mpf:
    """K(N; sigma); sigma/sin(pi sigma/2) is written through sinc so sigma = 0 is regular."""
    sigma = _check(N, sigma)
    ratio = 2 / (mp.pi * mp.sinc(mp.pi * sigma / 2))
    acc = mpf(2) ** (-sigma * sigma) * ratio**N
    for m in range(1, N):
        m2 = 4 * mpf(m) ** 2
        acc *= (1 - 1 / m2) ** (m - N) * (1 - sigma * sigma / m2) ** (N - m)
    return acc


def s_from_shat(sigma, sh) -> mpf:
    """s in the t -> 1 expansion of h from shat in that of C^-: s = shat (1-sigma)/(1+sigma)."""
    sigma = mpf(sigma)
    if sigma == 1:
        raise DegenerateExponent("s is undefined at sigma = 1")
    return mpf(sh) * (1 - sigma) / (1 + sigma)


def shat_from_s(sigma, s) -> mpf:
    sigma = mpf(sigma)
    if sigma == 1:
        raise DegenerateExponent("shat cannot be recovered from s at sigma = 1")
    return mpf(s) * (1 + sigma) / (1 - sigma)


@dataclass(frozen=True)
class ConnectionConstants:
    sigma: mpf
    shat: mpf
    bigK: mpf
    s: mpf
    N: int
    source: Source = Source.CLOSED_FORM

    @classmethod
    def from_lambda(cls, N: int, lam) -> "ConnectionConstants":
        sigma = sigma_of_lambda(lam)
        sh = shat(N, sigma)
        s = s_from_shat(sigma, sh) if sigma < 1 else mpf(0)
        return cls(sigma, sh, bigK(N, sigma), s, N, Source.CLOSED_FORM)

    @classmethod
    def from_fit(cls, N: int, fit) -> "ConnectionConstants":
        return cls(fit.sigma_est, fit.shat_est, fit.K_est, fit.s_est, N, Source.FITTED)


# ---------------------------------------------------------------------------
# Large N

def _zeta_log_sum(a) -> mpf:
    """sum_{k>=2} a^k zeta(2k-1)/k, i.e. sum_m [-m log(1 - a/m^2) - a/m], for 0 <= a < 1."""
    a = mpf(a)
    cut = mpf(10) ** (-mp.dps - 5)
    total, k = mpf(0), 2
    while True:
        term = a**k * mp.zeta(2 * k - 1) / k
        total += term
        if abs(term) < cut:
            return total
        k += 1


def bigK_asymptotic(N: int, sigma) -> mpf:
    """Leading large-N form of K(N; sigma).

    The exponential factor is e^{+(sigma^2-1)(1+gamma)/4}: rewriting
    (sigma/sin(pi sigma/2))^N with the Wallis and sine products leaves the m >= N
    tails as (1 - sigma^2/4m^2)^{-N} and (1 - 1/4m^2)^{N}, which tend to
    e^{sigma^2/4} and e^{-1/4}.  The two infinite products are summed exactly
    through the zeta series of their logarithms, so no tail estimate is needed.
    """
    if N < 1:
        raise DomainError("bigK_asymptotic needs N >= 1")
    sigma = _check(N, sigma)
    s2 = sigma * sigma
    log_val = ((s2 - 1) / 4 * mp.log(N) - s2 * mp.log(2) + (s2 - 1) * (1 + mp.euler) / 4
               + _zeta_log_sum(s2 / 4) - _zeta_log_sum(mpf(1) / 4))
    return mp.exp(log_val)


# ---------------------------------------------------------------------------
# Ising limit

def ising_t1_constant(N: int) -> mpf:
    if N < 0:
        raise DomainError("N must be >= 0")
    acc = (2 / mp.pi) ** N
    for m in range(1, N + 1):
        acc *= (1 - 1 / (4 * mpf(m) ** 2)) ** (m - N)
    return acc


def ising_t1_expansion(N: int, x) -> mpf:
    x = mpf(x)
    H = mp.fsum(mpf(1) / n for n in range(1, N + 1))
    return ising_t1_constant(N) * (1 - mpf(N) / 4 * x * (mp.log(x) - mp.log(16) + H))


def sigma_zero_limit_check(N: int, x, sigma_small) -> mpf:
    """Relative gap between the generic t -> 1 form at small sigma and the Ising form.

    The x^{1-sigma} and x^{1+sigma} terms carry 1/sigma prefactors that cancel,
    so the generic side is evaluated with extra digits.
    """
    x, sigma_small = mpf(x), mpf(sigma_small)
    if not 0 < sigma_small <= mpf("1e-4"):
        raise DomainError("sigma_small must lie in (0, 1e-4]")
    with mp.workdps(mp.dps + 2 * int(-mp.log10(sigma_small)) + 10):
        generic = painleve.corr_expansion_t1(x, sigma_small, shat(N, sigma_small),
                                             bigK(N, sigma_small), N)
        ising = ising_t1_expansion(N, x)
        rel = abs(generic / ising - 1)
    return +rel


# ---------------------------------------------------------------------------
# Identities in N

def k_ratio_check(N: int, sigma) -> mpf:
    if N < 1:
        raise DomainError("k_ratio_check needs N >= 1")
    sigma = mpf(sigma)
    lhs = bigK(N + 1, sigma) * bigK(N - 1, sigma) / bigK(N, sigma) ** 2
    return lhs - (N * N - sigma * sigma / 4) / (N * N - mpf(1) / 4)


def shat_recurrence_residual(N: int, sigma, shat_fn: Callable | None = None) -> mpf:
    """Residual of the three-term recursion in N that shat must satisfy."""
    if N < 1:
        raise DomainError("shat_recurrence_residual needs N >= 1")
    sigma = mpf(sigma)
    sh = shat if shat_fn is None else shat_fn
    s0, s1, s2 = sh(N - 1, sigma), sh(N, sigma), sh(N + 1, sigma)
    return (-s1 * sigma * (1 - sigma) * (2 * N + sigma)
            - (N * N - sigma * sigma / 4) * (s2 * (2 * N + 2 + sigma) + s0 * (2 * N - 2 + sigma)
                                             - 2 * s1 * (2 * N + sigma)))


def toda_residual(N: int, t, provider: Callable, step=None, extra_digits: int = 15) -> mpf:
    """(1-t)^2 d/dt[t d/dt ln C(N)] + N^2 - (N^2 - 1/4) C(N+1) C(N-1)/C(N)^2.

    ``provider(n, t)`` returns C^-(n, t); derivatives are fourth-order central
    differences taken with ``extra_digits`` guard digits.
    """
    if N < 1:
        raise DomainError("toda_residual needs N >= 1")
    t = mpf(t)
    base = mp.dps
    step = numerics.default_step(base) if step is None else mpf(step)
    with mp.workdps(base + extra_digits):
        vals = numerics.stencil_values(lambda s: mp.log(provider(N, s)), t, step, 2)
        L1, L2 = numerics.derivatives_from_values(vals, step, (1, 2))
        # d/dt[t L'] = L' + t L''
        lhs = (1 - t) ** 2 * (L1 + t * L2)
        cN = mp.exp(vals[0])
        ratio = provider(N + 1, t) * provider(N - 1, t) / cN**2
        res = lhs + N * N - (N * N - mpf(1) / 4) * ratio
    return +res
