"""Sigma-form Painleve VI for h(t) = t(t-1) d/dt ln C^- - t/4.

The second-order equation

    (t(t-1)h'')^2 + 4h'((t-1)h' - h - 1/4)(th' - h) = N^2((t-1)h' - h)^2

is quadratic in h''.  Differentiating it once and cancelling the common factor
h'' gives a third-order equation that is linear in h''' and regular where the
radicand vanishes, so integration never has to pick a square-root branch; the
original equation is then a conserved quantity whose residual is recorded.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

from mpmath import mp, mpf

from . import correlators, numerics, specialfn
from .errors import BranchError, DegenerateExponent, DomainError, FitFailed, IntegrationFailed


class InitSource(str, enum.Enum):
    LEADING_TERM = "leading"
    FREDHOLM_SEEDED = "fredholm"


@dataclass(frozen=True)
class HState:
    t: mpf
    h: mpf
    hp: mpf
    hpp: mpf
    branch_sign: int
    residual: mpf = mpf(0)
    lnC: mpf | None = None


@dataclass
class SigmaTrajectory:
    states: list
    N: int
    lam: mpf
    init_source: InitSource
    tol: mpf
    diagnostics: dict = field(default_factory=dict)

    def at(self, t) -> HState:
        t = mpf(t)
        for s in self.states:
            if abs(s.t - t) <= mpf(10) ** (-mp.dps + 5):
                return s
        raise KeyError(f"no state recorded at t={t}")


@dataclass(frozen=True)
class ConnectionFit:
    sigma_est: mpf
    s_est: mpf
    shat_est: mpf
    K_est: mpf
    fit_window: tuple
    residual_norm: mpf
    degenerate: bool = False
    diagnostics: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# h from a correlator

def ln_derivatives(corr: Callable, t, orders=(1, 2), step=None, extra_digits: int = 20):
    """Central-difference derivatives of ln corr(t), evaluated with extra digits."""
    t = mpf(t)
    base = mp.dps
    step = numerics.default_step(base) if step is None else mpf(step)
    reach = 3 if 3 in orders else 2
    with mp.workdps(base + extra_digits):
        vals = numerics.stencil_values(lambda s: mp.log(corr(s)), t, step, reach)
        out = numerics.derivatives_from_values(vals, step, orders)
    return [+d for d in out]


def h_derivs(corr: Callable, t, step=None, extra_digits: int = 20):
    """(h, h', h'') from a correlator by differencing ln C."""
    t = mpf(t)
    L1, L2, L3 = ln_derivatives(corr, t, (1, 2, 3), step, extra_digits)
    tt = t * (t - 1)
    h = tt * L1 - t / 4
    hp = (2 * t - 1) * L1 + tt * L2 - mpf(1) / 4
    hpp = 2 * L1 + 2 * (2 * t - 1) * L2 + tt * L3
    return h, hp, hpp


def h_from_corr(corr: Callable, t, step=None, extra_digits: int = 20):
    """(h, h') from a correlator function t -> C^-."""
    t = mpf(t)
    L1, L2 = ln_derivatives(corr, t, (1, 2), step, extra_digits)
    tt = t * (t - 1)
    return tt * L1 - t / 4, (2 * t - 1) * L1 + tt * L2 - mpf(1) / 4


def leading_h(N: int, lam, t):
    """Small-t one-parameter boundary data: h -> -lambda^2 t^{N+1} (1/2)_N (3/2)_N / (4 N! (N+1)!)."""
    c = mpf(lam) ** 2 * specialfn.pochhammer(mpf(1) / 2, N) * specialfn.pochhammer(mpf(3) / 2, N)
    c /= 4 * mp.factorial(N) * mp.factorial(N + 1)
    t = mpf(t)
    h = -c * t ** (N + 1)
    hp = -c * (N + 1) * t**N
    hpp = -c * (N + 1) * N * t ** (N - 1) if N >= 1 else mpf(0)
    return h, hp, hpp


# ---------------------------------------------------------------------------
# The equation

def radicand(t, h, hp, N: int):
    """(t(t-1)h'')^2 as forced by the equation."""
    a = (t - 1) * hp - h
    b = t * hp - h
    return N * N * a * a - 4 * hp * (a - mpf(1) / 4) * b


def sigma_residual(t, h, hp, hpp, N: int):
    """LHS - RHS of the sigma form."""
    t = mpf(t)
    w = t * (t - 1) * hpp
    return w * w - radicand(t, h, hp, N)


def hpp_solve(state: HState, N: int, tol=None) -> mpf:
    """h'' = branch_sign * sqrt(radicand)/(t(t-1)); small negative radicands clamp to 0."""
    tol = numerics.default_tol() if tol is None else mpf(tol)
    t = state.t
    if not 0 < t < 1:
        raise DomainError(f"t must lie in (0, 1), got {t}")
    R = radicand(t, state.h, state.hp, N)
    if R < -tol:
        raise BranchError(f"negative radicand {R} at t={t}")
    R = max(R, mpf(0))
    return state.branch_sign * mp.sqrt(R) / (t * (t - 1))


def third_order_rhs(N: int):
    """y = (h, h', h'') -> y' for the differentiated equation."""
    N2 = N * N
    quarter = mpf(1) / 4

    def f(t, y):
        h, hp, hpp = y
        tm = t - 1
        tt = t * tm
        a = tm * hp - h
        b = t * hp - h
        D = 2 * N2 * a * tm - 4 * (a - quarter) * b - 4 * tm * hp * b - 4 * t * hp * (a - quarter)
        hppp = (D / (2 * tt) - (2 * t - 1) * hpp) / tt
        return [hp, hpp, hppp]

    return f


# ---------------------------------------------------------------------------
# Extrapolated-midpoint (Gragg-Bulirsch-Stoer) integrator

def _gbs_step(f, t, y, H, f0, k):
    """One GBS macro-step of order 2k; returns (y_new, error_vector)."""
    table = []
    for j in range(1, k + 1):
        n = 2 * j
        h = H / n
        z_prev = y
        z = [yi + h * fi for yi, fi in zip(y, f0)]
        for m in range(1, n):
            fz = f(t + m * h, z)
            z_prev, z = z, [zp + 2 * h * fi for zp, fi in zip(z_prev, fz)]
        fz = f(t + H, z)
        row = [[(zi + zpi + h * fi) / 2 for zi, zpi, fi in zip(z, z_prev, fz)]]
        for i in range(1, j):
            ratio = mpf(n) ** 2 / mpf(2 * (j - i)) ** 2 - 1
            prev, up = row[i - 1], table[-1][i - 1]
            row.append([p + (p - u) / ratio for p, u in zip(prev, up)])
        table.append(row)
    best = table[-1][-1]
    err = [b - c for b, c in zip(best, table[-1][-2])]
    return best, err


def integrate_ode(f, t0, y0, t_targets, tol, k: int = 8, H0=None, max_steps: int = 100000,
                  on_accept=None):
    """Adaptive GBS integration from t0 through the increasing ``t_targets``.

    Every target is hit exactly; ``on_accept(t, y)`` sees each accepted state.
    """
    tol = mpf(tol)
    t, y = mpf(t0), [mpf(v) for v in y0]
    targets = [mpf(s) for s in t_targets]
    H = (targets[-1] - t) / 100 if H0 is None else mpf(H0)
    order = 2 * k
    steps = rejected = 0
    for target in targets:
        while t < target:
            if steps + rejected > max_steps:
                raise IntegrationFailed(f"step budget exhausted at t={t}")
            H_try = min(H, target - t)
            if H_try <= abs(t) * mpf(10) ** (-mp.dps + 10):
                raise IntegrationFailed(f"step size underflow at t={t}")
            f0 = f(t, y)
            y_new, err = _gbs_step(f, t, y, H_try, f0, k)
            scale = [tol * (1 + abs(v)) for v in y_new]
            e = max(abs(ei) / si for ei, si in zip(err, scale))
            if not mp.isfinite(e):
                H = H_try / 4
                rejected += 1
                continue
            fac = mpf("0.9") * (1 / e) ** (mpf(1) / (order - 1)) if e > 0 else mpf(4)
            fac = min(mpf(4), max(mpf("0.2"), fac))
            if e <= 1:
                t = target if H_try == target - t else t + H_try
                y = y_new
                steps += 1
                if on_accept is not None:
                    on_accept(t, y)
                # a step shortened to land on a target should not shrink H
                H = max(H, H_try) * fac if H_try < H else H_try * fac
            else:
                H = H_try * fac
                rejected += 1
    return t, y, {"steps": steps, "rejected": rejected}


# ---------------------------------------------------------------------------
# Trajectories

def initial_state(N: int, lam, t0, init_source: InitSource, cfg=None) -> tuple:
    """(h, h', h'') at t0 from either boundary source."""
    init_source = InitSource(init_source)
    t0 = mpf(t0)
    if init_source is InitSource.LEADING_TERM:
        return leading_h(N, lam, t0)
    extra = 25
    with mp.workdps(mp.dps + extra):
        fcfg = correlators.FredholmConfig(tol=mpf(10) ** (-mp.dps + 5)) if cfg is None else cfg

        def corr(t):
            return correlators.fredholm_corr(N, t, lam, fcfg).value

    h, hp, hpp = h_derivs(corr, t0, extra_digits=extra)
    R = radicand(t0, h, hp, N)
    if R > 0:
        # put h'' exactly on the constraint, keeping the sign found by differencing
        sign = 1 if hpp * t0 * (t0 - 1) >= 0 else -1
        hpp_c = sign * mp.sqrt(R) / (t0 * (t0 - 1))
        if abs(hpp_c - hpp) <= mpf(10) ** (-mp.dps // 3) * (1 + abs(hpp)):
            hpp = hpp_c
    return h, hp, hpp


def integrate(N: int, lam, t0="0.05", t1=None,
              init_source: InitSource = InitSource.FREDHOLM_SEEDED, tol=None,
              t_eval=(), order_k: int = 8, cfg=None) -> SigmaTrajectory:
    """March (h, h', h'') from t0 to t1, recording every accepted state."""
    t1 = 1 - mpf(10) ** -5 if t1 is None else t1
    t0, t1, lam = mpf(t0), mpf(t1), mpf(lam)
    if not 0 < t0 < t1 < 1:
        raise DomainError("need 0 < t0 < t1 < 1")
    tol = numerics.default_tol() if tol is None else mpf(tol)
    init_source = InitSource(init_source)
    y0 = list(initial_state(N, lam, t0, init_source, cfg))
    rhs = third_order_rhs(N)
    if init_source is InitSource.FREDHOLM_SEEDED:
        # carry ln C along: d ln C/dt = (h + t/4)/(t(t-1)), so C is known up to t1
        y0.append(mp.log(correlators.fredholm_corr(N, t0, lam, cfg).value))

        def f(t, y):
            return rhs(t, y[:3]) + [(y[0] + t / 4) / (t * (t - 1))]
    else:
        f = rhs

    def state(t, y):
        w = t * (t - 1) * y[2]
        return HState(t, y[0], y[1], y[2], 1 if w >= 0 else -1, sigma_residual(t, *y[:3], N),
                      y[3] if len(y) > 3 else None)

    states = [state(t0, y0)]
    targets = sorted({mpf(s) for s in t_eval if t0 < mpf(s) < t1} | {t1})
    flips = []

    def on_accept(t, y):
        st = state(t, y)
        if st.branch_sign != states[-1].branch_sign:
            flips.append(t)
        states.append(st)

    _, _, info = integrate_ode(f, t0, y0, targets, tol, k=order_k, on_accept=on_accept)
    info["branch_flips"] = [mp.nstr(s, 12) for s in flips]
    info["max_residual"] = max(abs(s.residual) for s in states)
    return SigmaTrajectory(states, N, lam, init_source, tol, info)


# ---------------------------------------------------------------------------
# t -> 1 expansions

def _check_sigma(sigma):
    sigma = mpf(sigma)
    if sigma <= 0 or sigma >= 1:
        raise DegenerateExponent(f"sigma={sigma} needs its limiting form")
    return sigma


def h_expansion_t1(x, sigma, s, N: int):
    """h near t = 1 through the x^{1+sigma} term (x = 1 - t)."""
    x, sigma, s = mpf(x), _check_sigma(sigma), mpf(s)
    one_m = 1 - sigma * sigma
    return (-one_m / 4 + one_m * x / 8
            + s * (1 + sigma) * (2 * N + sigma) * x ** (1 - sigma) / (16 * sigma)
            - (1 - sigma) * (2 * N - sigma) * x ** (1 + sigma) / (16 * sigma * s))


def corr_bracket_t1(x, sigma, shat, N: int):
    """The bracket multiplying K x^{sigma^2/4} in the t -> 1 expansion of C^-."""
    x, sigma, shat = mpf(x), _check_sigma(sigma), mpf(shat)
    return (1 - (1 - sigma * sigma) * x / 8
            + shat * (2 * N + sigma) * x ** (1 - sigma) / (16 * sigma)
            - (2 * N - sigma) * x ** (1 + sigma) / (16 * sigma * shat))


def corr_expansion_t1(x, sigma, shat, K, N: int):
    x = mpf(x)
    sigma = _check_sigma(sigma)
    return mpf(K) * x ** (sigma * sigma / 4) * corr_bracket_t1(x, sigma, shat, N)


# ---------------------------------------------------------------------------
# Connection fit

def exponent_basis(sigma, count: int, e_max=3, merge="1e-3") -> list:
    """Smallest positive exponents p + q sigma (|q| <= p) of the t -> 1 double series."""
    sigma, e_max, merge = mpf(sigma), mpf(e_max), mpf(merge)
    raw = []
    for p in range(1, int(e_max) + 3):
        for q in range(-p, p + 1):
            e = p + q * sigma
            if 0 < e <= e_max:
                raw.append(e)
    raw.sort()
    out = []
    for e in raw:
        if not out or e - out[-1] > merge:
            out.append(e)
    return out[:count]


def _fit_at_sigma(xs, hs, sigma, n_exp):
    exps = exponent_basis(sigma, n_exp)
    A = mp.matrix(len(xs), len(exps) + 1)
    b = mp.matrix(len(xs), 1)
    for i, (x, h) in enumerate(zip(xs, hs)):
        A[i, 0] = 1
        for j, e in enumerate(exps):
            A[i, j + 1] = x**e
        b[i] = h
    coef, res = mp.qr_solve(A, b)
    return exps, [coef[i] for i in range(len(exps) + 1)], res


def corr_at_x(N: int, x, lam, cfg=None):
    """C^- at t = 1 - x, using the theta route in x for N <= 1."""
    x, lam = mpf(x), mpf(lam)
    if N <= 1:
        return correlators.theta_corr_x(N, x, lam)
    if correlators.algebraic_supported(N, lam):
        return correlators.algebraic_corr_x(N, x, lam)
    return correlators.fredholm_corr(N, 1 - x, lam, cfg).value


def fit_connection(traj: SigmaTrajectory, x_window=("1e-6", "1e-4"),
                   corr: Callable | None = None, min_points: int = 8) -> ConnectionFit:
    """Extract (sigma, s, shat, K) from the t -> 1 end of a trajectory.

    sigma solves c0(sigma) = -(1 - sigma^2)/4, where c0 is the constant term of a
    least-squares fit of h(x) over the generalized power basis x^{p + q sigma};
    this is Richardson extrapolation of sqrt(1 + 4h) to x = 0 with the
    exponents the expansion actually produces.  s follows from the x^{1-sigma}
    coefficient and K from dividing the correlator by the fitted expansion.
    """
    N = traj.N
    x_lo, x_hi = (mpf(v) for v in x_window)
    pts = [(1 - s.t, s.h) for s in traj.states if x_lo * (1 - mpf(10) ** -20) <= 1 - s.t <= x_hi * (1 + mpf(10) ** -20)]
    if abs(traj.lam) == 0 or max(abs(s.h) for s in traj.states) <= traj.tol:
        shat1 = mpf(16) / (2 * N + 1)
        return ConnectionFit(mpf(1), shat1 * 0, shat1, mpf(1) / 2, (x_lo, x_hi), mpf(0), True,
                             {"note": "h vanishes identically: sigma = 1 limit"})
    if len(pts) < min_points:
        raise FitFailed(f"only {len(pts)} trajectory points in window {x_window}",
                        {"points": len(pts)})
    pts.sort()
    xs = [p[0] for p in pts]
    hs = [p[1] for p in pts]
    n_exp = min(len(xs) - 2, 10)

    def F(sigma):
        _, coef, _ = _fit_at_sigma(xs, hs, sigma, n_exp)
        return coef[0] + (1 - sigma * sigma) / 4

    s0 = mp.sqrt(max(1 + 4 * hs[0], mpf(0)))
    s0 = min(max(s0, mpf("0.01")), mpf("0.99"))
    try:
        sigma = mp.findroot(F, (s0, s0 * (1 - mpf("0.02"))), solver="secant",
                            tol=mpf(10) ** (-2 * mp.dps // 3), maxsteps=60)
    except (ValueError, ZeroDivisionError) as exc:
        raise FitFailed(f"sigma extrapolation did not converge: {exc}", {"sigma0": s0}) from exc
    sigma = mp.re(sigma)
    if not 0 < sigma < 1:
        raise FitFailed(f"fitted sigma {sigma} outside (0, 1)", {"sigma": sigma})
    exps, coef, res = _fit_at_sigma(xs, hs, sigma, n_exp)
    target = 1 - sigma
    j = min(range(len(exps)), key=lambda i: abs(exps[i] - target))
    A = coef[j + 1]
    s_est = 16 * sigma * A / ((1 + sigma) * (2 * N + sigma))
    shat_est = s_est * (1 + sigma) / (1 - sigma)
    resid = max(abs(coef[0] + sum(c * x**e for c, e in zip(coef[1:], exps)) - h)
                for x, h in zip(xs, hs))
    x_k = xs[0]
    if corr is not None:
        k_source = "supplied"
    elif N <= 1 or correlators.algebraic_supported(N, traj.lam) or traj.states[-1].lnC is None:
        corr, k_source = (lambda x: corr_at_x(N, x, traj.lam)), "closed form or Fredholm"
    else:
        # a Fredholm evaluation this close to t = 1 is out of reach; use the carried ln C
        lnC = {1 - s.t: s.lnC for s in traj.states}
        corr, k_source = (lambda x: mp.exp(lnC[x])), "integrated ln C"
    K_est = corr(x_k) / (x_k ** (sigma * sigma / 4) * corr_bracket_t1(x_k, sigma, shat_est, N))
    diag = {"points": len(xs), "exponents": [mp.nstr(e, 8) for e in exps],
            "ls_residual": res, "x_for_K": x_k, "K_source": k_source}
    return ConnectionFit(sigma, s_est, shat_est, K_est, (xs[0], xs[-1]), resid, False, diag)


def connect(N: int, lam, t0="0.05", x_end="1e-5", x_window_hi="1e-4",
            window_points: int = 16, tol=None, init_source=InitSource.FREDHOLM_SEEDED):
    """Integrate from t0 to 1 - x_end and fit the connection constants on the end window."""
    x_end, x_window_hi = mpf(x_end), mpf(x_window_hi)
    window = numerics.log_spaced(x_end, x_window_hi, window_points)
    traj = integrate(N, lam, t0, 1 - x_end, init_source, tol, t_eval=[1 - x for x in window])
    fit = fit_connection(traj, (x_end, x_window_hi), min_points=min(8, window_points))
    return traj, fit
