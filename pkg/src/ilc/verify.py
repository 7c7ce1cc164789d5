"""Named verification suites run by ``ilc verify``.

Each suite returns a :class:`VerificationReport`; a case passes when
|expected - got| <= tolerance.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from mpmath import mp, mpf

from . import connection as cx
from . import correlators as cr
from . import painleve as pv


@dataclass
class Case:
    name: str
    inputs: dict
    expected: mpf
    got: mpf
    tolerance: mpf
    note: str = ""

    @property
    def passed(self) -> bool:
        return bool(mp.isfinite(self.got)) and abs(self.expected - self.got) <= self.tolerance


@dataclass
class VerificationReport:
    suite: str
    cases: list = field(default_factory=list)

    def add(self, name, inputs, expected, got, tolerance, note=""):
        self.cases.append(Case(name, inputs, mpf(expected), mpf(got), mpf(tolerance), note))

    @property
    def n_passed(self) -> int:
        return sum(c.passed for c in self.cases)

    @property
    def n_failed(self) -> int:
        return len(self.cases) - self.n_passed

    @property
    def ok(self) -> bool:
        return self.n_failed == 0

    def summary(self) -> dict:
        return {"suite": self.suite, "total": len(self.cases), "passed": self.n_passed,
                "failed": self.n_failed}


def tenths() -> list:
    """0.1, ..., 0.9 at the current precision (module-level constants would freeze 15 digits)."""
    return [mpf(j) / 10 for j in range(1, 10)]


def closed_form_values() -> list:
    """(name, got, expected) for every tabulated closed-form constant."""
    r2 = mp.cos(mp.pi / 4)
    half = mpf(1) / 2
    b = pv.corr_bracket_t1
    # bracket coefficients: isolate each power by the closed-form coefficient formula
    def coef_1ms(N, sigma, sh):
        return sh * (2 * N + sigma) / (16 * sigma)

    def coef_1ps(N, sigma, sh):
        return -(2 * N - sigma) / (16 * sigma * sh)

    s23 = mpf(2) / 3
    sh0_23 = cx.shat(0, s23)
    out = [
        ("sigma(cos pi/4)", cx.sigma_of_lambda(r2), half),
        ("sigma(1/2)", cx.sigma_of_lambda(half), s23),
    ]
    for N in range(7):
        out.append((f"shat({N},1)", cx.shat(N, 1), mpf(16) / (2 * N + 1)))
        out.append((f"K({N},1)", cx.bigK(N, 1), half))
    out += [
        ("K(0,1/2)", cx.bigK(0, half), mpf(2) ** (-mpf(1) / 4)),
        ("K(1,1/2)", cx.bigK(1, half), mpf(2) ** (-mpf(3) / 4)),
        ("K(2,1/2)", cx.bigK(2, half), mpf(2) ** (-mpf(5) / 4) * 5 / 4),
        ("K(0,2/3)", cx.bigK(0, s23), mpf(2) ** (-mpf(4) / 9)),
        ("bracket x^(1/2), N=0", coef_1ms(0, half, cx.shat(0, half)), mpf(1) / 4),
        ("bracket x^(1/2), N=1", coef_1ms(1, half, cx.shat(1, half)), mpf(3) / 4),
        ("bracket x^(1/2), N=2", coef_1ms(2, half, cx.shat(2, half)), mpf(21) / 20),
        ("bracket x, sigma=1/2", -(1 - half**2) / 8, -mpf(3) / 32),
        ("bracket x^(1/3), sigma=2/3", coef_1ms(0, s23, sh0_23), mpf(2) ** (-mpf(4) / 3)),
        ("bracket x, sigma=2/3", -(1 - s23**2) / 8, -mpf(5) / 72),
        ("bracket x^(5/3), sigma=2/3", coef_1ps(0, s23, sh0_23), mpf(2) ** (mpf(1) / 3) / 128),
    ]
    # the assembled bracket must agree with its coefficients
    x = mpf("1e-3")
    assembled = b(x, half, cx.shat(1, half), 1)
    out.append(("bracket assembled, N=1", assembled,
                1 - 3 * x / 32 + mpf(3) / 4 * x**half + coef_1ps(1, half, cx.shat(1, half)) * x ** (3 * half)))
    return out


def suite_identities() -> VerificationReport:
    rep = VerificationReport("identities")
    for name, got, expected in closed_form_values():
        rep.add(name, {}, expected, got, mpf("1e-25"))
    return rep


def suite_recurrence(Ns=range(1, 21), sigmas=None, tol=mpf("1e-40")) -> VerificationReport:
    rep = VerificationReport("recurrence")
    for N in Ns:
        for s in sigmas or tenths():
            inputs = {"N": N, "sigma": s}
            rep.add("k_ratio_check", inputs, 0, cx.k_ratio_check(N, s), tol)
            rep.add("shat_recurrence_residual", inputs, 0, cx.shat_recurrence_residual(N, s), tol)
    return rep


def toda_provider(lam, cfg: cr.FredholmConfig | None = None) -> Callable:
    """theta for N = 0, 1; Toeplitz at lambda = 1 and Fredholm otherwise for N >= 2."""
    lam = mpf(lam)

    def corr(n, t):
        if n <= 1:
            return cr.theta_corr(n, t, lam).value
        if lam == 1:
            return cr.toeplitz_corr(n, t).value
        return cr.fredholm_corr(n, t, lam, cfg).value

    return corr


def suite_toda(lams=None, ts=None,
               tol=mpf("1e-8")) -> VerificationReport:
    rep = VerificationReport("toda")
    lams = lams or (mpf("0.6"), mpf(1))
    ts = ts or (mpf("0.3"), mpf("0.5"), mpf("0.7"))
    for lam in lams:
        prov = toda_provider(lam)
        for t in ts:
            rep.add("toda_residual", {"N": 1, "lambda": lam, "t": t}, 0,
                    cx.toda_residual(1, t, prov), tol)
    return rep


def suite_crossmethod(tol=mpf("1e-10"), t_grid=None, fredholm_tol=mpf("1e-14")) -> VerificationReport:
    rep = VerificationReport("crossmethod")
    cfg = cr.FredholmConfig(tol=fredholm_tol)
    t_grid = t_grid or tenths()
    for N in (0, 1):
        for lam in (mpf("0.2"), mpf("0.5"), mpf("0.8")):
            for t in t_grid:
                rep.add("theta vs fredholm", {"N": N, "lambda": lam, "t": t},
                        cr.theta_corr(N, t, lam).value, cr.fredholm_corr(N, t, lam, cfg).value, tol)
    for N in (1, 2, 3):
        for t in (mpf("0.1"), mpf("0.25"), mpf("0.5")):
            rep.add("toeplitz vs fredholm", {"N": N, "lambda": 1, "t": t},
                    cr.toeplitz_corr(N, t).value, cr.fredholm_corr(N, t, 1, cfg).value, tol)
    half = mpf(1) / 2
    for t in t_grid:
        rep.add("algebraic vs theta", {"N": 0, "lambda": half, "t": t},
                cr.theta_corr(0, t, half).value, cr.algebraic_corr(0, t, half).value, tol)
    return rep


def suite_smallt(tol=mpf("1e-6")) -> VerificationReport:
    rep = VerificationReport("smallt")
    t = mpf("1e-3")
    for N in range(3):
        ratio = cr.fredholm_F2n(N, t, 1) / t ** (N + 1)
        exact = cr.bcm_coefficient(N)
        exact = mpf(exact.numerator) / exact.denominator
        rep.add("F2/t^(N+1) calibration", {"N": N, "t": t}, exact, ratio, exact / 100, "1% tolerance")
    lam = mp.cos(mp.pi / 4)
    wanted = [(0, 2, 1, Fraction(1, 8), ""), (0, 2, 2, Fraction(5, 64), ""),
              (1, 2, 2, Fraction(3, 128), ""),
              (2, 3, 3, Fraction(5, 512), "the source prints 5/516; bcm arithmetic gives 5/512")]
    cache = {}
    for N, order, power, frac, note in wanted:
        if (N, order) not in cache:
            cache[N, order] = cr.small_t_expansion(N, lam, order)
        rep.add(f"small-t coefficient t^{power}", {"N": N, "lambda": "cos(pi/4)"},
                mpf(frac.numerator) / frac.denominator, cache[N, order][power], tol, note)
    return rep


def suite_limits() -> VerificationReport:
    rep = VerificationReport("limits")
    rep.add("sigma_zero_limit_check", {"N": 1, "x": "1e-3", "sigma": "1e-6"}, 0,
            cx.sigma_zero_limit_check(1, mpf("1e-3"), mpf("1e-6")), mpf("1e-4"))
    for N in (1, 2, 3):
        rep.add("K(N, 0) vs Ising constant", {"N": N}, cx.ising_t1_constant(N), cx.bigK(N, 0),
                mpf(10) ** (-mp.dps + 5))
    zero_tol = mpf(10) ** (-mp.dps + 5)
    for N in (0, 1, 2, 3):
        for t in tenths():
            for method in (cr.Method.AUTO, cr.Method.FREDHOLM):
                got = cr.evaluate(cr.CorrelatorRequest(N, t, 0, method, mp.dps)).value
                rep.add("lambda=0 closed form", {"N": N, "t": t, "method": method.value},
                        (1 - t) ** (mpf(1) / 4), got, zero_tol)
            got = cr.fredholm_corr(N, t, 0).value
            rep.add("lambda=0 Fredholm determinant", {"N": N, "t": t}, (1 - t) ** (mpf(1) / 4), got, zero_tol)
    for N, s in ((50, mpf("0.5")), (100, mpf("0.5"))):
        rep.add("K/K_asymptotic", {"N": N, "sigma": s}, 1, cx.bigK(N, s) / cx.bigK_asymptotic(N, s),
                mpf("0.02"))
    return rep


SUITES = {
    "identities": suite_identities,
    "recurrence": suite_recurrence,
    "toda": suite_toda,
    "crossmethod": suite_crossmethod,
    "smallt": suite_smallt,
    "limits": suite_limits,
}


def run_suite(name: str) -> VerificationReport:
    return SUITES[name]()
