import pytest
from hypothesis import given
from hypothesis import strategies as st
from mpmath import mp, mpc, mpf

from ilc import correlators as cr
from ilc import numerics
from ilc.errors import BranchCutError, DomainError, PrecisionExhausted


def r2():
    return mp.sqrt(2) / 2


def close(a, b, tol):
    return abs(mpf(a) - mpf(b)) <= mpf(tol)


# --- weights and symbol coefficients ---------------------------------------

def test_weights_trivial():
    assert cr.weight_P(0, mpf("0.7")) == 1
    assert cr.weight_P(mpc("0.3", "0.2"), 0) == 1


@given(st.floats(0, 6.283), st.floats(0.01, 0.99))
def test_weight_product_is_one(theta, k):
    z = mpf("0.9") * mp.expj(theta)
    assert abs(cr.weight_P(z, k) * cr.weight_Q(z, k) - 1) < mpf(10) ** -45


def test_weight_branch_cut():
    with pytest.raises(BranchCutError):
        cr.weight_P(mpf(2), mpf("0.5"))


def test_fourier_trivial_k():
    assert cr.fourier_coeffs(range(-2, 3), 0) == {-2: 0, -1: 0, 0: 1, 1: 0, 2: 0}
    assert close(cr.fourier_coeff(0, 1), 2 / mp.pi, mpf(10) ** -45)


def test_fourier_self_convergence():
    a1 = cr.fourier_coeff(1, mpf("0.6"))
    with mp.workdps(90):
        ref = cr.fourier_coeff(1, mpf("0.6"), mpf(10) ** -70)
    assert close(a1, ref, mpf(10) ** -24)


@pytest.mark.parametrize("k", ["0.1", "0.8", "0.97"])
def test_laurent_recurrence_matches_quadrature(k):
    k = mpf(k)
    with numerics.fast_context():
        fast = cr.laurent_coeffs(k, 40)
        fast = [[numerics.from_gmpy(c) for c in seq] for seq in fast]
    slow = cr.laurent_coeffs_quadrature(k, 40)
    for f_seq, s_seq in zip(fast, slow):
        assert max(abs(a - b) for a, b in zip(f_seq, s_seq)) < mpf(10) ** -45


# --- Toeplitz ----------------------------------------------------------------

def test_toeplitz_trivial():
    assert cr.toeplitz_corr(0, mpf("0.4")).value == 1
    assert close(cr.toeplitz_corr(3, 0).value, 1, mpf(10) ** -45)


def test_toeplitz_at_t1():
    assert close(cr.toeplitz_corr(2, 1).value, mpf(4) / 3 * (2 / mp.pi) ** 2, mpf(10) ** -40)


def test_toeplitz_N0_matches_theta():
    assert cr.toeplitz_corr(0, mpf("0.3")).value == cr.theta_corr(0, mpf("0.3"), 1).value


# --- Fredholm ----------------------------------------------------------------

@pytest.mark.parametrize("N", [0, 1, 2])
def test_F2_calibration(N):
    t = mpf("1e-4")
    c = cr.bcm_coefficient(N)
    ratio = cr.fredholm_F2n(N, t, 1) / t ** (N + 1)
    assert abs(ratio / (mpf(c.numerator) / c.denominator) - 1) < mpf("0.01")


def test_F2_tensor_product_oracle():
    # brute-force double sum over the contour nodes, no operator factorization
    k, M = mp.sqrt(mpf("0.1")), 24
    rho = (1 + k) / 2
    q = numerics.CircleQuadrature(rho, M)
    zs, ws = q.nodes, q.weights
    qq = [1 / (mp.sqrt(1 - k * z) * mp.sqrt(1 - k / z)) for z in zs]
    total = mpc(0)
    for a in range(M):
        for b in range(M):
            total += ws[a] * ws[b] * qq[a] / qq[b] / (1 - zs[a] * zs[b]) ** 2
    cfg = cr.FredholmConfig(basis="nystrom", M=M)
    assert abs(cr.fredholm_F2n(0, mpf("0.1"), 1, cfg) - total) < mpf(10) ** -40


def test_nystrom_matches_laurent():
    t = mpf("0.1")
    ny = cr.fredholm_F2n(0, t, 1, cr.FredholmConfig(basis="nystrom"))
    la = cr.fredholm_F2n(0, t, 1)
    assert close(ny, la, mpf(10) ** -20)


def test_contour_independence():
    t, lam = mpf("0.2"), mpf("0.6")
    v1 = cr.fredholm_corr(1, t, lam, cr.FredholmConfig(basis="nystrom", radius=mpf("0.6"))).value
    v2 = cr.fredholm_corr(1, t, lam, cr.FredholmConfig(basis="nystrom", radius=mpf("0.8"))).value
    assert close(v1, v2, mpf(10) ** -20)


def test_bad_radius():
    with pytest.raises(BranchCutError):
        cr.fredholm_corr(0, mpf("0.5"), mpf("0.5"), cr.FredholmConfig(basis="nystrom", radius=mpf("0.6")))


@pytest.mark.parametrize("N", [0, 1, 3])
def test_fredholm_lambda_zero(N):
    v = cr.fredholm_corr(N, mpf("0.37"), 0).value
    assert v == (1 - mpf("0.37")) ** (mpf(1) / 4)


def test_fredholm_vs_toeplitz():
    t = mpf("0.25")
    assert close(cr.fredholm_corr(2, t, 1).value, cr.toeplitz_corr(2, t).value, mpf("1e-12"))


def test_fredholm_vs_closed_form_cos_pi4():
    t = mpf("0.5")
    want = mpf(2) ** (-mpf(1) / 4) * t ** (mpf(1) / 16) * (1 + mp.sqrt(t)) ** (mpf(1) / 4)
    assert close(cr.fredholm_corr(0, t, r2()).value, want, mpf(10) ** -20)


def test_trace_mode_converges_to_logdet():
    t, lam = mpf("0.3"), mpf("0.9")
    exact = cr.fredholm_corr(1, t, lam).value
    diffs = []
    for n in (1, 2, 4, 8):
        v = cr.fredholm_corr(1, t, lam, cr.FredholmConfig(mode="trace", n_max=n)).value
        diffs.append(abs(v - exact))
    assert all(a > b for a, b in zip(diffs, diffs[1:]))
    assert diffs[-1] < mpf(10) ** -8


def test_est_error_is_honest():
    t, lam = mpf("0.6"), mpf("0.5")
    v = cr.fredholm_corr(0, t, lam, cr.FredholmConfig(tol=mpf(10) ** -12))
    assert abs(v.value - cr.theta_corr(0, t, lam).value) <= v.est_error


# --- closed forms ------------------------------------------------------------

def test_theta_trivial():
    assert cr.theta_corr(0, mpf("0.4"), 1).value == 1
    for t in ("0.2", "0.995"):
        assert close(cr.theta_corr(0, mpf(t), 0).value, (1 - mpf(t)) ** (mpf(1) / 4), mpf(10) ** -45)


def test_theta_N1_closed_form():
    t = mpf("0.5")
    want = mpf(2) ** (-mpf(3) / 4) * t ** (mpf(1) / 16) * (1 + mp.sqrt(t)) ** (mpf(3) / 4)
    assert close(cr.theta_corr(1, t, r2()).value, want, mpf(10) ** -45)


@pytest.mark.parametrize("x", ["0.3", "0.005", "1e-12"])
def test_theta_corr_x_consistent(x):
    x = mpf(x)
    assert close(cr.theta_corr_x(1, x, mpf("0.4")), cr.theta_corr(1, 1 - x, mpf("0.4")).value, mpf(10) ** -40)


def test_algebraic_cos_pi3_small_t():
    t = mpf("1e-4")
    v = cr.algebraic_corr(0, t, mpf(1) / 2).value / (1 - t) ** (mpf(1) / 4)
    assert abs(v - 1 - t / 16) < 10 * t * t


def test_algebraic_cos_pi3_vs_theta():
    t = mpf("0.5")
    assert close(cr.algebraic_corr(0, t, mpf(1) / 2).value, cr.theta_corr(0, t, mpf(1) / 2).value, mpf("1e-12"))


def test_algebraic_cos_pi3_satisfies_quartic():
    for t in ("0.1", "0.5", "0.77", "0.999"):
        c = cr.algebraic_corr(0, mpf(t), mpf(1) / 2).value
        t = mpf(t)
        assert abs(16 * c**12 - 16 * c**9 + 8 * t * (1 - t) * c**3 + t * (1 - t)) < mpf(10) ** -40


def test_algebraic_N2_prefactor_near_one():
    x = mpf("1e-20")
    c = cr.algebraic_corr(2, 1 - x, r2()).value / x ** (mpf(1) / 16)
    assert close(c, mpf(2) ** (-mpf(5) / 4) * 5 / 4, mpf("1e-8"))


def test_algebraic_unsupported():
    with pytest.raises(DomainError):
        cr.algebraic_corr(1, mpf("0.5"), mpf(1) / 2)
    assert cr.algebraic_supported(0, mpf("0.7071067811865476"))


# --- small t -----------------------------------------------------------------

def test_bcm_coefficients_exact():
    assert [str(cr.bcm_coefficient(N)) for N in range(3)] == ["1/4", "3/64", "5/256"]


def test_small_t_expansion_cos_pi4():
    c0 = cr.small_t_expansion(0, r2(), 2)
    c2 = cr.small_t_expansion(2, r2(), 3)
    assert close(c0[1], mpf(1) / 8, mpf("1e-6"))
    assert close(c0[2], mpf(5) / 64, mpf("1e-6"))
    assert close(c2[3], mpf(5) / 512, mpf("1e-6"))


def test_small_t_precision_exhausted():
    with pytest.raises(PrecisionExhausted):
        cr.small_t_expansion(0, r2(), 25, extra_digits=0)


# --- dispatcher --------------------------------------------------------------

def test_choose_method():
    assert cr.choose_method(1, mpf("0.5"), mpf("0.3")) is cr.Method.THETA
    assert cr.choose_method(2, mpf("0.5"), r2()) is cr.Method.ALGEBRAIC
    assert cr.choose_method(3, mpf("0.5"), 1) is cr.Method.TOEPLITZ
    assert cr.choose_method(3, mpf("0.5"), mpf("0.3")) is cr.Method.FREDHOLM


@pytest.mark.parametrize("N,lam,method", [(2, 1, "theta"), (1, "0.5", "toeplitz"), (1, "0.5", "algebraic")])
def test_request_constraints(N, lam, method):
    with pytest.raises(DomainError):
        cr.evaluate(cr.CorrelatorRequest(N, mpf("0.5"), mpf(lam), method))


def test_request_domain():
    with pytest.raises(DomainError):
        cr.evaluate(cr.CorrelatorRequest(0, mpf("1.2"), mpf("0.5")))
    with pytest.raises(DomainError):
        cr.CorrelatorRequest(-1, mpf("0.5"), mpf("0.5"))


@given(st.integers(0, 3), st.floats(0.01, 0.8), st.floats(0, 1))
def test_value_in_unit_interval(N, t, lam):
    v = cr.evaluate(cr.CorrelatorRequest(N, mpf(t), mpf(lam), precision=30)).value
    assert 0 < v <= 1


@given(st.floats(0.05, 0.7))
def test_ising_decreases_with_N(t):
    vals = [cr.toeplitz_corr(N, mpf(t)).value for N in range(5)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
