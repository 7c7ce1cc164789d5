import gmpy2
import pytest
from hypothesis import given
from hypothesis import strategies as st
from mpmath import mp, mpc, mpf

from ilc import numerics
from ilc.errors import DomainError, NoConvergence, NodeSingularity


def test_default_tol_is_half_the_digits():
    assert numerics.default_tol() == mpf(10) ** -25
    with numerics.precision(80):
        assert numerics.default_tol() == mpf(10) ** -40


def test_precision_floor():
    with pytest.raises(DomainError):
        numerics.precision(10)


@pytest.mark.parametrize("n", [0, 1, 3, 7])
def test_trapezoid_integrates_monomials_exactly(n):
    # contour integral of z^n dz/(2 pi) is i*delta_{n,-1}; z^n for n >= 0 integrates to 0
    q = numerics.CircleQuadrature(mpf("0.7"), 32)
    assert abs(numerics.quad_circle(lambda z: z**n, q)) < mpf(10) ** -45
    assert abs(numerics.quad_circle(lambda z: 1 / z, q) - mpc(0, 1)) < mpf(10) ** -45


def test_adaptive_circle_inverse_z():
    val, M = numerics.adaptive_circle(lambda z: 1 / z, 1, mpf(10) ** -30)
    assert abs(val - mpc(0, 1)) < mpf(10) ** -30
    assert M == 64


def test_adaptive_circle_cap():
    # a pole just outside the contour needs far more than 128 nodes
    with pytest.raises(NoConvergence):
        numerics.adaptive_circle(lambda z: 1 / (z - mpf("1.0001")), 1, mpf(10) ** -40, M_cap=128)


def test_node_singularity():
    q = numerics.CircleQuadrature(1, 4)
    with pytest.raises(NodeSingularity):
        numerics.quad_circle(lambda z: 1 / (z - 1), q)


def test_odd_node_count_rejected():
    with pytest.raises(DomainError):
        numerics.CircleQuadrature(1, 7)


def test_lu_det_matches_mpmath():
    A = [[mpf(1) / (i + j + 1) for j in range(6)] for i in range(6)]
    assert abs(numerics.lu_det(A) / mp.det(mp.matrix(A)) - 1) < mpf(10) ** -40


def test_lu_det_singular_and_empty():
    assert numerics.lu_det([[1, 2], [2, 4]]) == 0
    assert numerics.lu_det([]) == 1


def test_lu_det_complex():
    A = [[mpc(1, 1), 2], [3, mpc(0, -1)]]
    want = mpc(1, 1) * mpc(0, -1) - 6
    assert abs(numerics.lu_det(A) - want) < mpf(10) ** -45


@given(st.lists(st.integers(-50, 50), min_size=9, max_size=9))
def test_lu_det_property_integer_matrices(entries):
    A = [[mpf(entries[3 * i + j]) for j in range(3)] for i in range(3)]
    exact = mp.det(mp.matrix(A))
    assert abs(numerics.lu_det(A) - exact) <= mpf(10) ** -40 * (1 + abs(exact))


@given(st.floats(-1e6, 1e6, allow_nan=False), st.integers(-200, 200))
def test_gmpy_round_trip(x, e):
    v = mpf(x) * mpf(2) ** e / 3
    with numerics.fast_context():
        back = numerics.from_gmpy(numerics.to_gmpy(v))
    assert back == v


def test_from_gmpy_keeps_precision():
    with numerics.fast_context():
        r = gmpy2.mpfr(1) / 3
        v = numerics.from_gmpy(r)
    assert abs(v - mpf(1) / 3) < mpf(10) ** -50


@pytest.mark.parametrize("order", [1, 2, 3])
def test_central_derivative_of_exp(order):
    with mp.workdps(70):
        d = numerics.central_derivative(mp.exp, mpf("0.3"), order, mpf(10) ** -10)
    assert abs(d - mp.exp(mpf("0.3"))) < mpf(10) ** -30


def test_stencil_derivatives_agree_with_central():
    f = lambda s: mp.sin(s) * s
    step = mpf(10) ** -8
    vals = numerics.stencil_values(f, 1, step, 3)
    d1, d2, d3 = numerics.derivatives_from_values(vals, step, (1, 2, 3))
    assert d1 == numerics.central_derivative(f, 1, 1, step)
    assert abs(d2 - numerics.central_derivative(f, 1, 2, step)) < mpf(10) ** -20


def test_newton_polish_sqrt2():
    r = numerics.newton_polish(lambda x: x * x - 2, lambda x: 2 * x, mpf(1))
    assert abs(r - mp.sqrt(2)) < mpf(10) ** -45


def test_newton_zero_derivative():
    with pytest.raises(NoConvergence):
        numerics.newton_polish(lambda x: x * x + 1, lambda x: 2 * x, mpf(0))


def test_log_spaced_endpoints():
    pts = numerics.log_spaced("1e-6", "1e-4", 8)
    assert len(pts) == 8
    assert abs(pts[0] - mpf("1e-6")) < mpf(10) ** -55
    assert abs(pts[-1] - mpf("1e-4")) < mpf(10) ** -53
    assert all(a < b for a, b in zip(pts, pts[1:]))


def test_digits_for():
    assert numerics.digits_for(mpf("1e-25")) == 25
