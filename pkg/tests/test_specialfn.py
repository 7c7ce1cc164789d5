from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st
from mpmath import mp, mpf

from ilc import specialfn as sf
from ilc.errors import DomainError

EPS = mpf(10) ** -45


def test_elliptic_K_at_zero():
    assert abs(sf.elliptic_K(0) - mp.pi / 2) < EPS


def test_elliptic_K_hypergeometric_oracle():
    k = mpf("0.5")
    assert abs(sf.elliptic_K(k) - mp.pi / 2 * mp.hyp2f1(0.5, 0.5, 1, k * k)) < EPS


def test_self_dual_point():
    pair = sf.elliptic_pair(mpf(1) / 2)
    assert abs(pair.K - pair.Kprime) < EPS
    assert abs(sf.nome(mpf(1) / 2).q - mp.exp(-mp.pi)) < EPS


def test_elliptic_K_domain():
    with pytest.raises(DomainError):
        sf.elliptic_K(1)


@given(st.floats(0.01, 0.99))
def test_nome_matches_mpmath(t):
    t = mpf(t)
    assert abs(sf.nome(t).q - mp.qfrom(m=t)) < mpf(10) ** -44


def test_nome_at_09_against_doubled_precision():
    q = sf.nome(mpf("0.9")).q
    with mp.workdps(100):
        ref = mp.exp(-mp.pi * mp.ellipk(mpf("0.1")) / mp.ellipk(mpf("0.9")))
    assert abs(q - ref) < EPS


def test_nome_monotone_near_zero():
    qs = [sf.nome(mpf(10) ** -j).q for j in range(1, 8)]
    assert all(a > b > 0 for a, b in zip(qs, qs[1:]))


def test_nome_with_exact_x_near_one():
    # supplying x = 1 - t avoids forming 1 - t; compare with the dual nome
    x = mpf("1e-30")
    nm = sf.nome(1 - x, x)
    assert abs(nm.q_dual - x / 16) / (x / 16) < mpf("1e-28")


@pytest.mark.parametrize("j", [2, 3, 4])
@pytest.mark.parametrize("u", ["0", "0.3", "1.1"])
def test_theta_matches_mpmath(j, u):
    q = mpf("0.2")
    assert abs(sf.theta(j, mpf(u), q) - mp.jtheta(j, mpf(u), q)) < EPS


def test_theta_trivial_values():
    assert sf.theta(3, mpf("0.7"), 0) == 1
    q = mpf("0.3")
    assert abs(sf.theta(3, mp.pi / 2, q) - sf.theta(4, 0, q)) < EPS


def test_theta2_derivative():
    q, u = mpf("0.15"), mpf("0.4")
    assert abs(sf.theta2_du(u, q) - mp.jtheta(2, u, q, 1)) < EPS


@given(st.floats(0.001, 1.5) | st.floats(-1.5, -0.001))
def test_theta2_du_over_sin_property(u):
    u, q = mpf(u), mpf("0.1")
    assert abs(sf.theta2_du_over_sin(u, q) + mp.jtheta(2, u, q, 1) / mp.sin(u)) < mpf(10) ** -40


def test_theta2_du_over_sin_at_zero():
    # l'Hopital: -theta_2''(0)
    q = mpf("0.1")
    assert abs(sf.theta2_du_over_sin(0, q) + mp.jtheta(2, 0, q, 2)) < EPS


def test_modular_identity_theta3():
    u, k = mpf("0.3"), mpf("0.6")
    nm = sf.nome(k * k)
    a = nm.K / nm.Kprime
    lhs = sf.theta_imag(3, u * a, nm.q_dual) * mp.exp(-u * u * a / mp.pi)
    rhs = mp.sqrt(1 / a) * sf.theta(3, u, nm.q)
    assert abs(lhs - rhs) < mpf(10) ** -30


@pytest.mark.parametrize("u", ["0", "0.4", "1.2"])
def test_modular_ratios_match_direct(u):
    t = mpf("0.995")
    nm = sf.nome(t)
    q = nm.q
    c0 = sf.theta(3, mpf(u), q) / sf.theta(3, 0, q)
    c1 = sf.theta2_du_over_sin(mpf(u), q) / (sf.theta(2, 0, q) * sf.theta(3, 0, q) ** 2)
    m0, m1 = sf.theta_ratios(mpf(u), t)
    assert abs(m0 - c0) < mpf(10) ** -40
    assert abs(m1 - c1) < mpf(10) ** -40


def test_pochhammer_values():
    assert sf.pochhammer(Fraction(1, 2), 0) == 1
    assert sf.pochhammer(Fraction(1, 2), 1) * sf.pochhammer(Fraction(3, 2), 1) == mpf(3) / 4
    assert sf.pochhammer(Fraction(1, 2), 2) * sf.pochhammer(Fraction(3, 2), 2) == mpf(45) / 16


@given(st.floats(-5, 5), st.integers(0, 12))
def test_pochhammer_matches_rf(a, n):
    assert abs(sf.pochhammer(mpf(a), n) - mp.rf(mpf(a), n)) <= mpf(10) ** -40 * (1 + abs(mp.rf(mpf(a), n)))


def test_harmonic_and_gamma():
    assert sf.harmonic(0) == 0
    assert sf.harmonic(2) == mpf(3) / 2
    assert mp.nstr(sf.euler_gamma(), 30) == "0.577215664901532860606512090082"
    N = 10**5
    assert abs(sf.harmonic(N) - mp.log(N) - 1 / mpf(2 * N) - sf.euler_gamma()) < mpf("1e-10")


def test_t_from_couplings():
    e1 = mp.asinh(1) / 2
    assert abs(sf.t_from_couplings(e1, e1)[0] - 1) < EPS
    # both sinh factors equal: 1.25 -> k = 0.64, 2 -> k = 1/4, sqrt 2 -> k = 1/2
    e = mp.asinh(mpf("1.25")) / 2
    assert abs(sf.t_from_couplings(e, e)[0] - mpf("0.4096")) < EPS
    r = mp.asinh(mp.sqrt(2)) / 2
    e2 = mp.asinh(2) / 2
    assert abs(sf.t_from_couplings(e2, e2)[0] - mpf(1) / 16) < EPS
    assert abs(sf.t_from_couplings(r, r)[0] - mpf(1) / 4) < EPS


def test_t_from_couplings_domain():
    with pytest.raises(DomainError):
        sf.t_from_couplings(0, 1)
