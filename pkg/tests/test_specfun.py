import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ballspectra import specfun
from ballspectra.modes import ModeIndex, make_mode, eval_curl_mode
from ballspectra.roots import rho


def mp_jn(n, z):
    z = mpmath.mpf(z)
    return float(mpmath.sqrt(mpmath.pi / (2 * z)) * mpmath.besselj(n + mpmath.mpf(1) / 2, z))


def series_jn(n, z, terms=30):
    # ascending series z^n / (2n+1)!! * sum (-z^2/2)^k / (k! (2n+3)(2n+5)...(2n+2k+1))
    total, term = 0.0, 1.0
    for k in range(terms):
        total += term
        term *= -z * z / (2 * (k + 1) * (2 * n + 2 * k + 3))
    return z**n / specfun._double_factorial_odd(n) * total


def test_psi_closed_forms():
    assert specfun.psi(0, math.pi / 2) == pytest.approx(2 / math.pi, rel=1e-15)
    assert specfun.psi(1, math.pi) == pytest.approx(1 / math.pi, rel=1e-15)
    assert specfun.psi_prime(0, math.pi) == pytest.approx(-1 / math.pi, rel=1e-15)


def test_psi_small_argument_matches_series():
    assert specfun.psi(5, 0.1) == pytest.approx(series_jn(5, 0.1), rel=1e-12)


def test_psi_vanishes_at_first_curl_root():
    assert abs(specfun.psi(1, 4.4934094579)) < 1e-9


@pytest.mark.parametrize("n", [0, 1, 2, 5, 10, 20, 40, 64])
def test_psi_against_mpmath(n):
    z = np.concatenate([np.geomspace(1e-2, n + 1, 25), np.linspace(n + 1, n + 80, 25)])
    got = specfun.psi(n, z)
    ref = np.array([mp_jn(n, v) for v in z])
    scale = np.maximum(np.abs(ref), 1e-3 * np.max(np.abs(ref)))
    assert np.max(np.abs(got - ref) / scale) < 1e-10


def test_psi_prime_finite_difference():
    h = 1e-6
    fd = (specfun.psi(3, 2.5 + h) - specfun.psi(3, 2.5 - h)) / (2 * h)
    assert specfun.psi_prime(3, 2.5) == pytest.approx(fd, abs=1e-7)


def test_psi0_prime_is_minus_psi1():
    z = np.linspace(0.01, 60, 1000)
    assert np.max(np.abs(specfun.psi_prime(0, z) + specfun.psi(1, z))) < 1e-12


@pytest.mark.parametrize("n", range(1, 21))
def test_three_term_recurrence(n):
    z = np.linspace(n + 1, n + 50, 200)
    lhs = specfun.psi(n + 1, z)
    rhs = (2 * n + 1) / z * specfun.psi(n, z) - specfun.psi(n - 1, z)
    scale = np.max(np.abs(specfun.psi(n + 1, z)))
    assert np.max(np.abs(lhs - rhs)) < 1e-10 * scale


@settings(max_examples=200, deadline=None)
@given(n=st.integers(0, 64), z=st.floats(1e-4, 150.0))
def test_scalar_path_matches_vector_path(n, z):
    j, jp = specfun.psi_scalar(n, z)
    ref_j, ref_jp = specfun.psi(n, z), specfun.psi_prime(n, z)
    scale = max(abs(ref_j), abs(ref_jp), 1e-300)
    assert abs(j - ref_j) <= 1e-10 * scale + 1e-300
    assert abs(jp - ref_jp) <= 1e-10 * scale + 1e-300


@pytest.mark.parametrize("bad", [0.0, -1.0, math.nan, math.inf])
def test_psi_rejects_bad_argument(bad):
    with pytest.raises(ValueError):
        specfun.psi(1, bad)


def test_psi_rejects_bad_degree():
    with pytest.raises(ValueError):
        specfun.psi(65, 1.0)
    with pytest.raises(ValueError):
        specfun.psi(-1, 1.0)


def test_signed_parity():
    x = np.linspace(0.1, 10, 50)
    for n in range(5):
        assert np.allclose(specfun.psi_signed(n, -x), (-1) ** n * specfun.psi(n, x), rtol=0, atol=1e-15)
        assert np.allclose(specfun.psi_prime_signed(n, -x), (-1) ** (n + 1) * specfun.psi_prime(n, x),
                           rtol=0, atol=1e-15)
    assert specfun.psi_signed(0, 0.0) == 1.0
    assert specfun.psi_prime_signed(1, 0.0) == pytest.approx(1 / 3)


def test_phi_at_zero_radius():
    assert specfun.phi(1, 2.0, 0.0) == 0j


@pytest.mark.parametrize("n,m", [(1, 1), (2, 1), (1, 2), (3, 1)])
def test_phi_imaginary_part_vanishes_at_roots(n, m):
    assert abs(specfun.phi(n, rho(n, m), 1.0).imag) < 1e-8


def test_phi_refinement_oracle():
    # repeat the composite rule, halving panels until successive values agree to 1e-12
    x = 3.0 * 0.7
    prev = specfun._phi_dyadic(2, x, 6, 1.0)
    levels, per_unit = 6, 1.0
    for _ in range(10):
        levels, per_unit = levels + 2, per_unit * 2
        cur = specfun._phi_dyadic(2, x, levels, per_unit)
        if abs(cur - prev) < 1e-12:
            break
        prev = cur
    assert abs(specfun.phi(2, 3.0, 0.7) - cur) < 1e-11


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 12), x=st.floats(0.05, 40.0), sign=st.sampled_from([1.0, -1.0]))
def test_phi_quadrature_matches_closed_form(n, x, sign):
    q = specfun.phi(n, sign * x, 1.0)
    c = complex(specfun.phi_closed(n, np.array([sign * x]))[0])
    assert abs(q - c) < 1e-10 * max(1.0, abs(c))


def test_phi_rejects_bad_input():
    with pytest.raises(ValueError):
        specfun.phi(0, 1.0, 0.5)
    with pytest.raises(ValueError):
        specfun.phi(1, 0.0, 0.5)


def test_ylm_closed_forms():
    th = np.linspace(0, math.pi, 7)
    ph = np.linspace(0, 2 * math.pi, 7)
    assert np.allclose(specfun.ylm(0, 0, th, ph), 1 / (2 * math.sqrt(math.pi)), rtol=0, atol=1e-15)
    assert np.allclose(specfun.ylm(1, 0, th, ph), math.sqrt(3 / (4 * math.pi)) * np.cos(th),
                       rtol=0, atol=1e-15)


def _sphere_rule(n_t=40, n_p=80):
    t, w = np.polynomial.legendre.leggauss(n_t)
    th = np.arccos(t)
    ph = 2 * math.pi * np.arange(n_p) / n_p
    TH, PH = np.meshgrid(th, ph, indexing="ij")
    W = np.outer(w, np.full(n_p, 2 * math.pi / n_p))
    return TH, PH, W


def test_ylm_unit_norm():
    TH, PH, W = _sphere_rule()
    assert np.sum(W * specfun.ylm(2, 1, TH, PH) ** 2) == pytest.approx(1.0, abs=1e-10)


def test_ylm_gram_up_to_degree_8():
    TH, PH, W = _sphere_rule()
    rows = [specfun.ylm(n, k, TH, PH).ravel() * np.sqrt(W.ravel())
            for n in range(9) for k in range(-n, n + 1)]
    A = np.array(rows)
    assert np.max(np.abs(A @ A.T - np.eye(len(rows)))) < 1e-9


def test_h_op_closed_forms():
    th = np.linspace(0.1, 3.0, 5)
    assert np.all(specfun.h_op_ylm(0, 0, th, 0.3) == 0)
    h = specfun.h_op_ylm(1, 0, th, 0.3)
    assert np.allclose(h.real, 0, atol=1e-15)
    assert np.allclose(h.imag, -math.sqrt(3 / (4 * math.pi)) * np.sin(th), atol=1e-15)


def test_h_op_finite_differences():
    th, ph, h = 1.1, 0.4, 1e-5
    dth = (specfun.ylm(3, 2, th + h, ph) - specfun.ylm(3, 2, th - h, ph)) / (2 * h)
    dph = (specfun.ylm(3, 2, th, ph + h) - specfun.ylm(3, 2, th, ph - h)) / (2 * h)
    got = specfun.h_op_ylm(3, 2, th, ph)
    assert abs(got - (dph / math.sin(th) + 1j * dth)) < 1e-7


def test_harmonic_derivatives_finite_at_poles():
    for n in range(1, 6):
        for k in range(-n, n + 1):
            vals = specfun.ylm_derivatives(n, k, np.array([0.0, math.pi]), np.array([0.3, 1.2]))
            assert all(np.all(np.isfinite(v)) for v in vals)


def test_k_op_zero_and_hand_derived():
    assert specfun.k_op(lambda t, p: 0 * t, 1.0, 0.5) == 0
    # w = sin(theta) e^{i phi}: K w = (2 cos(theta) - 1) e^{i phi} by hand
    w = lambda t, p: np.sin(t) * np.exp(1j * p)
    th, ph = 0.9, 0.7
    assert abs(specfun.k_op(w, th, ph) - (2 * math.cos(th) - 1) * np.exp(1j * ph)) < 1e-8


def test_k_op_identity_for_lowest_mode():
    # K w = lam v - i r^-1 d_r(r v) with v = r u_r, w = u_phi + i u_theta
    md = make_mode(ModeIndex("curl+", 1, 1, 0))
    lam, r = md.eigenvalue, 0.6
    h = 1e-5

    def w_at(t, p):
        u = eval_curl_mode(md, r, t, p)
        return u[..., 2] + 1j * u[..., 1]

    def rv(rr):
        return rr * rr * eval_curl_mode(md, rr, 1.0, 0.4)[..., 0]

    v = r * eval_curl_mode(md, r, 1.0, 0.4)[..., 0]
    drv = (rv(r + h) - rv(r - h)) / (2 * h)
    lhs = specfun.k_op(w_at, 1.0, 0.4)
    assert abs(lhs - (lam * v - 1j * drv / r)) < 1e-5


def test_k_op_rejects_poles():
    with pytest.raises(ValueError):
        specfun.k_op(lambda t, p: 0 * t, 0.0, 0.5)
