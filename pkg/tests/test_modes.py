import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ballspectra import fd, specfun
from ballspectra.modes import (ALL_FAMILIES, CURL_FAMILIES, Family, ModeIndex, enumerate_modes,
                               eval_curl_mode, eval_graddiv_mode, eval_mode, make_mode,
                               normalization_constant, parse_mode)
from ballspectra.quad import build_quadrature, inner_product
from ballspectra.roots import alpha, rho
from ballspectra.verify import closed_form_lowest_mode, fit_scalar


def test_mode_index_validation():
    with pytest.raises(ValueError):
        ModeIndex("curl+", 0, 1, 0)
    with pytest.raises(ValueError):
        ModeIndex("curl+", 1, 0, 0)
    with pytest.raises(ValueError):
        ModeIndex("graddiv", 1, 1, 2)
    assert ModeIndex("graddiv", 0, 1, 0).n == 0


def test_parse_mode_round_trip():
    idx = parse_mode("2,3,-1,-")
    assert idx == ModeIndex(Family.CURL_MINUS, 2, 3, -1)
    assert parse_mode(str(idx)) == idx
    with pytest.raises(ValueError):
        parse_mode("1,1,0")
    with pytest.raises(ValueError):
        parse_mode("1,1,0,x")


def test_eigenvalue_conventions():
    assert make_mode(ModeIndex("curl+", 1, 1, 0), 2.0).eigenvalue == rho(1, 1) / 2.0
    assert make_mode(ModeIndex("curl-", 1, 1, 0), 2.0).eigenvalue == -rho(1, 1) / 2.0
    assert make_mode(ModeIndex("graddiv", 1, 1, 0), 2.0).eigenvalue == -(alpha(1, 1) / 2.0) ** 2


def test_enumerate_first_curl_plus_triplet():
    modes = enumerate_modes({Family.CURL_PLUS}, count=3)
    assert [(md.index.n, md.index.m, md.index.k) for md in modes] == [(1, 1, -1), (1, 1, 0), (1, 1, 1)]
    assert all(abs(md.eigenvalue - 4.4934) < 1e-4 for md in modes)


def test_enumerate_both_signs_below_cutoff():
    modes = enumerate_modes(CURL_FAMILIES, max_abs=4.5)
    assert len(modes) == 6
    assert sum(md.eigenvalue > 0 for md in modes) == 3


def test_enumerate_lowest_graddiv_mode():
    assert alpha(1, 1) < alpha(0, 1)
    (md,) = enumerate_modes({Family.GRADDIV}, count=1)
    assert (md.index.n, md.index.m) == (1, 1)


def test_enumerate_empty_and_errors():
    assert enumerate_modes(ALL_FAMILIES, max_abs=1.0) == []
    with pytest.raises(ValueError):
        enumerate_modes(ALL_FAMILIES)
    with pytest.raises(ValueError):
        enumerate_modes(ALL_FAMILIES, count=0)


def test_enumerate_order_and_multiplicity():
    modes = enumerate_modes(ALL_FAMILIES, count=200)
    keys = [(abs(md.eigenvalue),) + md.index.sort_key() for md in modes]
    assert keys == sorted(keys)
    curl = enumerate_modes(CURL_FAMILIES, max_abs=rho(4, 1) + 1e-9)
    groups = {}
    for md in curl:
        groups.setdefault((md.index.family, md.index.n, md.index.m), []).append(md.index.k)
    for (fam, n, m), ks in groups.items():
        assert sorted(ks) == list(range(-n, n + 1))


def test_eigenvalue_reciprocals_accumulate_at_zero():
    mags = np.array([abs(md.eigenvalue) for md in enumerate_modes(CURL_FAMILIES, count=300)])
    inv = 1 / mags
    assert np.all(np.diff(inv) <= 0) and inv[-1] < 0.5 * inv[0]


@pytest.mark.parametrize("fam", ["curl+", "curl-"])
def test_curl_mode_boundary_condition(fam):
    for n, m in [(1, 1), (2, 1), (3, 2), (5, 1)]:
        md = make_mode(ModeIndex(fam, n, m, 1))
        th = np.linspace(0, math.pi, 13)
        ph = np.linspace(0, 2 * math.pi, 13)
        assert np.max(np.abs(eval_curl_mode(md, 1.0, th, ph)[..., 0])) < 1e-10


def test_graddiv_boundary_condition_and_zero_degree():
    for n, m in [(0, 1), (1, 1), (2, 2)]:
        md = make_mode(ModeIndex("graddiv", n, m, 0))
        assert np.max(np.abs(eval_graddiv_mode(md, 1.0, np.linspace(0, 3, 9), 0.2)[..., 0])) < 1e-10
    md = make_mode(ModeIndex("graddiv", 0, 2, 0))
    v = eval_graddiv_mode(md, np.linspace(0, 1, 9), 0.7, 1.1)
    assert np.all(v[..., 1:] == 0)


def test_graddiv_mode_is_gradient_of_potential():
    md = make_mode(ModeIndex("graddiv", 2, 1, 1))
    nu = alpha(2, 1)
    c = md.normalization

    def g(p):
        r, th, ph = fd.to_spherical(p)
        return (c * specfun.psi(2, nu * r) * specfun.ylm(2, 1, th, ph))[..., None]

    pts = fd.random_interior_points(np.random.default_rng(3), 20)
    grad = fd.jacobian(g, pts, 1e-4)[..., 0, :]
    assert np.max(np.abs(grad - fd.cartesian_field(md)(pts))) < 1e-6


def test_lowest_mode_matches_elementary_form():
    pts = fd.random_interior_points(np.random.default_rng(4), 30)
    r, th, ph = fd.to_spherical(pts)
    md = make_mode(ModeIndex("curl+", 1, 1, 0))
    _, dev = fit_scalar(eval_curl_mode(md, r, th, ph), closed_form_lowest_mode(r, th))
    assert dev < 1e-10


def test_on_axis_limit_of_lowest_mode():
    # unnormalised u_r -> 2 rho / 3 at the centre; here with c = 1 and the psi/x form: 1/3 Y
    md = make_mode(ModeIndex("curl+", 1, 1, 0))
    y0 = math.sqrt(3 / (4 * math.pi))
    ur = eval_curl_mode(md, 1e-9, 0.0, 0.0)[0]
    assert ur == pytest.approx(md.normalization * y0 / 3, rel=1e-9)
    cf = closed_form_lowest_mode(1e-4, 0.0)[0]
    assert cf == pytest.approx(2 / 3, rel=1e-7)


def test_quadrature_and_closed_phi_agree():
    md = make_mode(ModeIndex("curl-", 2, 1, -1))
    r = np.array([0.1, 0.45, 0.8])
    a = eval_curl_mode(md, r, 0.9, 2.0)
    b = eval_curl_mode(md, r, 0.9, 2.0, phi_method="quadrature")
    assert np.max(np.abs(a - b)) < 1e-10


def test_radius_scaling_of_normalisation():
    for idx in [ModeIndex("curl+", 2, 1, 0), ModeIndex("graddiv", 1, 2, 1)]:
        a = make_mode(idx, 1.0)
        b = make_mode(idx, 2.0)
        ua = eval_mode(a, 0.3, 1.0, 0.5)
        ub = eval_mode(b, 0.6, 1.0, 0.5)
        assert np.allclose(ub, ua * 2.0 ** -1.5, rtol=1e-12, atol=0)


def test_modes_have_unit_norm():
    # doubled radial and polar orders; 32 azimuthal nodes are exact for |k| <= 15
    q = build_quadrature(96, 96, 32)
    for fam in ALL_FAMILIES:
        for md in enumerate_modes({fam}, count=20):
            assert inner_product(md, md, q) == pytest.approx(1.0, abs=1e-8)


def test_k_independence_of_normalisation():
    c = {normalization_constant(ModeIndex("curl+", 3, 2, k)) for k in range(-3, 4)}
    assert len(c) == 1


def test_outside_ball_rejected():
    md = make_mode(ModeIndex("curl+", 1, 1, 0))
    with pytest.raises(ValueError):
        md(1.01, 0.5, 0.5)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 6), m=st.integers(1, 4), k=st.integers(-6, 6),
       sign=st.sampled_from(["curl+", "curl-"]), seed=st.integers(0, 10**6))
def test_curl_eigen_residual_property(n, m, k, sign, seed):
    k = max(-n, min(n, k))
    md = make_mode(ModeIndex(sign, n, m, k))
    pts = fd.random_interior_points(np.random.default_rng(seed), 8)
    u = fd.cartesian_field(md)(pts)
    rot = fd.curl(md, pts, 1e-3)
    assert np.linalg.norm(rot - md.eigenvalue * u) < 1e-5 * np.linalg.norm(md.eigenvalue * u)
    assert np.max(np.abs(fd.div(md, pts, 1e-3))) < 1e-5 * np.max(np.abs(u))


def test_helmholtz_reduction():
    # v = r u_r of a curl mode solves -Laplace v = lam^2 v
    md = make_mode(ModeIndex("curl-", 2, 1, 1))

    def v(p):
        r, th, ph = fd.to_spherical(p)
        return (r * eval_curl_mode(md, r, th, ph)[..., 0])[..., None]

    pts = fd.random_interior_points(np.random.default_rng(5), 20)
    h = 2e-3
    lap = np.zeros(len(pts))
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        lap += ((-v(pts + 2 * e) + 16 * v(pts + e) - 30 * v(pts) + 16 * v(pts - e) - v(pts - 2 * e))
                / (12 * h * h))[:, 0]
    vv = v(pts)[:, 0]
    assert np.linalg.norm(-lap - md.eigenvalue**2 * vv) < 1e-4 * np.linalg.norm(md.eigenvalue**2 * vv)
