import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ballspectra import roots, specfun
from ballspectra.roots import alpha, rho


def bisect(f, a, b, tol=1e-13):
    fa = f(a)
    while b - a > tol:
        c = 0.5 * (a + b)
        fc = f(c)
        if (fc > 0) == (fa > 0):
            a, fa = c, fc
        else:
            b = c
    return 0.5 * (a + b)


def test_rho_zero_degree_is_multiple_of_pi():
    for m in range(1, 11):
        assert abs(rho(0, m) - m * math.pi) < 1e-12


def test_rho_first_root():
    assert abs(rho(1, 1) - 4.4934) < 1e-4


def test_rho_second_root_of_tan_equation():
    # zeros of psi_1 solve tan z = z; sign-change oracle on (pi, 3 pi) away from the poles of tan
    g = lambda z: math.sin(z) - z * math.cos(z)
    ref = bisect(g, 2 * math.pi, 2.5 * math.pi)
    assert abs(rho(1, 2) - ref) < 1e-12


def test_alpha_matches_rho_shift():
    for m in range(1, 11):
        assert abs(alpha(0, m) - rho(1, m)) < 1e-12


def test_alpha_first_root_by_bisection():
    ref = bisect(lambda z: float(specfun.psi_prime(1, z)), 0.1, math.pi)
    assert abs(alpha(1, 1) - ref) < 1e-12


def test_alpha_is_a_derivative_zero():
    assert abs(specfun.psi_prime(2, alpha(2, 1))) < 1e-10


@settings(max_examples=60, deadline=None)
@given(n=st.integers(0, 30), m=st.integers(1, 30))
def test_root_residuals(n, m):
    assert abs(specfun.psi(n, rho(n, m))) < 1e-10
    assert abs(specfun.psi_prime(n, alpha(n, m))) < 1e-10


@pytest.mark.parametrize("n", range(0, 11))
def test_zero_count_matches_sign_changes(n):
    # kept off the grid-aligned zeros k pi of degree 0
    z_max = 58.5
    found = roots.PSI_ZEROS.roots_below(n, z_max)
    assert len(found) == roots.count_sign_changes(lambda z: specfun.psi(n, z), z_max)


def test_increasing_and_interlacing():
    for n in range(0, 12):
        for m in range(1, 12):
            assert rho(n, m) < rho(n, m + 1)
            assert rho(n, m) < rho(n + 1, m) < rho(n, m + 1)


def test_cache_is_bit_identical():
    a = rho(7, 5)
    assert rho(7, 5) == a
    assert roots.PSI_ZEROS.get(7, 5) == a


def test_range_errors():
    with pytest.raises(ValueError):
        rho(65, 1)
    with pytest.raises(ValueError):
        rho(1, 0)
    with pytest.raises(ValueError):
        alpha(1, 257)


def test_extreme_corner():
    z = rho(64, 256)
    assert abs(specfun.psi(64, z)) < 1e-10 * np.max(np.abs(specfun.psi(64, np.linspace(z - 3, z + 3, 50))))


def test_table_round_trip(tmp_path):
    rho(2, 3)
    path = tmp_path / "t.json"
    roots.PSI_ZEROS.dump(path, R=2.0)
    obj = json.loads(path.read_text())
    assert obj["kind"] == "psi-zero" and obj["R"] == 2.0
    table, R = roots.load_root_table(path)
    assert R == 2.0
    assert table.get(2, 3) == rho(2, 3)
