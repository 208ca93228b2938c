import io
import math

import numpy as np
import pytest

from ballspectra import fieldio
from ballspectra.modes import Family, ModeIndex, eval_mode, make_mode
from ballspectra.quad import EvaluationError, SpectralField

LOWEST = make_mode(ModeIndex(Family.CURL_PLUS, 1, 1, 0))


def mode_eval(md):
    return lambda r, t, p: eval_mode(md, r, t, p)


def zero_field(r, t, p):
    return np.zeros(np.shape(r) + (3,))


def test_grid_nodes_layout():
    r, th, ph = fieldio.grid_nodes((4, 5, 8), 2.0)
    assert r[0] == 0.5 and r[-1] == 2.0
    assert th[0] == 0 and th[-1] == math.pi
    assert ph[0] == 0 and ph[-1] < 2 * math.pi
    with pytest.raises(ValueError):
        fieldio.grid_nodes((1, 4, 4))


def test_zero_field_sample_and_interpolation():
    gf = fieldio.sample(zero_field, (4, 4, 4))
    assert np.all(gf.samples == 0)
    assert np.all(gf(0.3, 1.0, 2.0) == 0)


def test_interpolant_reproduces_nodes():
    gf = fieldio.sample(mode_eval(LOWEST), (6, 7, 8))
    r, th, ph = fieldio.grid_nodes((6, 7, 8))
    rr, tt, pp = np.meshgrid(r, th, ph, indexing="ij")
    assert np.max(np.abs(gf(rr, tt, pp) - gf.samples)) < 1e-12


def test_interpolant_periodic_in_phi():
    md = make_mode(ModeIndex(Family.CURL_PLUS, 2, 1, 1))
    gf = fieldio.sample(mode_eval(md), (6, 7, 16))
    a = gf(0.5, 1.0, 0.01)
    b = gf(0.5, 1.0, 0.01 + 2 * math.pi)
    assert np.allclose(a, b, atol=1e-12)


def test_boundary_ring_normal_component():
    md = make_mode(ModeIndex(Family.CURL_MINUS, 2, 1, 1))
    gf = fieldio.sample(mode_eval(md), (8, 9, 12))
    assert np.max(np.abs(gf.samples[-1, :, :, 0])) < 1e-10


def test_sample_reports_failing_node():
    def bad(r, t, p):
        out = np.zeros(np.shape(r) + (3,))
        return np.where((np.asarray(r) > 0.9)[..., None], np.nan, out)
    with pytest.raises(EvaluationError, match="r=1.0"):
        fieldio.sample(bad, (2, 2, 2))


def test_kernel_matches_vector_evaluator():
    sf = SpectralField(1.0, {ModeIndex("curl+", 1, 1, 0): 1.0, ModeIndex("graddiv", 2, 1, -1): 0.4,
                             ModeIndex("curl-", 3, 2, 2): -0.7})
    fast = fieldio.cartesian_kernel(sf)
    slow = fieldio.cartesian_kernel(lambda r, t, p: sf(r, t, p))
    rng = np.random.default_rng(1)
    for p in rng.uniform(-0.55, 0.55, size=(20, 3)):
        assert np.allclose(fast(*p), slow(*p), rtol=1e-10, atol=1e-12)
    assert np.allclose(fast(0.0, 0.0, 0.3), slow(0.0, 0.0, 0.3), atol=1e-12)


def test_axis_streamline():
    up = fieldio.trace_streamline(LOWEST, (0.0, 0.0, -0.5), max_steps=100000)
    assert up.points[-1, 2] > 0.99
    assert np.all(np.diff(up.points[:, 2]) > 0)
    assert np.max(np.hypot(up.points[:, 0], up.points[:, 1])) < 1e-6


def test_off_axis_streamline_stays_inside():
    sl = fieldio.trace_streamline(LOWEST, (0.5, 0.0, 0.1), max_steps=20000)
    assert sl.termination == "max-steps" and len(sl) == 20001
    assert np.max(np.linalg.norm(sl.points, axis=1)) < 0.99


def test_step_bound():
    sl = fieldio.trace_streamline(LOWEST, (0.3, 0.2, -0.1), step=1e-2, max_steps=300)
    k = fieldio.cartesian_kernel(LOWEST)
    vmax = max(math.hypot(*k(*p)) for p in sl.points)
    jumps = np.linalg.norm(np.diff(sl.points, axis=0), axis=1)
    assert np.all(jumps <= 1e-2 * vmax * 1.001)


def test_zero_field_stagnates():
    sl = fieldio.trace_streamline(zero_field, (0.1, 0.1, 0.1), R=1.0)
    assert sl.termination == "stagnation"
    assert sl.points.shape == (1, 3)


def test_trace_validation():
    with pytest.raises(ValueError):
        fieldio.trace_streamline(LOWEST, (1.5, 0, 0))
    with pytest.raises(ValueError):
        fieldio.trace_streamline(LOWEST, (0, 0, 0), step=0)


def test_boundary_termination():
    # a uniform flow leaves the ball
    sl = fieldio.trace_streamline(lambda r, t, p: np.stack(np.broadcast_arrays(np.cos(t), -np.sin(t),
                                                                               0 * t), axis=-1),
                                  (0.0, 0.0, 0.0), step=0.05, R=1.0)
    assert sl.termination == "boundary"
    assert np.linalg.norm(sl.points[-1]) <= 1.0
    assert sl.points[-1, 2] > 0.95


@pytest.mark.parametrize("fmt", ["csv", "vtk"])
def test_grid_round_trip_bitwise(tmp_path, fmt):
    gf = fieldio.sample(mode_eval(make_mode(ModeIndex(Family.GRADDIV, 1, 1, 1))), (3, 4, 5))
    path = tmp_path / f"g.{fmt}"
    fieldio.export(gf, path)
    back = fieldio.load_grid(path)
    assert back.dims == gf.dims and back.R == gf.R
    assert np.array_equal(back.samples, gf.samples)


def test_grid_csv_row_count(tmp_path):
    gf = fieldio.sample(zero_field, (2, 2, 4))
    path = tmp_path / "g.csv"
    fieldio.export(gf, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "r,theta,phi,u_r,u_theta,u_phi"
    assert len(lines) == 17


def test_streamline_round_trip(tmp_path):
    sl = fieldio.trace_streamline(LOWEST, (0.2, 0.1, 0.0), step=5e-3, max_steps=50)
    fieldio.export(sl, tmp_path / "s.vtk")
    back = fieldio.load_streamline(tmp_path / "s.vtk")
    assert np.array_equal(back.points, sl.points)
    assert back.seed == sl.seed and back.step == sl.step and back.termination == sl.termination
    fieldio.export(sl, tmp_path / "s.csv")
    back = fieldio.load_streamline(tmp_path / "s.csv")
    assert np.array_equal(back.points, sl.points) and math.isnan(back.step)


def test_empty_streamline_vtk(tmp_path):
    sl = fieldio.Streamline((0.0, 0.0, 0.0), 0.1, np.empty((0, 3)), "stagnation")
    buf = io.StringIO()
    fieldio.export(sl, buf, fmt="vtk")
    assert "LINES 0 0" in buf.getvalue()
    (tmp_path / "e.vtk").write_text(buf.getvalue())
    back = fieldio.load_streamline(tmp_path / "e.vtk")
    assert len(back) == 0 and back.termination == "stagnation"


def test_io_errors(tmp_path):
    gf = fieldio.sample(zero_field, (2, 2, 2))
    with pytest.raises(OSError):
        fieldio.export(gf, tmp_path / "missing" / "g.csv")
    with pytest.raises(OSError):
        fieldio.load_grid(tmp_path / "nope.csv")
    with pytest.raises(ValueError):
        fieldio.export(gf, tmp_path / "g.txt")
    with pytest.raises(ValueError):
        fieldio.export(gf, io.StringIO())
