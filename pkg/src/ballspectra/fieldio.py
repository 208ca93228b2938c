"""
Grid sampling, CSV / legacy-VTK file exchange and streamline tracing.

Grid nodes are r_i = R (i+1) / N_r, theta_j = pi j / (N_theta - 1) and
phi_l = 2 pi l / N_phi, stored row-major with r slowest. Streamlines are
integrated with classical fourth-order Runge-Kutta in Cartesian coordinates;
for eigenmodes and spectral fields a scalar kernel avoids array overhead,
which is what makes 10^5-step orbits cheap.
"""
import csv
import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.sparse.linalg import spsolve

from . import fd, specfun
from .modes import Family, Mode, make_mode
from .quad import EvaluationError, SpectralField

__all__ = [
    "GridField",
    "Streamline",
    "grid_nodes",
    "sample",
    "cartesian_kernel",
    "trace_streamline",
    "export",
    "load_grid",
    "load_streamline",
]

GRID_HEADER = ["r", "theta", "phi", "u_r", "u_theta", "u_phi"]
TERMINATIONS = ("boundary", "max-steps", "stagnation")
STAGNATION_SPEED = 1e-12


def grid_nodes(dims, R=1.0):
    """The three 1-D node vectors of a sampling grid."""
    n_r, n_t, n_p = (int(d) for d in dims)
    if min(n_r, n_t, n_p) < 2:
        raise ValueError(f"grid dims must be >= 2, got {dims}")
    if R <= 0:
        raise ValueError("radius must be positive")
    r = R * np.arange(1, n_r + 1) / n_r
    theta = math.pi * np.arange(n_t) / (n_t - 1)
    phi = 2 * math.pi * np.arange(n_p) / n_p
    return r, theta, phi


@dataclass
class GridField:
    """Spherical components sampled on a tensor grid; samples has shape dims + (3,)."""

    R: float
    dims: tuple
    samples: np.ndarray
    _interp: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.shape != self.dims + (3,):
            raise ValueError(f"samples of shape {self.samples.shape} do not match dims {self.dims}")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("grid samples must be finite")
        grid_nodes(self.dims, self.R)

    def nodes(self):
        return grid_nodes(self.dims, self.R)

    def _interpolator(self):
        if self._interp is None:
            r, theta, phi = self.nodes()
            # periodic padding in phi so the interpolant wraps
            pad = 2
            n_p = len(phi)
            idx = np.arange(-pad, n_p + pad) % n_p
            phi_ext = 2 * math.pi * np.arange(-pad, n_p + pad) / n_p
            vals = self.samples[:, :, idx, :]
            kw = {"bounds_error": False, "fill_value": None}
            if min(self.dims) >= 4:
                # direct sparse solve: the default iterative one only reproduces nodes to ~1e-6
                kw.update(method="cubic", solver=spsolve)
            self._interp = RegularGridInterpolator((r, theta, phi_ext), vals, **kw)
        return self._interp

    def __call__(self, r, theta, phi_ang):
        """Tricubic interpolation of the samples (extrapolated below the first radial node)."""
        r, theta, phi_ang = np.broadcast_arrays(
            np.asarray(r, float), np.asarray(theta, float), np.asarray(phi_ang, float))
        pts = np.stack([r, theta, np.mod(phi_ang, 2 * math.pi)], axis=-1)
        return self._interpolator()(pts.reshape(-1, 3)).reshape(r.shape + (3,))


def sample(f, dims, R=1.0):
    """Evaluate a field at every grid node."""
    r, theta, phi = grid_nodes(dims, R)
    rr, tt, pp = np.meshgrid(r, theta, phi, indexing="ij")
    try:
        vals = np.asarray(f(rr, tt, pp), dtype=float)
        ok = vals.shape == rr.shape + (3,) and np.all(np.isfinite(vals))
    except Exception:  # noqa: BLE001 - located node by node below
        ok = False
    if ok:
        return GridField(R, tuple(rr.shape), vals)
    for i, j, l in np.ndindex(rr.shape):
        try:
            v = np.asarray(f(rr[i, j, l], tt[i, j, l], pp[i, j, l]), dtype=float)
        except Exception as exc:
            raise EvaluationError(
                f"evaluator failed at r={float(r[i])!r}, theta={float(theta[j])!r}, "
                f"phi={float(phi[l])!r}: {exc}") from exc
        if v.shape != (3,) or not np.all(np.isfinite(v)):
            raise EvaluationError(
                f"bad value {v.tolist()!r} at r={float(r[i])!r}, theta={float(theta[j])!r}, "
                f"phi={float(phi[l])!r}")
    raise EvaluationError("evaluator failed on the full grid but on no single node")


# ---------------------------------------------------------------------------
# Scalar Cartesian kernels

def _radial_scalar(n, x):
    """(j_n(x)/x, j_n'(x)) for real x; j_0(x)/x is returned as 0 near 0 (unused there)."""
    ax = abs(x)
    if ax < 1e-6:
        d = specfun._double_factorial_odd(n)
        if n == 0:
            jx, jp = 0.0, -ax / 3.0
        else:
            jx = ax ** (n - 1) * (1.0 - ax * ax / (2 * (2 * n + 3))) / d
            jp = n * ax ** (n - 1) / d
    else:
        j, jp = specfun.psi_scalar(n, ax)
        jx = j / ax
    if x < 0 and n % 2 == 0:
        # j_n / x and j_n' are odd in x for even n
        jx, jp = -jx, -jp
    return jx, jp


def _harmonic_scalar(n, k, ct, st, ph):
    """(Y, dY/dtheta, sin^-1 dY/dphi) at one point, matching specfun.ylm_derivatives."""
    m = abs(k)
    q, dq = specfun._legendre_q(n, m, ct)
    if m == 0:
        p, dp, p_over_u = q, -st * dq, 0.0
    else:
        um1 = st ** (m - 1)
        p = um1 * st * q
        dp = um1 * (m * ct * q - st * st * dq)
        p_over_u = um1 * q
    if k > 0:
        g, dg = math.cos(k * ph), -k * math.sin(k * ph)
    elif k < 0:
        g, dg = math.sin(m * ph), m * math.cos(m * ph)
    else:
        g, dg = 1.0, 0.0
    s = specfun._INV_SQRT_4PI
    return s * p * g, s * dp * g, s * p_over_u * dg


def _mode_spherical_scalar(mode, r, ct, st, ph):
    idx = mode.index
    n, c = idx.n, mode.normalization
    y, y_th, y_ph = _harmonic_scalar(n, idx.k, ct, st, ph)
    if idx.family is Family.GRADDIV:
        nu = math.sqrt(-mode.eigenvalue)
        jx, jp = _radial_scalar(n, nu * r)
        if n == 0:
            return c * nu * jp * y, 0.0, 0.0
        return c * nu * jp * y, c * nu * jx * y_th, c * nu * jx * y_ph
    lam = mode.eigenvalue
    x = lam * r
    jx, jp = _radial_scalar(n, x)
    nn = n * (n + 1)
    a = (jx + jp) / nn
    b = x * jx / nn
    # w = c (a + ib)(y_ph + i y_th); u_phi = Re w, u_theta = Im w
    return c * jx * y, c * (a * y_th + b * y_ph), c * (a * y_ph - b * y_th)


def cartesian_kernel(source):
    """Fast scalar evaluator (x, y, z) -> (vx, vy, vz).

    ``source`` is a Mode, a SpectralField or any FieldEvaluator; the first two
    use a pure-Python path, anything else goes through numpy per call.
    """
    if isinstance(source, Mode):
        terms = [(1.0, source)]
    elif isinstance(source, SpectralField):
        terms = [(c, make_mode(idx, source.R)) for idx, c in source.items() if c != 0.0]
    else:
        def generic(x, y, z):
            p = np.array([x, y, z], dtype=float)
            r, th, ph = fd.to_spherical(p)
            v = fd.spherical_to_cartesian_vec(np.asarray(source(r, th, ph), float), th, ph)
            return float(v[0]), float(v[1]), float(v[2])
        return generic

    def kernel(x, y, z):
        rxy = math.hypot(x, y)
        r = math.hypot(rxy, z)
        if r > 0.0:
            ct, st = z / r, rxy / r
        else:
            ct, st = 1.0, 0.0
        if rxy > 0.0:
            cp, sp = x / rxy, y / rxy
        else:
            cp, sp = 1.0, 0.0
        ph = math.atan2(sp, cp)
        ur = uth = uph = 0.0
        for c, md in terms:
            a, b, d = _mode_spherical_scalar(md, r, ct, st, ph)
            ur += c * a
            uth += c * b
            uph += c * d
        h = ur * st + uth * ct
        return h * cp - uph * sp, h * sp + uph * cp, ur * ct - uth * st

    return kernel


# ---------------------------------------------------------------------------
# Streamlines

@dataclass
class Streamline:
    seed: tuple
    step: float
    points: np.ndarray
    termination: str

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 3)
        if self.termination not in TERMINATIONS:
            raise ValueError(f"unknown termination {self.termination!r}")

    def __len__(self):
        return len(self.points)


def _radius_of(source, default):
    return float(getattr(source, "R", getattr(source, "radius", default)))


def trace_streamline(f, seed, step=None, max_steps=10000, R=None, direction=1):
    """Integrate dp/dt = u(p) from ``seed`` with fixed-step RK4.

    Parameters
    ----------
    f : Mode, SpectralField or FieldEvaluator
    seed : Cartesian start point inside the ball.
    step : time step; defaults to 1e-3 R.
    max_steps : maximum number of RK4 steps.
    R : ball radius, taken from ``f`` when it carries one.
    direction : +1 to follow the field, -1 to trace backwards.

    Stops when a step would leave the ball (``boundary``), when the speed at
    the current point falls below 1e-12 (``stagnation``) or after
    ``max_steps`` steps (``max-steps``).
    """
    R = _radius_of(f, 1.0) if R is None else float(R)
    step = 1e-3 * R if step is None else float(step)
    if step <= 0:
        raise ValueError("step must be positive")
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    x, y, z = (float(v) for v in seed)
    if math.hypot(x, y, z) > R:
        raise ValueError(f"seed {seed} lies outside the ball of radius {R}")
    u = cartesian_kernel(f)
    h = direction * step
    pts = [(x, y, z)]
    termination = "max-steps"
    for _ in range(int(max_steps)):
        k1 = u(x, y, z)
        if math.hypot(*k1) < STAGNATION_SPEED:
            termination = "stagnation"
            break
        try:
            k2 = u(x + 0.5 * h * k1[0], y + 0.5 * h * k1[1], z + 0.5 * h * k1[2])
            k3 = u(x + 0.5 * h * k2[0], y + 0.5 * h * k2[1], z + 0.5 * h * k2[2])
            k4 = u(x + h * k3[0], y + h * k3[1], z + h * k3[2])
        except ValueError:
            # an intermediate stage left the domain of the evaluator
            termination = "boundary"
            break
        xn = x + h * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]) / 6
        yn = y + h * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]) / 6
        zn = z + h * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]) / 6
        if math.hypot(xn, yn, zn) > R:
            termination = "boundary"
            break
        x, y, z = xn, yn, zn
        pts.append((x, y, z))
    return Streamline(tuple(float(v) for v in seed), step, np.array(pts), termination)


# ---------------------------------------------------------------------------
# File formats

def _fmt(v):
    return "%.17g" % v


def _infer_format(path, fmt):
    if fmt is not None:
        if fmt not in ("csv", "vtk"):
            raise ValueError(f"format must be 'csv' or 'vtk', got {fmt!r}")
        return fmt
    ext = os.path.splitext(str(path))[1].lower()
    if ext == ".csv":
        return "csv"
    if ext == ".vtk":
        return "vtk"
    raise ValueError(f"cannot infer file format from {path!r}; pass fmt")


def _open_write(path):
    try:
        return open(path, "w", newline="\n")
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc


def _open_read(path):
    try:
        return open(path, newline="")
    except OSError as exc:
        raise OSError(exc.errno, f"cannot read {path}: {exc.strerror}") from exc


def _grid_rows(gf):
    r, theta, phi = gf.nodes()
    rr, tt, pp = np.meshgrid(r, theta, phi, indexing="ij")
    return np.column_stack([rr.ravel(), tt.ravel(), pp.ravel(), gf.samples.reshape(-1, 3)])


def _write_grid_vtk(gf, fh):
    r, theta, phi = gf.nodes()
    rr, tt, pp = np.meshgrid(r, theta, phi, indexing="ij")
    xyz = fd.to_cartesian(rr.ravel(), tt.ravel(), pp.ravel())
    vec = fd.spherical_to_cartesian_vec(gf.samples.reshape(-1, 3), tt.ravel(), pp.ravel())
    npts = xyz.shape[0]
    n_r, n_t, n_p = gf.dims
    fh.write("# vtk DataFile Version 3.0\n")
    fh.write("ballspectra grid field\n")
    fh.write("ASCII\n")
    fh.write("DATASET STRUCTURED_GRID\n")
    # VTK's first index varies fastest, so phi comes first
    fh.write(f"DIMENSIONS {n_p} {n_t} {n_r}\n")
    fh.write(f"POINTS {npts} double\n")
    for p in xyz:
        fh.write(" ".join(_fmt(v) for v in p) + "\n")
    fh.write(f"POINT_DATA {npts}\n")
    fh.write("VECTORS velocity double\n")
    for v in vec:
        fh.write(" ".join(_fmt(c) for c in v) + "\n")
    fh.write("FIELD spherical 2\n")
    fh.write(f"u_spherical 3 {npts} double\n")
    for v in gf.samples.reshape(-1, 3):
        fh.write(" ".join(_fmt(c) for c in v) + "\n")
    fh.write("radius 1 1 double\n")
    fh.write(_fmt(gf.R) + "\n")


def _write_streamline_vtk(sl, fh):
    n = len(sl.points)
    fh.write("# vtk DataFile Version 3.0\n")
    fh.write(f"ballspectra streamline termination={sl.termination}\n")
    fh.write("ASCII\n")
    fh.write("DATASET POLYDATA\n")
    fh.write(f"POINTS {n} double\n")
    for p in sl.points:
        fh.write(" ".join(_fmt(v) for v in p) + "\n")
    if n:
        fh.write(f"LINES 1 {n + 1}\n")
        fh.write(" ".join(str(i) for i in [n] + list(range(n))) + "\n")
    else:
        fh.write("LINES 0 0\n")
    fh.write("FIELD meta 2\n")
    fh.write("seed 3 1 double\n")
    fh.write(" ".join(_fmt(v) for v in sl.seed) + "\n")
    fh.write("step 1 1 double\n")
    fh.write(_fmt(sl.step) + "\n")


def export(obj, path, fmt=None):
    """Write a GridField or Streamline as CSV or legacy ASCII VTK.

    ``path`` may also be an open text stream, in which case ``fmt`` is required.
    """
    if hasattr(path, "write"):
        if fmt is None:
            raise ValueError("fmt is required when writing to a stream")
        _export_to(obj, path, _infer_format(None, fmt))
        return
    fmt = _infer_format(path, fmt)
    with _open_write(path) as fh:
        _export_to(obj, fh, fmt)


def _export_to(obj, fh, fmt):
    if isinstance(obj, GridField):
        if fmt == "csv":
            fh.write(",".join(GRID_HEADER) + "\n")
            for row in _grid_rows(obj):
                fh.write(",".join(_fmt(v) for v in row) + "\n")
        else:
            _write_grid_vtk(obj, fh)
    elif isinstance(obj, Streamline):
        if fmt == "csv":
            fh.write("x,y,z\n")
            for p in obj.points:
                fh.write(",".join(_fmt(v) for v in p) + "\n")
        else:
            _write_streamline_vtk(obj, fh)
    else:
        raise TypeError(f"cannot export {type(obj).__name__}")


def _read_grid_csv(path):
    with _open_read(path) as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != GRID_HEADER:
        raise ValueError(f"{path}: expected header {','.join(GRID_HEADER)}")
    data = np.array([[float(v) for v in row] for row in rows[1:]], dtype=float)
    if data.size == 0:
        raise ValueError(f"{path}: no data rows")
    dims = tuple(len(np.unique(data[:, i])) for i in range(3))
    if int(np.prod(dims)) != len(data):
        raise ValueError(f"{path}: {len(data)} rows do not form a tensor grid {dims}")
    R = float(data[:, 0].max())
    gf = GridField(R, dims, data[:, 3:].reshape(dims + (3,)))
    if not np.allclose(_grid_rows(gf)[:, :3], data[:, :3], rtol=1e-14, atol=1e-14):
        raise ValueError(f"{path}: node coordinates are not in the standard layout")
    return gf


class _Tokens:
    def __init__(self, text):
        self.lines = text.splitlines()
        self.pos = 0

    def line(self):
        while self.pos < len(self.lines):
            s = self.lines[self.pos].strip()
            self.pos += 1
            if s:
                return s
        raise ValueError("unexpected end of VTK file")

    def floats(self, count):
        out = []
        while len(out) < count:
            out.extend(float(v) for v in self.line().split())
        if len(out) != count:
            raise ValueError("malformed VTK numeric block")
        return np.array(out)


def _read_vtk_header(path):
    with _open_read(path) as fh:
        tok = _Tokens(fh.read())
    if not tok.line().startswith("# vtk DataFile"):
        raise ValueError(f"{path}: not a legacy VTK file")
    title = tok.line()
    if tok.line() != "ASCII":
        raise ValueError(f"{path}: only ASCII VTK is supported")
    return tok, title


def _read_field_arrays(tok, n_arrays):
    arrays = {}
    for _ in range(n_arrays):
        name, ncomp, ntup, _dtype = tok.line().split()
        arrays[name] = tok.floats(int(ncomp) * int(ntup)).reshape(int(ntup), int(ncomp))
    return arrays


def _read_grid_vtk(path):
    tok, _ = _read_vtk_header(path)
    if tok.line() != "DATASET STRUCTURED_GRID":
        raise ValueError(f"{path}: expected STRUCTURED_GRID")
    n_p, n_t, n_r = (int(v) for v in tok.line().split()[1:4])
    npts = int(tok.line().split()[1])
    tok.floats(3 * npts)
    tok.line()  # POINT_DATA
    tok.line()  # VECTORS
    tok.floats(3 * npts)
    n_arrays = int(tok.line().split()[2])
    arrays = _read_field_arrays(tok, n_arrays)
    R = float(arrays["radius"][0, 0])
    return GridField(R, (n_r, n_t, n_p), arrays["u_spherical"].reshape(n_r, n_t, n_p, 3))


def _read_streamline_vtk(path):
    tok, title = _read_vtk_header(path)
    termination = title.split("termination=")[-1].strip()
    if tok.line() != "DATASET POLYDATA":
        raise ValueError(f"{path}: expected POLYDATA")
    npts = int(tok.line().split()[1])
    pts = tok.floats(3 * npts).reshape(npts, 3)
    n_lines, size = (int(v) for v in tok.line().split()[1:3])
    if n_lines:
        tok.floats(size)
    n_arrays = int(tok.line().split()[2])
    arrays = _read_field_arrays(tok, n_arrays)
    return Streamline(tuple(arrays["seed"][0]), float(arrays["step"][0, 0]), pts, termination)


def load_grid(path, fmt=None):
    """Read a GridField written by :func:`export`."""
    if _infer_format(path, fmt) == "csv":
        return _read_grid_csv(path)
    return _read_grid_vtk(path)


def load_streamline(path, fmt=None):
    """Read a streamline. CSV carries only the points, so seed is the first point,
    step is NaN and termination is reported as ``max-steps``."""
    if _infer_format(path, fmt) == "vtk":
        return _read_streamline_vtk(path)
    with _open_read(path) as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["x", "y", "z"]:
        raise ValueError(f"{path}: expected header x,y,z")
    pts = np.array([[float(v) for v in row] for row in rows[1:]], dtype=float).reshape(-1, 3)
    seed = tuple(pts[0]) if len(pts) else (math.nan,) * 3
    return Streamline(seed, math.nan, pts, "max-steps")
