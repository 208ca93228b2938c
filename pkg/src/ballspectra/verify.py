"""
Self-checks behind ``ballspectra verify``.

Each suite returns a JSON-ready dict with a boolean ``passed`` and the
measured quantities; thresholds are fixed here so reports are comparable
between runs.
"""
import math

import numpy as np

from . import fd, fieldio, roots
from .modes import CURL_FAMILIES, Family, ModeIndex, enumerate_modes, eval_curl_mode, make_mode
from .quad import SpectralField, build_quadrature, default_orders, gram_matrix
from .solve import NotSolvable, resolvent_bound_constant, resolvent_curl, residual_check, solve_problem1
from .spectral import ScaleOrder, apply_power, scale_norm

__all__ = ["SUITES", "run_suite", "run_all", "closed_form_lowest_mode", "fit_scalar"]


def closed_form_lowest_mode(r, theta, R=1.0, printed=False):
    """Elementary expression for the (1,1,0) curl+ mode, up to a constant.

    With x = rho_{1,1} r / R:

        u_r     = 2 x^-3 (sin x - x cos x) cos(theta)
        u_theta = x^-3 (sin x - x cos x - x^2 sin x) sin(theta)
        u_phi   = x^-2 (sin x - x cos x) sin(theta)

    ``printed=True`` puts the extra factor rho on u_r found in the printed
    version of this formula; that variant is not an eigenfield.
    """
    rho = roots.rho(1, 1)
    x = rho * np.asarray(r, float) / R
    theta = np.asarray(theta, float)
    s, c = np.sin(x), np.cos(x)
    base = s - x * c
    ur = 2.0 * base / x**3 * np.cos(theta)
    if printed:
        ur = rho * ur
    uth = (base - x * x * s) / x**3 * np.sin(theta)
    uph = base / x**2 * np.sin(theta)
    return np.stack(np.broadcast_arrays(ur, uth, uph), axis=-1)


def fit_scalar(a, b):
    """Least-squares s with a ~ s b, and the worst pointwise relative deviation."""
    a = np.asarray(a, float).reshape(-1, 3)
    b = np.asarray(b, float).reshape(-1, 3)
    s = float(np.sum(a * b) / np.sum(b * b))
    dev = np.linalg.norm(a - s * b, axis=1) / np.linalg.norm(a, axis=1)
    return s, float(dev.max())


def _spectrum(cfg):
    rho11 = roots.rho(1, 1)
    zero_err = max(abs(roots.rho(0, m) - m * math.pi) for m in range(1, 11))
    alpha_err = max(abs(roots.alpha(0, m) - roots.rho(1, m)) for m in range(1, 11))
    ok = abs(rho11 - 4.4934) < 1e-4 and zero_err < 1e-12 and alpha_err < 1e-12
    return {"passed": ok, "rho_1_1": rho11, "max_rho_0m_error": zero_err,
            "max_alpha_0m_minus_rho_1m": alpha_err}


def _multiplicity(cfg):
    R = cfg["radius"]
    bound = roots.rho(4, 1) / R * 1.5
    modes = enumerate_modes({Family.CURL_PLUS}, max_abs=bound, R=R)
    counts = {}
    for md in modes:
        key = (md.index.n, md.index.m)
        counts[key] = counts.get(key, 0) + 1
    bad = [f"{n},{m}" for (n, m), c in counts.items()
           if n <= 4 and (c != 2 * n + 1 or any(
               abs(md.eigenvalue - roots.rho(n, m) / R) > 1e-12 for md in modes
               if (md.index.n, md.index.m) == (n, m)))]
    return {"passed": not bad and bool(counts), "groups_checked": len(counts), "bad_groups": bad}


def _eigen_residual(cfg):
    R = cfg["radius"]
    rng = np.random.default_rng(cfg["seed"])
    pts = fd.random_interior_points(rng, 50, R)
    h = 1e-3 * R
    worst_curl = worst_div = 0.0
    for md in enumerate_modes(CURL_FAMILIES, count=cfg.get("n_modes") or 25, R=R):
        u = fd.cartesian_field(md)(pts)
        rot = fd.curl(md, pts, h)
        worst_curl = max(worst_curl, np.linalg.norm(rot - md.eigenvalue * u)
                         / np.linalg.norm(md.eigenvalue * u))
        worst_div = max(worst_div, np.max(np.abs(fd.div(md, pts, h))) / np.max(np.abs(u)))
    worst_gd = worst_gcurl = 0.0
    for md in enumerate_modes({Family.GRADDIV}, count=15, R=R):
        v = fd.cartesian_field(md)(pts)
        gd = fd.grad_div(md, pts, 2 * h)
        worst_gd = max(worst_gd, np.linalg.norm(gd - md.eigenvalue * v)
                       / np.linalg.norm(md.eigenvalue * v))
        worst_gcurl = max(worst_gcurl, np.max(np.abs(fd.curl(md, pts, h))) / np.max(np.abs(v)))
    ok = worst_curl < 1e-5 and worst_div < 1e-5 and worst_gd < 1e-4 and worst_gcurl < 1e-5
    return {"passed": bool(ok), "curl_residual": worst_curl, "div_residual": worst_div,
            "graddiv_residual": worst_gd, "graddiv_curl": worst_gcurl}


def _closed_form(cfg):
    R = cfg["radius"]
    rng = np.random.default_rng(cfg["seed"])
    pts = fd.random_interior_points(rng, 100, R)
    r, th, ph = fd.to_spherical(pts)
    md = make_mode(ModeIndex(Family.CURL_PLUS, 1, 1, 0), R)
    ours = eval_curl_mode(md, r, th, ph)
    scale, dev = fit_scalar(ours, closed_form_lowest_mode(r, th, R))
    _, dev_printed = fit_scalar(ours, closed_form_lowest_mode(r, th, R, printed=True))
    return {"passed": dev < 1e-8, "scale": scale, "max_relative_deviation": dev,
            "printed_variant_deviation": dev_printed}


def _orthonormality(cfg):
    R = cfg["radius"]
    modes = enumerate_modes(count=cfg.get("n_modes") or 30, R=R)
    n_max = max(md.index.n for md in modes)
    m_max = max(md.index.m for md in modes)
    orders = cfg.get("quad") or default_orders(n_max, m_max)
    G = gram_matrix(modes, build_quadrature(*orders, R=R))
    off = float(np.max(np.abs(G - np.diag(np.diag(G)))))
    diag = float(np.max(np.abs(np.diag(G) - 1.0)))
    return {"passed": off < 1e-7 and diag < 1e-6, "n_modes": len(modes),
            "quadrature": list(orders), "max_off_diagonal": off, "max_diagonal_error": diag}


def _resolvent(cfg):
    R = cfg["radius"]
    idx = ModeIndex(Family.CURL_PLUS, 1, 1, 0)
    f = SpectralField(R, {idx: 1.0})
    u = solve_problem1(f, 1.0).solution
    exact = 1.0 / (1.0 + roots.rho(1, 1) / R)
    err = abs(u[idx] - exact)
    coef, fd_res = residual_check(u, f, 1.0, 1, seed=cfg["seed"])
    return {"passed": err <= 1e-15 and fd_res < 1e-4, "coefficient_error": err,
            "coefficient_residual": coef, "fd_residual": fd_res}


def _fredholm(cfg):
    R = cfg["radius"]
    lam = roots.rho(1, 1) / R
    bad = SpectralField(R, {ModeIndex(Family.CURL_PLUS, 1, 1, 0): 1.0,
                            ModeIndex(Family.CURL_MINUS, 1, 1, 0): 0.5})
    try:
        resolvent_curl(bad, lam)
        rejected, violated = False, []
    except NotSolvable as exc:
        rejected, violated = True, [str(i) for i in exc.violated_conditions]
    good = SpectralField(R, {ModeIndex(Family.CURL_PLUS, 1, 1, 0): 1.0,
                             ModeIndex(Family.CURL_MINUS, 2, 1, 1): 0.3})
    rep = resolvent_curl(good, lam)
    ok = (rejected and violated == ["1,1,0,-"] and rep.solution is not None
          and len(rep.kernel_basis) == 3
          and all(i.family is Family.CURL_MINUS for i in rep.kernel_basis))
    return {"passed": ok, "rejected_violations": violated,
            "kernel_dimension": len(rep.kernel_basis)}


def _random_field(rng, modes, R):
    return SpectralField(R, {md.index: float(c) for md, c in
                             zip(modes, rng.normal(size=len(modes)))})


def _norms(cfg):
    R = cfg["radius"]
    rng = np.random.default_rng(cfg["seed"])
    modes = enumerate_modes(CURL_FAMILIES, count=60, R=R)
    worst_sym = worst_trip = 0.0
    for trial in range(100):
        u = _random_field(rng, modes, R)
        m = 1 + trial % 2
        v = apply_power(u, "W", 2 * m)
        a, b = scale_norm(u, ScaleOrder("W", m)), scale_norm(v, ScaleOrder("W", -m))
        worst_sym = max(worst_sym, abs(a - b) / a)
        back = apply_power(apply_power(u, "W", 1), "W", -1)
        worst_trip = max(worst_trip, (back - u).norm() / u.norm())
    return {"passed": worst_sym < 1e-12 and worst_trip < 1e-14,
            "max_symmetry_error": worst_sym, "max_roundtrip_error": worst_trip}


def _bounds(cfg):
    R = cfg["radius"]
    rng = np.random.default_rng(cfg["seed"])
    modes = enumerate_modes(CURL_FAMILIES, count=100, R=R)
    violations = 0
    worst = 0.0
    for _ in range(1000):
        m = int(rng.integers(0, 3))
        lam = float(rng.choice([0.5, 1.0, 10.0]))
        f = _random_field(rng, modes, R)
        u = resolvent_curl(f, lam).solution
        lhs = scale_norm(u, ScaleOrder("W", m + 1))
        rhs = math.sqrt(resolvent_bound_constant(modes, lam, m)) * scale_norm(f, ScaleOrder("W", m))
        worst = max(worst, lhs / rhs)
        violations += lhs > rhs * (1 + 1e-12)
    return {"passed": violations == 0, "trials": 1000, "violations": int(violations),
            "max_ratio": worst}


def _streamlines(cfg):
    R = cfg["radius"]
    md = make_mode(ModeIndex(Family.CURL_PLUS, 1, 1, 0), R)
    up = fieldio.trace_streamline(md, (0.0, 0.0, -0.5 * R), max_steps=100000)
    down = fieldio.trace_streamline(md, (0.0, 0.0, -0.5 * R), max_steps=100000, direction=-1)
    axis = np.vstack([down.points[::-1], up.points[1:]])
    axis_dev = float(np.max(np.hypot(axis[:, 0], axis[:, 1])))
    monotone = bool(np.all(np.diff(axis[:, 2]) > 0))
    off = fieldio.trace_streamline(md, (0.5 * R, 0.0, 0.1 * R), max_steps=100000)
    r_off = np.linalg.norm(off.points, axis=1)
    ok = (axis_dev < 1e-6 * R and monotone and axis[0, 2] < -0.99 * R and axis[-1, 2] > 0.99 * R
          and off.termination == "max-steps" and r_off.max() < 0.99 * R)
    return {"passed": ok, "axis_deviation": axis_dev, "axis_monotone": monotone,
            "z_range": [float(axis[0, 2]), float(axis[-1, 2])],
            "off_axis_steps": len(off.points) - 1, "off_axis_max_radius": float(r_off.max())}


SUITES = {
    "spectrum": _spectrum,
    "multiplicity": _multiplicity,
    "eigen-residual": _eigen_residual,
    "closed-form": _closed_form,
    "orthonormality": _orthonormality,
    "resolvent": _resolvent,
    "fredholm": _fredholm,
    "norms": _norms,
    "bounds": _bounds,
    "streamlines": _streamlines,
}


def _plain(obj):
    # numpy scalars to builtins so the report serialises
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def run_suite(name, cfg):
    return _plain(SUITES[name](cfg))


def run_all(cfg, names=None):
    names = list(SUITES) if names is None else names
    results = {name: run_suite(name, cfg) for name in names}
    return {"passed": all(r["passed"] for r in results.values()), "suites": results}
