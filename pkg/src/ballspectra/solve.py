"""
Resolvent solvers with the Fredholm alternative, and the three model
boundary-value problems

    1:  rot u + lam u = f
    2:  grad div w + lam w = f
    3:  grad div u + rot u + lam u = f

all with vanishing normal trace. Each problem splits into its potential
(grad-div) and vortex (curl) projections, and both projections are diagonal
in the eigenbasis, so every solve is a coefficient-wise division. Near an
eigenvalue (within ``eps_spec``) the resonant branch is taken: the solve
succeeds only if f is orthogonal to the resonant eigenspace, and then the
minimal solution (zero resonant coefficients) is returned with the kernel.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from . import fd
from .modes import CURL_FAMILIES, Family, ModeIndex, eigen_groups, eigenvalue
from .quad import SpectralField
from .spectral import apply_power

__all__ = [
    "SolveReport",
    "NotSolvable",
    "default_eps_spec",
    "resolvent_curl",
    "resolvent_graddiv",
    "solve_problem1",
    "solve_problem2",
    "solve_problem3",
    "solve_power_problem",
    "apply_problem_operator",
    "residual_check",
    "resolvent_bound_constant",
    "forward_bound_constant",
]


@dataclass
class SolveReport:
    solution: SpectralField | None
    resonant: bool = False
    resonant_eigenvalue: float | None = None
    violated_conditions: list = field(default_factory=list)
    kernel_basis: list = field(default_factory=list)
    residual_norm: float = 0.0

    def to_json(self):
        return {
            "solution": None if self.solution is None else self.solution.to_json(),
            "resonant": self.resonant,
            "resonant_eigenvalue": self.resonant_eigenvalue,
            "violated_conditions": [i.to_json() for i in self.violated_conditions],
            "kernel_basis": [i.to_json() for i in self.kernel_basis],
            "residual_norm": self.residual_norm,
        }


class NotSolvable(ValueError):
    """Resonant right-hand side not orthogonal to the kernel of the adjoint."""

    def __init__(self, report):
        self.report = report
        self.violated_conditions = report.violated_conditions
        names = ", ".join(str(i) for i in report.violated_conditions)
        super().__init__(f"no solution at resonance {report.resonant_eigenvalue}: "
                         f"right side not orthogonal to modes {names}")


def default_eps_spec(lam):
    return 1e-9 * abs(lam) + 1e-12


def _resonant_groups(families, lam, p, R, eps):
    """Eigenvalue groups (family, n, m, eigenvalue) with |e^p + lam| <= eps."""
    if lam == 0:
        return []
    target = abs(lam) ** (1.0 / p)
    found = []
    for fam in families:
        band = target + eps + 1e-9 * target
        for _, f, n, m in eigen_groups({fam}, band, R):
            e = eigenvalue(ModeIndex(f, n, m, 0), R)
            if abs(e**p + lam) <= eps:
                found.append((f, n, m, e))
    return found


def _diagonal_solve(f, lam, families, p, eps_spec, orth_tol):
    """Solve (T^p + lam) u = f on the given families; returns a report, never raises."""
    R = f.R
    eps = default_eps_spec(lam) if eps_spec is None else eps_spec
    groups = _resonant_groups(families, lam, p, R, eps)
    kernel = [ModeIndex(fam, n, m, k) for fam, n, m, _ in groups for k in range(-n, n + 1)]
    kernel_set = set(kernel)
    tol = orth_tol if orth_tol is not None else 1e-10 * max(1.0, f.norm())
    violated = [idx for idx in kernel if abs(f[idx]) > tol]
    res_eig = groups[0][3] if groups else None
    if violated:
        return SolveReport(None, True, res_eig, violated, kernel, math.nan)
    coeffs = {}
    resid = 0.0
    for idx, c in f.items():
        if idx in kernel_set:
            coeffs[idx] = 0.0
            resid += c * c
        else:
            d = eigenvalue(idx, R) ** p + lam
            coeffs[idx] = c / d
    return SolveReport(SpectralField(R, coeffs), bool(kernel), res_eig, [], kernel, math.sqrt(resid))


def _check_support(f, families, what):
    bad = [i for i in f.indices() if i.family not in families]
    if bad:
        raise ValueError(f"{what} expects modes of {sorted(x.value for x in families)}, "
                         f"got {bad[0]}")


def _raise_if_violated(report):
    if report.violated_conditions:
        raise NotSolvable(report)
    return report


def resolvent_curl(f, lam, eps_spec=None, orth_tol=None):
    """(S + lam I)^-1 f for f supported on curl modes.

    Off resonance each coefficient is divided by lam + e_j with e_j = +-lam_j.
    At lam = lam_j0 (resp. -lam_j0) the resonant modes are the curl- (resp.
    curl+) modes with |e_j| = lam_j0; f must vanish on them.
    """
    _check_support(f, CURL_FAMILIES, "resolvent_curl")
    return _raise_if_violated(_diagonal_solve(f, lam, CURL_FAMILIES, 1, eps_spec, orth_tol))


def resolvent_graddiv(f, lam, eps_spec=None, orth_tol=None):
    """(N_d + lam I)^-1 f for f supported on grad-div modes; divisor lam - nu_j^2."""
    _check_support(f, {Family.GRADDIV}, "resolvent_graddiv")
    return _raise_if_violated(_diagonal_solve(f, lam, {Family.GRADDIV}, 1, eps_spec, orth_tol))


def _merge(R, *reports):
    coeffs, kernel, violated = {}, [], []
    resid = 0.0
    res_eig = None
    for rep in reports:
        kernel += rep.kernel_basis
        violated += rep.violated_conditions
        if rep.resonant_eigenvalue is not None and res_eig is None:
            res_eig = rep.resonant_eigenvalue
        if rep.solution is not None:
            coeffs.update(rep.solution.coefficients)
        if not math.isnan(rep.residual_norm):
            resid += rep.residual_norm**2
    if violated:
        return SolveReport(None, True, res_eig, violated, kernel, math.nan)
    return SolveReport(SpectralField(R, coeffs), bool(kernel), res_eig, [], kernel, math.sqrt(resid))


def _scaled(part, lam):
    if len(part) and lam == 0:
        raise ZeroDivisionError("lam = 0 leaves the zeroth-order projection unsolvable "
                                "for a nonzero right side")
    coeffs = {idx: c / lam for idx, c in part.items()}
    return SolveReport(SpectralField(part.R, coeffs))


def solve_problem1(f, lam, eps_spec=None, orth_tol=None):
    """rot u + lam u = f: u_A = f_A / lam, u_V = (S + lam I)^-1 f_V."""
    rep = _merge(f.R, _scaled(f.graddiv_part, lam),
                 _diagonal_solve(f.curl_part, lam, CURL_FAMILIES, 1, eps_spec, orth_tol))
    return _raise_if_violated(rep)


def solve_problem2(f, lam, eps_spec=None, orth_tol=None):
    """grad div w + lam w = f: w_A = (N_d + lam I)^-1 f_A, w_V = f_V / lam.

    Resonance occurs at lam = nu_j^2 (the divisor is lam - nu_j^2).
    """
    rep = _merge(f.R,
                 _diagonal_solve(f.graddiv_part, lam, {Family.GRADDIV}, 1, eps_spec, orth_tol),
                 _scaled(f.curl_part, lam))
    return _raise_if_violated(rep)


def solve_problem3(f, lam, eps_spec=None, orth_tol=None):
    """grad div u + rot u + lam u = f: both resolvents, one per projection."""
    rep = _merge(f.R,
                 _diagonal_solve(f.graddiv_part, lam, {Family.GRADDIV}, 1, eps_spec, orth_tol),
                 _diagonal_solve(f.curl_part, lam, CURL_FAMILIES, 1, eps_spec, orth_tol))
    return _raise_if_violated(rep)


def solve_power_problem(f, lam, p, problem=1, eps_spec=None, orth_tol=None):
    """rot^p u + lam u = f (problem 1) or (grad div)^p w + lam w = f (problem 2).

    Composition helper for p >= 1: the operated projection is divided by
    e_j^p + lam, the other projection by lam.
    """
    if int(p) != p or p < 1:
        raise ValueError("p must be a positive integer")
    if problem == 1:
        rep = _merge(f.R, _scaled(f.graddiv_part, lam),
                     _diagonal_solve(f.curl_part, lam, CURL_FAMILIES, int(p), eps_spec, orth_tol))
    elif problem == 2:
        rep = _merge(f.R,
                     _diagonal_solve(f.graddiv_part, lam, {Family.GRADDIV}, int(p), eps_spec, orth_tol),
                     _scaled(f.curl_part, lam))
    else:
        raise ValueError("problem must be 1 or 2")
    return _raise_if_violated(rep)


def apply_problem_operator(u, lam, problem):
    """Left-hand side of problem 1, 2 or 3 applied in coefficient space."""
    if problem not in (1, 2, 3):
        raise ValueError("problem must be 1, 2 or 3")
    out = lam * u
    if problem in (1, 3) and len(u.curl_part):
        out = out + apply_power(u.curl_part, "W", 1)
    if problem in (2, 3) and len(u.graddiv_part):
        out = out + apply_power(u.graddiv_part, "A", 1)
    return out


def _fd_operator(u, lam, problem, pts, h):
    r, th, ph = fd.to_spherical(pts)
    val = lam * fd.spherical_to_cartesian_vec(u(r, th, ph), th, ph)
    if problem in (1, 3):
        val = val + fd.curl(u, pts, h)
    if problem in (2, 3):
        val = val + fd.grad_div(u, pts, 2 * h)
    return val


def residual_check(u, f, lam, problem, grid_samples=50, seed=0, h=1e-3):
    """(coefficient residual, finite-difference residual) of a solution.

    The coefficient residual is the Euclidean norm of L u - f computed
    exactly on the coefficients; the finite-difference residual samples the
    synthesised fields at random interior points, applies fourth-order
    differences and is relative to the sampled norm of f.
    """
    diff = apply_problem_operator(u, lam, problem) - f
    coef = diff.norm()
    rng = np.random.default_rng(seed)
    pts = fd.random_interior_points(rng, grid_samples, u.R)
    lhs = _fd_operator(u, lam, problem, pts, h * u.R)
    r, th, ph = fd.to_spherical(pts)
    rhs = fd.spherical_to_cartesian_vec(f(r, th, ph), th, ph)
    scale = np.linalg.norm(rhs)
    fd_res = float(np.linalg.norm(lhs - rhs) / (scale if scale > 0 else 1.0))
    return coef, fd_res


def resolvent_bound_constant(modes, lam, m):
    """C_m^2 = max_j A_{m,j}^{+-}, A^{+-} = (1 + lam_j^(-2m)) / |1 +- lam / lam_j|^2.

    A^+ is taken over curl+ modes and A^- over curl- modes, matching the
    divisors lam + lam_j and lam - lam_j of the resolvent.
    """
    vals = []
    for md in modes:
        if not md.index.family.is_curl:
            continue
        lj = abs(md.eigenvalue)
        sign = 1.0 if md.index.family is Family.CURL_PLUS else -1.0
        vals.append((1.0 + lj ** (-2 * m)) / abs(1.0 + sign * lam / lj) ** 2)
    return max(vals)


def forward_bound_constant(modes, lam, m):
    """c_m^2 = max_j a_{m,j}^{+-}, a^{+-} = |1 +- lam / lam_j|^2 / (1 + lam_j^(-2m))."""
    vals = []
    for md in modes:
        if not md.index.family.is_curl:
            continue
        lj = abs(md.eigenvalue)
        sign = 1.0 if md.index.family is Family.CURL_PLUS else -1.0
        vals.append(abs(1.0 + sign * lam / lj) ** 2 / (1.0 + lj ** (-2 * m)))
    return max(vals)
