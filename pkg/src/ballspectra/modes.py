"""
Eigenmodes of rot and grad div on the ball of radius R.

Curl modes (rot u = lam u, div u = 0, n . u = 0 on the sphere) are built from

    u_r             = c (lam r)^-1 psi_n(lam r) Y_n^k
    u_phi + i u_th  = c (lam r)^-1 Phi_n(lam r) H Y_n^k

with lam = +-rho_{n,m} / R. Writing Phi = a + ib and H Y = h1 + i h2 this is
u_phi = a h1 - b h2, u_theta = a h2 + b h1, i.e. the complex product taken
literally; this reading is the one that satisfies rot u = lam u (checked by
finite differences in the test suite). Grad-div modes are gradients of
g = c psi_n(alpha_{n,m} r / R) Y_n^k and satisfy grad div v = -nu^2 v.

Real orthonormal harmonics are used, so every mode is a real field; the
free constant c is fixed positive by unit L2 normalisation.
"""
import enum
import functools
import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from .roots import alpha, rho

__all__ = [
    "Family",
    "ModeIndex",
    "Mode",
    "SphericalPoint",
    "parse_mode",
    "eigenvalue",
    "make_mode",
    "enumerate_modes",
    "eval_curl_mode",
    "eval_graddiv_mode",
    "eval_mode",
    "normalization_constant",
    "eigen_groups",
]


class Family(str, enum.Enum):
    CURL_PLUS = "curl+"
    CURL_MINUS = "curl-"
    GRADDIV = "graddiv"

    @property
    def is_curl(self):
        return self is not Family.GRADDIV

    @property
    def symbol(self):
        return {"curl+": "+", "curl-": "-", "graddiv": "g"}[self.value]

    @classmethod
    def parse(cls, s):
        if isinstance(s, Family):
            return s
        table = {"+": cls.CURL_PLUS, "-": cls.CURL_MINUS, "g": cls.GRADDIV,
                 "curl+": cls.CURL_PLUS, "curl-": cls.CURL_MINUS, "graddiv": cls.GRADDIV}
        try:
            return table[s]
        except KeyError:
            raise ValueError(f"unknown mode family {s!r}") from None


CURL_FAMILIES = frozenset({Family.CURL_PLUS, Family.CURL_MINUS})
ALL_FAMILIES = frozenset(Family)
_FAMILY_RANK = {Family.CURL_PLUS: 0, Family.CURL_MINUS: 1, Family.GRADDIV: 2}


@dataclass(frozen=True)
class ModeIndex:
    family: Family
    n: int
    m: int
    k: int

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        for name in ("n", "m", "k"):
            v = getattr(self, name)
            if int(v) != v:
                raise ValueError(f"{name}={v} must be an integer")
            object.__setattr__(self, name, int(v))
        if self.m < 1:
            raise ValueError(f"radial index m={self.m} must be >= 1")
        if abs(self.k) > self.n:
            raise ValueError(f"|k|={abs(self.k)} exceeds n={self.n}")
        if self.family.is_curl and self.n < 1:
            raise ValueError("curl modes require n >= 1")
        if self.n > specfun.MAX_DEGREE:
            raise ValueError(f"n={self.n} exceeds {specfun.MAX_DEGREE}")

    def __str__(self):
        return f"{self.n},{self.m},{self.k},{self.family.symbol}"

    def sort_key(self):
        return (self.n, self.m, self.k, _FAMILY_RANK[self.family])

    def to_json(self):
        return {"family": self.family.value, "n": self.n, "m": self.m, "k": self.k}


def parse_mode(text):
    """Parse the ``n,m,k,{+|-|g}`` mode syntax."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 4:
        raise ValueError(f"mode string {text!r} is not of the form n,m,k,{{+|-|g}}")
    n, m, k = (int(p) for p in parts[:3])
    return ModeIndex(Family.parse(parts[3]), n, m, k)


@dataclass(frozen=True)
class SphericalPoint:
    r: float
    theta: float
    phi_ang: float


def eigenvalue(index, R=1.0):
    """Operator eigenvalue: +-rho/R for rot, -(alpha/R)^2 for grad div."""
    if index.family is Family.CURL_PLUS:
        return rho(index.n, index.m) / R
    if index.family is Family.CURL_MINUS:
        return -rho(index.n, index.m) / R
    return -(alpha(index.n, index.m) / R) ** 2


def _radial_wavenumber(index, R):
    # signed lam for curl modes, nu for grad-div modes
    if index.family is Family.GRADDIV:
        return alpha(index.n, index.m) / R
    return eigenvalue(index, R)


def _radial_density(family, n, q, x):
    # |field|^2 integrated over the sphere of radius r, divided by c^2 r^2,
    # as a function of x = q r with q the radial wavenumber
    if family is Family.GRADDIV:
        d = q**2 * specfun.psi_prime_signed(n, x) ** 2
        if n > 0:
            d = d + q**2 * n * (n + 1) * specfun.psi_over_x(n, x) ** 2
        return d
    return (specfun.psi_over_x(n, x) ** 2
            + n * (n + 1) * np.abs(specfun.phi_over_x(n, x)) ** 2)


@functools.lru_cache(maxsize=None)
def _norm_factor(family, n, m, R):
    index = ModeIndex(family, n, m, 0)
    q = _radial_wavenumber(index, R)
    results = []
    for nodes in (48 + 4 * (n + m), 96 + 8 * (n + m)):
        x, w = np.polynomial.legendre.leggauss(nodes)
        r = 0.5 * R * (x + 1.0)
        w = 0.5 * R * w
        results.append(float(np.sum(w * r**2 * _radial_density(family, n, q, q * r))))
    if abs(results[0] - results[1]) > 1e-12 * results[1]:
        raise ArithmeticError(
            f"normalisation quadrature for {index} not converged: {results}")
    return 1.0 / math.sqrt(results[1])


def normalization_constant(index, R=1.0):
    """Positive c giving the mode unit L2 norm on the ball of radius R (memoised)."""
    if R <= 0:
        raise ValueError("radius must be positive")
    return _norm_factor(index.family, index.n, index.m, float(R))


@dataclass(frozen=True)
class Mode:
    """A normalised eigenmode; calling it evaluates the field."""

    index: ModeIndex
    eigenvalue: float
    normalization: float
    radius: float

    def __call__(self, r, theta, phi_ang):
        return eval_mode(self, r, theta, phi_ang)

    @property
    def abs_eigenvalue(self):
        return abs(self.eigenvalue)


def make_mode(index, R=1.0):
    return Mode(index, eigenvalue(index, R), normalization_constant(index, R), float(R))


def _check_in_ball(r, R):
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(r > R * (1 + 1e-12)) or not np.all(np.isfinite(r)):
        raise ValueError(f"radius outside [0, {R}]")
    return r


def _stack(ur, uth, uph):
    return np.stack(np.broadcast_arrays(ur, uth, uph), axis=-1)


def eval_curl_mode(mode, r, theta, phi_ang, phi_method="closed"):
    """Spherical components (u_r, u_theta, u_phi) of a curl mode.

    ``phi_method="quadrature"`` evaluates Phi_n by its defining integral
    instead of the closed form; both give the same field.
    """
    idx = mode.index
    if not idx.family.is_curl:
        raise ValueError(f"{idx} is not a curl mode")
    r = _check_in_ball(r, mode.radius)
    r, theta, phi_ang = np.broadcast_arrays(r, np.asarray(theta, float), np.asarray(phi_ang, float))
    lam = mode.eigenvalue
    x = lam * r
    n = idx.n
    y, y_th, y_ph = specfun.ylm_derivatives(n, idx.k, theta, phi_ang)
    if phi_method == "closed":
        phx = specfun.phi_over_x(n, x)
    elif phi_method == "quadrature":
        flat = r.ravel()
        uniq, inv = np.unique(flat, return_inverse=True)
        vals = np.array([specfun.phi(n, lam, rr) / (lam * rr) if rr > 0 else
                         complex(specfun.phi_over_x(n, np.array([0.0]))[0]) for rr in uniq])
        phx = vals[inv].reshape(r.shape)
    else:
        raise ValueError(f"unknown phi_method {phi_method!r}")
    c = mode.normalization
    ur = c * specfun.psi_over_x(n, x) * y
    w = c * phx * (y_ph + 1j * y_th)
    return _stack(ur, w.imag, w.real)


def eval_graddiv_mode(mode, r, theta, phi_ang):
    """Spherical components of grad g, g = c psi_n(nu r) Y_n^k."""
    idx = mode.index
    if idx.family is not Family.GRADDIV:
        raise ValueError(f"{idx} is not a grad-div mode")
    r = _check_in_ball(r, mode.radius)
    r, theta, phi_ang = np.broadcast_arrays(r, np.asarray(theta, float), np.asarray(phi_ang, float))
    nu = alpha(idx.n, idx.m) / mode.radius
    x = nu * r
    n = idx.n
    c = mode.normalization
    y, y_th, y_ph = specfun.ylm_derivatives(n, idx.k, theta, phi_ang)
    vr = c * nu * specfun.psi_prime_signed(n, x) * y
    if n == 0:
        zero = np.zeros_like(vr)
        return _stack(vr, zero, zero)
    s = c * nu * specfun.psi_over_x(n, x)
    return _stack(vr, s * y_th, s * y_ph)


def eval_mode(mode, r, theta, phi_ang):
    if mode.index.family is Family.GRADDIV:
        return eval_graddiv_mode(mode, r, theta, phi_ang)
    return eval_curl_mode(mode, r, theta, phi_ang)


def _group_indices(family, n, m):
    return [ModeIndex(family, n, m, k) for k in range(-n, n + 1)]


def eigen_groups(families, bound, R):
    """(|eigenvalue|, family, n, m) for every eigenvalue group with |eigenvalue| <= bound."""
    out = []
    for fam in families:
        n = 0 if fam is Family.GRADDIV else 1
        root = alpha if fam is Family.GRADDIV else rho
        while n <= specfun.MAX_DEGREE:
            m = 1
            added = False
            while m <= 256:
                z = root(n, m)
                mag = (z / R) ** 2 if fam is Family.GRADDIV else z / R
                if mag > bound:
                    break
                out.append((mag, fam, n, m))
                added = True
                m += 1
            if not added and n > 0:
                # the lowest root grows with n, so no higher degree can contribute
                break
            n += 1
    return out


def enumerate_modes(families=ALL_FAMILIES, max_abs=None, count=None, R=1.0):
    """Modes sorted by |eigenvalue|, ties broken by (n, m, k, family).

    Exactly one of ``max_abs`` (keep |eigenvalue| <= max_abs) or ``count``
    (keep the first ``count`` modes) must be given.
    """
    families = {Family.parse(f) for f in families}
    if (max_abs is None) == (count is None):
        raise ValueError("give exactly one of max_abs or count")
    if count is not None:
        if count < 1:
            raise ValueError("count must be >= 1")
        bound = 1.0
        while True:
            groups = eigen_groups(families, bound, R)
            total = sum(2 * n + 1 for _, _, n, _ in groups)
            if total >= count:
                break
            bound *= 1.5
    else:
        if max_abs <= 0:
            raise ValueError("max_abs must be positive")
        groups = eigen_groups(families, max_abs, R)
    indices = []
    for mag, fam, n, m in groups:
        indices.extend((mag, idx) for idx in _group_indices(fam, n, m))
    indices.sort(key=lambda t: (t[0],) + t[1].sort_key())
    if count is not None:
        indices = indices[:count]
    return [make_mode(idx, R) for _, idx in indices]
