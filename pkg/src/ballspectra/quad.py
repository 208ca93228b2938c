"""
Tensor-product quadrature on the ball, inner products, projection onto the
eigenbasis and synthesis of truncated series.
"""
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .modes import Family, ModeIndex, eval_mode, make_mode

__all__ = [
    "BallQuadrature",
    "EvaluationError",
    "SpectralField",
    "build_quadrature",
    "default_orders",
    "sample_on",
    "inner_product",
    "gram_matrix",
    "project",
    "synthesize",
    "load_spectral_field",
    "save_spectral_field",
]


class EvaluationError(RuntimeError):
    """A field evaluator failed or returned non-finite values at some node."""


@dataclass(frozen=True)
class BallQuadrature:
    """Gauss-Legendre in r (weight r^2) and cos(theta), trapezoidal in phi."""

    r: np.ndarray
    r_weights: np.ndarray
    theta: np.ndarray
    theta_weights: np.ndarray
    phi: np.ndarray
    phi_weight: float
    R: float

    @property
    def shape(self):
        return (len(self.r), len(self.theta), len(self.phi))

    def mesh(self):
        return np.meshgrid(self.r, self.theta, self.phi, indexing="ij")

    def weights(self):
        return (self.r_weights[:, None, None] * self.theta_weights[None, :, None]
                * self.phi_weight * np.ones(len(self.phi))[None, None, :])

    def integrate(self, values):
        """Integrate scalar node values of shape ``self.shape``."""
        return float(np.sum(self.weights() * values))


def build_quadrature(n_r, n_theta, n_phi, R=1.0):
    """Ball rule exact for r^a P(cos theta) e^{i k phi}, a <= 2 n_r - 3,
    deg P <= 2 n_theta - 1, |k| < n_phi / 2."""
    if n_r < 2 or n_theta < 2 or n_phi < 4:
        raise ValueError("need n_r, n_theta >= 2 and n_phi >= 4")
    if R <= 0:
        raise ValueError("radius must be positive")
    x, w = np.polynomial.legendre.leggauss(int(n_r))
    r = 0.5 * R * (x + 1.0)
    r_w = 0.5 * R * w * r**2
    t, tw = np.polynomial.legendre.leggauss(int(n_theta))
    # ascending theta
    theta = np.arccos(t)[::-1]
    tw = tw[::-1]
    phi = 2 * math.pi * np.arange(int(n_phi)) / n_phi
    return BallQuadrature(r, r_w, theta, tw, phi, 2 * math.pi / n_phi, float(R))


def default_orders(n_max=8, m_max=8):
    """(N_r, N_theta, N_phi), scaled linearly once max(n, m) exceeds 8."""
    s = max(1.0, max(n_max, m_max) / 8.0)
    return (int(math.ceil(48 * s)), int(math.ceil(48 * s)), int(math.ceil(96 * s)))


def sample_on(f, q):
    """Evaluate a FieldEvaluator on all nodes of ``q``; returns shape q.shape + (3,)."""
    r, t, p = q.mesh()
    try:
        vals = np.asarray(f(r, t, p), dtype=float)
        bad = not np.all(np.isfinite(vals))
    except Exception as exc:  # noqa: BLE001 - relocated below
        vals, bad, cause = None, True, exc
    else:
        cause = None
    if not bad:
        return vals
    # locate the first failing node
    for i in range(len(q.r)):
        for j in range(len(q.theta)):
            try:
                row = np.asarray(f(r[i, j], t[i, j], p[i, j]), dtype=float)
            except Exception as exc:
                raise EvaluationError(
                    f"evaluator failed at r={q.r[i]!r}, theta={q.theta[j]!r}: {exc}") from exc
            if not np.all(np.isfinite(row)):
                k = int(np.argmax(~np.all(np.isfinite(row), axis=-1)))
                raise EvaluationError(
                    f"non-finite value at r={q.r[i]!r}, theta={q.theta[j]!r}, phi={q.phi[k]!r}")
    raise EvaluationError("evaluator failed on the full grid") from cause


def inner_product(f, g, q):
    """Quadrature approximation of int_ball f . g dV."""
    a = sample_on(f, q)
    b = a if g is f else sample_on(g, q)
    return q.integrate(np.sum(a * b, axis=-1))


def gram_matrix(modes, q):
    """Matrix of pairwise inner products, one evaluation per mode."""
    w = np.sqrt(q.weights())[..., None]
    rows = np.stack([(sample_on(md, q) * w).ravel() for md in modes])
    return rows @ rows.T


@dataclass
class SpectralField:
    """Finite eigenbasis expansion: coefficients keyed by ModeIndex on a ball of radius R."""

    R: float = 1.0
    coefficients: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.R <= 0:
            raise ValueError("radius must be positive")
        for idx, c in self.coefficients.items():
            if not isinstance(idx, ModeIndex):
                raise TypeError(f"key {idx!r} is not a ModeIndex")
            if not math.isfinite(c):
                raise ValueError(f"non-finite coefficient at {idx}")

    def __len__(self):
        return len(self.coefficients)

    def __getitem__(self, idx):
        return self.coefficients.get(idx, 0.0)

    def items(self):
        return self.coefficients.items()

    def indices(self):
        return list(self.coefficients)

    def _same_ball(self, other):
        if self.R != other.R:
            raise ValueError(f"radius mismatch: {self.R} vs {other.R}")

    def __add__(self, other):
        self._same_ball(other)
        out = dict(self.coefficients)
        for idx, c in other.items():
            out[idx] = out.get(idx, 0.0) + c
        return SpectralField(self.R, out)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __rmul__(self, a):
        return SpectralField(self.R, {idx: a * c for idx, c in self.items()})

    __mul__ = __rmul__

    def map(self, fn):
        """New field with coefficient c at idx replaced by fn(idx, c)."""
        return SpectralField(self.R, {idx: fn(idx, c) for idx, c in self.items()})

    def restrict(self, families):
        families = {Family.parse(f) for f in families}
        return SpectralField(self.R, {i: c for i, c in self.items() if i.family in families})

    @property
    def curl_part(self):
        return self.restrict({Family.CURL_PLUS, Family.CURL_MINUS})

    @property
    def graddiv_part(self):
        return self.restrict({Family.GRADDIV})

    def norm(self):
        return math.sqrt(sum(c * c for c in self.coefficients.values()))

    def modes(self):
        return [make_mode(idx, self.R) for idx in self.coefficients]

    def __call__(self, r, theta, phi_ang):
        return synthesize(self, r, theta, phi_ang)

    def to_json(self):
        return {"R": self.R,
                "modes": [dict(idx.to_json(), c=c) for idx, c in self.coefficients.items()]}

    @classmethod
    def from_json(cls, obj):
        coeffs = {}
        for row in obj["modes"]:
            idx = ModeIndex(Family.parse(row["family"]), row["n"], row["m"], row["k"])
            coeffs[idx] = coeffs.get(idx, 0.0) + float(row["c"])
        return cls(float(obj["R"]), coeffs)


def save_spectral_field(sf, path):
    with open(path, "w") as fh:
        json.dump(sf.to_json(), fh, indent=1)
        fh.write("\n")


def load_spectral_field(path):
    with open(path) as fh:
        return SpectralField.from_json(json.load(fh))


def project(f, modes, q):
    """Coefficients <f, q_j> for each mode, as a SpectralField."""
    if not modes:
        raise ValueError("project needs a non-empty mode list")
    w = q.weights()
    fv = sample_on(f, q)
    coeffs = {}
    for md in modes:
        if md.radius != q.R:
            raise ValueError(f"mode radius {md.radius} differs from quadrature radius {q.R}")
        coeffs[md.index] = float(np.sum(w * np.sum(fv * sample_on(md, q), axis=-1)))
    return SpectralField(q.R, coeffs)


def synthesize(sf, r, theta, phi_ang):
    """Sum of coefficient times normalised eigenfield; shape broadcast(r, theta, phi) + (3,)."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(r > sf.R * (1 + 1e-12)):
        raise ValueError(f"point outside the ball of radius {sf.R}")
    shape = np.broadcast_shapes(r.shape, np.shape(theta), np.shape(phi_ang)) + (3,)
    out = np.zeros(shape)
    for idx, c in sf.items():
        out = out + c * eval_mode(make_mode(idx, sf.R), r, theta, phi_ang)
    return out
