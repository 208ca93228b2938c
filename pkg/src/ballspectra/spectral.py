"""
Operators S (rot) and N_d (grad div) as diagonal maps on eigenbasis
coefficients, their integer powers, and the graded norms built on them.

Curl coefficients carry the W-scale, grad-div coefficients the A-scale.
A W-norm of order m weights the squared coefficients by lam_j^(2m); an
A-norm of order 2k weights them by nu_j^(4k). Negative orders use the same
finite coefficient vectors with negative powers, so the dual-space norm is
an ordinary weighted sum at any truncation.
"""
import math
from dataclasses import dataclass

import numpy as np

from .modes import Family, eigenvalue
from .quad import SpectralField

__all__ = [
    "ScaleOrder",
    "ClassC",
    "ClassReport",
    "apply_power",
    "scale_norm",
    "class_report",
    "solve_poly",
    "inverse_bound_constant",
]

_A_SCALE, _W_SCALE = "A", "W"


@dataclass(frozen=True)
class ScaleOrder:
    """``family`` is "A" (order 2k, even) or "W" (order m); orders may be negative."""

    family: str
    order: int

    def __post_init__(self):
        if self.family not in (_A_SCALE, _W_SCALE):
            raise ValueError(f"scale family must be 'A' or 'W', got {self.family!r}")
        if int(self.order) != self.order:
            raise ValueError("scale order must be an integer")
        if self.family == _A_SCALE and self.order % 2:
            raise ValueError(f"A-scale orders are even, got {self.order}")


@dataclass(frozen=True)
class ClassC:
    """C(2k, m) = A^{2k} + W^m."""

    k: int
    m: int


def _family_set(family):
    if family in ("W", "curl"):
        return {Family.CURL_PLUS, Family.CURL_MINUS}
    if family in ("A", "graddiv"):
        return {Family.GRADDIV}
    return {Family.parse(family)}


def apply_power(sf, family, p):
    """Apply S^p (family "W"/"curl") or N_d^p (family "A"/"graddiv") to the coefficients.

    S multiplies a curl coefficient by its signed eigenvalue +-lam_j and N_d a
    grad-div coefficient by -nu_j^2. Coefficients outside the family pass
    through unchanged, which is how the operator acts on the sum A + W only
    after projection; callers wanting the pure operator restrict first.
    """
    if int(p) != p or p == 0:
        raise ValueError(f"power must be a nonzero integer, got {p}")
    p = int(p)
    fams = _family_set(family)

    def act(idx, c):
        if idx.family not in fams:
            return c
        return eigenvalue(idx, sf.R) ** p * c

    return sf.map(act)


def _weight(idx, R, order):
    e = abs(eigenvalue(idx, R))
    # |-nu^2| = nu^2, so both scales weight by |eigenvalue|^(2 order')
    # with order' = m for W and k for A (order = 2k)
    if idx.family is Family.GRADDIV:
        return e ** (order)
    return e ** (2 * order)


def scale_norm(sf, so):
    """Norm of sf in W^m or A^{2k} (negative orders give the dual norms)."""
    fams = _family_set(so.family)
    total = 0.0
    for idx, c in sf.items():
        if idx.family in fams:
            total += _weight(idx, sf.R, so.order) * c * c
    return math.sqrt(total)


@dataclass
class ClassReport:
    """Truncated-data indicator for membership in C(2k, m).

    Finite coefficient vectors belong to every class; the tail ratios
    (share of weighted mass in the top decile of modes by |eigenvalue|)
    only indicate how the weighted series behaves as truncation grows.
    """

    k: int
    m: int
    a_norm: float
    w_norm: float
    a_tail_ratio: float
    w_tail_ratio: float
    a_count: int
    w_count: int
    note: str = ("diagnostic only: membership is a condition on the infinite series "
                 "and cannot be decided from a finite truncation")


def _tail_ratio(sf, fams, order, modes):
    if modes is None:
        idxs = [i for i in sf.indices() if i.family in fams]
    else:
        idxs = [md.index if hasattr(md, "index") else md for md in modes]
        idxs = [i for i in idxs if i.family in fams]
    if not idxs:
        return 0.0, 0
    idxs.sort(key=lambda i: (abs(eigenvalue(i, sf.R)),) + i.sort_key())
    mass = np.array([_weight(i, sf.R, order) * sf[i] ** 2 for i in idxs])
    total = mass.sum()
    if total == 0.0:
        return 0.0, len(idxs)
    tail = int(math.ceil(0.1 * len(idxs)))
    return float(mass[-tail:].sum() / total), len(idxs)


def class_report(sf, c, modes=None):
    """A-part norm at order 2k, W-part norm at order m, and tail ratios.

    ``modes`` optionally fixes the truncation set the deciles are taken over;
    by default it is the support of ``sf``.
    """
    a_fams, w_fams = _family_set("A"), _family_set("W")
    a_tail, a_count = _tail_ratio(sf, a_fams, 2 * c.k, modes)
    w_tail, w_count = _tail_ratio(sf, w_fams, c.m, modes)
    return ClassReport(
        k=c.k, m=c.m,
        a_norm=scale_norm(sf, ScaleOrder("A", 2 * c.k)),
        w_norm=scale_norm(sf, ScaleOrder("W", c.m)),
        a_tail_ratio=a_tail, w_tail_ratio=w_tail,
        a_count=a_count, w_count=w_count,
    )


def solve_poly(rhs, family, order):
    """Solve rot^{2m} u = v (family "W") or (grad div)^{2k} u = v (family "A").

    Returns S^{-2m} v, resp. N_d^{-2k} v, restricted to the family.
    """
    if int(order) != order or order < 1:
        raise ValueError("order must be a positive integer")
    part = rhs.restrict(_family_set(family))
    return apply_power(part, family, -2 * int(order))


def inverse_bound_constant(modes, family, k):
    """Squared constant of the one-step inverse estimate over a mode set.

    A-scale: c_k^2 = max_j (1 + nu_j^(-2k)), bounding
    ||N_d^-1 f||^2_{A^{2k}} <= c_k^2 ||f||^2_{A^{2(k-1)}}.
    W-scale: C_k^2 = max_j (1 + lam_j^(-2k)), bounding
    ||S^-1 f||^2_{W^{k+1}} <= C_k^2 ||f||^2_{W^k}.
    """
    fams = _family_set(family)
    vals = []
    for md in modes:
        if md.index.family not in fams:
            continue
        if md.index.family is Family.GRADDIV:
            nu = math.sqrt(abs(md.eigenvalue))
        else:
            nu = abs(md.eigenvalue)
        vals.append(1.0 + nu ** (-2 * k))
    if not vals:
        raise ValueError("no modes of the requested family")
    return max(vals)
