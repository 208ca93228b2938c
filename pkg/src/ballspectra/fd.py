"""
Fourth-order central finite differences in Cartesian coordinates.

Used only to check fields independently of their analytic construction.
A field here is any FieldEvaluator (r, theta, phi) -> (u_r, u_theta, u_phi).
"""
import numpy as np

__all__ = [
    "to_spherical",
    "to_cartesian",
    "spherical_to_cartesian_vec",
    "cartesian_to_spherical_vec",
    "cartesian_field",
    "jacobian",
    "curl",
    "div",
    "grad_div",
    "random_interior_points",
]


def to_spherical(xyz):
    xyz = np.asarray(xyz, dtype=float)
    x, y, z = xyz[..., 0], xyz[..., 1], xyz[..., 2]
    r = np.sqrt(x * x + y * y + z * z)
    theta = np.arctan2(np.sqrt(x * x + y * y), z)
    phi = np.mod(np.arctan2(y, x), 2 * np.pi)
    return r, theta, phi


def to_cartesian(r, theta, phi):
    st = np.sin(theta)
    return np.stack(np.broadcast_arrays(r * st * np.cos(phi), r * st * np.sin(phi),
                                        r * np.cos(theta)), axis=-1)


def _frame(theta, phi):
    st, ct, sp, cp = np.sin(theta), np.cos(theta), np.sin(phi), np.cos(phi)
    e_r = np.stack([st * cp, st * sp, ct], axis=-1)
    e_t = np.stack([ct * cp, ct * sp, -st], axis=-1)
    e_p = np.stack([-sp, cp, np.zeros_like(sp)], axis=-1)
    return e_r, e_t, e_p


def spherical_to_cartesian_vec(u_sph, theta, phi):
    e_r, e_t, e_p = _frame(np.asarray(theta, float), np.asarray(phi, float))
    u = np.asarray(u_sph)
    return u[..., 0:1] * e_r + u[..., 1:2] * e_t + u[..., 2:3] * e_p


def cartesian_to_spherical_vec(u_cart, theta, phi):
    e_r, e_t, e_p = _frame(np.asarray(theta, float), np.asarray(phi, float))
    u = np.asarray(u_cart)
    return np.stack([np.sum(u * e, axis=-1) for e in (e_r, e_t, e_p)], axis=-1)


def cartesian_field(field):
    """Wrap a spherical FieldEvaluator as xyz (..., 3) -> Cartesian vector (..., 3)."""
    def f(xyz):
        r, theta, phi = to_spherical(xyz)
        return spherical_to_cartesian_vec(field(r, theta, phi), theta, phi)
    return f


_OFFSETS = (2.0, 1.0, -1.0, -2.0)
_WEIGHTS = (-1.0, 8.0, -8.0, 1.0)


def jacobian(f, xyz, h):
    """J[..., i, j] = d f_i / d x_j for a Cartesian map f."""
    xyz = np.asarray(xyz, dtype=float)
    cols = []
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        acc = 0.0
        for off, wt in zip(_OFFSETS, _WEIGHTS):
            acc = acc + wt * f(xyz + off * e)
        cols.append(acc / (12.0 * h))
    return np.stack(cols, axis=-1)


def _curl_from_jac(J):
    return np.stack([J[..., 2, 1] - J[..., 1, 2],
                     J[..., 0, 2] - J[..., 2, 0],
                     J[..., 1, 0] - J[..., 0, 1]], axis=-1)


def curl(field, xyz, h=1e-3):
    """Cartesian curl of a spherical FieldEvaluator at Cartesian points."""
    return _curl_from_jac(jacobian(cartesian_field(field), xyz, h))


def div(field, xyz, h=1e-3):
    J = jacobian(cartesian_field(field), xyz, h)
    return J[..., 0, 0] + J[..., 1, 1] + J[..., 2, 2]


def grad_div(field, xyz, h=2e-3):
    """Cartesian grad(div u), nesting the fourth-order stencil."""
    f = cartesian_field(field)

    def divergence(p):
        J = jacobian(f, p, h)
        return (J[..., 0, 0] + J[..., 1, 1] + J[..., 2, 2])[..., None]

    return jacobian(divergence, xyz, h)[..., 0, :]


def random_interior_points(rng, count, R=1.0, r_max=0.9, r_min=0.05):
    """Uniform-in-volume points with r in [r_min R, r_max R]."""
    u = rng.uniform((r_min) ** 3, (r_max) ** 3, size=count)
    r = R * np.cbrt(u)
    cos_t = rng.uniform(-1.0, 1.0, size=count)
    phi = rng.uniform(0.0, 2 * np.pi, size=count)
    return to_cartesian(r, np.arccos(cos_t), phi)
