"""
Scalar special functions behind the ball eigenfields.

``psi`` is the spherical Bessel function j_n written through Rayleigh's
formula, ``phi`` the complex radial integral that carries the tangential
part of a curl eigenfield, ``ylm`` real orthonormal spherical harmonics and
``h_op_ylm`` / ``k_op`` the two angular operators

    H v = sin(theta)^-1 d_phi v + i d_theta v
    K w = sin(theta)^-1 (d_theta sin(theta) + i d_phi) w

All functions accept numpy arrays and broadcast.
"""
import math

import numpy as np

__all__ = [
    "MAX_DEGREE",
    "psi",
    "psi_prime",
    "psi_scalar",
    "psi_signed",
    "psi_prime_signed",
    "phi",
    "phi_closed",
    "ylm",
    "ylm_derivatives",
    "h_op_ylm",
    "k_op",
]

MAX_DEGREE = 64

# Miller recurrence rescaling threshold.
_BIG = 1e200


def _check_degree(n, lowest=0):
    if int(n) != n or n < lowest or n > MAX_DEGREE:
        raise ValueError(f"degree n={n} outside supported range [{lowest}, {MAX_DEGREE}]")
    return int(n)


def _check_finite(z):
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise ValueError("non-finite argument")
    return z


def _psi_upward(n, z):
    # stable for z >= n
    j0 = np.sin(z) / z
    if n == 0:
        return j0
    j1 = np.sin(z) / z**2 - np.cos(z) / z
    for k in range(1, n):
        j0, j1 = j1, (2 * k + 1) / z * j1 - j0
    return j1


def _psi_miller(n, z):
    """Downward recurrence normalised against whichever of j0, j1 is larger."""
    start = n + 20 + int(math.sqrt(60.0 * (n + 1)))
    start = max(start, int(np.max(z)) + 20)
    upper = np.zeros_like(z)
    cur = np.full_like(z, 1e-300)
    keep = np.zeros_like(z)
    j1_trial = np.zeros_like(z)
    for k in range(start, 0, -1):
        # cur holds j_k, upper holds j_{k+1}
        lower = (2 * k + 1) / z * cur - upper
        upper, cur = cur, lower
        if k - 1 == n:
            keep = cur.copy()
        if k - 1 == 1:
            j1_trial = cur.copy()
        big = np.abs(cur) > _BIG
        if np.any(big):
            upper = np.where(big, upper / _BIG, upper)
            keep = np.where(big, keep / _BIG, keep)
            j1_trial = np.where(big, j1_trial / _BIG, j1_trial)
            cur = np.where(big, cur / _BIG, cur)
    if n == 0:
        keep = cur
    j0_true = np.sin(z) / z
    j1_true = np.sin(z) / z**2 - np.cos(z) / z
    # for tiny z the closed form of j1 cancels; use its series there
    small = z < 1e-3
    if np.any(small):
        zs = z[small]
        j1_true = j1_true.copy()
        j1_true[small] = zs / 3.0 * (1.0 - zs**2 / 10.0 + zs**4 / 280.0)
    use_j0 = np.abs(j0_true) >= np.abs(j1_true)
    with np.errstate(divide="ignore", invalid="ignore"):
        # the branch not selected may divide by zero
        scale = np.where(use_j0, j0_true / cur, j1_true / np.where(j1_trial == 0.0, 1.0, j1_trial))
    return keep * scale


def psi_scalar(n, z):
    """(psi_n(z), psi_n'(z)) for one float z > 0, in plain Python.

    Same recurrences as :func:`psi` without array overhead; meant for
    inner loops such as streamline integration.
    """
    s, c = math.sin(z), math.cos(z)
    j0 = s / z
    j1 = s / (z * z) - c / z if z >= 1e-3 else z / 3.0 * (1.0 - z * z / 10.0 + z**4 / 280.0)
    if n == 0:
        return j0, -j1
    if z >= n or n == 1:
        lo, hi = j0, j1
        for k in range(1, n):
            lo, hi = hi, (2 * k + 1) / z * hi - lo
        return hi, lo - (n + 1) / z * hi
    start = max(n + 20 + int(math.sqrt(60.0 * (n + 1))), int(z) + 20)
    upper, cur = 0.0, 1e-300
    keep_n = keep_nm1 = trial1 = 0.0
    for k in range(start, 0, -1):
        upper, cur = cur, (2 * k + 1) / z * cur - upper
        if k - 1 == n:
            keep_n = cur
        elif k - 1 == n - 1:
            keep_nm1 = cur
        if k - 1 == 1:
            trial1 = cur
        if abs(cur) > _BIG:
            upper /= _BIG
            cur /= _BIG
            keep_n /= _BIG
            keep_nm1 /= _BIG
            trial1 /= _BIG
    scale = j0 / cur if abs(j0) >= abs(j1) else j1 / trial1
    jn, jnm1 = keep_n * scale, keep_nm1 * scale
    return jn, jnm1 - (n + 1) / z * jn


def psi(n, z):
    """Spherical Bessel function psi_n(z) = j_n(z) for z > 0.

    Upward recurrence where z >= n, Miller's downward recurrence otherwise.
    """
    n = _check_degree(n)
    z = _check_finite(z)
    if np.any(z <= 0):
        raise ValueError("psi requires z > 0")
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.empty_like(z)
    up = z >= n
    if np.any(up):
        out[up] = _psi_upward(n, z[up])
    if np.any(~up):
        out[~up] = _psi_miller(n, z[~up])
    return out[0] if scalar else out


def psi_prime(n, z):
    """Derivative d psi_n / dz for z > 0."""
    n = _check_degree(n)
    z = _check_finite(z)
    if np.any(z <= 0):
        raise ValueError("psi_prime requires z > 0")
    if n == 0:
        return (z * np.cos(z) - np.sin(z)) / z**2
    return psi(n - 1, z) - (n + 1) / z * psi(n, z)


def _double_factorial_odd(n):
    # (2n+1)!!
    return float(np.prod(np.arange(1, 2 * n + 2, 2, dtype=float)))


def psi_signed(n, x):
    """psi_n on the whole real line, including 0, via parity psi_n(-x) = (-1)^n psi_n(x)."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    out = np.zeros_like(ax)
    pos = ax > 0
    if np.any(pos):
        out[pos] = psi(n, ax[pos])
    if n == 0:
        out[~pos] = 1.0
    return out * np.where(x < 0, (-1.0) ** n, 1.0)


def psi_prime_signed(n, x):
    """psi_n' on the whole real line (an even function when n is odd)."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    out = np.zeros_like(ax)
    pos = ax > 0
    if np.any(pos):
        out[pos] = psi_prime(n, ax[pos])
    if n == 1:
        out[~pos] = 1.0 / 3.0
    return out * np.where(x < 0, (-1.0) ** (n + 1), 1.0)


# ---------------------------------------------------------------------------
# The radial integral Phi_n

# 16-point Gauss-Legendre rule on [0, 1].
_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


def _phi_panels(n, x, edges):
    # integral over s in [0, x] of exp(i(x - s)) psi_n(s) / s, on the given panel edges
    a = edges[:-1, None]
    h = (edges[1:] - edges[:-1])[:, None]
    s = a + h * _GL_X[None, :]
    f = np.exp(1j * (x - s)) * psi(n, s) / s
    return np.sum(h * _GL_W[None, :] * f)


def _phi_dyadic(n, x, levels, panels_per_unit):
    # dyadic grading on [0, min(x, 1)] followed by uniform panels up to x
    knee = min(x, 1.0)
    first = knee * 2.0 ** -np.arange(levels, -1, -1)
    count = max(1, int(math.ceil((x - knee) * panels_per_unit)))
    rest = np.linspace(knee, x, count + 1)
    edges = np.unique(np.concatenate([[0.0], first, rest]))
    return _phi_panels(n, x, edges)


def phi(n, lam, r, tol=1e-12):
    """Phi_n(lam r) = int_0^r exp(i lam (r - t)) psi_n(lam t) t^-1 dt.

    Evaluated by composite 16-point Gauss-Legendre panels with dyadic
    grading toward t = 0; panels are refined until successive results differ
    by less than ``tol``. Returns a Python complex.
    """
    n = _check_degree(n, lowest=1)
    if lam == 0 or not math.isfinite(lam):
        raise ValueError("phi requires a finite nonzero lam")
    if r < 0 or not math.isfinite(r):
        raise ValueError("phi requires r >= 0")
    if r == 0:
        return 0j
    x = abs(lam) * r
    levels, per_unit = 8, 1.0
    prev = _phi_dyadic(n, x, levels, per_unit)
    for _ in range(12):
        levels += 4
        per_unit *= 2.0
        cur = _phi_dyadic(n, x, levels, per_unit)
        if abs(cur - prev) < tol:
            prev = cur
            break
        prev = cur
    else:
        raise RuntimeError(f"phi({n}, {lam}, {r}) did not converge")
    # negative lam: Phi_n(-x) = (-1)^n conj(Phi_n(x))
    if lam < 0:
        prev = (-1) ** n * prev.conjugate()
    return complex(prev)


def phi_closed(n, x):
    """Closed form of Phi_n at argument x = lam r.

    Phi_n(x) = ((x psi_n)'(x) + i x psi_n(x)) / (n (n + 1)), which follows from
    integrating the first-order radial equation satisfied by r w. Vectorised.
    """
    n = _check_degree(n, lowest=1)
    x = np.asarray(x, dtype=float)
    j = psi_signed(n, x)
    dj = psi_prime_signed(n, x)
    return (j + x * dj + 1j * x * j) / (n * (n + 1))


def phi_over_x(n, x):
    """Phi_n(x) / x with its finite limit at x = 0; vectorised."""
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape, dtype=complex)
    small = np.abs(x) < 1e-6
    big = ~small
    if np.any(big):
        out[big] = phi_closed(n, x[big]) / x[big]
    if np.any(small):
        xs = x[small]
        d = _double_factorial_odd(n)
        # (x psi_n)'/x and psi_n from the leading terms of the ascending series
        re = ((n + 1) * xs ** (n - 1) - (n + 3) * xs ** (n + 1) / (2 * (2 * n + 3))) / d
        im = xs**n / d
        out[small] = (re + 1j * im) / (n * (n + 1))
    return out


def psi_over_x(n, x):
    """psi_n(x) / x with its finite limit at x = 0; vectorised."""
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape, dtype=float)
    small = np.abs(x) < 1e-6
    big = ~small
    if np.any(big):
        out[big] = psi_signed(n, x[big]) / x[big]
    if np.any(small):
        xs = x[small]
        if n == 0:
            # psi_0(x)/x is unbounded at 0; callers never request it there
            out[small] = np.inf
        else:
            out[small] = xs ** (n - 1) * (1.0 - xs**2 / (2 * (2 * n + 3))) / _double_factorial_odd(n)
    return out


# ---------------------------------------------------------------------------
# Real spherical harmonics

def _legendre_q(n, m, t):
    """Q and dQ/dt such that the 4pi-normalised P_n^m(cos theta) = sin(theta)^m Q(t).

    Column recurrence in n for fixed m, with the derivative carried alongside.
    """
    # plain arithmetic so Python floats stay floats (fast scalar path)
    zero = t * 0.0
    q_mm = zero + 1.0
    if m >= 1:
        q_mm = q_mm * math.sqrt(3.0)
    for i in range(2, m + 1):
        q_mm = q_mm * math.sqrt((2 * i + 1) / (2 * i))
    if n == m:
        return q_mm, zero
    q_prev, d_prev = q_mm, zero
    c = math.sqrt(2 * m + 3)
    q_cur, d_cur = c * t * q_mm, c * q_mm
    for k in range(m + 2, n + 1):
        a = math.sqrt((2 * k - 1) * (2 * k + 1) / ((k - m) * (k + m)))
        b = math.sqrt((2 * k + 1) * (k + m - 1) * (k - m - 1) / ((k - m) * (k + m) * (2 * k - 3)))
        q_new = a * t * q_cur - b * q_prev
        d_new = a * (q_cur + t * d_cur) - b * d_prev
        q_prev, d_prev, q_cur, d_cur = q_cur, d_cur, q_new, d_new
    return q_cur, d_cur


def _check_order(n, k):
    n = _check_degree(n)
    if int(k) != k or abs(k) > n:
        raise ValueError(f"order k={k} must satisfy |k| <= n={n}")
    return n, int(k)


_INV_SQRT_4PI = 1.0 / math.sqrt(4.0 * math.pi)


def ylm_derivatives(n, k, theta, phi_ang):
    """Return (Y, dY/dtheta, sin(theta)^-1 dY/dphi) for the real orthonormal harmonic.

    Convention: Y_n^0 = P_n(cos theta) normalised, Y_n^k = P_n^k cos(k phi) for
    k > 0 and P_n^|k| sin(|k| phi) for k < 0, no Condon-Shortley phase. The
    last component uses the closed form sin^(m-1) Q, so it is finite at the
    poles.
    """
    n, k = _check_order(n, k)
    theta = np.asarray(theta, dtype=float)
    phi_ang = np.asarray(phi_ang, dtype=float)
    m = abs(k)
    t = np.cos(theta)
    u = np.sin(theta)
    q, dq = _legendre_q(n, m, t)
    p = u**m * q
    if m == 0:
        dp = -u * dq
        p_over_u = np.zeros_like(p)
    else:
        um1 = u ** (m - 1)
        dp = um1 * (m * t * q - u * u * dq)
        p_over_u = um1 * q
    if k > 0:
        g, dg = np.cos(k * phi_ang), -k * np.sin(k * phi_ang)
    elif k < 0:
        g, dg = np.sin(m * phi_ang), m * np.cos(m * phi_ang)
    else:
        g, dg = np.ones_like(phi_ang), np.zeros_like(phi_ang)
    y = _INV_SQRT_4PI * p * g
    y_theta = _INV_SQRT_4PI * dp * g
    y_phi_over_sin = _INV_SQRT_4PI * p_over_u * dg
    return y, y_theta, y_phi_over_sin


def ylm(n, k, theta, phi_ang):
    """Real orthonormal spherical harmonic Y_n^k(theta, phi)."""
    return ylm_derivatives(n, k, theta, phi_ang)[0]


def h_op_ylm(n, k, theta, phi_ang):
    """(H Y_n^k)(theta, phi) = sin(theta)^-1 dY/dphi + i dY/dtheta, analytically."""
    _, y_theta, y_phi_over_sin = ylm_derivatives(n, k, theta, phi_ang)
    return y_phi_over_sin + 1j * y_theta


def k_op(w, theta, phi_ang, step=1e-5):
    """Apply K w = sin(theta)^-1 (d_theta (sin(theta) w) + i d_phi w) by central differences.

    ``w`` is a callable (theta, phi) -> complex. Only used for verification.
    """
    theta = float(theta)
    s = math.sin(theta)
    if theta - step <= 0.0 or theta + step >= math.pi or abs(s) < 1e3 * step:
        raise ValueError(f"theta={theta} too close to a pole for step={step}")
    d_theta = (math.sin(theta + step) * w(theta + step, phi_ang)
               - math.sin(theta - step) * w(theta - step, phi_ang)) / (2 * step)
    d_phi = (w(theta, phi_ang + step) - w(theta, phi_ang - step)) / (2 * step)
    return complex((d_theta + 1j * d_phi) / s)
