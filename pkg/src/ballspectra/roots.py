"""
Zeros of psi_n (curl spectrum) and psi_n' (grad-div spectrum).

Roots are bracketed by a pi/8 sign scan and polished by bisection followed by
Newton's method. Results are cached per table; the module-level tables back
``rho`` and ``alpha``.
"""
import json
import math
import threading
from dataclasses import dataclass, field

import numpy as np

from .specfun import MAX_DEGREE, psi, psi_prime

__all__ = [
    "MAX_ROOT_INDEX",
    "RootTable",
    "BracketError",
    "rho",
    "alpha",
    "count_sign_changes",
    "load_root_table",
]

MAX_ROOT_INDEX = 256
SCAN_STEP = math.pi / 8


class BracketError(RuntimeError):
    """Sign scan failed to isolate a root; indicates an internal defect."""


def _psi_second(n, z):
    # from the spherical Bessel equation
    return -2.0 / z * psi_prime(n, z) - (1.0 - n * (n + 1) / z**2) * psi(n, z)


_KINDS = {
    "psi-zero": (psi, psi_prime),
    "psi-prime-zero": (psi_prime, _psi_second),
}


def _polish(f, df, a, b, fa):
    # bisection down to width 1e-6
    while b - a > 1e-6:
        c = 0.5 * (a + b)
        fc = float(f(c))
        if fc == 0.0:
            return c
        if (fc < 0) == (fa < 0):
            a, fa = c, fc
        else:
            b = c
    z = 0.5 * (a + b)
    for _ in range(50):
        step = float(f(z)) / float(df(z))
        z_new = z - step
        if not a <= z_new <= b:
            # Newton escaped the bracket; finish by bisection
            while b - a > 4 * np.spacing(b):
                c = 0.5 * (a + b)
                fc = float(f(c))
                if fc == 0.0:
                    return c
                if (fc < 0) == (fa < 0):
                    a, fa = c, fc
                else:
                    b = c
            return 0.5 * (a + b)
        z = z_new
        if abs(step) < 1e-13 * max(1.0, z):
            break
    return z


@dataclass
class RootTable:
    """Cache of positive zeros of psi_n or psi_n'.

    entries maps (n, m) -> z, the m-th positive zero for degree n.
    """

    kind: str
    tolerance: float = 1e-13
    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown root kind {self.kind!r}")
        self._lock = threading.Lock()

    def _scan(self, n, m):
        f, df = _KINDS[self.kind]
        z0 = max(n / 2.0, 0.05)
        z_end = (m + n / 2.0 + 2.0) * math.pi
        grid = np.arange(z0, z_end + SCAN_STEP, SCAN_STEP)
        vals = f(n, grid)
        found = []
        for i in range(len(grid) - 1):
            if vals[i] == 0.0:
                found.append(float(grid[i]))
            elif (vals[i] < 0) != (vals[i + 1] < 0) and vals[i + 1] != 0.0:
                found.append(_polish(lambda z: f(n, z), lambda z: df(n, z),
                                     float(grid[i]), float(grid[i + 1]), float(vals[i])))
            if len(found) >= m:
                break
        if len(found) < m:
            raise BracketError(
                f"{self.kind}: found {len(found)} < {m} roots of degree {n} "
                f"scanning [{z0:.6g}, {z_end:.6g}]")
        return found

    def get(self, n, m):
        if int(n) != n or not 0 <= n <= MAX_DEGREE:
            raise ValueError(f"degree n={n} outside [0, {MAX_DEGREE}]")
        if int(m) != m or not 1 <= m <= MAX_ROOT_INDEX:
            raise ValueError(f"root index m={m} outside [1, {MAX_ROOT_INDEX}]")
        n, m = int(n), int(m)
        hit = self.entries.get((n, m))
        if hit is not None:
            return hit
        found = self._scan(n, m)
        with self._lock:
            for i, z in enumerate(found, start=1):
                # first writer wins so repeated queries stay bit-identical
                self.entries.setdefault((n, i), z)
            return self.entries[(n, m)]

    def roots_below(self, n, z_max):
        """All zeros of degree n in (0, z_max], ascending."""
        out = []
        m = 1
        while m <= MAX_ROOT_INDEX:
            z = self.get(n, m)
            if z > z_max:
                break
            out.append(z)
            m += 1
        return out

    def to_json(self, R=1.0):
        rows = [{"n": n, "m": m, "z": z} for (n, m), z in sorted(self.entries.items())]
        return {"kind": self.kind, "R": R, "entries": rows}

    def dump(self, path, R=1.0):
        with open(path, "w") as fh:
            json.dump(self.to_json(R), fh, indent=1)


def load_root_table(path_or_obj):
    """Inverse of ``RootTable.dump``; returns (table, R)."""
    if isinstance(path_or_obj, dict):
        obj = path_or_obj
    else:
        with open(path_or_obj) as fh:
            obj = json.load(fh)
    table = RootTable(obj["kind"])
    for row in obj["entries"]:
        table.entries[(int(row["n"]), int(row["m"]))] = float(row["z"])
    return table, float(obj.get("R", 1.0))


PSI_ZEROS = RootTable("psi-zero")
PSI_PRIME_ZEROS = RootTable("psi-prime-zero")


def rho(n, m):
    """m-th positive zero of psi_n; the curl eigenvalues are +-rho(n, m) / R."""
    return PSI_ZEROS.get(n, m)


def alpha(n, m):
    """m-th positive zero of psi_n'; the grad-div eigenvalues are -(alpha(n, m) / R)^2."""
    return PSI_PRIME_ZEROS.get(n, m)


def count_sign_changes(f, z_max, step=SCAN_STEP, z0=SCAN_STEP):
    """Sign changes of f sampled on the grid z0, z0 + step, ... <= z_max."""
    grid = np.arange(z0, z_max + 0.5 * step, step)
    grid = grid[grid <= z_max]
    s = np.sign(f(grid))
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))
