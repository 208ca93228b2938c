"""
The spectrum of rot and grad div on the unit ball.

Curl eigenvalues are the zeros rho_{n,m} of the spherical Bessel function
psi_n, each carried by 2n+1 fields per sign. Grad-div eigenvalues are
-alpha_{n,m}^2 with alpha the zeros of psi_n'. Since psi_0' = -psi_1, the
radial grad-div wavenumbers for n = 0 coincide with the curl ones for n = 1.
"""
import math

from ballspectra import enumerate_modes, rho, alpha
from ballspectra.modes import Family

print("lowest curl eigenvalue rho_11 =", rho(1, 1))
print("rho_0m / pi for m = 1..5:", [round(rho(0, m) / math.pi, 12) for m in range(1, 6)])
print("alpha_0m - rho_1m:", [alpha(0, m) - rho(1, m) for m in range(1, 6)])

print("\nfirst eigenvalue groups of curl+ (value, n, m, multiplicity):")
modes = enumerate_modes({Family.CURL_PLUS}, max_abs=10.0)
groups = {}
for md in modes:
    groups.setdefault((md.index.n, md.index.m), []).append(md.eigenvalue)
for (n, m), vals in groups.items():
    print(f"  {vals[0]:10.6f}  n={n} m={m}  x{len(vals)}")

# Weyl growth: the counting function grows like the cube of the bound
for L in (10, 20, 40):
    count = len(enumerate_modes({Family.CURL_PLUS}, max_abs=L))
    print(f"N(|lambda| <= {L:2d}) = {count:5d},  N / L^3 = {count / L**3:.4f}")
