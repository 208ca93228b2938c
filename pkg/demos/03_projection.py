"""
Projection of a sampled field onto the eigenbasis.

A field given only by samples is expanded in the orthonormal modes by
tensor-product quadrature; the Gram matrix shows the basis is orthonormal
at the chosen order, and a known combination is recovered.
"""
import numpy as np

from ballspectra import SpectralField, build_quadrature, enumerate_modes, project
from ballspectra.modes import ModeIndex
from ballspectra.quad import default_orders, gram_matrix

modes = enumerate_modes(count=20)
orders = default_orders(max(m.index.n for m in modes), max(m.index.m for m in modes))
q = build_quadrature(*orders)
G = gram_matrix(modes, q)
print(f"{len(modes)} modes, quadrature {orders}, "
      f"max |G - I| = {np.max(np.abs(G - np.eye(len(modes)))):.1e}")

truth = SpectralField(1.0, {ModeIndex("curl+", 1, 1, 0): 1.0,
                            ModeIndex("curl-", 2, 1, 1): -0.5,
                            ModeIndex("graddiv", 1, 1, 0): 0.25})


def sampled(r, theta, phi):
    # stands in for measured or simulated data
    return truth(r, theta, phi)


coeffs = project(sampled, modes, q)
print("recovered coefficients above 1e-10:")
for idx, c in coeffs.items():
    if abs(c) > 1e-10:
        print(f"  {str(idx):10s} {c:+.12f}")
print("error against the truth:", (coeffs - truth).norm())
