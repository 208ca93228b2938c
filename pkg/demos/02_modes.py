"""
Eigenfields checked by finite differences.

Each curl mode u satisfies rot u = lam u and div u = 0 inside the ball and
u . n = 0 on the sphere. Each grad-div mode v is a gradient with
grad div v = -nu^2 v. The derivatives below are taken numerically in
Cartesian coordinates, independent of the analytic formulas.
"""
import math

import numpy as np

from ballspectra import fd
from ballspectra.modes import eval_mode, make_mode, parse_mode

rng = np.random.default_rng(1)
pts = fd.random_interior_points(rng, 20)

print("mode        eigenvalue   |rot u - lam u|/|lam u|   max|div u|")
for text in ["1,1,0,+", "2,1,-1,-", "3,2,2,+"]:
    md = make_mode(parse_mode(text))
    u = fd.cartesian_field(md)(pts)
    res = np.linalg.norm(fd.curl(md, pts) - md.eigenvalue * u) / np.linalg.norm(md.eigenvalue * u)
    print(f"{text:10s}  {md.eigenvalue:+10.5f}  {res:24.2e}  {np.max(np.abs(fd.div(md, pts))):10.2e}")

print("\nmode        eigenvalue   |grad div v - e v|/|e v|   max|rot v|")
for text in ["0,1,0,g", "1,1,1,g", "2,2,0,g"]:
    md = make_mode(parse_mode(text))
    v = fd.cartesian_field(md)(pts)
    res = np.linalg.norm(fd.grad_div(md, pts) - md.eigenvalue * v) / np.linalg.norm(md.eigenvalue * v)
    print(f"{text:10s}  {md.eigenvalue:+10.4f}  {res:24.2e}  {np.max(np.abs(fd.curl(md, pts))):10.2e}")

# zero normal trace on the sphere
th = np.linspace(0.05, math.pi - 0.05, 9)
for text in ["1,1,0,+", "2,1,-1,-", "1,1,1,g"]:
    u = eval_mode(make_mode(parse_mode(text)), 1.0, th, 0.7)
    print(f"max |u_r| on the sphere for {text}: {np.max(np.abs(u[..., 0])):.1e}")
