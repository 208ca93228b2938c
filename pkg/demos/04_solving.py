"""
Solving rot u + lam u = f and the Fredholm alternative.

Off the spectrum the solve is a coefficient-wise division. When -lam is an
eigenvalue of rot, the system is solvable only for right sides orthogonal
to the resonant eigenspace; the minimal solution is returned together
with a basis of that eigenspace.
"""
from ballspectra import NotSolvable, SpectralField, rho, solve_problem1, solve_problem3
from ballspectra.modes import ModeIndex
from ballspectra.solve import residual_check

f = SpectralField(1.0, {ModeIndex("curl+", 1, 1, 0): 1.0,
                        ModeIndex("curl-", 2, 1, 0): 0.5,
                        ModeIndex("graddiv", 1, 1, 1): 0.2})
lam = 1.0
u = solve_problem1(f, lam).solution
coef, fd_res = residual_check(u, f, lam, 1)
print("problem 1, lam = 1")
print("  u coefficient on 1,1,0,+ :", u[ModeIndex("curl+", 1, 1, 0)], " expected", 1 / (1 + rho(1, 1)))
print(f"  coefficient residual {coef:.1e}, finite-difference residual {fd_res:.1e}")

u3 = solve_problem3(f, lam).solution
print(f"problem 3 finite-difference residual {residual_check(u3, f, lam, 3)[1]:.1e}")

# resonance: lam = rho_21 hits the curl- group (2,1)
lam = rho(2, 1)
print(f"\nlam = rho_21 = {lam:.6f}")
try:
    solve_problem1(f, lam)
except NotSolvable as exc:
    print("  rejected:", exc)

g = SpectralField(1.0, {ModeIndex("curl+", 1, 1, 0): 1.0})
rep = solve_problem1(g, lam)
print("  orthogonal right side accepted, kernel basis:", [str(i) for i in rep.kernel_basis])
