"""
Streamlines of the lowest vortex.

The field 1,1,0,+ is axisymmetric. A particle on the axis travels from the
south pole to the north pole; off the axis it circles the axis while
winding around a vortex ring, staying away from the sphere. The traces are
written as legacy VTK for ParaView and as CSV.
"""
import os
import time

import numpy as np

from ballspectra import fieldio, make_mode
from ballspectra.modes import ModeIndex

out_dir = os.environ.get("BALLSPECTRA_OUT_DIR", ".")
md = make_mode(ModeIndex("curl+", 1, 1, 0))

t0 = time.perf_counter()
up = fieldio.trace_streamline(md, (0.0, 0.0, -0.5), max_steps=100000)
down = fieldio.trace_streamline(md, (0.0, 0.0, -0.5), max_steps=100000, direction=-1)
print(f"axis seed: forward reaches z = {up.points[-1, 2]:.5f} ({up.termination}), "
      f"backward reaches z = {down.points[-1, 2]:.5f} ({down.termination})")

off = fieldio.trace_streamline(md, (0.5, 0.0, 0.1), max_steps=100000)
r = np.linalg.norm(off.points, axis=1)
rho_cyl = np.hypot(off.points[:, 0], off.points[:, 1])
turns = np.sum(np.abs(np.diff(np.unwrap(np.arctan2(off.points[:, 1], off.points[:, 0]))))) / (2 * np.pi)
print(f"off-axis seed: {len(off) - 1} steps, radius in [{r.min():.3f}, {r.max():.3f}], "
      f"cylindrical radius in [{rho_cyl.min():.3f}, {rho_cyl.max():.3f}], {turns:.1f} turns about the axis")
print(f"traced in {time.perf_counter() - t0:.1f} s")

for name, sl in [("axis_up", up), ("off_axis", off)]:
    path = os.path.join(out_dir, f"{name}.vtk")
    fieldio.export(sl, path)
    print("wrote", path)
fieldio.export(fieldio.sample(md, (16, 17, 32)), os.path.join(out_dir, "mode_110.vtk"))
print("wrote", os.path.join(out_dir, "mode_110.vtk"))
