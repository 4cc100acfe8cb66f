"""How well does the discrete solver respect the two exact balance laws?

A warm bump of temperature, c + A cos(pi x), sits in a bar that is initially
at rest.  Heat flows, the bar starts to vibrate through the thermal stress,
and the vibration feeds back into the temperature.  Two quantities should
behave exactly:

* the total energy  1/2 |v|^2 + 1/2 |u_x|^2 + int theta  is conserved;
* the functional  L = (F + |v_x|^2 + |u_xx|^2) / 2  satisfies
  dL/dt = -D + G, with D the entropy dissipation and G the coupling term.

The first holds to rounding on the grid.  The second is checked by finite
differences in time, so its defect should fall by about four when the grid
and the step are both halved.
"""

import numpy as np

from thermo1d import RunSpec, run

spec = RunSpec(n=201, T=1.0, mu=1.0, preset="bump", preset_params={"c": 2.0, "A": 0.5})

traj = run(spec)
energy = traj.column("E_total")
print(f"status: {traj.status.value}, {len(traj.rows)} samples, dt = {spec.time_steps()[0]:.4g}")
print(f"energy at t=0: {energy[0]:.15f}")
print(f"energy at t=1: {energy[-1]:.15f}")
print(f"relative drift: {abs(energy[-1] - energy[0]) / energy[0]:.2e}\n")

print("t      L          D          G          residual")
for row in traj.rows[:: len(traj.rows) // 8]:
    print(f"{row.t:.3f}  {row.L:.6f}  {row.D:.6f}  {row.G:+.6f}  {row.residual:+.2e}")

print("\nrefinement of the identity defect (interior samples):")
previous = None
for n in (101, 201, 401):
    res = np.array([r.residual for r in run(spec.replace(n=n)).rows])
    worst = np.max(np.abs(res[1:-1]))
    ratio = "" if previous is None else f"  (factor {previous / worst:.2f})"
    print(f"  n = {n:4d}: {worst:.3e}{ratio}")
    previous = worst
