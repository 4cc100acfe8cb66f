"""Temperature positivity and exponential control of L across a small run suite.

For each preset and coupling sign the script reports the coldest sampled
temperature next to the certificate exp(-max|log theta|), which can never
exceed it, and the exponent C2 of the tightest bound L(t) <= C1 exp(C2 t)
fitted to the run.  Without coupling the heat equation alone drives L, and
C2 comes out non-positive.
"""

from thermo1d import RunSpec, run
from thermo1d.harness import exp_bound_fit

PRESETS = {
    "rest": {"theta": 1.0},
    "sine-mode": {"k": 1, "A": 0.1, "theta": 1.0},
    "bump": {"c": 2.0, "A": 0.5},
}

print(f"{'preset':10s} {'mu':>4s} {'min theta':>10s} {'certificate':>12s} {'C2':>9s}")
for name, params in PRESETS.items():
    for mu in (0.0, 1.0, -1.0):
        traj = run(RunSpec(n=201, T=1.0, mu=mu, preset=name, preset_params=params))
        coldest = min(traj.rows, key=lambda r: r.min_theta)
        fit = exp_bound_fit(traj)
        label = "flat" if fit.degenerate else f"{fit.C2:+.3f}"
        print(f"{name:10s} {mu:4.0f} {coldest.min_theta:10.5f} {coldest.positivity_floor:12.5f} {label:>9s}")
