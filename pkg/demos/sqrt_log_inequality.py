"""Probing the constant in  int [(sqrt psi)_xx]^2 <= 13/8 int psi [(log psi)_xx]^2.

Random positive cosine series with insulated ends are drawn and the ratio of
the two sides recorded.  Small perturbations of a constant give exactly 1/4;
the question is how far above that larger perturbations can push the ratio.
The sweep never gets near 13/8, which is consistent with the inequality but
says nothing about sharpness.
"""

import numpy as np

from thermo1d import cfhs_check, make_grid
from thermo1d.harness import cfhs_property_sweep

grid = make_grid(0.0, 1.0, 401)
for eps in (1e-3, 0.1, 0.5, 0.9):
    ratio = cfhs_check(1 + eps * np.cos(2 * np.pi * grid.nodes), grid).ratio
    print(f"psi = 1 + {eps:<5g} cos(2 pi x): ratio {ratio:.6f}")

for amplitude in (0.3, 1.0, 5.0):
    rep = cfhs_property_sweep(2000, seed=1, grid=grid, amplitude=amplitude)
    defined = rep.ratios[~np.isnan(rep.ratios)]
    print(f"amplitude {amplitude:3g}: {len(rep.violations)} violations, "
          f"ratio median {np.median(defined):.4f}, max {rep.max_ratio:.4f} (bound {13 / 8})")
