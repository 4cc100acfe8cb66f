"""Write the broadband initial table used by configs/broadband.ini.

The displacement has sine coefficients decaying like 0.56^k, so a
half-Galerkin sweep over 4, 8 and 16 modes sees a clear truncation trend.
"""

from pathlib import Path

import numpy as np

from thermo1d import make_grid

grid = make_grid(0.0, 1.0, 401)
x = grid.xhat
u0 = 0.05 * np.sin(np.pi * x) / (1.173 - np.cos(np.pi * x))
u0[0] = u0[-1] = 0.0
theta0 = 2.0 + 0.5 * np.cos(np.pi * x)
table = np.column_stack([grid.nodes, u0, np.zeros(grid.n), theta0])
out = Path(__file__).with_name("configs") / "broadband_n401.txt"
np.savetxt(out, table, fmt="%.17g")
print(f"wrote {out}")
