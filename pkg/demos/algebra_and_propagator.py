"""Exact identities of the gamma matrices and the free Dirac group.

Run with ``python3 demos/algebra_and_propagator.py``. Everything here is exact
algebra, so every printed residual sits at rounding level.
"""

import numpy as np

from soler2d.clifford import GAMMA, METRIC, proj_hyper
from soler2d.grid import Grid, sobolev_norm
from soler2d.propagator import DiracGroup, dirac_exponential, dirac_symbol
from soler2d.verify import series_exponential

# %%
# The representation is g0 = sigma_3, g1 = i sigma_1, g2 = i sigma_2.  The
# anticommutators reproduce the Minkowski metric diag(-1, 1, 1) up to sign.
g0, g1, g2 = GAMMA
print("metric:\n", METRIC)
print("g1 g2 + g2 g1 =\n", g1 @ g2 + g2 @ g1)
print("Clifford residual:", GAMMA.clifford_residual())

# %%
# Inside the light cone the hyperboloidal projector B = (x_a / t) g0 g^a squares
# to (r/t)^2, so applying I - B after I + B multiplies by (s/t)^2.
rng = np.random.default_rng(0)
t, x = 5.0, np.array([[3.0], [1.0]])
s2 = t ** 2 - (x ** 2).sum()
psi = rng.standard_normal((2, 1)) + 1j * rng.standard_normal((2, 1))
plus = proj_hyper(psi, x, t, +1)
print("(I - B)(I + B) psi / psi:", (proj_hyper(plus, x, t, -1) / psi).ravel(), " (s/t)^2 =", s2 / t ** 2)

# %%
# Each Fourier mode evolves by exp(i t M(xi)) with M^2 = |xi|^2 + m^2, so the
# exponential has the closed form cos(lt) + i sin(lt)/l M.  Compare it with a
# 40-term Taylor series.
xi, m = np.array([1.3, -0.7]), 0.5
E = dirac_exponential(xi, m, 2.0)
S = series_exponential(dirac_symbol(xi[0], xi[1], m), 2.0)
print("closed form vs series:", np.max(np.abs(E - S)))
print("unitarity defect:", np.max(np.abs(E.conj().T @ E - np.eye(2))))

# %%
# On the grid the group is unitary in every H^k norm and satisfies the group law.
grid = Grid(64, 8.0)
X1, X2 = grid.mesh
f = np.exp(-(X1 ** 2 + X2 ** 2)) * np.stack([np.ones_like(X1), 1j * X1])
group = DiracGroup(grid, m)
g = group.apply(f, 3.7)
for k in range(4):
    print(f"H^{k} norm before {sobolev_norm(f, grid, k):.12f} after {sobolev_norm(g, grid, k):.12f}")
print("group law defect:", np.max(np.abs(group.apply(group.apply(f, 1.2), 2.5) - g)))
