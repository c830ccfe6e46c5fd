"""Exact-identity suite: gamma algebra, projector decompositions, ghost weight, propagator.

Every check draws its random samples from one seeded generator, so a given
``seed`` always produces the same report.
"""

from dataclasses import dataclass

import numpy as np

from .clifford import GAMMA, bilinear, decompose_bilinear_hyper, decompose_bilinear_radial, proj_hyper, proj_radial
from .grid import Grid, sobolev_norm
from .propagator import DiracGroup, dirac_exponential, dirac_symbol
from .scatter import ghost_identity_check

ALGEBRA_TOL = 1e-10
UNITARITY_TOL = 1e-12
GROUP_TOL = 1e-11
SERIES_TOL = 1e-10
SERIES_TERMS = 40


@dataclass
class CheckResult:
    name: str
    residual: float
    tol: float

    @property
    def passed(self):
        return bool(np.isfinite(self.residual) and self.residual <= self.tol)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<24s} max residual {self.residual:.3e}  (tol {self.tol:.0e})"


def random_spinors(rng, size):
    return rng.standard_normal((2, size)) + 1j * rng.standard_normal((2, size))


def _cone_points(rng, size):
    # (t, x) with |x| < t strictly, covering the whole interior including near-cone points
    t = rng.uniform(0.5, 20.0, size)
    r = t * rng.uniform(0.0, 0.999, size)
    phi = rng.uniform(0.0, 2 * np.pi, size)
    return t, np.stack([r * np.cos(phi), r * np.sin(phi)])


def _scale(P, Q):
    return np.sqrt(bilinear(P, P).real * bilinear(Q, Q).real)


def check_hyper_decomposition(rng, samples, gammas=GAMMA):
    P, Q = random_spinors(rng, samples), random_spinors(rng, samples)
    t, x = _cone_points(rng, samples)
    terms = decompose_bilinear_hyper(P, Q, x, t, gammas=gammas)
    direct = bilinear(P, Q, gammas.g0)
    return float(np.max(np.abs(terms.sum(axis=0) - direct) / _scale(P, Q)))


def check_hyper_plus_plus(rng, samples, gammas=GAMMA):
    P, Q = random_spinors(rng, samples), random_spinors(rng, samples)
    t, x = _cone_points(rng, samples)
    s2 = t ** 2 - (x ** 2).sum(axis=0)
    lhs = bilinear(proj_hyper(P, x, t, +1, gammas), proj_hyper(Q, x, t, +1, gammas), gammas.g0)
    rhs = s2 / t ** 2 * bilinear(P, Q, gammas.g0)
    return float(np.max(np.abs(lhs - rhs) / _scale(P, Q)))


def _plane_points(rng, samples):
    x = rng.uniform(-10.0, 10.0, (2, samples))
    x[:, np.hypot(x[0], x[1]) == 0] = 1.0
    return x


def check_radial_decomposition(rng, samples, gammas=GAMMA):
    P, Q = random_spinors(rng, samples), random_spinors(rng, samples)
    x = _plane_points(rng, samples)
    terms = decompose_bilinear_radial(P, Q, x, gammas)
    direct = bilinear(P, Q, gammas.g0)
    return float(np.max(np.abs(terms.sum(axis=0) - direct) / _scale(P, Q)))


def check_radial_plus_plus(rng, samples, gammas=GAMMA):
    P, Q = random_spinors(rng, samples), random_spinors(rng, samples)
    x = _plane_points(rng, samples)
    lhs = bilinear(proj_radial(P, x, +1, gammas), proj_radial(Q, x, +1, gammas), gammas.g0)
    return float(np.max(np.abs(lhs) / _scale(P, Q)))


def check_ghost_identity(rng, samples, gammas=GAMMA):
    psi = random_spinors(rng, samples)
    x = _plane_points(rng, samples)
    t = rng.uniform(2.0, 50.0, samples)
    return ghost_identity_check(psi, x, t, gammas)


def _random_field(rng, grid):
    # smooth random field: random modes damped like a Gaussian in frequency
    X1, X2 = grid.mesh
    envelope = np.exp(-(X1 ** 2 + X2 ** 2) / 8.0)
    return envelope * (rng.standard_normal((2, grid.n, grid.n)) + 1j * rng.standard_normal((2, grid.n, grid.n)))


def check_unitarity(rng, gammas=GAMMA, grid=None, k_max=3):
    grid = grid or Grid(32, 8.0)
    f = _random_field(rng, grid)
    worst = 0.0
    for mass in (0.0, rng.uniform(0, 1), 1.0):
        group = DiracGroup(grid, mass, gammas)
        t = rng.uniform(-5, 5)
        g = group.apply(f, t)
        for k in range(k_max + 1):
            a, b = sobolev_norm(f, grid, k), sobolev_norm(g, grid, k)
            worst = max(worst, abs(b - a) / a)
    return worst


def check_group_law(rng, gammas=GAMMA, grid=None, pairs=5):
    grid = grid or Grid(32, 8.0)
    f = _random_field(rng, grid)
    norm = np.sqrt(np.sum(np.abs(f) ** 2))
    group = DiracGroup(grid, rng.uniform(0, 1), gammas)
    worst = 0.0
    for _ in range(pairs):
        t, tau = rng.uniform(-3, 3, 2)
        two = group.apply(group.apply(f, tau), t)
        one = group.apply(f, t + tau)
        worst = max(worst, float(np.sqrt(np.sum(np.abs(two - one) ** 2)) / norm))
    return worst


def series_exponential(M, t, terms=SERIES_TERMS):
    """Truncated power series ``sum_k (i t M)^k / k!`` for one 2x2 matrix."""
    A = 1j * t * M
    out = np.eye(2, dtype=complex)
    term = np.eye(2, dtype=complex)
    for k in range(1, terms):
        term = term @ A / k
        out = out + term
    return out


def check_exponential_series(rng, samples, gammas=GAMMA):
    xi = rng.uniform(-3.0, 3.0, (2, samples))
    m = rng.uniform(0.0, 1.0, samples)
    t = rng.uniform(-1.0, 1.0, samples)
    worst = 0.0
    for j in range(samples):
        E = dirac_exponential(xi[:, j], m[j], t[j], gammas)
        S = series_exponential(dirac_symbol(xi[0, j], xi[1, j], m[j], gammas), t[j])
        worst = max(worst, float(np.max(np.abs(E - S))))
    return worst


def run_algebra_suite(seed=0, samples=2000, gammas=GAMMA):
    """Run every exact-identity check; returns a list of :class:`CheckResult`."""
    rng = np.random.default_rng(seed)
    return [
        CheckResult("clifford_relations", gammas.clifford_residual(), ALGEBRA_TOL),
        CheckResult("adjoint_relations", gammas.adjoint_residual(), ALGEBRA_TOL),
        CheckResult("hyper_decomposition", check_hyper_decomposition(rng, samples, gammas), ALGEBRA_TOL),
        CheckResult("hyper_plus_plus", check_hyper_plus_plus(rng, samples, gammas), ALGEBRA_TOL),
        CheckResult("radial_decomposition", check_radial_decomposition(rng, samples, gammas), ALGEBRA_TOL),
        CheckResult("radial_plus_plus", check_radial_plus_plus(rng, samples, gammas), ALGEBRA_TOL),
        CheckResult("ghost_identity", check_ghost_identity(rng, samples, gammas), ALGEBRA_TOL),
        CheckResult("propagator_unitarity", check_unitarity(rng, gammas), UNITARITY_TOL),
        CheckResult("propagator_group_law", check_group_law(rng, gammas), GROUP_TOL),
        CheckResult("exponential_vs_series", check_exponential_series(rng, samples, gammas), SERIES_TOL),
    ]
