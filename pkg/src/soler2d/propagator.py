"""Fourier-multiplier groups: the linear Dirac propagator and the free wave group.

The Dirac symbol ``M(xi) = -g0 g^a xi_a + m g0`` is Hermitian with
``M^2 = lambda^2 I``, ``lambda = sqrt(|xi|^2 + m^2)``, so its exponential has
the closed form ``cos(lambda t) I + i sin(lambda t)/lambda M``.
"""

from functools import lru_cache

import numpy as np

from .clifford import GAMMA
from .grid import ScalarSpinorPair, SpinorField, fft2, ifft2

LAMBDA_CUTOFF = 1e-14


def dirac_symbol(xi1, xi2, m, gammas=GAMMA):
    """``M(xi)`` with shape ``(2, 2) + shape(xi)``."""
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    b1, b2 = gammas.boosts
    ex = (Ellipsis,) + (None,) * xi1.ndim
    return -(b1[ex] * xi1 + b2[ex] * xi2) + m * gammas.g0[ex] * np.ones_like(xi1)


def _sinc_t(lam, t):
    # sin(lam t) / lam with the lam -> 0 limit t
    small = lam < LAMBDA_CUTOFF
    safe = np.where(small, 1.0, lam)
    return np.where(small, t, np.sin(lam * t) / safe)


def dirac_exponential(xi, m, t, gammas=GAMMA):
    """``exp(i t M(xi))`` for ``xi`` of shape ``(2, ...)``; unitary for real ``t``."""
    xi = np.asarray(xi, dtype=float)
    if m < 0:
        raise ValueError("mass must be nonnegative")
    M = dirac_symbol(xi[0], xi[1], m, gammas)
    lam = np.sqrt(xi[0] ** 2 + xi[1] ** 2 + m * m)
    E = 1j * _sinc_t(lam, t) * M
    c = np.cos(lam * t)
    E[0, 0] += c
    E[1, 1] += c
    return E


class DiracGroup:
    """The group ``S(t)`` on one grid at one mass, with cached multipliers."""

    def __init__(self, grid, mass, gammas=GAMMA):
        self.grid = grid
        self.mass = float(mass)
        self.gammas = gammas
        self._cache = lru_cache(maxsize=8)(self._multiplier)

    def _multiplier(self, t):
        K1, K2 = self.grid.wavenumbers
        return dirac_exponential(np.stack([K1, K2]), self.mass, t, self.gammas)

    def multiplier(self, t):
        return self._cache(float(t))

    def apply_hat(self, coeffs, t):
        """Apply ``S(t)`` to coefficients in FFT layout."""
        E = self.multiplier(t)
        return np.stack([E[0, 0] * coeffs[0] + E[0, 1] * coeffs[1],
                         E[1, 0] * coeffs[0] + E[1, 1] * coeffs[1]])

    def apply(self, data, t):
        """Apply ``S(t)`` to a ``(2, n, n)`` array."""
        if t == 0:
            return np.array(data, dtype=complex)
        return ifft2(self.apply_hat(fft2(data), t))


def propagate_dirac(field, t, group=None):
    """Return ``S(t) field`` labelled at time ``field.t + t``."""
    if group is None:
        group = DiracGroup(field.grid, field.mass)
    return SpinorField(field.grid, field.t + t, field.mass, group.apply(field.data, t))


class WaveGroup:
    """Free wave group for ``(u, u_t)`` componentwise, ``-u_tt + Laplace u = 0``."""

    def __init__(self, grid):
        self.grid = grid
        self._cache = lru_cache(maxsize=8)(self._multipliers)

    def _multipliers(self, t):
        k = self.grid.abs_xi
        c = np.cos(k * t)
        return c, _sinc_t(k, t), -k * np.sin(k * t)

    def apply_hat(self, u_hat, v_hat, t):
        c, sk, ks = self._cache(float(t))
        return c * u_hat + sk * v_hat, ks * u_hat + c * v_hat

    def apply(self, u, v, t):
        if t == 0:
            return np.array(u, dtype=complex), np.array(v, dtype=complex)
        u_hat, v_hat = self.apply_hat(fft2(u), fft2(v), t)
        return ifft2(u_hat), ifft2(v_hat)

    def energy(self, u, v):
        """Discrete conserved energy ``sum |xi|^2 |u_hat|^2 + |v_hat|^2`` (unnormalized)."""
        return float(np.sum(self.grid.abs_xi ** 2 * np.abs(fft2(u)) ** 2 + np.abs(fft2(v)) ** 2))


def propagate_wave(pair, t, grid=None, group=None):
    """Evolve a :class:`ScalarSpinorPair` by the homogeneous wave group for time ``t``."""
    grid = grid or pair.grid
    if group is None:
        group = WaveGroup(grid)
    u, v = group.apply(pair.Psi, pair.Psi_t, t)
    return ScalarSpinorPair(u, v, pair.t + t, grid)
