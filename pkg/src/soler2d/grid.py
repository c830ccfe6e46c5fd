"""Uniform periodic grid, Fourier analysis, quadrature and initial data.

Modal coefficients approximate the continuous Fourier transform::

    c(xi) = dx^2 * sum_x f(x) exp(-i xi . x)

so that ``f(x) = (2L)^{-2} sum_xi c(xi) exp(i xi . x)``. With this scaling the
discrete Sobolev norm reads ``||f||_{H^k}^2 = (2L)^{-2} sum <xi>^{2k} |c|^2`` and
coincides with the rectangle-rule L2 norm at ``k = 0``.
"""

import os
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from .errors import ConfigError

#: Initial time of every evolution.
T0 = 2.0

#: Coarsest spacing accepted by :func:`make_initial_data` (4 points per unit radius).
MAX_BUMP_DX = 0.5


def fft_workers():
    """Thread count for FFTs, capped by the ``SOLER2D_THREADS`` environment variable."""
    try:
        return max(1, int(os.environ.get("SOLER2D_THREADS", "1")))
    except ValueError:
        return 1


def fft2(a):
    return sfft.fft2(a, axes=(-2, -1), workers=fft_workers())


def ifft2(a):
    return sfft.ifft2(a, axes=(-2, -1), workers=fft_workers())


@dataclass(frozen=True)
class Grid:
    """Square periodic grid on ``[-L, L)^2`` with ``n`` points per axis."""

    n: int
    L: float

    def __post_init__(self):
        n = self.n
        if not isinstance(n, (int, np.integer)) or n < 16 or n & (n - 1):
            raise ConfigError(f"grid.n must be a power of two >= 16, got {n!r}")
        if not self.L > 0:
            raise ConfigError(f"grid.L must be positive, got {self.L!r}")

    @property
    def dx(self):
        return 2.0 * self.L / self.n

    @cached_property
    def x(self):
        """1D node coordinates ``-L + j dx``."""
        return -self.L + self.dx * np.arange(self.n)

    @cached_property
    def mesh(self):
        """``(X1, X2)`` with ``indexing='ij'`` (first array axis is ``x_1``)."""
        return np.meshgrid(self.x, self.x, indexing="ij")

    @cached_property
    def r(self):
        X1, X2 = self.mesh
        return np.hypot(X1, X2)

    @cached_property
    def xi(self):
        """1D wavenumbers in FFT order; the set is ``(pi/L) * {-n/2, ..., n/2-1}``."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

    @cached_property
    def wavenumbers(self):
        """``(K1, K2)`` on the modal grid, FFT order."""
        return np.meshgrid(self.xi, self.xi, indexing="ij")

    @cached_property
    def abs_xi(self):
        K1, K2 = self.wavenumbers
        return np.hypot(K1, K2)

    @cached_property
    def _phase(self):
        # exp(-i xi . x_0) with x_0 = (-L, -L); shifts FFT output to continuous-FT phase
        K1, K2 = self.wavenumbers
        return np.exp(1j * (K1 + K2) * self.L)

    @property
    def area(self):
        return (2.0 * self.L) ** 2

    def zeros(self, components=2):
        shape = (self.n, self.n) if components is None else (components, self.n, self.n)
        return np.zeros(shape, dtype=complex)


@dataclass
class SpinorField:
    """Spinor values ``data`` (shape ``(2, n, n)``) at time ``t``."""

    grid: Grid
    t: float
    mass: float
    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=complex)
        if self.data.shape != (2, self.grid.n, self.grid.n):
            raise ValueError(f"data shape {self.data.shape} does not match grid n={self.grid.n}")
        if not 0.0 <= self.mass <= 1.0:
            raise ConfigError(f"mass must lie in [0, 1], got {self.mass}")

    def replace(self, data, t=None):
        return SpinorField(self.grid, self.t if t is None else t, self.mass, data)


@dataclass
class ScalarSpinorPair:
    """Companion wave field ``Psi`` and its time derivative, both ``(2, n, n)``."""

    Psi: np.ndarray
    Psi_t: np.ndarray
    t: float = T0
    grid: Grid = field(default=None, repr=False)

    def __post_init__(self):
        self.Psi = np.asarray(self.Psi, dtype=complex)
        self.Psi_t = np.asarray(self.Psi_t, dtype=complex)
        if self.Psi.shape != self.Psi_t.shape:
            raise ValueError("Psi and Psi_t shapes differ")


def _data(f):
    return f.data if isinstance(f, SpinorField) else np.asarray(f)


def _check_shape(a, grid):
    if a.shape[-2:] != (grid.n, grid.n):
        raise ValueError(f"field shape {a.shape} does not match grid n={grid.n}")


def forward_transform(f, grid):
    """Modal coefficients of ``f`` (scalar ``(n, n)`` or spinor ``(2, n, n)``)."""
    a = _data(f)
    _check_shape(a, grid)
    return fft2(a) * grid._phase * grid.dx ** 2


def inverse_transform(c, grid):
    """Inverse of :func:`forward_transform`."""
    c = np.asarray(c)
    _check_shape(c, grid)
    return ifft2(c / (grid._phase * grid.dx ** 2))


def spectral_derivative(f, grid, a):
    """Spectral ``d/dx_a`` for ``a`` in ``{1, 2}``; exact on grid-resolved Fourier modes."""
    if a not in (1, 2):
        raise ValueError(f"direction must be 1 or 2, got {a!r}")
    arr = _data(f)
    _check_shape(arr, grid)
    K = grid.wavenumbers[a - 1]
    return ifft2(1j * K * fft2(arr))


def integrate(f, grid):
    """Rectangle rule ``sum f dx^2`` (trapezoidal on the periodic grid)."""
    return np.sum(f, axis=(-2, -1)) * grid.dx ** 2


def l2_norm(f, grid):
    a = _data(f)
    return float(np.sqrt(integrate(np.abs(a) ** 2, grid).sum()))


def sobolev_norm(f, grid, k):
    """Discrete ``H^k`` norm with Bessel weight ``<xi>^{2k}``, summed over components."""
    if int(k) != k or k < 0:
        raise ValueError(f"Sobolev order must be a nonnegative integer, got {k!r}")
    a = _data(f)
    _check_shape(a, grid)
    # the phase and dx factors only rescale |c|; fold them into the normalization
    power = np.abs(fft2(a)) ** 2
    weight = (1.0 + grid.abs_xi ** 2) ** k
    total = np.sum(weight * power) * grid.dx ** 4 / grid.area
    return float(np.sqrt(total))


def bump(r):
    """Smooth bump ``exp(1 - 1/(1 - r^2))`` on ``r < 1``, zero elsewhere; ``bump(0) = 1``."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    inside = r < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - r[inside] ** 2))
    return out


def make_initial_data(grid, epsilon, direction=(1.0, 0.0), mass=0.0):
    """Compactly supported data ``epsilon * bump(|x|) * direction`` at ``t = 2``."""
    if not epsilon >= 0:
        raise ConfigError(f"epsilon must be nonnegative, got {epsilon}")
    if grid.dx > MAX_BUMP_DX:
        raise ConfigError(f"grid too coarse to resolve the bump: dx = {grid.dx} > {MAX_BUMP_DX}")
    d = np.asarray(direction, dtype=complex)
    if d.shape != (2,) or abs(np.linalg.norm(d) - 1.0) > 1e-12:
        raise ConfigError(f"direction must be a unit spinor, got {direction!r}")
    profile = epsilon * bump(grid.r)
    return SpinorField(grid, T0, mass, d[:, None, None] * profile)
