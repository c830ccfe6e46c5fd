"""Strang-split time integration of the Soler model and the massless companion field.

One step is ``N(dt/2) S(dt) N(dt/2)`` where ``S`` is the exact linear Dirac
group and ``N`` the exact pointwise flow of ``d_t psi = -i rho g0 psi``.
``rho = psi^* g0 psi`` is constant along ``N``, hence::

    N(tau) psi = (cos(rho tau) I - i sin(rho tau) g0) psi

Both sub-flows preserve the discrete L2 charge exactly.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .clifford import GAMMA, mat_apply, nonlinearity, soler_density
from .errors import BlowUpError, ConfigError, CoverageError, SupportViolation
from .grid import (T0, ScalarSpinorPair, SpinorField, fft2, ifft2, integrate,
                   spectral_derivative)
from .propagator import DiracGroup, WaveGroup

log = logging.getLogger(__name__)

BLOWUP_FACTOR = 1e3
#: Out-of-cone amplitude, relative to the initial sup, treated as wrap-around.
SUPPORT_TOL = 0.05


@dataclass(frozen=True)
class StepperConfig:
    dt: float
    t_end: float
    snapshot_stride: float
    companion: bool = False
    linear_only: bool = False

    @property
    def stride_steps(self):
        return int(round(self.snapshot_stride / self.dt))

    @property
    def n_steps(self):
        return int(round((self.t_end - T0) / self.dt))

    def validate(self, grid):
        if not self.dt > 0:
            raise ConfigError(f"sim.dt must be positive, got {self.dt}")
        if self.dt > grid.dx / 4 * (1 + 1e-12):
            raise ConfigError(f"sim.dt = {self.dt} exceeds dx/4 = {grid.dx / 4}")
        if not self.t_end > T0:
            raise ConfigError(f"sim.t_end must exceed t0 = {T0}")
        k = self.snapshot_stride / self.dt
        if k < 1 or abs(k - round(k)) > 1e-9 * k:
            raise ConfigError("sim.snapshot_stride must be a positive multiple of sim.dt")
        span = (self.t_end - T0) / self.snapshot_stride
        if abs(span - round(span)) > 1e-9 * max(span, 1):
            raise ConfigError("t_end - t0 must be a multiple of sim.snapshot_stride")
        if grid.L < 2.0 + (self.t_end - T0):
            raise ConfigError(
                f"grid.L = {grid.L} too small: need L >= 2 + (t_end - t0) = {2 + self.t_end - T0}")


def nonlinear_flow(data, tau, gammas=GAMMA):
    """Exact pointwise flow of ``d_t psi = -i (psi^* g0 psi) g0 psi`` over ``tau``."""
    theta = soler_density(data, gammas) * tau
    return np.cos(theta) * data - 1j * np.sin(theta) * mat_apply(gammas.g0, data)


def nonlinear_substep(field, tau):
    return field.replace(nonlinear_flow(field.data, tau))


class Stepper:
    """Strang stepper for one grid and mass; reuses the cached ``S(dt)`` multiplier."""

    def __init__(self, grid, mass, dt, linear_only=False, gammas=GAMMA):
        self.grid = grid
        self.mass = mass
        self.dt = dt
        self.linear_only = linear_only
        self.gammas = gammas
        self.group = DiracGroup(grid, mass, gammas)

    def step(self, data, dt=None):
        dt = self.dt if dt is None else dt
        if self.linear_only:
            return self.group.apply(data, dt)
        half = nonlinear_flow(data, 0.5 * dt, self.gammas)
        return nonlinear_flow(self.group.apply(half, dt), 0.5 * dt, self.gammas)


def strang_step(field, dt, linear_only=False):
    """One Strang step of size ``dt``; returns a new field at ``field.t + dt``."""
    out = Stepper(field.grid, field.mass, dt, linear_only).step(field.data)
    if not np.all(np.isfinite(out)):
        raise BlowUpError(f"non-finite values after step at t = {field.t + dt}", t=field.t + dt)
    return field.replace(out, t=field.t + dt)


def dirac_rhs(data, grid, mass, linear_only=False, gammas=GAMMA):
    """``d_t psi = -i g0 (F(psi) - m psi) - g0 g^a d_a psi`` with spectral ``d_a``."""
    b1, b2 = gammas.boosts
    force = -mass * data if linear_only else nonlinearity(data, gammas) - mass * data
    out = -1j * mat_apply(gammas.g0, force)
    out -= mat_apply(b1, spectral_derivative(data, grid, 1))
    out -= mat_apply(b2, spectral_derivative(data, grid, 2))
    return out


def time_derivative(field, linear_only=False):
    """Equation-derived ``d_t psi`` as a :class:`SpinorField`."""
    return field.replace(dirac_rhs(field.data, field.grid, field.mass, linear_only))


def dirac_residual(data, data_t, grid, mass, linear_only=False, gammas=GAMMA):
    """``i g^mu d_mu psi + m psi - F(psi)`` given ``psi`` and ``d_t psi``."""
    g0, g1, g2 = gammas
    res = 1j * mat_apply(g0, data_t)
    res += 1j * mat_apply(g1, spectral_derivative(data, grid, 1))
    res += 1j * mat_apply(g2, spectral_derivative(data, grid, 2))
    res += mass * data
    if not linear_only:
        res -= nonlinearity(data, gammas)
    return res


# --- snapshot series ---------------------------------------------------------

def hermite_weights(theta, h):
    """Cubic Hermite basis (value and d/dt) for ``u_k, u'_k, u_{k+1}, u'_{k+1}``."""
    th2 = theta * theta
    th3 = th2 * theta
    value = (2 * th3 - 3 * th2 + 1, (th3 - 2 * th2 + theta) * h, -2 * th3 + 3 * th2, (th3 - th2) * h)
    deriv = ((6 * th2 - 6 * theta) / h, 3 * th2 - 4 * theta + 1, (-6 * th2 + 6 * theta) / h, 3 * th2 - 2 * theta)
    return value, deriv


def _trig_eval(coeffs, grid, x1, x2):
    # evaluate the trigonometric interpolant given FFT coefficients (..., n, n) at one point
    e1 = np.exp(1j * grid.xi * (x1 + grid.L))
    e2 = np.exp(1j * grid.xi * (x2 + grid.L))
    return np.einsum("...ij,i,j->...", coeffs, e1, e2) / grid.n ** 2


class SnapshotSeries:
    """Time-ordered fields ``u`` with stored ``d_t u`` on a uniform stride.

    Subclasses fill ``times``, ``values`` and ``rates``. Provides cubic Hermite
    interpolation in time and spectral differentiation in space.
    """

    grid = None
    times = None
    values = None
    rates = None

    def _init_cache(self):
        self._deriv_cache = lru_cache(maxsize=16)(self._spatial)

    @property
    def t_start(self):
        return float(self.times[0])

    @property
    def t_end(self):
        return float(self.times[-1])

    def __len__(self):
        return len(self.times)

    def bracket(self, t):
        """Index ``k`` with ``times[k] <= t <= times[k+1]`` (vectorized)."""
        t = np.asarray(t, dtype=float)
        tol = 1e-12 * max(1.0, self.t_end)
        if np.any(t < self.t_start - tol) or np.any(t > self.t_end + tol):
            raise CoverageError(f"time outside history coverage [{self.t_start}, {self.t_end}]")
        k = np.searchsorted(self.times, t, side="right") - 1
        return np.clip(k, 0, len(self.times) - 2)

    def _spatial(self, k):
        g = self.grid
        u, v = self.values[k], self.rates[k]
        return (spectral_derivative(u, g, 1), spectral_derivative(u, g, 2),
                spectral_derivative(v, g, 1), spectral_derivative(v, g, 2))

    def spatial_derivatives(self, k):
        """``(d1 u, d2 u, d1 u_t, d2 u_t)`` at snapshot ``k`` (cached)."""
        return self._deriv_cache(int(k))

    def interpolate(self, t):
        """Full fields ``(u, u_t)`` at a single time ``t``."""
        k = int(self.bracket(t))
        t0, t1 = self.times[k], self.times[k + 1]
        h = t1 - t0
        (a, b, c, d), (da, db, dc, dd) = hermite_weights((t - t0) / h, h)
        U = (self.values[k], self.rates[k], self.values[k + 1], self.rates[k + 1])
        u = a * U[0] + b * U[1] + c * U[2] + d * U[3]
        ut = da * U[0] + db * U[1] + dc * U[2] + dd * U[3]
        return u, ut

    def sample(self, t, idx):
        """Values and first derivatives at grid points ``idx = (i1, i2)`` and times ``t``.

        Returns ``(u, u_t, d1 u, d2 u)``, each of shape ``(2, P)``.
        """
        i1, i2 = idx
        t = np.asarray(t, dtype=float)
        ks = self.bracket(t)
        P = t.shape[0]
        out = [np.zeros((2, P), dtype=complex) for _ in range(4)]
        for k in np.unique(ks):
            sel = np.nonzero(ks == k)[0]
            t0, t1 = self.times[k], self.times[k + 1]
            h = t1 - t0
            w, dw = hermite_weights((t[sel] - t0) / h, h)
            p, q = i1[sel], i2[sel]
            d_lo = self.spatial_derivatives(k)
            d_hi = self.spatial_derivatives(k + 1)
            nodes = (self.values[k][:, p, q], self.rates[k][:, p, q],
                     self.values[k + 1][:, p, q], self.rates[k + 1][:, p, q])
            out[0][:, sel] = sum(wi * ni for wi, ni in zip(w, nodes))
            out[1][:, sel] = sum(wi * ni for wi, ni in zip(dw, nodes))
            for a in (0, 1):
                nodes_a = (d_lo[a][:, p, q], d_lo[a + 2][:, p, q],
                           d_hi[a][:, p, q], d_hi[a + 2][:, p, q])
                out[2 + a][:, sel] = sum(wi * ni for wi, ni in zip(w, nodes_a))
        return tuple(out)

    def evaluate(self, t, x):
        """``(u, u_t, d1 u, d2 u)`` at one arbitrary point ``(t, x)``, each shape ``(2,)``.

        Hermite in time, trigonometric interpolation in space.
        """
        u, ut = self.interpolate(t)
        g = self.grid
        K1, K2 = g.wavenumbers
        U, V = fft2(u), fft2(ut)
        x1, x2 = float(x[0]), float(x[1])
        return (_trig_eval(U, g, x1, x2), _trig_eval(V, g, x1, x2),
                _trig_eval(1j * K1 * U, g, x1, x2), _trig_eval(1j * K2 * U, g, x1, x2))


class History(SnapshotSeries):
    """Trajectory of the Soler flow sampled every ``stride_steps`` integrator steps."""

    def __init__(self, grid, mass, dt, stride_steps, linear_only=False, t0=T0):
        self.grid = grid
        self.mass = float(mass)
        self.dt = float(dt)
        self.stride_steps = int(stride_steps)
        self.linear_only = bool(linear_only)
        self.t0 = float(t0)
        self.times = np.zeros(0)
        self.values = []
        self.rates = []
        self.charge = []
        self.leak = []
        self.sup = []
        self.epsilon = 0.0
        self._init_cache()

    @property
    def psi(self):
        return self.values

    @property
    def dpsi(self):
        return self.rates

    @property
    def snapshot_dt(self):
        return self.dt * self.stride_steps

    def append(self, t, data, data_t=None):
        if data_t is None:
            data_t = dirac_rhs(data, self.grid, self.mass, self.linear_only)
        if len(self.times) and not t > self.times[-1]:
            raise ValueError("snapshot times must increase")
        self.times = np.append(self.times, float(t))
        self.values.append(data)
        self.rates.append(data_t)
        self.charge.append(float(integrate(np.abs(data) ** 2, self.grid).sum()))
        self._deriv_cache.cache_clear()

    def field(self, k):
        return SpinorField(self.grid, float(self.times[k]), self.mass, self.values[k])

    def stepper(self):
        return Stepper(self.grid, self.mass, self.dt, self.linear_only)

    def fine_states(self, per_snapshot=None):
        """Yield ``(t, psi)`` at ``per_snapshot`` equispaced nodes per snapshot interval.

        Intermediate states are regenerated by re-running the integrator from the
        stored snapshots, so the nodes lie on the recorded trajectory.
        """
        per = self.stride_steps if per_snapshot is None else int(per_snapshot)
        if per < 1 or self.stride_steps % per:
            raise ValueError(f"per_snapshot must divide the stride ({self.stride_steps} steps)")
        sub = self.stride_steps // per
        stepper = self.stepper()
        yield float(self.times[0]), self.values[0]
        for k in range(len(self.times) - 1):
            data = self.values[k]
            for j in range(1, per):
                for _ in range(sub):
                    data = stepper.step(data)
                yield float(self.times[k] + j * sub * self.dt), data
            yield float(self.times[k + 1]), self.values[k + 1]

    @property
    def relative_charge_drift(self):
        q = np.asarray(self.charge)
        if q[0] == 0:
            return 0.0
        return float(np.max(np.abs(q / q[0] - 1.0)))


def support_radius(field):
    """Radius of the initial support, never below the unit ball."""
    amp = np.max(np.abs(field.data), axis=0)
    r = field.grid.r[amp > 0]
    return max(1.0, float(r.max())) if r.size else 1.0


def out_of_cone_sup(data, grid, t, r0=1.0):
    """Max ``|psi|`` outside ``|x| <= r0 + (t - 2) + 2 dx``."""
    outside = grid.r > r0 + (t - T0) + 2 * grid.dx
    if not outside.any():
        return 0.0
    return float(np.sqrt((np.abs(data[:, outside]) ** 2).sum(axis=0)).max())


def evolve_to(psi0, config, keep=True, on_snapshot=None, support_tol=SUPPORT_TOL):
    """Integrate from ``t0 = 2`` to ``config.t_end`` and record a :class:`History`.

    ``on_snapshot(t, psi, psi_t)`` is called at each stride. With ``keep=False``
    only the monitors (charge, sup, out-of-cone leak) are stored.
    """
    grid = psi0.grid
    config.validate(grid)
    if abs(psi0.t - T0) > 1e-12:
        raise ConfigError(f"initial data must sit at t0 = {T0}, got t = {psi0.t}")
    hist = History(grid, psi0.mass, config.dt, config.stride_steps, config.linear_only)
    stepper = hist.stepper()
    eps = float(np.sqrt((np.abs(psi0.data) ** 2).sum(axis=0)).max())
    hist.epsilon = eps
    r0 = support_radius(psi0)

    def record(t, data):
        sup = float(np.sqrt((np.abs(data) ** 2).sum(axis=0)).max())
        if not np.isfinite(sup):
            raise BlowUpError(f"non-finite field at t = {t}", t=t, sup=sup)
        if eps > 0 and sup > BLOWUP_FACTOR * eps:
            raise BlowUpError(f"sup|psi| = {sup:.3e} exceeds {BLOWUP_FACTOR:g} eps at t = {t}",
                              t=t, sup=sup, threshold=BLOWUP_FACTOR * eps)
        leak = out_of_cone_sup(data, grid, t, r0)
        if eps > 0 and leak > support_tol * eps:
            raise SupportViolation(f"field of size {leak:.3e} outside the cone at t = {t}", t=t, leak=leak)
        data_t = dirac_rhs(data, grid, hist.mass, config.linear_only)
        if keep:
            hist.append(t, data, data_t)
        else:
            hist.times = np.append(hist.times, t)
            hist.charge.append(float(integrate(np.abs(data) ** 2, grid).sum()))
        hist.sup.append(sup)
        hist.leak.append(leak)
        if on_snapshot is not None:
            on_snapshot(t, data, data_t)

    data = psi0.data.copy()
    record(T0, data)
    for i in range(1, config.n_steps + 1):
        data = stepper.step(data)
        if i % config.stride_steps == 0:
            record(T0 + i * config.dt, data)
    log.info("evolved to t=%.3f in %d steps, charge drift %.2e",
             config.t_end, config.n_steps, hist.relative_charge_drift)
    return hist


# --- massless companion field -------------------------------------------------

class CompanionHistory(SnapshotSeries):
    """Snapshots of the companion wave field ``(Psi, Psi_t)`` aligned with a history."""

    def __init__(self, grid):
        self.grid = grid
        self.mass = 0.0
        self.times = np.zeros(0)
        self.values = []
        self.rates = []
        self._init_cache()

    def append(self, t, Psi, Psi_t):
        self.times = np.append(self.times, float(t))
        self.values.append(Psi)
        self.rates.append(Psi_t)

    def pair(self, k):
        return ScalarSpinorPair(self.values[k], self.rates[k], float(self.times[k]), self.grid)

    def dirac_of(self, k, gammas=GAMMA):
        """``i g^mu d_mu Psi`` at snapshot ``k``; equals ``psi`` for the true solution."""
        g0, g1, g2 = gammas
        d1, d2, _, _ = self.spatial_derivatives(k)
        return 1j * (mat_apply(g0, self.rates[k]) + mat_apply(g1, d1) + mat_apply(g2, d2))


def evolve_wave_with_source(Psi, Psi_t, grid, dt, sources, t0=T0):
    """Kick-drift-kick integration of ``-u_tt + Laplace u = f(t)``.

    ``sources`` is an iterable of source arrays at the nodes ``t0, t0 + dt, ...``;
    yields ``(t, u, u_t)`` after every step, starting with the initial state.
    """
    group = WaveGroup(grid)
    it = iter(sources)
    f = next(it)
    t = t0
    u_hat, v_hat = fft2(Psi), fft2(Psi_t)
    yield t, Psi, Psi_t
    for f_next in it:
        v_hat = v_hat - 0.5 * dt * fft2(f)
        u_hat, v_hat = group.apply_hat(u_hat, v_hat, dt)
        v_hat = v_hat - 0.5 * dt * fft2(f_next)
        t += dt
        f = f_next
        yield t, ifft2(u_hat), ifft2(v_hat)


def companion_initial_data(psi0, gammas=GAMMA):
    """``Psi(t0) = 0`` and ``d_t Psi(t0) = -i g0 psi0``."""
    return np.zeros_like(psi0), -1j * mat_apply(gammas.g0, psi0)


def evolve_companion(history):
    """Evolve ``box Psi = F(psi(t))`` alongside a massless history.

    The source is evaluated at every integrator step of the recorded trajectory
    (regenerated from the snapshots); the companion is stored at snapshot times.
    """
    if history.mass != 0.0:
        raise ConfigError("the companion field is defined for m = 0 only")
    grid = history.grid
    nodes = history.fine_states()
    first_t, first = next(nodes)
    Psi, Psi_t = companion_initial_data(first)
    comp = CompanionHistory(grid)
    comp.append(first_t, Psi, Psi_t)

    def force(data):
        return np.zeros_like(data) if history.linear_only else nonlinearity(data)

    node_times = []

    def sources():
        yield force(first)
        for t, data in nodes:
            node_times.append(t)
            yield force(data)

    snap = set(np.round(history.times[1:], 9))
    for i, (t, u, v) in enumerate(evolve_wave_with_source(Psi, Psi_t, grid, history.dt, sources(), first_t)):
        if i == 0:
            continue
        t_node = node_times[i - 1]
        if round(t_node, 9) in snap:
            comp.append(t_node, u, v)
    return comp


def companion_relation_residual(history, companion, k):
    """``||i g^mu d_mu Psi - psi||_{L2} / ||psi||_{L2}`` at snapshot ``k``."""
    diff = companion.dirac_of(k) - history.values[k]
    num = np.sqrt(integrate(np.abs(diff) ** 2, history.grid).sum())
    den = np.sqrt(integrate(np.abs(history.values[k]) ** 2, history.grid).sum())
    return float(num / den) if den > 0 else float(num)
