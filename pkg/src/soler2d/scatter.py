"""Scattering state with its Sobolev convergence rates, plus ghost-weight integrals."""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid, simpson

from .clifford import GAMMA, bilinear, mat_apply, nonlinearity, proj_radial
from .grid import SpinorField, fft2, ifft2, integrate
from .hyperdiag import ExponentFit, fit_exponent
from .propagator import DiracGroup


def simpson_weights(n_intervals):
    """Composite Simpson weights (unit spacing) for ``n_intervals + 1`` nodes.

    An odd interval count closes with Simpson's 3/8 rule on the last three.
    """
    N = int(n_intervals)
    if N < 2:
        raise ValueError("Simpson quadrature needs at least two intervals")
    w = np.zeros(N + 1)
    m = N if N % 2 == 0 else N - 3
    if m > 0:
        w[:m + 1:2] += 2.0 / 3.0
        w[1:m:2] += 4.0 / 3.0
        w[0] -= 1.0 / 3.0
        w[m] -= 1.0 / 3.0
    if m != N:
        w[m:] += np.array([3.0, 9.0, 9.0, 3.0]) / 8.0
    return w


@dataclass
class ScatteringState:
    profile: SpinorField
    tail_bound: float
    nodes: int


def scattering_state(history, per_snapshot=None, gammas=GAMMA):
    """``psi+ = psi(t0) - i int_{t0}^{T} S(t0 - tau) g0 F(psi(tau)) dtau`` by composite Simpson.

    Quadrature nodes are ``per_snapshot`` equispaced points per snapshot interval
    (default: every integrator step), regenerated from the stored snapshots.
    ``tail_bound`` is ``int_{T/2}^{T} ||F||_{L2} dtau``.
    """
    if len(history) < 5:
        raise ValueError("scattering_state needs at least 5 snapshots")
    grid, t0 = history.grid, history.t0
    psi0 = history.values[0]
    if history.linear_only:
        return ScatteringState(SpinorField(grid, t0, history.mass, psi0.copy()), 0.0, len(history))
    per = history.stride_steps if per_snapshot is None else int(per_snapshot)
    n_int = (len(history) - 1) * per
    h = history.snapshot_dt / per
    w = simpson_weights(n_int)
    group = DiracGroup(grid, history.mass, gammas)
    acc = np.zeros((2, grid.n, grid.n), dtype=complex)
    T = history.t_end
    tail_t, tail_f = [], []
    for j, (tau, data) in enumerate(history.fine_states(per)):
        F = nonlinearity(data, gammas)
        if tau >= 0.5 * T - 1e-9:
            tail_t.append(tau)
            tail_f.append(np.sqrt(integrate(np.abs(F) ** 2, grid).sum()))
        E = group._multiplier(t0 - tau)
        g = fft2(mat_apply(gammas.g0, F))
        acc += w[j] * np.stack([E[0, 0] * g[0] + E[0, 1] * g[1], E[1, 0] * g[0] + E[1, 1] * g[1]])
    duhamel = ifft2(acc) * h
    tail = float(np.trapezoid(tail_f, tail_t)) if len(tail_t) > 1 else 0.0
    profile = SpinorField(grid, t0, history.mass, psi0 - 1j * duhamel)
    return ScatteringState(profile, tail, n_int + 1)


def _sobolev_from_hat(c_hat, grid, k):
    weight = (1.0 + grid.abs_xi ** 2) ** k
    return float(np.sqrt(np.sum(weight * np.abs(c_hat) ** 2) * grid.dx ** 4 / grid.area))


@dataclass
class ScatterReport:
    profile: SpinorField
    order_high: int
    order_low: int
    times: np.ndarray
    err_high: np.ndarray
    err_low: np.ndarray
    propagated_norm_high: np.ndarray
    fit_high: ExponentFit = None
    fit_low: ExponentFit = None
    notes: list = field(default_factory=list)

    @property
    def err_low_times_sqrt_t(self):
        return self.err_low * np.sqrt(self.times)

    def rows(self):
        return [(float(t), float(a), float(b), float(c)) for t, a, b, c in
                zip(self.times, self.err_high, self.err_low, self.err_low_times_sqrt_t)]


def convergence_curve(history, psi_plus, N=2, t_min=10.0):
    """``||psi(t) - S(t - t0) psi+||_{H^k}`` at every snapshot for ``k = N+1`` and ``k = N-1``.

    Exponents are fitted on ``t >= t_min`` when enough positive samples exist.
    """
    profile = psi_plus.profile if isinstance(psi_plus, ScatteringState) else psi_plus
    grid = history.grid
    group = DiracGroup(grid, history.mass)
    plus_hat = fft2(profile.data)
    hi, lo = N + 1, N - 1
    e_hi, e_lo, p_hi = [], [], []
    for k, t in enumerate(history.times):
        lin_hat = group.apply_hat(plus_hat, t - history.t0)
        diff = fft2(history.values[k]) - lin_hat
        e_hi.append(_sobolev_from_hat(diff, grid, hi))
        e_lo.append(_sobolev_from_hat(diff, grid, lo))
        p_hi.append(_sobolev_from_hat(lin_hat, grid, hi))
    rep = ScatterReport(profile, hi, lo, np.asarray(history.times, dtype=float),
                        np.asarray(e_hi), np.asarray(e_lo), np.asarray(p_hi))
    for name in ("high", "low"):
        errs = rep.err_high if name == "high" else rep.err_low
        try:
            setattr(rep, "fit_" + name, fit_exponent(rep.times, errs, t_min=t_min))
        except ValueError as exc:
            rep.notes.append(f"{name}-order fit skipped: {exc}")
    return rep


# --- ghost weight ---------------------------------------------------------------------

def ghost_density(data, grid, t, gammas=GAMMA):
    """``|[psi]_-|^2 / <t - r>^2`` on the grid."""
    X1, X2 = grid.mesh
    minus = proj_radial(data, np.stack([X1, X2]), -1, gammas)
    return bilinear(minus, minus).real / (1.0 + (t - grid.r) ** 2)


@dataclass
class GhostReport:
    times: np.ndarray
    integrand: np.ndarray
    cumulative: np.ndarray
    total: float
    tail: float

    def rows(self):
        return [(float(t), float(a), float(b)) for t, a, b in zip(self.times, self.integrand, self.cumulative)]


def ghost_integral(history, gammas=GAMMA):
    """Time integral of ``||[psi]_- / <tau - r>||^2_{L2}`` over ``[t0, T]`` and ``[T/2, T]``."""
    t = np.asarray(history.times, dtype=float)
    vals = np.array([integrate(ghost_density(history.values[k], history.grid, tk, gammas), history.grid)
                     for k, tk in enumerate(t)])
    cum = cumulative_trapezoid(vals, t, initial=0.0)
    total = float(simpson(vals, x=t))
    late = t >= 0.5 * t[-1] - 1e-9
    tail = float(simpson(vals[late], x=t[late])) if late.sum() > 2 else float(np.trapezoid(vals[late], t[late]))
    return GhostReport(t, vals, cum, total, tail)


def ghost_identity_check(psi, x, t, gammas=GAMMA):
    """Max relative defect of the pointwise ghost-weight identity.

    ``-(d_t q) psi^* psi - (d_j q) psi^* g0 g^j psi = |[psi]_-|^2 / (2 (1 + (r-t)^2))``
    with ``q = arctan(r - t)``. Points with ``x = 0`` are skipped.
    """
    x = np.asarray(x, dtype=float)
    r = np.hypot(x[0], x[1])
    ok = r > 0
    psi = np.asarray(psi)[:, ok]
    x = x[:, ok]
    r = r[ok]
    t = np.broadcast_to(np.asarray(t, dtype=float), np.shape(ok))[ok]
    w = 1.0 / (1.0 + (r - t) ** 2)
    dtq, d1q, d2q = -w, x[0] / r * w, x[1] / r * w
    b1, b2 = gammas.boosts
    lhs = -dtq * bilinear(psi, psi) - d1q * bilinear(psi, psi, b1) - d2q * bilinear(psi, psi, b2)
    minus = proj_radial(psi, x, -1, gammas)
    rhs = 0.5 * w * bilinear(minus, minus)
    scale = w * bilinear(psi, psi).real
    err = np.abs(lhs - rhs)
    return float(np.max(np.where(scale > 0, err / np.where(scale > 0, scale, 1.0), err), initial=0.0))
