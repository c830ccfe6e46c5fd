"""Diagnostics on the hyperboloids ``t^2 - |x|^2 = s^2`` and pointwise decay monitors."""

import enum
from dataclasses import dataclass

import numpy as np

from .clifford import GAMMA, bilinear, mat_apply, proj_hyper
from .errors import ConfigError, CoverageError
from .grid import T0

BOUND_TOL = 1e-8


@dataclass
class HyperSlice:
    """Samples of a field and its first derivatives on one hyperboloid."""

    s: float
    grid: object
    x: np.ndarray       # (2, P)
    t: np.ndarray       # (P,)
    psi: np.ndarray     # (2, P)
    psi_t: np.ndarray
    psi_1: np.ndarray
    psi_2: np.ndarray

    @property
    def weight(self):
        return self.grid.dx ** 2

    def integrate(self, density):
        return float(np.sum(density) * self.weight)


def max_hyperbolic_time(series):
    """Largest ``s`` whose cone-interior slice lies inside the recorded times."""
    return float(np.sqrt(2.0 * series.t_end - 1.0))


def sample_hyperboloid(series, s):
    """Sample ``series`` on ``H_s`` over grid points with ``|x| <= (s^2 - 1)/2``.

    Uses cubic Hermite interpolation in time between snapshots; the times used
    stay inside ``[s, (s^2 + 1)/2]``.
    """
    s_max = max_hyperbolic_time(series)
    if not (2.0 - 1e-12 <= s <= s_max + 1e-12):
        raise CoverageError(f"s = {s} outside admissible range [2, {s_max:.6g}]")
    grid = series.grid
    R = grid.r
    i1, i2 = np.nonzero(R <= 0.5 * (s * s - 1.0))
    X1, X2 = grid.mesh
    x = np.stack([X1[i1, i2], X2[i1, i2]])
    t = np.sqrt(s * s + R[i1, i2] ** 2)
    t = np.minimum(t, series.t_end)
    u, ut, u1, u2 = series.sample(t, (i1, i2))
    return HyperSlice(float(s), grid, x, t, u, ut, u1, u2)


def energy_D(sl, gammas=GAMMA):
    """``E^D = int psi^* psi - (x_a/t) psi^* g0 g^a psi dx`` on the slice."""
    b1, b2 = gammas.boosts
    cross = (sl.x[0] / sl.t) * bilinear(sl.psi, sl.psi, b1) + (sl.x[1] / sl.t) * bilinear(sl.psi, sl.psi, b2)
    return sl.integrate(bilinear(sl.psi, sl.psi).real - cross.real)


def energy_plus(sl, gammas=GAMMA):
    """``int |(psi)_-|^2 dx`` on the slice."""
    minus = proj_hyper(sl.psi, sl.x, sl.t, -1, gammas)
    return sl.integrate(bilinear(minus, minus).real)


def weighted_mass(sl):
    """``int (s/t)^2 |psi|^2 dx``."""
    return sl.integrate((sl.s / sl.t) ** 2 * bilinear(sl.psi, sl.psi).real)


def energy_identity_residual(sl, gammas=GAMMA):
    """Relative defect of ``E^D = (1/2) int (s/t)^2 |psi|^2 + (1/2) E^+``."""
    ed = energy_D(sl, gammas)
    rhs = 0.5 * weighted_mass(sl) + 0.5 * energy_plus(sl, gammas)
    return abs(ed - rhs) / ed if ed > 0 else abs(ed - rhs)


@dataclass
class EnergyBound:
    lhs: float
    rhs: float

    @property
    def slack(self):
        return self.rhs - self.lhs

    @property
    def ok(self):
        return self.lhs <= self.rhs + BOUND_TOL


def energy_bound_check(sl, gammas=GAMMA):
    """Compare ``||(s/t) psi|| + ||(psi)_-||`` with ``4 sqrt(E^D)``."""
    lhs = np.sqrt(weighted_mass(sl)) + np.sqrt(energy_plus(sl, gammas))
    rhs = 4.0 * np.sqrt(max(energy_D(sl, gammas), 0.0))
    return EnergyBound(float(lhs), float(rhs))


def structure_residual(sl, gammas=GAMMA):
    """Max pointwise defect of the hyperboloidal splitting of ``psi^* g0 psi``.

    Checks ``psi^* g0 psi = (1/4)[(psi)_-^* g0 (psi)_- + 2 Re (psi)_-^* g0 (psi)_+
    + (s/t)^2 psi^* g0 psi]``, relative to ``max |psi|^2``.
    """
    g0 = gammas.g0
    plus = proj_hyper(sl.psi, sl.x, sl.t, +1, gammas)
    minus = proj_hyper(sl.psi, sl.x, sl.t, -1, gammas)
    lhs = bilinear(sl.psi, sl.psi, g0)
    rhs = 0.25 * (bilinear(minus, minus, g0) + 2 * bilinear(minus, plus, g0).real
                  + (sl.s / sl.t) ** 2 * lhs)
    scale = float(np.max(bilinear(sl.psi, sl.psi).real, initial=0.0))
    err = float(np.max(np.abs(lhs - rhs), initial=0.0))
    return err / scale if scale > 0 else err


def conformal_energy(sl):
    """``E_con = int sum_a |s dbar_a u|^2 + |K u + u|^2 dx``, summed over components.

    ``dbar_a = (x_a/t) d_t + d_a`` and ``K = s d_s + 2 x_a dbar_a`` with
    ``d_s = (s/t) d_t``.
    """
    s, t, x = sl.s, sl.t, sl.x
    db1 = (x[0] / t) * sl.psi_t + sl.psi_1
    db2 = (x[1] / t) * sl.psi_t + sl.psi_2
    Ku = (s * s / t) * sl.psi_t + 2.0 * (x[0] * db1 + x[1] * db2)
    dens = s * s * (np.abs(db1) ** 2 + np.abs(db2) ** 2) + np.abs(Ku + sl.psi) ** 2
    return sl.integrate(dens)


# --- vector fields -------------------------------------------------------------

class VectorField(str, enum.Enum):
    D0 = "d0"
    D1 = "d1"
    D2 = "d2"
    L1 = "L1"
    L2 = "L2"
    LHAT1 = "Lhat1"
    LHAT2 = "Lhat2"
    L0 = "L0"
    OMEGA12 = "Omega12"


def vectorfield_from_jet(vf, t, x, u, ut, u1, u2, gammas=GAMMA):
    """Apply a vector field given the value and first derivatives at ``(t, x)``."""
    vf = VectorField(vf)
    x1, x2 = x[0], x[1]
    if vf is VectorField.D0:
        return ut
    if vf is VectorField.D1:
        return u1
    if vf is VectorField.D2:
        return u2
    if vf in (VectorField.L1, VectorField.LHAT1):
        out = t * u1 + x1 * ut
        return out - 0.5 * mat_apply(gammas.boosts[0], u) if vf is VectorField.LHAT1 else out
    if vf in (VectorField.L2, VectorField.LHAT2):
        out = t * u2 + x2 * ut
        return out - 0.5 * mat_apply(gammas.boosts[1], u) if vf is VectorField.LHAT2 else out
    if vf is VectorField.L0:
        return t * ut + x1 * u1 + x2 * u2
    return x1 * u2 - x2 * u1


def apply_vectorfield(series, vf, t, x):
    """Evaluate one of ``d0, d1, d2, L_a, Lhat_a, L0, Omega12`` applied to the field at ``(t, x)``."""
    u, ut, u1, u2 = series.evaluate(t, x)
    return vectorfield_from_jet(vf, t, x, u, ut, u1, u2)


# --- commutator checks on closed-form test fields --------------------------------

def _fd(f, h, var):
    # 4th-order centered difference in variable var (0 = t, 1 = x1, 2 = x2)
    def df(t, x1, x2):
        def at(d):
            args = [t, x1, x2]
            args[var] = args[var] + d
            return f(*args)
        return (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h)
    return df


def _dirac_op(f, h, gammas=GAMMA):
    g0, g1, g2 = gammas
    ft, f1, f2 = _fd(f, h, 0), _fd(f, h, 1), _fd(f, h, 2)
    return lambda t, x1, x2: 1j * (g0 @ ft(t, x1, x2) + g1 @ f1(t, x1, x2) + g2 @ f2(t, x1, x2))


def _boost_op(f, h, a, hat=True, gammas=GAMMA):
    ft, fa = _fd(f, h, 0), _fd(f, h, a)
    B = gammas.boosts[a - 1]

    def out(t, x1, x2):
        xa = x1 if a == 1 else x2
        val = t * fa(t, x1, x2) + xa * ft(t, x1, x2)
        return val - 0.5 * B @ f(t, x1, x2) if hat else val
    return out


def plane_wave(xi=(0.7, -0.4), omega=0.9, v=(1.0, 0.5j)):
    """A closed-form spinor plane wave ``v exp(i (xi.x - omega t))``."""
    v = np.asarray(v, dtype=complex)
    return lambda t, x1, x2: v * np.exp(1j * (xi[0] * x1 + xi[1] * x2 - omega * t))


def gaussian_packet(center=(0.3, -0.2), t_c=3.0, width=1.5, k=(0.8, 0.3), poly=(1.0, 0.5, -0.3),
                    v=(0.6, 0.8j)):
    """Gaussian space-time packet with a polynomial prefactor, times a constant spinor."""
    v = np.asarray(v, dtype=complex)

    def f(t, x1, x2):
        y1, y2 = x1 - center[0], x2 - center[1]
        env = np.exp(-(y1 ** 2 + y2 ** 2 + (t - t_c) ** 2) / width ** 2)
        pre = poly[0] + poly[1] * y1 + poly[2] * y2 * (t - t_c)
        return v * pre * env * np.exp(1j * (k[0] * x1 + k[1] * x2))
    return f


DEFAULT_POINTS = ((3.0, 0.5, -0.4), (3.4, -0.8, 0.6), (2.7, 0.1, 1.1), (3.1, 1.2, 0.2))


@dataclass
class CommutatorReport:
    h: float
    residual_h: float
    residual_h2: float
    extrapolated: float
    dt_boost_residual: float
    boost_rotation_residual: float

    @property
    def ratio(self):
        return self.residual_h / self.residual_h2 if self.residual_h2 > 0 else np.inf


def _commutator_vectors(f, h, points, gammas):
    out = []
    for a in (1, 2):
        D = _dirac_op(f, h, gammas)
        LD = _boost_op(D, h, a, gammas=gammas)
        DL = _dirac_op(_boost_op(f, h, a, gammas=gammas), h, gammas)
        for p in points:
            out.append(LD(*p) - DL(*p))
    return np.concatenate(out)


def commutator_check(h=1e-2, fields=None, points=DEFAULT_POINTS, gammas=GAMMA):
    """Finite-difference residuals of ``[Lhat_a, i g^mu d_mu]`` on closed-form fields.

    Returns residuals at ``h`` and ``h/2``, the Richardson-extrapolated residual
    (which should vanish), and two first-order commutator identities:
    ``[d_t, L_a] f = d_a f`` and ``[Lhat_1, Lhat_2] f = Omega12 f - (1/2) g1 g2 f``.
    """
    if fields is None:
        fields = (plane_wave(), gaussian_packet())
    r_h, r_h2, r_ex = [], [], []
    dt_res, rot_res = 0.0, 0.0
    for f in fields:
        v1 = _commutator_vectors(f, h, points, gammas)
        v2 = _commutator_vectors(f, h / 2, points, gammas)
        r_h.append(np.max(np.abs(v1)))
        r_h2.append(np.max(np.abs(v2)))
        r_ex.append(np.max(np.abs((16 * v2 - v1) / 15)))
        g1g2 = gammas.g1 @ gammas.g2
        for p in points:
            for a in (1, 2):
                lhs = _fd(_boost_op(f, h, a, hat=False, gammas=gammas), h, 0)(*p) \
                    - _boost_op(_fd(f, h, 0), h, a, hat=False, gammas=gammas)(*p)
                dt_res = max(dt_res, float(np.max(np.abs(lhs - _fd(f, h, a)(*p)))))
            t, x1, x2 = p
            comm = _boost_op(_boost_op(f, h, 2, gammas=gammas), h, 1, gammas=gammas)(*p) \
                - _boost_op(_boost_op(f, h, 1, gammas=gammas), h, 2, gammas=gammas)(*p)
            omega = x1 * _fd(f, h, 2)(*p) - x2 * _fd(f, h, 1)(*p) - 0.5 * g1g2 @ f(*p)
            rot_res = max(rot_res, float(np.max(np.abs(comm - omega))))
    return CommutatorReport(h, float(max(r_h)), float(max(r_h2)), float(max(r_ex)), dt_res, rot_res)


# --- pointwise decay monitors ----------------------------------------------------------

def decay_monitor(data, grid, t, mass):
    """``(sup |psi|, sup |psi| (t^{1/2} (t-r)^{1/2} + m t))`` over the cone ``|x| <= t - 1``."""
    R = grid.r
    region = R <= t - 1.0
    amp = np.sqrt((np.abs(data[:, region]) ** 2).sum(axis=0))
    if amp.size == 0:
        return 0.0, 0.0
    w = np.sqrt(t) * np.sqrt(t - R[region]) + mass * t
    return float(amp.max()), float((amp * w).max())


def improved_monitor(data, grid, t):
    """``sup_{r <= t/2} |psi| t^{1/2} (t - r)^{3/2} / (ln t)^2``."""
    R = grid.r
    region = R <= 0.5 * t
    amp = np.sqrt((np.abs(data[:, region]) ** 2).sum(axis=0))
    w = np.sqrt(t) * (t - R[region]) ** 1.5 / np.log(t) ** 2
    return float((amp * w).max())


def _field_at(series, t):
    k = np.nonzero(np.isclose(series.times, t, rtol=0, atol=1e-9))[0]
    if k.size:
        return series.values[int(k[0])]
    return series.interpolate(t)[0]


def decay_profile(history, t):
    """Decay monitors of :func:`decay_monitor` at time ``t`` (Hermite-interpolated if needed)."""
    return decay_monitor(_field_at(history, t), history.grid, t, history.mass)


def improved_decay_profile(history, t, companion=None):
    """Massless improved-decay monitor at ``t``.

    With a companion field, ``psi`` is reconstructed as ``i g^mu d_mu Psi``.
    """
    if history.mass != 0.0:
        raise ConfigError("the improved decay monitor applies to m = 0 only")
    if companion is not None:
        k = np.nonzero(np.isclose(companion.times, t, rtol=0, atol=1e-9))[0]
        if not k.size:
            raise CoverageError(f"t = {t} is not a companion snapshot time")
        data = companion.dirac_of(int(k[0]))
    else:
        data = _field_at(history, t)
    return improved_monitor(data, history.grid, t)


# --- exponent fits ------------------------------------------------------------------------

@dataclass
class ExponentFit:
    slope: float
    intercept: float
    residual: float


def fit_exponent(t, values, t_min=10.0, t_max=np.inf):
    """Least-squares slope of ``ln(value)`` against ``ln(t)`` over ``[t_min, t_max]``."""
    t = np.asarray(t, dtype=float)
    v = np.asarray(values, dtype=float)
    sel = (t >= t_min) & (t <= t_max)
    t, v = t[sel], v[sel]
    if t.size < 8:
        raise ValueError(f"need at least 8 samples in the fit window, got {t.size}")
    if np.any(v <= 0):
        raise ValueError("exponent fit needs positive values")
    A = np.stack([np.log(t), np.ones_like(t)], axis=1)
    coef, *_ = np.linalg.lstsq(A, np.log(v), rcond=None)
    resid = np.log(v) - A @ coef
    return ExponentFit(float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(resid ** 2))))


# --- series for reports ---------------------------------------------------------------

def energy_rows(history, s_values):
    """Rows ``(s, E_D, E_plus, identity_residual, bound_slack)``."""
    rows = []
    for s in s_values:
        sl = sample_hyperboloid(history, s)
        rows.append((float(s), energy_D(sl), energy_plus(sl), energy_identity_residual(sl),
                     energy_bound_check(sl).slack))
    return rows


def decay_rows(history, companion=None, t_min=T0):
    """Rows ``(t, sup_abs, weighted_sup, improved_weighted_sup)``; the last is None when m != 0."""
    rows = []
    for k, t in enumerate(history.times):
        if t < t_min:
            continue
        sup, wsup = decay_monitor(history.values[k], history.grid, t, history.mass)
        imp = None
        if history.mass == 0.0 and t > 1.0:
            data = companion.dirac_of(k) if companion is not None else history.values[k]
            imp = improved_monitor(data, history.grid, t)
        rows.append((float(t), sup, wsup, imp))
    return rows
