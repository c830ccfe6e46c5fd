"""Clifford algebra in 2+1 dimensions with spinor bilinears and projector decompositions.

Spinor arrays carry the component index on axis 0, so a single spinor has
shape ``(2,)`` and a spinor field on a grid has shape ``(2, n, n)``. Spatial
points are passed the same way, ``x`` with shape ``(2, ...)``, and broadcast
against the trailing axes of the spinors.

The representation is fixed once and for all::

    g0 = diag(1, -1),   g1 = i * sigma_1,   g2 = i * sigma_2

so that the Soler density ``psi^* g0 psi`` is ``|a|^2 - |b|^2``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

SIGMA_1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_3 = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)

#: Minkowski metric, signature (-, +, +).
METRIC = np.diag([-1.0, 1.0, 1.0])


@dataclass(frozen=True)
class GammaRep:
    """Three 2x2 complex matrices representing the Dirac gamma matrices."""

    g0: np.ndarray
    g1: np.ndarray
    g2: np.ndarray

    def __iter__(self):
        return iter((self.g0, self.g1, self.g2))

    def __getitem__(self, mu):
        return (self.g0, self.g1, self.g2)[mu]

    @property
    def boosts(self):
        """The pair ``(g0 g1, g0 g2)``; both Hermitian."""
        return self.g0 @ self.g1, self.g0 @ self.g2

    def clifford_residual(self):
        """Max entrywise deviation from ``g^mu g^nu + g^nu g^mu = -2 g^{mu nu} I``."""
        worst = 0.0
        for mu in range(3):
            for nu in range(3):
                lhs = self[mu] @ self[nu] + self[nu] @ self[mu]
                rhs = -2.0 * METRIC[mu, nu] * I2
                worst = max(worst, float(np.max(np.abs(lhs - rhs))))
        return worst

    def adjoint_residual(self):
        """Max deviation from ``(g0)^* = g0`` and ``(ga)^* = -ga``."""
        return max(
            float(np.max(np.abs(self.g0.conj().T - self.g0))),
            float(np.max(np.abs(self.g1.conj().T + self.g1))),
            float(np.max(np.abs(self.g2.conj().T + self.g2))),
        )


def build_gamma_rep():
    """Return the fixed representation ``(sigma_3, i sigma_1, i sigma_2)``."""
    return GammaRep(SIGMA_3.copy(), 1j * SIGMA_1, 1j * SIGMA_2)


GAMMA = build_gamma_rep()


def mat_apply(M, psi):
    """Apply a 2x2 matrix (constant, or field of shape ``(2, 2, ...)``) to spinors."""
    return np.stack([M[0, 0] * psi[0] + M[0, 1] * psi[1],
                     M[1, 0] * psi[0] + M[1, 1] * psi[1]])


def bilinear(psi, phi, M=None):
    """``psi^* M phi`` contracted over the spinor axis (``M = I`` when omitted)."""
    if M is not None:
        phi = mat_apply(M, phi)
    return np.conj(psi[0]) * phi[0] + np.conj(psi[1]) * phi[1]


def soler_density(psi, gammas=GAMMA):
    """Real scalar ``psi^* g0 psi``."""
    return bilinear(psi, psi, gammas.g0).real


def nonlinearity(psi, gammas=GAMMA):
    """Soler nonlinearity ``(psi^* g0 psi) psi``."""
    return soler_density(psi, gammas) * np.asarray(psi)


def _boost_matrix(c1, c2, gammas):
    # c1 g0 g1 + c2 g0 g2 as a (2, 2, ...) field
    b1, b2 = gammas.boosts
    c1 = np.asarray(c1)
    c2 = np.asarray(c2)
    return b1[(...,) + (None,) * c1.ndim] * c1 + b2[(...,) + (None,) * c2.ndim] * c2


def _sign(sign):
    if sign in (+1, "+"):
        return 1.0
    if sign in (-1, "-"):
        return -1.0
    raise ValueError(f"sign must be +1/-1 or '+'/'-', got {sign!r}")


def proj_hyper(psi, x, t, sign, gammas=GAMMA):
    """Hyperboloidal projection ``psi +/- (x_a / t) g0 g^a psi``.

    Requires ``t > 0``; the plus and minus parts always sum to ``2 psi``.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("proj_hyper needs t > 0")
    x = np.asarray(x, dtype=float)
    M = _boost_matrix(x[0] / t, x[1] / t, gammas)
    return psi + _sign(sign) * mat_apply(M, psi)


def proj_radial(psi, x, sign, gammas=GAMMA):
    """Radial projection ``psi +/- (x_j / r) g0 g^j psi`` with ``r = |x|``.

    At ``x = 0`` the direction is undefined and ``psi`` is returned for both signs.
    """
    x = np.asarray(x, dtype=float)
    r = np.hypot(x[0], x[1])
    safe = np.where(r > 0, r, 1.0)
    M = _boost_matrix(np.where(r > 0, x[0] / safe, 0.0),
                      np.where(r > 0, x[1] / safe, 0.0), gammas)
    return psi + _sign(sign) * mat_apply(M, psi)


def decompose_bilinear_hyper(Psi, Phi, x, t, s=None, gammas=GAMMA):
    """Split ``Psi^* g0 Phi`` into four terms using the hyperboloidal projectors.

    Returns an array with leading axis 4 holding::

        (1/4) [(Psi)_-^* g0 (Phi)_-,  (Psi)_-^* g0 (Phi)_+,
               (Psi)_+^* g0 (Phi)_-,  (s^2/t^2) Psi^* g0 Phi]

    whose sum is ``Psi^* g0 Phi``. Only points strictly inside the cone
    ``|x| < t`` are admissible. ``s`` defaults to ``sqrt(t^2 - |x|^2)``.
    """
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    r2 = x[0] ** 2 + x[1] ** 2
    if np.any(t <= 0) or np.any(r2 >= t ** 2):
        raise DomainError("decompose_bilinear_hyper needs |x| < t")
    s2 = t ** 2 - r2
    if s is not None:
        s = np.asarray(s, dtype=float)
        if np.any(np.abs(s ** 2 - s2) > 1e-12 * t ** 2):
            raise DomainError("s is inconsistent with s^2 = t^2 - |x|^2")
    g0 = gammas.g0
    Pp, Pm = proj_hyper(Psi, x, t, +1, gammas), proj_hyper(Psi, x, t, -1, gammas)
    Fp, Fm = proj_hyper(Phi, x, t, +1, gammas), proj_hyper(Phi, x, t, -1, gammas)
    return 0.25 * np.stack([
        bilinear(Pm, Fm, g0),
        bilinear(Pm, Fp, g0),
        bilinear(Pp, Fm, g0),
        (s2 / t ** 2) * bilinear(Psi, Phi, g0),
    ])


def decompose_bilinear_radial(Psi, Phi, x, gammas=GAMMA):
    """Three-term radial analogue of :func:`decompose_bilinear_hyper`.

    The missing ``[Psi]_+^* g0 [Phi]_+`` term vanishes identically for ``x != 0``.
    """
    x = np.asarray(x, dtype=float)
    if np.any(np.hypot(x[0], x[1]) == 0):
        raise DomainError("decompose_bilinear_radial needs x != 0")
    g0 = gammas.g0
    Pp, Pm = proj_radial(Psi, x, +1, gammas), proj_radial(Psi, x, -1, gammas)
    Fp, Fm = proj_radial(Phi, x, +1, gammas), proj_radial(Phi, x, -1, gammas)
    return 0.25 * np.stack([
        bilinear(Pm, Fm, g0),
        bilinear(Pm, Fp, g0),
        bilinear(Pp, Fm, g0),
    ])
