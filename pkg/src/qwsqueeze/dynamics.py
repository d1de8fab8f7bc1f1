"""Linearized fluctuation dynamics: drift and diffusion matrices, stability.

Quadratures are defined as X = (o' + o)/sqrt(2), Y = i(o' - o)/sqrt(2)
(o' the creation operator), so a vacuum mode has variance 1/2.  The state
vector ordering is fixed by :data:`QUADRATURE_ORDER`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError
from .model import SystemParams

#: Fixed ordering of the fluctuation state vector.
QUADRATURE_ORDER = ("X_b", "Y_b", "X_a", "Y_a", "X_c1", "Y_c1", "X_c2", "Y_c2")

#: Margin below which an eigenvalue real part counts as numerically zero.
STABILITY_EPS = 1e-12


@dataclass(frozen=True)
class LinearSystem:
    """Drift matrix R and diffusion matrix N for dV/dt = RV + VR^T + N."""

    drift: np.ndarray
    diffusion: np.ndarray
    ordering: tuple[str, ...] = QUADRATURE_ORDER


@dataclass(frozen=True)
class StabilityVerdict:
    """Spectral stability report for a drift matrix.

    ``eigen_real_parts`` holds the real parts of all eigenvalues sorted in
    descending order, so ``margin`` equals its first entry.  ``stable`` is
    True only when the margin clears -STABILITY_EPS, which guards against
    calling a marginal spectrum stable.
    """

    stable: bool
    eigen_real_parts: tuple[float, ...]
    margin: float

    @property
    def classification(self) -> str:
        """One of "stable", "marginal", "unstable"."""
        if self.stable:
            return "stable"
        if self.margin < 0:
            return "marginal"
        return "unstable"


def build_drift(params: SystemParams, G_plus: float, G_minus: float) -> np.ndarray:
    """Drift matrix of the linearized two-tone dynamics.

    The rotating-frame quadrature equations implemented here are

        dX_b = -gamma_m X_b - (G_minus - G_plus) Y_a
        dY_b = -gamma_m Y_b + (G_minus + G_plus) X_a
        dX_a = -kappa X_a - (G_minus - G_plus) Y_b + g1 X_c1 + g2 X_c2
        dY_a = -kappa Y_a + (G_minus + G_plus) X_b + g1 Y_c1 + g2 Y_c2
        dX_ci = -gamma_i X_ci + delta_ex_i Y_ci - g_i X_a
        dY_ci = -gamma_i Y_ci - delta_ex_i X_ci - g_i Y_a

    so the beam-splitter and two-mode-squeezing couplings enter only
    through the combinations G_minus + G_plus and G_minus - G_plus.

    Parameters
    ----------
    params : SystemParams
        Rates and exciton parameters, in units of omega_m.
    G_plus, G_minus : float
        Dressed couplings of the two tones, non-negative.

    Returns
    -------
    numpy.ndarray
        Real 8x8 matrix in the :data:`QUADRATURE_ORDER` basis.
    """
    G_plus = float(G_plus)
    G_minus = float(G_minus)
    if G_plus < 0 or G_minus < 0:
        raise DomainError(
            f"dressed couplings must be non-negative, got G_plus={G_plus}, G_minus={G_minus}"
        )

    gm = params.gamma_m
    kappa = params.kappa
    w1, w2 = params.excitons
    g_diff = G_minus - G_plus
    g_sum = G_minus + G_plus

    R = np.zeros((8, 8))
    # mechanical mode
    R[0, 0] = -gm
    R[0, 3] = -g_diff
    R[1, 1] = -gm
    R[1, 2] = g_sum
    # cavity mode
    R[2, 2] = -kappa
    R[2, 1] = -g_diff
    R[2, 4] = w1.g
    R[2, 6] = w2.g
    R[3, 3] = -kappa
    R[3, 0] = g_sum
    R[3, 5] = w1.g
    R[3, 7] = w2.g
    # exciton modes
    for idx, well in enumerate((w1, w2)):
        x = 4 + 2 * idx
        y = x + 1
        R[x, x] = -well.gamma
        R[x, y] = well.delta_ex
        R[x, 2] = -well.g
        R[y, y] = -well.gamma
        R[y, x] = -well.delta_ex
        R[y, 3] = -well.g
    return R


def build_diffusion(params: SystemParams) -> np.ndarray:
    """Diffusion matrix of the input noise in the quadrature basis.

    The mechanical bath is thermal with occupation n_th, the optical and
    exciton baths are vacuum, so the matrix is diagonal:

        diag(gamma_m (2 n_th + 1), gamma_m (2 n_th + 1),
             kappa, kappa, gamma_1, gamma_1, gamma_2, gamma_2)
    """
    mech = params.gamma_m * (2.0 * params.n_th + 1.0)
    w1, w2 = params.excitons
    return np.diag(
        [mech, mech, params.kappa, params.kappa, w1.gamma, w1.gamma, w2.gamma, w2.gamma]
    )


def build_linear_system(params: SystemParams, G_plus: float, G_minus: float) -> LinearSystem:
    """Bundle drift and diffusion built from the same parameter set."""
    return LinearSystem(
        drift=build_drift(params, G_plus, G_minus),
        diffusion=build_diffusion(params),
    )


def check_stability(drift: np.ndarray, eps: float = STABILITY_EPS) -> StabilityVerdict:
    """Classify a drift matrix by the sign of its spectral abscissa.

    Eigenvalues are computed with the LAPACK general solver.  The verdict
    is "stable" when the largest real part is below ``-eps``, "marginal"
    when it lies in [-eps, 0), and "unstable" otherwise.
    """
    drift = np.asarray(drift, dtype=float)
    if drift.ndim != 2 or drift.shape[0] != drift.shape[1]:
        raise DomainError(f"drift matrix must be square, got shape {drift.shape}")
    try:
        eigvals = np.linalg.eigvals(drift)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(
            f"eigenvalue iteration failed for drift matrix of shape {drift.shape}: {exc}\n"
            f"{drift!r}"
        ) from exc
    real_parts = tuple(sorted((float(v.real) for v in eigvals), reverse=True))
    margin = real_parts[0]
    return StabilityVerdict(stable=margin < -eps, eigen_real_parts=real_parts, margin=margin)
