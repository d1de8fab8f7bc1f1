"""Minimized mechanical quadrature variance extracted from a covariance.

The figure of merit is S_min = 2 * min_theta <Q(theta)^2> where
Q(theta) = X cos(theta) + Y sin(theta).  Vacuum gives S_min = 1, so values
below 1 mean squeezing and below 1/2 mean squeezing past the 3 dB level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

#: Anisotropy below this (relative) is treated as an exact tie.
_TIE_EPS = 1e-15


@dataclass(frozen=True)
class SqueezingResult:
    """Mechanical block variances and the minimized quadrature variance.

    ``S_min`` equals twice the smallest eigenvalue of the 2x2 block,
    ``theta_opt`` is the quadrature angle realizing it, folded into
    [0, pi), and ``dB`` is -10*log10(S_min) so positive values mean
    squeezing below vacuum.
    """

    V_q: float
    V_p: float
    V_qp: float
    S_min: float
    theta_opt: float
    dB: float


def mechanical_block(cov: np.ndarray) -> np.ndarray:
    """Copy of the mechanical 2x2 block (leading block of the ordering)."""
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] < 2 or cov.shape[1] < 2:
        raise DomainError(f"covariance of shape {cov.shape} has no 2x2 leading block")
    return cov[:2, :2].copy()


def _validated(block: np.ndarray) -> tuple[float, float, float]:
    block = np.asarray(block, dtype=float)
    if block.shape != (2, 2):
        raise DomainError(f"expected a 2x2 block, got shape {block.shape}")
    v_q = float(block[0, 0])
    v_p = float(block[1, 1])
    off = float(block[0, 1])
    scale = max(abs(v_q), abs(v_p), abs(off), 1.0)
    if abs(block[0, 1] - block[1, 0]) > 1e-10 * scale:
        raise DomainError(f"block is not symmetric: off-diagonals {block[0,1]} vs {block[1,0]}")
    if v_q <= 0 or v_p <= 0 or v_q * v_p - off * off <= 0:
        raise DomainError("block is not positive definite")
    return v_q, v_p, off


def quadrature_variance(block: np.ndarray, theta: float) -> float:
    """Variance of Q(theta) = X cos(theta) + Y sin(theta)."""
    v_q, v_p, v_qp = _validated(block)
    c = math.cos(theta)
    s = math.sin(theta)
    return v_q * c * c + v_p * s * s + 2.0 * v_qp * s * c


def minimize_variance(block: np.ndarray) -> SqueezingResult:
    """Closed-form minimum of the quadrature variance over the angle.

    Writing the variance as mean + A*cos(2*theta - phi) with
    A = sqrt(((V_q - V_p)/2)^2 + V_qp^2) gives

        S_min = V_q + V_p - sqrt((V_q - V_p)^2 + 4 V_qp^2)

    which also equals twice the smallest eigenvalue of the block.  The
    optimal angle is (phi + pi)/2 folded into [0, pi); an isotropic block
    has no preferred angle and reports theta_opt = 0.
    """
    v_q, v_p, v_qp = _validated(block)
    half_diff = 0.5 * (v_q - v_p)
    amp = math.hypot(half_diff, v_qp)
    s_min = v_q + v_p - 2.0 * amp
    if amp <= _TIE_EPS * max(abs(v_q), abs(v_p), 1.0):
        theta = 0.0
    else:
        phi = math.atan2(v_qp, half_diff)
        theta = math.fmod(0.5 * (phi + math.pi), math.pi)
        if theta < 0:
            theta += math.pi
    return SqueezingResult(
        V_q=v_q,
        V_p=v_p,
        V_qp=v_qp,
        S_min=s_min,
        theta_opt=theta,
        dB=to_decibel(s_min),
    )


def to_decibel(s_min: float) -> float:
    """Squeezing in decibels, -10*log10(S_min); positive below vacuum."""
    if s_min <= 0:
        raise DomainError(f"S_min must be positive, got {s_min}")
    return -10.0 * math.log10(s_min)
