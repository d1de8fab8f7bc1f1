"""Steady-state covariance of the linearized dynamics.

Two independent routes to the same object live here.  The production
solver :func:`solve_lyapunov` vectorizes R V + V R^T + N = 0 with
Kronecker products and solves the resulting linear system by LU with
partial pivoting plus iterative refinement.  The cross-check
:func:`integrate_to_steady_state` integrates dV/dt = R V + V R^T + N
forward with a fixed-step RK4 scheme until dV/dt is negligible.  For this
affine equation the RK4 fixed point coincides with the exact steady state,
so the integrator's accuracy is set by its stopping tolerance rather than
by the step size.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .dynamics import check_stability
from .errors import (
    ConditioningError,
    ConditioningWarning,
    ConvergenceError,
    DomainError,
    StabilityError,
)

#: Residual contract: ||R V + V R^T + N||_F <= RESIDUAL_RTOL * ||N||_F.
RESIDUAL_RTOL = 1e-10

#: Single-mode Heisenberg bound det(block) >= 1/4 is enforced with this slack.
HEISENBERG_SLACK = 1e-9

#: Defaults of the time integrator.
DEFAULT_DT = 1e-2
DEFAULT_DVDT_TOL = 1e-12
MAX_STEPS = 10_000_000

_REFINEMENT_ROUNDS = 3


def lyapunov_residual(drift: np.ndarray, diffusion: np.ndarray, cov: np.ndarray) -> float:
    """Frobenius norm of R V + V R^T + N."""
    res = drift @ cov + cov @ drift.T + diffusion
    return float(np.linalg.norm(res, "fro"))


def solve_lyapunov(drift: np.ndarray, diffusion: np.ndarray) -> np.ndarray:
    """Steady-state covariance from the continuous Lyapunov equation.

    Parameters
    ----------
    drift : numpy.ndarray
        Square real drift matrix R.  Must be strictly stable; anything
        else is refused because the Lyapunov solution would not describe a
        physical steady state.
    diffusion : numpy.ndarray
        Symmetric positive semidefinite diffusion matrix N.

    Returns
    -------
    numpy.ndarray
        Symmetric covariance V with
        ||R V + V R^T + N||_F <= RESIDUAL_RTOL * ||N||_F.

    Raises
    ------
    StabilityError
        If the drift matrix is marginal or unstable.
    ConditioningError
        If the vectorized system is singular or refinement cannot reach
        the residual contract.
    """
    drift = np.asarray(drift, dtype=float)
    diffusion = np.asarray(diffusion, dtype=float)
    verdict = check_stability(drift)
    if not verdict.stable:
        raise StabilityError(
            f"drift matrix is {verdict.classification} "
            f"(spectral abscissa {verdict.margin:.6e}); no steady state",
            verdict=verdict,
        )
    if diffusion.shape != drift.shape:
        raise DomainError(
            f"diffusion shape {diffusion.shape} does not match drift shape {drift.shape}"
        )

    n = drift.shape[0]
    eye = np.eye(n)
    # vec is column-major so that K vec(V) = vec(R V + V R^T)
    K = np.kron(eye, drift) + np.kron(drift, eye)
    try:
        lu = lu_factor(K)
    except np.linalg.LinAlgError as exc:
        raise ConditioningError(f"vectorized Lyapunov system is singular: {exc}") from exc

    vec = lu_solve(lu, -diffusion.flatten(order="F"))
    V = vec.reshape((n, n), order="F")

    scale = max(float(np.linalg.norm(V, "fro")), np.finfo(float).tiny)
    asymmetry = float(np.linalg.norm(V - V.T, "fro")) / scale
    if asymmetry > 1e-8:
        warnings.warn(
            f"Lyapunov solution asymmetry {asymmetry:.3e} exceeds 1e-8; "
            "the vectorized system is poorly conditioned",
            ConditioningWarning,
            stacklevel=2,
        )
    V = 0.5 * (V + V.T)

    target = RESIDUAL_RTOL * float(np.linalg.norm(diffusion, "fro"))
    residual = lyapunov_residual(drift, diffusion, V)
    for _ in range(_REFINEMENT_ROUNDS):
        if residual <= target:
            return V
        res_mat = drift @ V + V @ drift.T + diffusion
        correction = lu_solve(lu, -res_mat.flatten(order="F")).reshape((n, n), order="F")
        V = V + correction
        V = 0.5 * (V + V.T)
        residual = lyapunov_residual(drift, diffusion, V)
    # "not <=" instead of ">" so a NaN residual cannot slip through
    if not residual <= target:
        raise ConditioningError(
            f"iterative refinement stalled: residual {residual:.3e} "
            f"above contract {target:.3e}"
        )
    return V


def _rk4_steps(R, N, V, dt, max_steps, tol):
    """Fixed-step RK4 on dV/dt = R V + V R^T + N with hand-rolled matmuls.

    Written in loop form so numba can compile it; runs unchanged (slowly)
    as plain Python when numba is unavailable.  Returns the final iterate,
    the number of steps taken, the last ||dV/dt||_F, and a convergence
    flag.  The derivative of the current iterate is the k1 stage, so the
    stopping test costs nothing extra.
    """
    n = R.shape[0]
    k1 = np.empty((n, n))
    k2 = np.empty((n, n))
    k3 = np.empty((n, n))
    k4 = np.empty((n, n))
    tmp = np.empty((n, n))

    def deriv(W, out):
        for i in range(n):
            for j in range(n):
                acc = N[i, j]
                for k in range(n):
                    acc += R[i, k] * W[k, j] + W[i, k] * R[j, k]
                out[i, j] = acc

    steps = 0
    res = 0.0
    for _ in range(max_steps):
        deriv(V, k1)
        res = 0.0
        for i in range(n):
            for j in range(n):
                res += k1[i, j] * k1[i, j]
        res = math.sqrt(res)
        if res <= tol:
            return V, steps, res, True
        for i in range(n):
            for j in range(n):
                tmp[i, j] = V[i, j] + 0.5 * dt * k1[i, j]
        deriv(tmp, k2)
        for i in range(n):
            for j in range(n):
                tmp[i, j] = V[i, j] + 0.5 * dt * k2[i, j]
        deriv(tmp, k3)
        for i in range(n):
            for j in range(n):
                tmp[i, j] = V[i, j] + dt * k3[i, j]
        deriv(tmp, k4)
        for i in range(n):
            for j in range(n):
                V[i, j] += dt / 6.0 * (k1[i, j] + 2.0 * k2[i, j] + 2.0 * k3[i, j] + k4[i, j])
        steps += 1
    deriv(V, k1)
    res = 0.0
    for i in range(n):
        for j in range(n):
            res += k1[i, j] * k1[i, j]
    return V, steps, math.sqrt(res), res <= tol


_kernel = None


def _get_kernel():
    """Compile the RK4 kernel on first use; fall back to plain Python."""
    global _kernel
    if _kernel is None:
        try:
            from numba import njit
        except ImportError:
            _kernel = _rk4_steps
        else:
            _kernel = njit(cache=True)(_rk4_steps)
    return _kernel


def integrate_to_steady_state(
    drift: np.ndarray,
    diffusion: np.ndarray,
    v0: np.ndarray | None = None,
    dt: float = DEFAULT_DT,
    t_max: float | None = None,
    tol: float = DEFAULT_DVDT_TOL,
) -> np.ndarray:
    """Steady-state covariance by forward time integration.

    This is the slow, independent cross-check for :func:`solve_lyapunov`.

    Parameters
    ----------
    drift, diffusion : numpy.ndarray
        Same matrices as for :func:`solve_lyapunov`; the drift must be
        strictly stable.
    v0 : numpy.ndarray, optional
        Initial covariance.  Defaults to the vacuum, identity/2.
    dt : float
        RK4 step, strictly positive.
    t_max : float, optional
        Integration horizon.  Defaults to ten times the slowest diagonal
        damping time of the drift, and is always capped at
        :data:`MAX_STEPS` steps.
    tol : float
        Stop once ||dV/dt||_F falls at or below this value.

    Raises
    ------
    ConvergenceError
        If the horizon is exhausted first.  The error carries the final
        residual and the last iterate.
    """
    drift = np.ascontiguousarray(drift, dtype=float)
    diffusion = np.ascontiguousarray(diffusion, dtype=float)
    if dt <= 0:
        raise DomainError(f"time step must be positive, got {dt}")
    if tol <= 0:
        raise DomainError(f"stopping tolerance must be positive, got {tol}")
    verdict = check_stability(drift)
    if not verdict.stable:
        raise StabilityError(
            f"drift matrix is {verdict.classification} "
            f"(spectral abscissa {verdict.margin:.6e}); integration would not settle",
            verdict=verdict,
        )

    if v0 is None:
        V = 0.5 * np.eye(drift.shape[0])
    else:
        V = np.array(v0, dtype=float, copy=True)
        if V.shape != drift.shape:
            raise DomainError(f"v0 shape {V.shape} does not match drift shape {drift.shape}")

    if t_max is None:
        rates = -np.diag(drift)
        if np.min(rates) <= 0:
            raise DomainError(
                "default horizon needs strictly negative drift diagonal; pass t_max"
            )
        t_max = 10.0 / float(np.min(rates))
    if t_max <= 0:
        raise DomainError(f"integration horizon must be positive, got {t_max}")

    max_steps = min(int(math.ceil(t_max / dt)), MAX_STEPS)
    kernel = _get_kernel()
    V, steps, res, converged = kernel(drift, diffusion, V, float(dt), max_steps, float(tol))
    V = 0.5 * (V + V.T)
    if not converged:
        raise ConvergenceError(
            f"integration hit the horizon after {steps} steps with "
            f"||dV/dt||_F = {res:.3e} > {tol:.1e}",
            residual=float(res),
            result=V,
        )
    return V


def single_mode_determinants(cov: np.ndarray) -> np.ndarray:
    """Determinants of the per-mode 2x2 diagonal blocks."""
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] % 2:
        raise DomainError(f"covariance must be square with even size, got {cov.shape}")
    dets = []
    for m in range(cov.shape[0] // 2):
        block = cov[2 * m : 2 * m + 2, 2 * m : 2 * m + 2]
        dets.append(float(np.linalg.det(block)))
    return np.array(dets)


def check_physical(
    cov: np.ndarray,
    sym_rtol: float = 1e-12,
    det_slack: float = HEISENBERG_SLACK,
) -> None:
    """Validate covariance invariants, raising DomainError on violation.

    Checks symmetry to ``sym_rtol`` (relative, Frobenius), strict positive
    definiteness, and the single-mode Heisenberg bound
    det(block) >= 1/4 - det_slack for every 2x2 diagonal block.
    """
    cov = np.asarray(cov, dtype=float)
    scale = max(float(np.linalg.norm(cov, "fro")), np.finfo(float).tiny)
    asymmetry = float(np.linalg.norm(cov - cov.T, "fro")) / scale
    if asymmetry > sym_rtol:
        raise DomainError(f"covariance asymmetry {asymmetry:.3e} exceeds {sym_rtol:.1e}")
    eigmin = float(np.min(np.linalg.eigvalsh(0.5 * (cov + cov.T))))
    if eigmin <= 0:
        raise DomainError(f"covariance is not positive definite (lambda_min = {eigmin:.3e})")
    dets = single_mode_determinants(cov)
    floor = 0.25 - det_slack
    if np.min(dets) < floor:
        raise DomainError(
            f"single-mode determinant {np.min(dets):.12f} violates the "
            f"Heisenberg floor {floor:.12f}"
        )
