"""Parameter sweeps over the steady-state squeezing pipeline.

A sweep walks one or two parameter grids, rebuilds the linear system at
every point, gates on stability, and records the squeezing figures for
the stable points.  Unstable or marginal points are kept in the output
with their flag and empty result fields; they never abort a sweep.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from datetime import datetime, timezone

import numpy as np

from .dynamics import STABILITY_EPS, build_diffusion, build_drift, check_stability
from .errors import ConfigError, SimulationError
from .model import POLE_THRESHOLD, ExcitonParams, SystemParams
from .squeezing import mechanical_block, minimize_variance
from .steadystate import RESIDUAL_RTOL, solve_lyapunov

#: Parameters a sweep axis may address.
SWEEPABLE = (
    "ratio",
    "G_minus",
    "kappa",
    "n_th",
    "g1",
    "g2",
    "gamma1",
    "gamma2",
    "delta_ex1",
    "delta_ex2",
)

#: Bundled figure presets.
FIGURE_IDS = ("fig2a", "fig2b", "fig2c", "fig3a", "fig3b", "fig3c")

_FIGURE_N_TH = {"a": 0.0, "b": 10.0, "c": 50.0}

# Hard domain constraints checked at axis construction; everything else
# is validated when the point's SystemParams is built.
_AXIS_FLOOR = {
    "ratio": ("non-negative", lambda v: v >= 0),
    "G_minus": ("non-negative", lambda v: v >= 0),
    "kappa": ("positive", lambda v: v > 0),
    "n_th": ("non-negative", lambda v: v >= 0),
    "gamma1": ("positive", lambda v: v > 0),
    "gamma2": ("positive", lambda v: v > 0),
}

_TOLERANCES = {
    "stability_margin": STABILITY_EPS,
    "lyapunov_residual_rtol": RESIDUAL_RTOL,
    "pole_threshold": POLE_THRESHOLD,
}


@dataclass(frozen=True)
class SweepAxis:
    """One swept parameter and its grid of values.

    The grid must be non-empty, finite, and strictly increasing.  Values
    that can never form a valid system (a negative ratio, a zero decay
    rate) are rejected here so a bad grid fails before any point runs.
    """

    parameter: str
    grid: tuple[float, ...]

    def __post_init__(self):
        if self.parameter not in SWEEPABLE:
            raise ConfigError(
                f"unknown sweep parameter {self.parameter!r}; expected one of {SWEEPABLE}"
            )
        grid = tuple(float(v) for v in self.grid)
        object.__setattr__(self, "grid", grid)
        if not grid:
            raise ConfigError(f"axis {self.parameter!r} has an empty grid")
        if not all(math.isfinite(v) for v in grid):
            raise ConfigError(f"axis {self.parameter!r} has non-finite grid values")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError(f"axis {self.parameter!r} grid must be strictly increasing")
        constraint = _AXIS_FLOOR.get(self.parameter)
        if constraint is not None:
            label, ok = constraint
            if not all(ok(v) for v in grid):
                raise ConfigError(f"axis {self.parameter!r} values must be {label}")


@dataclass(frozen=True)
class SweepSpec:
    """Base system plus one or two axes to sweep.

    ``G_minus`` and ``ratio`` fix the drive at points where they are not
    themselves swept; the two-mode-squeezing coupling at each point is
    G_plus = ratio * G_minus.
    """

    params: SystemParams
    G_minus: float
    axis1: SweepAxis
    axis2: SweepAxis | None = None
    ratio: float = 0.0

    def __post_init__(self):
        if self.G_minus < 0:
            raise ConfigError(f"G_minus must be non-negative, got {self.G_minus}")
        if self.ratio < 0:
            raise ConfigError(f"ratio must be non-negative, got {self.ratio}")
        if self.axis2 is not None and self.axis2.parameter == self.axis1.parameter:
            raise ConfigError(f"both axes sweep {self.axis1.parameter!r}")


@dataclass(frozen=True)
class SweepPoint:
    """Outcome at a single grid point.

    ``stability`` is "stable", "marginal", or "unstable".  The squeezing
    fields are populated only for stable points; ``error`` records a
    solver failure message if one occurred.
    """

    stability: str
    S_min: float | None = None
    dB: float | None = None
    V_q: float | None = None
    V_p: float | None = None
    V_qp: float | None = None
    theta_opt: float | None = None
    error: str | None = None


@dataclass(frozen=True)
class SweepResult:
    """All points of a sweep in row-major order (axis2 outer, axis1 inner)."""

    axis1: SweepAxis
    axis2: SweepAxis | None
    points: tuple[SweepPoint, ...]
    metadata: dict

    def iter_records(self):
        """Yield (axis1_value, axis2_value_or_None, point) in storage order."""
        if self.axis2 is None:
            for x1, pt in zip(self.axis1.grid, self.points):
                yield x1, None, pt
        else:
            idx = 0
            for x2 in self.axis2.grid:
                for x1 in self.axis1.grid:
                    yield x1, x2, self.points[idx]
                    idx += 1

    def db_matrix(self) -> np.ndarray:
        """Squeezing in dB on the grid, NaN at non-stable points.

        Shape is (len(axis2), len(axis1)), or (1, len(axis1)) for a 1D
        sweep, matching the plot-data layout of one row per axis2 value.
        """
        n1 = len(self.axis1.grid)
        n2 = len(self.axis2.grid) if self.axis2 is not None else 1
        out = np.full((n2, n1), np.nan)
        for k, pt in enumerate(self.points):
            if pt.dB is not None:
                out[k // n1, k % n1] = pt.dB
        return out


def _apply_override(params, G_minus, ratio, name, value):
    """Return (params, G_minus, ratio) with one swept parameter replaced."""
    if name == "ratio":
        return params, G_minus, value
    if name == "G_minus":
        return params, value, ratio
    if name == "kappa":
        return replace(params, kappa=value), G_minus, ratio
    if name == "n_th":
        return replace(params, n_th=value), G_minus, ratio
    idx = int(name[-1]) - 1
    field = name[:-1].rstrip("_")
    wells = list(params.excitons)
    wells[idx] = replace(wells[idx], **{field: value})
    return replace(params, excitons=tuple(wells)), G_minus, ratio


def evaluate_point(params: SystemParams, G_plus: float, G_minus: float) -> SweepPoint:
    """Run the full pipeline at one parameter point.

    Stability is checked first; only strictly stable points are solved.
    A solver failure at a stable point is recorded in ``error`` rather
    than raised, so sweeps always run to completion.
    """
    drift = build_drift(params, G_plus, G_minus)
    verdict = check_stability(drift)
    flag = verdict.classification
    if flag != "stable":
        return SweepPoint(stability=flag)
    try:
        cov = solve_lyapunov(drift, build_diffusion(params))
        sq = minimize_variance(mechanical_block(cov))
    except SimulationError as exc:
        return SweepPoint(stability=flag, error=str(exc))
    return SweepPoint(
        stability=flag,
        S_min=sq.S_min,
        dB=sq.dB,
        V_q=sq.V_q,
        V_p=sq.V_p,
        V_qp=sq.V_qp,
        theta_opt=sq.theta_opt,
    )


def run_sweep(spec: SweepSpec, threads: int = 1) -> SweepResult:
    """Evaluate every grid point of a sweep.

    Parameters
    ----------
    spec : SweepSpec
        Base system and axes.
    threads : int
        Worker threads; 1 runs serially, 0 uses the CPU count.  Results
        are identical either way because every point is independent and
        the output order is fixed by the grid.
    """
    if threads < 0:
        raise ConfigError(f"threads must be non-negative, got {threads}")

    if spec.axis2 is None:
        jobs = [((spec.axis1.parameter, x1),) for x1 in spec.axis1.grid]
    else:
        jobs = [
            ((spec.axis2.parameter, x2), (spec.axis1.parameter, x1))
            for x2 in spec.axis2.grid
            for x1 in spec.axis1.grid
        ]

    def run_one(overrides):
        params, g_minus, ratio = spec.params, spec.G_minus, spec.ratio
        for name, value in overrides:
            params, g_minus, ratio = _apply_override(params, g_minus, ratio, name, value)
        return evaluate_point(params, ratio * g_minus, g_minus)

    if threads == 1:
        points = [run_one(job) for job in jobs]
    else:
        workers = threads if threads else (os.cpu_count() or 1)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(run_one, jobs))

    metadata = {
        "base": asdict(spec.params),
        "G_minus": spec.G_minus,
        "ratio": spec.ratio,
        "axis1": {"parameter": spec.axis1.parameter, "grid": list(spec.axis1.grid)},
        "axis2": None
        if spec.axis2 is None
        else {"parameter": spec.axis2.parameter, "grid": list(spec.axis2.grid)},
        "tolerances": dict(_TOLERANCES),
        "points": len(points),
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    if all(pt.stability != "stable" for pt in points):
        metadata["warning"] = "no stable grid points"
        warnings.warn("sweep finished with no stable grid points", stacklevel=2)
    return SweepResult(
        axis1=spec.axis1, axis2=spec.axis2, points=tuple(points), metadata=metadata
    )


def figure_sweep_spec(figure_id: str, exciton_coupling: float = 2.0) -> SweepSpec:
    """Sweep specification behind one of the bundled figure presets.

    The shared base (rates in units of omega_m): G_minus = 0.1,
    gamma_m = 1e-5, two excitons with g = ``exciton_coupling``, gamma = 2,
    and detunings +1 and -1.  The trailing letter selects the thermal
    occupation: a -> 0, b -> 10, c -> 50.  The fig2 presets sweep the
    coupling ratio at kappa in {0.1, 1, 5}; the fig3 presets sweep a
    100x100 (ratio, kappa) grid.

    ``exciton_coupling`` defaults to 2.0 (twice the mechanical frequency);
    pass a different value to probe alternative coupling regimes.
    """
    if figure_id not in FIGURE_IDS:
        raise ConfigError(f"unknown figure id {figure_id!r}; expected one of {FIGURE_IDS}")
    params = SystemParams(
        kappa=0.1,
        gamma_m=1e-5,
        n_th=_FIGURE_N_TH[figure_id[-1]],
        excitons=(
            ExcitonParams(g=exciton_coupling, gamma=2.0, delta_ex=1.0),
            ExcitonParams(g=exciton_coupling, gamma=2.0, delta_ex=-1.0),
        ),
    )
    if figure_id.startswith("fig2"):
        axis1 = SweepAxis("ratio", tuple(np.linspace(0.0, 0.99, 200)))
        axis2 = SweepAxis("kappa", (0.1, 1.0, 5.0))
    else:
        axis1 = SweepAxis("ratio", tuple(np.linspace(0.0, 0.99, 100)))
        axis2 = SweepAxis("kappa", tuple(np.linspace(0.1, 5.0, 100)))
    return SweepSpec(params=params, G_minus=0.1, axis1=axis1, axis2=axis2)


def reproduce_figure(
    figure_id: str, exciton_coupling: float = 2.0, threads: int = 1
) -> SweepResult:
    """Run one bundled figure preset; see :func:`figure_sweep_spec`."""
    result = run_sweep(figure_sweep_spec(figure_id, exciton_coupling), threads=threads)
    result.metadata["figure"] = figure_id
    return result
