import numpy as np
import pytest

from qwsqueeze import (
    ConfigError,
    ExcitonParams,
    SweepAxis,
    SweepSpec,
    SystemParams,
    build_diffusion,
    build_drift,
    evaluate_point,
    figure_sweep_spec,
    integrate_to_steady_state,
    mechanical_block,
    minimize_variance,
    reproduce_figure,
    run_sweep,
)

from helpers import caption_params


def ratio_sweep(values, n_th=0.0, kappa=0.1, **kwargs):
    spec = SweepSpec(
        params=caption_params(kappa=kappa, n_th=n_th),
        G_minus=0.1,
        axis1=SweepAxis("ratio", tuple(values)),
    )
    return run_sweep(spec, **kwargs)


class TestAxisValidation:
    def test_unknown_parameter(self):
        with pytest.raises(ConfigError):
            SweepAxis("detuning", (0.0, 1.0))

    def test_empty_grid(self):
        with pytest.raises(ConfigError):
            SweepAxis("ratio", ())

    def test_single_point_grid_allowed(self):
        axis = SweepAxis("ratio", (0.5,))
        assert axis.grid == (0.5,)

    def test_non_increasing_grid(self):
        with pytest.raises(ConfigError):
            SweepAxis("ratio", (0.0, 0.5, 0.5))
        with pytest.raises(ConfigError):
            SweepAxis("ratio", (0.5, 0.0))

    def test_non_finite_grid(self):
        with pytest.raises(ConfigError):
            SweepAxis("ratio", (0.0, float("nan")))

    def test_domain_floors(self):
        with pytest.raises(ConfigError):
            SweepAxis("ratio", (-0.1, 0.5))
        with pytest.raises(ConfigError):
            SweepAxis("kappa", (0.0, 1.0))
        with pytest.raises(ConfigError):
            SweepAxis("n_th", (-1.0, 10.0))
        with pytest.raises(ConfigError):
            SweepAxis("gamma1", (0.0, 2.0))

    def test_spec_validation(self):
        axis = SweepAxis("ratio", (0.0, 0.5))
        with pytest.raises(ConfigError):
            SweepSpec(params=caption_params(), G_minus=-0.1, axis1=axis)
        with pytest.raises(ConfigError):
            SweepSpec(params=caption_params(), G_minus=0.1, axis1=axis, ratio=-1.0)
        with pytest.raises(ConfigError):
            SweepSpec(
                params=caption_params(),
                G_minus=0.1,
                axis1=axis,
                axis2=SweepAxis("ratio", (0.1, 0.2)),
            )


class TestEvaluatePoint:
    def test_vacuum_point(self):
        pt = evaluate_point(caption_params(), 0.0, 0.1)
        assert pt.stability == "stable"
        assert pt.S_min == pytest.approx(1.0, abs=1e-6)
        assert pt.dB == pytest.approx(0.0, abs=1e-5)
        assert pt.error is None

    def test_unstable_point_has_no_figures(self):
        pt = evaluate_point(caption_params(), 0.2, 0.1)
        assert pt.stability == "unstable"
        assert pt.S_min is None and pt.dB is None and pt.theta_opt is None

    def test_marginal_point_flagged_distinctly(self):
        # with the drive off, the slowest eigenvalue is exactly -gamma_m;
        # gamma_m below the stability epsilon is detected as marginal
        params = SystemParams(
            kappa=1.0,
            gamma_m=1e-13,
            excitons=(ExcitonParams(2.0, 2.0, 1.0), ExcitonParams(2.0, 2.0, -1.0)),
        )
        pt = evaluate_point(params, 0.0, 0.0)
        assert pt.stability == "marginal"
        assert pt.S_min is None


class TestRunSweep:
    def test_single_point_vacuum_grid(self):
        result = ratio_sweep([0.0])
        assert len(result.points) == 1
        pt = result.points[0]
        assert pt.S_min == pytest.approx(1.0, abs=1e-6)
        # same point through the independent time-domain route
        p = caption_params()
        V = integrate_to_steady_state(build_drift(p, 0.0, 0.1), build_diffusion(p))
        sq = minimize_variance(mechanical_block(V))
        assert sq.S_min == pytest.approx(pt.S_min, abs=1e-6)

    def test_interior_squeezing_maximum(self):
        result = ratio_sweep(np.linspace(0.0, 0.99, 100))
        db = result.db_matrix()[0]
        best = int(np.nanargmax(db))
        assert db[best] > 3.0
        assert 0 < best < len(db) - 1

    def test_thermal_monotonicity(self):
        ratios = (0.0, 0.3, 0.6, 0.9)
        smin = {}
        for n_th in (0.0, 10.0, 50.0):
            result = ratio_sweep(ratios, n_th=n_th)
            smin[n_th] = [pt.S_min for pt in result.points]
        for i in range(len(ratios)):
            assert smin[0.0][i] <= smin[10.0][i] <= smin[50.0][i]

    def test_deterministic_across_runs(self):
        a = ratio_sweep(np.linspace(0.0, 0.9, 25))
        b = ratio_sweep(np.linspace(0.0, 0.9, 25))
        assert a.points == b.points

    def test_parallel_matches_serial(self):
        values = np.linspace(0.0, 0.99, 40)
        serial = ratio_sweep(values, threads=1)
        threaded = ratio_sweep(values, threads=4)
        auto = ratio_sweep(values, threads=0)
        assert serial.points == threaded.points == auto.points

    def test_all_unstable_warns_but_completes(self):
        with pytest.warns(UserWarning, match="no stable"):
            result = ratio_sweep([1.5, 2.0])
        assert result.metadata["warning"] == "no stable grid points"
        assert [pt.stability for pt in result.points] == ["unstable", "unstable"]
        assert all(pt.S_min is None for pt in result.points)

    def test_mixed_stability_does_not_warn(self):
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("error")
            result = ratio_sweep([0.0, 2.0])
        assert [pt.stability for pt in result.points] == ["stable", "unstable"]
        assert "warning" not in result.metadata

    def test_two_axis_order_and_shape(self):
        spec = SweepSpec(
            params=caption_params(),
            G_minus=0.1,
            axis1=SweepAxis("ratio", (0.0, 0.4, 0.8)),
            axis2=SweepAxis("kappa", (0.1, 1.0)),
        )
        result = run_sweep(spec)
        assert len(result.points) == 6
        records = list(result.iter_records())
        # axis2 is the outer loop
        assert [(x1, x2) for x1, x2, _ in records] == [
            (0.0, 0.1),
            (0.4, 0.1),
            (0.8, 0.1),
            (0.0, 1.0),
            (0.4, 1.0),
            (0.8, 1.0),
        ]
        assert result.db_matrix().shape == (2, 3)

    def test_sweeping_other_parameters(self):
        spec = SweepSpec(
            params=caption_params(),
            G_minus=0.1,
            axis1=SweepAxis("G_minus", (0.05, 0.1, 0.2)),
            ratio=0.5,
        )
        result = run_sweep(spec)
        values = [pt.S_min for pt in result.points]
        assert all(v is not None for v in values)
        assert len(set(values)) == 3  # the coupling really changes the answer

        spec = SweepSpec(
            params=caption_params(),
            G_minus=0.1,
            axis1=SweepAxis("delta_ex1", (-1.0, 0.0, 1.0)),
            ratio=0.5,
        )
        result = run_sweep(spec)
        assert len({pt.S_min for pt in result.points}) == 3

    def test_metadata_contents(self):
        result = ratio_sweep([0.0, 0.5])
        meta = result.metadata
        assert meta["points"] == 2
        assert meta["axis1"]["parameter"] == "ratio"
        assert meta["base"]["kappa"] == 0.1
        assert meta["G_minus"] == 0.1
        assert set(meta["tolerances"]) == {
            "stability_margin",
            "lyapunov_residual_rtol",
            "pole_threshold",
        }
        assert "timestamp" in meta

    def test_thread_count_validation(self):
        with pytest.raises(ConfigError):
            ratio_sweep([0.0], threads=-1)


class TestFigurePresets:
    def test_fig2_spec_structure(self):
        spec = figure_sweep_spec("fig2a")
        assert spec.axis1.parameter == "ratio"
        assert len(spec.axis1.grid) == 200
        assert spec.axis1.grid[0] == 0.0
        assert spec.axis1.grid[-1] == pytest.approx(0.99)
        assert spec.axis2.parameter == "kappa"
        assert spec.axis2.grid == (0.1, 1.0, 5.0)
        assert spec.params.n_th == 0.0
        assert spec.G_minus == 0.1

    def test_fig3_spec_structure(self):
        spec = figure_sweep_spec("fig3b")
        assert len(spec.axis1.grid) == 100
        assert len(spec.axis2.grid) == 100
        assert spec.axis2.grid[0] == pytest.approx(0.1)
        assert spec.axis2.grid[-1] == pytest.approx(5.0)
        assert spec.params.n_th == 10.0

    def test_thermal_presets(self):
        assert figure_sweep_spec("fig2c").params.n_th == 50.0
        assert figure_sweep_spec("fig3a").params.n_th == 0.0

    def test_alternative_exciton_coupling(self):
        spec = figure_sweep_spec("fig2a", exciton_coupling=1.0)
        assert spec.params.excitons[0].g == 1.0

    def test_unknown_figure_id(self):
        with pytest.raises(ConfigError):
            figure_sweep_spec("fig4a")
        with pytest.raises(ConfigError):
            reproduce_figure("fig2d")

    def test_reproduce_figure_smoke(self):
        result = reproduce_figure("fig2a")
        assert result.metadata["figure"] == "fig2a"
        assert len(result.points) == 600
        db = result.db_matrix()
        assert db.shape == (3, 200)
        # the ratio = 0 endpoint of every curve sits at the vacuum level
        np.testing.assert_allclose(db[:, 0], 0.0, atol=1e-4)
