"""Depolarization estimation: round trips, residuals, ingestion."""

import numpy as np
import pytest

from pumpsim.fitting import (
    DataError,
    FitResult,
    ObservationSeries,
    fit_depolarization,
    load_observations,
    residual_report,
    simulate_observable,
)
from pumpsim.kinetics import beam
from pumpsim.structure import Sublevel

TIMES = np.linspace(1e-4, 4.8e-3, 60)


def fig5_templates():
    return [beam(4, 4, 0.019, -0.5), beam(3, 4, 0.023, 0.0)]


@pytest.fixture(scope="module")
def truth_m0():
    return simulate_observable(fig5_templates(), 0.013, TIMES)


@pytest.fixture(scope="module")
def truth_m1():
    return simulate_observable(
        fig5_templates(), 0.013, TIMES, observable=Sublevel("g", 4, 1)
    )


class TestFit:
    def test_noiseless_round_trip(self, truth_m0):
        result = fit_depolarization(
            [ObservationSeries(TIMES, truth_m0)], fig5_templates()
        )
        assert abs(result.depolarization - 0.013) < 1e-4
        assert result.converged
        assert not result.weakly_identified
        assert result.sse < 1e-9

    def test_zero_contamination_recovered(self):
        clean = simulate_observable(fig5_templates(), 0.0, TIMES)
        result = fit_depolarization(
            [ObservationSeries(TIMES, clean)], fig5_templates()
        )
        assert result.depolarization < 1e-3

    def test_joint_two_series_fit(self, truth_m0, truth_m1):
        series = [
            ObservationSeries(TIMES, truth_m0, observable=Sublevel("g", 4, 0)),
            ObservationSeries(TIMES, truth_m1, observable=Sublevel("g", 4, 1)),
        ]
        result = fit_depolarization(series, fig5_templates())
        assert abs(result.depolarization - 0.013) < 1e-4

    def test_noise_robustness_smoke(self, truth_m0):
        estimates = []
        for seed in range(8):
            rng = np.random.Generator(np.random.Philox(seed))
            noisy = np.clip(truth_m0 + rng.uniform(-0.02, 0.02, truth_m0.size), 0, 1)
            r = fit_depolarization([ObservationSeries(TIMES, noisy)], fig5_templates())
            estimates.append(r.depolarization)
        median = float(np.median(estimates))
        assert abs(median - 0.013) / 0.013 < 0.35  # full study in acceptance

    def test_weight_rescaling_invariance(self, truth_m0):
        rng = np.random.Generator(np.random.Philox(77))
        noisy = np.clip(truth_m0 + rng.uniform(-0.01, 0.01, truth_m0.size), 0, 1)
        w = np.linspace(0.5, 2.0, TIMES.size)
        r1 = fit_depolarization(
            [ObservationSeries(TIMES, noisy, w)], fig5_templates()
        )
        r2 = fit_depolarization(
            [ObservationSeries(TIMES, noisy, 7.3 * w)], fig5_templates()
        )
        assert r1.depolarization == pytest.approx(r2.depolarization, abs=2e-5)

    def test_amplitude_scale_solved_in_closed_form(self, truth_m0):
        scaled = 0.82 * truth_m0
        result = fit_depolarization(
            [ObservationSeries(TIMES, scaled)], fig5_templates(), fit_scale=True
        )
        assert result.scales is not None
        assert result.scales[0] == pytest.approx(0.82, abs=1e-3)
        assert abs(result.depolarization - 0.013) < 5e-4

    def test_empty_series_rejected(self):
        with pytest.raises(ValueError):
            fit_depolarization([], fig5_templates())

    def test_result_shape(self, truth_m0):
        result = fit_depolarization(
            [ObservationSeries(TIMES, truth_m0)], fig5_templates()
        )
        assert isinstance(result, FitResult)
        assert result.iterations > 0


class TestResidualReport:
    def test_perfect_data_zero_residuals(self, truth_m0):
        report = residual_report([ObservationSeries(TIMES, truth_m0)],
                                 fig5_templates(), 0.013)
        assert np.max(np.abs(report.residuals[0])) < 1e-10

    def test_optimum_beats_bracket_endpoints(self, truth_m0):
        rng = np.random.Generator(np.random.Philox(5))
        noisy = np.clip(truth_m0 + rng.uniform(-0.01, 0.01, truth_m0.size), 0, 1)
        series = [ObservationSeries(TIMES, noisy)]
        result = fit_depolarization(series, fig5_templates())
        sse_at = lambda a: residual_report(series, fig5_templates(), a).sse
        assert result.sse <= sse_at(0.0)
        assert result.sse <= sse_at(0.2)

    def test_detection_floor_series_reported(self, truth_m1):
        # the m=1 level stays close to zero; residuals must come back
        # without complaint
        report = residual_report(
            [ObservationSeries(TIMES, truth_m1, observable=Sublevel("g", 4, 1))],
            fig5_templates(),
            0.013,
        )
        assert report.residuals[0].shape == TIMES.shape
        assert report.sse < 1e-9


class TestIngestion:
    def test_round_trip(self, tmp_path, truth_m0):
        path = tmp_path / "obs.csv"
        rows = ["# observable = g4_m0", "# comment line"]
        rows += [f"{t:.9g},{v:.9g},1.0" for t, v in zip(TIMES, truth_m0)]
        path.write_text("\n".join(rows) + "\n")
        series = load_observations(path)
        assert series.observable == Sublevel("g", 4, 0)
        assert np.allclose(series.times, TIMES)
        assert series.weights is not None

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("# nothing here\n")
        with pytest.raises(DataError, match="no data rows"):
            load_observations(path)

    def test_parse_error_names_file_and_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("0.001,0.1\n0.002,oops\n")
        with pytest.raises(DataError, match=r"bad\.csv:2"):
            load_observations(path)

    def test_non_monotonic_times_rejected(self, tmp_path):
        path = tmp_path / "order.csv"
        path.write_text("0.002,0.1\n0.001,0.2\n")
        with pytest.raises(DataError):
            load_observations(path)

    def test_bad_observable_label(self, tmp_path):
        path = tmp_path / "label.csv"
        path.write_text("# observable = q9_m0\n0.001,0.1\n")
        with pytest.raises(DataError, match=r"label\.csv:1"):
            load_observations(path)
