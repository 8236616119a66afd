"""Lineshapes, spectrum synthesis, Gaussian fits, and unit conversions."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st_h

from pumpsim import constants as cst
from pumpsim.raman import (
    RamanPulse,
    Spectrum,
    VelocityDistribution,
    doppler_shift,
    fit_gaussian,
    lineshape_fwhm,
    pi_pulse,
    rabi_lineshape,
    synth_copropagating,
    synth_counterpropagating,
    velocity_resolution,
    write_spectrum_csv,
)
from pumpsim.structure import Sublevel, ZeemanParams, state_index


def polarized_populations(m: int = 0) -> np.ndarray:
    pop = np.zeros(43)
    pop[state_index(Sublevel("g", 4, m))] = 1.0
    return pop


class TestRabiLineshape:
    def test_pi_pulse_full_transfer(self):
        assert rabi_lineshape(0.0, pi_pulse(0.007)) == pytest.approx(1.0, abs=1e-12)

    @given(st_h.floats(min_value=-5e4, max_value=5e4, allow_nan=False))
    @settings(max_examples=200, deadline=None)
    def test_even_and_bounded(self, delta):
        pulse = pi_pulse(0.007)
        p = rabi_lineshape(delta, pulse)
        assert 0.0 <= p <= 1.0
        assert p == pytest.approx(rabi_lineshape(-delta, pulse), abs=1e-15)

    def test_fwhm_times_tau(self):
        for tau in (0.001, 0.007, 0.020):
            product = lineshape_fwhm(pi_pulse(tau)) * tau
            assert product == pytest.approx(0.799, abs=0.005)

    def test_fwhm_against_grid_scan(self):
        # independent oracle: dense scan + linear interpolation of the
        # half-maximum crossing
        pulse = pi_pulse(0.007)
        grid = np.linspace(0.0, 400.0, 400_001)
        values = rabi_lineshape(grid, pulse)
        below = np.nonzero(values < 0.5)[0][0]
        x0, x1 = grid[below - 1], grid[below]
        y0, y1 = values[below - 1], values[below]
        half = x0 + (0.5 - y0) / (y1 - y0) * (x1 - x0)
        assert lineshape_fwhm(pulse) == pytest.approx(2 * half, rel=1e-6)

    def test_zero_area_pulse(self):
        pulse = RamanPulse(0.007, 0.0)
        assert rabi_lineshape(0.0, pulse) == 0.0
        with pytest.raises(ValueError):
            lineshape_fwhm(pulse)

    def test_pulse_validation(self):
        with pytest.raises(ValueError):
            RamanPulse(-1.0, 1.0)
        with pytest.raises(ValueError):
            RamanPulse(0.007, -1.0)
        with pytest.raises(ValueError):
            RamanPulse(0.007, 1.0, "diagonal")


class TestCopropagating:
    def test_polarized_single_line_at_zero(self):
        grid = np.arange(-2000.0, 2001.0, 1.0)
        spec = synth_copropagating(
            polarized_populations(), ZeemanParams(0.1), pi_pulse(0.007), grid
        )
        assert spec.signal[np.argmin(np.abs(grid))] == pytest.approx(1.0, abs=1e-9)
        # away from the line the signal falls off; no other line in range
        assert spec.signal[0] < 0.01

    def test_line_areas_proportional_to_populations(self):
        pop = np.zeros(43)
        pop[state_index(Sublevel("g", 4, 1))] = 2.0 / 3.0
        pop[state_index(Sublevel("g", 4, -1))] = 1.0 / 3.0
        zp = ZeemanParams(0.05)
        offset = 0.5 * (9.2740100783e-24 / 6.62607015e-34 * 1e-4) * 0.05
        grid = np.linspace(-offset - 2e3, offset + 2e3, 40001)
        spec = synth_copropagating(pop, zp, pi_pulse(0.007), grid)
        mid = grid.size // 2
        area_plus = np.trapezoid(spec.signal[mid:], grid[mid:])
        area_minus = np.trapezoid(spec.signal[:mid], grid[:mid])
        assert area_plus / area_minus == pytest.approx(2.0, abs=1e-3)

    def test_degenerate_field_composite_width(self):
        # at zero field all lines coincide: composite width equals the
        # single-line Fourier width
        pop = np.zeros(43)
        for m in range(-3, 4):
            pop[state_index(Sublevel("g", 4, m))] = 1.0 / 7.0
        pulse = pi_pulse(0.007)
        grid = np.arange(-2000.0, 2001.0, 1.0)
        spec = synth_copropagating(pop, ZeemanParams(0.0), pulse, grid)
        half = 0.5 * spec.signal.max()
        above = grid[spec.signal >= half]
        width = above[-1] - above[0]
        assert width == pytest.approx(lineshape_fwhm(pulse), abs=2.0)

    def test_area_linearity(self):
        # mixture spectrum equals the population-weighted sum of pure spectra
        zp = ZeemanParams(0.02)
        pulse = pi_pulse(0.007)
        grid = np.linspace(-20e3, 20e3, 2001)
        mix = np.zeros(43)
        parts = []
        for m, w in ((-1, 0.25), (0, 0.5), (2, 0.25)):
            mix[state_index(Sublevel("g", 4, m))] = w
            parts.append(w * synth_copropagating(
                polarized_populations(m), zp, pulse, grid).signal)
        combined = synth_copropagating(mix, zp, pulse, grid).signal
        assert np.max(np.abs(combined - sum(parts))) < 1e-6

    def test_field_fluctuation_smears_shifted_lines_only(self):
        zp = ZeemanParams(0.1)
        pulse = pi_pulse(0.007)
        grid = np.arange(-2000.0, 2001.0, 1.0)
        sharp = synth_copropagating(polarized_populations(0), zp, pulse, grid, 300e-6)
        assert sharp.signal[np.argmin(np.abs(grid))] == pytest.approx(1.0, abs=1e-9)
        offset = 69981.0
        grid_m1 = np.arange(offset - 2e3, offset + 2e3, 1.0)
        smeared = synth_copropagating(polarized_populations(1), zp, pulse, grid_m1, 300e-6)
        plain = synth_copropagating(polarized_populations(1), zp, pulse, grid_m1, 0.0)
        assert smeared.signal.max() < plain.signal.max()

    def test_geometry_checked(self):
        with pytest.raises(ValueError):
            synth_copropagating(
                polarized_populations(), ZeemanParams(0.1),
                pi_pulse(0.007, "counterpropagating"), np.linspace(-1e3, 1e3, 11),
            )


class TestDopplerShift:
    def test_one_recoil(self):
        # independent arithmetic: 2 v_r / lambda with v_r = h / (M lambda)
        expected = 2 * 6.62607015e-34 / (2.20694650e-25 * 852e-9) / 852e-9
        assert doppler_shift(1.0) == pytest.approx(expected, rel=1e-12)
        assert doppler_shift(1.0) == pytest.approx(8272.0, abs=1.0)

    def test_zero_and_linear(self):
        assert doppler_shift(0.0) == 0.0
        assert doppler_shift(2.5) == pytest.approx(2.5 * doppler_shift(1.0), rel=1e-12)

    def test_copropagating_geometry_cancels(self):
        assert doppler_shift(3.0, "copropagating") == 0.0


class TestCounterpropagating:
    GRID = np.arange(-250e3, 250e3 + 1.0, 250.0)

    def synth(self, sigma_vr):
        return synth_counterpropagating(
            polarized_populations(),
            VelocityDistribution(sigma_vr),
            pi_pulse(0.007, "counterpropagating"),
            self.GRID,
        )

    def test_width_at_4vr(self):
        fit = fit_gaussian(self.synth(4.0))
        expected = 2.3548200450309493 * 4.0 * cst.DOPPLER_HZ_PER_RECOIL
        assert fit.fwhm_hz == pytest.approx(expected, rel=1e-3)
        assert fit.fwhm_hz == pytest.approx(75.3e3, rel=0.05)

    def test_width_at_4p8vr(self):
        fit = fit_gaussian(self.synth(4.8))
        assert fit.fwhm_hz == pytest.approx(93.5e3, rel=1e-2)
        assert fit.fwhm_hz == pytest.approx(91.3e3, rel=0.05)

    def test_zero_spread_recovers_fourier_width(self):
        pulse = pi_pulse(0.007, "counterpropagating")
        grid = np.arange(-2000.0, 2001.0, 1.0)
        spec = synth_counterpropagating(
            polarized_populations(), VelocityDistribution(0.0), pulse, grid
        )
        half = 0.5 * spec.signal.max()
        above = grid[spec.signal >= half]
        assert above[-1] - above[0] == pytest.approx(
            lineshape_fwhm(pi_pulse(0.007)), abs=2.0
        )

    def test_convolution_widening(self):
        pulse = pi_pulse(0.007, "counterpropagating")
        grid = np.linspace(-50e3, 50e3, 4001)
        narrow = synth_counterpropagating(
            polarized_populations(), VelocityDistribution(0.0), pulse, grid
        )
        for sigma in (0.5, 1.0, 2.0):
            wide = synth_counterpropagating(
                polarized_populations(), VelocityDistribution(sigma), pulse, grid
            )
            def fwhm(spec):
                above = grid[spec.signal >= 0.5 * spec.signal.max()]
                return above[-1] - above[0]
            assert fwhm(wide) >= fwhm(narrow)

    def test_gaussian_limit_recovers_input_sigma(self):
        # Doppler width >= 20x Fourier width: fitted sigma within 1 percent
        fit = fit_gaussian(self.synth(1.0))
        assert fit.sigma_vr == pytest.approx(1.0, rel=0.01)

    def test_mean_velocity_shifts_line(self):
        spec = synth_counterpropagating(
            polarized_populations(),
            VelocityDistribution(1.0, mean=2.0),
            pi_pulse(0.007, "counterpropagating"),
            self.GRID,
        )
        fit = fit_gaussian(spec)
        assert fit.center_hz == pytest.approx(2.0 * cst.DOPPLER_HZ_PER_RECOIL, rel=1e-2)

    def test_negative_sigma_rejected(self):
        with pytest.raises(ValueError):
            VelocityDistribution(-1.0)


class TestGaussianFit:
    def test_noiseless_recovery(self):
        x = np.linspace(-1e5, 1e5, 2001)
        y = 0.7 * np.exp(-0.5 * ((x - 1234.0) / 20e3) ** 2)
        fit = fit_gaussian(Spectrum(x, y))
        assert fit.amplitude == pytest.approx(0.7, rel=1e-3)
        assert fit.center_hz == pytest.approx(1234.0, abs=20.0)
        assert fit.sigma_hz == pytest.approx(20e3, rel=1e-3)
        assert fit.rms_residual < 1e-12
        assert fit.converged

    def test_temperature_closure(self):
        # 4.0 and 4.8 recoil velocities map to 3.2 and 4.6 microkelvin
        for sigma_vr, temp in ((4.0, 3.2e-6), (4.8, 4.6e-6)):
            sigma_hz = sigma_vr * cst.DOPPLER_HZ_PER_RECOIL
            x = np.linspace(-6 * sigma_hz, 6 * sigma_hz, 1001)
            y = np.exp(-0.5 * (x / sigma_hz) ** 2)
            fit = fit_gaussian(Spectrum(x, y))
            assert fit.temperature_K == pytest.approx(temp, rel=0.03)

    def test_noise_robustness_hundred_seeds(self):
        x = np.linspace(-1e5, 1e5, 801)
        truth = np.exp(-0.5 * (x / 20e3) ** 2)
        sigmas = []
        for seed in range(100):
            rng = np.random.Generator(np.random.Philox(seed))
            noisy = np.clip(truth + rng.uniform(-0.01, 0.01, x.size), 0.0, None)
            sigmas.append(fit_gaussian(Spectrum(x, noisy)).sigma_hz)
        assert np.median(np.abs(np.array(sigmas) - 20e3)) / 20e3 < 0.02

    def test_too_few_samples_rejected(self):
        x = np.linspace(-1.0, 1.0, 5)
        with pytest.raises(ValueError):
            fit_gaussian(Spectrum(x, np.exp(-x**2)))

    def test_nonconvergence_reported_not_raised(self):
        x = np.linspace(-1e5, 1e5, 801)
        y = np.exp(-0.5 * (x / 20e3) ** 2)
        fit = fit_gaussian(Spectrum(x, y), max_nfev=2)
        assert not fit.converged
        assert np.isfinite(fit.sigma_hz)


class TestVelocityResolution:
    def test_measured_polarized_line(self):
        res = velocity_resolution(160.0)
        assert res.recoil_units == pytest.approx(0.0193, abs=2e-4)
        assert res.meters_per_second == pytest.approx(68e-6, abs=1e-6)
        assert 1 / res.recoil_units == pytest.approx(51.7, abs=0.2)

    def test_one_recoil_identity(self):
        res = velocity_resolution(cst.DOPPLER_HZ_PER_RECOIL)
        assert res.recoil_units == pytest.approx(1.0, rel=1e-12)

    def test_improvement_factor(self):
        wide = velocity_resolution(3500.0)
        narrow = velocity_resolution(160.0)
        factor = wide.recoil_units / narrow.recoil_units
        assert factor == pytest.approx(21.875, rel=1e-12)
        assert factor == pytest.approx(22.0, abs=0.5)

    def test_unit_closure(self):
        for v in (0.01, 0.4, 1.0, 5.0):
            res = velocity_resolution(doppler_shift(v))
            assert res.recoil_units == pytest.approx(v, rel=1e-12)

    def test_positive_width_required(self):
        with pytest.raises(ValueError):
            velocity_resolution(0.0)


def test_spectrum_csv_round_trip(tmp_path):
    grid = np.linspace(-1e3, 1e3, 11)
    spec = synth_copropagating(
        polarized_populations(), ZeemanParams(0.1), pi_pulse(0.007), grid
    )
    fit = fit_gaussian(
        Spectrum(grid, np.exp(-0.5 * (grid / 300.0) ** 2))
    )
    path = tmp_path / "spectrum.csv"
    write_spectrum_csv(spec, path, fit)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "detuning_hz,signal"
    data = [ln for ln in lines[1:] if not ln.startswith("#")]
    comments = [ln for ln in lines if ln.startswith("#")]
    assert len(data) == 11
    back = np.array([[float(v) for v in ln.split(",")] for ln in data])
    assert np.array_equal(back[:, 0], grid)
    assert np.array_equal(back[:, 1], spec.signal)
    assert any(ln.startswith("# sigma_hz=") for ln in comments)
