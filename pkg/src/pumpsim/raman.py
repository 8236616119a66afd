"""Raman velocimetry spectra.

Copropagating spectra are velocity-insensitive and read the individual
F=4 sublevel populations through the sigma+/sigma+ ladder; counterpropagating
spectra convolve the same composite line with the Doppler-shifted velocity
distribution. A square two-photon pulse gives the Fourier-limited Rabi
lineshape used for every line.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, least_squares

from . import constants as cst
from .structure import Sublevel, ZeemanParams, raman_line_offset, state_index

GEOMETRIES = ("copropagating", "counterpropagating")


@dataclass(frozen=True)
class RamanPulse:
    """Square two-photon pulse: duration (s), Rabi frequency (rad/s)."""

    duration: float
    rabi_frequency: float
    geometry: str = "copropagating"

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError("pulse duration must be positive")
        if self.rabi_frequency < 0:
            raise ValueError("Rabi frequency must be nonnegative")
        if self.geometry not in GEOMETRIES:
            raise ValueError(f"geometry must be one of {GEOMETRIES}")


def pi_pulse(duration: float, geometry: str = "copropagating") -> RamanPulse:
    """Pulse area pi: full transfer on resonance."""
    return RamanPulse(duration, np.pi / duration, geometry)


@dataclass(frozen=True)
class VelocityDistribution:
    """Gaussian velocity distribution in units of the recoil velocity."""

    sigma: float
    mean: float = 0.0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("velocity spread must be nonnegative")


@dataclass
class Spectrum:
    detunings: np.ndarray  # Hz, strictly increasing
    signal: np.ndarray

    def __post_init__(self):
        self.detunings = np.asarray(self.detunings, dtype=float)
        self.signal = np.asarray(self.signal, dtype=float)
        if self.detunings.shape != self.signal.shape:
            raise ValueError("detunings and signal must have the same length")
        if self.detunings.size > 1 and np.any(np.diff(self.detunings) <= 0):
            raise ValueError("detunings must be strictly increasing")


def rabi_lineshape(delta, pulse: RamanPulse):
    """Transfer probability of a square pulse at two-photon detuning delta
    (Hz, scalar or array): P = (W0/W)^2 sin^2(W tau / 2), W^2 = W0^2 + d^2."""
    d = 2.0 * np.pi * np.asarray(delta, dtype=float)
    w0 = pulse.rabi_frequency
    w = np.hypot(w0, d)
    out = np.zeros_like(w)
    nz = w > 0
    out[nz] = (w0 / w[nz]) ** 2 * np.sin(0.5 * w[nz] * pulse.duration) ** 2
    if np.ndim(delta) == 0:
        return float(out)
    return out


def lineshape_fwhm(pulse: RamanPulse) -> float:
    """Full width at half maximum of the single-line shape, in Hz."""
    peak = rabi_lineshape(0.0, pulse)
    if peak <= 0:
        raise ValueError("lineshape has no peak; is the pulse area zero?")

    def half(d):
        return rabi_lineshape(d, pulse) - 0.5 * peak

    hi = 0.25 / pulse.duration
    while half(hi) > 0:
        hi *= 2.0
        if hi > 1e12:
            raise RuntimeError("could not bracket the half maximum")
    half_width = brentq(half, 0.0, hi, xtol=1e-9 / pulse.duration, rtol=1e-14)
    return 2.0 * half_width


def _line_positions(zeeman: ZeemanParams) -> dict[int, float]:
    return {m: raman_line_offset(m, zeeman) for m in range(-3, 4)}


def synth_copropagating(
    populations: np.ndarray,
    zeeman: ZeemanParams,
    pulse: RamanPulse,
    grid: np.ndarray,
    field_rms_gauss: float = 0.0,
) -> Spectrum:
    """Velocity-insensitive spectrum: one Rabi line per F=4, |m|<=3 sublevel
    at its first-order Zeeman position, weighted by its population.

    field_rms_gauss, when nonzero, smears every m != 0 line over a Gaussian
    distribution of bias-field values; the m=0 line is untouched.
    """
    if pulse.geometry != "copropagating":
        raise ValueError("copropagating synthesis needs a copropagating pulse")
    populations = np.asarray(populations, dtype=float)
    grid = np.asarray(grid, dtype=float)
    signal = np.zeros_like(grid)
    for m, offset in _line_positions(zeeman).items():
        weight = populations[state_index(Sublevel("g", 4, m))]
        if weight == 0.0:
            continue
        if m != 0 and field_rms_gauss > 0.0:
            sigma_hz = abs(
                raman_line_offset(m, ZeemanParams(field_rms_gauss, zeeman.g3, zeeman.g4))
            )
            shifts = np.linspace(-4.0 * sigma_hz, 4.0 * sigma_hz, 81)
            gauss = np.exp(-0.5 * (shifts / sigma_hz) ** 2)
            gauss /= gauss.sum()
            for shift, gw in zip(shifts, gauss):
                signal += weight * gw * rabi_lineshape(grid - offset - shift, pulse)
        else:
            signal += weight * rabi_lineshape(grid - offset, pulse)
    return Spectrum(grid, signal)


def doppler_shift(velocity, geometry: str = "counterpropagating"):
    """Two-photon detuning (Hz) of an atom moving at `velocity` recoil
    velocities: 2 v_r / lambda per v_r counterpropagating, zero copropagating."""
    if geometry not in GEOMETRIES:
        raise ValueError(f"geometry must be one of {GEOMETRIES}")
    v = np.asarray(velocity, dtype=float)
    if geometry == "copropagating":
        out = np.zeros_like(v)
    else:
        out = v * cst.DOPPLER_HZ_PER_RECOIL
    return float(out) if np.ndim(velocity) == 0 else out


def synth_counterpropagating(
    populations: np.ndarray,
    vdist: VelocityDistribution,
    pulse: RamanPulse,
    grid: np.ndarray,
    zeeman: ZeemanParams = ZeemanParams(0.0),
    quadrature_points: int = 201,
) -> Spectrum:
    """Doppler-sensitive spectrum: the copropagating composite line folded
    with the velocity distribution mapped through the Doppler shift.

    The velocity quadrature spans +-6 sigma with at least 201 points and is
    refined until its spacing resolves the Fourier width of a single line,
    otherwise a broad distribution sampled too coarsely leaves comb
    artifacts instead of a smooth profile.
    """
    if pulse.geometry != "counterpropagating":
        raise ValueError("counterpropagating synthesis needs a counterpropagating pulse")
    grid = np.asarray(grid, dtype=float)
    populations = np.asarray(populations, dtype=float)
    co_pulse = RamanPulse(pulse.duration, pulse.rabi_frequency, "copropagating")
    lines = [
        (raman_line_offset(m, zeeman), populations[state_index(Sublevel("g", 4, m))])
        for m in range(-3, 4)
        if populations[state_index(Sublevel("g", 4, m))] != 0.0
    ]
    if not lines or pulse.rabi_frequency == 0.0:
        return Spectrum(grid, np.zeros_like(grid))

    if vdist.sigma == 0.0:
        shift = doppler_shift(vdist.mean)
        signal = np.zeros_like(grid)
        for offset, weight in lines:
            signal += weight * rabi_lineshape(grid - offset - shift, co_pulse)
        return Spectrum(grid, signal)

    span_hz = 12.0 * vdist.sigma * cst.DOPPLER_HZ_PER_RECOIL
    fwhm = lineshape_fwhm(co_pulse)
    npts = max(201, int(quadrature_points), int(np.ceil(span_hz / (0.25 * fwhm))) + 1)
    npts = min(npts, 60_001)
    if npts % 2 == 0:
        npts += 1
    v = np.linspace(vdist.mean - 6.0 * vdist.sigma, vdist.mean + 6.0 * vdist.sigma, npts)
    weights = np.exp(-0.5 * ((v - vdist.mean) / vdist.sigma) ** 2)
    weights /= weights.sum()
    shifts = v * cst.DOPPLER_HZ_PER_RECOIL

    signal = np.zeros_like(grid)
    chunk = max(1, 2_000_000 // max(1, grid.size))
    for start in range(0, npts, chunk):
        block = slice(start, min(start + chunk, npts))
        for offset, weight in lines:
            detunings = grid[:, None] - offset - shifts[None, block]
            signal += weight * (rabi_lineshape(detunings, co_pulse) @ weights[block])
    return Spectrum(grid, signal)


@dataclass
class GaussianFit:
    """Least-squares Gaussian fit of a spectrum, with velocity/temperature
    conversions of the fitted width."""

    center_hz: float
    sigma_hz: float
    amplitude: float
    rms_residual: float
    converged: bool
    iterations: int
    sigma_vr: float
    sigma_mps: float
    temperature_K: float

    @property
    def fwhm_hz(self) -> float:
        return 2.0 * np.sqrt(2.0 * np.log(2.0)) * self.sigma_hz


def fit_gaussian(spectrum: Spectrum, max_nfev: int = 2000) -> GaussianFit:
    """Fit A exp(-(x-c)^2 / 2 sigma^2) by nonlinear least squares.

    Non-convergence within the evaluation budget is reported through
    converged=False with the best parameters found so far.
    """
    x, y = spectrum.detunings, spectrum.signal
    if x.size < 7:
        raise ValueError("need at least 7 samples to fit a Gaussian")
    if np.any(y < 0):
        raise ValueError("signal must be nonnegative")
    if not np.any(y > 0):
        raise ValueError("signal is identically zero")

    a0 = float(y.max())
    c0 = float(x[np.argmax(y)])
    s0 = float(np.sqrt(np.sum(y * (x - c0) ** 2) / np.sum(y)))
    if not np.isfinite(s0) or s0 <= 0:
        s0 = 0.1 * (x[-1] - x[0])

    def residuals(p):
        a, c, s = p
        return a * np.exp(-0.5 * ((x - c) / s) ** 2) - y

    result = least_squares(
        residuals, x0=[a0, c0, s0], xtol=1e-8, ftol=1e-12, gtol=1e-12,
        max_nfev=max_nfev,
    )
    a, c, s = result.x
    s = abs(float(s))
    rms = float(np.sqrt(np.mean(result.fun**2)))
    sigma_vr = s / cst.DOPPLER_HZ_PER_RECOIL
    sigma_mps = sigma_vr * cst.RECOIL_VELOCITY
    temperature = cst.CS_MASS * sigma_mps**2 / cst.BOLTZMANN
    return GaussianFit(
        center_hz=float(c),
        sigma_hz=s,
        amplitude=float(a),
        rms_residual=rms,
        converged=bool(result.status > 0),
        iterations=int(result.nfev),
        sigma_vr=sigma_vr,
        sigma_mps=sigma_mps,
        temperature_K=float(temperature),
    )


@dataclass(frozen=True)
class VelocityResolution:
    recoil_units: float
    meters_per_second: float


def velocity_resolution(fwhm_hz: float) -> VelocityResolution:
    """Velocity class selected by a line of the given width, expressed in
    recoil velocities and in m/s."""
    if fwhm_hz <= 0:
        raise ValueError("width must be positive")
    recoil_units = fwhm_hz / cst.DOPPLER_HZ_PER_RECOIL
    return VelocityResolution(recoil_units, recoil_units * cst.RECOIL_VELOCITY)


def write_spectrum_csv(spectrum: Spectrum, path, fit: GaussianFit | None = None) -> None:
    """Spectrum export; the fit report, when present, rides along as
    key=value comment lines after the data."""
    lines = ["detuning_hz,signal"]
    for d, s in zip(spectrum.detunings, spectrum.signal):
        lines.append(f"{d:.17g},{s:.17g}")
    if fit is not None:
        lines.append(f"# center_hz={fit.center_hz:.17g}")
        lines.append(f"# sigma_hz={fit.sigma_hz:.17g}")
        lines.append(f"# fwhm_hz={fit.fwhm_hz:.17g}")
        lines.append(f"# amplitude={fit.amplitude:.17g}")
        lines.append(f"# rms_residual={fit.rms_residual:.17g}")
        lines.append(f"# sigma_vr={fit.sigma_vr:.17g}")
        lines.append(f"# sigma_mps={fit.sigma_mps:.17g}")
        lines.append(f"# temperature_K={fit.temperature_K:.17g}")
        lines.append(f"# converged={str(fit.converged).lower()}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
