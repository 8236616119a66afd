"""Optical pumping of laser-cooled cesium into the magnetically insensitive
m=0 ground sublevel: rate-equation kinetics, Raman velocimetry spectra,
photon-recoil heating, and depolarization fitting."""

from . import constants
from .structure import (
    Sublevel,
    ZeemanParams,
    branching_ratio,
    branching_table,
    enumerate_states,
    parse_label,
    raman_line_offset,
    state_index,
)
from .kinetics import (
    Beam,
    RateMatrix,
    Trajectory,
    assemble_rate_matrix,
    beam,
    integrate_rk4,
    polarization_weights,
    prune,
    pump_metrics,
    single_sublevel,
    stimulated_rate,
    transition_overlap,
    uniform_f4,
)
from .raman import (
    GaussianFit,
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
)
from .heating import (
    CycleReport,
    HeatingResult,
    RecoilGeometry,
    default_geometry,
    expected_cycles,
    heating_summary,
    recoil_walk,
)
from .fitting import (
    FitResult,
    ObservationSeries,
    fit_depolarization,
    load_observations,
    residual_report,
    simulate_observable,
)

__version__ = "0.1.0"
