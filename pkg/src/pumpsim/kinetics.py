"""Rate-equation kinetics of the optical-pumping cycle.

A set of laser beams (polarizer + repumper) couples the 16 ground sublevels
to the 27 excited sublevels through stimulated rates proportional to the
spontaneous branching ratios; spontaneous emission feeds the ground
manifolds back. The resulting linear system dN/dt = R N is integrated with
fixed-step classical Runge-Kutta. Because the system is linear and
autonomous, one RK4 step is exactly the 4th-order Taylor polynomial of
exp(dt R); the integrator applies that step matrix, raising it to integer
powers between output samples, which is bit-deterministic and fast enough
to sweep parameters.
"""

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from . import constants as cst
from .structure import (
    N_STATES,
    STATES,
    EXCITED_INDICES,
    GROUND_INDICES,
    Sublevel,
    branching_table,
    state_index,
)

log = logging.getLogger(__name__)

# largest tolerated dt * max|R| for the fixed-step integrator
STABILITY_LIMIT = 0.1


def polarization_weights(depolarization: float) -> tuple[float, float, float]:
    """Intensity fractions (sigma-, pi, sigma+) of a nominally pi-polarized
    beam whose amplitude carries a relative contamination `depolarization`
    on each circular component."""
    if depolarization < 0:
        raise ValueError("depolarization must be nonnegative")
    a2 = depolarization * depolarization
    norm = 1.0 + 2.0 * a2
    return (a2 / norm, 1.0 / norm, a2 / norm)


@dataclass(frozen=True)
class Beam:
    """One light field driving a ground -> excited hyperfine transition.

    intensity_ratio is I/I_sat, detuning is in units of the natural
    linewidth, linewidth is the laser linewidth in rad/s, pol_weights are
    the (sigma-, pi, sigma+) intensity fractions.
    """

    ground_f: int
    excited_f: int
    intensity_ratio: float
    detuning: float = 0.0
    linewidth: float = cst.LASER_LINEWIDTH
    pol_weights: tuple[float, float, float] = (0.0, 1.0, 0.0)

    def __post_init__(self):
        if self.ground_f not in cst.GROUND_F:
            raise ValueError(f"no ground hyperfine level F={self.ground_f}")
        if self.excited_f not in cst.EXCITED_F:
            raise ValueError(f"no excited hyperfine level F'={self.excited_f}")
        if abs(self.excited_f - self.ground_f) > 1:
            raise ValueError(
                f"{self.ground_f}->{self.excited_f}' is not dipole-allowed"
            )
        if self.intensity_ratio < 0:
            raise ValueError("intensity_ratio must be nonnegative")
        if self.linewidth <= 0:
            raise ValueError("laser linewidth must be positive")
        w = self.pol_weights
        if len(w) != 3 or min(w) < 0 or abs(sum(w) - 1.0) > 1e-12:
            raise ValueError("pol_weights must be three nonnegative numbers summing to 1")


def beam(
    ground_f: int,
    excited_f: int,
    intensity_ratio: float,
    detuning: float = 0.0,
    depolarization: float = 0.0,
    linewidth: float = cst.LASER_LINEWIDTH,
) -> Beam:
    """Convenience constructor for a pi-polarized beam with contamination."""
    return Beam(
        ground_f,
        excited_f,
        intensity_ratio,
        detuning,
        linewidth,
        polarization_weights(depolarization),
    )


def with_depolarization(beams, depolarization: float) -> list[Beam]:
    """Copies of `beams` with the polarization contamination replaced."""
    weights = polarization_weights(depolarization)
    return [replace(b, pol_weights=weights) for b in beams]


def transition_overlap(ground_f: int, excited_f: int, bm: Beam) -> float:
    """Relative probability that `bm` excites the ground_f -> excited_f
    transition, given its linewidth and its offset from that line."""
    if ground_f not in cst.GROUND_F or excited_f not in cst.EXCITED_F:
        raise ValueError(f"transition {ground_f}->{excited_f}' outside the state space")
    if abs(excited_f - ground_f) > 1:
        raise ValueError(f"{ground_f}->{excited_f}' is not dipole-allowed")
    mu = bm.linewidth / cst.GAMMA
    # line offset from the laser frequency, in half-linewidths
    offset_hz = cst.excited_level_offset(excited_f) - cst.excited_level_offset(
        bm.excited_f
    )
    if ground_f != bm.ground_f:
        offset_hz -= (ground_f - bm.ground_f) * cst.GROUND_SPLITTING
    delta = 4.0 * np.pi * offset_hz / cst.GAMMA - 2.0 * bm.detuning
    if abs(delta) < 1e-9 and abs(mu - 1.0) < 1e-9:
        # removable 0/0 of the general form on resonance at mu = 1
        return mu / (mu + 1.0)
    num = delta * delta + (mu - 1.0) ** 2
    den = (delta * delta + mu * mu - 1.0) ** 2 + 4.0 * delta * delta
    return mu * (mu + 1.0) * num / den


def stimulated_rate(ground: Sublevel, excited: Sublevel, q: int, bm: Beam) -> float:
    """Stimulated rate (s^-1) between a ground and an excited sublevel for
    polarization component q = m' - m; identical in both directions."""
    if ground.s != "g" or excited.s != "e":
        raise ValueError("stimulated_rate couples a ground to an excited sublevel")
    if q not in (-1, 0, 1) or excited.m - ground.m != q:
        raise ValueError(f"polarization component q={q} does not close m={ground.m} "
                         f"to m'={excited.m}")
    a = branching_table()[state_index(excited), state_index(ground)]
    weight = bm.pol_weights[q + 1]
    if a == 0.0 or weight == 0.0:
        return 0.0
    overlap = transition_overlap(ground.f, excited.f, bm)
    return (
        0.5
        * cst.GAMMA
        * (cst.GAMMA / bm.linewidth)
        * bm.intensity_ratio
        * overlap
        * a
        * weight
    )


@dataclass(frozen=True)
class RateMatrix:
    """Generator of the population rate equations, dN/dt = matrix @ N.

    Off-diagonal entries are nonnegative transfer rates; each column sums to
    zero, so total population is conserved. The stimulated terms are kept
    alongside the matrix so weak transitions can be pruned afterwards.
    """

    matrix: np.ndarray
    beams: tuple[Beam, ...]
    # per stimulated term: ground index, excited index, rate, line overlap
    term_ground: np.ndarray = field(repr=False, default=None)
    term_excited: np.ndarray = field(repr=False, default=None)
    term_rate: np.ndarray = field(repr=False, default=None)
    term_overlap: np.ndarray = field(repr=False, default=None)

    @property
    def max_rate(self) -> float:
        return float(np.max(np.abs(self.matrix)))


def _spontaneous_part() -> np.ndarray:
    mat = np.zeros((N_STATES, N_STATES))
    table = branching_table()
    for ei in EXCITED_INDICES:
        mat[GROUND_INDICES, ei] = cst.GAMMA * table[ei, GROUND_INDICES]
    return mat


def _finish_matrix(mat: np.ndarray) -> np.ndarray:
    # the diagonal carries the total outflow, making every column sum to zero
    np.fill_diagonal(mat, 0.0)
    np.fill_diagonal(mat, -mat.sum(axis=0))
    return mat


def _build(ground_idx, excited_idx, rates) -> np.ndarray:
    mat = _spontaneous_part()
    for gi, ei, w in zip(ground_idx, excited_idx, rates):
        mat[ei, gi] += w
        mat[gi, ei] += w
    return _finish_matrix(mat)


def assemble_rate_matrix(beams) -> RateMatrix:
    """Rate matrix for a set of beams: stimulated rates in both directions,
    spontaneous feeding of the ground manifolds, and excited-state decay."""
    beams = tuple(beams)
    table = branching_table()
    t_ground, t_excited, t_rate, t_overlap = [], [], [], []
    for bm in beams:
        for fe in cst.EXCITED_F:
            if abs(fe - bm.ground_f) > 1:
                continue
            overlap = transition_overlap(bm.ground_f, fe, bm)
            base = (
                0.5 * cst.GAMMA * (cst.GAMMA / bm.linewidth)
                * bm.intensity_ratio * overlap
            )
            for m in range(-bm.ground_f, bm.ground_f + 1):
                gi = state_index(Sublevel("g", bm.ground_f, m))
                for q in (-1, 0, 1):
                    if abs(m + q) > fe:
                        continue
                    weight = bm.pol_weights[q + 1]
                    ei = state_index(Sublevel("e", fe, m + q))
                    rate = base * table[ei, gi] * weight
                    if rate > 0.0:
                        t_ground.append(gi)
                        t_excited.append(ei)
                        t_rate.append(rate)
                        t_overlap.append(overlap)
    t_ground = np.asarray(t_ground, dtype=np.intp)
    t_excited = np.asarray(t_excited, dtype=np.intp)
    t_rate = np.asarray(t_rate)
    t_overlap = np.asarray(t_overlap)
    mat = _build(t_ground, t_excited, t_rate)
    return RateMatrix(mat, beams, t_ground, t_excited, t_rate, t_overlap)


def prune(rate_matrix: RateMatrix, threshold: float = 1e-3) -> tuple[RateMatrix, int]:
    """Drop stimulated terms whose line overlap falls below threshold times
    the largest overlap; returns the pruned matrix and the number of
    sublevels that still take part in a stimulated coupling."""
    if not 0.0 < threshold <= 1.0:
        raise ValueError("threshold must lie in (0, 1]")
    if rate_matrix.term_rate is None or rate_matrix.term_rate.size == 0:
        return rate_matrix, 0
    cutoff = threshold * rate_matrix.term_overlap.max()
    keep = rate_matrix.term_overlap >= cutoff
    gi = rate_matrix.term_ground[keep]
    ei = rate_matrix.term_excited[keep]
    rates = rate_matrix.term_rate[keep]
    active = np.unique(np.concatenate([gi, ei])).size
    mat = _build(gi, ei, rates)
    pruned = RateMatrix(
        mat, rate_matrix.beams, gi, ei, rates, rate_matrix.term_overlap[keep]
    )
    return pruned, int(active)


def uniform_f4() -> np.ndarray:
    """Default initial condition: the F=4 ground level equally populated."""
    n0 = np.zeros(N_STATES)
    for m in range(-4, 5):
        n0[state_index(Sublevel("g", 4, m))] = 1.0 / 9.0
    return n0


def single_sublevel(level: Sublevel) -> np.ndarray:
    n0 = np.zeros(N_STATES)
    n0[state_index(level)] = 1.0
    return n0


@dataclass
class Trajectory:
    """Sampled populations of the 43 sublevels plus the running expectation
    of spontaneously scattered photons per atom."""

    times: np.ndarray
    populations: np.ndarray       # shape (n_samples, 43)
    scattered_photons: np.ndarray

    def ground_fraction(self) -> np.ndarray:
        return self.populations[:, GROUND_INDICES].sum(axis=1)

    def sublevel_fraction(self, level: Sublevel) -> np.ndarray:
        """Population of one sublevel as a fraction of all ground atoms."""
        ground = self.ground_fraction()
        return self.populations[:, state_index(level)] / ground


def _rk4_step_matrix(rates: np.ndarray, dt: float) -> np.ndarray:
    """One classical RK4 step of the augmented linear system as a matrix.

    The 44th row integrates Gamma * sum(excited populations), i.e. the
    expected number of fluorescence photons, with the same quadrature.
    """
    n = N_STATES + 1
    gen = np.zeros((n, n))
    gen[:N_STATES, :N_STATES] = rates
    gen[N_STATES, EXCITED_INDICES] = cst.GAMMA
    hr = dt * gen
    step = np.eye(n) + hr @ (
        np.eye(n) + hr @ (np.eye(n) / 2.0 + hr @ (np.eye(n) / 6.0 + hr / 24.0))
    )
    return step


def integrate_rk4(
    rate_matrix,
    n0: np.ndarray,
    dt: float,
    t_end: float,
    max_samples: int = 1201,
) -> Trajectory:
    """Fixed-step classical RK4 evolution of dN/dt = R N.

    dt must satisfy dt * max|R| <= 0.1. Output is sampled on a uniform
    stride (at most max_samples points) plus the final step.
    """
    rates = rate_matrix.matrix if isinstance(rate_matrix, RateMatrix) else np.asarray(rate_matrix)
    n0 = np.asarray(n0, dtype=float)
    if n0.shape != (N_STATES,):
        raise ValueError(f"initial populations must have shape ({N_STATES},)")
    if np.any(n0 < 0):
        raise ValueError("initial populations must be nonnegative")
    if abs(n0.sum() - 1.0) > 1e-9:
        raise ValueError("initial populations must sum to one")
    if dt <= 0 or t_end <= 0:
        raise ValueError("dt and t_end must be positive")
    max_rate = float(np.max(np.abs(rates)))
    if dt * max_rate > STABILITY_LIMIT * (1 + 1e-12):
        raise ValueError(
            f"dt*max|R| = {dt * max_rate:.3g} exceeds the stability limit "
            f"{STABILITY_LIMIT}; reduce dt"
        )

    n_steps = max(1, int(np.ceil(t_end / dt - 1e-9)))
    stride = max(1, -(-n_steps // max(1, max_samples - 1)))  # ceil division
    n_blocks = n_steps // stride
    remainder = n_steps - n_blocks * stride

    step = _rk4_step_matrix(rates, dt)
    block = np.linalg.matrix_power(step, stride)

    state = np.zeros(N_STATES + 1)
    state[:N_STATES] = n0
    samples = [state.copy()]
    steps_done = [0]
    for _ in range(n_blocks):
        state = block @ state
        samples.append(state.copy())
        steps_done.append(steps_done[-1] + stride)
    if remainder:
        state = np.linalg.matrix_power(step, remainder) @ state
        samples.append(state.copy())
        steps_done.append(steps_done[-1] + remainder)

    data = np.array(samples)
    populations = data[:, :N_STATES]
    negative = populations < 0
    if negative.any():
        worst = populations[negative].min()
        if worst < -1e-12:
            raise RuntimeError(
                f"integration produced population {worst:.3e}; "
                "the step size is too coarse for this rate matrix"
            )
        log.debug("clipped %d slightly negative populations (min %.3e)",
                  int(negative.sum()), worst)
        populations = np.where(negative, 0.0, populations)
    times = dt * np.asarray(steps_done, dtype=float)
    return Trajectory(times, populations, data[:, N_STATES])


@dataclass
class PumpMetrics:
    """Polarized fraction versus time and the 50% pumping milestone."""

    times: np.ndarray
    m0_fraction: np.ndarray
    tau_50: float | None
    photons_to_tau50: float | None


def pump_metrics(trajectory: Trajectory) -> PumpMetrics:
    """Fraction of ground-state atoms in g,F=4,m=0 over time, the first time
    that fraction reaches 0.5 (linear interpolation), and the expected
    photons scattered up to that time. tau_50 is None when never reached."""
    if trajectory.times.size == 0:
        raise ValueError("trajectory is empty")
    frac = trajectory.sublevel_fraction(Sublevel("g", 4, 0))
    tau_50 = None
    photons = None
    above = np.nonzero(frac >= 0.5)[0]
    if above.size:
        k = int(above[0])
        if k == 0:
            tau_50 = float(trajectory.times[0])
        else:
            t0, t1 = trajectory.times[k - 1], trajectory.times[k]
            f0, f1 = frac[k - 1], frac[k]
            tau_50 = float(t0 + (0.5 - f0) / (f1 - f0) * (t1 - t0))
        photons = float(
            np.interp(tau_50, trajectory.times, trajectory.scattered_photons)
        )
    return PumpMetrics(trajectory.times, frac, tau_50, photons)


def write_trajectory_csv(trajectory: Trajectory, path) -> None:
    """Trajectory export: time, the 43 populations in canonical order, and
    the cumulative scattered photons, at full double precision."""
    header = (
        "time_s,"
        + ",".join("n_" + lv.label() for lv in STATES)
        + ",scattered_photons"
    )
    lines = [header]
    for k in range(trajectory.times.size):
        row = [f"{trajectory.times[k]:.17g}"]
        row.extend(f"{x:.17g}" for x in trajectory.populations[k])
        row.append(f"{trajectory.scattered_photons[k]:.17g}")
        lines.append(",".join(row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
