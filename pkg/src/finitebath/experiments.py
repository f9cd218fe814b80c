"""Composed experiments: thermalization curves and energy scans.

A sweep point is one (particle frequency, seed) pair: draw the baths,
propagate, sample the particle energy at random times, fit a
temperature.  Curves aggregate the per-seed fits by inverse variance.
A failing point (non-thermal fit, diverged run) is recorded and the
sweep continues; a grid point with no surviving seed reports NaN.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .bath import realize_bath
from .model import (BathSpec, DensityOfStates, SystemState, TestParticleSpec,
                    bare_energy, oscillator_energies)
from .propagator import (NumericalError, build_coupling_matrix, diagonalize,
                         full_state)
from .rng import SAMPLING_TIMES, substream
from .stats import (DEFAULT_N_BINS, DEFAULT_SPAN_FACTOR, EnergyHistogram,
                    FitError, SamplingPlan, TemperatureFit, aggregate_seeds,
                    build_histogram, fit_energy_samples, fit_temperature,
                    make_sampling_times, sample_skewness)
from .switched import (SwitchSchedule, SwitchedPropagator, TwoBathSystem,
                       build_switched_matrices, default_step_size)

BARE = "bare"
RENORMALIZED = "renormalized"


@dataclass(frozen=True)
class SweepSpec:
    """Everything one thermalization sweep depends on."""

    omega_grid: tuple
    bath1: BathSpec = field(default_factory=BathSpec)
    bath2: BathSpec | None = None
    tp_mass: float = 1.0
    initial_energy: float = 0.0
    seeds: tuple = tuple(range(1, 16))
    plan: SamplingPlan = field(default_factory=SamplingPlan)
    n_bins: int = DEFAULT_N_BINS
    span_factor: float = DEFAULT_SPAN_FACTOR
    propagator: str = "eigen"        # "eigen" or "rk4" (continuous stepping)
    delta_t_steps: int = 1
    steps_per_period: int = 50
    step_size: float | None = None   # None: derived from the fastest frequency
    active_first: int = 1
    energy_convention: str = BARE
    renormalization: str = "switched"   # two-bath stiffness bookkeeping

    def __post_init__(self):
        if len(self.omega_grid) == 0:
            raise ValueError("omega_grid must not be empty")
        if any(w <= 0.0 for w in self.omega_grid):
            raise ValueError("sweep frequencies must be positive")
        if not self.seeds:
            raise ValueError("need at least one seed")
        if self.initial_energy < 0.0:
            raise ValueError(f"initial_energy must be >= 0, got {self.initial_energy}")
        if self.propagator not in ("eigen", "rk4"):
            raise ValueError(f"unknown propagator {self.propagator!r}")
        if self.energy_convention not in (BARE, RENORMALIZED):
            raise ValueError(f"unknown energy convention {self.energy_convention!r}")
        if self.renormalization not in ("switched", "static"):
            raise ValueError(f"unknown renormalization {self.renormalization!r}")

    def test_particle(self, omega: float) -> TestParticleSpec:
        """Initial energy is placed entirely in the momentum."""
        p0 = float(np.sqrt(2.0 * self.tp_mass * self.initial_energy))
        return TestParticleSpec(mass=self.tp_mass, omega=omega, q0=0.0, p0=p0)


@dataclass(frozen=True)
class PointResult:
    """One (omega, seed) simulation reduced to its statistics.

    ``fit`` is None when the energy distribution is not Boltzmann-like
    (e.g. the decoupled high-frequency regime, where the distribution
    is a narrow Gaussian); the histogram, mean, and skewness are still
    recorded so the regime remains identifiable.
    """

    omega: float
    seed: int
    fit: TemperatureFit | None
    hist: EnergyHistogram
    mean_energy: float
    skewness: float
    bath_final: tuple        # per bath TemperatureFit or None (too small to fit)
    max_snap_distance: float
    n_steps: int
    fit_error: str | None = None


# Bath blocks hold only N ~ 200 energies.  The log-count fit drops empty
# bins, which biases T upward on sparse tails; coarse bins keep every bin
# populated and the residual bias identical between initial and final fits.
BATH_FIT_BINS = 12
BATH_FIT_SPAN = 5.0


def _fit_bath_block(energies) -> TemperatureFit | None:
    if len(energies) < 100:
        return None
    try:
        fit, _ = fit_energy_samples(energies, n_bins=BATH_FIT_BINS,
                                    span_factor=BATH_FIT_SPAN)
        return fit
    except (FitError, ValueError):
        return None


def _reduce_samples(spec, omega, seed, q, p, renorm_spring, final_state,
                    max_snap=0.0, n_steps=0) -> PointResult:
    tp = spec.test_particle(omega)
    energies = bare_energy(q, p, tp)
    if spec.energy_convention == RENORMALIZED:
        energies = energies + 0.5 * renorm_spring * q * q
    hist = build_histogram(energies, spec.n_bins,
                           spec.span_factor * float(np.mean(energies)))
    try:
        fit, fit_error = fit_temperature(hist), None
    except FitError as err:
        fit, fit_error = None, f"{type(err).__name__}: {err}"
    bath_final = tuple(
        _fit_bath_block(oscillator_energies(bq, bp, real.frequencies, real.m))
        for real, bq, bp in zip_baths(final_state))
    return PointResult(omega=omega, seed=seed, fit=fit, hist=hist,
                       mean_energy=float(np.mean(energies)),
                       skewness=sample_skewness(energies),
                       bath_final=bath_final, max_snap_distance=max_snap,
                       n_steps=n_steps, fit_error=fit_error)


def zip_baths(final):
    """(realization, q block, p block) triples of a (reals, state) pair."""
    reals, state = final
    return [(r, state.bath_q[i], state.bath_p[i]) for i, r in enumerate(reals)]


def run_single_bath_point(omega: float, spec: SweepSpec, seed: int,
                          bath: BathSpec | None = None,
                          bath_index: int = 0) -> PointResult:
    """One continuous contact run: exact normal modes (or plain RK4)."""
    bath = bath if bath is not None else spec.bath1
    tp = spec.test_particle(omega)
    real = realize_bath(bath, seed, bath_index)
    times = make_sampling_times(
        spec.plan, substream(seed, SAMPLING_TIMES).generator())
    v0 = SystemState(time=0.0, test_q=tp.q0, test_p=tp.p0,
                     bath_q=(real.positions,), bath_p=(real.momenta,)).as_vector()
    renorm = float(np.sum(real.m * real.frequencies**2))
    if spec.propagator == "eigen":
        cm = build_coupling_matrix(tp, real.frequencies, real.m)
        prop = diagonalize(cm, v0)
        q, p = prop.sample_test_particle(times)
        final = full_state(prop, float(times[-1]))
        return _reduce_samples(spec, omega, seed, q, p, renorm,
                               ((real,), final))
    # continuous RK4: both switch phases use the engaged matrix
    system = build_switched_matrices(tp, (bath, real), None)
    system = TwoBathSystem(tp=tp, bath1=(bath, real), bath2=None,
                           a1=system.a1, a2=system.a1)
    dt = spec.step_size or default_step_size(tp, (real.frequencies,),
                                             spec.steps_per_period)
    schedule = SwitchSchedule(delta_t_steps=1, step_size=dt, active_first=1)
    res = SwitchedPropagator(system, schedule).run(v0, times)
    return _reduce_samples(spec, omega, seed, res.q, res.p, renorm,
                           ((real,), res.final_state),
                           max_snap=res.max_snap_distance, n_steps=res.n_steps)


def run_two_bath_point(omega: float, spec: SweepSpec, seed: int) -> PointResult:
    """One switched contact run with both baths."""
    if spec.bath2 is None:
        raise ValueError("two bath point needs bath2 in the spec")
    tp = spec.test_particle(omega)
    r1 = realize_bath(spec.bath1, seed, 0)
    r2 = realize_bath(spec.bath2, seed, 1)
    system = build_switched_matrices(tp, (spec.bath1, r1), (spec.bath2, r2),
                                     renormalization=spec.renormalization)
    dt = spec.step_size or default_step_size(
        tp, (r1.frequencies, r2.frequencies), spec.steps_per_period)
    schedule = SwitchSchedule(delta_t_steps=spec.delta_t_steps, step_size=dt,
                              active_first=spec.active_first)
    times = make_sampling_times(
        spec.plan, substream(seed, SAMPLING_TIMES).generator())
    res = SwitchedPropagator(system, schedule).run(system.initial_vector(), times)
    if spec.energy_convention == RENORMALIZED:
        s1 = float(np.sum(r1.m * r1.frequencies**2))
        s2 = float(np.sum(r2.m * r2.frequencies**2))
        active1 = np.array([schedule.bath1_active(int(s)) for s in res.steps])
        renorm = np.where(active1, s1, s2)
    else:
        renorm = 0.0
    return _reduce_samples(spec, omega, seed, res.q, res.p, renorm,
                           ((r1, r2), res.final_state),
                           max_snap=res.max_snap_distance, n_steps=res.n_steps)


@dataclass(frozen=True)
class ThermalizationCurve:
    """Aggregated sweep output, one row per grid frequency."""

    omegas: np.ndarray
    temperature: np.ndarray
    sigma: np.ndarray
    goodness: np.ndarray
    overflow_fraction: np.ndarray
    bath_initial: tuple     # per bath (temperature, sigma), seed aggregated
    bath_final: tuple       # per bath (temperatures[nw], sigmas[nw])
    failures: tuple         # (omega, seed, message)
    spec: SweepSpec

    @property
    def n_baths(self) -> int:
        return len(self.bath_initial)


def _sweep(spec: SweepSpec, runner, n_baths: int, initial_reals) -> ThermalizationCurve:
    omegas = np.asarray(spec.omega_grid, dtype=float)
    nw = len(omegas)
    temperature = np.full(nw, np.nan)
    sigma = np.full(nw, np.nan)
    goodness = np.full(nw, np.nan)
    overflow = np.full(nw, np.nan)
    final_t = [np.full(nw, np.nan) for _ in range(n_baths)]
    final_s = [np.full(nw, np.nan) for _ in range(n_baths)]
    failures = []

    for i, w in enumerate(omegas):
        fits, over = [], []
        finals = [[] for _ in range(n_baths)]
        for seed in spec.seeds:
            try:
                point = runner(float(w), spec, seed)
            except (FitError, NumericalError) as err:
                failures.append((float(w), seed, f"{type(err).__name__}: {err}"))
                continue
            if point.fit is None:
                failures.append((float(w), seed, point.fit_error))
                continue
            fits.append(point.fit)
            over.append(point.hist.overflow_fraction)
            for b in range(n_baths):
                if point.bath_final[b] is not None:
                    finals[b].append(point.bath_final[b])
        if not fits:
            continue
        temperature[i], sigma[i] = aggregate_seeds(fits)
        goodness[i] = float(np.mean([f.goodness for f in fits]))
        overflow[i] = float(np.mean(over))
        for b in range(n_baths):
            if finals[b]:
                final_t[b][i], final_s[b][i] = aggregate_seeds(finals[b])

    bath_initial = []
    for b in range(n_baths):
        per_seed = [_fit_bath_block(r.energies) for r in initial_reals[b]]
        per_seed = [f for f in per_seed if f is not None]
        bath_initial.append(aggregate_seeds(per_seed) if per_seed else (np.nan, np.nan))

    return ThermalizationCurve(
        omegas=omegas, temperature=temperature, sigma=sigma, goodness=goodness,
        overflow_fraction=overflow, bath_initial=tuple(bath_initial),
        bath_final=tuple((final_t[b], final_s[b]) for b in range(n_baths)),
        failures=tuple(failures), spec=spec)


def run_sweep(spec: SweepSpec) -> ThermalizationCurve:
    """Thermalization curve over the frequency grid of the spec."""
    if spec.bath2 is None:
        reals = ([realize_bath(spec.bath1, s, 0) for s in spec.seeds],)
        return _sweep(spec, run_single_bath_point, 1, reals)
    reals = ([realize_bath(spec.bath1, s, 0) for s in spec.seeds],
             [realize_bath(spec.bath2, s, 1) for s in spec.seeds])
    return _sweep(spec, run_two_bath_point, 2, reals)


@dataclass(frozen=True)
class TwoBathSweepResult:
    """Switched curve plus each bath acting alone on the same draws."""

    combined: ThermalizationCurve
    alone: tuple   # (bath 1 alone, bath 2 alone) ThermalizationCurves


def run_two_bath_sweep(spec: SweepSpec,
                       include_alone: bool = True) -> TwoBathSweepResult:
    """Switched sweep, each bath alone for comparison, bath checks included.

    The alone curves reuse exactly the same bath draws (same seeds and
    per-bath streams) with continuous contact and the exact propagator.
    """
    if spec.bath2 is None:
        raise ValueError("two bath sweep needs bath2 in the spec")
    combined = run_sweep(spec)
    alone = ()
    if include_alone:
        alone_specs = (replace(spec, bath1=spec.bath1, bath2=None, propagator="eigen"),
                       replace(spec, bath1=spec.bath2, bath2=None, propagator="eigen"))
        curves = []
        for idx, aspec in enumerate(alone_specs):
            def runner(w, s, seed, _idx=idx):
                return run_single_bath_point(w, s, seed, bath=s.bath1, bath_index=_idx)
            reals = ([realize_bath(aspec.bath1, s, idx) for s in aspec.seeds],)
            curves.append(_sweep(aspec, runner, 1, reals))
        alone = tuple(curves)
    return TwoBathSweepResult(combined=combined, alone=alone)


def smoothed_curve(values) -> np.ndarray:
    """3-point moving average with shrinking windows at the edges."""
    values = np.asarray(values, dtype=float)
    out = np.empty_like(values)
    for i in range(len(values)):
        window = values[max(0, i - 1):i + 2]
        out[i] = np.nanmean(window) if np.any(np.isfinite(window)) else np.nan
    return out


def peak_location(omegas, temperatures) -> float:
    """Frequency of the curve maximum after 3-point smoothing."""
    omegas = np.asarray(omegas, dtype=float)
    sm = smoothed_curve(temperatures)
    if not np.any(np.isfinite(sm)):
        raise ValueError("curve has no finite values; cannot locate a peak")
    return float(omegas[np.nanargmax(sm)])


@dataclass(frozen=True)
class InitialEnergyScan:
    """Grid of (omega, E0) runs for the decoupling study."""

    omegas: np.ndarray
    e0_values: np.ndarray
    temperature: np.ndarray      # (n_omega, n_e0)
    sigma: np.ndarray
    mean_energy: np.ndarray
    mean_energy_sigma: np.ndarray
    skewness: np.ndarray
    failures: tuple


def run_initial_energy_scan(omegas, e0_values, spec: SweepSpec) -> InitialEnergyScan:
    """Sweep initial particle energy (placed in P0) across frequencies."""
    omegas = np.asarray(omegas, dtype=float)
    e0_values = np.asarray(e0_values, dtype=float)
    shape = (len(omegas), len(e0_values))
    temperature = np.full(shape, np.nan)
    sigma = np.full(shape, np.nan)
    mean_e = np.full(shape, np.nan)
    mean_e_sig = np.full(shape, np.nan)
    skew = np.full(shape, np.nan)
    failures = []
    for j, e0 in enumerate(e0_values):
        espec = replace(spec, initial_energy=float(e0))
        for i, w in enumerate(omegas):
            fits, means, skews = [], [], []
            for seed in espec.seeds:
                try:
                    point = run_single_bath_point(float(w), espec, seed)
                except (FitError, NumericalError) as err:
                    failures.append((float(w), float(e0), seed,
                                     f"{type(err).__name__}: {err}"))
                    continue
                means.append(point.mean_energy)
                skews.append(point.skewness)
                if point.fit is None:
                    failures.append((float(w), float(e0), seed,
                                     point.fit_error))
                else:
                    fits.append(point.fit)
            if means:
                mean_e[i, j] = np.mean(means)
                mean_e_sig[i, j] = (np.std(means, ddof=1) / np.sqrt(len(means))
                                    if len(means) > 1 else np.nan)
                skew[i, j] = np.mean(skews)
            if fits:
                temperature[i, j], sigma[i, j] = aggregate_seeds(fits)
    return InitialEnergyScan(omegas=omegas, e0_values=e0_values,
                             temperature=temperature, sigma=sigma,
                             mean_energy=mean_e, mean_energy_sigma=mean_e_sig,
                             skewness=skew, failures=tuple(failures))


@dataclass(frozen=True)
class DegenerateExchange:
    """Microscopic run against a zero-bandwidth bath at resonance.

    With pairwise-cancelled initial conditions only the symmetric bath
    mode couples to the particle, so the particle energy beats between
    0 and e0 at the splitting of the two resonant normal modes,
    omega_r (sqrt(1 + sqrt(xi)) - sqrt(1 - sqrt(xi))).
    """

    times: np.ndarray
    energies: np.ndarray           # on the uniform grid
    e0: float
    exchange_frequency: float      # predicted splitting
    dominant_frequency: float      # FFT argmax (DC excluded)
    secondary_ratio: float         # next line amplitude / dominant
    ks_energies: np.ndarray        # randomly timed samples for the arcsine test


def exchange_splitting(omega_r: float, xi: float) -> float:
    """Normal-mode splitting of particle + symmetric mode at resonance."""
    if not 0.0 < xi < 1.0:
        raise ValueError(f"resonant coupling needs 0 < xi < 1, got {xi}")
    s = np.sqrt(xi)
    return float(omega_r * (np.sqrt(1.0 + s) - np.sqrt(1.0 - s)))


def run_degenerate_exchange(n: int = 100, xi: float = 0.01,
                            omega_r: float = 1.0, e0: float = 10.0,
                            bath_temperature: float = 1.0, seed: int = 3,
                            n_periods: int = 16, n_grid: int = 8192,
                            n_ks_samples: int = 4000,
                            ks_seed: int = 11) -> DegenerateExchange:
    """Kick the particle with e0 against a degenerate bath at resonance.

    The particle frequency is set to omega_r sqrt(1 - xi) so that its
    renormalized frequency matches the bath line exactly.
    """
    from .bath import pairwise_cancelled

    m = xi / float(n)                       # test particle mass is 1
    omega = omega_r * np.sqrt(1.0 - xi)
    dos = DensityOfStates("uniform", omega_r, omega_r)
    bath = BathSpec(size=n, mass=m, temperature=bath_temperature, dos=dos)
    real = pairwise_cancelled(realize_bath(bath, seed, 0))
    tp = TestParticleSpec(mass=1.0, omega=omega, q0=0.0,
                          p0=float(np.sqrt(2.0 * e0)))
    v0 = SystemState(time=0.0, test_q=0.0, test_p=tp.p0,
                     bath_q=(real.positions,),
                     bath_p=(real.momenta,)).as_vector()
    prop = diagonalize(build_coupling_matrix(tp, real.frequencies, m), v0)

    dnu = exchange_splitting(omega_r, xi)
    t_beat = 2.0 * np.pi / dnu
    times = np.linspace(0.0, n_periods * t_beat, n_grid)
    q, p = prop.sample_test_particle(times)
    energies = bare_energy(q, p, tp)

    centered = (energies - energies.mean()) * np.hanning(n_grid)
    amplitude = np.abs(np.fft.rfft(centered))
    freqs = 2.0 * np.pi * np.fft.rfftfreq(n_grid, d=times[1] - times[0])
    search = amplitude.copy()
    search[:3] = 0.0                        # DC leakage
    k = int(np.argmax(search))
    search[max(0, k - 5):k + 6] = 0.0
    k2 = int(np.argmax(search))

    ks_times = np.sort(np.random.default_rng(ks_seed).uniform(
        0.0, 200.0 * t_beat, n_ks_samples))
    ks_q, ks_p = prop.sample_test_particle(ks_times)

    return DegenerateExchange(
        times=times, energies=energies, e0=e0, exchange_frequency=dnu,
        dominant_frequency=float(freqs[k]),
        secondary_ratio=float(amplitude[k2] / amplitude[k]),
        ks_energies=bare_energy(ks_q, ks_p, tp))
