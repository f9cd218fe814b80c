"""Sampling plans, histogram construction and the temperature fit."""

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from finitebath.bath import realize_bath
from finitebath.model import BathSpec
from finitebath.stats import (
    AggregateTemperature,
    EnergyHistogram,
    FitError,
    NonThermalDistributionError,
    SamplingPlan,
    TemperatureFit,
    aggregate_seeds,
    bath_temperature,
    build_histogram,
    fit_energy_samples,
    fit_temperature,
    make_sampling_times,
    sample_skewness,
)


def _exact_histogram(temperature, amplitude=1000.0, n_bins=40, e_max=8.0):
    edges = np.linspace(0.0, e_max, n_bins + 1)
    centers = 0.5 * (edges[:-1] + edges[1:])
    counts = amplitude * np.exp(-centers / temperature)
    return EnergyHistogram(bin_edges=edges, counts=counts, overflow=0,
                           total_samples=n_bins)


# -- sampling plans ----------------------------------------------------


def test_sampling_plan_validation():
    with pytest.raises(ValueError, match="mean_interval"):
        SamplingPlan(mean_interval=0.0)
    with pytest.raises(ValueError, match="at least 100"):
        SamplingPlan(n_samples=50)
    with pytest.raises(ValueError, match="warmup"):
        SamplingPlan(warmup=-1.0)
    plan = SamplingPlan(mean_interval=2.0, n_samples=300, warmup=40.0)
    assert plan.horizon() == pytest.approx(40.0 + 600.0)


def test_sampling_times_are_increasing_with_the_right_density():
    plan = SamplingPlan(mean_interval=10.0, n_samples=500, warmup=100.0)
    times = make_sampling_times(plan, np.random.default_rng(0))
    assert times.shape == (500,)
    assert times[0] >= 100.0
    assert np.all(np.diff(times) >= 0.0)
    gaps = np.diff(np.concatenate([[100.0], times]))
    assert np.mean(gaps) == pytest.approx(10.0, abs=1.0)
    assert np.max(gaps) <= 20.0


def test_sampling_times_are_deterministic():
    plan = SamplingPlan(mean_interval=5.0, n_samples=200)
    a = make_sampling_times(plan, np.random.default_rng(9))
    b = make_sampling_times(plan, np.random.default_rng(9))
    assert np.array_equal(a, b)


# -- histograms --------------------------------------------------------


def test_histogram_bookkeeping():
    hist = build_histogram([0.1, 0.2, 1.5, 9.0], n_bins=5, e_max=5.0)
    np.testing.assert_array_equal(hist.counts, [2, 1, 0, 0, 0])
    assert hist.overflow == 1
    assert hist.total_samples == 4
    assert hist.overflow_fraction == pytest.approx(0.25)
    assert hist.e_max == pytest.approx(5.0)
    np.testing.assert_allclose(hist.bin_centers, [0.5, 1.5, 2.5, 3.5, 4.5])


def test_histogram_validation():
    with pytest.raises(ValueError, match="empty"):
        build_histogram([], n_bins=5, e_max=1.0)
    with pytest.raises(ValueError, match="negative"):
        build_histogram([0.5, -0.1], n_bins=5, e_max=1.0)
    with pytest.raises(ValueError, match="zero"):
        build_histogram([0.0, 0.0], n_bins=5, e_max=1.0)
    with pytest.raises(ValueError, match="at least 5 bins"):
        build_histogram([0.5], n_bins=4, e_max=1.0)
    with pytest.raises(ValueError, match="e_max"):
        build_histogram([0.5], n_bins=5, e_max=0.0)


# -- the fit -----------------------------------------------------------


def test_fit_is_exact_on_a_pure_exponential():
    fit = fit_temperature(_exact_histogram(temperature=3.7, amplitude=250.0))
    assert fit.temperature == pytest.approx(3.7, rel=1e-12)
    assert fit.intercept == pytest.approx(np.log(250.0), rel=1e-12)
    assert fit.goodness == pytest.approx(0.0, abs=1e-18)
    assert fit.n_bins_used == 40
    assert fit.ratio(7.4) == pytest.approx(0.5, rel=1e-12)


def test_fit_rejects_a_rising_histogram():
    edges = np.linspace(0.0, 8.0, 21)
    centers = 0.5 * (edges[:-1] + edges[1:])
    hist = EnergyHistogram(bin_edges=edges, counts=np.exp(centers / 2.0),
                           overflow=0, total_samples=20)
    with pytest.raises(NonThermalDistributionError, match="not thermal") as exc:
        fit_temperature(hist)
    assert exc.value.slope > 0.0


def test_fit_needs_three_nonempty_bins():
    edges = np.linspace(0.0, 5.0, 6)
    counts = np.array([10.0, 3.0, 0.0, 0.0, 0.0])
    hist = EnergyHistogram(bin_edges=edges, counts=counts, overflow=0,
                           total_samples=13)
    with pytest.raises(FitError, match="nonempty bins"):
        fit_temperature(hist)


def test_fit_error_hierarchy():
    assert issubclass(NonThermalDistributionError, FitError)
    assert issubclass(FitError, RuntimeError)


def test_fit_on_iid_exponential_samples():
    rng = np.random.default_rng(5)
    energies = rng.exponential(3.0, size=5000)
    fit, hist = fit_energy_samples(energies)
    assert 2.8 < fit.temperature < 3.3
    assert fit.sigma < 0.15
    assert hist.overflow_fraction < 0.01


@settings(max_examples=25, deadline=None)
@given(scale=st.floats(min_value=0.1, max_value=10.0))
def test_fit_scales_with_the_energy_unit(scale):
    energies = np.random.default_rng(17).exponential(2.0, size=2000)
    base, _ = fit_energy_samples(energies)
    scaled, _ = fit_energy_samples(scale * energies)
    assert scaled.temperature == pytest.approx(scale * base.temperature, rel=1e-9)


def test_fit_empty_sample_is_rejected():
    with pytest.raises(ValueError, match="empty"):
        fit_energy_samples([])


# -- aggregation -------------------------------------------------------


def _stub_fit(t, s):
    return TemperatureFit(temperature=t, sigma=s, slope=-1.0 / t, intercept=0.0,
                          n_bins_used=10, goodness=0.0)


def test_aggregate_is_inverse_variance_weighted():
    t, s = aggregate_seeds([_stub_fit(4.0, 1.0), _stub_fit(6.0, 2.0)])
    assert t == pytest.approx(4.4, rel=1e-12)
    assert s == pytest.approx(1.0 / np.sqrt(1.25), rel=1e-12)


def test_aggregate_validation():
    with pytest.raises(ValueError, match="no fits"):
        aggregate_seeds([])
    with pytest.raises(ValueError, match="positive standard error"):
        aggregate_seeds([_stub_fit(4.0, 0.0)])


# -- bath thermometry --------------------------------------------------


def test_bath_temperature_single_realization(band):
    spec = BathSpec(size=2000, mass=0.01, temperature=5.0, dos=band)
    fit = bath_temperature(realize_bath(spec, seed=4))
    assert isinstance(fit, TemperatureFit)
    assert 0.9 < fit.ratio(5.0) < 1.15


def test_bath_temperature_aggregates_realizations(band):
    spec = BathSpec(size=2000, mass=0.01, temperature=5.0, dos=band)
    reals = [realize_bath(spec, seed=s) for s in (4, 5, 6)]
    agg = bath_temperature(reals)
    assert isinstance(agg, AggregateTemperature)
    assert len(agg.per_seed) == 3
    assert agg.sigma < min(f.sigma for f in agg.per_seed)
    assert 4.5 < agg.temperature < 5.75


def test_bath_temperature_needs_enough_oscillators(band):
    spec = BathSpec(size=50, mass=0.01, temperature=5.0, dos=band)
    with pytest.raises(ValueError, match="at least 100"):
        bath_temperature(realize_bath(spec, seed=1))


# -- skewness ----------------------------------------------------------


def test_skewness_matches_the_reference_implementation():
    rng = np.random.default_rng(3)
    x = rng.exponential(1.0, size=4000)
    assert sample_skewness(x) == pytest.approx(scipy.stats.skew(x), rel=1e-12)
    assert 1.5 < sample_skewness(x) < 2.5
    y = rng.normal(size=4000)
    assert abs(sample_skewness(y)) < 0.15
    assert sample_skewness(np.ones(10)) == 0.0
