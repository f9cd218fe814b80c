"""Sweep drivers, curve reduction and the degenerate exchange experiment."""

import numpy as np
import pytest

from finitebath.experiments import (
    SweepSpec,
    exchange_splitting,
    peak_location,
    run_degenerate_exchange,
    run_initial_energy_scan,
    run_single_bath_point,
    run_sweep,
    run_two_bath_point,
    run_two_bath_sweep,
    smoothed_curve,
)
from finitebath.model import BathSpec, DensityOfStates
from finitebath.stats import SamplingPlan

BAND = DensityOfStates("uniform", 0.2, 1.0)
QUICK_PLAN = SamplingPlan(mean_interval=2.0, n_samples=400, warmup=100.0)


def _quick_spec(**kwargs):
    defaults = dict(
        omega_grid=(0.5,),
        bath1=BathSpec(size=150, mass=0.01, temperature=5.0, dos=BAND),
        seeds=(1,),
        plan=QUICK_PLAN,
    )
    defaults.update(kwargs)
    return SweepSpec(**defaults)


# -- curve reduction ---------------------------------------------------


def test_smoothing_hand_case():
    np.testing.assert_allclose(smoothed_curve([1.0, 4.0, 2.0, 8.0]),
                               [2.5, 7.0 / 3.0, 14.0 / 3.0, 5.0], rtol=1e-12)


def test_smoothing_skips_gaps():
    out = smoothed_curve([1.0, np.nan, 3.0])
    np.testing.assert_allclose(out, [1.0, 2.0, 3.0], rtol=1e-12)
    assert np.all(np.isnan(smoothed_curve([np.nan, np.nan])))


def test_peak_location_uses_the_smoothed_curve():
    omegas = [0.1, 0.2, 0.3, 0.4]
    assert peak_location(omegas, [1.0, 4.0, 2.0, 8.0]) == pytest.approx(0.4)
    # the raw argmax (index 1) loses to the smoothed shoulder around it
    assert peak_location(omegas, [1.0, 5.0, 4.5, 4.4]) == pytest.approx(0.3)
    with pytest.raises(ValueError, match="no finite values"):
        peak_location(omegas, [np.nan] * 4)


# -- sweep spec --------------------------------------------------------


def test_sweep_spec_validation():
    with pytest.raises(ValueError, match="omega_grid"):
        _quick_spec(omega_grid=())
    with pytest.raises(ValueError, match="positive"):
        _quick_spec(omega_grid=(0.5, -1.0))
    with pytest.raises(ValueError, match="seed"):
        _quick_spec(seeds=())
    with pytest.raises(ValueError, match="initial_energy"):
        _quick_spec(initial_energy=-1.0)
    with pytest.raises(ValueError, match="unknown propagator"):
        _quick_spec(propagator="verlet")
    with pytest.raises(ValueError, match="unknown energy convention"):
        _quick_spec(energy_convention="free")
    with pytest.raises(ValueError, match="unknown renormalization"):
        _quick_spec(renormalization="half")


def test_spec_puts_the_initial_energy_in_the_momentum():
    spec = _quick_spec(tp_mass=2.0, initial_energy=8.0)
    tp = spec.test_particle(0.5)
    assert tp.q0 == 0.0
    assert tp.p0 == pytest.approx(np.sqrt(32.0))
    assert tp.initial_energy() == pytest.approx(8.0)


# -- single bath points ------------------------------------------------


def test_single_point_is_deterministic_and_thermal():
    spec = _quick_spec()
    a = run_single_bath_point(0.5, spec, seed=1)
    b = run_single_bath_point(0.5, spec, seed=1)
    assert a.fit is not None
    assert a.fit.temperature == b.fit.temperature
    assert 3.0 < a.fit.temperature < 8.0
    assert a.hist.total_samples == 400
    assert len(a.bath_final) == 1
    assert a.bath_final[0] is not None
    assert 3.0 < a.bath_final[0].temperature < 8.0


def test_rk4_point_agrees_with_the_spectral_point():
    spec = _quick_spec(
        bath1=BathSpec(size=40, mass=0.01, temperature=5.0, dos=BAND),
        plan=SamplingPlan(mean_interval=1.0, n_samples=150, warmup=20.0))
    eig = run_single_bath_point(0.5, spec, seed=2)
    rk4 = run_single_bath_point(0.5, _quick_spec(
        bath1=spec.bath1, plan=spec.plan, propagator="rk4"), seed=2)
    # sample times snap to the step grid, so agreement is statistical
    assert rk4.mean_energy == pytest.approx(eig.mean_energy, rel=0.05)
    assert rk4.n_steps > 0


# -- two bath points ---------------------------------------------------


def test_two_bath_point_requires_a_second_bath():
    with pytest.raises(ValueError, match="bath2"):
        run_two_bath_point(0.5, _quick_spec(), seed=1)


def test_two_bath_point_runs_and_reports_both_baths():
    small = BathSpec(size=60, mass=0.01, temperature=5.0, dos=BAND)
    spec = _quick_spec(
        bath1=small, bath2=small,
        plan=SamplingPlan(mean_interval=1.5, n_samples=200, warmup=50.0))
    point = run_two_bath_point(0.4, spec, seed=1)
    assert len(point.bath_final) == 2
    assert point.bath_final == (None, None)   # 60 oscillators: too few to fit
    assert point.mean_energy > 0.0
    static = run_two_bath_point(
        0.4, _quick_spec(bath1=small, bath2=small, plan=spec.plan,
                         renormalization="static"), seed=1)
    assert static.mean_energy != point.mean_energy


# -- sweeps ------------------------------------------------------------


def test_sweep_covers_the_grid_and_flags_the_decoupled_regime():
    spec = _quick_spec(omega_grid=(0.5, 10.0), seeds=(1, 2))
    curve = run_sweep(spec)
    assert curve.omegas.shape == (2,)
    assert curve.n_baths == 1
    assert 3.0 < curve.temperature[0] < 8.0
    # decoupled: either no thermal fit at all or a freezing temperature
    assert np.isnan(curve.temperature[1]) or curve.temperature[1] < 1.5
    t_init, s_init = curve.bath_initial[0]
    assert 4.0 < t_init < 6.5
    assert s_init > 0.0


def test_two_bath_sweep_produces_alone_curves():
    small = BathSpec(size=60, mass=0.01, temperature=5.0, dos=BAND)
    spec = _quick_spec(
        omega_grid=(0.4,), bath1=small, bath2=small, seeds=(1, 2),
        plan=SamplingPlan(mean_interval=1.5, n_samples=200, warmup=50.0))
    res = run_two_bath_sweep(spec)
    assert res.combined.n_baths == 2
    assert len(res.alone) == 2
    for curve in res.alone:
        assert curve.n_baths == 1
        assert curve.omegas.shape == (1,)
    bare = run_two_bath_sweep(spec, include_alone=False)
    assert bare.alone == ()
    with pytest.raises(ValueError, match="bath2"):
        run_two_bath_sweep(_quick_spec())


# -- initial energy scan -----------------------------------------------


def test_energy_scan_decoupled_particle_keeps_its_energy():
    spec = _quick_spec(
        bath1=BathSpec(size=100, mass=0.001, temperature=5.0, dos=BAND),
        seeds=(1, 2, 3),
        plan=SamplingPlan(mean_interval=1.0, n_samples=200, warmup=10.0))
    scan = run_initial_energy_scan([50.0], [0.5], spec)
    assert scan.temperature.shape == (1, 1)
    assert 0.35 < scan.mean_energy[0, 0] < 0.55


# -- degenerate exchange -----------------------------------------------


def test_degenerate_exchange_beats_at_the_splitting():
    res = run_degenerate_exchange(n=8, xi=0.04, omega_r=1.0, e0=10.0,
                                  n_periods=32, n_grid=4096,
                                  n_ks_samples=500)
    dnu = exchange_splitting(1.0, 0.04)
    assert res.exchange_frequency == pytest.approx(dnu, rel=1e-12)
    assert res.dominant_frequency == pytest.approx(dnu, rel=0.05)
    assert res.secondary_ratio < 0.3
    assert res.e0 == pytest.approx(10.0)
    assert np.min(res.energies) > -1e-9
    assert np.max(res.energies) > 8.5
    assert np.max(res.energies) < 10.0 * 1.2
    assert res.ks_energies.shape == (500,)
