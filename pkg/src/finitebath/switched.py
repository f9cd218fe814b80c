"""Alternating contact with two baths, integrated by classical RK4.

The coupling is switched as a square wave: bath 1 is engaged during
step blocks [2k dT, (2k+1) dT) and bath 2 during the complementary
blocks (or the other way round).  Two drift matrices A1 and A2 of the
same dimension describe the two contact phases; during its off phase a
bath evolves freely and exerts no force on the particle.

Switching happens only on step boundaries, and observations are snapped
to the nearest completed step (distance <= dt/2, reported).

Because the system is linear, one classical RK4 step equals multiplying
by I + hA + (hA)^2/2 + (hA)^3/6 + (hA)^4/24.  Long runs exploit that:
the map over one full switching period is diagonalized once, after
which any sample time costs O(N) instead of stepping there.  The
spectral engine is checked against the literal stepping engine and
falls back to it when the factorization looks degraded.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .model import BathRealization, BathSpec, SystemState, TestParticleSpec
from .propagator import (CouplingMatrix, NumericalError,
                         build_multi_coupling_matrix)


@dataclass(frozen=True)
class SwitchSchedule:
    """Square wave contact schedule in units of RK4 steps."""

    delta_t_steps: int = 1
    step_size: float = 0.02
    active_first: int = 1

    def __post_init__(self):
        if self.delta_t_steps < 1:
            raise ValueError(f"delta_t_steps must be >= 1, got {self.delta_t_steps}")
        if self.step_size <= 0.0:
            raise ValueError(f"step_size must be positive, got {self.step_size}")
        if self.active_first not in (1, 2):
            raise ValueError(f"active_first must be 1 or 2, got {self.active_first}")

    @property
    def period_steps(self) -> int:
        return 2 * self.delta_t_steps

    def bath1_active(self, step: int) -> bool:
        """Whether bath 1 is engaged during step index `step`."""
        first = (step // self.delta_t_steps) % 2 == 0
        return first if self.active_first == 1 else not first


DEFAULT_STEPS_PER_PERIOD = 50


def default_step_size(tp: TestParticleSpec, frequencies,
                      steps_per_period: int = DEFAULT_STEPS_PER_PERIOD) -> float:
    """One steps_per_period'th of the shortest period in the system.

    The particle frequency participates too: a stiff particle that RK4
    does not resolve would be damped artificially over long runs.
    """
    w = max(float(np.max(np.concatenate([np.atleast_1d(f) for f in frequencies]))),
            tp.omega)
    if w <= 0.0:
        raise ValueError("need at least one positive frequency to set a step size")
    return 2.0 * np.pi / w / steps_per_period


@dataclass(frozen=True)
class TwoBathSystem:
    """Test particle plus two bath realizations and both contact matrices.

    ``renormalization`` chooses how the quadratic spring sums enter the
    particle stiffness while a bath is disengaged: "switched" removes
    them together with the linear coupling, "static" keeps every bath's
    spring sum in both matrices so only the linear coupling alternates.
    """

    tp: TestParticleSpec
    bath1: tuple           # (BathSpec, BathRealization)
    bath2: tuple | None    # may be None for a degenerate "one bath" setup
    a1: CouplingMatrix
    a2: CouplingMatrix
    renormalization: str = "switched"

    @property
    def dim(self) -> int:
        return self.a1.dim

    @property
    def realizations(self) -> tuple:
        reals = [self.bath1[1]]
        if self.bath2 is not None:
            reals.append(self.bath2[1])
        return tuple(reals)

    def initial_vector(self) -> np.ndarray:
        state = SystemState(
            time=0.0, test_q=self.tp.q0, test_p=self.tp.p0,
            bath_q=tuple(r.positions for r in self.realizations),
            bath_p=tuple(r.momenta for r in self.realizations))
        return state.as_vector()


def build_switched_matrices(tp: TestParticleSpec, bath1, bath2,
                            renormalization: str = "switched") -> TwoBathSystem:
    """Build A1 (bath 1 engaged) and A2 (bath 2 engaged).

    bath1 and bath2 are (BathSpec, BathRealization) pairs; bath2 may be
    None, in which case A1 is exactly the single bath matrix and A2 has
    every coupling disengaged.
    """
    if renormalization not in ("switched", "static"):
        raise ValueError(f"unknown renormalization {renormalization!r}")
    static = renormalization == "static"
    spec1, real1 = bath1
    blocks1 = [(real1.m, real1.frequencies, True)]
    blocks2 = [(real1.m, real1.frequencies, False)]
    if bath2 is not None:
        spec2, real2 = bath2
        blocks1.append((real2.m, real2.frequencies, False))
        blocks2.append((real2.m, real2.frequencies, True))
    a1 = build_multi_coupling_matrix(tp, blocks1, static_renorm=static)
    a2 = build_multi_coupling_matrix(tp, blocks2, static_renorm=static)
    return TwoBathSystem(tp=tp, bath1=bath1, bath2=bath2, a1=a1, a2=a2,
                         renormalization=renormalization)


def switched_energy(system: TwoBathSystem, state, bath1_active: bool) -> float:
    """Instantaneous Hamiltonian honoring the system's renormalization mode.

    Under static renormalization a disengaged bath still contributes its
    spring sum times Q^2/2 to the particle potential.
    """
    from .model import total_energy

    reals = system.realizations
    flags = [bath1_active] + [not bath1_active] * (len(reals) - 1)
    h = total_energy(state, system.tp, list(zip(reals, flags)))
    if system.renormalization == "static":
        for real, active in zip(reals, flags):
            if not active:
                spring = float(np.sum(real.m * real.frequencies**2))
                h += 0.5 * spring * state.test_q**2
    return h


def rk4_step(a: np.ndarray, v: np.ndarray, h: float) -> np.ndarray:
    """One classical RK4 step of v' = A v."""
    k1 = h * (a @ v)
    k2 = h * (a @ (v + 0.5 * k1))
    k3 = h * (a @ (v + 0.5 * k2))
    k4 = h * (a @ (v + k3))
    out = v + (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
    if not np.all(np.isfinite(out)):
        raise NumericalError("RK4 step produced non-finite values; reduce the step size")
    return out


def rk4_update_matrix(a: np.ndarray, h: float) -> np.ndarray:
    """The linear map of one classical RK4 step, I + hA + ... + (hA)^4/24."""
    eye = np.eye(a.shape[0])
    ha = h * a
    u = eye + ha / 4.0
    u = eye + (ha / 3.0) @ u
    u = eye + (ha / 2.0) @ u
    return eye + ha @ u


@dataclass
class SwitchedRunResult:
    """Samples and bookkeeping from one switched run."""

    times: np.ndarray          # snapped sample times
    steps: np.ndarray          # step indices the samples were snapped to
    q: np.ndarray
    p: np.ndarray
    final_state: SystemState | None
    max_snap_distance: float
    n_steps: int
    engine: str
    schedule: SwitchSchedule


class SwitchedPropagator:
    """Propagates one TwoBathSystem under one schedule.

    The object owns only matrix-level data (step maps and, lazily, the
    period map factorization), so one instance can serve many initial
    conditions of the same system, e.g. the same frequency draw filled
    at different temperatures.
    """

    # steps beyond which the period map factorization pays for itself
    FLOQUET_THRESHOLD = 20_000
    QUALITY_TOL = 1e-7

    def __init__(self, system: TwoBathSystem, schedule: SwitchSchedule):
        self.system = system
        self.schedule = schedule
        h = schedule.step_size
        self.u1 = rk4_update_matrix(system.a1.matrix, h)
        self.u2 = rk4_update_matrix(system.a2.matrix, h)
        self._floq = None
        self._floq_broken = False

    def step_matrix(self, step: int) -> np.ndarray:
        return self.u1 if self.schedule.bath1_active(step) else self.u2

    def snap(self, t) -> np.ndarray:
        """Nearest step indices for observation times."""
        t = np.asarray(t, dtype=float)
        return np.rint(t / self.schedule.step_size).astype(np.int64)

    # -- literal stepping ------------------------------------------------

    def _run_dense(self, v0, steps_wanted, final_step, observer):
        wanted = {}
        for i, s in enumerate(steps_wanted):
            wanted.setdefault(int(s), []).append(i)
        q = np.empty(len(steps_wanted))
        p = np.empty(len(steps_wanted))
        v = v0.copy()
        last = max(final_step, max(wanted) if wanted else 0)
        h = self.schedule.step_size
        final_v = v.copy() if final_step == 0 else None
        for idx in wanted.get(0, []):
            q[idx], p[idx] = v[0], v[1]
            if observer is not None:
                observer(0.0, v.copy())
        for s in range(1, last + 1):
            v = self.step_matrix(s - 1) @ v
            if s % 4096 == 0 and not np.all(np.isfinite(v)):
                raise NumericalError(f"switched run diverged by step {s}")
            for idx in wanted.get(s, []):
                q[idx], p[idx] = v[0], v[1]
                if observer is not None:
                    observer(s * h, v.copy())
            if s == final_step:
                final_v = v.copy()
        if not np.all(np.isfinite(v)):
            raise NumericalError("switched run diverged")
        return q, p, final_v

    # -- period map spectral engine --------------------------------------

    def _build_floquet(self):
        dim = self.system.dim
        period = self.schedule.period_steps
        rows01 = np.empty((period, 2, dim), dtype=complex)
        prefix = np.eye(dim)
        prefix_rows = [prefix[0:2].copy()]
        for r in range(1, period):
            prefix = self.step_matrix(r - 1) @ prefix
            prefix_rows.append(prefix[0:2].copy())
        u_period = self.step_matrix(period - 1) @ prefix
        mu, s_mat = np.linalg.eig(u_period)
        res = np.linalg.norm(u_period @ s_mat - s_mat * mu[None, :])
        rel = res / max(np.linalg.norm(u_period), 1e-300)
        if rel > self.QUALITY_TOL:
            warnings.warn(
                f"period map factorization residual {rel:.2e} too large; "
                "using literal stepping", RuntimeWarning, stacklevel=3)
            self._floq_broken = True
            return None
        for r in range(period):
            rows01[r] = prefix_rows[r] @ s_mat
        log_mu = np.log(mu)
        return {"mu": mu, "log_mu": log_mu, "s": s_mat, "rows01": rows01,
                "period": period}

    def _floquet(self):
        if self._floq is None and not self._floq_broken:
            self._floq = self._build_floquet()
        return self._floq

    def _run_floquet(self, v0, steps_wanted, final_step, observer):
        fl = self._floquet()
        if fl is None:
            return self._run_dense(v0, steps_wanted, final_step, observer)
        period = fl["period"]
        vprime0 = np.linalg.solve(fl["s"], v0.astype(complex))
        q = np.empty(len(steps_wanted))
        p = np.empty(len(steps_wanted))
        ks, rs = np.divmod(steps_wanted, period)
        chunk = max(1, 4_000_000 // self.system.dim)
        for lo in range(0, len(steps_wanted), chunk):
            sl = slice(lo, min(lo + chunk, len(steps_wanted)))
            w = np.exp(np.outer(fl["log_mu"], ks[sl])) * vprime0[:, None]
            for r in np.unique(rs[sl]):
                cols = np.nonzero(rs[sl] == r)[0]
                out = fl["rows01"][r] @ w[:, cols]
                scale = np.abs(fl["rows01"][r]) @ np.abs(w[:, cols])
                if np.any(np.abs(out.imag) > 1e-9 * np.maximum(scale, 1e-300)):
                    raise NumericalError(
                        "imaginary residue in period map observation exceeds "
                        "1e-9 of the modal amplitude")
                q[lo + cols] = out[0].real
                p[lo + cols] = out[1].real
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
            raise NumericalError("switched run diverged")
        final_v = None
        if final_step is not None:
            final_v = self._state_floquet(fl, vprime0, final_step)
        if observer is not None:
            h = self.schedule.step_size
            for s in np.asarray(steps_wanted):
                observer(s * h, self._state_floquet(fl, vprime0, int(s)))
        return q, p, final_v

    def _state_floquet(self, fl, vprime0, step):
        k, r = divmod(int(step), fl["period"])
        w = np.exp(fl["log_mu"] * k) * vprime0
        v = fl["s"] @ w
        scale = np.abs(fl["s"]) @ np.abs(w)
        if np.any(np.abs(v.imag) > 1e-7 * np.maximum(scale, 1e-300)):
            raise NumericalError("imaginary residue in reconstructed state")
        v = v.real
        for j in range(r):
            v = self.step_matrix(k * fl["period"] + j) @ v
        return v

    # -- entry point -----------------------------------------------------

    def run(self, v0, sample_times, t_final=None, observer=None,
            engine: str = "auto", want_final_state: bool = True) -> SwitchedRunResult:
        v0 = np.asarray(v0, dtype=float)
        if v0.shape != (self.system.dim,):
            raise ValueError(f"initial vector has shape {v0.shape}, "
                             f"expected ({self.system.dim},)")
        sample_times = np.atleast_1d(np.asarray(sample_times, dtype=float))
        h = self.schedule.step_size
        steps = self.snap(sample_times)
        snapped = steps * h
        max_snap = float(np.max(np.abs(snapped - sample_times))) if len(steps) else 0.0
        if t_final is None:
            t_final = float(snapped.max()) if len(steps) else 0.0
        final_step = int(np.rint(t_final / h)) if want_final_state else None
        last = max(int(steps.max()) if len(steps) else 0, final_step or 0)

        if engine == "auto":
            engine = "floquet" if last > self.FLOQUET_THRESHOLD else "dense"
        if engine == "floquet":
            q, p, final_v = self._run_floquet(v0, steps, final_step, observer)
            used = "dense" if self._floq_broken else "floquet"
        elif engine == "dense":
            q, p, final_v = self._run_dense(v0, steps,
                                            final_step if final_step is not None else 0,
                                            observer)
            used = "dense"
            if not want_final_state:
                final_v = None
        else:
            raise ValueError(f"unknown engine {engine!r}")

        final_state = None
        if final_v is not None and want_final_state:
            final_state = SystemState.from_vector(
                final_v, self.system.a1.bath_sizes, time=(final_step or 0) * h)
        return SwitchedRunResult(times=snapped, steps=steps, q=q, p=p,
                                 final_state=final_state, max_snap_distance=max_snap,
                                 n_steps=last, engine=used, schedule=self.schedule)


def run_switched(system: TwoBathSystem, schedule: SwitchSchedule, t_final: float,
                 sample_times=(), observer: Callable | None = None,
                 initial_state=None, engine: str = "auto",
                 want_final_state: bool = True) -> SwitchedRunResult:
    """Run one switched trajectory and sample the test particle.

    Identical inputs reproduce identical output arrays; the spectral
    engine and the literal stepping engine agree to floating point
    accuracy and are interchangeable.
    """
    if initial_state is None:
        v0 = system.initial_vector()
    elif isinstance(initial_state, SystemState):
        v0 = initial_state.as_vector()
    else:
        v0 = np.asarray(initial_state, dtype=float)
    prop = SwitchedPropagator(system, schedule)
    return prop.run(v0, sample_times, t_final=t_final, observer=observer,
                    engine=engine, want_final_state=want_final_state)


class Rk4Propagator:
    """Stepping stand-in for the spectral propagator (zero mode fallback).

    Exposes the same observation surface as EigenPropagator but walks
    there with RK4 steps, caching the last step boundary so monotone
    observation sequences do not restart from zero.
    """

    def __init__(self, cm: CouplingMatrix, v0: np.ndarray, step_size: float | None = None):
        self.cm = cm
        self.v0 = np.asarray(v0, dtype=float)
        if step_size is None:
            freqs = [f for f in cm.bath_frequencies if len(f)]
            top = max([float(np.max(f)) for f in freqs] + [cm.tp.omega, 1.0])
            step_size = 2.0 * np.pi / top / DEFAULT_STEPS_PER_PERIOD
        self.step_size = step_size
        self.u_step = rk4_update_matrix(cm.matrix, step_size)
        self._cache_step = 0
        self._cache_v = self.v0.copy()

    def _vector_at(self, t: float) -> np.ndarray:
        if t < 0:
            raise ValueError("RK4 fallback cannot step backwards")
        n = int(t / self.step_size)
        if n < self._cache_step:
            self._cache_step = 0
            self._cache_v = self.v0.copy()
        v = self._cache_v
        for _ in range(self._cache_step, n):
            v = self.u_step @ v
        if n > self._cache_step:
            self._cache_step = n
            self._cache_v = v
        rem = t - n * self.step_size
        if rem > 1e-12 * self.step_size:
            v = rk4_step(self.cm.matrix, v, rem)
        if not np.all(np.isfinite(v)):
            raise NumericalError("RK4 fallback diverged")
        return v

    def observe_test_particle(self, t: float) -> tuple[float, float]:
        v = self._vector_at(t)
        return float(v[0]), float(v[1])

    def sample_test_particle(self, times):
        times = np.atleast_1d(np.asarray(times, dtype=float))
        order = np.argsort(times)
        q = np.empty(len(times))
        p = np.empty(len(times))
        for i in order:
            q[i], p[i] = self.observe_test_particle(float(times[i]))
        return q, p

    def full_state(self, t: float) -> SystemState:
        return SystemState.from_vector(self._vector_at(t), self.cm.bath_sizes, time=t)
