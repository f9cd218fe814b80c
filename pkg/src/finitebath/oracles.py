"""Closed-form references the microscopic simulation is checked against.

These are small, independent implementations of the analytic limits of
the model: the memory kernel and fluctuation force of the generalized
Langevin form, the Markovian Langevin reference, the zero bandwidth
exchange law with its arcsine sampling distribution, the frequency
renormalization scaling, and the two temperature mixture with its
effective temperature.
"""

from __future__ import annotations

import numpy as np
from scipy import stats as sp_stats

from .model import BathRealization, BathSpec, TestParticleSpec, bare_energy


def memory_kernel(frequencies, m: float, tau) -> np.ndarray:
    """Gamma(tau) = sum_n m w_n^2 cos(w_n tau)."""
    frequencies = np.asarray(frequencies, dtype=float)
    tau = np.asarray(tau, dtype=float)
    spring = m * frequencies**2
    return np.cos(np.multiply.outer(tau, frequencies)) @ spring


def fluctuation_force(real: BathRealization, tp: TestParticleSpec, t,
                      t0: float = 0.0) -> np.ndarray:
    """Pi(t) from the bath initial conditions, the GLE driving force.

    Pi(t) = sum_n m w_n^2 [ (q_n(t0) - Q(t0)) cos(w_n (t - t0))
                            + p_n(t0) / (m w_n) sin(w_n (t - t0)) ]
    """
    t = np.asarray(t, dtype=float)
    w = real.frequencies
    spring = real.m * w**2
    phase = np.multiply.outer(t - t0, w)
    cos_part = (real.positions - tp.q0) * spring
    sin_part = real.momenta * w
    return np.cos(phase) @ cos_part + np.sin(phase) @ sin_part


def langevin_friction(tp: TestParticleSpec, bath: BathSpec, omega: float) -> float:
    """Markovian friction rate gamma = pi m w^2 / (2 M) * dN/dw at w = omega."""
    dn_domega = bath.size * float(bath.dos.pdf(omega))
    return np.pi * bath.mass * omega**2 / (2.0 * tp.mass) * dn_domega


def langevin_reference(tp: TestParticleSpec, gamma: float, temperature: float,
                       t_final: float, dt: float, rng: np.random.Generator,
                       n_paths: int = 1, sample_stride: int = 1):
    """Euler-Maruyama integration of the Markovian limit.

        dQ = P/M dt
        dP = -(gamma P + M Omega^2 Q) dt + sqrt(2 M gamma T) dW

    The noise amplitude uses the particle mass M, which is what makes
    the stationary state satisfy <P^2> = M T (equipartition at T).
    Returns (times, energies) with energies of shape (n_paths, n_times).
    dt must be well below both 1/gamma and 1/Omega; Euler-Maruyama's
    energy bias scales like Omega^2 dt / (2 gamma).
    """
    if dt <= 0.0 or t_final <= 0.0:
        raise ValueError("dt and t_final must be positive")
    m = tp.mass
    n_steps = int(round(t_final / dt))
    q = np.full(n_paths, tp.q0, dtype=float)
    p = np.full(n_paths, tp.p0, dtype=float)
    noise_amp = np.sqrt(2.0 * m * gamma * temperature * dt)
    k = m * tp.omega**2
    times = []
    energies = []
    for step in range(1, n_steps + 1):
        dq = (p / m) * dt
        dp = -(gamma * p + k * q) * dt + noise_amp * rng.standard_normal(n_paths)
        q = q + dq
        p = p + dp
        if step % sample_stride == 0:
            times.append(step * dt)
            energies.append(bare_energy(q, p, tp))
    return np.array(times), np.array(energies).T


def degenerate_energy_series(e0: float, omega_r: float, times) -> np.ndarray:
    """Analytic exchange law E0 sin(w_R t), clamped to the physical band [0, E0].

    This is only a period/amplitude reference; the microscopic
    integration of the degenerate bath is the authoritative series.
    """
    times = np.asarray(times, dtype=float)
    return np.clip(e0 * np.sin(omega_r * times), 0.0, e0)


def arcsine_cdf(e, e0: float) -> np.ndarray:
    """CDF of the sampled energy of a sinusoidally exchanging particle."""
    e = np.asarray(e, dtype=float)
    return 2.0 / np.pi * np.arcsin(np.sqrt(np.clip(e / e0, 0.0, 1.0)))


def arcsine_distribution_check(samples, e0: float) -> tuple[float, float]:
    """KS statistic and p-value of samples against the arcsine law on (0, e0).

    Samples outside the open interval cannot come from the law and are
    rejected up front with their count.
    """
    samples = np.asarray(samples, dtype=float)
    outside = int(np.sum((samples <= 0.0) | (samples >= e0)))
    if outside:
        raise ValueError(
            f"{outside} of {samples.size} samples lie outside (0, {e0}); "
            "they cannot follow the arcsine exchange law")
    result = sp_stats.kstest(samples, lambda e: arcsine_cdf(e, e0))
    return float(result.statistic), float(result.pvalue)


def renormalized_frequency(omega: float, xi: float) -> float:
    """Effective particle frequency sqrt(1 + xi) Omega, xi = N m / M."""
    if xi < 0.0:
        raise ValueError(f"mass ratio xi must be >= 0, got {xi}")
    return float(np.sqrt(1.0 + xi) * omega)


def mixture_distribution(e, t1: float, t2: float) -> np.ndarray:
    """Equal weight mixture of two Boltzmann densities, normalized."""
    if t1 <= 0.0 or t2 <= 0.0:
        raise ValueError("mixture temperatures must be positive")
    e = np.asarray(e, dtype=float)
    return 0.5 * (np.exp(-e / t1) / t1 + np.exp(-e / t2) / t2)


def effective_temperature(e: float, t1: float, t2: float,
                          rel_tol: float = 1e-10) -> float:
    """Solve T e^{-E/T} = (T1 e^{-E/T1} + T2 e^{-E/T2}) / 2 for T.

    The left side is strictly increasing in T, so the root is unique and
    bisection on [min(T1,T2)/2, 2 max(T1,T2)] always converges.  At
    E = 0 the answer is exactly the arithmetic mean.
    """
    if t1 <= 0.0 or t2 <= 0.0:
        raise ValueError("temperatures must be positive")
    if e < 0.0:
        raise ValueError(f"energy must be >= 0, got {e}")
    if e == 0.0:
        return 0.5 * (t1 + t2)
    target = 0.5 * (t1 * np.exp(-e / t1) + t2 * np.exp(-e / t2))
    lo = 0.5 * min(t1, t2)
    hi = 2.0 * max(t1, t2)

    def f(t):
        return t * np.exp(-e / t) - target

    flo, fhi = f(lo), f(hi)
    if flo > 0.0 or fhi < 0.0:
        raise RuntimeError("bisection bracket does not contain the root; "
                           "this contradicts monotonicity and should not occur")
    while (hi - lo) > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if f(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
