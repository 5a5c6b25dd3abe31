"""Sporadic samples of a known multivariate CAR(1) process."""

import logging

import numpy as np
from scipy import linalg

from sporadic_rnn.data.errors import DataError
from sporadic_rnn.models.process import ProcessSpec
from sporadic_rnn.models.series import Observation, SporadicDataset, SporadicSeries

log = logging.getLogger(__name__)


def discretize(spec: ProcessSpec, delta_t: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Exact transition over a gap: x ← A x + a + η with η ~ N(0, Q).

    A = e^{ΦΔt}, a = Φ⁻¹(A − I)ς. Q is the integrated diffusion, from the
    matrix fraction decomposition (`noise="exact"`) or ΔtΨ (`noise="linear"`).
    """
    phi, bias, psi = spec.drift_matrix, spec.bias_vector, spec.psi
    n = spec.n_features
    a_mat = linalg.expm(phi * delta_t)
    if np.any(bias):
        if np.linalg.matrix_rank(phi) < n:
            raise DataError("drift matrix is singular but the bias is non-zero")
        offset = np.linalg.solve(phi, (a_mat - np.eye(n)) @ bias)
    else:
        offset = np.zeros(n)

    if spec.noise == "linear":
        cov = delta_t * psi
    else:
        block = np.zeros((2 * n, 2 * n))
        block[:n, :n] = phi
        block[:n, n:] = psi
        block[n:, n:] = -phi.T
        ab = linalg.expm(block * delta_t) @ np.vstack((np.zeros((n, n)), np.eye(n)))
        cov = linalg.solve(ab[n:, :].T, ab[:n, :].T)
        cov = 0.5 * (cov + cov.T)
    return a_mat, offset, cov


def sample_times(spec: ProcessSpec, rng: np.random.Generator) -> np.ndarray:
    """Arrival times on [0, horizon] starting at 0; always at least two."""
    times = [0.0]
    while True:
        if spec.arrival == "uniform":
            gap = rng.uniform(0.5, 1.5) * spec.arrival_rate
        else:
            gap = rng.exponential(spec.arrival_rate)
        t = times[-1] + gap
        if t > spec.horizon and len(times) >= 2:
            break
        if gap > 0:
            times.append(t)
    return np.array(times)


def simulate_path(
    spec: ProcessSpec,
    times: np.ndarray,
    rng: np.random.Generator,
) -> np.ndarray:
    """Latent states at `times` (len(times)×N)."""
    n = spec.n_features
    x = np.asarray(spec.initial_mean or [0.0] * n, dtype=float)
    if spec.initial_cov is not None and np.any(spec.initial_cov):
        x = x + np.linalg.cholesky(np.asarray(spec.initial_cov)) @ rng.standard_normal(n)
    has_noise = bool(np.any(spec.psi))
    states = [x]
    for dt in np.diff(times):
        a_mat, offset, cov = discretize(spec, dt)
        x = a_mat @ x + offset
        if has_noise:
            x = x + rng.multivariate_normal(np.zeros(n), cov, method="eigh")
        states.append(x)
    return np.array(states)


def simulate_subject(spec: ProcessSpec, index: int) -> tuple[SporadicSeries, np.ndarray]:
    """One subject's sporadic series and its latent path.

    The random stream depends only on (seed, index).
    """
    rng = np.random.default_rng([spec.seed, index])
    times = sample_times(spec, rng)
    path = simulate_path(spec, times, rng)
    missing = np.asarray(spec.missing_prob)
    observations = []
    for t, x in zip(times, path, strict=True):
        keep = rng.random(spec.n_features) >= missing
        if not keep.any():
            keep[rng.integers(spec.n_features)] = True
        noise = rng.normal(0.0, spec.measurement_noise, spec.n_features)
        for f in np.flatnonzero(keep):
            value = x[f] + noise[f] if spec.measurement_noise > 0 else x[f]
            observations.append(Observation(time=float(t), feature=int(f), value=float(value)))
    return SporadicSeries(subject_id=f"s{index:05d}", observations=observations), path


def generate_synthetic(spec: ProcessSpec) -> SporadicDataset:
    """Sample `n_subjects` independent sporadic series."""
    log.info(
        f"Simulating {spec.n_subjects} subjects, {spec.n_features} features, "
        f"horizon={spec.horizon}, mean gap={spec.arrival_rate}"
    )
    series = [simulate_subject(spec, i)[0] for i in range(spec.n_subjects)]
    n_obs = sum(len(s.observations) for s in series)
    log.info(f"Generated {n_obs} observations")
    return SporadicDataset(feature_names=spec.names, series=series)
