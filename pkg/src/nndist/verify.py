"""Monte Carlo verification of the probabilistic guarantees.

Covers the average Rademacher complexity against its closed-form bound,
the sub-Gaussian concentration tail of the supremum statistic, the moment
generating function bound for quadratic forms of sub-Gaussian vectors, the
per-sample bounded-difference property of the supremum, and log-log rate
fits of the estimation error.

Tail checks default to the exact grid oracle on tiny architectures so the
Lipschitz constant applies to the statistic exactly; ascent mode is
available for exploration but its tail results are diagnostic only.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .bounds import lipschitz_product, radii_product
from .constraints import ConstraintSet
from .distributions import DistributionSpec, LeCamQuadruple, SampleSet, derive_seed, rng_from, sample
from .errors import DegenerateFitError, ValidationError
from .estimator import (
    AscentConfig,
    ascent_supremum,
    brute_force_nnd,
    estimate_nnd,
    grid_supremum,
)
from .networks import NetworkSpec


@dataclass(frozen=True)
class MCResult:
    mean: float
    std_error: float
    trials: int
    seed: int
    values: tuple[float, ...] | None = None


@dataclass(frozen=True)
class TailCheck:
    epsilons: tuple[float, ...]
    empirical_freq: tuple[float, ...]
    bounds: tuple[float, ...]
    valid: tuple[bool, ...]
    trials: int
    lipschitz: float


def _oracle_qualifies(spec: NetworkSpec) -> bool:
    return (
        spec.depth == 2
        and spec.widths == (1,)
        and spec.input_dim <= 3
        and spec.activations[0].homogeneous
    )


def _summarise(values: np.ndarray, trials: int, seed: int, keep_values: bool) -> MCResult:
    return MCResult(
        mean=float(values.mean()),
        std_error=float(values.std(ddof=1) / math.sqrt(trials)),
        trials=trials,
        seed=seed,
        values=tuple(float(v) for v in values) if keep_values else None,
    )


def mc_rademacher(
    dist: DistributionSpec,
    spec: NetworkSpec,
    cs: ConstraintSet,
    n: int,
    trials: int,
    cfg: AscentConfig | None = None,
    seed: int = 0,
    mode: str = "auto",
    keep_values: bool = False,
) -> MCResult:
    """Monte Carlo estimate of the average Rademacher complexity.

    Each trial draws n samples and uniform signs, then maximises the
    absolute signed empirical average over the feasible family.  Per-trial
    values lower-bound the true per-trial supremum unless the exact grid
    oracle applies.
    """
    if trials < 2:
        raise ValidationError(f"need at least 2 trials, got {trials}")
    if mode not in ("auto", "brute_force", "ascent"):
        raise ValidationError(f"unknown mode {mode!r}")
    use_oracle = mode == "brute_force" or (mode == "auto" and _oracle_qualifies(spec))
    if mode == "brute_force" and not _oracle_qualifies(spec):
        raise ValidationError("architecture does not qualify for the exact grid oracle")
    cfg = cfg or AscentConfig(restarts=4, steps=150)
    values = np.empty(trials)
    for t in range(trials):
        xs = sample(dist, n, derive_seed(seed, t, 0))
        signs = rng_from(seed, t, 1).integers(0, 2, size=n) * 2.0 - 1.0
        weights = signs / n
        if use_oracle:
            values[t] = grid_supremum(xs.data, weights, spec, cs)
        else:
            trial_cfg = dataclasses.replace(cfg, seed=derive_seed(seed, t, 2))
            values[t] = ascent_supremum(xs.data, weights, spec, cs, trial_cfg).value
    return _summarise(values, trials, seed, keep_values)


def concentration_tailcheck(
    dists,
    spec: NetworkSpec,
    cs: ConstraintSet,
    n: int,
    m: int,
    trials: int,
    eps_grid,
    mode: str = "brute_force",
    seed: int = 0,
    cfg: AscentConfig | None = None,
) -> TailCheck:
    """Empirical tail of the supremum statistic against the closed-form bound.

    The statistic per trial is the empirical distance on fresh samples;
    its centred exceedance frequencies are compared with

        exp(-eps^2 m n / (8 h gamma^2 L^2 (m + n)))

    where L is the product of radii and Lipschitz constants.  Each epsilon
    is flagged valid when it lies in the admissible range of the bound.
    """
    if isinstance(dists, LeCamQuadruple):
        mu, nu = dists.mu1, dists.nu1
    else:
        mu, nu = dists
    if mode not in ("brute_force", "ascent"):
        raise ValidationError(f"unknown mode {mode!r}")
    if mode == "brute_force" and not _oracle_qualifies(spec):
        raise ValidationError("brute_force tail checks require the exact-oracle architecture")
    if trials < 100:
        warnings.warn("fewer than 100 trials: tail frequencies are unreliable", RuntimeWarning)
    eps_grid = tuple(float(e) for e in eps_grid)
    h = spec.input_dim
    gamma = max(mu.gamma, nu.gamma)
    lipschitz = radii_product(cs) * lipschitz_product(spec.activations)
    cfg = cfg or AscentConfig(restarts=4, steps=150)

    stats = np.empty(trials)
    for t in range(trials):
        xs = sample(mu, n, derive_seed(seed, t, 0))
        ys = sample(nu, m, derive_seed(seed, t, 1))
        if mode == "brute_force":
            stats[t] = brute_force_nnd(xs, ys, spec, cs)
        else:
            trial_cfg = dataclasses.replace(cfg, seed=derive_seed(seed, t, 2))
            stats[t] = estimate_nnd(xs, ys, spec, cs, trial_cfg).value
    centred = stats - stats.mean()
    scale = 8.0 * h * gamma * gamma * lipschitz * lipschitz * (m + n)
    eps_max = math.sqrt(3.0) * h * gamma * lipschitz * min(m, n) * (1.0 / n + 1.0 / m)
    freqs = tuple(float((centred >= e).mean()) for e in eps_grid)
    bounds = tuple(math.exp(-e * e * m * n / scale) for e in eps_grid)
    valid = tuple(bool(e <= eps_max) for e in eps_grid)
    return TailCheck(
        epsilons=eps_grid,
        empirical_freq=freqs,
        bounds=bounds,
        valid=valid,
        trials=trials,
        lipschitz=lipschitz,
    )


def spectral_norm_power(mat: np.ndarray, tol: float = 1e-10, max_iter: int = 10000) -> float:
    """Largest eigenvalue of a symmetric PSD matrix by power iteration."""
    mat = np.asarray(mat, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValidationError(f"need a square matrix, got shape {mat.shape}")
    if not np.any(mat):
        return 0.0
    v = rng_from(0x5eed, mat.shape[0]).standard_normal(mat.shape[0])
    v /= np.linalg.norm(v)
    value = 0.0
    for _ in range(max_iter):
        w = mat @ v
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            return 0.0
        v = w / nrm
        new_value = float(v @ (mat @ v))
        if abs(new_value - value) <= tol * max(1.0, abs(new_value)):
            return new_value
        value = new_value
    return value


def mgf_check(
    dist: DistributionSpec, a_matrix, eta: float, trials: int, seed: int = 0
) -> tuple[float, float]:
    """Empirical E exp(eta |A x|^2) against its sub-Gaussian closed-form bound.

    Admissible range: 0 <= eta < 1 / (2 tau^2 |A^T A|).
    """
    if dist.variant != "gaussian":
        raise ValidationError("the MGF check is defined for Gaussian specs")
    a_matrix = np.asarray(a_matrix, dtype=np.float64)
    h = dist.dim
    if a_matrix.shape != (h, h):
        raise ValidationError(f"matrix must be ({h}, {h}), got {a_matrix.shape}")
    sigma = a_matrix.T @ a_matrix
    snorm = spectral_norm_power(sigma)
    tau2 = dist.tau2
    if eta < 0 or (snorm > 0 and eta >= 1.0 / (2.0 * tau2 * snorm)):
        raise ValidationError(f"eta {eta} outside the admissible range [0, {1.0 / (2.0 * tau2 * snorm)})")
    trace = float(np.trace(sigma))
    trace_sq = float(np.trace(sigma @ sigma))
    au_norm2 = float(np.sum((a_matrix @ dist.mean) ** 2))
    denom = 1.0 - 2.0 * tau2 * snorm * eta
    bound = math.exp(tau2 * trace * eta + (tau2 * tau2 * trace_sq * eta * eta + au_norm2 * eta) / denom)
    xs = sample(dist, trials, seed)
    empirical = float(np.exp(eta * np.sum((xs.data @ a_matrix.T) ** 2, axis=1)).mean())
    return empirical, bound


def bounded_difference_check(
    spec: NetworkSpec,
    cs: ConstraintSet,
    n_samples: int,
    n_perturb: int,
    seed: int = 0,
    grid_deg: float | None = None,
) -> float:
    """Largest observed per-sample difference ratio of the supremum statistic.

    Replaces one sample at a time and returns max |F' - F| * count / |x - x'|,
    which must stay at or below the product of radii and Lipschitz constants.
    Restricted to the exact-oracle architecture so the statistic is the true
    supremum over the grid family.
    """
    if not _oracle_qualifies(spec):
        raise ValidationError("bounded-difference checks require the exact-oracle architecture")
    if n_samples < 1 or n_perturb < 1:
        raise ValidationError("need at least one sample and one perturbation")
    h = spec.input_dim
    base_rng = rng_from(seed, 0)
    xs = base_rng.standard_normal((n_samples, h))
    ys = base_rng.standard_normal((n_samples, h))
    weights = np.concatenate([np.full(n_samples, 1.0 / n_samples), np.full(n_samples, -1.0 / n_samples)])
    base = grid_supremum(np.vstack([xs, ys]), weights, spec, cs, grid_deg)

    worst = 0.0
    for p in range(n_perturb):
        rng = rng_from(seed, p + 1)
        on_x = bool(rng.integers(0, 2))
        idx = int(rng.integers(0, n_samples))
        new_point = rng.standard_normal(h)
        xs2, ys2 = xs, ys
        if on_x:
            xs2 = xs.copy()
            old = xs[idx]
            xs2[idx] = new_point
        else:
            ys2 = ys.copy()
            old = ys[idx]
            ys2[idx] = new_point
        shift = float(np.linalg.norm(old - new_point))
        if shift == 0.0:
            continue
        perturbed = grid_supremum(np.vstack([xs2, ys2]), weights, spec, cs, grid_deg)
        worst = max(worst, abs(perturbed - base) * n_samples / shift)
    return worst


@dataclass(frozen=True)
class RateResult:
    rows: tuple[tuple[int, int, float, float], ...]  # (n, rep_count, mean_error, std_error)
    slope: float
    intercept: float


def rate_experiment(
    pair_builder: Callable[[int, int], tuple[SampleSet, SampleSet]],
    spec: NetworkSpec,
    cs: ConstraintSet,
    n_grid,
    reps: int,
    cfg: AscentConfig | None = None,
    seed: int = 0,
    estimate_fn: Callable[[SampleSet, SampleSet, int], float] | None = None,
) -> RateResult:
    """Estimation error versus sample size with a fitted log-log slope.

    ``pair_builder(n, rep_seed)`` must draw two independent n-sample sets
    from EQUAL distributions, so the population distance is zero and the
    estimate itself is the estimation error.
    """
    n_grid = [int(n) for n in n_grid]
    if len(n_grid) < 4 or any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ValidationError("n grid must be strictly increasing with at least 4 points")
    if reps < 5:
        raise ValidationError(f"need at least 5 reps, got {reps}")
    cfg = cfg or AscentConfig()
    if estimate_fn is None:

        def estimate_fn(xs, ys, trial_seed):
            return estimate_nnd(xs, ys, spec, cs, dataclasses.replace(cfg, seed=trial_seed)).value

    rows = []
    for n in n_grid:
        errors = np.empty(reps)
        for r in range(reps):
            rep_seed = derive_seed(seed, n, r)
            xs, ys = pair_builder(n, rep_seed)
            errors[r] = estimate_fn(xs, ys, derive_seed(rep_seed, 2))
        rows.append((n, reps, float(errors.mean()), float(errors.std(ddof=1) / math.sqrt(reps))))

    log_n = np.log([row[0] for row in rows])
    means = np.array([row[2] for row in rows])
    if np.ptp(log_n) == 0.0:
        raise DegenerateFitError("zero variance in log n")
    if np.any(means <= 0.0):
        raise DegenerateFitError("mean error vanished; log-log fit undefined")
    slope, intercept = np.polyfit(log_n, np.log(means), 1)
    return RateResult(rows=tuple(rows), slope=float(slope), intercept=float(intercept))
