"""Distribution classes, samplers and the two-point adversarial constructions.

Two families cover everything the estimators and verifiers need: isotropic
Gaussians (sub-Gaussian with unbounded support, mean norm and variance
parameter both bounded by ``gamma``) and finite-support distributions whose
support lies in the ball of radius ``gamma``.

The quadruple builders produce the two hypothesis pairs used by the
two-point lower-bound argument: one pair at positive distance, one pair
equal (distance zero), with the total sample-level KL divergence capped at
1/2 so no test can reliably tell them apart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AbsoluteContinuityError, ValidationError

_PROB_TOL = 1e-12


def rng_from(seed: int, *stream: int) -> np.random.Generator:
    """Counter-based generator for (seed, stream...); independent across streams."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, stream)])))


def derive_seed(seed: int, *stream: int) -> int:
    """Deterministic child seed for trial loops; independent across streams."""
    return int(np.random.SeedSequence([int(seed), *map(int, stream)]).generate_state(1)[0])


@dataclass(frozen=True)
class DistributionSpec:
    """Gaussian or finite-support distribution with sub-Gaussian metadata.

    gamma:
        For unbounded support: bound on both the mean norm and the
        variance parameter.  For bounded support: the support radius.
    """

    variant: str  # "gaussian" | "finite"
    gamma: float
    support_kind: str  # "unbounded" | "bounded"
    mean: np.ndarray | None = None
    tau2: float | None = None
    points: np.ndarray | None = None
    probs: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.mean.shape[0] if self.variant == "gaussian" else self.points.shape[1]

    @property
    def tau(self) -> float | None:
        return math.sqrt(self.tau2) if self.tau2 is not None else None


def gaussian_spec(mean, tau2: float, gamma: float) -> DistributionSpec:
    """Isotropic Gaussian, checked for membership in the unbounded class."""
    mean = np.ascontiguousarray(mean, dtype=np.float64)
    if mean.ndim != 1 or mean.shape[0] < 1:
        raise ValidationError(f"mean must be a nonempty vector, got shape {mean.shape}")
    if not tau2 > 0:
        raise ValidationError(f"tau2 must be positive, got {tau2}")
    if not gamma > 0:
        raise ValidationError(f"gamma must be positive, got {gamma}")
    if np.linalg.norm(mean) > gamma * (1 + _PROB_TOL):
        raise ValidationError(f"mean norm {np.linalg.norm(mean)} exceeds gamma {gamma}")
    if math.sqrt(tau2) > gamma * (1 + _PROB_TOL):
        raise ValidationError(f"variance parameter {math.sqrt(tau2)} exceeds gamma {gamma}")
    return DistributionSpec(
        variant="gaussian", gamma=float(gamma), support_kind="unbounded", mean=mean, tau2=float(tau2)
    )


def finite_support_spec(points, probs, gamma: float) -> DistributionSpec:
    """Finite-support distribution on points inside the gamma ball."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    probs = np.ascontiguousarray(probs, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] < 1:
        raise ValidationError(f"points must be a nonempty (k, h) matrix, got shape {points.shape}")
    if probs.shape != (points.shape[0],):
        raise ValidationError("need one probability per support point")
    if np.any(probs < -_PROB_TOL) or abs(probs.sum() - 1.0) > _PROB_TOL:
        raise ValidationError(f"probs must be a probability vector, got sum {probs.sum()}")
    if not gamma > 0:
        raise ValidationError(f"gamma must be positive, got {gamma}")
    norms = np.linalg.norm(points, axis=1)
    if np.any(norms > gamma * (1 + _PROB_TOL)):
        raise ValidationError(f"support point norm {norms.max()} exceeds gamma {gamma}")
    return DistributionSpec(
        variant="finite", gamma=float(gamma), support_kind="bounded", points=points, probs=probs
    )


@dataclass(frozen=True)
class SampleSet:
    """n samples as rows, together with the seed that generated them."""

    data: np.ndarray
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "data", np.ascontiguousarray(self.data, dtype=np.float64))
        if self.data.ndim != 2 or self.data.shape[0] < 1:
            raise ValidationError(f"samples must form a nonempty (n, h) matrix, got {self.data.shape}")

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]


def sample(dist: DistributionSpec, n: int, seed: int) -> SampleSet:
    """n i.i.d. draws; deterministic given the seed."""
    if n < 1:
        raise ValidationError(f"sample count must be at least 1, got {n}")
    rng = rng_from(seed)
    if dist.variant == "gaussian":
        data = dist.mean + math.sqrt(dist.tau2) * rng.standard_normal((n, dist.dim))
    else:
        if dist.points.shape[0] == 0:
            raise ValidationError("empty support")
        # inverse CDF on the cumulative probabilities
        cumulative = np.cumsum(dist.probs)
        cumulative[-1] = 1.0
        idx = np.searchsorted(cumulative, rng.random(n), side="right")
        data = dist.points[idx]
    return SampleSet(data=data, seed=int(seed))


@dataclass(frozen=True)
class LeCamQuadruple:
    """Two hypothesis pairs (mu1, nu1) and (mu2, nu2) with mu2 == nu2.

    Gaussian case carries the construction constants (mean1, mean2, tau2);
    the two-point case carries (point, epsilon).
    """

    kind: str  # "gaussian" | "binary"
    mu1: DistributionSpec
    nu1: DistributionSpec
    mu2: DistributionSpec
    nu2: DistributionSpec
    n: int
    m: int
    mean1: np.ndarray | None = None
    mean2: np.ndarray | None = None
    tau2: float | None = None
    point: np.ndarray | None = None
    epsilon: float | None = None


def lecam_gaussian_quadruple(gamma: float, n: int, m: int, h: int) -> LeCamQuadruple:
    """Four isotropic Gaussians for the unbounded-class lower bound.

    mean2 sits on the first axis, mean1 adds an orthogonal offset on the
    second axis, so all four construction identities hold exactly:

        |mean1|^2 = gamma^2 (1/n + 1/m) / 3      |mean2|^2 = gamma^2 / (3m)
        mean1 . mean2 = |mean2|^2                tau2 = gamma^2 (2 + n/m) / 3

    Requires h >= 2 for the orthogonal offset and n <= m so the variance
    parameter stays within the class bound gamma.
    """
    if h < 2:
        raise ValidationError(f"the orthogonal-offset construction needs dimension >= 2, got {h}")
    if n < 1 or m < 1:
        raise ValidationError(f"sample counts must be at least 1, got n={n}, m={m}")
    if n > m:
        raise ValidationError(
            "construction requires n <= m so the variance parameter stays within "
            "the class bound; swap the sample roles for n > m"
        )
    if not gamma > 0:
        raise ValidationError(f"gamma must be positive, got {gamma}")
    mean2 = np.zeros(h)
    mean2[0] = gamma / math.sqrt(3.0 * m)
    mean1 = mean2.copy()
    mean1[1] = gamma / math.sqrt(3.0 * n)
    tau2 = gamma * gamma * (2.0 + n / m) / 3.0
    zero = np.zeros(h)
    mu2 = gaussian_spec(zero, tau2, gamma)
    return LeCamQuadruple(
        kind="gaussian",
        mu1=gaussian_spec(mean1, tau2, gamma),
        nu1=gaussian_spec(mean2, tau2, gamma),
        mu2=mu2,
        nu2=mu2,
        n=int(n),
        m=int(m),
        mean1=mean1,
        mean2=mean2,
        tau2=tau2,
    )


def lecam_binary_quadruple(gamma: float, n: int, h: int) -> LeCamQuadruple:
    """Four two-point distributions on {x, -x} for the bounded-class lower bound."""
    if n < 1:
        raise ValidationError(f"sample count must be at least 1, got {n}")
    if h < 1:
        raise ValidationError(f"dimension must be at least 1, got {h}")
    if not gamma > 0:
        raise ValidationError(f"gamma must be positive, got {gamma}")
    epsilon = math.sqrt(2.0) / (4.0 * math.sqrt(n))
    point = np.zeros(h)
    point[0] = gamma
    support = np.vstack([point, -point])
    mu1 = finite_support_spec(support, [0.5 - epsilon, 0.5 + epsilon], gamma)
    uniform = finite_support_spec(support, [0.5, 0.5], gamma)
    return LeCamQuadruple(
        kind="binary",
        mu1=mu1,
        nu1=uniform,
        mu2=uniform,
        nu2=uniform,
        n=int(n),
        m=int(n),
        point=point,
        epsilon=epsilon,
    )


def _finite_kl(a: DistributionSpec, b: DistributionSpec) -> float:
    lookup = {tuple(p): float(q) for p, q in zip(b.points, b.probs)}
    total = 0.0
    for p, pa in zip(a.points, a.probs):
        pa = float(pa)
        if pa == 0.0:
            continue
        pb = lookup.get(tuple(p), 0.0)
        if pb == 0.0:
            raise AbsoluteContinuityError("support of the first argument not contained in the second")
        total += pa * math.log(pa / pb)
    return total


def kl_divergence(a: DistributionSpec, b: DistributionSpec) -> float:
    """KL(a || b) for the closed-form cases used by the constructions."""
    if a.variant != b.variant:
        raise ValidationError("KL divergence requires distributions of the same variant")
    if a.dim != b.dim:
        raise ValidationError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if a.variant == "gaussian":
        if abs(a.tau2 - b.tau2) > _PROB_TOL * max(a.tau2, b.tau2):
            raise ValidationError("Gaussian KL implemented only for a shared isotropic variance")
        return float(np.sum((a.mean - b.mean) ** 2) / (2.0 * a.tau2))
    return _finite_kl(a, b)


def total_kl(quad: LeCamQuadruple) -> float:
    """Sample-level divergence n KL(mu2||mu1) + m KL(nu2||nu1)."""
    return quad.n * kl_divergence(quad.mu2, quad.mu1) + quad.m * kl_divergence(quad.nu2, quad.nu1)


def dump_samples_csv(samples: SampleSet, path) -> None:
    """One sample per row; plain CSV without header."""
    with open(path, "w", encoding="utf-8") as fh:
        for row in samples.data:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def dist_to_dict(dist: DistributionSpec) -> dict:
    if dist.variant == "gaussian":
        return {
            "variant": "gaussian",
            "mean": dist.mean.tolist(),
            "tau2": dist.tau2,
            "gamma": dist.gamma,
        }
    return {
        "variant": "finite",
        "points": dist.points.tolist(),
        "probs": dist.probs.tolist(),
        "gamma": dist.gamma,
    }


def dist_from_dict(d: dict) -> DistributionSpec:
    if d["variant"] == "gaussian":
        return gaussian_spec(d["mean"], d["tau2"], d["gamma"])
    if d["variant"] == "finite":
        return finite_support_spec(d["points"], d["probs"], d["gamma"])
    raise ValidationError(f"unknown distribution variant {d['variant']!r}")
