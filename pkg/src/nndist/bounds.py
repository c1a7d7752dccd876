"""Closed-form minimax lower/upper bound constants and their preconditions.

Every calculator returns a :class:`BoundReport` carrying the constant
factor, the sample-size rate factor, their product, and the list of
preconditions with their status.  Preconditions never abort a computation;
they annotate the report so experiments can filter.

Conventions shared by all bounds: ``radii`` is the per-layer constraint
vector M(1..d); the product over radii runs over all d layers while the
Lipschitz product runs over the d-1 activations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constraints import ConstraintSet
from .errors import NumericalError, ValidationError
from .networks import ActivationProfile, activation_profile, scalar_chain


def norm_cdf(x: float) -> float:
    """Standard Gaussian CDF via the C-library erf (correctly rounded)."""
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def norm_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class BoundReport:
    """A named bound value: constant factor, rate factor, preconditions."""

    name: str
    side: str  # "lower" | "upper"
    constant: float
    rate_expr: str
    rate_value: float
    preconditions: tuple[tuple[str, bool], ...] = ()

    @property
    def total(self) -> float:
        return self.constant * self.rate_value

    @property
    def preconditions_ok(self) -> bool:
        return all(ok for _, ok in self.preconditions)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "side": self.side,
            "constant": self.constant,
            "rate_expr": self.rate_expr,
            "rate_value": self.rate_value,
            "total": self.total,
            "preconditions": [{"description": d, "satisfied": ok} for d, ok in self.preconditions],
        }


def _check_counts(n: int, m: int) -> None:
    if n < 1 or m < 1:
        raise ValidationError(f"sample counts must be at least 1, got n={n}, m={m}")


def _check_profiles(cs: ConstraintSet, profiles) -> tuple[ActivationProfile, ...]:
    profiles = tuple(profiles)
    if len(profiles) != cs.depth - 1:
        raise ValidationError(f"need {cs.depth - 1} activation profiles, got {len(profiles)}")
    return profiles


def radii_product(cs: ConstraintSet) -> float:
    return float(np.prod(cs.radii))


def lipschitz_product(profiles) -> float:
    return float(np.prod([p.lipschitz for p in profiles]))


def _homogeneity_precondition(profiles) -> tuple[str, bool]:
    return (
        "every activation is positively homogeneous",
        all(p.homogeneous for p in profiles),
    )


def _zero_at_zero_precondition(profiles) -> tuple[str, bool]:
    return ("every activation vanishes at zero", all(p.zero_at_zero for p in profiles))


def linear_region_caps(radii, profiles) -> tuple[float, ...]:
    """Per-layer multiplier caps keeping chain arguments inside [0, q(i)].

    For layers i = 2..d-1 the cap is the radius M(i) shrunk, if necessary,
    so that cap(i) times the running chain value stays at most q(i).  Empty
    for depth 2.
    """
    radii = tuple(float(r) for r in radii)
    profiles = tuple(profiles)
    if len(profiles) != len(radii) - 1:
        raise ValidationError(
            f"need {len(radii) - 1} activation profiles for {len(radii)} radii, got {len(profiles)}"
        )
    caps: list[float] = []
    chain_value = profiles[0](profiles[0].q)  # may be inf for unbounded activations
    for i in range(1, len(profiles)):
        q_i = profiles[i].q
        if math.isinf(q_i):
            cap = radii[i]
        elif chain_value == 0.0:
            raise NumericalError(
                "chain value vanished with a finite window ahead; cap would divide by zero"
            )
        elif math.isinf(chain_value):
            cap = 0.0
        else:
            cap = min(radii[i], q_i / chain_value)
        caps.append(cap)
        chain_value = profiles[i](cap * chain_value)
    return tuple(caps)


def relu_lower_bound_profiles(gamma: float, cs: ConstraintSet) -> tuple[ActivationProfile, ...]:
    """ReLU profiles with the window choice that maximises the lower-bound
    constant: first window M(1)*gamma, unbounded afterwards."""
    first = activation_profile("relu", cs.radii[0] * gamma)
    rest = tuple(activation_profile("relu", math.inf) for _ in range(cs.depth - 2))
    return (first, *rest)


def lower_bound_unbounded(
    gamma: float, n: int, m: int, cs: ConstraintSet, profiles
) -> BoundReport:
    """Minimax lower-bound constant for the unbounded sub-Gaussian class.

    constant = (sqrt(3)/6) M(1) M(d) gamma (1 - Phi(q(1) / (2 M(1) gamma)))
               * prod(caps) * prod(min gains)

    at rate max(n^-1/2, m^-1/2).  The recorded precondition keeps the mean
    shift of the adversarial pair inside the first activation window.
    """
    _check_counts(n, m)
    profiles = _check_profiles(cs, profiles)
    radii = cs.radii
    q1 = profiles[0].q
    ratio = q1 / (2.0 * radii[0] * gamma)
    tail = 0.0 if math.isinf(ratio) else 1.0 - norm_cdf(ratio)
    caps = linear_region_caps(radii, profiles)
    gains = float(np.prod([p.min_gain for p in profiles]))
    constant = (
        math.sqrt(3.0) / 6.0 * radii[0] * radii[-1] * gamma * tail * float(np.prod(caps)) * gains
    )
    shift_ok = math.sqrt(1.0 / n + 1.0 / m) < math.sqrt(3.0) * ratio
    return BoundReport(
        name="lower_unbounded",
        side="lower",
        constant=constant,
        rate_expr="max(n^-1/2, m^-1/2)",
        rate_value=max(n ** -0.5, m ** -0.5),
        preconditions=(
            ("sqrt(1/n + 1/m) < sqrt(3) q(1) / (2 M(1) gamma)", bool(shift_ok)),
        ),
    )


def lower_bound_bounded(
    gamma: float,
    n: int,
    m: int,
    cs: ConstraintSet,
    profiles,
    literal_negative_radii: bool = False,
) -> BoundReport:
    """Minimax lower-bound constant for the bounded-support class.

    constant = 0.17 * (g(+gamma) - g(-gamma)) where g is the collapsed
    witness chain g(s) = M(d) act(M(d-1) ... M(2) act(M(1) s)).  The
    ``literal_negative_radii`` flag instead negates every radius in the
    second term rather than only the chain input.
    """
    _check_counts(n, m)
    profiles = _check_profiles(cs, profiles)
    radii = cs.radii
    mults = radii[1:-1]
    plus = scalar_chain(radii[0] * gamma, mults, profiles, radii[-1])
    if literal_negative_radii:
        neg_profiles = profiles
        minus = -scalar_chain(
            -radii[0] * gamma, tuple(-r for r in mults), neg_profiles, radii[-1]
        )
    else:
        minus = scalar_chain(-radii[0] * gamma, mults, profiles, radii[-1])
    constant = 0.17 * (plus - minus)
    return BoundReport(
        name="lower_bounded",
        side="lower",
        constant=float(constant),
        rate_expr="max(n^-1/2, m^-1/2)",
        rate_value=max(n ** -0.5, m ** -0.5),
        preconditions=(),
    )


def _delta_precondition(n: int, m: int, h: int, delta: float) -> tuple[str, bool]:
    lhs = math.sqrt(6.0 * h) * min(n, m) * math.sqrt(1.0 / n + 1.0 / m)
    return (
        "sqrt(6h) min(n, m) sqrt(1/n + 1/m) >= 4 sqrt(log(1/delta))",
        bool(lhs >= 4.0 * math.sqrt(math.log(1.0 / delta))),
    )


def upper_bound_unbounded(
    gamma: float, n: int, m: int, h: int, cs: ConstraintSet, profiles, delta: float
) -> BoundReport:
    """High-probability estimation-error upper bound, unbounded class."""
    _check_counts(n, m)
    profiles = _check_profiles(cs, profiles)
    if not 0.0 < delta < 1.0:
        raise ValidationError(f"delta must lie in (0, 1), got {delta}")
    d = cs.depth
    log_inv = math.log(1.0 / delta)
    if cs.kind == "frobenius":
        inner = math.sqrt(6.0 * d * math.log(2.0) + 1.25 * h) + math.sqrt(2.0 * h * log_inv)
        extra = _homogeneity_precondition(profiles)
    else:
        inner = math.sqrt(2.0 * d * math.log(2.0) + 2.0 * math.log(h)) + math.sqrt(2.0 * h * log_inv)
        extra = _zero_at_zero_precondition(profiles)
    constant = 2.0 * gamma * radii_product(cs) * lipschitz_product(profiles) * inner
    return BoundReport(
        name=f"upper_unbounded_{cs.kind}",
        side="upper",
        constant=constant,
        rate_expr="n^-1/2 + m^-1/2",
        rate_value=n ** -0.5 + m ** -0.5,
        preconditions=(_delta_precondition(n, m, h, delta), extra),
    )


def upper_bound_bounded(
    gamma: float, n: int, m: int, h: int, cs: ConstraintSet, profiles, delta: float
) -> BoundReport:
    """High-probability estimation-error upper bound, bounded-support class."""
    _check_counts(n, m)
    profiles = _check_profiles(cs, profiles)
    if not 0.0 < delta < 1.0:
        raise ValidationError(f"delta must lie in (0, 1), got {delta}")
    d = cs.depth
    log_inv = math.log(1.0 / delta)
    if cs.kind == "frobenius":
        inner = 2.0 * math.sqrt(d * math.log(2.0)) + math.sqrt(log_inv) + math.sqrt(2.0)
        constant = math.sqrt(2.0) * gamma * radii_product(cs) * lipschitz_product(profiles) * inner
        extra = _homogeneity_precondition(profiles)
    else:
        inner = 4.0 * math.sqrt(d + 1.0 + math.log(h)) + math.sqrt(2.0 * log_inv)
        constant = gamma * radii_product(cs) * lipschitz_product(profiles) * inner
        extra = _zero_at_zero_precondition(profiles)
    return BoundReport(
        name=f"upper_bounded_{cs.kind}",
        side="upper",
        constant=constant,
        rate_expr="n^-1/2 + m^-1/2",
        rate_value=n ** -0.5 + m ** -0.5,
        preconditions=(extra,),
    )


def rademacher_bound(gamma: float, n: int, h: int, cs: ConstraintSet, profiles) -> BoundReport:
    """Average Rademacher complexity bound for unbounded sub-Gaussian inputs."""
    if n < 1:
        raise ValidationError(f"sample count must be at least 1, got {n}")
    profiles = _check_profiles(cs, profiles)
    d = cs.depth
    if cs.kind == "frobenius":
        constant = (
            gamma
            * radii_product(cs)
            * lipschitz_product(profiles)
            * math.sqrt(6.0 * d * math.log(2.0) + 1.25 * h)
        )
        extra = _homogeneity_precondition(profiles)
    else:
        constant = (
            math.sqrt(2.0)
            * gamma
            * radii_product(cs)
            * lipschitz_product(profiles)
            * math.sqrt(d * math.log(2.0) + math.log(h))
        )
        extra = _zero_at_zero_precondition(profiles)
    return BoundReport(
        name=f"rademacher_{cs.kind}",
        side="upper",
        constant=constant,
        rate_expr="n^-1/2",
        rate_value=n ** -0.5,
        preconditions=(extra,),
    )


def comparison_factors(d: int, h: int, n_1: int) -> dict:
    """Depth/width scale factors of this bound versus prior analyses.

    Factors only; the prior results hide unspecified big-O constants so no
    absolute comparison is claimed.
    """
    if d < 1 or h < 1 or n_1 < 1:
        raise ValidationError("d, h and n_1 must be positive")
    return {
        "this_work_frobenius": math.sqrt(6.0 * d * math.log(2.0) + 1.25 * h),
        "prior_worstcase": math.sqrt(d * h),
        "prior_onehidden": math.sqrt(n_1 * h),
    }


def combined_deviation_bound(
    mc_r_n: float,
    mc_r_m: float,
    gamma: float,
    h: int,
    n: int,
    m: int,
    cs: ConstraintSet,
    profiles,
    delta: float,
) -> BoundReport:
    """Estimation-error bound from supplied Rademacher complexities plus the
    sub-Gaussian concentration term:

        2 R_n + 2 R_m + 2 gamma prod(M) prod(L) sqrt(2 h (1/n + 1/m) log(1/delta))
    """
    _check_counts(n, m)
    profiles = _check_profiles(cs, profiles)
    if mc_r_n < 0 or mc_r_m < 0:
        raise ValidationError("Rademacher complexity estimates must be nonnegative")
    if not 0.0 < delta < 1.0:
        raise ValidationError(f"delta must lie in (0, 1), got {delta}")
    concentration = (
        2.0
        * gamma
        * radii_product(cs)
        * lipschitz_product(profiles)
        * math.sqrt(2.0 * h * (1.0 / n + 1.0 / m) * math.log(1.0 / delta))
    )
    total = 2.0 * mc_r_n + 2.0 * mc_r_m + concentration
    return BoundReport(
        name="combined_deviation",
        side="upper",
        constant=total,
        rate_expr="1 (composite: 2R_n + 2R_m + concentration)",
        rate_value=1.0,
        preconditions=(_delta_precondition(n, m, h, delta),),
    )
