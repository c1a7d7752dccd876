"""Empirical neural net distance: projected ascent, exact oracles, witnesses.

The distance between two empirical measures is the supremum over the
feasible network family of the absolute difference of sample means.  The
workhorse maximiser is projected gradient ascent run on both signs of the
objective from shared restarts; every value it returns is certified as a
lower bound on the true supremum because the reported witness is feasible.

For depth-2 single-hidden-unit networks in dimension at most 3 an
exhaustive direction-grid oracle computes the supremum to within a stated
grid error.  Explicitly constructed witness networks collapse to a scalar
chain whose population gap is evaluated by quadrature.
"""

from __future__ import annotations

import math
from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from ._backend import KERNELS
from ._kernels_numpy import offsets as _packed_offsets
from .bounds import linear_region_caps
from .constraints import ConstraintSet, is_feasible, project
from .distributions import SampleSet, LeCamQuadruple, rng_from
from .errors import (
    NumericalError,
    QuadratureError,
    UnsupportedArchitectureError,
    ValidationError,
)
from .networks import NetworkParams, NetworkSpec, batch_forward, scalar_chain

_KIND_CODE = {"frobenius": 0, "one_inf": 1}


# -- packing ------------------------------------------------------------------


def pack_params(spec: NetworkSpec, params: NetworkParams) -> np.ndarray:
    params.validate(spec)
    return np.concatenate([w.ravel() for w in params.hidden] + [params.output])


def unpack_params(spec: NetworkSpec, flat: np.ndarray) -> NetworkParams:
    offs = _packed_offsets(spec.input_dim, spec.widths)
    hidden = []
    fan = spec.input_dim
    for i, w in enumerate(spec.widths):
        hidden.append(flat[offs[i] : offs[i + 1]].reshape(w, fan).copy())
        fan = w
    return NetworkParams(tuple(hidden), flat[offs[-2] : offs[-1]].copy())


def _packed_arrays(spec: NetworkSpec):
    widths = np.asarray(spec.widths, dtype=np.int64)
    codes = np.asarray([a.code for a in spec.activations], dtype=np.int64)
    slopes = np.asarray([a.slope for a in spec.activations], dtype=np.float64)
    return widths, codes, slopes


# -- configuration and result types -------------------------------------------


@dataclass(frozen=True)
class AscentConfig:
    """Projected-ascent settings.

    ``eta0`` defaults to 0.1 times the smallest radius; the step at
    iteration t is eta0 / (1 + decay * t / steps).  ``init_scale`` of None
    draws layer entries uniform in +-radius/sqrt(fan_in).  ``tolerance``
    is the feasibility slack applied when validating the returned witness.
    """

    restarts: int = 8
    steps: int = 300
    eta0: float | None = None
    decay: float = 9.0
    init_scale: float | None = None
    seed: int = 0
    tolerance: float = 1e-9

    def __post_init__(self):
        if self.restarts < 1 or self.steps < 1:
            raise ValidationError("restarts and steps must be at least 1")
        if self.eta0 is not None and not self.eta0 > 0:
            raise ValidationError(f"eta0 must be positive, got {self.eta0}")


@dataclass(frozen=True)
class EstimateResult:
    """Certified lower bound on the supremum plus the witness attaining it."""

    value: float
    witness: NetworkParams
    per_restart: tuple[float, ...]
    sign_branch: int


@dataclass(frozen=True)
class QuadratureConfig:
    rule: str = "adaptive_simpson"  # or "gauss_hermite"
    nodes: int = 160
    tol: float = 1e-8
    halfwidth: float = 10.0  # integration half-width in standard deviations

    def __post_init__(self):
        if self.rule not in ("adaptive_simpson", "gauss_hermite"):
            raise ValidationError(f"unknown quadrature rule {self.rule!r}")
        if self.nodes < 16:
            raise ValidationError(f"node count must be at least 16, got {self.nodes}")


# -- objectives ---------------------------------------------------------------


def empirical_objective(
    spec: NetworkSpec, params: NetworkParams, xs: SampleSet, ys: SampleSet
) -> float:
    """Signed difference of sample means: mean f(x) - mean f(y)."""
    if xs.n < 1 or ys.n < 1:
        raise ValidationError("sample sets must be nonempty")
    return float(batch_forward(spec, params, xs.data).mean() - batch_forward(spec, params, ys.data).mean())


def _random_packed_init(spec, cs, rng, init_scale):
    widths, _, _ = _packed_arrays(spec)
    pieces = []
    fan = spec.input_dim
    for w, radius in zip(spec.widths, cs.radii):
        scale = init_scale if init_scale is not None else radius / math.sqrt(fan)
        pieces.append(rng.uniform(-scale, scale, size=w * fan))
        fan = w
    out_scale = init_scale if init_scale is not None else cs.radii[-1] / math.sqrt(fan)
    pieces.append(rng.uniform(-out_scale, out_scale, size=spec.widths[-1]))
    flat = np.concatenate(pieces)
    KERNELS.project_flat(flat, spec.input_dim, widths, np.asarray(cs.radii), _KIND_CODE[cs.kind])
    return flat


def ascent_supremum(
    zs: np.ndarray,
    weights: np.ndarray,
    spec: NetworkSpec,
    cs: ConstraintSet,
    cfg: AscentConfig | None = None,
    init_params: NetworkParams | None = None,
) -> EstimateResult:
    """Maximise |sum_k weights[k] f(z_k)| over the feasible family.

    Runs projected ascent on both signs of the objective from shared
    restart initialisations, so the result is at least the absolute
    objective of every initialisation (hence always >= 0).  Deterministic
    given the config seed.
    """
    cfg = cfg or AscentConfig()
    cs.validate_against(spec)
    zs = np.ascontiguousarray(zs, dtype=np.float64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    if zs.ndim != 2 or zs.shape[0] != weights.shape[0]:
        raise ValidationError("need one weight per sample row")
    widths, codes, slopes = _packed_arrays(spec)
    radii = np.asarray(cs.radii, dtype=np.float64)
    kind = _KIND_CODE[cs.kind]
    eta0 = cfg.eta0 if cfg.eta0 is not None else 0.1 * min(cs.radii)

    best_value = -math.inf
    best_flat = None
    best_sign = 1
    per_restart = []
    for r in range(cfg.restarts):
        if r == 0 and init_params is not None:
            flat0 = pack_params(spec, project(init_params, cs))
        else:
            flat0 = _random_packed_init(spec, cs, rng_from(cfg.seed, r), cfg.init_scale)
        restart_best = -math.inf
        for sign in (1.0, -1.0):
            value, flat = KERNELS.run_ascent(
                flat0.copy(), spec.input_dim, widths, codes, slopes, radii, kind,
                zs, sign * weights, cfg.steps, eta0, cfg.decay,
            )
            if value > restart_best:
                restart_best = value
            if value > best_value:
                best_value = value
                best_flat = flat
                best_sign = int(sign)
        per_restart.append(restart_best)

    if best_flat is None or not math.isfinite(best_value):
        raise NumericalError(
            f"ascent produced a non-finite objective (per-restart trace: {per_restart})"
        )
    witness = unpack_params(spec, best_flat)
    if not is_feasible(witness, cs, cfg.tolerance):
        raise NumericalError("projected ascent returned an infeasible witness")
    return EstimateResult(
        value=float(best_value),
        witness=witness,
        per_restart=tuple(per_restart),
        sign_branch=best_sign,
    )


def estimate_nnd(
    xs: SampleSet,
    ys: SampleSet,
    spec: NetworkSpec,
    cs: ConstraintSet,
    cfg: AscentConfig | None = None,
    init_params: NetworkParams | None = None,
) -> EstimateResult:
    """Plug-in estimate of the distance between two empirical measures."""
    if xs.dim != spec.input_dim or ys.dim != spec.input_dim:
        raise ValidationError("sample dimension does not match the network input dimension")
    zs = np.vstack([xs.data, ys.data])
    weights = np.concatenate(
        [np.full(xs.n, 1.0 / xs.n), np.full(ys.n, -1.0 / ys.n)]
    )
    return ascent_supremum(zs, weights, spec, cs, cfg, init_params)


# -- exhaustive oracle for tiny networks --------------------------------------


def _direction_grid(h: int, res_deg: float) -> np.ndarray:
    if h == 1:
        return np.array([[1.0], [-1.0]])
    res = math.radians(res_deg)
    if h == 2:
        ang = np.arange(0.0, 2.0 * math.pi, res)
        return np.column_stack([np.cos(ang), np.sin(ang)])
    rows = [(0.0, 0.0, 1.0), (0.0, 0.0, -1.0)]
    n_rings = max(2, int(math.ceil(math.pi / res)))
    for i in range(1, n_rings):
        theta = i * math.pi / n_rings
        ring = max(1, int(math.ceil(2.0 * math.pi * math.sin(theta) / res)))
        for j in range(ring):
            phi = 2.0 * math.pi * j / ring
            rows.append(
                (math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta))
            )
    return np.asarray(rows)


def _check_oracle_architecture(spec: NetworkSpec) -> None:
    if spec.depth != 2 or spec.widths != (1,):
        raise UnsupportedArchitectureError(
            "grid oracle requires depth 2 with a single hidden unit"
        )
    if spec.input_dim > 3:
        raise UnsupportedArchitectureError("grid oracle requires input dimension at most 3")
    if not spec.activations[0].homogeneous:
        raise UnsupportedArchitectureError(
            "grid oracle requires a positively homogeneous activation "
            "(boundary radii are optimal only in that case)"
        )


def grid_supremum(
    zs: np.ndarray,
    weights: np.ndarray,
    spec: NetworkSpec,
    cs: ConstraintSet,
    grid_deg: float | None = None,
    return_error_bound: bool = False,
):
    """Exact-to-grid supremum of |sum_k weights[k] f(z_k)| for tiny networks.

    Scans first-layer directions on a grid of the unit sphere with both
    norms pinned to their radii; by positive homogeneity the boundary is
    optimal.  The reported error bound covers the grid resolution.
    """
    _check_oracle_architecture(spec)
    cs.validate_against(spec)
    zs = np.ascontiguousarray(zs, dtype=np.float64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    h = spec.input_dim
    if grid_deg is None:
        grid_deg = 1.0 if h <= 2 else 2.0
    dirs = _direction_grid(h, grid_deg)
    act = spec.activations[0]
    m1, m2 = cs.radii
    proj = zs @ dirs.T
    gaps = weights @ act(proj)  # per-direction weighted means of activations
    if cs.kind == "frobenius":
        scales = np.full(dirs.shape[0], m1)
    else:
        scales = m1 / np.abs(dirs).sum(axis=1)
    values = m2 * scales * np.abs(gaps)
    value = float(values.max())
    if not return_error_bound:
        return value
    data_scale = float(np.abs(weights) @ np.linalg.norm(zs, axis=1))
    slack = m2 * m1 * act.lipschitz * data_scale * math.radians(grid_deg)
    if cs.kind == "one_inf":
        slack *= 1.0 + math.sqrt(h)
    return value, slack


def brute_force_nnd(
    xs: SampleSet,
    ys: SampleSet,
    spec: NetworkSpec,
    cs: ConstraintSet,
    grid_deg: float | None = None,
    return_error_bound: bool = False,
):
    """Grid oracle for the empirical distance; see :func:`grid_supremum`."""
    zs = np.vstack([xs.data, ys.data])
    weights = np.concatenate([np.full(xs.n, 1.0 / xs.n), np.full(ys.n, -1.0 / ys.n)])
    return grid_supremum(zs, weights, spec, cs, grid_deg, return_error_bound)


# -- explicit witnesses and their population gap -------------------------------


def _witness_direction(u1, u2):
    u1 = np.asarray(u1, dtype=np.float64)
    u2 = np.asarray(u2, dtype=np.float64)
    direction = u1 - u2
    if not np.any(direction):
        raise ValidationError("witness construction requires distinct means")
    return direction


def build_witness_frobenius(spec: NetworkSpec, cs: ConstraintSet, u1, u2) -> NetworkParams:
    """Feasible network whose forward pass collapses to the scalar chain
    M(d) act(cap(d-1) ... cap(2) act(w1 . x)) with w1 the scaled unit
    vector along u1 - u2."""
    cs.validate_against(spec)
    if cs.kind != "frobenius":
        raise ValidationError("frobenius witness requires a frobenius constraint set")
    direction = _witness_direction(u1, u2)
    shapes = spec.layer_shapes()
    caps = linear_region_caps(cs.radii, spec.activations)
    hidden = []
    first = np.zeros(shapes[0])
    first[0] = cs.radii[0] * direction / np.linalg.norm(direction)
    hidden.append(first)
    for shape, cap in zip(shapes[1:], caps):
        w = np.zeros(shape)
        w[0, 0] = cap
        hidden.append(w)
    out = np.zeros(spec.widths[-1])
    out[0] = cs.radii[-1]
    return NetworkParams(tuple(hidden), out)


def build_witness_one_inf(spec: NetworkSpec, cs: ConstraintSet, u1, u2) -> NetworkParams:
    """Repeated-row witness: every row of the first layer is w1 (l1 norm
    pinned to M(1)); deeper layers repeat the row (M(i), 0, ...) so the
    forward pass collapses to M(d) act(M(d-1) ... M(2) act(w1 . x))."""
    cs.validate_against(spec)
    if cs.kind != "one_inf":
        raise ValidationError("row-l1 witness requires a one_inf constraint set")
    direction = _witness_direction(u1, u2)
    shapes = spec.layer_shapes()
    w1 = cs.radii[0] * direction / np.abs(direction).sum()
    hidden = [np.tile(w1, (shapes[0][0], 1))]
    for shape, radius in zip(shapes[1:], cs.radii[1:-1]):
        row = np.zeros(shape[1])
        row[0] = radius
        hidden.append(np.tile(row, (shape[0], 1)))
    out = np.zeros(spec.widths[-1])
    out[0] = cs.radii[-1]
    return NetworkParams(tuple(hidden), out)


@dataclass(frozen=True)
class WitnessChain:
    """Scalar reduction of a witness: shift is the chain input mean under
    the first hypothesis, scale its standard deviation, multipliers the
    inner layer factors."""

    shift: float
    scale: float
    multipliers: tuple[float, ...]
    activations: tuple
    out_scale: float

    def __call__(self, x):
        return scalar_chain(x, self.multipliers, self.activations, self.out_scale)


def witness_chain(spec: NetworkSpec, cs: ConstraintSet, quad: LeCamQuadruple) -> WitnessChain:
    """Scalar chain of the witness built for a Gaussian quadruple."""
    if quad.kind != "gaussian":
        raise ValidationError("witness chains are defined for the Gaussian construction")
    cs.validate_against(spec)
    direction = _witness_direction(quad.mean1, quad.mean2)
    tau = math.sqrt(quad.tau2)
    if cs.kind == "frobenius":
        w1 = cs.radii[0] * direction / np.linalg.norm(direction)
        multipliers = linear_region_caps(cs.radii, spec.activations)
    else:
        w1 = cs.radii[0] * direction / np.abs(direction).sum()
        multipliers = tuple(cs.radii[1:-1])
    return WitnessChain(
        shift=float(w1 @ quad.mean1),
        scale=float(np.linalg.norm(w1) * tau),
        multipliers=multipliers,
        activations=spec.activations,
        out_scale=cs.radii[-1],
    )


def _hermgauss(n: int):
    # Golub-Welsch on the Jacobi matrix; stable where the recurrence-based
    # numpy implementation overflows for large node counts
    off = np.sqrt(np.arange(1, n) / 2.0)
    jacobi = np.diag(off, 1) + np.diag(off, -1)
    nodes, vectors = np.linalg.eigh(jacobi)
    weights = math.sqrt(math.pi) * vectors[0] ** 2
    return nodes, weights


def _adaptive_simpson(f, lo, hi, tol):
    def simpson(fa, fm, fb, width):
        return width / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        mid = 0.5 * (a + b)
        lm = 0.5 * (a + mid)
        rm = 0.5 * (mid + b)
        flm = f(lm)
        frm = f(rm)
        left = simpson(fa, flm, fm, mid - a)
        right = simpson(fm, frm, fb, b - mid)
        if depth <= 0:
            raise QuadratureError(f"adaptive quadrature exceeded maximum depth on [{a}, {b}]")
        if abs(left + right - whole) <= 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return recurse(a, mid, fa, flm, fm, left, tol / 2.0, depth - 1) + recurse(
            mid, b, fm, frm, fb, right, tol / 2.0, depth - 1
        )

    if hi <= lo:
        return 0.0
    fa, fm, fb = f(lo), f(0.5 * (lo + hi)), f(hi)
    whole = simpson(fa, fm, fb, hi - lo)
    return recurse(lo, hi, fa, fm, fb, whole, tol, 60)


def witness_gap_exact(chain: WitnessChain, qcfg: QuadratureConfig | None = None) -> float:
    """Population gap of the witness chain between the shifted and centred
    scalar Gaussians: integral of (g(x + shift) - g(x)) against the centred
    normal density of standard deviation ``scale``."""
    qcfg = qcfg or QuadratureConfig()
    a, s = chain.shift, chain.scale
    if not s > 0:
        raise ValidationError(f"chain scale must be positive, got {s}")

    def integrand(x):
        pdf = math.exp(-0.5 * (x / s) ** 2) / (s * math.sqrt(2.0 * math.pi))
        return (chain(x + a) - chain(x)) * pdf

    lo = -qcfg.halfwidth * s + min(0.0, -a)
    hi = qcfg.halfwidth * s + max(0.0, a)
    if qcfg.rule == "gauss_hermite":
        nodes, weights = _hermgauss(qcfg.nodes)
        x = math.sqrt(2.0) * s * nodes
        vals = np.array([chain(v + a) - chain(v) for v in x])
        return float((weights @ vals) / math.sqrt(math.pi))
    # split at the kinks of the first activation
    breaks = sorted({lo, hi, *(b for b in (-a, 0.0) if lo < b < hi)})
    total = 0.0
    for left, right in zip(breaks[:-1], breaks[1:]):
        total += _adaptive_simpson(integrand, left, right, qcfg.tol / max(1, len(breaks) - 1))
    return total


WitnessFloor = namedtuple("WitnessFloor", ["value", "precondition_ok"])


def witness_difference_floor(
    gamma: float, n: int, radii, profiles, m: int | None = None
) -> WitnessFloor:
    """Uniform floor on the shifted-minus-centred chain difference over the
    first activation window:

        M(1) M(d) gamma / sqrt(3 n) * prod(caps) * prod(min gains)

    The precondition keeps the chain shift inside half the window; when it
    fails the value is still returned, flagged.
    """
    radii = tuple(float(r) for r in radii)
    profiles = tuple(profiles)
    if len(profiles) != len(radii) - 1:
        raise ValidationError(f"need {len(radii) - 1} activation profiles, got {len(profiles)}")
    if m is None:
        m = n
    caps = linear_region_caps(radii, profiles)
    gains = float(np.prod([p.min_gain for p in profiles]))
    value = (
        radii[0] * radii[-1] * gamma / math.sqrt(3.0 * n) * float(np.prod(caps)) * gains
    )
    ratio = profiles[0].q / (2.0 * radii[0] * gamma)
    ok = math.sqrt(1.0 / n + 1.0 / m) < math.sqrt(3.0) * ratio
    return WitnessFloor(value=value, precondition_ok=bool(ok))
