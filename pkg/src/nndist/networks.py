"""Dense feedforward scalar-output networks without biases.

A network of depth ``d`` maps an input ``x`` of dimension ``h`` to

    out_vector . act(W[d-2] @ act(... act(W[0] @ x)))

where the ``d-1`` hidden matrices and the output vector are the trainable
parameters and every hidden layer applies an entrywise activation.  Each
activation carries metadata used by the bound calculators: its Lipschitz
constant, a window ``[0, q]`` and the minimum secant gain guaranteed on
that window.

All operations here are pure functions of their arguments; parameter and
spec objects are immutable after construction and safe to share across
workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, ValidationError

ACTIVATION_KINDS = ("relu", "leaky_relu", "sigmoid", "tanh", "softplus")

# integer codes shared with the packed kernels in _kernels_*.py
ACT_CODES = {kind: i for i, kind in enumerate(ACTIVATION_KINDS)}

# kinds with act(a*x) = a*act(x) for a > 0
_HOMOGENEOUS = frozenset({"relu", "leaky_relu"})
# kinds with act(0) = 0
_ZERO_AT_ZERO = frozenset({"relu", "leaky_relu", "tanh"})


def _sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softplus(z):
    z = np.asarray(z, dtype=np.float64)
    return np.log1p(np.exp(-np.abs(z))) + np.maximum(z, 0.0)


@dataclass(frozen=True)
class ActivationProfile:
    """One hidden-layer activation plus the constants the bounds consume.

    lipschitz:
        Global Lipschitz constant of the activation.
    q:
        Right end of the window [0, q] on which the minimum gain is
        guaranteed; may be ``inf``.
    min_gain:
        Guaranteed secant slope on [0, q]: for 0 <= x1 <= x2 <= q,
        act(x2) - act(x1) >= min_gain * (x2 - x1).
    slope:
        Negative-side slope, only meaningful for leaky_relu.
    """

    kind: str
    lipschitz: float
    q: float
    min_gain: float
    slope: float = 0.0

    def __post_init__(self):
        if self.kind not in ACTIVATION_KINDS:
            raise ValidationError(f"unknown activation kind {self.kind!r}")
        if not (self.lipschitz > 0 and self.min_gain > 0 and self.q > 0):
            raise ValidationError(
                "activation constants must be positive: "
                f"lipschitz={self.lipschitz}, min_gain={self.min_gain}, q={self.q}"
            )
        if self.kind == "leaky_relu" and not (0.0 < self.slope <= 1.0):
            raise ValidationError(f"leaky_relu slope must be in (0, 1], got {self.slope}")

    @property
    def code(self) -> int:
        return ACT_CODES[self.kind]

    @property
    def homogeneous(self) -> bool:
        """True when act(a*x) = a*act(x) for all a > 0."""
        return self.kind in _HOMOGENEOUS

    @property
    def zero_at_zero(self) -> bool:
        return self.kind in _ZERO_AT_ZERO

    def __call__(self, z):
        """Apply the activation entrywise (scalar in, scalar out)."""
        scalar = np.isscalar(z) or np.ndim(z) == 0
        z = np.asarray(z, dtype=np.float64)
        if self.kind == "relu":
            out = np.maximum(z, 0.0)
        elif self.kind == "leaky_relu":
            out = np.where(z > 0.0, z, self.slope * z)
        elif self.kind == "sigmoid":
            out = _sigmoid(z)
        elif self.kind == "tanh":
            out = np.tanh(z)
        else:
            out = _softplus(z)
        return float(out) if scalar else out

    def derivative(self, z):
        """Entrywise derivative; kinked activations use the lower branch at 0."""
        scalar = np.isscalar(z) or np.ndim(z) == 0
        z = np.asarray(z, dtype=np.float64)
        if self.kind == "relu":
            out = np.where(z > 0.0, 1.0, 0.0)
        elif self.kind == "leaky_relu":
            out = np.where(z > 0.0, 1.0, self.slope)
        elif self.kind == "sigmoid":
            s = _sigmoid(z)
            out = s * (1.0 - s)
        elif self.kind == "tanh":
            t = np.tanh(z)
            out = 1.0 - t * t
        else:
            out = _sigmoid(z)
        return float(out) if scalar else out


def activation_profile(kind: str, q_choice: float | None = None, *, slope: float | None = None) -> ActivationProfile:
    """Build an :class:`ActivationProfile` with its guaranteed constants.

    ``q_choice`` defaults to ``inf`` for relu/leaky_relu and to 1.0 otherwise.
    The sigmoid/tanh/softplus window must be finite so the minimum gain stays
    positive.
    """
    if kind not in ACTIVATION_KINDS:
        raise ValidationError(f"unknown activation kind {kind!r}")
    if q_choice is None:
        q_choice = math.inf if kind in _HOMOGENEOUS else 1.0
    if not q_choice > 0:
        raise ValidationError(f"q_choice must be positive, got {q_choice}")

    if kind == "relu":
        return ActivationProfile("relu", 1.0, q_choice, 1.0)
    if kind == "leaky_relu":
        if slope is None:
            raise ValidationError("leaky_relu requires a slope")
        return ActivationProfile("leaky_relu", 1.0, q_choice, min(1.0, slope), slope=slope)
    if not math.isfinite(q_choice):
        raise ValidationError(f"{kind} requires a finite q_choice")
    if kind == "sigmoid":
        # guaranteed gain 1/(2 + 2 e^q), below the true minimum slope on [0, q]
        return ActivationProfile("sigmoid", 0.25, q_choice, 1.0 / (2.0 + 2.0 * math.exp(q_choice)))
    if kind == "tanh":
        # minimum slope on [0, q] is sech(q)^2
        return ActivationProfile("tanh", 1.0, q_choice, 1.0 / math.cosh(q_choice) ** 2)
    # softplus: derivative is the logistic function, increasing, so the
    # minimum slope on [0, q] sits at 0 and equals 1/2
    return ActivationProfile("softplus", 1.0, q_choice, 0.5)


@dataclass(frozen=True)
class NetworkSpec:
    """Architecture: input dimension, hidden widths and per-layer activations.

    ``widths`` has one entry per hidden matrix (depth - 1 entries); the
    output vector has length ``widths[-1]``.
    """

    input_dim: int
    widths: tuple[int, ...]
    activations: tuple[ActivationProfile, ...]

    def __post_init__(self):
        object.__setattr__(self, "widths", tuple(int(w) for w in self.widths))
        object.__setattr__(self, "activations", tuple(self.activations))
        if self.input_dim < 1:
            raise ValidationError(f"input_dim must be positive, got {self.input_dim}")
        if len(self.widths) < 1:
            raise ValidationError("depth must be at least 2 (one hidden matrix)")
        if any(w < 1 for w in self.widths):
            raise ValidationError(f"widths must be positive, got {self.widths}")
        if len(self.activations) != len(self.widths):
            raise ValidationError(
                f"need {len(self.widths)} activations, got {len(self.activations)}"
            )

    @property
    def depth(self) -> int:
        return len(self.widths) + 1

    def layer_shapes(self) -> list[tuple[int, int]]:
        """Shapes of the hidden matrices, in order."""
        fan_in = [self.input_dim, *self.widths[:-1]]
        return [(w, f) for w, f in zip(self.widths, fan_in)]

    @property
    def n_params(self) -> int:
        return sum(r * c for r, c in self.layer_shapes()) + self.widths[-1]


@dataclass(frozen=True)
class NetworkParams:
    """Hidden matrices plus the output vector, shape-checked lazily."""

    hidden: tuple[np.ndarray, ...]
    output: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "hidden", tuple(np.ascontiguousarray(w, dtype=np.float64) for w in self.hidden)
        )
        object.__setattr__(self, "output", np.ascontiguousarray(self.output, dtype=np.float64))

    def validate(self, spec: NetworkSpec) -> None:
        shapes = spec.layer_shapes()
        if len(self.hidden) != len(shapes):
            raise ShapeError(f"expected {len(shapes)} hidden matrices, got {len(self.hidden)}")
        for i, (w, shape) in enumerate(zip(self.hidden, shapes)):
            if w.shape != shape:
                raise ShapeError(f"hidden matrix {i} has shape {w.shape}, expected {shape}")
        if self.output.shape != (spec.widths[-1],):
            raise ShapeError(
                f"output vector has shape {self.output.shape}, expected ({spec.widths[-1]},)"
            )

    def copy(self) -> "NetworkParams":
        return type(self)(tuple(w.copy() for w in self.hidden), self.output.copy())

    def scaled(self, factors) -> "NetworkParams":
        """Multiply each hidden matrix and the output vector by a per-layer factor."""
        factors = [float(a) for a in factors]
        if len(factors) != len(self.hidden) + 1:
            raise ValidationError("need one factor per layer including the output vector")
        return type(self)(
            tuple(a * w for a, w in zip(factors, self.hidden)),
            factors[-1] * self.output,
        )


class GradientBundle(NetworkParams):
    """Per-parameter derivatives, shape-identical to :class:`NetworkParams`."""


def forward(spec: NetworkSpec, params: NetworkParams, x) -> float:
    """Evaluate the network on a single input vector."""
    params.validate(spec)
    a = np.asarray(x, dtype=np.float64)
    if a.shape != (spec.input_dim,):
        raise ShapeError(f"input has shape {a.shape}, expected ({spec.input_dim},)")
    for w, act in zip(params.hidden, spec.activations):
        a = act(w @ a)
    return float(params.output @ a)


def batch_forward(spec: NetworkSpec, params: NetworkParams, xs: np.ndarray) -> np.ndarray:
    """Evaluate the network on the rows of ``xs``; returns a 1-D array."""
    params.validate(spec)
    a = np.asarray(xs, dtype=np.float64)
    if a.ndim != 2 or a.shape[1] != spec.input_dim:
        raise ShapeError(f"batch has shape {a.shape}, expected (n, {spec.input_dim})")
    for w, act in zip(params.hidden, spec.activations):
        a = act(a @ w.T)
    return a @ params.output


def grad_params(spec: NetworkSpec, params: NetworkParams, x) -> GradientBundle:
    """Exact reverse-mode gradient of :func:`forward` in every parameter entry."""
    params.validate(spec)
    a = np.asarray(x, dtype=np.float64)
    if a.shape != (spec.input_dim,):
        raise ShapeError(f"input has shape {a.shape}, expected ({spec.input_dim},)")

    pre = []
    post = [a]
    for w, act in zip(params.hidden, spec.activations):
        z = w @ post[-1]
        pre.append(z)
        post.append(act(z))

    grad_out = post[-1].copy()
    grads = [None] * len(params.hidden)
    delta = params.output.copy()
    for i in range(len(params.hidden) - 1, -1, -1):
        delta = delta * spec.activations[i].derivative(pre[i])
        grads[i] = np.outer(delta, post[i])
        if i > 0:
            delta = params.hidden[i].T @ delta
    return GradientBundle(tuple(grads), grad_out)


def scalar_chain(x, multipliers, activations, out_scale: float):
    """Collapsed width-1 network: out_scale * act[-1](m[-1] * ... * act[0](x)).

    ``multipliers`` scale the inputs of layers 2..d-1 (empty for depth 2).
    Accepts scalars or arrays.
    """
    acts = tuple(activations)
    mults = tuple(float(m) for m in multipliers)
    if len(mults) != len(acts) - 1:
        raise ValidationError(
            f"need {len(acts) - 1} multipliers for {len(acts)} activations, got {len(mults)}"
        )
    v = acts[0](x)
    for m, act in zip(mults, acts[1:]):
        v = act(m * v)
    return out_scale * v


# -- JSON wire formats (documented in FORMATS.md) ----------------------------


def _q_to_json(q: float):
    return "inf" if math.isinf(q) else q


def _q_from_json(q) -> float:
    return math.inf if q == "inf" else float(q)


def activation_to_dict(act: ActivationProfile) -> dict:
    d = {"kind": act.kind, "q": _q_to_json(act.q)}
    if act.kind == "leaky_relu":
        d["slope"] = act.slope
    return d


def activation_from_dict(d: dict) -> ActivationProfile:
    return activation_profile(d["kind"], _q_from_json(d.get("q", "inf")), slope=d.get("slope"))


def spec_to_dict(spec: NetworkSpec) -> dict:
    return {
        "h": spec.input_dim,
        "d": spec.depth,
        "widths": list(spec.widths),
        "activations": [activation_to_dict(a) for a in spec.activations],
    }


DEFAULT_WIDTH = 3  # constant hidden width used when a config omits widths


def spec_from_dict(d: dict) -> NetworkSpec:
    if "widths" in d:
        widths = tuple(d["widths"])
    elif "d" in d:
        widths = (DEFAULT_WIDTH,) * (int(d["d"]) - 1)
    else:
        raise ValidationError("network config needs widths or a depth d")
    spec = NetworkSpec(
        input_dim=int(d["h"]),
        widths=widths,
        activations=tuple(activation_from_dict(a) for a in d["activations"]),
    )
    if "d" in d and int(d["d"]) != spec.depth:
        raise ValidationError(f"declared depth {d['d']} != {spec.depth} implied by widths")
    return spec


def params_to_dict(params: NetworkParams) -> dict:
    return {
        "hidden": [w.tolist() for w in params.hidden],
        "output": params.output.tolist(),
    }


def params_from_dict(d: dict) -> NetworkParams:
    return NetworkParams(
        tuple(np.asarray(w, dtype=np.float64) for w in d["hidden"]),
        np.asarray(d["output"], dtype=np.float64),
    )
