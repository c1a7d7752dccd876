"""Shared builders and independent oracles for the tests."""

import numpy as np

from nndist import (
    ConstraintSet,
    NetworkParams,
    NetworkSpec,
    activation_profile,
    forward,
    project,
)

MIXED_KINDS = ("relu", "leaky_relu", "sigmoid", "tanh", "softplus")


def random_profile(rng, kind=None):
    kind = kind or MIXED_KINDS[rng.integers(0, len(MIXED_KINDS))]
    if kind == "leaky_relu":
        return activation_profile(kind, slope=float(rng.uniform(0.05, 0.9)))
    if kind in ("sigmoid", "tanh", "softplus"):
        return activation_profile(kind, float(rng.uniform(0.5, 3.0)))
    return activation_profile(kind)


def random_spec(rng, h=None, depth=None, max_width=8, kinds=None):
    h = h if h is not None else int(rng.integers(1, 7))
    depth = depth if depth is not None else int(rng.integers(2, 5))
    widths = tuple(int(rng.integers(1, max_width + 1)) for _ in range(depth - 1))
    acts = tuple(
        random_profile(rng, kinds[i % len(kinds)] if kinds else None) for i in range(depth - 1)
    )
    return NetworkSpec(h, widths, acts)


def random_params(rng, spec, scale=1.0):
    hidden = tuple(scale * rng.standard_normal(shape) for shape in spec.layer_shapes())
    return NetworkParams(hidden, scale * rng.standard_normal(spec.widths[-1]))


def random_feasible_params(rng, spec, cs: ConstraintSet, scale=2.0):
    return project(random_params(rng, spec, scale), cs)


def relu_spec(h, widths):
    return NetworkSpec(h, tuple(widths), tuple(activation_profile("relu") for _ in widths))


def finite_difference_grad(spec, params, x, step=1e-5):
    """Independent oracle: central differences over every parameter entry."""
    grads_hidden = []
    for li, w in enumerate(params.hidden):
        g = np.zeros_like(w)
        for idx in np.ndindex(w.shape):
            hi = [m.copy() for m in params.hidden]
            lo = [m.copy() for m in params.hidden]
            hi[li][idx] += step
            lo[li][idx] -= step
            f_hi = forward(spec, NetworkParams(tuple(hi), params.output), x)
            f_lo = forward(spec, NetworkParams(tuple(lo), params.output), x)
            g[idx] = (f_hi - f_lo) / (2 * step)
        grads_hidden.append(g)
    g_out = np.zeros_like(params.output)
    for i in range(len(params.output)):
        hi = params.output.copy()
        lo = params.output.copy()
        hi[i] += step
        lo[i] -= step
        g_out[i] = (
            forward(spec, NetworkParams(params.hidden, hi), x)
            - forward(spec, NetworkParams(params.hidden, lo), x)
        ) / (2 * step)
    return grads_hidden, g_out


def max_scaled_error(a, b):
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))))


def gradient_fd_error(spec, params, x):
    from nndist import grad_params

    g = grad_params(spec, params, x)
    fd_hidden, fd_out = finite_difference_grad(spec, params, x)
    return max(
        max(max_scaled_error(a, b) for a, b in zip(g.hidden, fd_hidden)),
        max_scaled_error(g.output, fd_out),
    )


def l1_grid_oracle(point, radius, resolution=1e-3):
    """Brute force: nearest l2 point to ``point`` inside the 2-D l1 ball.

    Grids the first coordinate; for each grid value the second coordinate
    is minimised exactly by clamping into the remaining l1 budget.
    """
    a = np.arange(-radius, radius + resolution / 2, resolution)
    rem = radius - np.abs(a)
    b = np.clip(point[1], -rem, rem)
    dist = (a - point[0]) ** 2 + (b - point[1]) ** 2
    i = int(np.argmin(dist))
    return np.array([a[i], b[i]])
