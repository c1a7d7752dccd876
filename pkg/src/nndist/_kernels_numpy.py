"""Pure-numpy kernels for the projected-ascent hot path.

Networks are packed into a flat float64 vector: hidden matrices in order,
row-major, followed by the output vector.  ``widths`` is the int64 array of
hidden widths, ``codes``/``slopes`` the per-layer activation codes and
leaky slopes, ``radii`` the per-layer constraint radii and ``kind_code``
0 for frobenius, 1 for row-l1 constraints.

The numba backend in ``_kernels_numba`` implements the same signatures;
``_backend`` picks one at import time.
"""

from __future__ import annotations

import numpy as np


def offsets(h: int, widths) -> np.ndarray:
    offs = [0]
    fan = int(h)
    for w in widths:
        offs.append(offs[-1] + int(w) * fan)
        fan = int(w)
    offs.append(offs[-1] + fan)
    return np.asarray(offs, dtype=np.int64)


def _act(code: int, slope: float, z: np.ndarray) -> np.ndarray:
    if code == 0:
        return np.maximum(z, 0.0)
    if code == 1:
        return np.where(z > 0.0, z, slope * z)
    if code == 2:
        out = np.empty_like(z)
        pos = z >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
        ez = np.exp(z[~pos])
        out[~pos] = ez / (1.0 + ez)
        return out
    if code == 3:
        return np.tanh(z)
    return np.log1p(np.exp(-np.abs(z))) + np.maximum(z, 0.0)


def _act_deriv(code: int, slope: float, z: np.ndarray) -> np.ndarray:
    if code == 0:
        return np.where(z > 0.0, 1.0, 0.0)
    if code == 1:
        return np.where(z > 0.0, 1.0, slope)
    if code == 2:
        s = _act(2, slope, z)
        return s * (1.0 - s)
    if code == 3:
        t = np.tanh(z)
        return 1.0 - t * t
    return _act(2, slope, z)


def _views(flat: np.ndarray, h: int, widths) -> tuple[list[np.ndarray], np.ndarray]:
    offs = offsets(h, widths)
    mats = []
    fan = int(h)
    for i, w in enumerate(widths):
        mats.append(flat[offs[i] : offs[i + 1]].reshape(int(w), fan))
        fan = int(w)
    return mats, flat[offs[-2] : offs[-1]]


def objective_grad(flat, h, widths, codes, slopes, zs, weights):
    """Value and gradient of sum_k weights[k] * f(zs[k]) in the packed params."""
    mats, out = _views(flat, h, widths)
    n_layers = len(mats)
    pre = []
    post = [zs]
    for i in range(n_layers):
        z = post[-1] @ mats[i].T
        pre.append(z)
        post.append(_act(int(codes[i]), float(slopes[i]), z))
    value = float(weights @ (post[-1] @ out))

    grad = np.zeros_like(flat)
    gmats, gout = _views(grad, h, widths)
    gout[:] = post[-1].T @ weights
    delta = (weights[:, None] * out[None, :]) * _act_deriv(
        int(codes[-1]), float(slopes[-1]), pre[-1]
    )
    for i in range(n_layers - 1, -1, -1):
        gmats[i][:, :] = delta.T @ post[i]
        if i > 0:
            delta = (delta @ mats[i]) * _act_deriv(int(codes[i - 1]), float(slopes[i - 1]), pre[i - 1])
    return value, grad


def objective_value(flat, h, widths, codes, slopes, zs, weights):
    mats, out = _views(flat, h, widths)
    a = zs
    for i, w in enumerate(mats):
        a = _act(int(codes[i]), float(slopes[i]), a @ w.T)
    return float(weights @ (a @ out))


def _project_l1_row(row: np.ndarray, radius: float) -> None:
    mag = np.abs(row)
    if mag.sum() <= radius * (1.0 + 1e-14):
        return
    u = np.sort(mag)[::-1]
    cumulative = np.cumsum(u)
    ranks = np.arange(1, len(u) + 1)
    rho = int(np.nonzero(u - (cumulative - radius) / ranks > 0)[0][-1])
    theta = (cumulative[rho] - radius) / (rho + 1)
    row[:] = np.sign(row) * np.maximum(mag - theta, 0.0)


def project_flat(flat, h, widths, radii, kind_code) -> None:
    """In-place Euclidean projection of the packed params onto the constraint set."""
    mats, out = _views(flat, h, widths)
    if kind_code == 0:
        for w, r in zip(mats, radii[:-1]):
            nrm = np.sqrt((w * w).sum())
            if nrm > r * (1.0 + 1e-14):
                w *= r / nrm
        nrm = np.sqrt((out * out).sum())
        if nrm > radii[-1] * (1.0 + 1e-14):
            out *= radii[-1] / nrm
    else:
        for w, r in zip(mats, radii[:-1]):
            for row in w:
                _project_l1_row(row, r)
        _project_l1_row(out, radii[-1])


def run_ascent(flat0, h, widths, codes, slopes, radii, kind_code, zs, weights, steps, eta0, decay):
    """Projected normalized-gradient ascent from a feasible start; returns
    the best visited (value, packed params) pair.

    Steps move a fixed schedule length along grad/|grad|, so exploration does
    not collapse when the objective scale shrinks with the sample size.
    """
    cur = flat0.copy()
    best = cur.copy()
    best_value = -np.inf
    for t in range(steps):
        value, grad = objective_grad(cur, h, widths, codes, slopes, zs, weights)
        if value > best_value:
            best_value = value
            best[:] = cur
        gnorm = np.sqrt((grad * grad).sum())
        if gnorm == 0.0:
            break
        cur += (eta0 / (1.0 + decay * t / steps) / gnorm) * grad
        project_flat(cur, h, widths, radii, kind_code)
    value = objective_value(cur, h, widths, codes, slopes, zs, weights)
    if value > best_value:
        best_value = value
        best = cur
    return best_value, best
