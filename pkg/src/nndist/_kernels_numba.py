"""Numba-compiled kernels mirroring ``_kernels_numpy``.

Same packed layout and signatures; explicit loops instead of matmuls, which
wins on the small matrices and long step counts the ascent produces.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _layer_offsets(h, widths):
    # same packing layout as _kernels_numpy.offsets
    offs = np.empty(widths.shape[0] + 2, dtype=np.int64)
    offs[0] = 0
    fan = h
    for i in range(widths.shape[0]):
        offs[i + 1] = offs[i] + widths[i] * fan
        fan = widths[i]
    offs[widths.shape[0] + 1] = offs[widths.shape[0]] + fan
    return offs


@njit(cache=True)
def _act_scalar(code, slope, z):
    if code == 0:
        # 0.0 * z keeps NaN inputs NaN, matching np.maximum in the fallback
        return z if z > 0.0 else 0.0 * z
    if code == 1:
        return z if z > 0.0 else slope * z
    if code == 2:
        if z >= 0.0:
            return 1.0 / (1.0 + np.exp(-z))
        ez = np.exp(z)
        return ez / (1.0 + ez)
    if code == 3:
        return np.tanh(z)
    return np.log1p(np.exp(-abs(z))) + (z if z > 0.0 else 0.0)


@njit(cache=True)
def _act_deriv_scalar(code, slope, z):
    if code == 0:
        return 1.0 if z > 0.0 else 0.0
    if code == 1:
        return 1.0 if z > 0.0 else slope
    if code == 2:
        s = _act_scalar(2, slope, z)
        return s * (1.0 - s)
    if code == 3:
        t = np.tanh(z)
        return 1.0 - t * t
    return _act_scalar(2, slope, z)


@njit(cache=True)
def _forward_pass(flat, h, widths, codes, slopes, zs, pre, post):
    n = zs.shape[0]
    n_layers = widths.shape[0]
    off = 0
    fan = h
    for i in range(n_layers):
        w = widths[i]
        mat = flat[off : off + w * fan].reshape(w, fan)
        src = zs if i == 0 else post[i - 1]
        for k in range(n):
            for j in range(w):
                acc = 0.0
                for l in range(fan):
                    acc += mat[j, l] * src[k, l]
                pre[i][k, j] = acc
                post[i][k, j] = _act_scalar(codes[i], slopes[i], acc)
        off += w * fan
        fan = w
    return off


@njit(cache=True)
def objective_grad(flat, h, widths, codes, slopes, zs, weights):
    n = zs.shape[0]
    n_layers = widths.shape[0]
    pre = [np.empty((n, widths[i])) for i in range(n_layers)]
    post = [np.empty((n, widths[i])) for i in range(n_layers)]
    out_off = _forward_pass(flat, h, widths, codes, slopes, zs, pre, post)
    out = flat[out_off : out_off + widths[-1]]

    value = 0.0
    for k in range(n):
        acc = 0.0
        for j in range(widths[-1]):
            acc += out[j] * post[-1][k, j]
        value += weights[k] * acc

    grad = np.zeros_like(flat)
    gout = grad[out_off : out_off + widths[-1]]
    for k in range(n):
        for j in range(widths[-1]):
            gout[j] += weights[k] * post[-1][k, j]

    delta = np.empty((n, widths[-1]))
    for k in range(n):
        for j in range(widths[-1]):
            delta[k, j] = (
                weights[k] * out[j] * _act_deriv_scalar(codes[-1], slopes[-1], pre[-1][k, j])
            )

    layer_offs = _layer_offsets(h, widths)
    for i in range(n_layers - 1, -1, -1):
        fan = h if i == 0 else widths[i - 1]
        w = widths[i]
        mat = flat[layer_offs[i] : layer_offs[i + 1]].reshape(w, fan)
        gmat = grad[layer_offs[i] : layer_offs[i + 1]].reshape(w, fan)
        src = zs if i == 0 else post[i - 1]
        for k in range(n):
            for j in range(w):
                dkj = delta[k, j]
                if dkj != 0.0:
                    for l in range(fan):
                        gmat[j, l] += dkj * src[k, l]
        if i > 0:
            new_delta = np.empty((n, fan))
            for k in range(n):
                for l in range(fan):
                    acc = 0.0
                    for j in range(w):
                        acc += delta[k, j] * mat[j, l]
                    new_delta[k, l] = acc * _act_deriv_scalar(
                        codes[i - 1], slopes[i - 1], pre[i - 1][k, l]
                    )
            delta = new_delta
    return value, grad


@njit(cache=True)
def objective_value(flat, h, widths, codes, slopes, zs, weights):
    n = zs.shape[0]
    n_layers = widths.shape[0]
    pre = [np.empty((n, widths[i])) for i in range(n_layers)]
    post = [np.empty((n, widths[i])) for i in range(n_layers)]
    out_off = _forward_pass(flat, h, widths, codes, slopes, zs, pre, post)
    out = flat[out_off : out_off + widths[-1]]
    value = 0.0
    for k in range(n):
        acc = 0.0
        for j in range(widths[-1]):
            acc += out[j] * post[-1][k, j]
        value += weights[k] * acc
    return value


@njit(cache=True)
def _project_l1_vec(vec, radius):
    total = 0.0
    for v in vec:
        total += abs(v)
    if total <= radius * (1.0 + 1e-14):
        return
    mag = np.abs(vec)
    u = np.sort(mag)[::-1]
    cumulative = 0.0
    rho = -1
    theta = 0.0
    for j in range(u.shape[0]):
        cumulative += u[j]
        if u[j] - (cumulative - radius) / (j + 1) > 0.0:
            rho = j
            theta = (cumulative - radius) / (j + 1)
    # theta recomputed at the last positive rank
    cumulative = 0.0
    for j in range(rho + 1):
        cumulative += u[j]
    theta = (cumulative - radius) / (rho + 1)
    for idx in range(vec.shape[0]):
        shrunk = abs(vec[idx]) - theta
        vec[idx] = (1.0 if vec[idx] >= 0.0 else -1.0) * (shrunk if shrunk > 0.0 else 0.0)


@njit(cache=True)
def project_flat(flat, h, widths, radii, kind_code):
    n_layers = widths.shape[0]
    off = 0
    fan = h
    for i in range(n_layers):
        w = widths[i]
        mat = flat[off : off + w * fan].reshape(w, fan)
        if kind_code == 0:
            nrm = 0.0
            for j in range(w):
                for l in range(fan):
                    nrm += mat[j, l] * mat[j, l]
            nrm = np.sqrt(nrm)
            if nrm > radii[i] * (1.0 + 1e-14):
                scale = radii[i] / nrm
                for j in range(w):
                    for l in range(fan):
                        mat[j, l] *= scale
        else:
            for j in range(w):
                _project_l1_vec(mat[j], radii[i])
        off += w * fan
        fan = w
    out = flat[off : off + widths[-1]]
    if kind_code == 0:
        nrm = 0.0
        for j in range(out.shape[0]):
            nrm += out[j] * out[j]
        nrm = np.sqrt(nrm)
        if nrm > radii[n_layers] * (1.0 + 1e-14):
            out *= radii[n_layers] / nrm
    else:
        _project_l1_vec(out, radii[n_layers])


@njit(cache=True)
def run_ascent(flat0, h, widths, codes, slopes, radii, kind_code, zs, weights, steps, eta0, decay):
    # normalized-gradient steps: exploration length is set by the schedule,
    # not by the objective scale
    cur = flat0.copy()
    best = cur.copy()
    best_value = -np.inf
    for t in range(steps):
        value, grad = objective_grad(cur, h, widths, codes, slopes, zs, weights)
        if value > best_value:
            best_value = value
            best[:] = cur
        gnorm = 0.0
        for idx in range(grad.shape[0]):
            gnorm += grad[idx] * grad[idx]
        gnorm = np.sqrt(gnorm)
        if gnorm == 0.0:
            break
        eta = eta0 / (1.0 + decay * t / steps) / gnorm
        for idx in range(cur.shape[0]):
            cur[idx] += eta * grad[idx]
        project_flat(cur, h, widths, radii, kind_code)
    value = objective_value(cur, h, widths, codes, slopes, zs, weights)
    if value > best_value:
        best_value = value
        best = cur
    return best_value, best
