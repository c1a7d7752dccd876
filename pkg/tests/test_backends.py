"""Parity between the numba kernels and the pure-numpy fallback."""

import numpy as np
import pytest

from nndist import AscentConfig, ConstraintSet, SampleSet, estimate_nnd
from nndist import _kernels_numpy as knp
from nndist.errors import NumericalError

from helpers import relu_spec

knb = pytest.importorskip("nndist._kernels_numba")


def make_case(seed, n=50, h=3, widths=(4, 2), codes=(0, 2)):
    rng = np.random.default_rng(seed)
    zs = rng.standard_normal((n, h))
    weights = rng.standard_normal(n) / n
    sizes = [w * f for w, f in zip(widths, (h, *widths[:-1]))] + [widths[-1]]
    flat = 0.5 * rng.standard_normal(sum(sizes))
    return (
        flat,
        np.asarray(widths, dtype=np.int64),
        np.asarray(codes, dtype=np.int64),
        np.array([0.0, 0.0]),
        np.ones(len(widths) + 1),
        zs,
        weights,
    )


class TestKernelParity:
    def test_objective_and_gradient(self):
        for seed in range(10):
            flat, widths, codes, slopes, radii, zs, weights = make_case(seed)
            v_np, g_np = knp.objective_grad(flat, zs.shape[1], widths, codes, slopes, zs, weights)
            v_nb, g_nb = knb.objective_grad(flat, zs.shape[1], widths, codes, slopes, zs, weights)
            np.testing.assert_allclose(v_nb, v_np, rtol=1e-12, atol=1e-14)
            np.testing.assert_allclose(g_nb, g_np, rtol=1e-12, atol=1e-14)

    @pytest.mark.parametrize("kind_code", [0, 1])
    def test_projection(self, kind_code):
        for seed in range(10):
            flat, widths, codes, slopes, radii, zs, weights = make_case(seed)
            a = flat.copy()
            b = flat.copy()
            knp.project_flat(a, zs.shape[1], widths, radii, kind_code)
            knb.project_flat(b, zs.shape[1], widths, radii, kind_code)
            np.testing.assert_allclose(b, a, rtol=1e-12, atol=1e-15)

    def test_short_ascent_value(self):
        # a handful of steps keeps ulp-level divergence from amplifying
        flat, widths, codes, slopes, radii, zs, weights = make_case(3)
        knp.project_flat(flat, zs.shape[1], widths, radii, 0)
        v_np, _ = knp.run_ascent(
            flat.copy(), zs.shape[1], widths, codes, slopes, radii, 0, zs, weights, 40, 0.1, 9.0
        )
        v_nb, _ = knb.run_ascent(
            flat.copy(), zs.shape[1], widths, codes, slopes, radii, 0, zs, weights, 40, 0.1, 9.0
        )
        np.testing.assert_allclose(v_nb, v_np, rtol=1e-8, atol=1e-12)


def test_non_finite_objective_raises_with_trace():
    spec = relu_spec(2, (1,))
    cs = ConstraintSet("frobenius", (1.0, 1.0))
    bad = SampleSet(np.array([[np.nan, 0.0], [1.0, 2.0]]), 0)
    good = SampleSet(np.array([[0.5, -0.5]]), 0)
    with pytest.raises(NumericalError, match="trace"):
        estimate_nnd(bad, good, spec, cs, AscentConfig(restarts=2, steps=20, seed=0))
