import math

import numpy as np
import pytest

from helpers import (
    finite_difference_grad,
    max_scaled_error,
    random_feasible_params,
    random_params,
    random_profile,
    random_spec,
    relu_spec,
)

from nndist import (
    ConstraintSet,
    NetworkParams,
    NetworkSpec,
    activation_profile,
    batch_forward,
    forward,
    grad_params,
    scalar_chain,
)
from nndist.errors import ShapeError, ValidationError
from nndist.networks import params_from_dict, params_to_dict, spec_from_dict, spec_to_dict


class TestForward:
    def test_relu_positive_scalar(self):
        spec = relu_spec(2, (1,))
        params = NetworkParams((np.array([[1.0, 0.0]]),), np.array([1.0]))
        assert forward(spec, params, np.array([3.0, -5.0])) == 3.0

    def test_relu_clips_negative(self):
        spec = relu_spec(2, (1,))
        params = NetworkParams((np.array([[1.0, 0.0]]),), np.array([1.0]))
        assert forward(spec, params, np.array([-3.0, -5.0])) == 0.0

    def test_depth_three_composition(self):
        spec = relu_spec(1, (1, 1))
        params = NetworkParams((np.array([[1.0]]), np.array([[2.0]])), np.array([1.0]))
        assert forward(spec, params, np.array([1.0])) == 2.0

    def test_batch_matches_single(self):
        rng = np.random.default_rng(11)
        spec = random_spec(rng)
        params = random_params(rng, spec)
        xs = rng.standard_normal((10, spec.input_dim))
        batch = batch_forward(spec, params, xs)
        singles = [forward(spec, params, x) for x in xs]
        np.testing.assert_allclose(batch, singles, rtol=0, atol=1e-14)

    def test_shape_mismatch_raises(self):
        spec = relu_spec(2, (1,))
        params = NetworkParams((np.array([[1.0, 0.0, 0.0]]),), np.array([1.0]))
        with pytest.raises(ShapeError):
            forward(spec, params, np.array([1.0, 2.0]))
        good = NetworkParams((np.array([[1.0, 0.0]]),), np.array([1.0]))
        with pytest.raises(ShapeError):
            forward(spec, good, np.array([1.0, 2.0, 3.0]))


class TestGradParams:
    def test_active_unit_chain_rule(self):
        spec = relu_spec(2, (1,))
        params = NetworkParams((np.array([[1.0, 0.0]]),), np.array([1.0]))
        g = grad_params(spec, params, np.array([3.0, -5.0]))
        np.testing.assert_allclose(g.output, [3.0])
        np.testing.assert_allclose(g.hidden[0], [[3.0, -5.0]])

    def test_inactive_unit_zero_gradients(self):
        spec = relu_spec(2, (1,))
        params = NetworkParams((np.array([[1.0, 0.0]]),), np.array([1.0]))
        g = grad_params(spec, params, np.array([-3.0, -5.0]))
        np.testing.assert_allclose(g.output, [0.0])
        np.testing.assert_allclose(g.hidden[0], [[0.0, 0.0]])

    def test_matches_finite_differences_spec_example(self):
        rng = np.random.default_rng(5)
        spec = NetworkSpec(
            4, (5, 5), (activation_profile("relu"), activation_profile("relu"))
        )
        params = random_params(rng, spec)
        x = rng.standard_normal(4)
        g = grad_params(spec, params, x)
        fd_hidden, fd_out = finite_difference_grad(spec, params, x)
        worst = max(
            max(max_scaled_error(a, b) for a, b in zip(g.hidden, fd_hidden)),
            max_scaled_error(g.output, fd_out),
        )
        assert worst <= 1e-5

    def test_matches_finite_differences_mixed_activations(self):
        rng = np.random.default_rng(17)
        for _ in range(10):
            spec = random_spec(rng, max_width=5)
            params = random_params(rng, spec)
            x = rng.standard_normal(spec.input_dim)
            g = grad_params(spec, params, x)
            fd_hidden, fd_out = finite_difference_grad(spec, params, x)
            worst = max(
                max(max_scaled_error(a, b) for a, b in zip(g.hidden, fd_hidden)),
                max_scaled_error(g.output, fd_out),
            )
            assert worst <= 1e-5


class TestActivationProfile:
    def test_relu_any_window(self):
        p = activation_profile("relu", math.inf)
        assert (p.lipschitz, p.min_gain, p.q) == (1.0, 1.0, math.inf)

    def test_sigmoid_gain_formula(self):
        # guaranteed gain is 1/(2 + 2 e^q); at q = 1 that is 1/(2 + 2e)
        p = activation_profile("sigmoid", 1.0)
        assert p.lipschitz == 0.25
        np.testing.assert_allclose(p.min_gain, 1.0 / (2.0 + 2.0 * math.e), rtol=0, atol=1e-15)
        np.testing.assert_allclose(p.min_gain, 0.134470710685, atol=1e-12)

    def test_leaky_relu_gain_is_valid_secant_floor(self):
        p = activation_profile("leaky_relu", math.inf, slope=0.2)
        assert (p.lipschitz, p.min_gain) == (1.0, 0.2)
        # numeric check: secant slopes on [0, 10] never fall below the gain
        rng = np.random.default_rng(3)
        x = np.sort(rng.uniform(0, 10, size=(1000, 2)), axis=1)
        secant = (p(x[:, 1]) - p(x[:, 0])) / np.where(x[:, 1] > x[:, 0], x[:, 1] - x[:, 0], 1.0)
        assert np.all(secant + 1e-12 >= p.min_gain)

    @pytest.mark.parametrize("kind", ["relu", "leaky_relu", "sigmoid", "tanh", "softplus"])
    def test_secant_invariants(self, kind):
        rng = np.random.default_rng(hash(kind) % 2**32)
        p = random_profile(rng, kind)
        hi = min(p.q, 10.0)
        pairs = np.sort(rng.uniform(0.0, hi, size=(1000, 2)), axis=1)
        x1, x2 = pairs[:, 0], pairs[:, 1]
        diff = p(x2) - p(x1)
        gap = x2 - x1
        assert np.all(diff >= p.min_gain * gap - 1e-12)
        assert np.all(diff <= p.lipschitz * gap + 1e-12)
        # non-decreasing with nonnegative value at 0 on a sampled grid
        grid = np.linspace(-10.0, 10.0, 2001)
        vals = p(grid)
        assert np.all(np.diff(vals) >= -1e-12)
        assert p(0.0) >= 0.0

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValidationError):
            activation_profile("relu", -1.0)
        with pytest.raises(ValidationError):
            activation_profile("sigmoid", math.inf)
        with pytest.raises(ValidationError):
            activation_profile("leaky_relu", slope=1.5)
        with pytest.raises(ValidationError):
            activation_profile("gelu")


class TestInvariants:
    def test_positive_homogeneity(self):
        rng = np.random.default_rng(23)
        for _ in range(50):
            spec = random_spec(rng, kinds=["relu", "leaky_relu"])
            params = random_params(rng, spec)
            x = rng.standard_normal(spec.input_dim)
            factors = rng.uniform(0.1, 3.0, size=spec.depth)
            base = forward(spec, params, x)
            scaled = forward(spec, params.scaled(factors), x)
            np.testing.assert_allclose(
                scaled, float(np.prod(factors)) * base, rtol=1e-12, atol=1e-300
            )

    def test_lipschitz_in_input(self):
        rng = np.random.default_rng(29)
        for _ in range(100):
            spec = random_spec(rng, max_width=5)
            radii = tuple(rng.uniform(0.5, 2.0, size=spec.depth))
            cs = ConstraintSet("frobenius", radii)
            params = random_feasible_params(rng, spec, cs)
            for _ in range(10):
                x1 = rng.standard_normal(spec.input_dim)
                x2 = rng.standard_normal(spec.input_dim)
                lhs = abs(forward(spec, params, x1) - forward(spec, params, x2))
                lip = np.prod(radii) * np.prod([p.lipschitz for p in spec.activations])
                assert lhs <= lip * np.linalg.norm(x1 - x2) + 1e-9

    def test_scalar_chain_matches_network(self):
        rng = np.random.default_rng(31)
        acts = (activation_profile("tanh", 2.0), activation_profile("relu"))
        for x in rng.standard_normal(20):
            direct = 3.0 * acts[1](0.5 * acts[0](x))
            np.testing.assert_allclose(scalar_chain(x, (0.5,), acts, 3.0), direct, rtol=1e-15)


class TestSerialization:
    def test_spec_roundtrip(self):
        rng = np.random.default_rng(37)
        spec = random_spec(rng)
        again = spec_from_dict(spec_to_dict(spec))
        assert again == spec

    def test_params_roundtrip(self):
        rng = np.random.default_rng(41)
        spec = random_spec(rng)
        params = random_params(rng, spec)
        again = params_from_dict(params_to_dict(params))
        for a, b in zip(again.hidden, params.hidden):
            np.testing.assert_array_equal(a, b)
        np.testing.assert_array_equal(again.output, params.output)

    def test_depth_mismatch_rejected(self):
        d = spec_to_dict(relu_spec(2, (1,)))
        d["d"] = 5
        with pytest.raises(ValidationError):
            spec_from_dict(d)

    def test_default_constant_width(self):
        spec = spec_from_dict(
            {"h": 2, "d": 3, "activations": [{"kind": "relu", "q": "inf"}] * 2}
        )
        assert spec.widths == (3, 3)
