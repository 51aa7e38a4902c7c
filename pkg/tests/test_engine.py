import numpy as np
import pytest
from hypothesis import given, strategies as st

from inbetween import engine
from inbetween.engine import (
    AmsGrad,
    FeedForward,
    Linear,
    LSTMCell,
    Parameter,
    Tensor,
    gradient_check,
)
from inbetween.engine import tensor as T


class TestPlu:
    def test_zero(self):
        assert float(T.plu(Tensor(0.0)).values) == 0.0

    def test_identity_region(self):
        assert float(T.plu(Tensor(0.5)).values) == 0.5

    def test_outer_region(self):
        assert abs(float(T.plu(Tensor(2.0)).values) - 1.1) < 1e-12

    def test_negative_outer_region(self):
        # alpha(x + c) - c at x = -2: 0.1 * (-1) - 1 = -1.1
        assert abs(float(T.plu(Tensor(-2.0)).values) - (-1.1)) < 1e-12

    def test_piecewise_shape(self):
        xs = np.linspace(-3, 3, 61)
        out = T.plu(Tensor(xs)).values
        expected = np.where(np.abs(xs) <= 1.0, xs, np.where(xs > 1, 0.1 * (xs - 1) + 1, 0.1 * (xs + 1) - 1))
        np.testing.assert_allclose(out, expected, atol=1e-12)

    @given(st.floats(-50, 50))
    def test_formula_property(self, x):
        # max(a(x+c)-c, min(a(x-c)+c, x)) with a=0.1, c=1
        expected = max(0.1 * (x + 1) - 1, min(0.1 * (x - 1) + 1, x))
        assert abs(float(T.plu(Tensor(x)).values) - expected) < 1e-12


class TestLstm:
    def make_zero_cell(self, in_dim=3, hidden=4):
        rng = np.random.default_rng(0)
        cell = LSTMCell("lstm", in_dim, hidden, rng)
        cell.w_x.values[...] = 0.0
        cell.w_h.values[...] = 0.0
        cell.bias.values[...] = 0.0
        return cell

    def test_zero_weights_zero_cell(self):
        cell = self.make_zero_cell()
        h, c = engine.lstm_step(cell, np.zeros((1, 3)), np.zeros((1, 4)), np.zeros((1, 4)))
        np.testing.assert_allclose(h, 0.0)
        np.testing.assert_allclose(c, 0.0)

    def test_zero_weights_nonzero_cell(self):
        cell = self.make_zero_cell()
        c0 = np.full((1, 4), 0.8)
        h, c = engine.lstm_step(cell, np.zeros((1, 3)), np.zeros((1, 4)), c0)
        np.testing.assert_allclose(c, 0.5 * c0, atol=1e-12)
        np.testing.assert_allclose(h, 0.5 * np.tanh(0.5 * c0), atol=1e-12)

    def test_matches_scalar_oracle(self):
        rng = np.random.default_rng(7)
        cell = LSTMCell("lstm", 2, 3, rng)
        x = rng.normal(size=(1, 2))
        h0 = rng.normal(size=(1, 3))
        c0 = rng.normal(size=(1, 3))
        h, c = engine.lstm_step(cell, x, h0, c0)

        def sig(v):
            return 1.0 / (1.0 + np.exp(-v))

        # scalar re-implementation, one output unit at a time
        wx, wh, b = cell.w_x.values, cell.w_h.values, cell.bias.values
        for u in range(3):
            zi = sum(x[0, k] * wx[k, u] for k in range(2)) + sum(h0[0, k] * wh[k, u] for k in range(3)) + b[u]
            zf = sum(x[0, k] * wx[k, 3 + u] for k in range(2)) + sum(h0[0, k] * wh[k, 3 + u] for k in range(3)) + b[3 + u]
            zg = sum(x[0, k] * wx[k, 6 + u] for k in range(2)) + sum(h0[0, k] * wh[k, 6 + u] for k in range(3)) + b[6 + u]
            zo = sum(x[0, k] * wx[k, 9 + u] for k in range(2)) + sum(h0[0, k] * wh[k, 9 + u] for k in range(3)) + b[9 + u]
            cu = sig(zf) * c0[0, u] + sig(zi) * np.tanh(zg)
            hu = sig(zo) * np.tanh(cu)
            assert abs(c[0, u] - cu) < 1e-12
            assert abs(h[0, u] - hu) < 1e-12

    def test_forget_bias_initialized(self):
        cell = LSTMCell("lstm", 2, 3, np.random.default_rng(0))
        assert np.all(cell.bias.values[3:6] > 0.4)


class TestBackward:
    def test_sum_gradient_is_ones(self):
        w = Parameter("w", np.arange(6, dtype=float).reshape(2, 3))
        loss = T.sum_(w)
        loss.backward()
        np.testing.assert_allclose(w.grad, np.ones((2, 3)))

    def test_l1_sign_subgradient(self):
        x = Parameter("x", np.array([-2.0, 3.0]))
        loss = T.l1_norm(x)
        loss.backward()
        np.testing.assert_allclose(x.grad, [-1.0, 1.0])
        assert float(loss.values) == 5.0

    def test_l1_subgradient_zero_at_zero(self):
        x = Parameter("x", np.array([0.0, 1.0]))
        T.l1_norm(x).backward()
        np.testing.assert_allclose(x.grad, [0.0, 1.0])

    def test_unreachable_parameter_gets_no_grad(self):
        w = Parameter("w", np.ones(3))
        unused = Parameter("u", np.ones(3))
        T.sum_(w).backward()
        assert unused.grad is None

    def test_grad_accumulates_over_reuse(self):
        x = Parameter("x", np.array([2.0]))
        loss = T.sum_(x * x)  # x used twice
        loss.backward()
        np.testing.assert_allclose(x.grad, [4.0])

    def test_composite_matches_finite_differences(self):
        rng = np.random.default_rng(3)
        w1 = Parameter("w1", rng.normal(size=(4, 5)))
        b1 = Parameter("b1", rng.normal(size=5))
        w2 = Parameter("w2", rng.normal(size=(5, 2)))
        x = Tensor(rng.normal(size=(3, 4)))

        def build():
            h = T.plu(T.matmul(x, w1) + b1)
            y = T.tanh(T.matmul(h, w2))
            return T.mean(T.square(y)) + 0.3 * T.l1_norm(w2)

        report = gradient_check(build, [w1, b1, w2])
        assert report.passed, str(report)

    def test_concat_slice_graph(self):
        rng = np.random.default_rng(5)
        a = Parameter("a", rng.normal(size=(2, 3)))
        b = Parameter("b", rng.normal(size=(2, 2)))

        def build():
            joined = T.concat([a, b], axis=1)
            left = joined[:, :2]
            right = joined[:, 2:]
            return T.sum_(T.square(left)) + T.sum_(T.abs_(right))

        report = gradient_check(build, [a, b])
        assert report.passed, str(report)

    def test_random_composed_graphs(self):
        # random op chains (depth <= 6) over small tensors vs finite differences
        unary = [T.sigmoid, T.tanh, T.relu, T.plu, T.square, lambda t: T.scale(t, 0.7)]
        for seed in range(12):
            rng = np.random.default_rng(seed)
            p = Parameter("p", rng.normal(size=(2, 3)) * 0.8)
            q = Parameter("q", rng.normal(size=(2, 3)) * 0.8)

            def build():
                t = T.mul(p, q) if seed % 2 else T.add(p, q)
                local = np.random.default_rng(seed + 100)
                for _ in range(local.integers(1, 6)):
                    t = unary[local.integers(len(unary))](t)
                return T.mean(t) + T.mean(T.square(p))

            report = gradient_check(build, [p, q])
            assert report.passed, f"seed {seed}: {report}"

    def test_backward_requires_scalar(self):
        w = Parameter("w", np.ones(3))
        with pytest.raises(ValueError):
            (w * 2.0).backward()

    def test_mixed_precision_rejected(self):
        a = Tensor(np.ones(3))
        b = Tensor(np.ones(3))
        b.values = b.values.astype(np.float32)
        with pytest.raises(TypeError):
            T.add(a, b)

    def test_no_grad_blocks_graph(self):
        w = Parameter("w", np.ones(3))
        with engine.no_grad():
            out = T.sum_(w * 2.0)
        assert out._backward is None and not out.requires_grad


class TestAmsGrad:
    def test_zero_grad_no_update(self):
        p = Parameter("p", np.array([1.0, 2.0]))
        opt = AmsGrad([p])
        p.grad = np.zeros(2)
        opt.step()
        np.testing.assert_allclose(p.values, [1.0, 2.0])

    def test_scalar_step_arithmetic(self):
        p = Parameter("p", np.array([1.0]))
        opt = AmsGrad([p], lr=0.001, beta1=0.5, beta2=0.9)
        p.grad = np.array([1.0])
        opt.step()
        assert abs(opt.m["p"][0] - 0.5) < 1e-12
        assert abs(opt.v["p"][0] - 0.1) < 1e-12
        assert abs(opt.vhat["p"][0] - 0.1) < 1e-12
        expected = 1.0 - 0.001 * 0.5 / (np.sqrt(0.1) + 1e-8)
        assert abs(p.values[0] - expected) < 1e-9
        assert abs(p.values[0] - 0.99842) < 5e-6

    def test_vhat_monotone(self):
        p = Parameter("p", np.array([1.0]))
        opt = AmsGrad([p])
        p.grad = np.array([1.0])
        opt.step()
        vhat_before = opt.vhat["p"].copy()
        p.grad = np.array([0.0])
        opt.step()
        np.testing.assert_allclose(opt.vhat["p"], vhat_before)

    def test_reduces_to_sign_scaled_sgd(self):
        # beta1 = beta2 = 0 with a fresh state: |update| = lr |g| / (|g| + eps)
        rng = np.random.default_rng(1)
        p = Parameter("p", rng.normal(size=8))
        before = p.values.copy()
        opt = AmsGrad([p], lr=0.01, beta1=0.0, beta2=0.0)
        g = rng.normal(size=8)
        p.grad = g.copy()
        opt.step()
        update = np.abs(p.values - before)
        np.testing.assert_allclose(update, 0.01 * np.abs(g) / (np.abs(g) + 1e-8), rtol=1e-9)

    def test_state_roundtrip(self):
        p = Parameter("p", np.array([1.0]))
        opt = AmsGrad([p])
        p.grad = np.array([0.5])
        opt.step()
        state = opt.state_dict()
        opt2 = AmsGrad([p])
        opt2.load_state_dict(state)
        assert opt2.step_count == 1
        np.testing.assert_allclose(opt2.vhat["p"], opt.vhat["p"])


class TestGradientCheckHarness:
    def test_linear_layer_passes(self):
        rng = np.random.default_rng(2)
        layer = Linear("lin", 4, 3, rng)
        x = Tensor(rng.normal(size=(5, 4)))

        def build():
            return T.mean(T.square(layer(x)))

        report = gradient_check(build, layer.parameters())
        assert report.passed, str(report)

    def test_ffn_passes(self):
        rng = np.random.default_rng(4)
        net = FeedForward("ffn", [3, 6, 4], rng, activation="plu")
        x = Tensor(rng.normal(size=(2, 3)))

        def build():
            return T.mean(T.abs_(net(x)))

        report = gradient_check(build, net.parameters())
        assert report.passed, str(report)

    def test_lstm_unrolled_three_steps_passes(self):
        rng = np.random.default_rng(6)
        cell = LSTMCell("lstm", 3, 4, rng)
        xs = [Tensor(rng.normal(size=(2, 3))) for _ in range(3)]

        def build():
            state = cell.initial_state(2)
            out = None
            for x in xs:
                out, state = cell(x, state)
            return T.mean(T.square(out))

        report = gradient_check(build, cell.parameters())
        assert report.passed, str(report)

    def test_requires_float64(self):
        engine.set_default_dtype(np.float32)
        try:
            with pytest.raises(RuntimeError):
                gradient_check(lambda: Tensor(0.0), [])
        finally:
            engine.set_default_dtype(np.float64)
