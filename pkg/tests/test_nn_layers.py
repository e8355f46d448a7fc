"""Attention / MLP layer contracts against loop-based oracles."""

import numpy as np
import pytest

from motion4d.nn import Attention, AttentionConfig, GeluMlp, Linear, SelfAttentionBlock
from motion4d.nn.tensor import NonFiniteError, Tensor

from oracles import dense_attention, finite_diff_grad, gelu_exact, rel_err


def make_attention(c, heads, qk_norm, seed=0, dtype=np.float64):
    rng = np.random.default_rng(seed)
    attn = Attention(AttentionConfig(c, heads, qk_norm), rng, dtype=dtype)
    for lin in (attn.wq, attn.wk, attn.wv, attn.wo):
        lin.weight.data = rng.normal(scale=0.3, size=lin.weight.shape).astype(dtype)
        lin.bias.data = rng.normal(scale=0.05, size=lin.bias.shape).astype(dtype)
    return attn


class TestAttention:
    def test_single_key_returns_value_row(self):
        # identity value/output projections, one key: softmax over one element is 1
        attn = make_attention(8, 2, qk_norm=False)
        attn.wv.weight.data = np.eye(8)
        attn.wv.bias.data[:] = 0.0
        attn.wo.weight.data = np.eye(8)
        attn.wo.bias.data[:] = 0.0
        rng = np.random.default_rng(1)
        q = Tensor(rng.normal(size=(5, 8)))
        kv = Tensor(rng.normal(size=(1, 8)))
        out = attn(q, kv)
        assert np.allclose(out.data, np.repeat(kv.data, 5, axis=0), atol=1e-12)

    def test_identical_keys_give_uniform_weights(self):
        attn = make_attention(8, 2, qk_norm=True)
        rng = np.random.default_rng(2)
        q = Tensor(rng.normal(size=(3, 8)))
        kv = Tensor(np.repeat(rng.normal(size=(1, 8)), 7, axis=0))
        w = attn.attention_weights(q, kv)
        assert w.shape == (2, 3, 7)
        assert np.allclose(w, 1.0 / 7.0, atol=1e-12)

    @pytest.mark.parametrize("qk_norm", [False, True])
    def test_matches_dense_loop_oracle(self, qk_norm):
        attn = make_attention(8, 2, qk_norm=qk_norm, seed=3)
        rng = np.random.default_rng(4)
        q = rng.normal(size=(3, 8))
        kv = rng.normal(size=(5, 8))
        got = attn(Tensor(q), Tensor(kv)).data
        want = dense_attention(
            q, kv,
            attn.wq.weight.data, attn.wq.bias.data,
            attn.wk.weight.data, attn.wk.bias.data,
            attn.wv.weight.data, attn.wv.bias.data,
            attn.wo.weight.data, attn.wo.bias.data,
            heads=2, qk_norm=qk_norm,
            qk_scale=None if not qk_norm else attn.qk_scale.data,
        )
        assert np.max(np.abs(got - want)) < 1e-5

    def test_batched_equals_per_frame(self):
        attn = make_attention(8, 2, qk_norm=True, seed=5)
        rng = np.random.default_rng(6)
        x = rng.normal(size=(4, 6, 8))
        batched = attn(Tensor(x)).data
        for t in range(4):
            single = attn(Tensor(x[t])).data
            assert np.allclose(batched[t], single, atol=1e-12)

    def test_dimension_mismatch_raises(self):
        attn = make_attention(8, 2, qk_norm=True)
        with pytest.raises(ValueError):
            attn(Tensor(np.zeros((3, 6))), Tensor(np.zeros((5, 8))))

    def test_non_finite_input_raises(self):
        attn = make_attention(8, 2, qk_norm=True)
        bad = np.zeros((3, 8))
        bad[0, 0] = np.nan
        with pytest.raises(NonFiniteError):
            attn(Tensor(bad), Tensor(np.zeros((5, 8))))

    def test_heads_must_divide_dim(self):
        with pytest.raises(ValueError):
            AttentionConfig(10, 3)

    def test_gradients_match_fd(self):
        attn = make_attention(8, 2, qk_norm=True, seed=7)
        rng = np.random.default_rng(8)
        q = Tensor(rng.normal(size=(3, 8)), requires_grad=True)
        kv = Tensor(rng.normal(size=(4, 8)), requires_grad=True)

        def fwd():
            y = attn(q, kv)
            return (y * y).sum()

        fwd().backward()
        for name, p in [("q", q), ("kv", kv), ("wq", attn.wq.weight),
                        ("scale", attn.qk_scale), ("wo", attn.wo.weight)]:
            num = finite_diff_grad(lambda: float(fwd().data), p.data, h=1e-3)
            assert rel_err(p.grad, num) < 1e-3, name


class TestGeluMlp:
    def test_zero_input_zero_bias_gives_zero(self):
        rng = np.random.default_rng(0)
        mlp = GeluMlp(6, 12, 6, rng, dtype=np.float64)
        out = mlp(Tensor(np.zeros((4, 6))))
        assert np.allclose(out.data, 0.0)

    def test_identity_linears_evaluate_exact_gelu(self):
        rng = np.random.default_rng(0)
        mlp = GeluMlp(1, 1, 1, rng, dtype=np.float64)
        mlp.fc1.weight.data = np.eye(1)
        mlp.fc2.weight.data = np.eye(1)
        mlp.fc1.bias.data[:] = 0.0
        mlp.fc2.bias.data[:] = 0.0
        out = float(mlp(Tensor(np.array([[3.0]]))).data[0, 0])
        # frozen from the erf oracle; the exact formula gives 2.9959502...
        assert abs(out - gelu_exact(3.0)) < 1e-12
        assert abs(out - 2.9959502) < 1e-6

    def test_gradient_matches_fd(self):
        rng = np.random.default_rng(9)
        mlp = GeluMlp(5, 11, 5, rng, dtype=np.float64)
        x = Tensor(rng.normal(size=(3, 5)), requires_grad=True)

        def fwd():
            y = mlp(x)
            return (y * y).sum()

        fwd().backward()
        for p in [x, mlp.fc1.weight, mlp.fc1.bias, mlp.fc2.weight]:
            num = finite_diff_grad(lambda: float(fwd().data), p.data, h=1e-3)
            assert rel_err(p.grad, num) < 1e-3

    def test_non_finite_input_raises(self):
        rng = np.random.default_rng(1)
        mlp = GeluMlp(4, 8, 4, rng)
        with pytest.raises(NonFiniteError):
            mlp(Tensor(np.array([[np.inf, 0, 0, 0]])))


def test_toy_model_every_parameter_matches_fd():
    """Two blocks end to end; every parameter entry checked against central FD."""
    rng = np.random.default_rng(10)
    block = SelfAttentionBlock(6, 2, rng, qk_norm=True, mlp_ratio=2, dtype=np.float64)
    head = Linear(6, 1, rng, dtype=np.float64)
    x = Tensor(rng.normal(size=(4, 6)))

    def fwd():
        y = head(block(x))
        return (y * y).sum()

    params = dict(block.named_parameters())
    params.update({f"head.{k}": v for k, v in head.named_parameters()})
    fwd().backward()
    # h=3e-4: the deep composition leaves some blocks with ~1e-4-scale
    # gradients where h=1e-3 truncation noise alone eats the budget
    for name, p in params.items():
        num = finite_diff_grad(lambda: float(fwd().data), p.data, h=3e-4)
        assert rel_err(p.grad, num) < 1e-3, name
