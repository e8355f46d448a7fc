"""Network building blocks: linear/norm layers, QK-norm multi-head attention,
GELU MLPs and pre-norm residual transformer blocks.

All layers work on (..., tokens, dim) shaped tensors; extra leading axes
(batch, frames) broadcast through untouched.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .tensor import Tensor


@dataclass
class AttentionConfig:
    model_dim: int
    heads: int
    qk_norm: bool = True

    def __post_init__(self):
        if self.model_dim <= 0 or self.heads <= 0:
            raise ValueError("model_dim and heads must be positive")
        if self.model_dim % self.heads != 0:
            raise ValueError(f"heads ({self.heads}) must divide model_dim ({self.model_dim})")

    @property
    def head_dim(self) -> int:
        return self.model_dim // self.heads


def trunc_normal(rng: np.random.Generator, shape, std: float = 0.02, dtype=np.float32) -> np.ndarray:
    """Normal(0, std) resampled until inside +-2 std."""
    out = rng.normal(0.0, std, size=shape)
    for _ in range(16):
        bad = np.abs(out) > 2.0 * std
        if not bad.any():
            break
        out[bad] = rng.normal(0.0, std, size=int(bad.sum()))
    return np.clip(out, -2.0 * std, 2.0 * std).astype(dtype)


class Module:
    """Parameter container; children discovered from attributes and lists."""

    def named_parameters(self, prefix: str = ""):
        for name, val in vars(self).items():
            full = f"{prefix}{name}"
            if isinstance(val, Tensor):
                if val.requires_grad:
                    yield full, val
            elif isinstance(val, Module):
                yield from val.named_parameters(f"{full}.")
            elif isinstance(val, (list, tuple)):
                for i, item in enumerate(val):
                    if isinstance(item, Module):
                        yield from item.named_parameters(f"{full}.{i}.")
                    elif isinstance(item, Tensor) and item.requires_grad:
                        yield f"{full}.{i}", item

    def parameters(self):
        for _, p in self.named_parameters():
            yield p

    def zero_grad(self):
        for p in self.parameters():
            p.grad = None

    def num_parameters(self) -> int:
        return sum(p.size for p in self.parameters())

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)


class Linear(Module):
    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator,
                 bias: bool = True, dtype=np.float32):
        self.weight = Tensor(trunc_normal(rng, (in_dim, out_dim), dtype=dtype), requires_grad=True)
        self.bias = Tensor(np.zeros(out_dim, dtype=dtype), requires_grad=True) if bias else None

    def forward(self, x: Tensor) -> Tensor:
        y = x @ self.weight
        if self.bias is not None:
            y = y + self.bias
        return y


class LayerNorm(Module):
    def __init__(self, dim: int, dtype=np.float32, eps: float = 1e-5):
        self.gain = Tensor(np.ones(dim, dtype=dtype), requires_grad=True)
        self.bias = Tensor(np.zeros(dim, dtype=dtype), requires_grad=True)
        self.eps = eps

    def forward(self, x: Tensor) -> Tensor:
        return T.layer_norm(x, self.gain, self.bias, eps=self.eps)


class Attention(Module):
    """Multi-head scaled dot-product attention, residual not included.

    With qk_norm, query and key vectors are normalized per head to zero mean
    and unit variance over head_dim, and the normalized queries are scaled by
    a learnable per-head scalar (init 1/sqrt(head_dim)) before the dot
    product; without it the standard 1/sqrt(head_dim) logit scale applies.
    """

    def __init__(self, cfg: AttentionConfig, rng: np.random.Generator, dtype=np.float32):
        self.cfg = cfg
        c = cfg.model_dim
        self.wq = Linear(c, c, rng, dtype=dtype)
        self.wk = Linear(c, c, rng, dtype=dtype)
        self.wv = Linear(c, c, rng, dtype=dtype)
        self.wo = Linear(c, c, rng, dtype=dtype)
        if cfg.qk_norm:
            init = np.full(cfg.heads, 1.0 / np.sqrt(cfg.head_dim), dtype=dtype)
            self.qk_scale = Tensor(init, requires_grad=True)
        else:
            self.qk_scale = None

    def _split_heads(self, x: Tensor) -> Tensor:
        # (..., n, C) -> (..., H, n, hd)
        n = x.shape[-2]
        h, hd = self.cfg.heads, self.cfg.head_dim
        x = x.reshape(x.shape[:-2] + (n, h, hd))
        axes = tuple(range(x.ndim - 3)) + (x.ndim - 2, x.ndim - 3, x.ndim - 1)
        return x.transpose(axes)

    def _merge_heads(self, x: Tensor) -> Tensor:
        # (..., H, n, hd) -> (..., n, C)
        axes = tuple(range(x.ndim - 3)) + (x.ndim - 2, x.ndim - 3, x.ndim - 1)
        x = x.transpose(axes)
        return x.reshape(x.shape[:-2] + (self.cfg.model_dim,))

    def attention_weights(self, q_tokens: Tensor, kv_tokens: Tensor) -> np.ndarray:
        """Materialized softmax weights (..., H, A, B); diagnostic path."""
        _, w = self._attend(q_tokens, kv_tokens)
        return w.data

    def _attend(self, q_tokens: Tensor, kv_tokens: Tensor):
        q = self._split_heads(self.wq(q_tokens))
        k = self._split_heads(self.wk(kv_tokens))
        v = self._split_heads(self.wv(kv_tokens))
        if self.cfg.qk_norm:
            q = T.layer_norm(q)
            k = T.layer_norm(k)
            scale = self.qk_scale.reshape((self.cfg.heads, 1, 1))
            q = q * scale
            logits = q @ k.transpose(tuple(range(k.ndim - 2)) + (k.ndim - 1, k.ndim - 2))
        else:
            kt = k.transpose(tuple(range(k.ndim - 2)) + (k.ndim - 1, k.ndim - 2))
            logits = (q @ kt) * (1.0 / np.sqrt(self.cfg.head_dim))
        # logits has a single consumer; reuse its buffer for the weights
        weights = T.softmax_(logits, axis=-1)
        out = self._merge_heads(weights @ v)
        return out, weights

    def forward(self, q_tokens: Tensor, kv_tokens: Tensor | None = None) -> Tensor:
        if kv_tokens is None:
            kv_tokens = q_tokens
        if q_tokens.shape[-1] != self.cfg.model_dim or kv_tokens.shape[-1] != self.cfg.model_dim:
            raise ValueError(
                f"token dim {q_tokens.shape[-1]}/{kv_tokens.shape[-1]} != model dim {self.cfg.model_dim}")
        q_tokens.check_finite("attention queries")
        kv_tokens.check_finite("attention keys/values")
        out, _ = self._attend(q_tokens, kv_tokens)
        return self.wo(out)


class GeluMlp(Module):
    """linear -> GELU -> linear."""

    def __init__(self, in_dim: int, hidden: int, out_dim: int, rng: np.random.Generator,
                 dtype=np.float32):
        self.fc1 = Linear(in_dim, hidden, rng, dtype=dtype)
        self.fc2 = Linear(hidden, out_dim, rng, dtype=dtype)

    def forward(self, x: Tensor) -> Tensor:
        x.check_finite("mlp input")
        return self.fc2(T.gelu(self.fc1(x)))


class SelfAttentionBlock(Module):
    """Pre-norm residual self-attention followed by a residual MLP."""

    def __init__(self, dim: int, heads: int, rng: np.random.Generator,
                 qk_norm: bool = True, mlp_ratio: int = 4, dtype=np.float32):
        self.norm1 = LayerNorm(dim, dtype=dtype)
        self.attn = Attention(AttentionConfig(dim, heads, qk_norm), rng, dtype=dtype)
        self.norm2 = LayerNorm(dim, dtype=dtype)
        self.mlp = GeluMlp(dim, mlp_ratio * dim, dim, rng, dtype=dtype)

    def forward(self, x: Tensor) -> Tensor:
        h = self.norm1(x)
        x = x + self.attn(h, h)
        x = x + self.mlp(self.norm2(x))
        return x


class CrossAttentionBlock(Module):
    """Pre-norm residual cross-attention (query stream) plus residual MLP."""

    def __init__(self, dim: int, heads: int, rng: np.random.Generator,
                 qk_norm: bool = True, mlp_ratio: int = 4, dtype=np.float32):
        self.norm_q = LayerNorm(dim, dtype=dtype)
        self.norm_kv = LayerNorm(dim, dtype=dtype)
        self.attn = Attention(AttentionConfig(dim, heads, qk_norm), rng, dtype=dtype)
        self.norm2 = LayerNorm(dim, dtype=dtype)
        self.mlp = GeluMlp(dim, mlp_ratio * dim, dim, rng, dtype=dtype)

    def forward(self, queries: Tensor, kv: Tensor) -> Tensor:
        x = queries + self.attn(self.norm_q(queries), self.norm_kv(kv))
        x = x + self.mlp(self.norm2(x))
        return x
