"""AdamW with decoupled weight decay, cosine warmup schedule, gradient clipping."""

from __future__ import annotations

import math

import numpy as np

from .tensor import NonFiniteError, Tensor


def cosine_warmup_lr(step: int, warmup: int, total: int, peak_lr: float,
                     min_lr: float = 0.0) -> float:
    """Linear ramp 0 -> peak over [0, warmup], cosine decay peak -> min over
    [warmup, total]; steps past total clamp to min_lr."""
    if warmup >= total:
        raise ValueError("warmup must be smaller than total")
    if step < 0:
        raise ValueError("step must be >= 0")
    if step >= total:
        return min_lr
    if warmup > 0 and step <= warmup:
        return peak_lr * step / warmup
    progress = (step - warmup) / (total - warmup)
    return min_lr + 0.5 * (peak_lr - min_lr) * (1.0 + math.cos(math.pi * progress))


def clip_grad_norm(params, max_norm: float) -> float:
    """Scale all gradients by max_norm/norm when the global L2 norm exceeds
    max_norm; returns the pre-clip norm."""
    params = [p for p in params if p.grad is not None]
    sq = 0.0
    for p in params:
        g = p.grad
        if not np.all(np.isfinite(g)):
            raise NonFiniteError("non-finite gradient")
        sq += float(np.dot(g.ravel(), g.ravel()))
    norm = math.sqrt(sq)
    if norm > max_norm:
        scale = max_norm / norm
        for p in params:
            p.grad *= scale
    return norm


class AdamW:
    """Decoupled-weight-decay Adam over named parameter lists.

    The decay step (p -= lr * wd * p) is applied separately from the
    bias-corrected moment update, both scaled by the current lr.
    """

    def __init__(self, named_params, lr: float = 4e-4, beta1: float = 0.9,
                 beta2: float = 0.95, weight_decay: float = 0.05, eps: float = 1e-8):
        self.params: list[tuple[str, Tensor]] = list(named_params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.weight_decay = weight_decay
        self.eps = eps
        self.step_count = 0
        self.m = {name: np.zeros_like(p.data) for name, p in self.params}
        self.v = {name: np.zeros_like(p.data) for name, p in self.params}

    def step(self, lr: float | None = None):
        if lr is not None:
            self.lr = lr
        self.step_count += 1
        t = self.step_count
        bc1 = 1.0 - self.beta1 ** t
        bc2 = 1.0 - self.beta2 ** t
        for name, p in self.params:
            g = p.grad
            if g is None:
                continue
            if g.shape != p.data.shape:
                raise ValueError(f"gradient shape {g.shape} != parameter shape {p.data.shape} for {name}")
            if self.weight_decay != 0.0:
                p.data -= self.lr * self.weight_decay * p.data
            m = self.m[name]
            v = self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p.data -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)

    def zero_grad(self):
        for _, p in self.params:
            p.grad = None

    def state_arrays(self) -> dict[str, np.ndarray]:
        """Optimizer state as named float32 arrays (checkpoint payload)."""
        out = {"opt.step": np.array([self.step_count], dtype=np.float32)}
        for name, _ in self.params:
            out[f"opt.m.{name}"] = self.m[name].astype(np.float32)
            out[f"opt.v.{name}"] = self.v[name].astype(np.float32)
        return out

    def load_state_arrays(self, arrays: dict[str, np.ndarray]):
        self.step_count = int(arrays["opt.step"][0])
        for name, p in self.params:
            self.m[name] = arrays[f"opt.m.{name}"].reshape(p.data.shape).copy()
            self.v[name] = arrays[f"opt.v.{name}"].reshape(p.data.shape).copy()
