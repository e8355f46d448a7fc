from .tensor import (
    GraphError,
    NonFiniteError,
    Tensor,
    broadcast_to,
    concat,
    gelu,
    grad_enabled,
    layer_norm,
    no_grad,
    softmax,
)
from .layers import (
    Attention,
    AttentionConfig,
    CrossAttentionBlock,
    GeluMlp,
    LayerNorm,
    Linear,
    Module,
    SelfAttentionBlock,
    trunc_normal,
)
from .optim import AdamW, clip_grad_norm, cosine_warmup_lr
from . import checkpoint

__all__ = [
    "AdamW",
    "Attention",
    "AttentionConfig",
    "CrossAttentionBlock",
    "GeluMlp",
    "GraphError",
    "LayerNorm",
    "Linear",
    "Module",
    "NonFiniteError",
    "SelfAttentionBlock",
    "Tensor",
    "broadcast_to",
    "checkpoint",
    "clip_grad_norm",
    "concat",
    "cosine_warmup_lr",
    "gelu",
    "grad_enabled",
    "layer_norm",
    "no_grad",
    "softmax",
    "trunc_normal",
]
