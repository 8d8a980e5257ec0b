"""Reverse-mode autodiff, network blocks, optimizer, and checkpoints."""

from .checkpoint import load_checkpoint, save_checkpoint
from .nn import MLP, Embedding, LayerNorm, Linear, Module
from .optim import Adam, OneCycleSchedule
from .tensor import (Tensor, bce_with_logits, concat, cross_entropy, dropout,
                     gather_rows, layer_norm, log_softmax, no_grad,
                     segment_max, segment_mean, segment_softmax, segment_sum,
                     softmax, tensor, zeros)

__all__ = [
    "Adam", "Embedding", "LayerNorm", "Linear", "MLP", "Module",
    "OneCycleSchedule", "Tensor", "bce_with_logits", "concat",
    "cross_entropy", "dropout", "gather_rows", "layer_norm",
    "load_checkpoint", "log_softmax", "no_grad", "save_checkpoint",
    "segment_max", "segment_mean", "segment_softmax", "segment_sum",
    "softmax", "tensor", "zeros",
]
