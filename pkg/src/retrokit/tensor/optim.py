"""Adam with bias correction and a one-cycle learning-rate schedule."""

from __future__ import annotations

import math
from typing import Iterable

import numpy as np

from .tensor import Tensor

__all__ = ["Adam", "OneCycleSchedule"]


class Adam:
    def __init__(self, params: Iterable[Tensor], lr: float = 1e-3,
                 betas: tuple[float, float] = (0.9, 0.999), eps: float = 1e-8,
                 weight_decay: float = 0.0):
        self.params = list(params)
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.t = 0
        self._m = [np.zeros_like(p.data) for p in self.params]
        self._v = [np.zeros_like(p.data) for p in self.params]

    def zero_grad(self) -> None:
        for p in self.params:
            p.grad = None

    def step(self) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1.0 - b1 ** self.t
        c2 = 1.0 - b2 ** self.t
        for p, m, v in zip(self.params, self._m, self._v):
            if p.grad is None:
                continue
            g = p.grad
            if self.weight_decay:
                g = g + self.weight_decay * p.data
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            p.data -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


class OneCycleSchedule:
    """Cosine warmup to max_lr, then cosine decay to a small floor.

    Call step() once per optimizer step; it sets optimizer.lr before the
    update, starting at max_lr / div_factor and ending at
    max_lr / (div_factor * final_div_factor).
    """

    def __init__(self, optimizer: Adam, max_lr: float, total_steps: int,
                 pct_start: float = 0.3, div_factor: float = 25.0,
                 final_div_factor: float = 1e4):
        if total_steps < 1:
            raise ValueError("total_steps must be positive")
        self.optimizer = optimizer
        self.max_lr = max_lr
        self.total_steps = total_steps
        self.up_steps = max(1, int(round(pct_start * total_steps)))
        self.start_lr = max_lr / div_factor
        self.final_lr = self.start_lr / final_div_factor
        self.t = 0

    def lr_at(self, t: int) -> float:
        if t <= self.up_steps:
            frac = t / self.up_steps
            lo, hi = self.start_lr, self.max_lr
        else:
            down = max(1, self.total_steps - self.up_steps)
            frac = min(1.0, (t - self.up_steps) / down)
            lo, hi = self.max_lr, self.final_lr
            return lo + (hi - lo) * 0.5 * (1.0 - math.cos(math.pi * frac))
        return lo + (hi - lo) * 0.5 * (1.0 - math.cos(math.pi * frac))

    def step(self) -> float:
        self.t += 1
        lr = self.lr_at(self.t)
        self.optimizer.lr = lr
        return lr
