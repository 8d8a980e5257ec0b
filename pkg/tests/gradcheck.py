"""Central finite-difference gradient checking helpers.

Two flavors: an exhaustive per-element check for individual ops on small
inputs, and a per-parameter directional check for whole models where
element sweeps would be too slow. Both compare reverse-mode gradients
against (f(x+eps) - f(x-eps)) / 2eps at float64.

Directions whose true derivative is exactly zero (a bias that shifts
every logit in a softmax group equally, for example) measure nothing but
cancellation noise, so both checks treat "analytic and numeric both
below an absolute floor" as a pass before any relative comparison.
"""

from __future__ import annotations

import numpy as np

ZERO_FLOOR = 1e-7


def relative_error(analytic: float, numeric: float) -> float:
    denom = max(abs(analytic), abs(numeric))
    if denom < ZERO_FLOOR:
        return 0.0
    return abs(analytic - numeric) / denom


def check_elementwise(make_loss, leaves, tol: float = 1e-5,
                      eps: float = 1e-6) -> float:
    """Sweep every element of every leaf; returns the worst relative error.

    make_loss must rebuild the forward pass from the leaf tensors so a
    nudged element flows through a fresh graph.
    """
    for leaf in leaves:
        leaf.grad = None
    make_loss().backward()
    grads = [leaf.grad if leaf.grad is not None else np.zeros_like(leaf.data)
             for leaf in leaves]
    worst = 0.0
    for leaf, grad in zip(leaves, grads):
        for idx in np.ndindex(leaf.data.shape):
            keep = leaf.data[idx]
            leaf.data[idx] = keep + eps
            hi = float(make_loss().data)
            leaf.data[idx] = keep - eps
            lo = float(make_loss().data)
            leaf.data[idx] = keep
            numeric = (hi - lo) / (2.0 * eps)
            worst = max(worst, relative_error(float(grad[idx]), numeric))
    assert worst < tol, f"worst gradient relative error {worst:.3g} >= {tol}"
    return worst


def check_directional(make_loss, params, rng: np.random.Generator,
                      tol: float = 1e-4, eps: float = 1e-6) -> float:
    """One random unit direction per parameter tensor; worst relative error."""
    params = list(params)
    for p in params:
        p.grad = None
    make_loss().backward()
    worst = 0.0
    for p in params:
        direction = rng.standard_normal(p.data.shape)
        direction /= max(1.0, float(np.linalg.norm(direction)))
        analytic = 0.0 if p.grad is None else float((p.grad * direction).sum())
        p.data += eps * direction
        hi = float(make_loss().data)
        p.data -= 2.0 * eps * direction
        lo = float(make_loss().data)
        p.data += eps * direction
        numeric = (hi - lo) / (2.0 * eps)
        worst = max(worst, relative_error(analytic, numeric))
    assert worst < tol, f"worst gradient relative error {worst:.3g} >= {tol}"
    return worst
