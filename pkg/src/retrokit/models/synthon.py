"""Semi-template classification with a self-correcting pair module.

Each synthon is encoded as four pooled blocks (reaction atoms, synthon,
dual synthon, product) from a shared graph stack. A first head classifies
the synthon into K+1 template classes; a two-token transformer over the
synthon/dual pair then refines both predictions jointly. Candidate pair
assignments whose class pair never occurred in training can be filtered
by the library prior.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from retrokit.chem import MolGraph, canonical_smiles
from retrokit.rxn import Synthon
from retrokit.tensor import (MLP, Embedding, LayerNorm, Linear, Module,
                             Tensor, concat, cross_entropy, gather_rows,
                             no_grad, segment_mean, softmax)

from .drgat import DRGATStack, batch_graphs

__all__ = ["SynthonGroup", "SynthonClassifier", "prior_filter",
           "topk_joint_assignments"]


@dataclass
class SynthonGroup:
    """The synthons of one product, in labeling order."""

    product: MolGraph
    synthons: list[Synthon]
    labels: Optional[list[int]] = None      # class ids 1..K+1

    def partner_index(self, j: int) -> int:
        dual = self.synthons[j].dual
        if dual is None:
            return j
        for i, s in enumerate(self.synthons):
            if s is dual:
                return i
        return j


class PairAttention(Module):
    """Multi-head attention specialized to two-token sequences."""

    def __init__(self, dim: int, heads: int, rng: np.random.Generator):
        super().__init__()
        if dim % heads:
            raise ValueError(f"dim {dim} not divisible by heads {heads}")
        self.heads = heads
        self.dim = dim
        self.wq = Linear(dim, dim, rng)
        self.wk = Linear(dim, dim, rng)
        self.wv = Linear(dim, dim, rng)
        self.wo = Linear(dim, dim, rng)

    def forward(self, x0: Tensor, x1: Tensor) -> tuple[Tensor, Tensor]:
        n = len(x0.data)
        h, dh = self.heads, self.dim // self.heads
        scale = 1.0 / np.sqrt(dh)

        def split(t):
            return t.reshape(n, h, dh)
        q0, q1 = split(self.wq(x0)), split(self.wq(x1))
        k0, k1 = split(self.wk(x0)), split(self.wk(x1))
        v0, v1 = split(self.wv(x0)), split(self.wv(x1))

        def attend(q):
            s0 = ((q * k0).sum(axis=2, keepdims=True)) * scale
            s1 = ((q * k1).sum(axis=2, keepdims=True)) * scale
            alpha = softmax(concat([s0, s1], axis=2), axis=-1)
            mixed = alpha[:, :, 0:1] * v0 + alpha[:, :, 1:2] * v1
            return self.wo(mixed.reshape(n, self.dim))
        return attend(q0), attend(q1)


class PairTransformerLayer(Module):
    def __init__(self, dim: int, heads: int, rng: np.random.Generator):
        super().__init__()
        self.attn = PairAttention(dim, heads, rng)
        self.ln1 = LayerNorm(dim)
        self.ffn = MLP([dim, 2 * dim, dim], rng)
        self.ln2 = LayerNorm(dim)

    def forward(self, x0: Tensor, x1: Tensor) -> tuple[Tensor, Tensor]:
        a0, a1 = self.attn(x0, x1)
        x0 = self.ln1(x0 + a0)
        x1 = self.ln1(x1 + a1)
        x0 = self.ln2(x0 + self.ffn(x0))
        x1 = self.ln2(x1 + self.ffn(x1))
        return x0, x1


class SynthonClassifier(Module):
    def __init__(self, rng: np.random.Generator, n_classes: int = 151,
                 width: int = 256, n_layers: int = 6, heads: int = 4,
                 class_emb_dim: int = 128, pair_width: int = 512,
                 pair_layers: int = 2, pair_heads: int = 4,
                 dropout: float = 0.0):
        super().__init__()
        self.n_classes = n_classes
        self.stack = DRGATStack(rng, width, n_layers, heads)
        d = self.stack.out_dim
        self.head = MLP([4 * d, 256, 256, n_classes], rng, dropout_p=dropout)
        self.class_emb = Embedding(n_classes, class_emb_dim, rng)
        self.z_proj = Linear(4 * d + class_emb_dim, pair_width, rng)
        self.pair_layers = [PairTransformerLayer(pair_width, pair_heads, rng)
                            for _ in range(pair_layers)]
        self.refine_head = MLP([pair_width, 256, 256, n_classes], rng,
                               dropout_p=dropout)

    # ---- encoding ------------------------------------------------------

    def representations(self, groups: Sequence[SynthonGroup]) -> Tensor:
        """Four pooled blocks per synthon; rows follow group order."""
        graphs = []
        prod_idx, syn_idx, dual_idx = [], [], []
        c_rows, c_seg = [], []
        offsets = []
        off = 0
        j = 0
        for grp in groups:
            pg = off
            graphs.append(grp.product)
            offsets.append(off)
            off += 1
            base = off
            for s in grp.synthons:
                graphs.append(s.graph)
                off += 1
            for sj, s in enumerate(grp.synthons):
                if not s.attachment:
                    raise ValueError("synthon with empty reaction atom set")
                prod_idx.append(pg)
                syn_idx.append(base + sj)
                dual_idx.append(base + grp.partner_index(sj))
                j += 1
            j0 = j - len(grp.synthons)
            for sj, s in enumerate(grp.synthons):
                c_seg.extend([j0 + sj] * len(s.attachment))
                c_rows.append((base + sj, s.attachment))
        batch = batch_graphs(graphs)
        h = self.stack(batch)
        pooled = segment_mean(h, batch.node_seg, batch.n_graphs)

        rows = np.concatenate([
            np.asarray(att, dtype=np.int64) + batch.node_offsets[g]
            for g, att in c_rows]) if c_rows else np.zeros(0, dtype=np.int64)
        mean_c = segment_mean(gather_rows(h, rows),
                              np.asarray(c_seg, dtype=np.int64), j)
        return concat([
            mean_c,
            gather_rows(pooled, np.asarray(syn_idx, dtype=np.int64)),
            gather_rows(pooled, np.asarray(dual_idx, dtype=np.int64)),
            gather_rows(pooled, np.asarray(prod_idx, dtype=np.int64)),
        ], axis=1)

    def _pair_logits(self, groups: Sequence[SynthonGroup], hhat: Tensor,
                     pred_idx: np.ndarray) -> Tensor:
        """Refined logits from the two-token transformer over each pair."""
        z = self.z_proj(concat([hhat, self.class_emb(pred_idx)], axis=1))
        # canonical token order: the lexicographically smaller synthon
        # SMILES goes first, index as the tie-break
        partner = []
        is_first = []
        base = 0
        for grp in groups:
            keys = [canonical_smiles(s.graph) for s in grp.synthons]
            for sj in range(len(grp.synthons)):
                pj = grp.partner_index(sj)
                partner.append(base + pj)
                first = (keys[sj], sj) <= (keys[pj], pj)
                is_first.append(first)
            base += len(grp.synthons)
        partner = np.asarray(partner, dtype=np.int64)
        own = np.arange(len(partner), dtype=np.int64)
        mask = np.asarray(is_first, dtype=np.float64)[:, None]
        first_idx = np.where(mask[:, 0] > 0, own, partner)
        second_idx = np.where(mask[:, 0] > 0, partner, own)
        x0 = gather_rows(z, first_idx)
        x1 = gather_rows(z, second_idx)
        for layer in self.pair_layers:
            x0, x1 = layer(x0, x1)
        refined = x0 * Tensor(mask) + x1 * Tensor(1.0 - mask)
        return self.refine_head(refined)

    # ---- training and inference -----------------------------------------

    def loss(self, groups: Sequence[SynthonGroup],
             correcting: bool = True) -> Tensor:
        labels = np.asarray(
            [t - 1 for grp in groups for t in grp.labels], dtype=np.int64)
        hhat = self.representations(groups)
        logits1 = self.head(hhat)
        total = cross_entropy(logits1, labels, reduction="sum")
        if correcting:
            pred_idx = np.argmax(logits1.data, axis=1)
            logits2 = self._pair_logits(groups, hhat, pred_idx)
            total = total + cross_entropy(logits2, labels, reduction="sum")
        return total

    def predict_dists(self, groups: Sequence[SynthonGroup],
                      correcting: bool = True, context=None) -> list[np.ndarray]:
        """One probability row (K+1,) per synthon across all groups."""
        with no_grad():
            hhat = self.representations(groups)
            logits1 = self.head(hhat)
            if correcting:
                pred_idx = np.argmax(logits1.data, axis=1)
                logits = self._pair_logits(groups, hhat, pred_idx)
            else:
                logits = logits1
            probs = softmax(logits, axis=-1).data
        return [probs[i] for i in range(probs.shape[0])]


def prior_filter(candidates: list[tuple[tuple[int, ...], float]],
                 pair_prior: dict) -> list[tuple[tuple[int, ...], float]]:
    """Drop pair assignments whose unordered class pair was never seen."""
    kept = []
    for classes, prob in candidates:
        if len(classes) == 2:
            key = (min(classes), max(classes))
            if pair_prior.get(key, 0) <= 0:
                continue
        kept.append((classes, prob))
    return kept


def topk_joint_assignments(dists: list[np.ndarray], k: int,
                           pair_prior: Optional[dict] = None,
                           use_filter: bool = True
                           ) -> list[tuple[tuple[int, ...], float]]:
    """Top-k joint class assignments by product probability.

    Enumerates the top-k classes per synthon, ranks every combination by
    the product of probabilities, then applies the pair filter.
    """
    per_synthon = []
    for dist in dists:
        order = np.argsort(-dist, kind="stable")[:k]
        per_synthon.append([(int(c) + 1, float(dist[c])) for c in order])
    combos = []
    for assignment in itertools.product(*per_synthon):
        classes = tuple(c for c, _ in assignment)
        prob = 1.0
        for _, p in assignment:
            prob *= p
        combos.append((classes, prob))
    combos.sort(key=lambda t: (-t[1], t[0]))
    if use_filter and pair_prior is not None:
        combos = prior_filter(combos, pair_prior)
    return combos[:k]
