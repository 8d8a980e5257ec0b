"""Reaction-center scoring: per-atom and per-bond probabilities.

Atom representations concatenate each atom state with the mean-pooled
graph state; bond representations concatenate the raw bond features with
both endpoint states and the pooled state. Sigmoid MLP heads score each
candidate and the ranked list merges atoms and bonds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from retrokit.chem import BOND_FDIM, MolGraph, canonical_ranks
from retrokit.rxn import CenterLabel, centers_to_targets
from retrokit.tensor import (MLP, Module, Tensor, bce_with_logits, concat,
                             gather_rows, no_grad, segment_mean)

from .drgat import BatchedGraphs, DRGATStack, batch_graphs

__all__ = ["CenterPrediction", "CenterModel"]


@dataclass
class CenterPrediction:
    atom_probs: np.ndarray                       # (n_atoms,)
    bond_probs: np.ndarray                       # (n_bonds,) bond order as stored
    ranked: list[tuple[CenterLabel, float]]      # single-center candidates, desc

    def to_json(self) -> dict:
        return {
            "atom_probs": [round(float(p), 12) for p in self.atom_probs],
            "bond_probs": [round(float(p), 12) for p in self.bond_probs],
            "topk": [
                {"atoms": list(lbl.atom_centers),
                 "bonds": [list(b) for b in lbl.bond_centers],
                 "prob": round(float(p), 12)}
                for lbl, p in self.ranked
            ],
        }


class CenterModel(Module):
    def __init__(self, rng: np.random.Generator, width: int = 256,
                 n_layers: int = 6, heads: int = 4, dropout: float = 0.0):
        super().__init__()
        self.stack = DRGATStack(rng, width, n_layers, heads)
        d = self.stack.out_dim
        self.atom_head = MLP([2 * d, 256, 256, 1], rng, dropout_p=dropout)
        self.bond_head = MLP([BOND_FDIM + 3 * d, 256, 256, 1], rng,
                             dropout_p=dropout)

    def logits(self, batch: BatchedGraphs) -> tuple[Tensor, Tensor]:
        """Per-atom and per-bond center logits over a batch of products."""
        h = self.stack(batch)
        pooled = segment_mean(h, batch.node_seg, batch.n_graphs)
        pooled_per_atom = gather_rows(pooled, batch.node_seg)
        atom_rep = concat([h, pooled_per_atom], axis=1)
        atom_logits = self.atom_head(atom_rep).reshape(-1)
        if len(batch.bond_src):
            ha = gather_rows(h, batch.bond_src)
            hb = gather_rows(h, batch.bond_dst)
            pooled_per_bond = gather_rows(pooled, batch.bond_seg)
            bond_rep = concat([Tensor(batch.bond_attr), ha, hb,
                               pooled_per_bond], axis=1)
            bond_logits = self.bond_head(bond_rep).reshape(-1)
        else:
            bond_logits = Tensor(np.zeros(0))
        return atom_logits, bond_logits

    def loss(self, products: list[MolGraph], labels: list[CenterLabel]) -> Tensor:
        """Binary cross entropy summed over all atoms and bonds."""
        batch = batch_graphs(products)
        atom_logits, bond_logits = self.logits(batch)
        atom_t, bond_t = [], []
        for g, lbl in zip(products, labels):
            ta, tb = centers_to_targets(g, lbl)
            atom_t.append(ta)
            bond_t.append(tb)
        loss = bce_with_logits(atom_logits, np.concatenate(atom_t),
                               reduction="sum")
        bt = np.concatenate(bond_t)
        if len(bt):
            loss = loss + bce_with_logits(bond_logits, bt, reduction="sum")
        return loss

    def predict(self, product: MolGraph) -> CenterPrediction:
        with no_grad():
            atom_logits, bond_logits = self.logits(batch_graphs([product]))
            atom_p = _sigmoid(atom_logits.data)
            bond_p = _sigmoid(bond_logits.data)
        ranks = canonical_ranks(product)
        entries = []
        for i, p in enumerate(atom_p):
            lbl = CenterLabel(atom_centers=(i,), bond_centers=())
            entries.append((-float(p), 0, (ranks[i],), lbl, float(p)))
        for bi, p in enumerate(bond_p):
            bond = product.bonds[bi]
            lbl = CenterLabel(atom_centers=(),
                              bond_centers=((bond.a, bond.b),))
            key = tuple(sorted((ranks[bond.a], ranks[bond.b])))
            entries.append((-float(p), 1, key, lbl, float(p)))
        entries.sort(key=lambda t: (t[0], t[1], t[2]))
        ranked = [(lbl, p) for _, _, _, lbl, p in entries]
        return CenterPrediction(atom_p, bond_p, ranked)

    def topk_centers(self, product: MolGraph, k: int,
                     context=None) -> list[tuple[CenterLabel, float]]:
        return self.predict(product).ranked[:k]


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out
