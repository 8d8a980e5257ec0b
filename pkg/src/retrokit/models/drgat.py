"""Directed relational graph attention over batched molecular graphs.

Each layer runs directed message passing (independent source and
destination MLPs plus a bond projection) weighted by multi-head
edge-controlled attention, normalized over each atom's incoming edges,
with a shortcut from the layer input. The stack concatenates every
layer's output, so the readout width is n_layers * width.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass, field

import numpy as np

from retrokit.chem import ATOM_FDIM, BOND_FDIM, MolGraph, graph_arrays
from retrokit.tensor import (MLP, Linear, Module, Tensor, concat, gather_rows,
                             segment_softmax, segment_sum)

__all__ = ["BatchedGraphs", "batch_graphs", "DRGATLayer", "DRGATStack"]

# graphs are immutable once built, so featurization is memoized per object
_ARRAY_CACHE: "weakref.WeakKeyDictionary[MolGraph, dict]" = weakref.WeakKeyDictionary()


def _cached_arrays(g: MolGraph) -> dict:
    arrays = _ARRAY_CACHE.get(g)
    if arrays is None:
        arrays = graph_arrays(g)
        _ARRAY_CACHE[g] = arrays
    return arrays


@dataclass
class BatchedGraphs:
    """Disjoint union of molecular graphs as flat arrays.

    Directed edges carry both orientations of every bond; the undirected
    bond list (bond_src < canonical order as stored) feeds bond-level heads.
    """

    x: np.ndarray                 # (N, ATOM_FDIM)
    edge_attr: np.ndarray         # (E2, BOND_FDIM), both directions
    src: np.ndarray               # (E2,) global source atom index
    dst: np.ndarray               # (E2,) global destination atom index
    node_seg: np.ndarray          # (N,) graph id per atom
    bond_src: np.ndarray          # (B,) global index of bond endpoint a
    bond_dst: np.ndarray          # (B,) global index of bond endpoint b
    bond_attr: np.ndarray         # (B, BOND_FDIM) one row per undirected bond
    bond_seg: np.ndarray          # (B,) graph id per bond
    n_graphs: int
    node_offsets: list[int] = field(default_factory=list)

    @property
    def n_nodes(self) -> int:
        return self.x.shape[0]


def batch_graphs(graphs: list[MolGraph]) -> BatchedGraphs:
    xs, eats, srcs, dsts, nsegs = [], [], [], [], []
    bsrcs, bdsts, battrs, bsegs = [], [], [], []
    offsets = []
    off = 0
    for gi, g in enumerate(graphs):
        arrays = _cached_arrays(g)
        n = len(g)
        offsets.append(off)
        xs.append(arrays["x"])
        eats.append(arrays["edge_attr"])
        srcs.append(arrays["src"] + off)
        dsts.append(arrays["dst"] + off)
        nsegs.append(np.full(n, gi, dtype=np.int64))
        nb = len(g.bonds)
        battrs.append(arrays["edge_attr"][0::2] if nb else
                      np.zeros((0, BOND_FDIM)))
        bsrcs.append(np.array([b.a + off for b in g.bonds], dtype=np.int64))
        bdsts.append(np.array([b.b + off for b in g.bonds], dtype=np.int64))
        bsegs.append(np.full(nb, gi, dtype=np.int64))
        off += n
    cat = np.concatenate
    return BatchedGraphs(
        x=cat(xs) if xs else np.zeros((0, ATOM_FDIM)),
        edge_attr=cat(eats) if eats else np.zeros((0, BOND_FDIM)),
        src=cat(srcs) if srcs else np.zeros(0, dtype=np.int64),
        dst=cat(dsts) if dsts else np.zeros(0, dtype=np.int64),
        node_seg=cat(nsegs) if nsegs else np.zeros(0, dtype=np.int64),
        bond_src=cat(bsrcs) if bsrcs else np.zeros(0, dtype=np.int64),
        bond_dst=cat(bdsts) if bdsts else np.zeros(0, dtype=np.int64),
        bond_attr=cat(battrs) if battrs else np.zeros((0, BOND_FDIM)),
        bond_seg=cat(bsegs) if bsegs else np.zeros(0, dtype=np.int64),
        n_graphs=len(graphs),
        node_offsets=offsets,
    )


class DRGATLayer(Module):
    def __init__(self, width: int, heads: int, rng: np.random.Generator):
        super().__init__()
        if width % heads:
            raise ValueError(f"width {width} not divisible by heads {heads}")
        self.width = width
        self.heads = heads
        self.src_mlp = MLP([width, width, width], rng)
        self.dst_mlp = MLP([width, width, width], rng)
        self.edge_mlp = MLP([width, width, width], rng)
        self.att = Linear(3 * width, heads, rng)

    def forward(self, h: Tensor, e: Tensor, src: np.ndarray, dst: np.ndarray,
                n_nodes: int) -> Tensor:
        if len(src) == 0:
            return h
        hs = gather_rows(h, src)
        hd = gather_rows(h, dst)
        msg = self.src_mlp(hs) + self.dst_mlp(hd) + self.edge_mlp(e)
        score = self.att(concat([hs, hd, e], axis=1))
        alpha = segment_softmax(score, dst, n_nodes)
        n_edges = len(src)
        head_dim = self.width // self.heads
        weighted = msg.reshape(n_edges, self.heads, head_dim) \
            * alpha.reshape(n_edges, self.heads, 1)
        agg = segment_sum(weighted.reshape(n_edges, self.width), dst, n_nodes)
        return h + agg


class DRGATStack(Module):
    """Atom/bond encoders plus stacked layers; readout concatenates all."""

    def __init__(self, rng: np.random.Generator, width: int = 256,
                 n_layers: int = 6, heads: int = 4):
        super().__init__()
        self.width = width
        self.n_layers = n_layers
        self.atom_enc = Linear(ATOM_FDIM, width, rng)
        self.bond_enc = Linear(BOND_FDIM, width, rng)
        self.layers = [DRGATLayer(width, heads, rng) for _ in range(n_layers)]

    @property
    def out_dim(self) -> int:
        return self.width * self.n_layers

    def forward(self, batch: BatchedGraphs) -> Tensor:
        h = self.atom_enc(Tensor(batch.x))
        e = self.bond_enc(Tensor(batch.edge_attr))
        outs = []
        for layer in self.layers:
            h = layer(h, e, batch.src, batch.dst, batch.n_nodes)
            outs.append(h)
        return concat(outs, axis=1)
