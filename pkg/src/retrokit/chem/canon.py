"""Canonical atom ranking and canonical SMILES.

Ranking starts from local atom invariants and refines them with neighbor
multisets until stable. Ties that survive refinement are broken by
individualizing each tied atom in turn and keeping whichever complete
ranking serializes to the lexicographically smallest string, so the output
is invariant under any input atom permutation. Atom maps never influence
the ranking but are still emitted.
"""

from __future__ import annotations

from typing import Optional, Sequence

from .molgraph import AROMATIC, DOUBLE, SINGLE, TRIPLE, MolGraph
from .smiles import write_smiles

_ORDER_RANK = {SINGLE: 0, DOUBLE: 1, TRIPLE: 2, AROMATIC: 3}

# safety valve for pathologically symmetric inputs; real molecules resolve
# after a handful of individualizations
_MAX_LEAVES = 20000


def initial_invariants(g: MolGraph, extra: Optional[Sequence] = None) -> list[tuple]:
    inv = []
    for i, atom in enumerate(g.atoms):
        inv.append((
            atom.element,
            atom.charge,
            g.h_counts[i],
            atom.aromatic,
            g.degree(i),
            atom.isotope,
            tuple(sorted(g.ring_sizes(i))),
            extra[i] if extra is not None else 0,
        ))
    return inv


def _refine(g: MolGraph, classes: list[int]) -> list[int]:
    """Neighborhood refinement to a stable partition; returns dense class ids."""
    n = len(g.atoms)
    n_classes = len(set(classes))
    while True:
        signatures = []
        for i in range(n):
            nbr = sorted((_ORDER_RANK[g.bonds[b].order], classes[j])
                         for j, b in g.neighbors(i))
            signatures.append((classes[i], tuple(nbr)))
        ordered = sorted(set(signatures))
        lookup = {sig: k for k, sig in enumerate(ordered)}
        classes = [lookup[sig] for sig in signatures]
        if len(ordered) == n_classes:
            return classes
        n_classes = len(ordered)


def canonical_ranks(g: MolGraph, extra: Optional[Sequence] = None) -> list[int]:
    """Permutation-invariant atom ranks (0..n-1, lower serializes first)."""
    _, ranks = _canonical_string_and_ranks(g, extra)
    return ranks


def canonical_smiles(g: MolGraph, extra: Optional[Sequence] = None) -> str:
    smiles, _ = _canonical_string_and_ranks(g, extra)
    return smiles


def _canonical_string_and_ranks(
        g: MolGraph, extra: Optional[Sequence] = None) -> tuple[str, list[int]]:
    n = len(g.atoms)
    if n == 0:
        raise ValueError("cannot canonicalize an empty graph")
    inv = initial_invariants(g, extra)
    ordered = sorted(set(inv))
    lookup = {v: k for k, v in enumerate(ordered)}
    classes = _refine(g, [lookup[v] for v in inv])

    best: list[Optional[str]] = [None]
    best_ranks: list[Optional[list[int]]] = [None]
    leaves = [0]

    def descend(classes: list[int]) -> None:
        if leaves[0] >= _MAX_LEAVES:
            return
        counts: dict[int, int] = {}
        for c in classes:
            counts[c] = counts.get(c, 0) + 1
        split = min((c for c, k in counts.items() if k > 1), default=None)
        if split is None:
            leaves[0] += 1
            ranks = _classes_to_ranks(classes)
            s = write_smiles(g, order=ranks)
            if best[0] is None or s < best[0]:
                best[0] = s
                best_ranks[0] = ranks
            return
        for i in range(n):
            if classes[i] != split:
                continue
            branched = [2 * c + 1 for c in classes]
            branched[i] = 2 * classes[i]
            descend(_refine(g, branched))

    descend(classes)
    assert best[0] is not None and best_ranks[0] is not None
    return best[0], best_ranks[0]


def _classes_to_ranks(classes: list[int]) -> list[int]:
    order = sorted(range(len(classes)), key=lambda i: classes[i])
    ranks = [0] * len(classes)
    for r, i in enumerate(order):
        ranks[i] = r
    return ranks


def same_molecule(g1: MolGraph, g2: MolGraph, use_maps: bool = False) -> bool:
    """Graph isomorphism via canonical string comparison."""
    if len(g1.atoms) != len(g2.atoms) or len(g1.bonds) != len(g2.bonds):
        return False
    key1 = canonical_smiles(g1 if use_maps else g1.without_maps())
    key2 = canonical_smiles(g2 if use_maps else g2.without_maps())
    return key1 == key2
