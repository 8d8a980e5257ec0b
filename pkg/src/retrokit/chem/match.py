"""Subgraph matching with wildcard atoms.

Finds embeddings of a pattern graph inside a target graph (monomorphism:
every pattern bond must exist in the target with the same order, extra
target bonds between matched atoms are allowed, which is what grafting a
fragment back onto a scaffold requires). Wildcard pattern atoms match any
target atom; all other atoms require equal element, charge and
aromaticity. Matches are enumerated exhaustively in a deterministic order.
"""

from __future__ import annotations

from typing import Callable, Optional

from .elements import WILDCARD
from .molgraph import MolGraph

AtomTest = Callable[[MolGraph, int, MolGraph, int], bool]


def default_atom_test(pat: MolGraph, pi: int, tgt: MolGraph, ti: int) -> bool:
    pa, ta = pat.atoms[pi], tgt.atoms[ti]
    if pa.element == WILDCARD:
        return True
    return (pa.element == ta.element and pa.charge == ta.charge
            and pa.aromatic == ta.aromatic)


def exact_atom_test(pat: MolGraph, pi: int, tgt: MolGraph, ti: int) -> bool:
    if not default_atom_test(pat, pi, tgt, ti):
        return False
    if pat.atoms[pi].element == WILDCARD:
        return tgt.atoms[ti].element == WILDCARD
    return (pat.h_counts[pi] == tgt.h_counts[ti]
            and pat.atoms[pi].isotope == tgt.atoms[ti].isotope)


def subgraph_matches(pattern: MolGraph, target: MolGraph,
                     anchor: Optional[dict[int, int]] = None,
                     atom_test: AtomTest = default_atom_test,
                     limit: Optional[int] = None) -> list[dict[int, int]]:
    """All embeddings of ``pattern`` in ``target`` as {pattern i: target i}.

    ``anchor`` pre-pins pattern atoms to target atoms; every returned match
    extends it. ``limit`` stops the search early once that many matches are
    found.
    """
    np_, nt = len(pattern.atoms), len(target.atoms)
    if np_ == 0 or np_ > nt:
        return []

    mapping: dict[int, int] = {}
    used = [False] * nt
    if anchor:
        for pi, ti in anchor.items():
            if not (0 <= pi < np_ and 0 <= ti < nt):
                raise ValueError("anchor index out of range")
            if not atom_test(pattern, pi, target, ti):
                return []
            if used[ti]:
                return []
            mapping[pi] = ti
            used[ti] = True

    order = _search_order(pattern, set(mapping))
    if anchor and not _consistent(pattern, target, mapping):
        return []

    results: list[dict[int, int]] = []

    def candidates(pi: int) -> list[int]:
        # prefer extending along a bond to an already-matched atom
        for pj, _ in pattern.neighbors(pi):
            if pj in mapping:
                return [tj for tj, _ in target.neighbors(mapping[pj])]
        return list(range(nt))

    def extend(depth: int) -> bool:
        if depth == len(order):
            results.append(dict(mapping))
            return limit is not None and len(results) >= limit
        pi = order[depth]
        for ti in sorted(set(candidates(pi))):
            if used[ti] or not atom_test(pattern, pi, target, ti):
                continue
            if pattern.degree(pi) > target.degree(ti):
                continue
            mapping[pi] = ti
            if _edges_ok(pattern, target, mapping, pi):
                used[ti] = True
                if extend(depth + 1):
                    return True
                used[ti] = False
            del mapping[pi]
        return False

    extend(0)
    return results


def _edges_ok(pattern: MolGraph, target: MolGraph,
              mapping: dict[int, int], pi: int) -> bool:
    ti = mapping[pi]
    for pj, pb in pattern.neighbors(pi):
        if pj not in mapping:
            continue
        tb = target.bond_between(mapping[pj], ti)
        if tb is None or tb.order != pattern.bonds[pb].order:
            return False
    return True


def _consistent(pattern: MolGraph, target: MolGraph,
                mapping: dict[int, int]) -> bool:
    return all(_edges_ok(pattern, target, mapping, pi) for pi in mapping)


def _search_order(pattern: MolGraph, pinned: set[int]) -> list[int]:
    """Visit connected-to-matched atoms first so pruning bites early."""
    n = len(pattern.atoms)
    seen = set(pinned)
    order: list[int] = []
    frontier = sorted(
        {pj for pi in pinned for pj, _ in pattern.neighbors(pi)} - seen)
    while len(seen) < n:
        if not frontier:
            start = min(i for i in range(n) if i not in seen)
            frontier = [start]
        nxt = frontier.pop(0)
        if nxt in seen:
            continue
        seen.add(nxt)
        order.append(nxt)
        for pj, _ in pattern.neighbors(nxt):
            if pj not in seen and pj not in frontier:
                frontier.append(pj)
        frontier.sort()
    return order


def is_subgraph(pattern: MolGraph, target: MolGraph,
                anchor: Optional[dict[int, int]] = None) -> bool:
    return bool(subgraph_matches(pattern, target, anchor=anchor, limit=1))
