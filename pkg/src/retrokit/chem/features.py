"""Fixed-width one-hot feature blocks for atoms and bonds.

Layouts are frozen: models and checkpoints depend on these widths. Every
categorical block reserves a final overflow slot so unusual inputs still
land somewhere instead of raising.

Atom blocks: element, total H count, heavy-atom degree, total valence,
aromatic flag, ring flag, ring-size flags for 3..6 plus larger-than-6.
Bond blocks: order, direction mark, double-bond stereo, conjugation flag,
and a length slot pinned at 0 because no 3D geometry exists in the input.
"""

from __future__ import annotations

import numpy as np

from .molgraph import AROMATIC, DOUBLE, SINGLE, TRIPLE, MolGraph

# common retrosynthesis-corpus elements, by atomic number; last slot = other
ELEMENTS = (6, 7, 8, 16, 9, 17, 35, 53, 15, 5, 14, 34, 50, 3, 11, 12, 19, 29, 30, 13)

_N_ELEM = len(ELEMENTS) + 1     # 21
_N_H = 5                        # 0..3, 4+
_N_DEGREE = 7                   # 0..5, 6+
_N_VALENCE = 9                  # 0..7, 8+
_RING_SIZES = (3, 4, 5, 6)      # + "larger ring" flag

ATOM_FDIM = _N_ELEM + _N_H + _N_DEGREE + _N_VALENCE + 1 + 1 + len(_RING_SIZES) + 1
BOND_FDIM = 4 + 3 + 3 + 1 + 1

_ELEM_SLOT = {z: k for k, z in enumerate(ELEMENTS)}
_ORDER_SLOT = {SINGLE: 0, DOUBLE: 1, TRIPLE: 2, AROMATIC: 3}
_DIRECTION_SLOT = {"": 0, "/": 1, "\\": 2}


def _bucket(value: int, size: int) -> int:
    return value if 0 <= value < size - 1 else size - 1


def atom_features(g: MolGraph, i: int) -> np.ndarray:
    atom = g.atoms[i]
    x = np.zeros(ATOM_FDIM, dtype=np.float64)
    off = 0
    x[off + _ELEM_SLOT.get(atom.element, _N_ELEM - 1)] = 1.0
    off += _N_ELEM
    x[off + _bucket(g.h_counts[i], _N_H)] = 1.0
    off += _N_H
    x[off + _bucket(g.degree(i), _N_DEGREE)] = 1.0
    off += _N_DEGREE
    x[off + _bucket(g.total_valence(i), _N_VALENCE)] = 1.0
    off += _N_VALENCE
    x[off] = 1.0 if atom.aromatic else 0.0
    off += 1
    x[off] = 1.0 if g.in_ring(i) else 0.0
    off += 1
    sizes = g.ring_sizes(i)
    for k, r in enumerate(_RING_SIZES):
        if r in sizes:
            x[off + k] = 1.0
    if any(s > _RING_SIZES[-1] for s in sizes):
        x[off + len(_RING_SIZES)] = 1.0
    return x


def bond_features(g: MolGraph, bond_index: int) -> np.ndarray:
    bond = g.bonds[bond_index]
    e = np.zeros(BOND_FDIM, dtype=np.float64)
    e[_ORDER_SLOT[bond.order]] = 1.0
    off = 4
    e[off + _DIRECTION_SLOT.get(bond.direction, 0)] = 1.0
    off += 3
    stereo = _double_bond_stereo(g, bond_index)
    if stereo == "cis":
        e[off + 1] = 1.0
    elif stereo == "trans":
        e[off + 2] = 1.0
    else:
        e[off] = 1.0
    off += 3
    e[off] = 1.0 if g.bond_conjugated(bond_index) else 0.0
    # final slot stays 0: bond length without conformers
    return e


def _double_bond_stereo(g: MolGraph, bond_index: int):
    bond = g.bonds[bond_index]
    if bond.order != DOUBLE:
        return None
    ends = []
    for end in (bond.a, bond.b):
        mark = None
        for j, bi in g.neighbors(end):
            nb = g.bonds[bi]
            if bi != bond_index and nb.direction:
                out = nb.direction if nb.a == end else _flip(nb.direction)
                mark = out
                break
        if mark is None:
            return None
        ends.append(mark)
    # both marks looking outward from the double bond: same sense = cis
    return "cis" if ends[0] == ends[1] else "trans"


def _flip(d: str) -> str:
    return "\\" if d == "/" else "/"


def graph_arrays(g: MolGraph) -> dict[str, np.ndarray]:
    """Dense arrays for one molecule: node features, directed edges, edge features.

    Every bond contributes two directed edges (a->b and b->a) sharing one
    feature row each, so messages can flow both ways with direction-aware
    weights.
    """
    n = len(g.atoms)
    x = np.zeros((n, ATOM_FDIM), dtype=np.float64)
    for i in range(n):
        x[i] = atom_features(g, i)
    m = len(g.bonds)
    e = np.zeros((2 * m, BOND_FDIM), dtype=np.float64)
    src = np.zeros(2 * m, dtype=np.int64)
    dst = np.zeros(2 * m, dtype=np.int64)
    for bi, bond in enumerate(g.bonds):
        row = bond_features(g, bi)
        e[2 * bi] = row
        e[2 * bi + 1] = row
        src[2 * bi], dst[2 * bi] = bond.a, bond.b
        src[2 * bi + 1], dst[2 * bi + 1] = bond.b, bond.a
    return {"x": x, "edge_attr": e, "src": src, "dst": dst}
