"""Immutable labeled molecular graph with derived valence/ring bookkeeping."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

from .elements import (NUM_TO_SYMBOL, VALENCES, WILDCARD, implicit_hydrogens,
                       max_valence)

SINGLE = "single"
DOUBLE = "double"
TRIPLE = "triple"
AROMATIC = "aromatic"

BOND_ORDERS = (SINGLE, DOUBLE, TRIPLE, AROMATIC)

# twice the bond-order contribution, so aromatic (1.5) stays integral
_TWICE_ORDER = {SINGLE: 2, DOUBLE: 4, TRIPLE: 6, AROMATIC: 3}

# longest cycle the ring perception will report; larger rings are treated as
# chains for feature purposes
MAX_RING = 18


class ChemError(ValueError):
    """Base error for molecular-graph construction and parsing."""


class ValenceError(ChemError):
    """An atom exceeds the maximum valence allowed for its element."""


@dataclass(frozen=True)
class Atom:
    """One atom. ``explicit_h=None`` means the valence model fills hydrogens."""

    element: int
    charge: int = 0
    explicit_h: Optional[int] = None
    aromatic: bool = False
    atom_map: int = 0
    isotope: int = 0
    stereo: Optional[str] = None  # '@' / '@@' annotation, carried verbatim
    attachment: bool = False  # open-valence synthon attachment point

    @property
    def symbol(self) -> str:
        return NUM_TO_SYMBOL[self.element]

    def is_wildcard(self) -> bool:
        return self.element == WILDCARD


@dataclass(frozen=True)
class Bond:
    """Bond between atom indices ``a`` and ``b``.

    ``direction`` is the '/' or '\\' mark as written for the a->b orientation.
    """

    a: int
    b: int
    order: str = SINGLE
    direction: Optional[str] = None

    def other(self, i: int) -> int:
        return self.b if i == self.a else self.a

    def key(self) -> frozenset:
        return frozenset((self.a, self.b))


class MolGraph:
    """Immutable molecule graph; derived data is computed once on build.

    Multi-component graphs (dot-separated SMILES) are allowed; helpers exist
    to split them. Hydrogen counts are resolved at construction: explicit
    counts are kept, unset ones come from the valence model.
    """

    __slots__ = ("atoms", "bonds", "_adj", "_bond_index", "h_counts",
                 "_ring_sizes", "_bond_ring", "_conjugated", "__weakref__")

    def __init__(self, atoms: Sequence[Atom], bonds: Sequence[Bond],
                 validate: bool = True):
        self.atoms: tuple[Atom, ...] = tuple(atoms)
        self.bonds: tuple[Bond, ...] = tuple(bonds)
        n = len(self.atoms)

        adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        bond_index: dict[frozenset, int] = {}
        for bi, bond in enumerate(self.bonds):
            if not (0 <= bond.a < n and 0 <= bond.b < n):
                raise ChemError(f"bond {bi} references missing atom")
            if bond.a == bond.b:
                raise ChemError(f"bond {bi} is a self-loop")
            key = bond.key()
            if key in bond_index:
                raise ChemError(f"duplicate bond between {bond.a} and {bond.b}")
            if bond.order not in _TWICE_ORDER:
                raise ChemError(f"unknown bond order {bond.order!r}")
            if bond.order == AROMATIC:
                if not (self._arom_ok(bond.a) and self._arom_ok(bond.b)):
                    raise ChemError(
                        f"aromatic bond between non-aromatic atoms {bond.a},{bond.b}")
            bond_index[key] = bi
            adj[bond.a].append((bond.b, bi))
            adj[bond.b].append((bond.a, bi))
        self._adj = tuple(tuple(x) for x in adj)
        self._bond_index = bond_index

        h_counts = []
        for i, atom in enumerate(self.atoms):
            if atom.explicit_h is not None:
                h_counts.append(atom.explicit_h)
            elif atom.element == WILDCARD:
                h_counts.append(0)
            else:
                h_counts.append(implicit_hydrogens(
                    atom.element, atom.aromatic, self.heavy_occupancy(i)))
        self.h_counts: tuple[int, ...] = tuple(h_counts)

        self._ring_sizes = self._perceive_rings()
        self._conjugated = self._perceive_conjugation()

        if validate:
            for i in range(n):
                err = self.valence_problem(i)
                if err:
                    raise ValenceError(err)

    def _arom_ok(self, i: int) -> bool:
        a = self.atoms[i]
        return a.aromatic or a.element == WILDCARD

    # -- basic accessors ----------------------------------------------------

    def __len__(self) -> int:
        return len(self.atoms)

    def neighbors(self, i: int) -> tuple[tuple[int, int], ...]:
        """(neighbor index, bond index) pairs for atom i."""
        return self._adj[i]

    def degree(self, i: int) -> int:
        return len(self._adj[i])

    def bond_between(self, i: int, j: int) -> Optional[Bond]:
        bi = self._bond_index.get(frozenset((i, j)))
        return None if bi is None else self.bonds[bi]

    def bond_index(self, i: int, j: int) -> Optional[int]:
        return self._bond_index.get(frozenset((i, j)))

    def twice_bond_sum(self, i: int) -> int:
        return sum(_TWICE_ORDER[self.bonds[bi].order] for _, bi in self._adj[i])

    def heavy_occupancy(self, i: int) -> int:
        """Integer bond-order load with aromatic bonds counted as one each."""
        twice = 0
        arom = 0
        for _, bi in self._adj[i]:
            order = self.bonds[bi].order
            if order == AROMATIC:
                arom += 1
            else:
                twice += _TWICE_ORDER[order]
        return twice // 2 + arom

    def heavy_valence(self, i: int) -> int:
        """Bond-order sum, granting aromatic atoms their in-ring double bond
        whenever the default valence leaves room for it."""
        atom = self.atoms[i]
        occ = self.heavy_occupancy(i)
        if not atom.aromatic:
            return occ
        valences = VALENCES.get(atom.element)
        if valences is None:
            return occ
        room = valences[0] + max(0, atom.charge)
        if occ + self.h_counts[i] < room:
            return occ + 1
        return occ

    def total_valence(self, i: int) -> int:
        return self.heavy_valence(i) + self.h_counts[i]

    def valence_problem(self, i: int) -> Optional[str]:
        """Message when atom i exceeds its allowed valence, else None."""
        atom = self.atoms[i]
        if atom.element == WILDCARD:
            return None
        vmax = max_valence(atom.element, atom.charge)
        if vmax is not None and self.total_valence(i) > vmax:
            return (f"atom {i} ({atom.symbol}) valence {self.total_valence(i)} "
                    f"exceeds maximum {vmax}")
        return None

    def ring_sizes(self, i: int) -> frozenset[int]:
        return self._ring_sizes[i]

    def in_ring(self, i: int) -> bool:
        return bool(self._ring_sizes[i])

    def bond_conjugated(self, bi: int) -> bool:
        return self._conjugated[bi]

    def bond_in_ring(self, bi: int) -> bool:
        return self._bond_ring[bi] > 0

    def bond_ring_size(self, bi: int) -> int:
        """Smallest cycle through bond bi, 0 when acyclic."""
        return self._bond_ring[bi]

    # -- derived perception -------------------------------------------------

    def _perceive_rings(self) -> tuple[frozenset[int], ...]:
        # smallest cycle through each bond = 1 + shortest path between its
        # endpoints with the bond removed; atoms collect sizes of all
        # incident-bond cycles
        sizes: list[set[int]] = [set() for _ in self.atoms]
        bond_rings = []
        for bi, bond in enumerate(self.bonds):
            plen = self._shortest_path_len(bond.a, bond.b, skip_bond=bi)
            if plen is not None and plen + 1 <= MAX_RING:
                cyc = plen + 1
                sizes[bond.a].add(cyc)
                sizes[bond.b].add(cyc)
                bond_rings.append(cyc)
            else:
                bond_rings.append(0)
        self._bond_ring = tuple(bond_rings)
        return tuple(frozenset(s) for s in sizes)

    def _shortest_path_len(self, src: int, dst: int, skip_bond: int) -> Optional[int]:
        if src == dst:
            return 0
        dist = {src: 0}
        queue = deque([src])
        while queue:
            u = queue.popleft()
            if dist[u] >= MAX_RING:
                return None
            for v, bi in self._adj[u]:
                if bi == skip_bond or v in dist:
                    continue
                dist[v] = dist[u] + 1
                if v == dst:
                    return dist[v]
                queue.append(v)
        return None

    def _perceive_conjugation(self) -> tuple[bool, ...]:
        def has_pi(i: int, excl: int) -> bool:
            atom = self.atoms[i]
            if atom.element in (7, 8, 16) and atom.charge <= 0:
                return True  # lone-pair donor
            return any(self.bonds[bi].order in (DOUBLE, TRIPLE, AROMATIC)
                       for _, bi in self._adj[i] if bi != excl)

        out = []
        for bi, bond in enumerate(self.bonds):
            if bond.order == AROMATIC:
                out.append(True)
            else:
                out.append(has_pi(bond.a, bi) and has_pi(bond.b, bi))
        return tuple(out)

    # -- components and rewiring helpers -------------------------------------

    def component_indices(self) -> list[list[int]]:
        seen = [False] * len(self.atoms)
        comps = []
        for start in range(len(self.atoms)):
            if seen[start]:
                continue
            comp = [start]
            seen[start] = True
            queue = deque([start])
            while queue:
                u = queue.popleft()
                for v, _ in self._adj[u]:
                    if not seen[v]:
                        seen[v] = True
                        comp.append(v)
                        queue.append(v)
            comps.append(sorted(comp))
        return comps

    def split_components(self) -> list["MolGraph"]:
        return [self.subgraph(comp)[0] for comp in self.component_indices()]

    def subgraph(self, indices: Iterable[int]) -> tuple["MolGraph", dict[int, int]]:
        """Induced subgraph plus the old->new index map."""
        order = list(indices)
        remap = {old: new for new, old in enumerate(order)}
        atoms = [self._resolved_atom(i) for i in order]
        bonds = [replace(b, a=remap[b.a], b=remap[b.b])
                 for b in self.bonds if b.a in remap and b.b in remap]
        return MolGraph(atoms, bonds, validate=False), remap

    def _resolved_atom(self, i: int) -> Atom:
        # freeze the resolved H count so fragments keep it across rewiring
        atom = self.atoms[i]
        if atom.explicit_h is None:
            atom = replace(atom, explicit_h=self.h_counts[i])
        return atom

    def permuted(self, perm: Sequence[int]) -> "MolGraph":
        """Relabel atoms: old index i becomes perm[i]."""
        atoms: list[Optional[Atom]] = [None] * len(self.atoms)
        for i, a in enumerate(self.atoms):
            atoms[perm[i]] = self._resolved_atom(i)
        bonds = [replace(b, a=perm[b.a], b=perm[b.b]) for b in self.bonds]
        return MolGraph(atoms, bonds, validate=False)

    def without_maps(self) -> "MolGraph":
        atoms = [replace(self._resolved_atom(i), atom_map=0)
                 for i in range(len(self.atoms))]
        return MolGraph(atoms, self.bonds, validate=False)

    def map_to_index(self) -> dict[int, int]:
        """atom_map -> atom index for mapped atoms; raises on duplicates."""
        out: dict[int, int] = {}
        for i, a in enumerate(self.atoms):
            if a.atom_map:
                if a.atom_map in out:
                    raise ChemError(f"duplicate atom map {a.atom_map}")
                out[a.atom_map] = i
        return out

    def __repr__(self) -> str:
        return f"MolGraph({len(self.atoms)} atoms, {len(self.bonds)} bonds)"


class GraphBuilder:
    """Mutable staging area for graph surgery; ``build()`` freezes the result."""

    def __init__(self, graph: Optional[MolGraph] = None):
        self.atoms: list[Atom] = []
        self.bonds: list[Bond] = []
        if graph is not None:
            self.atoms = [graph._resolved_atom(i) for i in range(len(graph))]
            self.bonds = list(graph.bonds)

    def add_atom(self, atom: Atom) -> int:
        self.atoms.append(atom)
        return len(self.atoms) - 1

    def add_bond(self, a: int, b: int, order: str = SINGLE) -> None:
        self.bonds.append(Bond(a, b, order))

    def remove_bond(self, a: int, b: int) -> Bond:
        key = frozenset((a, b))
        for i, bond in enumerate(self.bonds):
            if bond.key() == key:
                return self.bonds.pop(i)
        raise ChemError(f"no bond between {a} and {b}")

    def update_atom(self, i: int, **changes) -> None:
        self.atoms[i] = replace(self.atoms[i], **changes)

    def shift_h(self, i: int, delta: int) -> None:
        h = self.atoms[i].explicit_h
        if h is None:
            raise ChemError("shift_h requires a resolved hydrogen count")
        if h + delta < 0:
            raise ValenceError(f"atom {i} hydrogen count would become negative")
        self.update_atom(i, explicit_h=h + delta)

    def build(self, validate: bool = True) -> MolGraph:
        return MolGraph(self.atoms, self.bonds, validate=validate)
