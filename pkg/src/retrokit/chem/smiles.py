"""SMILES reading and writing for the supported subset.

Covers what reaction corpora of the USPTO family actually contain: organic
subset atoms, bracket atoms with isotope/stereo/H-count/charge/atom-map,
ring closures (including %nn), branches, directional bonds, aromatic
lowercase and the wildcard ``*``. Stereo annotations are carried through
verbatim; nothing downstream interprets them.
"""

from __future__ import annotations

import re
from dataclasses import replace
from typing import Optional

from .elements import AROMATIC_OK, ORGANIC_SUBSET, SYMBOL_TO_NUM, WILDCARD, implicit_hydrogens
from .molgraph import (AROMATIC, DOUBLE, SINGLE, TRIPLE, Atom, Bond, ChemError,
                       MolGraph, ValenceError)


class SmilesError(ChemError):
    """Syntax or chemistry error in a SMILES string, with byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


_BOND_TOKENS = {"-": SINGLE, "=": DOUBLE, "#": TRIPLE, ":": AROMATIC,
                "/": SINGLE, "\\": SINGLE}

_BRACKET_RE = re.compile(
    r"\[(?P<isotope>\d+)?"
    r"(?P<symbol>\*|[A-Z][a-z]?|as|se|te|[bcnops])"
    r"(?P<stereo>@@?)?"
    r"(?P<hcount>H\d*)?"
    r"(?P<charge>\+\+?|--?|[+-]\d+)?"
    r"(?::(?P<map>\d+))?\]"
)

_TWO_CHAR_ORGANIC = ("Cl", "Br")


def _parse_bracket(text: str, pos: int) -> tuple[Atom, int]:
    m = _BRACKET_RE.match(text, pos)
    if m is None:
        end = text.find("]", pos)
        raise SmilesError("malformed bracket atom", pos if end < 0 else pos)
    symbol = m.group("symbol")
    aromatic = symbol[0].islower() and symbol != "*"
    if aromatic:
        symbol = symbol.capitalize()
    element = SYMBOL_TO_NUM.get(symbol)
    if element is None:
        raise SmilesError(f"unknown element {symbol!r}", m.start("symbol"))
    if aromatic and element not in AROMATIC_OK:
        raise SmilesError(f"element {symbol!r} cannot be aromatic", m.start("symbol"))

    hcount = 0
    if m.group("hcount"):
        digits = m.group("hcount")[1:]
        hcount = int(digits) if digits else 1
    charge = 0
    if m.group("charge"):
        c = m.group("charge")
        if c in ("+", "-"):
            charge = 1 if c == "+" else -1
        elif c in ("++", "--"):
            charge = 2 if c == "++" else -2
        else:
            charge = int(c)
    atom = Atom(
        element=element,
        charge=charge,
        explicit_h=hcount,
        aromatic=aromatic,
        atom_map=int(m.group("map")) if m.group("map") else 0,
        isotope=int(m.group("isotope")) if m.group("isotope") else 0,
        stereo=m.group("stereo"),
    )
    return atom, m.end()


def parse_smiles(text: str) -> MolGraph:
    """Parse a SMILES string into a MolGraph.

    Raises SmilesError with a byte offset for syntax problems, unmatched ring
    closures/parentheses, unknown elements and valence violations.
    """
    atoms: list[Atom] = []
    bonds: list[Bond] = []
    atom_pos: list[int] = []  # source offset per atom, for valence reporting

    prev: Optional[int] = None
    pending_order: Optional[str] = None
    pending_dir: Optional[str] = None
    pending_pos = 0
    branch_stack: list[int] = []
    # ring number -> (atom index, order-or-None, direction, offset)
    open_rings: dict[int, tuple[int, Optional[str], Optional[str], int]] = {}

    def add_atom(atom: Atom, pos: int) -> None:
        nonlocal prev, pending_order, pending_dir
        idx = len(atoms)
        atoms.append(atom)
        atom_pos.append(pos)
        if prev is not None:
            _link(prev, idx, pending_order, pending_dir, pos)
        elif pending_order is not None:
            raise SmilesError("bond with no preceding atom", pending_pos)
        prev = idx
        pending_order = None
        pending_dir = None

    def _link(a: int, b: int, order: Optional[str], direction: Optional[str],
              pos: int) -> None:
        if order is None:
            order = AROMATIC if (atoms[a].aromatic and atoms[b].aromatic) else SINGLE
        if order == AROMATIC and not (
                (atoms[a].aromatic or atoms[a].element == WILDCARD)
                and (atoms[b].aromatic or atoms[b].element == WILDCARD)):
            raise SmilesError("aromatic bond between non-aromatic atoms", pos)
        bonds.append(Bond(a, b, order, direction))

    def ring_closure(number: int, pos: int) -> None:
        nonlocal pending_order, pending_dir
        if prev is None:
            raise SmilesError("ring closure before any atom", pos)
        if number in open_rings:
            other, order0, dir0, _ = open_rings.pop(number)
            if other == prev:
                raise SmilesError(f"ring bond {number} closes on itself", pos)
            order = order0
            if pending_order is not None:
                if order is not None and order != pending_order:
                    raise SmilesError(f"conflicting orders for ring bond {number}", pos)
                order = pending_order
            direction = dir0
            if pending_dir is not None:
                # closing-side mark is oriented close->open; store open->close
                direction = "/" if pending_dir == "\\" else "\\"
            _link(other, prev, order, direction, pos)
        else:
            open_rings[number] = (prev, pending_order, pending_dir, pos)
        pending_order = None
        pending_dir = None

    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "[":
            atom, end = _parse_bracket(text, i)
            add_atom(atom, i)
            i = end
        elif text[i:i + 2] in _TWO_CHAR_ORGANIC:
            add_atom(Atom(element=SYMBOL_TO_NUM[text[i:i + 2]]), i)
            i += 2
        elif ch in "BCNOPSFI":
            add_atom(Atom(element=SYMBOL_TO_NUM[ch]), i)
            i += 1
        elif ch in "bcnops":
            elem = SYMBOL_TO_NUM[ch.upper()]
            add_atom(Atom(element=elem, aromatic=True), i)
            i += 1
        elif ch == "*":
            add_atom(Atom(element=WILDCARD), i)
            i += 1
        elif ch in _BOND_TOKENS:
            if pending_order is not None:
                raise SmilesError("two consecutive bond symbols", i)
            pending_order = _BOND_TOKENS[ch]
            pending_dir = ch if ch in "/\\" else None
            pending_pos = i
            i += 1
        elif ch.isdigit():
            ring_closure(int(ch), i)
            i += 1
        elif ch == "%":
            m = re.match(r"%(\d\d)", text[i:])
            if not m:
                raise SmilesError("%% must be followed by two digits", i)
            ring_closure(int(m.group(1)), i)
            i += 3
        elif ch == "(":
            if prev is None:
                raise SmilesError("branch with no preceding atom", i)
            branch_stack.append(prev)
            i += 1
        elif ch == ")":
            if not branch_stack:
                raise SmilesError("unbalanced parenthesis", i)
            if pending_order is not None:
                raise SmilesError("dangling bond before ')'", pending_pos)
            prev = branch_stack.pop()
            i += 1
        elif ch == ".":
            if pending_order is not None or branch_stack:
                raise SmilesError("'.' inside branch or after bond", i)
            prev = None
            i += 1
        else:
            raise SmilesError(f"unexpected character {ch!r}", i)

    if branch_stack:
        raise SmilesError("unbalanced parenthesis", n - 1)
    if pending_order is not None:
        raise SmilesError("dangling bond at end of input", pending_pos)
    if open_rings:
        number, (_, _, _, pos) = min(open_rings.items())
        raise SmilesError(f"unmatched ring closure {number}", pos)
    if not atoms:
        raise SmilesError("empty SMILES", 0)

    try:
        return MolGraph(atoms, bonds)
    except ValenceError as exc:
        # surface the first offending atom's source position
        g = MolGraph(atoms, bonds, validate=False)
        for idx in range(len(atoms)):
            if g.valence_problem(idx):
                raise SmilesError(f"valence violation: {g.valence_problem(idx)}",
                                  atom_pos[idx]) from exc
        raise


# ---------------------------------------------------------------------------
# writing

def _atom_token(g: MolGraph, i: int) -> str:
    atom = g.atoms[i]
    n_h = g.h_counts[i]
    if atom.element == WILDCARD:
        plain = atom.charge == 0 and atom.atom_map == 0 and atom.isotope == 0 \
            and atom.stereo is None and n_h == 0
        if plain:
            return "*"
        symbol = "*"
    else:
        symbol = atom.symbol
        implied = implicit_hydrogens(atom.element, atom.aromatic, g.heavy_occupancy(i))
        bare_ok = (symbol in ORGANIC_SUBSET and atom.charge == 0
                   and atom.atom_map == 0 and atom.isotope == 0
                   and atom.stereo is None and n_h == implied
                   and (not atom.aromatic or symbol in "BCNOPS"))
        if bare_ok:
            return symbol.lower() if atom.aromatic else symbol
        if atom.aromatic:
            symbol = symbol.lower()

    parts = ["["]
    if atom.isotope:
        parts.append(str(atom.isotope))
    parts.append(symbol)
    if atom.stereo:
        parts.append(atom.stereo)
    if n_h == 1:
        parts.append("H")
    elif n_h > 1:
        parts.append(f"H{n_h}")
    if atom.charge == 1:
        parts.append("+")
    elif atom.charge == -1:
        parts.append("-")
    elif atom.charge:
        parts.append(f"{atom.charge:+d}")
    if atom.atom_map:
        parts.append(f":{atom.atom_map}")
    parts.append("]")
    return "".join(parts)


def _bond_token(g: MolGraph, bi: int, from_atom: int) -> str:
    bond = g.bonds[bi]
    if bond.order == SINGLE:
        if bond.direction:
            flip = from_atom != bond.a
            if bond.direction == "/":
                return "\\" if flip else "/"
            return "/" if flip else "\\"
        # explicit '-' keeps a single bond between aromatic atoms from
        # re-parsing as aromatic
        a, b = g.atoms[bond.a], g.atoms[bond.b]
        if (a.aromatic or a.element == WILDCARD) and (b.aromatic or b.element == WILDCARD):
            return "-"
        return ""
    if bond.order == DOUBLE:
        return "="
    if bond.order == TRIPLE:
        return "#"
    # aromatic: elided between aromatic atoms, explicit next to wildcards
    if g.atoms[bond.a].aromatic and g.atoms[bond.b].aromatic:
        return ""
    return ":"


def write_smiles(g: MolGraph, order: Optional[list[int]] = None) -> str:
    """Serialize a MolGraph; re-parsing yields an isomorphic graph.

    ``order`` ranks atoms (lower rank is visited first); by default the
    stored atom order is used. Components are joined with '.' sorted by
    their serialized string when an order is supplied, else by first atom.
    """
    n = len(g.atoms)
    rank = list(range(n)) if order is None else list(order)

    visit_seq: list[int] = []
    visited = [False] * n
    tree_children: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    closure_bonds: list[list[int]] = [[] for _ in range(n)]  # back edges per atom
    used_bond = [False] * len(g.bonds)
    roots = []

    for root in sorted(range(n), key=lambda i: rank[i]):
        if visited[root]:
            continue
        roots.append(root)
        visited[root] = True
        visit_seq.append(root)
        stack = [(root, iter(sorted(g.neighbors(root), key=lambda vb: rank[vb[0]])))]
        while stack:
            u, nbrs = stack[-1]
            descended = False
            for v, bi in nbrs:
                if used_bond[bi]:
                    continue
                used_bond[bi] = True
                if visited[v]:
                    closure_bonds[u].append(bi)
                    continue
                visited[v] = True
                visit_seq.append(v)
                tree_children[u].append((v, bi))
                stack.append((v, iter(sorted(g.neighbors(v),
                                             key=lambda vb: rank[vb[0]]))))
                descended = True
                break
            if not descended:
                stack.pop()

    visit_pos = {u: k for k, u in enumerate(visit_seq)}

    # a closure digit prints at both endpoints; assign digits in output order
    ring_digit: dict[int, int] = {}
    closures_at: list[list[int]] = [[] for _ in range(n)]
    for u in visit_seq:
        for bi in closure_bonds[u]:
            other = g.bonds[bi].other(u)
            closures_at[other].append(bi)
            closures_at[u].append(bi)
    for u in range(n):
        closures_at[u].sort(key=lambda bi: (
            min(visit_pos[g.bonds[bi].a], visit_pos[g.bonds[bi].b]),
            max(visit_pos[g.bonds[bi].a], visit_pos[g.bonds[bi].b])))

    free_digits = list(range(1, 100))
    open_digit: dict[int, int] = {}

    def digit_str(d: int) -> str:
        return str(d) if d < 10 else f"%{d:02d}"

    def emit(u: int, via_bond: Optional[int], parent: Optional[int]) -> str:
        parts = []
        if via_bond is not None:
            parts.append(_bond_token(g, via_bond, parent))
        parts.append(_atom_token(g, u))
        for bi in closures_at[u]:
            if bi in open_digit:
                d = open_digit.pop(bi)
                parts.append(digit_str(d))
                free_digits.append(d)
                free_digits.sort()
            else:
                d = free_digits.pop(0)
                open_digit[bi] = d
                # bond token on the opening side, oriented open -> close
                parts.append(_bond_token(g, bi, u))
                parts.append(digit_str(d))
        kids = tree_children[u]
        for k, (v, bi) in enumerate(kids):
            sub = emit(v, bi, u)
            if k < len(kids) - 1:
                parts.append(f"({sub})")
            else:
                parts.append(sub)
        return "".join(parts)

    pieces = [emit(root, None, None) for root in roots]
    if order is not None:
        pieces.sort()
    return ".".join(pieces)


def strip_maps(g: MolGraph) -> MolGraph:
    return g.without_maps()


def mol_from_smiles(text: str) -> MolGraph:
    """Alias kept for symmetry with mol_to_smiles."""
    return parse_smiles(text)


def mol_to_smiles(g: MolGraph) -> str:
    return write_smiles(g)
