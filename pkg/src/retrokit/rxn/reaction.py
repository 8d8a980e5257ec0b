"""Atom-mapped reactions and dataset IO.

A reaction is stored retrosynthetically: one product molecule on the right,
one or more reactant molecules on the left, linked through atom-map numbers.
Every product atom must carry a map that appears on exactly one reactant
atom; reactant atoms without a product image are leaving atoms. Maps that
appear on only one side with no partner are stripped rather than rejected,
since corpora routinely contain them.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Optional

from ..chem.molgraph import ChemError, MolGraph
from ..chem.smiles import parse_smiles, write_smiles


class ReactionError(ChemError):
    pass


@dataclass
class Reaction:
    """One mapped retrosynthesis example."""

    reactants: MolGraph          # all reactant molecules as one multi-component graph
    product: MolGraph            # single product molecule
    rxn_id: str = ""
    rxn_class: int = 0

    # map number -> atom index, built lazily
    _rmap: Optional[dict[int, int]] = field(default=None, repr=False)
    _pmap: Optional[dict[int, int]] = field(default=None, repr=False)

    @property
    def reactant_map(self) -> dict[int, int]:
        if self._rmap is None:
            self._rmap = self.reactants.map_to_index()
        return self._rmap

    @property
    def product_map(self) -> dict[int, int]:
        if self._pmap is None:
            self._pmap = self.product.map_to_index()
        return self._pmap

    def smiles(self) -> str:
        return f"{write_smiles(self.reactants)}>>{write_smiles(self.product)}"


def _strip_unpaired_maps(reactants: MolGraph, product: MolGraph) -> tuple[MolGraph, MolGraph]:
    rmaps = {a.atom_map for a in reactants.atoms if a.atom_map}
    pmaps = {a.atom_map for a in product.atoms if a.atom_map}
    shared = rmaps & pmaps

    def scrub(g: MolGraph) -> MolGraph:
        from dataclasses import replace
        atoms = [replace(a, atom_map=0) if a.atom_map and a.atom_map not in shared
                 else a for a in g.atoms]
        if all(a is b for a, b in zip(atoms, g.atoms)):
            return g
        return MolGraph(atoms, g.bonds, validate=False)

    return scrub(reactants), scrub(product)


def parse_reaction(text: str, rxn_id: str = "", rxn_class: int = 0) -> Reaction:
    """Parse 'reactants>>product' (or 'reactants>agents>product', agents dropped)."""
    parts = text.split(">")
    if len(parts) == 3:
        left, _, right = parts
    elif len(parts) == 2:
        left, right = parts
    else:
        raise ReactionError(f"expected 'reactants>>product', got {text!r}")
    if not left or not right:
        raise ReactionError(f"reaction {rxn_id or text!r} missing a side")

    reactants = parse_smiles(left)
    product = parse_smiles(right)
    if len(product.component_indices()) != 1:
        raise ReactionError(f"reaction {rxn_id or text!r} has a multi-part product")
    reactants, product = _strip_unpaired_maps(reactants, product)

    pmaps = [a.atom_map for a in product.atoms if a.atom_map]
    if len(set(pmaps)) != len(pmaps):
        raise ReactionError(f"reaction {rxn_id or text!r} repeats a product map")
    seen = set()
    for a in reactants.atoms:
        if a.atom_map:
            if a.atom_map in seen:
                raise ReactionError(
                    f"reaction {rxn_id or text!r} repeats reactant map {a.atom_map}")
            seen.add(a.atom_map)
    # one-sided maps were stripped above, so every remaining product map has
    # exactly one reactant image
    return Reaction(reactants=reactants, product=product,
                    rxn_id=rxn_id, rxn_class=rxn_class)


# ---------------------------------------------------------------------------
# dataset files: CSV with id, class, rxn columns

def read_dataset(path: str, strict: bool = False) -> list[Reaction]:
    out = []
    with open(path, newline="") as fh:
        out = list(iter_dataset(fh, strict=strict))
    return out


def iter_dataset(fh: io.TextIOBase, strict: bool = False) -> Iterable[Reaction]:
    reader = csv.DictReader(fh)
    if reader.fieldnames is None or "rxn" not in reader.fieldnames:
        raise ReactionError("dataset needs a header with an 'rxn' column")
    for lineno, row in enumerate(reader, start=2):
        try:
            yield parse_reaction(
                row["rxn"],
                rxn_id=row.get("id", "") or f"line{lineno}",
                rxn_class=int(row.get("class", 0) or 0),
            )
        except ChemError:
            if strict:
                raise
            continue


def write_dataset(path: str, reactions: Iterable[Reaction]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "class", "rxn"])
        for r in reactions:
            writer.writerow([r.rxn_id, r.rxn_class, r.smiles()])
