"""Reaction-center labeling and synthon generation.

A center marks where the product must be edited to reach the reactants.
Bond centers take precedence: when any product bond is missing or has a
different order on the reactant side, only bond centers are emitted.
Otherwise atoms whose hydrogen count, charge or neighborhood changed become
atom centers. Breaking a product at its bond centers yields synthons whose
attachment atoms keep the product hydrogen counts, so their open valence
survives until a template fills it.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from ..chem.molgraph import GraphBuilder, MolGraph
from .reaction import Reaction, ReactionError


@dataclass(frozen=True)
class CenterLabel:
    atom_centers: tuple[int, ...] = ()
    bond_centers: tuple[tuple[int, int], ...] = ()   # sorted (i, j) pairs

    def is_empty(self) -> bool:
        return not self.atom_centers and not self.bond_centers


@dataclass
class Synthon:
    graph: MolGraph
    product_indices: tuple[int, ...]        # synthon atom -> product atom
    attachment: tuple[int, ...]             # synthon atom indices
    origin: str = ""
    dual: Optional["Synthon"] = field(default=None, repr=False)

    def attachment_maps(self) -> tuple[int, ...]:
        return tuple(self.graph.atoms[i].atom_map for i in self.attachment)


def label_centers(rxn: Reaction) -> CenterLabel:
    """Ground-truth centers from an atom-mapped reaction."""
    product, reactants = rxn.product, rxn.reactants
    for i, a in enumerate(product.atoms):
        if not a.atom_map:
            raise ReactionError(
                f"reaction {rxn.rxn_id!r}: product atom {i} is unmapped")
    rmap = rxn.reactant_map
    pmap = rxn.product_map

    bond_centers = []
    for bond in product.bonds:
        m1 = product.atoms[bond.a].atom_map
        m2 = product.atoms[bond.b].atom_map
        rb = reactants.bond_between(rmap[m1], rmap[m2])
        if rb is None or rb.order != bond.order:
            bond_centers.append((min(bond.a, bond.b), max(bond.a, bond.b)))
    if bond_centers:
        return CenterLabel(bond_centers=tuple(sorted(bond_centers)))

    atom_centers = []
    for i, atom in enumerate(product.atoms):
        r = rmap[atom.atom_map]
        if product.h_counts[i] != reactants.h_counts[r]:
            atom_centers.append(i)
            continue
        if atom.charge != reactants.atoms[r].charge:
            atom_centers.append(i)
            continue
        # a residual hangs off this atom, or it gained a bond to another
        # product atom, even though hydrogens and charge balance out
        product_nbr_maps = {product.atoms[j].atom_map for j, _ in product.neighbors(i)}
        for j, _ in reactants.neighbors(r):
            jmap = reactants.atoms[j].atom_map
            if jmap == 0 or jmap not in pmap or jmap not in product_nbr_maps:
                atom_centers.append(i)
                break
    return CenterLabel(atom_centers=tuple(atom_centers))


def break_into_synthons(product: MolGraph, label: CenterLabel,
                        origin: str = "") -> list[Synthon]:
    """Remove bond centers and split; atoms keep product hydrogen counts.

    The synthons partition the product's atoms. Endpoints of removed bonds
    (or the atom centers themselves) are flagged as attachment atoms. Duals
    are linked pairwise along broken bonds, first come first served.
    """
    builder = GraphBuilder(product)
    for (i, j) in label.bond_centers:
        builder.remove_bond(i, j)
    flagged = set(label.atom_centers)
    for (i, j) in label.bond_centers:
        flagged.add(i)
        flagged.add(j)
    for i in flagged:
        builder.update_atom(i, attachment=True)
    broken = builder.build(validate=False)

    synthons = []
    atom_owner = {}
    for comp in broken.component_indices():
        sub, remap = broken.subgraph(comp)
        attach = tuple(remap[i] for i in sorted(flagged) if i in remap)
        for i in comp:
            atom_owner[i] = len(synthons)
        synthons.append(Synthon(
            graph=sub,
            product_indices=tuple(comp),
            attachment=attach,
            origin=origin,
        ))

    for (i, j) in label.bond_centers:
        a, b = synthons[atom_owner[i]], synthons[atom_owner[j]]
        if a is not b and a.dual is None and b.dual is None:
            a.dual = b
            b.dual = a
    return synthons


def synthons_for_reaction(rxn: Reaction) -> tuple[CenterLabel, list[Synthon]]:
    label = label_centers(rxn)
    return label, break_into_synthons(rxn.product, label, origin=rxn.rxn_id)


def centers_to_targets(product: MolGraph, label: CenterLabel) -> tuple[list[int], list[int]]:
    """Per-atom and per-bond 0/1 vectors for training the center model."""
    atom_y = [0] * len(product.atoms)
    for i in label.atom_centers:
        atom_y[i] = 1
    wanted = set(label.bond_centers)
    bond_y = [1 if (min(b.a, b.b), max(b.a, b.b)) in wanted else 0
              for b in product.bonds]
    return atom_y, bond_y
