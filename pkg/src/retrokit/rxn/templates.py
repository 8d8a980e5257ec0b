"""Semi-templates: per-synthon completion patterns mined from training data.

A semi-template records everything needed to turn one synthon back into its
reactant: a residual fragment, the bonds that attach it, and per-site
hydrogen/charge edits. Sites are wildcard atoms numbered through their atom
maps; matching a site to a synthon atom is the only degree of freedom at
application time and is resolved toward the lowest canonical rank, so the
rewrite is deterministic. Identical transformations serialize to identical
keys, which is what makes frequency-ranked template classes meaningful.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from itertools import permutations
from typing import Iterable, Optional

from ..chem.canon import canonical_ranks, canonical_smiles
from ..chem.elements import WILDCARD
from ..chem.molgraph import (Atom, Bond, ChemError, GraphBuilder, MolGraph,
                             ValenceError)
from ..chem.smiles import parse_smiles, write_smiles
from .centers import Synthon, synthons_for_reaction
from .reaction import Reaction


class TemplateError(ChemError):
    """Extraction cannot represent this (synthon, reactant) pair."""


class TemplateApplyError(ChemError):
    """No valence-legal way to apply a template to a synthon."""


@dataclass(frozen=True)
class SemiTemplate:
    """Residual + attachment bonds + per-site edits, canonically serialized.

    Each edit is (site, delta_H, delta_charge, element): the element pins a
    site to one atom type and is recorded only for multi-site templates,
    where it orients the graft; single-site templates stay fully generic so
    one pattern covers every context.
    """

    pattern: MolGraph                              # wildcards carry site ids as maps
    edits: tuple[tuple[int, int, int, int], ...]   # (site, dH, dq, elem-or-0)
    key: str
    class_id: int = 0
    frequency: int = 0

    @property
    def n_sites(self) -> int:
        return sum(1 for a in self.pattern.atoms if a.element == WILDCARD)

    def residual_smiles(self) -> str:
        keep = [i for i, a in enumerate(self.pattern.atoms) if a.element != WILDCARD]
        if not keep:
            return ""
        sub, _ = self.pattern.subgraph(keep)
        return canonical_smiles(sub)

    def to_json(self) -> dict:
        return {
            "class_id": self.class_id,
            "pattern": write_smiles(self.pattern),
            "residual": self.residual_smiles(),
            "edits": [list(e) for e in self.edits],
            "frequency": self.frequency,
        }

    @staticmethod
    def from_json(obj: dict) -> "SemiTemplate":
        pattern = parse_smiles(obj["pattern"])
        edits = tuple(tuple(e) for e in obj["edits"])
        key = template_key(pattern, edits)
        return SemiTemplate(pattern=pattern, edits=edits, key=key,
                            class_id=int(obj.get("class_id", 0)),
                            frequency=int(obj.get("frequency", 0)))


def template_key(pattern: MolGraph,
                 edits: tuple[tuple[int, int, int, int], ...]) -> str:
    edit_by_site = {s: rest for s, *rest in edits}
    extra = []
    for i, atom in enumerate(pattern.atoms):
        if atom.element == WILDCARD:
            extra.append((1, *edit_by_site.get(atom.atom_map, (0, 0, 0))))
        else:
            extra.append((0, 0, 0, 0))
    smiles = canonical_smiles(pattern, extra=extra)
    tail = ";".join(f"{s}:{dh}:{dq}:{el}" for s, dh, dq, el in sorted(edits))
    return f"{smiles}|{tail}"


def extract_semi_template(synthon: Synthon, reactant: MolGraph) -> SemiTemplate:
    """Diff a synthon against its reactant, by atom map.

    Raises TemplateError when the pair is inconsistent (changed elements,
    changed synthon bonds, missing maps) rather than guessing.
    """
    sg = synthon.graph
    if not synthon.attachment:
        raise TemplateError("synthon has no attachment sites")
    smap = sg.map_to_index()
    if len(smap) != len(sg.atoms):
        raise TemplateError("synthon has unmapped atoms")
    rmap = reactant.map_to_index()
    for m in smap:
        if m not in rmap:
            raise TemplateError(f"synthon map {m} missing from reactant")

    for m, si in smap.items():
        ri = rmap[m]
        if sg.atoms[si].element != reactant.atoms[ri].element:
            raise TemplateError(f"element change at map {m}")
        if sg.atoms[si].aromatic != reactant.atoms[ri].aromatic:
            raise TemplateError(f"aromaticity change at map {m}")
    for bond in sg.bonds:
        m1, m2 = sg.atoms[bond.a].atom_map, sg.atoms[bond.b].atom_map
        rb = reactant.bond_between(rmap[m1], rmap[m2])
        if rb is None or rb.order != bond.order:
            raise TemplateError(f"synthon bond {m1}-{m2} changed in reactant")

    matched_r = {rmap[m]: si for m, si in smap.items()}   # reactant idx -> synthon idx
    residual_r = [ri for ri in range(len(reactant.atoms)) if ri not in matched_r]

    # bonds to carry into the template
    internal, attach = [], []
    for bond in reactant.bonds:
        a_in, b_in = bond.a in matched_r, bond.b in matched_r
        if not a_in and not b_in:
            internal.append(bond)
        elif a_in and b_in:
            sa, sb = matched_r[bond.a], matched_r[bond.b]
            if sg.bond_between(sa, sb) is None:
                attach.append(bond)     # bond formed on the reactant side
        else:
            attach.append(bond)

    edits_by_si = {}
    for m, si in smap.items():
        ri = rmap[m]
        dh = reactant.h_counts[ri] - sg.h_counts[si]
        dq = reactant.atoms[ri].charge - sg.atoms[si].charge
        if dh or dq:
            edits_by_si[si] = (dh, dq)

    site_sis = set(edits_by_si)
    for bond in attach:
        for end in (bond.a, bond.b):
            if end in matched_r:
                site_sis.add(matched_r[end])

    # assemble the template graph: one wildcard per site plus the residual
    atoms: list[Atom] = []
    bonds: list[Bond] = []
    site_of_si = {}
    for ordinal, si in enumerate(sorted(site_sis), start=1):
        site_of_si[si] = ordinal
        atoms.append(Atom(element=WILDCARD, explicit_h=0, atom_map=ordinal))
    new_of_r = {}
    for ri in residual_r:
        new_of_r[ri] = len(atoms)
        atoms.append(replace(reactant._resolved_atom(ri), atom_map=0,
                             attachment=False))

    def tpl_index(ri: int) -> int:
        if ri in matched_r:
            return site_of_si[matched_r[ri]] - 1
        return new_of_r[ri]

    for bond in internal:
        bonds.append(replace(bond, a=new_of_r[bond.a], b=new_of_r[bond.b]))
    for bond in attach:
        bonds.append(replace(bond, a=tpl_index(bond.a), b=tpl_index(bond.b),
                             direction=None))

    rough = MolGraph(atoms, bonds, validate=False)
    # element constraints orient multi-site grafts; one site needs no pin
    pin = len(site_sis) >= 2
    edits = tuple(sorted(
        (site_of_si[si],) + edits_by_si.get(si, (0, 0))
        + (sg.atoms[si].element if pin else 0,)
        for si in site_sis))
    return _canonicalize_template(rough, edits)


def _canonicalize_template(pattern: MolGraph,
                           edits: tuple[tuple[int, int, int, int], ...]
                           ) -> SemiTemplate:
    """Renumber sites by canonical rank so equal templates share one key."""
    edit_by_site = {s: (dh, dq, el) for s, dh, dq, el in edits}
    extra = [(1, *edit_by_site.get(a.atom_map, (0, 0, 0))) if a.element == WILDCARD
             else (0, 0, 0, 0) for a in pattern.atoms]
    ranks = canonical_ranks(pattern, extra=extra)
    wilds = sorted((i for i, a in enumerate(pattern.atoms) if a.element == WILDCARD),
                   key=lambda i: ranks[i])
    renumber = {pattern.atoms[i].atom_map: k for k, i in enumerate(wilds, start=1)}
    atoms = [replace(a, atom_map=renumber[a.atom_map]) if a.element == WILDCARD
             else a for a in pattern.atoms]
    graph = MolGraph(atoms, pattern.bonds, validate=False)
    new_edits = tuple(sorted((renumber[s], dh, dq, el) for s, dh, dq, el in edits))
    return SemiTemplate(pattern=graph, edits=new_edits,
                        key=template_key(graph, new_edits))


def apply_semi_template(synthon: Synthon, tpl: SemiTemplate) -> MolGraph:
    """Graft the template onto the synthon; deterministic and valence-checked.

    Sites bind to attachment atoms in canonical-rank order; the first
    assignment that builds a legal molecule wins. Raises TemplateApplyError
    when none does.
    """
    sg = synthon.graph
    sites = sorted({a.atom_map for a in tpl.pattern.atoms if a.element == WILDCARD})
    k = len(sites)
    if k == 0:
        builder = GraphBuilder(sg)
        for i in range(len(builder.atoms)):
            builder.update_atom(i, attachment=False)
        return builder.build()

    flagged = set(synthon.attachment)
    ranks = canonical_ranks(sg)
    pool = sorted(flagged, key=lambda i: ranks[i])
    if len(pool) < k:
        # ring-closing templates touch atoms beyond the break points
        pool = pool + sorted((i for i in range(len(sg.atoms)) if i not in flagged),
                             key=lambda i: ranks[i])
        if len(pool) < k:
            raise TemplateApplyError(
                f"template needs {k} sites but synthon has {len(pool)} atoms")
    need_flagged = min(k, len(flagged))

    edit_by_site = {s: (dh, dq) for s, dh, dq, _ in tpl.edits}
    elem_of_site = {s: el for s, _, _, el in tpl.edits}
    last_error = "no assignment tried"
    for chosen in permutations(pool, k):
        if sum(1 for i in chosen if i in flagged) < need_flagged:
            continue
        assigned = dict(zip(sites, chosen))
        if any(elem_of_site.get(s, 0) not in (0, sg.atoms[i].element)
               for s, i in assigned.items()):
            continue
        try:
            return _graft(sg, tpl, assigned, edit_by_site)
        except (ValenceError, ChemError) as exc:
            last_error = str(exc)
    raise TemplateApplyError(f"no valence-legal attachment: {last_error}")


def _graft(sg: MolGraph, tpl: SemiTemplate, assigned: dict[int, int],
           edit_by_site: dict[int, tuple[int, int]]) -> MolGraph:
    builder = GraphBuilder(sg)
    new_idx = {}
    for pi, atom in enumerate(tpl.pattern.atoms):
        if atom.element != WILDCARD:
            new_idx[pi] = builder.add_atom(atom)

    def target(pi: int) -> int:
        atom = tpl.pattern.atoms[pi]
        if atom.element == WILDCARD:
            return assigned[atom.atom_map]
        return new_idx[pi]

    existing = {b.key() for b in builder.bonds}
    for bond in tpl.pattern.bonds:
        a, b = target(bond.a), target(bond.b)
        if frozenset((a, b)) in existing:
            raise ChemError("attachment bond already present")
        builder.add_bond(a, b, bond.order)

    for site, (dh, dq) in edit_by_site.items():
        i = assigned[site]
        if dh:
            builder.shift_h(i, dh)
        if dq:
            builder.update_atom(i, charge=builder.atoms[i].charge + dq)
    for i in range(len(builder.atoms)):
        builder.update_atom(i, attachment=False)
    return builder.build()


# ---------------------------------------------------------------------------
# library construction

@dataclass
class ExtractionRecord:
    rxn_id: str
    keys: Optional[list[str]]       # one per synthon, None when extraction failed
    cause: str = ""


@dataclass
class TemplateLibrary:
    """Frequency-ranked semi-templates with class ids and the pair prior."""

    templates: list[SemiTemplate]                 # class ids 1..K
    k: int
    pair_prior: dict[tuple[int, int], int]
    all_frequencies: list[int]                    # every distinct template, desc
    total_synthons: int
    failed_synthons: int
    full_frequencies: list[int] = field(default_factory=list)
    total_reactions: int = 0
    key_to_class: dict[str, int] = field(default_factory=dict, repr=False)

    @property
    def uncovered_class(self) -> int:
        return self.k + 1

    @property
    def n_classes(self) -> int:
        return self.k + 1

    def class_of(self, key: str) -> int:
        return self.key_to_class.get(key, self.uncovered_class)

    def template_for_class(self, class_id: int) -> Optional[SemiTemplate]:
        if 1 <= class_id <= len(self.templates):
            return self.templates[class_id - 1]
        return None

    def pair_count(self, ci: int, cj: int) -> int:
        return self.pair_prior.get((min(ci, cj), max(ci, cj)), 0)

    def single_count(self, ci: int) -> int:
        return self.pair_prior.get((0, ci), 0)

    def coverage_curve(self, ks: Optional[Iterable[int]] = None):
        """(K, semi coverage, paired full-template coverage) rows."""
        if ks is None:
            ks = range(1, len(self.all_frequencies) + 1)
        total = max(1, self.total_synthons)
        full_total = max(1, self.total_reactions)
        rows = []
        for kk in ks:
            semi = sum(self.all_frequencies[:kk]) / total
            full = sum(self.full_frequencies[:kk]) / full_total
            rows.append((kk, semi, full))
        return rows

    def coverage_at(self, kk: int) -> float:
        return sum(self.all_frequencies[:kk]) / max(1, self.total_synthons)

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "templates": [t.to_json() for t in self.templates],
            "pair_prior": [[a, b, c] for (a, b), c in sorted(self.pair_prior.items())],
            "all_frequencies": self.all_frequencies,
            "total_synthons": self.total_synthons,
            "failed_synthons": self.failed_synthons,
            "full_frequencies": self.full_frequencies,
            "total_reactions": self.total_reactions,
        }

    @staticmethod
    def from_json(obj: dict) -> "TemplateLibrary":
        templates = [SemiTemplate.from_json(t) for t in obj["templates"]]
        lib = TemplateLibrary(
            templates=templates,
            k=int(obj["k"]),
            pair_prior={(a, b): c for a, b, c in obj["pair_prior"]},
            all_frequencies=list(obj["all_frequencies"]),
            total_synthons=int(obj["total_synthons"]),
            failed_synthons=int(obj["failed_synthons"]),
            full_frequencies=list(obj.get("full_frequencies", [])),
            total_reactions=int(obj.get("total_reactions", 0)),
        )
        lib.key_to_class = {t.key: t.class_id for t in templates}
        return lib

    def save(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1, sort_keys=True)
            fh.write("\n")

    @staticmethod
    def load(path: str) -> "TemplateLibrary":
        with open(path) as fh:
            return TemplateLibrary.from_json(json.load(fh))


def extract_reaction_templates(rxn: Reaction) -> tuple[list, ExtractionRecord]:
    """Synthons plus their template keys, or a failure record with the cause."""
    try:
        label, synthons = synthons_for_reaction(rxn)
    except ChemError as exc:
        return [], ExtractionRecord(rxn.rxn_id, None, f"labeling: {exc}")
    if label.is_empty():
        return [], ExtractionRecord(rxn.rxn_id, None, "no reaction center")
    molecules = []
    for comp in rxn.reactants.component_indices():
        sub, _ = rxn.reactants.subgraph(comp)
        molecules.append((sub, set(sub.map_to_index())))

    results = []
    for synthon in synthons:
        maps = set(synthon.graph.map_to_index())
        hosts = [mol for mol, mol_maps in molecules if maps & mol_maps]
        if len(hosts) != 1:
            return [], ExtractionRecord(
                rxn.rxn_id, None, f"synthon spans {len(hosts)} reactants")
        host = hosts[0]
        host_maps = set(host.map_to_index())
        other_maps = {m for s in synthons if s is not synthon
                      for m in s.graph.map_to_index()}
        if host_maps & other_maps:
            return [], ExtractionRecord(
                rxn.rxn_id, None, "two synthons share one reactant")
        try:
            tpl = extract_semi_template(synthon, host)
        except ChemError as exc:
            return [], ExtractionRecord(rxn.rxn_id, None, f"extraction: {exc}")
        results.append((synthon, host, tpl))
    return results, ExtractionRecord(rxn.rxn_id, [t.key for _, _, t in results])


def build_template_library(dataset: Iterable[Reaction], k: int = 150
                           ) -> tuple[TemplateLibrary, list[ExtractionRecord]]:
    counts: dict[str, int] = {}
    exemplar: dict[str, SemiTemplate] = {}
    records: list[ExtractionRecord] = []
    per_reaction_keys: list[Optional[list[str]]] = []
    n_synthons = 0
    n_failed = 0
    n_reactions = 0

    for rxn in dataset:
        n_reactions += 1
        triples, record = extract_reaction_templates(rxn)
        records.append(record)
        if record.keys is None:
            n_failed += 1
            n_synthons += 1      # at least the failed sample counts against coverage
            per_reaction_keys.append(None)
            continue
        for _, _, tpl in triples:
            counts[tpl.key] = counts.get(tpl.key, 0) + 1
            exemplar.setdefault(tpl.key, tpl)
            n_synthons += 1
        per_reaction_keys.append(record.keys)

    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    top = ranked[:k]
    templates = []
    key_to_class = {}
    for class_id, (key, freq) in enumerate(top, start=1):
        tpl = replace(exemplar[key], class_id=class_id, frequency=freq)
        templates.append(tpl)
        key_to_class[key] = class_id

    uncovered = k + 1
    pair_prior: dict[tuple[int, int], int] = {}
    full_counts: dict[tuple[str, ...], int] = {}
    for keys in per_reaction_keys:
        if keys is None:
            continue
        classes = [key_to_class.get(kk, uncovered) for kk in keys]
        if len(classes) == 1:
            pair = (0, classes[0])
            pair_prior[pair] = pair_prior.get(pair, 0) + 1
        else:
            for i in range(len(classes)):
                for j in range(i + 1, len(classes)):
                    pair = (min(classes[i], classes[j]), max(classes[i], classes[j]))
                    pair_prior[pair] = pair_prior.get(pair, 0) + 1
        full_counts[tuple(sorted(keys))] = full_counts.get(tuple(sorted(keys)), 0) + 1

    lib = TemplateLibrary(
        templates=templates,
        k=k,
        pair_prior=pair_prior,
        all_frequencies=sorted(counts.values(), reverse=True),
        total_synthons=n_synthons,
        failed_synthons=n_failed,
        full_frequencies=sorted(full_counts.values(), reverse=True),
        total_reactions=n_reactions,
    )
    lib.key_to_class = key_to_class
    return lib, records
