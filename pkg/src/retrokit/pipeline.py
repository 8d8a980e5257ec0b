"""End-to-end retrosynthesis and its evaluation.

Inference walks a two-level probability tree: the top k_ci reaction
centers of the product, then for each center the top k_sc joint template
assignments over the resulting synthons. Each leaf is scored by the
product of its branch probabilities, templates are applied to rebuild
reactant molecules, infeasible leaves are dropped, duplicate reactant
sets are merged keeping the highest score, and the survivors are ranked.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .chem import ChemError, MolGraph, canonical_ranks, canonical_smiles, parse_smiles
from .models import SynthonGroup, topk_joint_assignments
from .rxn import (CenterLabel, Reaction, TemplateLibrary, apply_semi_template,
                  break_into_synthons, extract_reaction_templates, label_centers)

__all__ = [
    "Candidate", "RetroPrediction", "predict_reactants", "evaluate",
    "evaluate_submodules", "true_reactant_set", "synthon_signature",
    "write_predictions_csv", "write_metrics_csv", "DEFAULT_KS",
]

DEFAULT_KS = (1, 3, 5, 10)


@dataclass
class Candidate:
    """One ranked answer: a reactant set and the path that produced it."""

    center: CenterLabel
    center_prob: float
    classes: tuple[int, ...]
    template_prob: float
    reactants: tuple[str, ...]       # canonical SMILES, sorted, maps stripped
    joint_prob: float


@dataclass
class RetroPrediction:
    """Ranked candidates for one product."""

    product_id: str
    candidates: list[Candidate] = field(default_factory=list)

    def reactant_sets(self) -> list[tuple[str, ...]]:
        return [c.reactants for c in self.candidates]


def true_reactant_set(rxn: Reaction) -> tuple[str, ...]:
    """Ground-truth reactant multiset as sorted map-free canonical SMILES."""
    parts = rxn.reactants.split_components()
    return tuple(sorted(canonical_smiles(p.without_maps()) for p in parts))


def synthon_signature(synthons: Sequence) -> tuple:
    """Order- and symmetry-invariant identity of a synthon set.

    Each synthon contributes its map-free canonical SMILES plus the
    canonical ranks of its attachment atoms, so breaking a product at
    either of two symmetry-equivalent bonds yields the same signature.
    """
    sig = []
    for s in synthons:
        bare = s.graph.without_maps()
        ranks = canonical_ranks(bare)
        sig.append((canonical_smiles(bare),
                    tuple(sorted(ranks[a] for a in s.attachment))))
    return tuple(sorted(sig))


def _apply_assignment(synthons, classes: tuple[int, ...],
                      library: TemplateLibrary) -> Optional[tuple[str, ...]]:
    """Reactant multiset from one template assignment, or None if infeasible."""
    out = []
    for synthon, cls in zip(synthons, classes):
        tpl = library.template_for_class(cls)
        if tpl is None:                      # uncovered class has no template
            return None
        try:
            reactant = apply_semi_template(synthon, tpl)
            smi = canonical_smiles(reactant.without_maps())
            parse_smiles(smi)                # round-trip guard
        except ChemError:
            return None
        out.append(smi)
    return tuple(sorted(out))


def predict_reactants(product: MolGraph, ci_model, sc_model,
                      library: TemplateLibrary, k_ci: int = 3, k_sc: int = 4,
                      k_total: int = 10, use_filter: bool = True,
                      use_correcting: bool = True, context=None,
                      product_id: str = "") -> RetroPrediction:
    """Ranked reactant-set candidates for one product."""
    best: dict[tuple[str, ...], Candidate] = {}
    prior = library.pair_prior if use_filter else None
    for center, p_center in ci_model.topk_centers(product, k_ci, context=context):
        try:
            synthons = break_into_synthons(product, center)
        except ChemError:
            continue
        if not synthons:
            continue
        group = SynthonGroup(product, synthons)
        dists = sc_model.predict_dists([group], correcting=use_correcting,
                                       context=context)
        assignments = topk_joint_assignments(dists, k_sc, pair_prior=prior,
                                             use_filter=use_filter)
        for classes, p_tpl in assignments:
            reactants = _apply_assignment(synthons, classes, library)
            if reactants is None:
                continue
            cand = Candidate(center=center, center_prob=p_center,
                             classes=classes, template_prob=p_tpl,
                             reactants=reactants,
                             joint_prob=p_center * p_tpl)
            prev = best.get(reactants)
            if prev is None or cand.joint_prob > prev.joint_prob:
                best[reactants] = cand
    ranked = sorted(best.values(), key=lambda c: (-c.joint_prob, c.reactants))
    return RetroPrediction(product_id=product_id, candidates=ranked[:k_total])


# ---------------------------------------------------------------------------
# evaluation

def _hit_rank(sets: list[tuple[str, ...]], truth: tuple[str, ...]) -> Optional[int]:
    for i, s in enumerate(sets):
        if s == truth:
            return i + 1
    return None


def evaluate(dataset: Sequence[Reaction], ci_model, sc_model,
             library: TemplateLibrary, ks: Sequence[int] = DEFAULT_KS,
             k_ci: int = 3, k_sc: int = 4, k_total: int = 10,
             use_filter: bool = True, use_correcting: bool = True,
             collect: Optional[list] = None) -> dict[int, float]:
    """Top-k exact-match accuracy of predicted reactant multisets."""
    hits = {k: 0 for k in ks}
    total = 0
    for rxn in dataset:
        truth = true_reactant_set(rxn)
        pred = predict_reactants(
            rxn.product, ci_model, sc_model, library, k_ci=k_ci, k_sc=k_sc,
            k_total=k_total, use_filter=use_filter,
            use_correcting=use_correcting, context=rxn.rxn_id,
            product_id=rxn.rxn_id)
        if collect is not None:
            collect.append(pred)
        rank = _hit_rank(pred.reactant_sets(), truth)
        total += 1
        for k in ks:
            if rank is not None and rank <= k:
                hits[k] += 1
    return {k: hits[k] / max(1, total) for k in ks}


def evaluate_submodules(dataset: Sequence[Reaction], ci_model, sc_model,
                        library: TemplateLibrary,
                        ks: Sequence[int] = DEFAULT_KS,
                        use_correcting: bool = True,
                        ) -> tuple[dict[int, float], dict[int, float]]:
    """(center top-k accuracy, teacher-forced template top-k accuracy).

    Center accuracy compares synthon-set signatures, so predicting a
    symmetry-equivalent center still counts. Template accuracy feeds the
    true synthons to the classifier and asks for the true class tuple
    among the top-k joint assignments; reactions whose templates could
    not be extracted are excluded from the template metric.
    """
    max_k = max(ks)
    ci_hits = {k: 0 for k in ks}
    sc_hits = {k: 0 for k in ks}
    ci_total = 0
    sc_total = 0
    for rxn in dataset:
        try:
            true_label = label_centers(rxn)
            true_synthons = break_into_synthons(rxn.product, true_label)
        except ChemError:
            continue
        truth_sig = synthon_signature(true_synthons)
        ci_total += 1
        rank = None
        for i, (center, _) in enumerate(
                ci_model.topk_centers(rxn.product, max_k, context=rxn.rxn_id)):
            try:
                synthons = break_into_synthons(rxn.product, center)
            except ChemError:
                continue
            if synthon_signature(synthons) == truth_sig:
                rank = i + 1
                break
        for k in ks:
            if rank is not None and rank <= k:
                ci_hits[k] += 1

        triples, record = extract_reaction_templates(rxn)
        if record.keys is None:
            continue
        classes = tuple(library.class_of(tpl.key) for _, _, tpl in triples)
        group = SynthonGroup(rxn.product, [t[0] for t in triples])
        dists = sc_model.predict_dists([group], correcting=use_correcting,
                                       context=rxn.rxn_id)
        ranked = topk_joint_assignments(dists, max_k, use_filter=False)
        rank = _hit_rank([c for c, _ in ranked], classes)
        sc_total += 1
        for k in ks:
            if rank is not None and rank <= k:
                sc_hits[k] += 1
    return ({k: ci_hits[k] / max(1, ci_total) for k in ks},
            {k: sc_hits[k] / max(1, sc_total) for k in ks})


# ---------------------------------------------------------------------------
# report files

def write_predictions_csv(path: str, predictions: Iterable[RetroPrediction]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "rank", "reactants", "joint_prob"])
        for pred in predictions:
            for rank, cand in enumerate(pred.candidates, start=1):
                writer.writerow([pred.product_id, rank, ".".join(cand.reactants),
                                 "%.12g" % cand.joint_prob])


def write_metrics_csv(path: str, ks: Sequence[int], ci_acc: dict[int, float],
                      sc_acc: dict[int, float], e2e_acc: dict[int, float]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "center_acc", "template_acc", "end_to_end_acc"])
        for k in ks:
            writer.writerow([k, "%.12g" % ci_acc[k], "%.12g" % sc_acc[k],
                             "%.12g" % e2e_acc[k]])
