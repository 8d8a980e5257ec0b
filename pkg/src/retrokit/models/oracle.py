"""Ground-truth stand-ins for both models.

These expose the same prediction interface as the trained models but
answer from labels, which isolates the search/apply/evaluation machinery
from model quality: with oracles plugged in, end-to-end accuracy must be
perfect on every reaction whose templates round-trip.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence

import numpy as np

from retrokit.chem import ChemError, MolGraph, canonical_smiles
from retrokit.rxn import (CenterLabel, Reaction, TemplateLibrary,
                          extract_reaction_templates, label_centers)

from .synthon import SynthonGroup

__all__ = ["OracleCenterModel", "OracleSynthonModel"]


class OracleCenterModel:
    """Returns the true center of the reaction named by `context`."""

    def __init__(self, dataset: Iterable[Reaction]):
        self._labels: dict[str, CenterLabel] = {}
        for rxn in dataset:
            try:
                self._labels[rxn.rxn_id] = label_centers(rxn)
            except ChemError:
                continue

    def topk_centers(self, product: MolGraph, k: int,
                     context=None) -> list[tuple[CenterLabel, float]]:
        label = self._labels.get(context)
        if label is None or k < 1:
            return []
        return [(label, 1.0)]


class OracleSynthonModel:
    """One-hot template distributions keyed by (reaction id, synthon)."""

    def __init__(self, dataset: Iterable[Reaction], library: TemplateLibrary):
        self.n_classes = library.k + 1
        self._classes: dict[tuple[Optional[str], str], int] = {}
        for rxn in dataset:
            triples, record = extract_reaction_templates(rxn)
            if record.keys is None:
                continue
            for synthon, _, tpl in triples:
                key = (rxn.rxn_id, canonical_smiles(synthon.graph))
                self._classes[key] = library.class_of(tpl.key)

    def predict_dists(self, groups: Sequence[SynthonGroup],
                      correcting: bool = True, context=None) -> list[np.ndarray]:
        out = []
        for grp in groups:
            for s in grp.synthons:
                dist = np.zeros(self.n_classes)
                cls = self._classes.get((context, canonical_smiles(s.graph)))
                if cls is None:
                    dist[self.n_classes - 1] = 1.0   # uncovered
                else:
                    dist[cls - 1] = 1.0
                out.append(dist)
        return out
