"""Shared fixtures: the bundled corpus, a mined library, helper rngs."""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from retrokit.chem import canonical_smiles
from retrokit.rxn import build_template_library, read_dataset

REPO_ROOT = Path(__file__).resolve().parent.parent
DATASET = REPO_ROOT / "data" / "mini_uspto.csv"


@pytest.fixture(scope="session")
def corpus():
    return read_dataset(str(DATASET))


@pytest.fixture(scope="session")
def library_build(corpus):
    return build_template_library(corpus, k=150)


@pytest.fixture(scope="session")
def library(library_build):
    return library_build[0]


@pytest.fixture(scope="session")
def records(library_build):
    return library_build[1]


@pytest.fixture(scope="session")
def covered_ids(records):
    """Reactions whose every synthon produced a template."""
    return {r.rxn_id for r in records if r.keys is not None}


@pytest.fixture(scope="session")
def molecules(corpus):
    """Distinct map-free molecules keyed by canonical SMILES."""
    seen = {}
    for rxn in corpus:
        for graph in (rxn.product, rxn.reactants):
            for comp in graph.split_components():
                bare = comp.without_maps()
                seen.setdefault(canonical_smiles(bare), bare)
    return seen


@pytest.fixture()
def rng():
    return np.random.default_rng(20260815)
