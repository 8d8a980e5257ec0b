"""Molecular graphs: parsing, writing, canonical forms, matching, features."""

from .canon import canonical_ranks, canonical_smiles, same_molecule
from .elements import WILDCARD, implicit_hydrogens, max_valence
from .features import ATOM_FDIM, BOND_FDIM, atom_features, bond_features, graph_arrays
from .match import is_subgraph, subgraph_matches
from .molgraph import (AROMATIC, DOUBLE, SINGLE, TRIPLE, Atom, Bond, ChemError,
                       GraphBuilder, MolGraph, ValenceError)
from .smiles import SmilesError, parse_smiles, write_smiles

__all__ = [
    "AROMATIC", "ATOM_FDIM", "Atom", "BOND_FDIM", "Bond", "ChemError", "DOUBLE",
    "GraphBuilder", "MolGraph", "SINGLE", "SmilesError", "TRIPLE", "ValenceError",
    "WILDCARD", "atom_features", "bond_features", "canonical_ranks",
    "canonical_smiles", "graph_arrays", "implicit_hydrogens", "is_subgraph",
    "max_valence", "parse_smiles", "same_molecule", "subgraph_matches",
    "write_smiles",
]
