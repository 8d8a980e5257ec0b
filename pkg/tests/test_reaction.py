"""Reaction parsing, center labeling, synthon generation."""

import io

import pytest

from retrokit.chem import canonical_smiles, parse_smiles
from retrokit.rxn import (ReactionError, break_into_synthons, iter_dataset,
                          label_centers, parse_reaction, synthons_for_reaction)
from retrokit.rxn.centers import CenterLabel, centers_to_targets

ESTER = "[CH3:1][C:2](=[O:3])[OH:4].[CH3:5]O>>[CH3:1][C:2](=[O:3])[O:4][CH3:5]"
DEPROTECT = "[CH3:1][NH:2]C(=O)OC(C)(C)C>>[CH3:1][NH2:2]"


class TestParse:
    def test_basic_fields(self):
        r = parse_reaction(ESTER, "r1", 2)
        assert r.rxn_id == "r1"
        assert r.rxn_class == 2
        assert len(r.product.atoms) == 5
        assert len(r.reactants.component_indices()) == 2

    def test_agents_dropped(self):
        r = parse_reaction("[CH3:1][OH:2]>O>[CH3:1][OH:2]")
        assert len(r.reactants.atoms) == 2

    def test_multi_part_product_rejected(self):
        with pytest.raises(ReactionError):
            parse_reaction("[CH3:1][OH:2]>>[CH3:1].[OH:2]")

    def test_duplicate_product_map_rejected(self):
        with pytest.raises(ReactionError):
            parse_reaction("[CH3:1][CH3:1]>>[CH3:1][CH3:1]")

    def test_missing_side_rejected(self):
        with pytest.raises(ReactionError):
            parse_reaction(">>CC")

    def test_unpaired_maps_stripped(self):
        # map 9 only exists on the reactant side, so it must not survive
        r = parse_reaction("[CH3:1][OH:9]>>[CH3:1]O")
        assert [a.atom_map for a in r.reactants.atoms] == [1, 0]

    def test_dataset_needs_rxn_column(self):
        with pytest.raises(ReactionError):
            list(iter_dataset(io.StringIO("id,smiles\nr1,CC\n")))

    def test_dataset_roundtrip_row(self):
        fh = io.StringIO("id,class,rxn\nr7,3," + ESTER + "\n")
        rxns = list(iter_dataset(fh))
        assert len(rxns) == 1
        assert rxns[0].rxn_id == "r7"
        assert rxns[0].rxn_class == 3


class TestCenterLabeling:
    def test_new_bond_is_a_bond_center(self):
        label = label_centers(parse_reaction(ESTER, "r1"))
        assert label.bond_centers == ((3, 4),)
        assert label.atom_centers == ()

    def test_lost_residue_is_an_atom_center(self):
        label = label_centers(parse_reaction(DEPROTECT, "r2"))
        assert label.atom_centers == (1,)
        assert label.bond_centers == ()

    def test_identity_reaction_has_empty_label(self):
        label = label_centers(parse_reaction("[CH3:1][OH:2]>>[CH3:1][OH:2]"))
        assert label.is_empty()

    def test_hydrogen_count_change_flags_atom(self):
        # reactant nitrogen carries one more hydrogen than the product's
        r = parse_reaction("[CH3:1][NH2:2].[CH3:3]Br>>[CH3:1][NH:2][CH3:3]")
        label = label_centers(r)
        assert (1, 2) in label.bond_centers or label.atom_centers

    def test_targets_align_with_label(self):
        r = parse_reaction(ESTER, "r1")
        label = label_centers(r)
        atom_t, bond_t = centers_to_targets(r.product, label)
        assert len(atom_t) == len(r.product.atoms)
        assert len(bond_t) == len(r.product.bonds)
        assert sum(atom_t) == 0
        assert sum(bond_t) == 1
        hot = bond_t.index(1)
        bond = r.product.bonds[hot]
        assert tuple(sorted((bond.a, bond.b))) == (3, 4)

    def test_corpus_labels_are_consistent(self, corpus):
        for rxn in corpus[:100]:
            label = label_centers(rxn)
            n = len(rxn.product.atoms)
            assert all(0 <= i < n for i in label.atom_centers)
            for i, j in label.bond_centers:
                assert i < j
                assert rxn.product.bond_between(i, j) is not None


class TestSynthons:
    def test_bond_break_partitions_chain(self):
        chain = parse_smiles("CCCCC")
        synthons = break_into_synthons(chain, CenterLabel(bond_centers=((1, 2),)))
        sizes = sorted(len(s.graph.atoms) for s in synthons)
        assert sizes == [2, 3]
        covered = sorted(i for s in synthons for i in s.product_indices)
        assert covered == list(range(5))

    def test_attachment_atoms_flank_the_cut(self):
        chain = parse_smiles("CCCCC")
        synthons = break_into_synthons(chain, CenterLabel(bond_centers=((1, 2),)))
        cut_atoms = {s.product_indices[a] for s in synthons for a in s.attachment}
        assert cut_atoms == {1, 2}

    def test_duals_are_reciprocal(self):
        chain = parse_smiles("CCCCC")
        synthons = break_into_synthons(chain, CenterLabel(bond_centers=((1, 2),)))
        for s in synthons:
            assert s.dual is not None
            assert s.dual.dual is s

    def test_atom_center_keeps_graph_whole(self):
        r = parse_reaction(DEPROTECT, "r2")
        label, synthons = synthons_for_reaction(r)
        assert len(synthons) == 1
        assert len(synthons[0].graph.atoms) == len(r.product.atoms)
        assert len(synthons[0].attachment) == 1
        assert synthons[0].dual is None

    def test_synthons_partition_product_atoms(self, corpus):
        for rxn in corpus[:150]:
            label, synthons = synthons_for_reaction(rxn)
            if not synthons:
                continue
            covered = sorted(i for s in synthons for i in s.product_indices)
            assert covered == list(range(len(rxn.product.atoms)))

    def test_synthon_graphs_match_product_fragments(self):
        r = parse_reaction(ESTER, "r1")
        _, synthons = synthons_for_reaction(r)
        frags = sorted(canonical_smiles(s.graph.without_maps()) for s in synthons)
        assert len(frags) == 2
