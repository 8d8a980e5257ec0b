"""SMILES parsing, writing, and canonicalization."""

import itertools

import numpy as np
import pytest

from retrokit.chem import (DOUBLE, SINGLE, SmilesError, canonical_ranks,
                           canonical_smiles, parse_smiles, same_molecule,
                           write_smiles)


def roundtrips(smiles: str) -> bool:
    g = parse_smiles(smiles)
    return same_molecule(g, parse_smiles(write_smiles(g)))


class TestParse:
    def test_ethanol(self):
        g = parse_smiles("CCO")
        assert [a.element for a in g.atoms] == [6, 6, 8]
        assert len(g.bonds) == 2
        assert all(b.order == SINGLE for b in g.bonds)
        assert tuple(g.h_counts) == (3, 2, 1)

    def test_benzene(self):
        g = parse_smiles("c1ccccc1")
        assert len(g.atoms) == 6
        assert all(a.aromatic for a in g.atoms)
        assert all(g.h_counts[i] == 1 for i in range(6))
        assert all(g.in_ring(i) for i in range(6))
        assert all(6 in g.ring_sizes(i) for i in range(6))

    def test_bracket_atoms_keep_maps_and_hydrogens(self):
        g = parse_smiles("[CH3:1][OH:2]")
        assert [a.atom_map for a in g.atoms] == [1, 2]
        assert tuple(g.h_counts) == (3, 1)

    def test_charges(self):
        g = parse_smiles("[NH4+].[O-]C")
        assert g.atoms[0].charge == 1
        assert g.atoms[1].charge == -1
        assert g.h_counts[0] == 4

    def test_double_and_triple_bonds(self):
        g = parse_smiles("C=CC#N")
        assert g.bonds[0].order == DOUBLE
        assert tuple(g.h_counts) == (2, 1, 0, 0)

    def test_two_digit_ring_closure(self):
        g = parse_smiles("C%10CCCCC%10")
        assert len(g.bonds) == 6
        assert all(g.in_ring(i) for i in range(6))

    def test_multi_component(self):
        g = parse_smiles("CC.OO")
        comps = g.split_components()
        assert sorted(len(c.atoms) for c in comps) == [2, 2]

    def test_unclosed_branch_reports_offset(self):
        with pytest.raises(SmilesError) as exc:
            parse_smiles("C(C")
        assert 0 <= exc.value.offset <= 3
        assert "offset" in str(exc.value)

    def test_unmatched_ring_digit(self):
        with pytest.raises(SmilesError):
            parse_smiles("C1CC")

    def test_unknown_element(self):
        with pytest.raises(SmilesError):
            parse_smiles("[Xx]")

    def test_valence_violation(self):
        with pytest.raises(SmilesError):
            parse_smiles("C(C)(C)(C)(C)C")

    def test_empty_string_rejected(self):
        with pytest.raises(SmilesError):
            parse_smiles("")

    def test_stray_close_paren(self):
        with pytest.raises(SmilesError):
            parse_smiles("CC)C")


class TestValence:
    # explicit bond order sum + implicit H must hit an allowed valence
    @pytest.mark.parametrize("smiles,hs", [
        ("C", [4]),
        ("O", [2]),
        ("N", [3]),
        ("Cl", [1]),
        ("C=O", [2, 0]),
        ("CS(C)(=O)=O", [3, 0, 3, 0, 0]),
        ("[nH]1cccc1", [1, 1, 1, 1, 1]),
    ])
    def test_implicit_hydrogens(self, smiles, hs):
        assert list(parse_smiles(smiles).h_counts) == hs


class TestWrite:
    @pytest.mark.parametrize("smiles", [
        "CCO", "c1ccccc1", "C1CC1", "CC(=O)O[CH3:5]", "[NH4+]", "[O-]c1ccccc1",
        "C/C=C/C", "C/C=C\\C", "CC.OC", "C#N", "c1ccc2ccccc2c1",
        "CN1CCN(C)CC1", "O=C(O)c1ccccc1", "C%12CCCCC%12",
    ])
    def test_roundtrip_isomorphic(self, smiles):
        assert roundtrips(smiles)

    def test_stereo_marks_survive(self):
        out = write_smiles(parse_smiles("C/C=C/C"))
        assert "/" in out or "\\" in out
        g = parse_smiles(out)
        marked = [b for b in g.bonds if b.direction]
        assert len(marked) == 2

    def test_atom_maps_survive(self):
        out = write_smiles(parse_smiles("[CH3:7]O"))
        assert ":7]" in out


class TestCanonical:
    def test_single_atom(self):
        assert canonical_smiles(parse_smiles("C")) == "C"

    def test_idempotent(self):
        s = canonical_smiles(parse_smiles("OC(=O)c1ccccc1Br"))
        assert canonical_smiles(parse_smiles(s)) == s

    def test_all_orderings_of_ethanol(self):
        g = parse_smiles("CCO")
        forms = {canonical_smiles(g.permuted(p))
                 for p in itertools.permutations(range(3))}
        assert len(forms) == 1

    def test_sampled_permutations(self, molecules, rng):
        names = sorted(molecules)
        for name in [names[i] for i in rng.choice(len(names), 50, replace=False)]:
            g = molecules[name]
            n = len(g.atoms)
            forms = {canonical_smiles(g.permuted(rng.permutation(n).tolist()))
                     for _ in range(20)}
            assert forms == {name}

    def test_ranks_are_a_bijection(self):
        g = parse_smiles("CC(C)Cc1ccc(cc1)C(C)C(=O)O")
        ranks = canonical_ranks(g)
        assert sorted(ranks) == list(range(len(g.atoms)))

    def test_ranks_invariant_without_symmetry(self, rng):
        # every atom distinguishable, so ranks cannot depend on labeling
        g = parse_smiles("CCOC(=O)CN")
        ranks = canonical_ranks(g)
        for _ in range(10):
            perm = rng.permutation(len(g.atoms)).tolist()
            permuted_ranks = canonical_ranks(g.permuted(perm))
            assert [permuted_ranks[perm[i]] for i in range(len(g.atoms))] == ranks

    def test_same_molecule_rejects_different(self):
        assert not same_molecule(parse_smiles("CCO"), parse_smiles("CCN"))
        assert not same_molecule(parse_smiles("CCO"), parse_smiles("CCCO"))

    def test_symmetric_molecule_canonical(self):
        # highly symmetric case exercises refinement tie-breaking
        g = parse_smiles("CC(C)(C)C(C)(C)C")
        n = len(g.atoms)
        rng = np.random.default_rng(3)
        forms = {canonical_smiles(g.permuted(rng.permutation(n).tolist()))
                 for _ in range(40)}
        assert len(forms) == 1
