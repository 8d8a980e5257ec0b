"""Atom/bond feature blocks and dense graph arrays."""

import numpy as np

from retrokit.chem import ATOM_FDIM, BOND_FDIM, parse_smiles
from retrokit.chem.features import atom_features, bond_features, graph_arrays
from retrokit.chem.molgraph import DOUBLE

# block offsets inside the atom vector
A_HS = 21
A_DEGREE = A_HS + 5
A_VALENCE = A_DEGREE + 7
A_AROMATIC = A_VALENCE + 9
A_RING = A_AROMATIC + 1
A_RING3 = A_RING + 1

# block offsets inside the bond vector
B_DIRECTION = 4
B_STEREO = B_DIRECTION + 3
B_CONJ = B_STEREO + 3
B_LENGTH = B_CONJ + 1


def double_bond_index(g):
    return next(i for i, b in enumerate(g.bonds) if b.order == DOUBLE)


class TestAtomFeatures:
    def test_width(self):
        assert ATOM_FDIM == 49
        assert atom_features(parse_smiles("C"), 0).shape == (ATOM_FDIM,)

    def test_benzene_carbon(self):
        f = atom_features(parse_smiles("c1ccccc1"), 0)
        assert f[A_AROMATIC] == 1.0
        assert f[A_RING] == 1.0
        assert f[A_RING3 + 3] == 1.0          # ring of size 6
        assert f[A_DEGREE + 2] == 1.0         # two heavy neighbors

    def test_methane_carbon(self):
        f = atom_features(parse_smiles("C"), 0)
        assert f[A_HS + 4] == 1.0             # 4+ hydrogens
        assert f[A_DEGREE + 0] == 1.0         # no heavy neighbors
        assert f[A_AROMATIC] == 0.0

    def test_cyclopropane_carbon(self):
        f = atom_features(parse_smiles("C1CC1"), 0)
        assert f[A_RING3] == 1.0
        assert f[A_RING3 + 3] == 0.0

    def test_large_ring_flag(self):
        f = atom_features(parse_smiles("C1CCCCCCC1"), 0)
        assert f[A_RING3 + 4] == 1.0          # ring larger than 6
        assert f[A_RING3:A_RING3 + 4].sum() == 0.0

    def test_element_one_hot(self):
        g = parse_smiles("CNO")
        for i, slot in enumerate((0, 1, 2)):   # C, N, O head the table
            f = atom_features(g, i)
            assert f[slot] == 1.0
            assert f[:21].sum() == 1.0

    def test_valence_block(self):
        f = atom_features(parse_smiles("C"), 0)
        assert f[A_VALENCE + 4] == 1.0         # methane carbon valence 4

    def test_one_hot_blocks_sum_to_one(self, molecules):
        for name in sorted(molecules)[:50]:
            g = molecules[name]
            for i in range(len(g.atoms)):
                f = atom_features(g, i)
                assert f[:A_HS].sum() == 1.0
                assert f[A_HS:A_DEGREE].sum() == 1.0
                assert f[A_DEGREE:A_VALENCE].sum() == 1.0
                assert f[A_VALENCE:A_AROMATIC].sum() == 1.0


class TestBondFeatures:
    def test_width(self):
        assert BOND_FDIM == 12

    def test_benzene_bond(self):
        f = bond_features(parse_smiles("c1ccccc1"), 0)
        assert f[3] == 1.0                    # aromatic order slot
        assert f[B_CONJ] == 1.0

    def test_ethane_bond(self):
        f = bond_features(parse_smiles("CC"), 0)
        assert f[0] == 1.0                    # single order slot
        assert f[B_CONJ] == 0.0
        assert f[B_STEREO] == 1.0             # stereo "none" slot

    def test_stereo_cis_trans(self):
        cis = parse_smiles("C/C=C\\C")
        f = bond_features(cis, double_bond_index(cis))
        assert f[B_STEREO + 1] == 1.0
        trans = parse_smiles("C/C=C/C")
        f = bond_features(trans, double_bond_index(trans))
        assert f[B_STEREO + 2] == 1.0

    def test_direction_marks(self):
        g = parse_smiles("C/C=C/C")
        marked = [bond_features(g, i)[B_DIRECTION:B_STEREO]
                  for i, b in enumerate(g.bonds) if b.direction]
        assert len(marked) == 2
        for block in marked:
            assert block[0] == 0.0 and block.sum() == 1.0

    def test_length_slot_always_zero(self, molecules):
        for name in sorted(molecules)[:30]:
            g = molecules[name]
            for i in range(len(g.bonds)):
                assert bond_features(g, i)[B_LENGTH] == 0.0

    def test_conjugated_ester_linkage(self):
        # both ends carry pi or lone-pair character beyond the bond itself
        g = parse_smiles("CC(=O)OC")
        linkage = next(i for i, b in enumerate(g.bonds)
                       if {g.atoms[b.a].element, g.atoms[b.b].element} == {6, 8}
                       and b.order == "single" and g.degree(b.a) + g.degree(b.b) == 5)
        assert bond_features(g, linkage)[B_CONJ] == 1.0


class TestGraphArrays:
    def test_shapes_and_directions(self):
        g = parse_smiles("CC(=O)O")
        arrays = graph_arrays(g)
        n, m = len(g.atoms), len(g.bonds)
        assert arrays["x"].shape == (n, ATOM_FDIM)
        assert arrays["edge_attr"].shape == (2 * m, BOND_FDIM)
        assert arrays["src"].shape == (2 * m,)
        for bi, bond in enumerate(g.bonds):
            assert (arrays["src"][2 * bi], arrays["dst"][2 * bi]) == (bond.a, bond.b)
            assert (arrays["src"][2 * bi + 1], arrays["dst"][2 * bi + 1]) == (bond.b, bond.a)
            assert np.array_equal(arrays["edge_attr"][2 * bi],
                                  arrays["edge_attr"][2 * bi + 1])

    def test_feature_multisets_are_label_invariant(self, rng):
        g = parse_smiles("C/C=C/c1ccc(CO)cc1")
        arrays = graph_arrays(g)
        perm = rng.permutation(len(g.atoms)).tolist()
        permuted = graph_arrays(g.permuted(perm))
        assert sorted(map(tuple, arrays["x"])) == sorted(map(tuple, permuted["x"]))
        assert (sorted(map(tuple, arrays["edge_attr"]))
                == sorted(map(tuple, permuted["edge_attr"])))
