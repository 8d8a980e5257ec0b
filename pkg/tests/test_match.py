"""Wildcard subgraph matching: soundness, completeness, spec examples."""

import itertools

import pytest

from retrokit.chem import (WILDCARD, is_subgraph, parse_smiles,
                           subgraph_matches)


def wildcard_pattern(smiles_with_star: str):
    """Parse a pattern where '*' atoms match anything."""
    return parse_smiles(smiles_with_star)


def brute_force_matches(pattern, target):
    """All injective maps preserving bonds, orders and atom identity."""
    pa, ta = pattern.atoms, target.atoms

    def atom_ok(p, t):
        if pa[p].element == WILDCARD:
            return True
        return (pa[p].element == ta[t].element
                and pa[p].charge == ta[t].charge
                and pa[p].aromatic == ta[t].aromatic)

    tadj = {}
    for b in target.bonds:
        tadj[(b.a, b.b)] = b.order
        tadj[(b.b, b.a)] = b.order
    found = []
    for combo in itertools.permutations(range(len(ta)), len(pa)):
        if not all(atom_ok(p, combo[p]) for p in range(len(pa))):
            continue
        ok = True
        for b in pattern.bonds:
            order = tadj.get((combo[b.a], combo[b.b]))
            if order is None or order != b.order:
                ok = False
                break
        if ok:
            found.append(tuple(combo))
    return sorted(found)


class TestExamples:
    def test_wildcard_bromide(self):
        pattern = wildcard_pattern("*Br")
        maps = subgraph_matches(pattern, parse_smiles("CBr"))
        assert len(maps) == 1
        mapping = maps[0]
        assert parse_smiles("CBr").atoms[mapping[1]].element == 35

    def test_cc_in_propane(self):
        maps = subgraph_matches(parse_smiles("CC"), parse_smiles("CCC"))
        assert len(maps) == 4

    def test_no_nitrogen_in_ethanol(self):
        assert subgraph_matches(parse_smiles("N"), parse_smiles("CCO")) == []

    def test_pattern_larger_than_target(self):
        assert subgraph_matches(parse_smiles("CCCC"), parse_smiles("CC")) == []

    def test_is_subgraph(self):
        assert is_subgraph(parse_smiles("c1ccccc1"), parse_smiles("Cc1ccccc1"))
        assert not is_subgraph(parse_smiles("C1CC1"), parse_smiles("CCCC"))


class TestSoundness:
    @pytest.mark.parametrize("pattern,target", [
        ("C=O", "CC(=O)OC(C)=O"),
        ("*O", "CC(=O)OCC"),
        ("cc", "c1ccc2ccccc2c1"),
        ("C(=O)N", "CC(=O)NC(C)C(=O)N"),
    ])
    def test_mappings_embed_bonds(self, pattern, target):
        p, t = wildcard_pattern(pattern), parse_smiles(target)
        tadj = {}
        for b in t.bonds:
            tadj[(b.a, b.b)] = b.order
            tadj[(b.b, b.a)] = b.order
        maps = subgraph_matches(p, t)
        assert maps
        for m in maps:
            assert len(set(m)) == len(m)
            for b in p.bonds:
                assert tadj.get((m[b.a], m[b.b])) == b.order

    def test_wildcard_matches_any_element(self):
        p = wildcard_pattern("*N")
        hits = {parse_smiles(t).atoms[subgraph_matches(p, parse_smiles(t))[0][0]].element
                for t in ("CN", "ON", "NN")}
        assert hits == {6, 8, 7}


class TestCompleteness:
    # brute force over injective maps is the oracle for small targets
    @pytest.mark.parametrize("pattern,target", [
        ("CC", "CCC"),
        ("CCO", "CCOCC"),
        ("C=O", "CC(=O)C=O"),
        ("*C", "CCO"),
        ("C1CC1", "C1CC1C"),
        ("cc", "c1ccccc1"),
        ("CO", "CCCCCCCC"),
    ])
    def test_agrees_with_brute_force(self, pattern, target):
        p, t = wildcard_pattern(pattern), parse_smiles(target)
        assert len(t.atoms) <= 8
        got = sorted(tuple(m[i] for i in range(len(p.atoms)))
                     for m in subgraph_matches(p, t))
        assert got == brute_force_matches(p, t)

    def test_corpus_fragments(self, molecules, rng):
        names = sorted(molecules)
        checked = 0
        for name in names:
            target = molecules[name]
            if not (2 <= len(target.atoms) <= 8) or not target.bonds:
                continue
            bond = target.bonds[rng.integers(len(target.bonds))]
            pattern, _ = target.subgraph(sorted({bond.a, bond.b}))
            got = sorted(tuple(m[i] for i in range(len(pattern.atoms)))
                         for m in subgraph_matches(pattern, target))
            assert got == brute_force_matches(pattern, target)
            checked += 1
            if checked == 25:
                break
        assert checked == 25
