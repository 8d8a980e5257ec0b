"""Semi-template extraction, application, and library mining."""

import json

import pytest

from retrokit.chem import canonical_smiles, same_molecule
from retrokit.rxn import (build_template_library, extract_reaction_templates,
                          parse_reaction)
from retrokit.rxn.templates import (SemiTemplate, TemplateApplyError,
                                    TemplateLibrary, apply_semi_template)

ALKYLATION = "[CH3:5][NH2:6].[CH3:7]Br>>[CH3:5][NH:6][CH3:7]"


def extract_ok(rxn_text, rxn_id="t"):
    triples, record = extract_reaction_templates(parse_reaction(rxn_text, rxn_id))
    assert record.keys is not None, record.cause
    return triples


class TestExtraction:
    def test_residual_and_property_edit_split(self):
        triples = extract_ok(ALKYLATION)
        by_residual = {tpl.residual_smiles(): (synthon, tpl)
                       for synthon, _, tpl in triples}
        assert set(by_residual) == {"", "[Br]"}
        _, amine_tpl = by_residual[""]
        assert any(edit[1] == 1 for edit in amine_tpl.edits)  # regains one H

    def test_round_trip_rebuilds_each_reactant(self):
        for synthon, host, tpl in extract_ok(ALKYLATION):
            rebuilt = apply_semi_template(synthon, tpl)
            assert same_molecule(rebuilt.without_maps(), host.without_maps())

    def test_identity_template_is_empty(self):
        # reactant equals the synthon: no residual atoms, no edits
        triples = extract_ok("[CH3:1][NH2:2].[C:3](=[O:4])([OH:5])[CH3:6]"
                             ">>[CH3:1][NH:2][C:3](=[O:4])[CH3:6]")
        keys = sorted(tpl.key for _, _, tpl in triples)
        assert len(keys) == 2

    def test_extraction_failure_is_reported_not_raised(self):
        # both synthon maps land in one reactant: no per-synthon host exists
        text = ("[CH2:1]=[CH:2][CH2:3][CH2:4][OH:5]"
                ">>[CH2:1]=[CH:2][CH2:3][CH2:4][OH:5]")
        triples, record = extract_reaction_templates(parse_reaction(text, "bad"))
        assert record.rxn_id == "bad"

    def test_key_is_stable_across_atom_order(self):
        a = extract_ok(ALKYLATION)
        b = extract_ok("[CH3:7]Br.[NH2:6][CH3:5]>>[CH3:7][NH:6][CH3:5]")
        assert sorted(t.key for _, _, t in a) == sorted(t.key for _, _, t in b)

    def test_corpus_extraction_round_trip(self, corpus):
        checked = 0
        for rxn in corpus[:60]:
            triples, record = extract_reaction_templates(rxn)
            if record.keys is None:
                continue
            for synthon, host, tpl in triples:
                rebuilt = apply_semi_template(synthon, tpl)
                assert same_molecule(rebuilt.without_maps(), host.without_maps())
                checked += 1
        assert checked > 50


class TestApplication:
    def test_hydrogen_underflow_raises(self):
        triples = extract_ok(ALKYLATION)
        methyl = next(s for s, _, _ in triples if len(s.graph.atoms) == 1)
        impossible = SemiTemplate(pattern=parse_smiles("[*:1]"),
                                  edits=((1, -5, 0, 0),), key="synthetic")
        with pytest.raises(TemplateApplyError):
            apply_semi_template(methyl, impossible)

    def test_element_pin_mismatch_raises(self):
        triples = extract_ok(ALKYLATION)
        methyl = next(s for s, _, _ in triples if len(s.graph.atoms) == 1)
        pinned = SemiTemplate(pattern=parse_smiles("[*:1]"),
                              edits=((1, 0, 0, 7),), key="synthetic")
        with pytest.raises(TemplateApplyError):
            apply_semi_template(methyl, pinned)

    def test_rebuilt_molecule_is_valence_legal(self):
        for synthon, _, tpl in extract_ok(ALKYLATION):
            rebuilt = apply_semi_template(synthon, tpl)
            for i in range(len(rebuilt.atoms)):
                assert rebuilt.valence_problem(i) is None

    def test_template_json_round_trip(self):
        for _, _, tpl in extract_ok(ALKYLATION):
            blob = json.dumps(tpl.to_json())
            back = SemiTemplate.from_json(json.loads(blob))
            assert back.key == tpl.key
            assert back.edits == tpl.edits


def replace_class(tpl: SemiTemplate, class_id: int) -> SemiTemplate:
    return SemiTemplate(pattern=tpl.pattern, edits=tpl.edits, key=tpl.key,
                        class_id=class_id, frequency=tpl.frequency)


class TestLibrary:
    def test_build_is_deterministic(self, corpus, library):
        again, _ = build_template_library(corpus, k=150)
        assert [t.key for t in again.templates] == [t.key for t in library.templates]
        assert again.pair_prior == library.pair_prior

    def test_classes_are_frequency_ranked(self, library):
        freqs = [t.frequency for t in library.templates]
        assert freqs == sorted(freqs, reverse=True)
        assert [t.class_id for t in library.templates] == list(
            range(1, len(library.templates) + 1))

    def test_uncovered_class_is_last(self, library):
        assert library.uncovered_class == library.k + 1
        assert library.n_classes == library.k + 1

    def test_class_lookup_round_trip(self, library):
        for tpl in library.templates:
            assert library.class_of(tpl.key) == tpl.class_id
            assert library.template_for_class(tpl.class_id).key == tpl.key

    def test_unknown_key_maps_to_uncovered(self, library):
        assert library.class_of("no-such-key") == library.uncovered_class

    def test_coverage_curve_monotone(self, library):
        rows = library.coverage_curve()
        assert rows[0][0] == 1
        semi = [r[1] for r in rows]
        full = [r[2] for r in rows]
        assert all(b >= a for a, b in zip(semi, semi[1:]))
        assert all(b >= a for a, b in zip(full, full[1:]))
        assert all(0.0 <= v <= 1.0 for v in semi + full)
        assert all(f <= s for s, f in zip(semi, full))

    def test_coverage_counts_match_totals(self, library, records):
        ok = sum(1 for r in records if r.keys is not None)
        n_syn = sum(len(r.keys) for r in records if r.keys is not None)
        assert library.total_reactions == len(records)
        assert library.total_synthons == n_syn
        assert library.failed_synthons == len(records) - ok

    def test_pair_prior_covers_all_training_pairs(self, library, records):
        for record in records:
            if record.keys is None or len(record.keys) != 2:
                continue
            classes = sorted(library.class_of(k) for k in record.keys)
            assert library.pair_count(classes[0], classes[1]) > 0

    def test_save_load_round_trip(self, library, tmp_path):
        path = tmp_path / "lib.json"
        library.save(str(path))
        back = TemplateLibrary.load(str(path))
        assert [t.key for t in back.templates] == [t.key for t in library.templates]
        assert back.pair_prior == library.pair_prior
        assert back.all_frequencies == library.all_frequencies
        # byte-identical on re-save
        path2 = tmp_path / "lib2.json"
        back.save(str(path2))
        assert path.read_bytes() == path2.read_bytes()

    def test_failures_carry_causes(self, records):
        failures = [r for r in records if r.keys is None]
        assert failures
        assert all(r.cause for r in failures)


class TestAppliedLibrary:
    def test_covered_class_templates_apply_to_their_synthons(self, corpus, library):
        applied = 0
        for rxn in corpus[:40]:
            triples, record = extract_reaction_templates(rxn)
            if record.keys is None:
                continue
            for synthon, host, tpl in triples:
                cls = library.class_of(tpl.key)
                if cls == library.uncovered_class:
                    continue
                rebuilt = apply_semi_template(synthon, library.template_for_class(cls))
                assert same_molecule(rebuilt.without_maps(), host.without_maps())
                applied += 1
        assert applied > 30
