import random
from collections import Counter

import pytest

from compmine.augment import (
    AugmentSpec,
    ElementDictionaries,
    build_dictionaries,
    generate_dataset,
    load_wordlist,
    merge_wordlist,
    synthesize_sentence,
    version_spec,
)
from compmine.core import (
    COMPARISON_LABELS,
    Dataset,
    Quintuple,
    TokenSpan,
    sentence_from_tokens,
)
from compmine.errors import (
    EmptyCorpus,
    MissingLabel,
    SlotUnavailable,
    TargetUnreachable,
)
from compmine.ingest import export_dataset


def simple_sentence(sid="t1", label="COM+"):
    # "A tốt hơn B": subject A, predicate "tốt hơn", object B
    q = Quintuple(TokenSpan(0, 0), TokenSpan(3, 3), None, TokenSpan(1, 2), label)
    return sentence_from_tokens(sid, ["A", "tốt", "hơn", "B"], (q,))


def full_dicts():
    d = ElementDictionaries(
        subjects=("A", "máy X"),
        objects=("B", "máy Y"),
        aspects=("pin",),
        predicates={l: (f"pred {l.lower()}",) for l in COMPARISON_LABELS},
    )
    return d


class TestBuildDictionaries:
    def test_direct_extraction(self):
        d = build_dictionaries(Dataset((simple_sentence(),)))
        assert d.subjects == ("A",)
        assert d.objects == ("B",)
        assert d.aspects == ()
        assert d.predicates == {"COM+": ("tốt hơn",)}
        assert d.warnings == ()

    def test_conflicting_predicate_listed_under_both_with_warning(self):
        corpus = Dataset((simple_sentence("a", "COM+"), simple_sentence("b", "EQL")))
        d = build_dictionaries(corpus)
        assert d.predicates["COM+"] == ("tốt hơn",)
        assert d.predicates["EQL"] == ("tốt hơn",)
        assert len(d.warnings) == 1
        assert "tốt hơn" in d.warnings[0]

    def test_empty_slot_contributes_nothing(self):
        q = Quintuple(None, None, None, TokenSpan(0, 0), "SUP")
        s = sentence_from_tokens("x", ["nhất"], (q,))
        d = build_dictionaries(Dataset((s,)))
        assert d.subjects == () and d.objects == () and d.aspects == ()

    def test_empty_corpus_rejected(self):
        with pytest.raises(EmptyCorpus):
            build_dictionaries(Dataset((sentence_from_tokens("p", ["x"]),)))


class TestMergeWordlist:
    def test_merge_subjects(self):
        d = merge_wordlist(ElementDictionaries(), "subject", ["iPhone 15", "Galaxy S23"])
        assert d.subjects == ("iPhone 15", "Galaxy S23")

    def test_duplicates_ignored(self):
        d = merge_wordlist(ElementDictionaries(subjects=("A",)), "subject", ["A", "A"])
        assert d.subjects == ("A",)

    def test_predicates_need_label(self):
        with pytest.raises(MissingLabel):
            merge_wordlist(ElementDictionaries(), "predicate", ["vượt trội hơn"])
        d = merge_wordlist(ElementDictionaries(), "predicate", ["vượt trội hơn"], label="COM+")
        assert d.predicates["COM+"] == ("vượt trội hơn",)

    def test_entries_normalized(self):
        d = merge_wordlist(ElementDictionaries(), "aspect", ["  pin trâu  "])
        assert d.aspects == ("pin trâu",)

    def test_wordlist_file_ignores_comments(self, tmp_path):
        p = tmp_path / "w.txt"
        p.write_text("# phones\niPhone 15\n\nGalaxy S23\n", encoding="utf-8")
        assert load_wordlist(p) == ["iPhone 15", "Galaxy S23"]


class TestSynthesize:
    def test_longer_subject_shifts_downstream_spans(self):
        d = ElementDictionaries(
            subjects=("điện thoại mới",),
            objects=("B",),
            predicates={"COM+": ("tốt hơn",)},
        )
        out = synthesize_sentence(simple_sentence(), d, random.Random(0))
        assert out.token_texts() == ["điện", "thoại", "mới", "tốt", "hơn", "B"]
        q = out.quintuples[0]
        assert q.subject == TokenSpan(0, 2)
        assert q.predicate == TokenSpan(3, 4)
        assert q.object == TokenSpan(5, 5)

    def test_label_follows_predicate_bucket(self):
        d = ElementDictionaries(
            subjects=("A",), objects=("B",),
            predicates={"SUP-": ("tệ nhất",)},
        )
        out = synthesize_sentence(simple_sentence(label="COM+"), d, random.Random(3))
        assert out.quintuples[0].label == "SUP-"

    def test_fixpoint_with_template_own_phrases(self):
        template = simple_sentence()
        d = ElementDictionaries(
            subjects=("A",), objects=("B",),
            predicates={"COM+": ("tốt hơn",)},
        )
        out = synthesize_sentence(template, d, random.Random(1))
        assert out.text == template.text
        assert out.quintuples == template.quintuples

    def test_empty_slot_raises(self):
        d = ElementDictionaries(subjects=(), objects=("B",),
                                predicates={"COM+": ("x",)})
        with pytest.raises(SlotUnavailable):
            synthesize_sentence(simple_sentence(), d, random.Random(0))

    def test_non_comparative_template_rejected(self):
        with pytest.raises(ValueError):
            synthesize_sentence(sentence_from_tokens("p", ["x"]), full_dicts(), random.Random(0))

    def test_multi_quintuple_template_substitutes_independently(self):
        q1 = Quintuple(TokenSpan(0, 0), None, None, TokenSpan(1, 1), "COM+")
        q2 = Quintuple(TokenSpan(0, 0), None, None, TokenSpan(3, 3), "EQL")
        template = sentence_from_tokens("m", ["A", "hơn", "và", "bằng"], (q1, q2))
        d = ElementDictionaries(
            subjects=("S",),
            predicates={l: (f"p{i}",) for i, l in enumerate(COMPARISON_LABELS)},
        )
        out = synthesize_sentence(template, d, random.Random(5))
        # shared subject region replaced once, both quintuples agree on it
        assert out.quintuples[0].subject == out.quintuples[1].subject

    def test_allowed_labels_restrict_buckets(self):
        out = synthesize_sentence(simple_sentence(), full_dicts(), random.Random(0),
                                  allowed_labels=["SUP"])
        assert out.quintuples[0].label == "SUP"


class TestGenerateDataset:
    def test_exact_targets_per_label(self):
        source = Dataset((simple_sentence(), sentence_from_tokens("p", ["nope"])))
        spec = AugmentSpec(targets={l: 2 for l in COMPARISON_LABELS}, seed=7)
        out = generate_dataset(source, full_dicts(), spec)
        synth = [s for s in out if s.id.startswith("syn-")]
        counts = Counter(q.label for s in synth for q in s.quintuples)
        assert counts == {l: 2 for l in COMPARISON_LABELS}
        assert sum(counts.values()) == 16
        # original sentences are retained in order
        assert [s.id for s in out][:2] == ["t1", "p"]

    def test_synthetic_labels_match_bucket(self):
        source = Dataset((simple_sentence(),))
        dicts = full_dicts()
        spec = AugmentSpec(targets={l: 3 for l in COMPARISON_LABELS}, seed=11)
        out = generate_dataset(source, dicts, spec)
        for s in out:
            if not s.id.startswith("syn-"):
                continue
            for q in s.quintuples:
                phrase = s.span_text(q.predicate)
                assert phrase in dicts.predicates[q.label]

    def test_deterministic_bytes(self, tmp_path):
        source = Dataset((simple_sentence(),))
        spec = AugmentSpec(targets={"DIF": 4, "COM": 3}, seed=23)
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        export_dataset(generate_dataset(source, full_dicts(), spec), a)
        export_dataset(generate_dataset(source, full_dicts(), spec), b)
        assert a.read_bytes() == b.read_bytes()

    def test_unreachable_label_raises(self):
        source = Dataset((simple_sentence(),))
        d = ElementDictionaries(subjects=("A",), objects=("B",),
                                predicates={"COM+": ("hơn",)})
        spec = AugmentSpec(targets={"DIF": 1}, seed=0, max_attempts=25)
        with pytest.raises(TargetUnreachable):
            generate_dataset(source, d, spec)

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            AugmentSpec(targets={"COM+": 0})
        with pytest.raises(ValueError):
            AugmentSpec(targets={"COM+": -1})

    def test_provenance_records_seed(self):
        source = Dataset((simple_sentence(),))
        spec = AugmentSpec(targets={"SUP": 1}, seed=99)
        out = generate_dataset(source, full_dicts(), spec)
        assert "seed=99" in out.provenance


class TestVersionSpec:
    def test_targets_subtract_source_counts(self):
        source = Dataset((simple_sentence(),))  # one COM+ quintuple
        spec = version_spec("v3", source, seed=1)
        assert spec.targets["COM+"] == 770 - 1
        assert spec.targets["DIF"] == 536

    def test_overfull_source_rejected(self):
        sentences = tuple(simple_sentence(f"s{i}", "SUP-") for i in range(700))
        with pytest.raises(TargetUnreachable):
            version_spec("v3", Dataset(sentences))

    def test_unknown_version(self):
        with pytest.raises(ValueError):
            version_spec("v9", Dataset((simple_sentence(),)))
