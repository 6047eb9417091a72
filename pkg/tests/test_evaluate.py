import random

import pytest

from compmine.core import Dataset, Quintuple, TokenSpan, sentence_from_tokens
from compmine.errors import IdMismatch
from compmine.evaluate import EvalReport, e_t5_macro, match_quintuples, stage_metrics
from compmine.spans import ElementSets, element_sets_of

from oracle import oracle_macro


def q(start, end, label, slot="predicate"):
    slots = {"subject": None, "object": None, "aspect": None, "predicate": None}
    slots[slot] = TokenSpan(start, end)
    return Quintuple(slots["subject"], slots["object"], slots["aspect"],
                     slots["predicate"], label)


def ds(*sentence_quintuples):
    sentences = []
    for i, quintuples in enumerate(sentence_quintuples):
        sentences.append(
            sentence_from_tokens(f"s{i}", ["w"] * 8, tuple(quintuples))
        )
    return Dataset(tuple(sentences))


class TestMatchQuintuples:
    def test_identical_singletons(self):
        g = [q(0, 0, "COM+")]
        assert match_quintuples(g, list(g)) == [(0, 0)]

    def test_label_must_match(self):
        assert match_quintuples([q(0, 0, "COM+")], [q(0, 0, "EQL")]) == []

    def test_duplicate_predictions_match_once(self):
        gold = [q(0, 0, "COM+")]
        pred = [q(0, 0, "COM+"), q(0, 0, "COM+")]
        assert match_quintuples(gold, pred) == [(0, 0)]

    def test_span_must_match(self):
        assert match_quintuples([q(0, 0, "COM+")], [q(0, 1, "COM+")]) == []


class TestMacro:
    def test_perfect_predictions(self):
        gold = ds([q(0, 0, "COM+")], [q(1, 2, "EQL"), q(3, 3, "DIF")])
        report = e_t5_macro(gold, gold)
        assert report.macro_precision == 1.0
        assert report.macro_recall == 1.0
        assert report.macro_f1 == 1.0

    def test_hand_enumerated_mixed_case(self):
        gold = ds([q(0, 0, "COM+"), q(2, 2, "COM+")])
        pred = ds([q(0, 0, "COM+"), q(4, 4, "EQL")])
        report = e_t5_macro(gold, pred)
        com = report.per_label["COM+"]
        assert com.precision == 1.0
        assert com.recall == 0.5
        assert com.f1 == pytest.approx(2 / 3)
        assert report.per_label["EQL"].f1 == 0.0
        assert report.macro_f1 == pytest.approx(1 / 3)

    def test_empty_predictions(self):
        gold = ds([q(0, 0, "COM+")])
        pred = ds([])
        assert e_t5_macro(gold, pred).macro_f1 == 0.0

    def test_fixed8_averages_all_labels(self):
        gold = ds([q(0, 0, "COM+")])
        report = e_t5_macro(gold, gold, average="fixed8")
        assert report.included_labels == tuple(
            ["DIF", "EQL", "SUP+", "SUP-", "SUP", "COM+", "COM-", "COM"])
        assert report.macro_f1 == pytest.approx(1 / 8)

    def test_id_mismatch(self):
        gold = ds([q(0, 0, "COM+")])
        other = Dataset((sentence_from_tokens("other", ["w"]),))
        with pytest.raises(IdMismatch):
            e_t5_macro(gold, other)

    def test_symmetry_swaps_p_and_r(self):
        gold = ds([q(0, 0, "COM+"), q(2, 2, "COM+")], [q(1, 1, "EQL")])
        pred = ds([q(0, 0, "COM+")], [q(1, 1, "EQL"), q(3, 3, "SUP")])
        a = e_t5_macro(gold, pred)
        b = e_t5_macro(pred, gold)
        assert a.macro_precision == b.macro_recall
        assert a.macro_recall == b.macro_precision

    def test_monotonicity_adding_exact_match(self):
        gold = ds([q(0, 0, "COM+"), q(2, 2, "EQL")])
        pred_before = ds([q(0, 0, "COM+")])
        pred_after = ds([q(0, 0, "COM+"), q(2, 2, "EQL")])
        before = e_t5_macro(gold, pred_before)
        after = e_t5_macro(gold, pred_after)
        assert after.macro_recall >= before.macro_recall

    def test_report_json_round_trip(self):
        gold = ds([q(0, 0, "COM+"), q(2, 2, "COM+")])
        pred = ds([q(0, 0, "COM+"), q(4, 4, "EQL")])
        report = e_t5_macro(gold, pred)
        assert EvalReport.from_json(report.to_json()) == report

    def test_values_in_unit_interval_and_harmonic(self):
        rng = random.Random(5)
        gold, pred = random_instance(rng)
        report = e_t5_macro(gold, pred)
        for score in report.per_label.values():
            assert 0.0 <= score.precision <= 1.0
            assert 0.0 <= score.recall <= 1.0
            if score.precision + score.recall:
                expected = (2 * score.precision * score.recall
                            / (score.precision + score.recall))
                assert score.f1 == pytest.approx(expected)
            else:
                assert score.f1 == 0.0


def random_instance(rng):
    """Small paired datasets over a tiny tuple pool to force collisions."""
    pool_spans = [(0, 0), (1, 1), (0, 1), (2, 3)]
    pool_labels = ["COM+", "EQL", "SUP-"]
    slots = ["subject", "object", "aspect", "predicate"]

    def random_tuples():
        return [
            q(*rng.choice(pool_spans), rng.choice(pool_labels), slot=rng.choice(slots))
            for _ in range(rng.randint(0, 3))
        ]

    n = rng.randint(1, 5)
    gold_sentences = []
    pred_sentences = []
    for i in range(n):
        gold_sentences.append(sentence_from_tokens(f"s{i}", ["w"] * 6,
                                                   tuple(random_tuples())))
        pred_sentences.append(sentence_from_tokens(f"s{i}", ["w"] * 6,
                                                   tuple(random_tuples())))
    return Dataset(tuple(gold_sentences)), Dataset(tuple(pred_sentences))


class TestOracleEquivalence:
    @pytest.mark.parametrize("seed", range(8))
    @pytest.mark.parametrize("average", ["present", "fixed8"])
    def test_matches_brute_force(self, seed, average):
        rng = random.Random(seed)
        for _ in range(150):
            gold, pred = random_instance(rng)
            report = e_t5_macro(gold, pred, average=average)
            op, orc, of1, _ = oracle_macro(gold, pred, average=average)
            assert report.macro_precision == pytest.approx(op, abs=1e-12)
            assert report.macro_recall == pytest.approx(orc, abs=1e-12)
            assert report.macro_f1 == pytest.approx(of1, abs=1e-12)


class TestStageMetrics:
    def test_identical_trace_scores_one(self):
        gold = ds([q(0, 0, "COM+")], [])
        trace = {
            s.id: {"comparative": s.is_comparative, "sets": element_sets_of(s)}
            for s in gold
        }
        stage1, stage2 = stage_metrics(gold, trace)
        assert stage1.accuracy == 1.0 and stage1.f1 == 1.0
        assert stage2["predicate"].f1 == 1.0

    def test_off_by_one_span_is_a_miss(self):
        gold = ds([q(0, 0, "COM+")])
        trace = {
            "s0": {"comparative": True,
                   "sets": ElementSets(predicates=frozenset({TokenSpan(0, 1)}))}
        }
        _, stage2 = stage_metrics(gold, trace)
        assert stage2["predicate"].matched == 0
        assert stage2["predicate"].f1 == 0.0

    def test_all_negative_trace_on_skewed_distribution(self):
        # 808 comparative vs 3359 plain sentences; saying "non-comparative"
        # to everything is right 80.6% of the time
        sentences = []
        for i in range(808):
            sentences.append(sentence_from_tokens(f"c{i}", ["w"] * 2,
                                                  (q(0, 0, "COM+"),)))
        for i in range(3359):
            sentences.append(sentence_from_tokens(f"p{i}", ["w"]))
        gold = Dataset(tuple(sentences))
        trace = {s.id: {"comparative": False, "sets": ElementSets()} for s in gold}
        stage1, _ = stage_metrics(gold, trace)
        assert stage1.accuracy == pytest.approx(3359 / 4167)
        assert round(stage1.accuracy, 3) == 0.806
        assert stage1.recall == 0.0

    def test_trace_id_mismatch(self):
        gold = ds([q(0, 0, "COM+")])
        with pytest.raises(IdMismatch):
            stage_metrics(gold, {})
