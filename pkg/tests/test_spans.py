import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from compmine.core import TAG_IDS, TokenSpan, tags_for_quintuples
from compmine.errors import AllSetsEmpty
from compmine.spans import ElementSets, decode_spans, generate_quadruples


def tags(*names):
    return [TAG_IDS[n] for n in names]


class TestDecodeSpans:
    def test_basic_bio(self):
        sets = decode_spans(tags("O", "B-SUB", "I-SUB", "O", "B-PRED"))
        assert sets.subjects == {TokenSpan(1, 2)}
        assert sets.predicates == {TokenSpan(4, 4)}
        assert not sets.objects and not sets.aspects

    def test_lenient_orphan_inside(self):
        sets = decode_spans(tags("O", "I-ASP", "O"))
        assert sets.aspects == {TokenSpan(1, 1)}

    def test_all_outside(self):
        sets = decode_spans(tags("O", "O", "O"))
        assert not sets.any_present()

    def test_inside_after_different_kind_starts_new_span(self):
        sets = decode_spans(tags("B-SUB", "I-OBJ", "I-OBJ"))
        assert sets.subjects == {TokenSpan(0, 0)}
        assert sets.objects == {TokenSpan(1, 2)}

    def test_b_after_b_splits(self):
        sets = decode_spans(tags("B-PRED", "B-PRED"))
        assert sets.predicates == {TokenSpan(0, 0), TokenSpan(1, 1)}

    def test_logit_argmax_tie_prefers_lower_id(self):
        rows = np.zeros((2, 9))  # all-tie rows: O (id 0) must win
        assert not decode_spans(rows).any_present()

    def test_logits_decode(self):
        rows = np.full((3, 9), -1.0)
        rows[0, TAG_IDS["B-OBJ"]] = 2.0
        rows[1, TAG_IDS["I-OBJ"]] = 2.0
        rows[2, TAG_IDS["O"]] = 2.0
        assert decode_spans(rows).objects == {TokenSpan(0, 1)}

    @settings(max_examples=200)
    @given(st.data())
    def test_round_trip_on_non_adjacent_spans(self, data):
        # gold spans of the same kind separated by at least one token
        from compmine.core import Quintuple, sentence_from_tokens
        from compmine.spans import element_sets_of

        n = data.draw(st.integers(min_value=4, max_value=14))
        cursor = 0
        spans = []
        while cursor < n - 1 and len(spans) < 3:
            start = data.draw(st.integers(cursor, n - 1))
            end = data.draw(st.integers(start, min(start + 2, n - 1)))
            spans.append(TokenSpan(start, end))
            cursor = end + 2  # gap of one token keeps runs distinct
        kinds = [data.draw(st.sampled_from(["subject", "object", "aspect", "predicate"]))
                 for _ in spans]
        quintuples = []
        for kind, span in zip(kinds, spans):
            slots = {"subject": None, "object": None, "aspect": None, "predicate": None}
            slots[kind] = span
            quintuples.append(Quintuple(slots["subject"], slots["object"],
                                        slots["aspect"], slots["predicate"], "COM"))
        if not quintuples:
            return
        s = sentence_from_tokens("r", [f"w{i}" for i in range(n)], tuple(quintuples))
        decoded = decode_spans(tags_for_quintuples(s))
        assert decoded == element_sets_of(s)


def sets_of(**kwargs):
    return ElementSets(**{k: frozenset(v) for k, v in kwargs.items()})


class TestGenerateQuadruples:
    def test_product_count(self):
        sets = sets_of(
            subjects=[TokenSpan(0, 0), TokenSpan(2, 2)],
            objects=[TokenSpan(4, 4)],
            aspects=[TokenSpan(6, 6)],
            predicates=[TokenSpan(8, 8), TokenSpan(10, 10)],
        )
        quads, truncated = generate_quadruples(sets)
        assert len(quads) == 4
        assert not truncated

    def test_singletons_yield_single_quadruple(self):
        sets = sets_of(subjects=[TokenSpan(0, 0)], objects=[TokenSpan(1, 1)],
                       aspects=[TokenSpan(2, 2)], predicates=[TokenSpan(3, 3)])
        quads, _ = generate_quadruples(sets)
        assert quads == [(TokenSpan(0, 0), TokenSpan(1, 1), TokenSpan(2, 2), TokenSpan(3, 3))]

    def test_absent_slot(self):
        sets = sets_of(subjects=[TokenSpan(0, 0)], aspects=[TokenSpan(2, 2)],
                       predicates=[TokenSpan(3, 3)])
        quads, _ = generate_quadruples(sets)
        assert quads == [(TokenSpan(0, 0), None, TokenSpan(2, 2), TokenSpan(3, 3))]

    def test_all_empty_rejected(self):
        with pytest.raises(AllSetsEmpty):
            generate_quadruples(ElementSets())

    def test_cap_and_flag(self):
        sets = sets_of(
            subjects=[TokenSpan(i * 2, i * 2) for i in range(5)],
            predicates=[TokenSpan(20 + i * 2, 20 + i * 2) for i in range(5)],
        )
        quads, truncated = generate_quadruples(sets, cap=7)
        assert len(quads) == 7
        assert truncated

    def test_subject_major_deterministic_order(self):
        sets = sets_of(
            subjects=[TokenSpan(2, 2), TokenSpan(0, 0)],
            predicates=[TokenSpan(6, 6), TokenSpan(4, 4)],
        )
        quads, _ = generate_quadruples(sets)
        assert quads == [
            (TokenSpan(0, 0), None, None, TokenSpan(4, 4)),
            (TokenSpan(0, 0), None, None, TokenSpan(6, 6)),
            (TokenSpan(2, 2), None, None, TokenSpan(4, 4)),
            (TokenSpan(2, 2), None, None, TokenSpan(6, 6)),
        ]

    @settings(max_examples=100)
    @given(st.data())
    def test_count_formula(self, data):
        def draw_set(base):
            k = data.draw(st.integers(0, 3))
            return frozenset(TokenSpan(base + 2 * i, base + 2 * i) for i in range(k))

        sets = ElementSets(draw_set(0), draw_set(10), draw_set(20), draw_set(30))
        if not sets.any_present():
            return
        quads, truncated = generate_quadruples(sets, cap=256)
        expected = sets.combination_count()
        assert len(quads) == min(expected, 256)
        assert truncated == (expected > 256)
