"""Tier construction, empirical CDFs, median spans, report shape."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dateval import (
    Corpus,
    CaptionSubCategory,
    DomainCode,
    EvalRecord,
    PROXY_NOTE,
    QualityTier,
    Task,
    build_tier_corpora,
    cdf_csv,
    default_safe_template,
    discrimination_report,
    empirical_cdf,
    median_span,
    report_to_dict,
    seeded_derangement,
)
from dateval.analysis import DEFAULT_GENERAL_TEMPLATE, DEFAULT_SPEECH_TEMPLATE


def record(rid, domain=DomainCode.SPEECH, references=("first ref", "second ref")):
    return EvalRecord(
        id=rid,
        task=Task.CAPTION,
        sub_category=CaptionSubCategory.LONG,
        domain=domain,
        candidate="model output",
        references=tuple(references),
    )


def corpus_of(records):
    return Corpus(records=tuple(records), task=Task.CAPTION)


class TestSafeTemplate:
    def test_all_speech(self):
        corpus = corpus_of([record("a"), record("b", DomainCode.SPEECH_MUSIC)])
        assert default_safe_template(corpus) == DEFAULT_SPEECH_TEMPLATE

    def test_mixed_domains(self):
        corpus = corpus_of([record("a"), record("b", DomainCode.MUSIC)])
        assert default_safe_template(corpus) == DEFAULT_GENERAL_TEMPLATE

    def test_empty_corpus_general(self):
        assert default_safe_template(corpus_of([])) == DEFAULT_GENERAL_TEMPLATE


class TestDerangement:
    def test_n2_is_swap(self):
        # the only derangement of two elements
        assert seeded_derangement(2, seed=123).tolist() == [1, 0]

    def test_rejects_small_n(self):
        with pytest.raises(ValueError):
            seeded_derangement(1, seed=0)

    def test_deterministic(self):
        a = seeded_derangement(12, seed=7)
        b = seeded_derangement(12, seed=7)
        assert np.array_equal(a, b)

    @given(st.integers(min_value=2, max_value=40), st.integers(min_value=0, max_value=50))
    @settings(max_examples=60)
    def test_no_fixed_points_and_permutation(self, n, seed):
        perm = seeded_derangement(n, seed)
        assert sorted(perm.tolist()) == list(range(n))
        assert not np.any(perm == np.arange(n))


class TestTierCorpora:
    def test_right_uses_second_reference(self):
        base = corpus_of([record("a"), record("b")])
        tiers = build_tier_corpora(base)
        for rec in tiers[QualityTier.RIGHT]:
            assert rec.candidate == "second ref"

    def test_right_falls_back_to_first(self):
        base = corpus_of(
            [record("a", references=("only",)), record("b", references=("solo",))]
        )
        tiers = build_tier_corpora(base)
        candidates = [rec.candidate for rec in tiers[QualityTier.RIGHT]]
        assert candidates == ["only", "solo"]

    def test_safe_constant_template(self):
        base = corpus_of([record("a"), record("b", DomainCode.MUSIC)])
        tiers = build_tier_corpora(base)
        assert {rec.candidate for rec in tiers[QualityTier.SAFE]} == {
            DEFAULT_GENERAL_TEMPLATE
        }

    def test_safe_template_override(self):
        base = corpus_of([record("a"), record("b")])
        tiers = build_tier_corpora(base, safe_template="Noises occur")
        assert all(
            rec.candidate == "Noises occur" for rec in tiers[QualityTier.SAFE]
        )

    def test_wrong_never_own_reference(self):
        base = corpus_of(
            [record(f"r{i}", references=(f"ref {i}", f"alt {i}")) for i in range(8)]
        )
        tiers = build_tier_corpora(base, seed=3)
        for i, rec in enumerate(tiers[QualityTier.WRONG]):
            assert rec.candidate != f"ref {i}"
            assert rec.candidate.startswith("ref ")

    def test_references_and_metadata_untouched(self):
        base = corpus_of([record("a"), record("b")])
        tiers = build_tier_corpora(base)
        for tier_corpus in tiers.values():
            for orig, rebuilt in zip(base, tier_corpus):
                assert rebuilt.id == orig.id
                assert rebuilt.references == orig.references
                assert rebuilt.sub_category == orig.sub_category

    def test_seed_changes_wrong_assignment(self):
        base = corpus_of(
            [record(f"r{i}", references=(f"ref {i}",)) for i in range(10)]
        )
        wrong = lambda s: [
            rec.candidate
            for rec in build_tier_corpora(base, seed=s)[QualityTier.WRONG]
        ]
        assert any(wrong(0) != wrong(s) for s in range(1, 5))

    def test_needs_two_records(self):
        with pytest.raises(ValueError):
            build_tier_corpora(corpus_of([record("a")]))


class TestEmpiricalCdf:
    def test_single_value(self):
        curve = empirical_cdf([0.5])
        assert curve.at(0.4) == 0.0
        assert curve.at(0.5) == 1.0
        assert curve.at(0.6) == 1.0

    def test_four_points(self):
        curve = empirical_cdf([0.2, 0.4, 0.6, 0.8])
        assert curve.at(0.4) == pytest.approx(0.5)
        assert curve.at(0.39) == pytest.approx(0.25)
        assert curve.at(1.0) == 1.0

    def test_duplicates_collapse(self):
        curve = empirical_cdf([0.3, 0.3, 0.3, 0.9])
        assert curve.points.tolist() == [0.3, 0.9]
        assert curve.at(0.3) == pytest.approx(0.75)

    def test_order_independent(self):
        a = empirical_cdf([0.1, 0.9, 0.5])
        b = empirical_cdf([0.9, 0.5, 0.1])
        assert np.array_equal(a.points, b.points)
        assert np.array_equal(a.fractions, b.fractions)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            empirical_cdf([])

    @given(
        st.lists(
            st.floats(min_value=0, max_value=1, allow_nan=False), min_size=1,
            max_size=50,
        ),
        st.floats(min_value=-0.5, max_value=1.5, allow_nan=False),
    )
    def test_matches_counting_oracle(self, scores, x):
        curve = empirical_cdf(scores)
        expected = sum(1 for s in scores if s <= x) / len(scores)
        assert curve.at(x) == pytest.approx(expected)

    @given(
        st.lists(
            st.floats(min_value=0, max_value=1, allow_nan=False), min_size=1,
            max_size=50,
        )
    )
    def test_monotone_ending_at_one(self, scores):
        curve = empirical_cdf(scores)
        fractions = curve.fractions
        assert np.all(np.diff(fractions) > 0) or len(fractions) == 1
        assert fractions[-1] == 1.0


class TestMedianSpan:
    def test_hand_example(self):
        assert median_span([0.8, 0.9, 1.0], [0.1, 0.2, 0.3]) == pytest.approx(70.0)

    def test_symmetry(self):
        a, b = [0.2, 0.5], [0.7, 0.9, 0.95]
        assert median_span(a, b) == median_span(b, a)

    def test_identical_samples_zero(self):
        assert median_span([0.4, 0.6], [0.4, 0.6]) == 0.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            median_span([], [0.5])


class TestReport:
    def scores(self):
        return {
            "date": {
                QualityTier.RIGHT: [0.8, 0.9],
                QualityTier.SAFE: [0.5, 0.55],
                QualityTier.WRONG: [0.1, 0.2],
            },
            "cosine": {
                QualityTier.RIGHT: [0.9, 0.92],
                QualityTier.SAFE: [0.93, 0.94],
                QualityTier.WRONG: [0.85, 0.86],
            },
        }

    def test_medians_scaled_and_spans(self):
        report = discrimination_report(self.scores())
        date = report.metrics[0]
        assert date.metric == "date"
        assert date.medians["Right"] == pytest.approx(85.0)
        assert date.medians["Wrong"] == pytest.approx(15.0)
        assert date.right_wrong_span == pytest.approx(70.0)
        assert date.right_safe_span == pytest.approx(32.5)

    def test_ordering_flags(self):
        report = discrimination_report(self.scores())
        date, cosine = report.metrics
        assert date.ordered_right_above_safe and date.ordered_safe_above_wrong
        # cosine's safe tier outranks right here
        assert not cosine.ordered_right_above_safe
        assert cosine.ordered_safe_above_wrong

    def test_note_attached(self):
        assert discrimination_report(self.scores()).note == PROXY_NOTE

    def test_missing_tier_rejected(self):
        scores = self.scores()
        del scores["date"][QualityTier.SAFE]
        with pytest.raises(ValueError, match="Safe"):
            discrimination_report(scores)

    def test_degenerate_all_equal(self):
        scores = {
            "flat": {tier: [0.5, 0.5] for tier in QualityTier}
        }
        report = discrimination_report(scores)
        flat = report.metrics[0]
        assert flat.right_wrong_span == 0.0
        assert not flat.ordered_right_above_safe
        assert not flat.ordered_safe_above_wrong

    def test_report_to_dict_shape(self):
        payload = report_to_dict(discrimination_report(self.scores()))
        assert payload["note"] == PROXY_NOTE
        entry = payload["metrics"][0]
        assert set(entry["curves"]) == {"Right", "Safe", "Wrong"}
        curve = entry["curves"]["Right"]
        assert isinstance(curve["points"], list)
        assert len(curve["points"]) == len(curve["fractions"])

    def test_cdf_csv_format(self):
        text = cdf_csv(discrimination_report(self.scores()))
        lines = text.splitlines()
        assert lines[0] == "metric,tier,x,cdf"
        first = lines[1].split(",")
        assert first[0] == "date" and first[1] == "Right"
        assert float(first[2]) == pytest.approx(0.8)
        assert float(first[3]) == pytest.approx(0.5)
        assert text.endswith("\n")
