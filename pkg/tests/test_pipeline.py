import math
from dataclasses import replace

import numpy as np
import pytest

from morphlex.embeddings import EmbeddingSpace
from morphlex.morph import UniMorphEntry, parse_tag, learn_analyzer, learn_inflector
from morphlex.pipeline import (
    MODE_BASE,
    MODE_HYBRID,
    MODE_ORACLE,
    ROUTE_DIRECT,
    ROUTE_LEMMA,
    JointConfig,
    TranslationCandidate,
    UntranslatableError,
    joint_log_prob,
    translate_base,
    translate_direct,
    translate_hybrid,
    translate_oracle,
)
from morphlex.translator import TranslationModel

TAG = parse_tag("V;PRS;1;SG")
TAG_NFIN = parse_tag("V;NFIN")


def tiny_setup():
    """Hand-built bilingual world small enough to trace by hand.

    Source: lemma "saltar" (rank 0), form "salto" (rank 1).
    Target: lemma "springen" (rank 0); inflector realizes V;PRS;1;SG as
    "springe". Identity omega over a shared 2-d geometry: saltar's vector
    equals springen's, so the lemma route must fire exactly.
    """
    source = EmbeddingSpace(
        ("saltar", "salto"), np.array([[1.0, 0.0], [0.0, 1.0]])
    )
    target = EmbeddingSpace(
        ("springen", "springe"), np.array([[1.0, 0.0], [0.0, 1.0]])
    )
    analyzer = learn_analyzer(
        [
            UniMorphEntry("saltar", "saltar", TAG_NFIN),
            UniMorphEntry("saltar", "salto", TAG),
        ]
    )
    inflector = learn_inflector(
        [
            UniMorphEntry("springen", "springen", TAG_NFIN),
            UniMorphEntry("springen", "springe", TAG),
        ]
    )
    model = TranslationModel(np.eye(2), 2)
    return JointConfig(MODE_BASE, model, source, target, analyzer, inflector)


class TestTranslateBase:
    def test_composes_the_three_stages(self):
        config = tiny_setup()
        candidate = translate_base(config, "salto")
        assert candidate.form == "springe"
        assert candidate.tag == TAG
        assert candidate.route == ROUTE_LEMMA
        # analyzer: "o" -> ("ar", TAG) is the only analysis, p = 1.
        assert candidate.analyzer_log_prob == pytest.approx(0.0)
        assert candidate.inflector_log_prob == pytest.approx(0.0)
        assert candidate.translator_log_prob is not None
        assert candidate.translator_log_prob <= 0.0

    def test_identity_composition(self):
        # Shared space, identity omega, identical morphologies: the
        # pipeline must map a form back to itself.
        space = EmbeddingSpace(
            ("cantar", "canto"), np.array([[1.0, 0.0], [0.0, 1.0]])
        )
        entries = [
            UniMorphEntry("cantar", "cantar", TAG_NFIN),
            UniMorphEntry("cantar", "canto", TAG),
        ]
        config = JointConfig(
            MODE_BASE,
            TranslationModel(np.eye(2), 2),
            space,
            space,
            learn_analyzer(entries),
            learn_inflector(entries),
        )
        assert translate_base(config, "canto").form == "canto"
        assert translate_base(config, "cantar").form == "cantar"

    def test_junk_is_untranslatable(self):
        config = tiny_setup()
        with pytest.raises(UntranslatableError):
            translate_base(config, "zzzz")

    def test_unanalyzable_in_vocab_form_falls_back_to_direct(self):
        config = tiny_setup()
        # An analyzer with only the "o" rule cannot analyze "xyz"; the
        # form is in the space, so the direct route must still fire.
        analyzer = learn_analyzer([UniMorphEntry("saltar", "salto", TAG)])
        source = EmbeddingSpace(
            ("saltar", "salto", "xyz"),
            np.vstack([config.source_space.vectors, [[1.0, 1.0]]]),
        )
        config = replace(config, source_space=source, analyzer=analyzer)
        candidate = translate_base(config, "xyz")
        assert candidate.route == ROUTE_DIRECT
        assert candidate.analyzer_log_prob is None
        assert candidate.inflector_log_prob is None

    def test_wrong_mode_rejected(self):
        config = replace(tiny_setup(), mode=MODE_HYBRID)
        with pytest.raises(ValueError):
            translate_base(config, "salto")

    def test_oov_lemma_composed_from_ngrams(self):
        config = tiny_setup()
        # Remove the lemma from the space; supply an n-gram table that
        # reconstructs its old vector.
        source = EmbeddingSpace(("salto",), np.array([[0.0, 1.0]]))
        table = {"<sal": np.array([1.0, 0.0]), "tar>": np.array([0.0, 0.0])}
        config = replace(config, source_space=source, ngram_table=table)
        candidate = translate_base(config, "salto")
        assert candidate.route == ROUTE_LEMMA
        assert candidate.form == "springe"

    def test_composed_vectors_follow_space_preprocessing(self):
        # A preprocessed space normalizes composed vectors and shifts them
        # by the stored training mean before mapping.
        from morphlex.pipeline import _resolve_source_vector

        config = tiny_setup()
        center = np.array([0.25, -0.5])
        source = replace(
            config.source_space, unit_normalized=True, center=center
        )
        table = {"<neu": np.array([3.0, 4.0])}
        config = replace(config, source_space=source, ngram_table=table)
        resolved = _resolve_source_vector(config, "neu")
        np.testing.assert_allclose(resolved, np.array([0.6, 0.8]) - center)


class TestTranslateHybrid:
    def test_frequent_irregular_goes_direct(self):
        # The surface form outranks its lemma, mirroring a frequent
        # irregular: rank(form)=0 < rank(lemma)=1.
        source = EmbeddingSpace(
            ("dice", "decir"), np.array([[0.0, 1.0], [1.0, 0.0]])
        )
        target = EmbeddingSpace(
            ("sagt", "sagen"), np.array([[0.0, 1.0], [1.0, 0.0]])
        )
        analyzer = learn_analyzer(
            [
                UniMorphEntry("decir", "decir", TAG_NFIN),
                UniMorphEntry("decir", "dice", TAG),
            ]
        )
        inflector = learn_inflector(
            [
                UniMorphEntry("sagen", "sagen", TAG_NFIN),
                UniMorphEntry("sagen", "sagt", TAG),
            ]
        )
        config = JointConfig(
            MODE_HYBRID, TranslationModel(np.eye(2), 2), source, target, analyzer, inflector
        )
        candidate = translate_hybrid(config, "dice")
        assert candidate.route == ROUTE_DIRECT
        assert candidate.form == "sagt"

    def test_rare_regular_equals_base(self):
        config = replace(tiny_setup(), mode=MODE_HYBRID)
        # rank(saltar)=0 < rank(salto)=1: identical to the base output.
        hybrid = translate_hybrid(config, "salto")
        base = translate_base(replace(config, mode=MODE_BASE), "salto")
        assert hybrid == base

    def test_form_equal_to_its_lemma_goes_direct(self):
        config = replace(tiny_setup(), mode=MODE_HYBRID)
        # "saltar" analyzes to itself: equal rank, strict inequality fails.
        candidate = translate_hybrid(config, "saltar")
        assert candidate.route == ROUTE_DIRECT

    def test_lemma_absent_from_space_goes_direct(self):
        source = EmbeddingSpace(("salto",), np.array([[0.0, 1.0]]))
        target = EmbeddingSpace(("springe",), np.array([[0.0, 1.0]]))
        analyzer = learn_analyzer([UniMorphEntry("saltar", "salto", TAG)])
        inflector = learn_inflector([UniMorphEntry("springen", "springe", TAG)])
        config = JointConfig(
            MODE_HYBRID, TranslationModel(np.eye(2), 1), source, target, analyzer, inflector
        )
        candidate = translate_hybrid(config, "salto")
        assert candidate.route == ROUTE_DIRECT
        assert candidate.form == "springe"

    def test_oov_form_with_in_vocab_lemma_goes_through_lemma(self):
        config = replace(tiny_setup(), mode=MODE_HYBRID)
        source = EmbeddingSpace(("saltar",), np.array([[1.0, 0.0]]))
        config = replace(config, source_space=source)
        # "salto" has no rank at all; the lemma is rank 0, so inf > 0.
        candidate = translate_hybrid(config, "salto")
        assert candidate.route == ROUTE_LEMMA
        assert candidate.form == "springe"


class TestTranslateOracle:
    def test_matches_base_with_certain_analyzer(self):
        config = tiny_setup()
        oracle_config = replace(config, mode=MODE_ORACLE)
        base = translate_base(config, "salto")
        oracle = translate_oracle(oracle_config, "salto", "saltar", TAG)
        assert oracle.form == base.form == "springe"
        assert oracle.analyzer_log_prob == 0.0
        assert oracle.translator_log_prob == base.translator_log_prob
        assert oracle.inflector_log_prob == base.inflector_log_prob

    def test_unknown_gold_tag_propagates(self):
        config = replace(tiny_setup(), mode=MODE_ORACLE)
        from morphlex.morph import UnknownTagError

        with pytest.raises(UnknownTagError):
            translate_oracle(config, "salto", "saltar", parse_tag("N;PL"))

    def test_unresolvable_gold_lemma_has_no_fallback(self):
        config = replace(tiny_setup(), mode=MODE_ORACLE)
        with pytest.raises(UntranslatableError):
            translate_oracle(config, "salto", "zzzz", TAG)


class TestJointLogProb:
    def test_lemma_route_sum(self):
        candidate = TranslationCandidate(
            "x", TAG, ROUTE_LEMMA, -0.1, -0.5, -0.2
        )
        assert joint_log_prob(candidate) == pytest.approx(-0.8)

    def test_direct_route_single_factor(self):
        candidate = TranslationCandidate("x", None, ROUTE_DIRECT, None, -0.5, None)
        assert joint_log_prob(candidate) == pytest.approx(-0.5)

    def test_oracle_candidate_skips_nothing_but_analyzer_mass(self):
        candidate = TranslationCandidate("x", TAG, ROUTE_LEMMA, 0.0, -0.4, -0.3)
        assert joint_log_prob(candidate) == pytest.approx(-0.7)

    def test_sum_is_bit_exact(self):
        parts = (-0.123456789, -1.5, -2.25)
        candidate = TranslationCandidate("x", TAG, ROUTE_LEMMA, *parts)
        assert joint_log_prob(candidate) == sum(parts)

    def test_pipeline_candidate_decomposition(self):
        config = tiny_setup()
        candidate = translate_base(config, "salto")
        expected = (
            candidate.analyzer_log_prob
            + candidate.translator_log_prob
            + candidate.inflector_log_prob
        )
        assert joint_log_prob(candidate) == expected

    def test_all_scores_nonpositive(self):
        config = tiny_setup()
        for form in ("salto", "saltar"):
            candidate = translate_base(config, form)
            for part in (
                candidate.analyzer_log_prob,
                candidate.translator_log_prob,
                candidate.inflector_log_prob,
            ):
                if part is not None:
                    assert part <= 0.0 and math.isfinite(part)


class TestDirect:
    def test_direct_never_uses_morphology(self):
        config = tiny_setup()
        candidate = translate_direct(config, "salto")
        assert candidate.route == ROUTE_DIRECT
        assert candidate.tag is None
        assert candidate.analyzer_log_prob is None
        assert candidate.inflector_log_prob is None

    def test_fallback_soundness(self):
        # Anything the direct translator handles never raises in base mode.
        config = tiny_setup()
        for word in config.source_space.words:
            translate_direct(config, word)  # must not raise
            translate_base(config, word)  # must not raise either
