"""Acceptance suite: one test per release criterion, at its stated tolerance.

Everything here runs offline with the mock providers. A terminal-summary hook
in conftest prints one PASS/FAIL line per criterion at the end of the run.
"""

import json
import math
import random
import time
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import rank_screens
from strategies import raw_model_output, semantic_records
from uisearch.cli import main as cli_main
from uisearch.errors import StoreError
from uisearch.evalkit import (
    multilabel_prf,
    per_class_classification_report,
    topk_accuracy,
)
from uisearch.extraction import repair_yaml
from uisearch.providers import MockEmbeddingProvider
from uisearch.retrieval import (
    FacetClause,
    FlowDirection,
    MissingFacetPolicy,
    SemanticQuery,
    flow_search,
    search,
)
from uisearch.schema import FacetId, parse_record, serialize_record
from uisearch.store import VectorStore, embed_texts, index_screen, load_store, save_store

from conftest import ExplicitProvider, build_record, explicit_entry, mock_store, unit32
from test_evalkit import four_sample_multilabel_fixture, ten_sample_fixture
from test_retrieval import basis, random_query

ASSETS = Path(__file__).resolve().parents[1] / "assets" / "sample_screens"
GOLDEN = Path(__file__).resolve().parent / "data" / "golden_search.json"

ROLE = FacetId.SCREEN_ROLE
MOOD = FacetId.MOOD


@pytest.fixture(scope="module")
def big_store():
    return mock_store(200)


class TestRetrievalOracleEquivalence:
    def test_top15_matches_brute_force_oracle_under_two_seconds(self, big_store):
        store, provider = big_store
        rng = random.Random(2026)
        elapsed = 0.0
        for _ in range(50):
            query = random_query(rng, k=15)
            start = time.perf_counter()
            response = search(store, query, provider)
            elapsed += time.perf_counter() - start

            query_vectors = {
                c.facet: embed_texts([c.text], provider)[0] for c in query.clauses}
            expected = rank_screens(
                store.entries, [(c.facet, c.weight) for c in query.clauses],
                query_vectors, 15, query.missing_facet_policy.value)
            assert [r.screen_id for r in response.overall] == [e[0] for e in expected]
            for got, want in zip(response.overall, expected):
                assert abs(got.overall_score - want[1]) <= 1e-9
        assert elapsed < 2.0, f"50 searches took {elapsed:.3f}s"


class TestWeightScaleInvariance:
    def test_hundred_random_scales_leave_ordering_identical(self, big_store):
        store, provider = big_store
        rng = random.Random(31)
        for _ in range(100):
            query = random_query(rng, k=15)
            scale = rng.uniform(1e-6, 100.0)
            scaled = SemanticQuery(
                tuple(FacetClause(c.facet, c.text, c.weight * scale) for c in query.clauses),
                k=query.k, missing_facet_policy=query.missing_facet_policy)
            before = search(store, query, provider)
            after = search(store, scaled, provider)
            assert [r.screen_id for r in before.overall] == [r.screen_id for r in after.overall]
            for x, y in zip(before.overall, after.overall):
                assert abs(x.overall_score - y.overall_score) <= 1e-12


class TestMissingFacetPolicies:
    def build(self, policy):
        # e_full: role sim 0.5, mood sim 0.25; e_partial: role sim 0.75, no mood.
        # All similarities dyadic, so the hand-derived scores are float-exact.
        entries = [
            explicit_entry("e_full", {
                ROLE: unit32([0.5, math.sqrt(0.75), 0, 0]),
                MOOD: unit32([0, 0, 0.25, math.sqrt(1 - 0.0625)]),
            }),
            explicit_entry("e_partial", {
                ROLE: unit32([0.75, math.sqrt(1 - 0.5625), 0, 0]),
            }),
        ]
        store = VectorStore(4, "explicit:0", entries)
        provider = ExplicitProvider(4, {"role query": basis(4, 0), "mood query": basis(4, 2)})
        query = SemanticQuery(
            (FacetClause(ROLE, "role query", 0.5), FacetClause(MOOD, "mood query", 0.5)),
            k=2, missing_facet_policy=policy)
        return search(store, query, provider)

    def test_penalize_zero_exact_hand_values(self):
        response = self.build(MissingFacetPolicy.PENALIZE_ZERO)
        scores = {r.screen_id: r.overall_score for r in response.overall}
        assert scores["e_full"] == 0.5 * 0.5 + 0.5 * 0.25      # 0.375
        assert scores["e_partial"] == 0.5 * 0.75               # 0.375
        assert [r.screen_id for r in response.overall] == ["e_full", "e_partial"]  # id tie-break

    def test_renormalize_exact_hand_values(self):
        response = self.build(MissingFacetPolicy.RENORMALIZE)
        scores = {r.screen_id: r.overall_score for r in response.overall}
        assert scores["e_full"] == 0.375
        assert scores["e_partial"] == 0.75  # lone clause renormalized to weight 1


class TestFlowQueryCorrectness:
    def test_matching_screen_role_is_rank_one_with_unit_similarity(self):
        provider = MockEmbeddingProvider(dimension=64, seed=0)
        store = VectorStore(64, provider.tag)
        shared = "An order review screen listing items, totals, and a pay button."
        index_screen(store, build_record(
            screen_role="A cart screen.", next_screen=shared),
            "img/A.png", provider, screen_id="A")
        index_screen(store, build_record(screen_role=shared),
                     "img/B.png", provider, screen_id="B")
        index_screen(store, build_record(screen_role="A profile screen."),
                     "img/C.png", provider, screen_id="C")

        top = flow_search(store, "A", FlowDirection.NEXT, k=1, provider=provider)
        assert top[0].screen_id == "B"
        assert abs(top[0].overall_score - 1.0) <= 1e-6  # float32 unit-norm tolerance

        everything = flow_search(store, "A", FlowDirection.NEXT, k=10, provider=provider)
        assert "A" not in [r.screen_id for r in everything]


class TestSchemaRoundTrip:
    @settings(max_examples=500, deadline=None)
    @given(record=semantic_records())
    def test_five_hundred_fuzzed_records_roundtrip(self, record):
        assert parse_record(serialize_record(record)) == record

    @settings(max_examples=1000, deadline=None)
    @given(raw=raw_model_output)
    def test_thousand_fuzzed_strings_repair_idempotent(self, raw):
        once = repair_yaml(raw)
        assert repair_yaml(once) == once


class TestMetricFixtures:
    def test_topk_fixture_exact(self):
        assert topk_accuracy(ten_sample_fixture(), 1) == 0.6

    def test_multilabel_fixture_exact(self):
        report = multilabel_prf(four_sample_multilabel_fixture(), ["A", "B"])
        assert abs(report.overall["weighted_precision"] - 0.8) <= 1e-9
        assert abs(report.per_class["A"]["precision"] - 2 / 3) <= 1e-9
        assert abs(report.per_class["A"]["recall"] - 2 / 3) <= 1e-9
        assert abs(report.per_class["A"]["f1"] - 2 / 3) <= 1e-9
        assert abs(report.per_class["B"]["precision"] - 1.0) <= 1e-9
        assert abs(report.per_class["B"]["recall"] - 0.5) <= 1e-9
        assert abs(report.per_class["B"]["f1"] - 2 / 3) <= 1e-9

    @settings(max_examples=100, deadline=None)
    @given(data=st.data())
    def test_report_scalar_consistency_on_fuzzed_sets(self, data):
        labels = ["a", "b", "c", "d"]
        count = data.draw(st.integers(min_value=1, max_value=15))
        samples = []
        for i in range(count):
            gold = data.draw(st.sampled_from(labels))
            size = data.draw(st.integers(min_value=1, max_value=4))
            predictions = data.draw(st.permutations(labels))[:size]
            from uisearch.evalkit import ClassificationSample
            samples.append(ClassificationSample(str(i), gold, tuple(predictions)))
        report = per_class_classification_report(samples, labels)
        assert report.overall["top1_accuracy"] == topk_accuracy(samples, 1)
        assert report.overall["top3_accuracy"] == topk_accuracy(samples, 3)
        assert sum(r["support"] for r in report.per_class.values()) == len(samples)


class TestPersistence:
    def test_fifty_entry_roundtrip_and_corruption_detection(self, tmp_path):
        store, _ = mock_store(50)
        destination = tmp_path / "fifty"
        save_store(store, destination)
        loaded = load_store(destination)
        assert loaded == store
        for original, restored in zip(store.entries, loaded.entries):
            assert original.record == restored.record
            for facet, embedding in original.embeddings.items():
                assert np.array_equal(embedding.vector, restored.embeddings[facet].vector)

        vectors = destination / "vectors.f32"
        vectors.write_bytes(vectors.read_bytes()[:-4])
        with pytest.raises(StoreError, match="checksum"):
            load_store(destination)


class TestEndToEndGolden:
    def test_mock_ingest_plus_search_matches_committed_golden(self, tmp_path, capsys):
        store_dir = tmp_path / "golden_store"
        assert cli_main(["ingest", str(ASSETS), "--store", str(store_dir),
                         "--mock", "--seed", "0", "--json"]) == 0
        capsys.readouterr()
        assert cli_main(["search", "--store", str(store_dir),
                         "--clause", "screen_role=checkout summary:2",
                         "--clause", "mood=minimal:1", "-k", "15", "--json"]) == 0
        out = capsys.readouterr().out
        assert out == GOLDEN.read_text()
        json.loads(out)  # stays a single valid JSON document


@pytest.mark.skipif(
    "UISEARCH_MLLM_BASE_URL" not in __import__("os").environ,
    reason="live extraction smoke needs UISEARCH_MLLM_* provider configuration",
)
class TestLiveExtractionSmoke:
    def test_five_screens_mostly_clean(self, tmp_path):
        import os

        from uisearch.extraction import ExtractionConfig, extract_semantics, load_image
        from uisearch.providers import HttpMllmClient, ProviderSettings
        from uisearch.schema import default_vocabulary, validate_record

        vocab = default_vocabulary()
        client = HttpMllmClient(ProviderSettings.from_env("UISEARCH_MLLM"))
        clean = 0
        for path in sorted(ASSETS.iterdir())[:5]:
            config = ExtractionConfig(transcript_dir=str(tmp_path), transcript_label=path.stem)
            outcome = extract_semantics(load_image(path.read_bytes()), client, vocab, config)
            if validate_record(outcome.record, vocab).is_valid:
                clean += 1
        assert clean >= 4
        transcript = next(tmp_path.glob("*.request.txt")).read_text()
        import re
        assert re.findall(r"<(\w+)>", transcript)[:5] == [
            "persona", "task_instruction", "feature_list", "feature_definitions",
            "response_form"]
