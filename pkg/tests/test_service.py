import io
import time

import pytest
from fastapi.testclient import TestClient
from hypothesis import HealthCheck, given, settings, strategies as st
from PIL import Image

from uisearch.providers import MockMllmClient
from uisearch.schema import FacetId, default_vocabulary
from uisearch.service import ServiceConfig, ServiceState, create_app
from uisearch.store import index_screen

from conftest import build_record, mock_store


def png_upload(color=(10, 20, 30), size=(48, 96)):
    buffer = io.BytesIO()
    Image.new("RGB", size, color).save(buffer, format="PNG")
    return {"image": ("shot.png", buffer.getvalue(), "image/png")}


@pytest.fixture()
def client():
    store, provider = mock_store(6)
    vocab = default_vocabulary()
    # one screen with an empty next_screen facet, for the flow 422 path
    record = build_record(screen_role="A terminal screen with no next step.")
    index_screen(store, record, "img/dead-end.png", provider, screen_id="dead-end")
    state = ServiceState(
        store=store,
        vocab=vocab,
        mllm=MockMllmClient(vocab=vocab),
        embedder=provider,
        config=ServiceConfig(),
    )
    return TestClient(create_app(state), raise_server_exceptions=False)


SEARCH_BODY = {
    "clauses": [{"facet": "screen_role", "text": "onboarding walkthrough", "weight": 1}],
    "k": 15,
}


class TestHealth:
    def test_health_reports_store_shape(self, client):
        body = client.get("/health").json()
        assert body["status"] == "ok"
        assert body["screens"] == 7
        assert body["dimension"] == 64

    def test_vocab_route_lists_sections(self, client):
        body = client.get("/vocab").json()
        assert len(body["app_categories"]) == 31
        assert "playful" in body["moods"]

    def test_image_route_serves_local_refs_or_404(self, tmp_path):
        from uisearch.service import ServiceConfig, ServiceState, create_app

        store, provider = mock_store(1)
        (tmp_path / "img").mkdir()
        image_path = tmp_path / "img" / "0000.png"
        import io

        from PIL import Image

        buffer = io.BytesIO()
        Image.new("RGB", (8, 8), (1, 2, 3)).save(buffer, format="PNG")
        image_path.write_bytes(buffer.getvalue())
        vocab = default_vocabulary()
        state = ServiceState(store=store, vocab=vocab, mllm=MockMllmClient(vocab=vocab),
                             embedder=provider,
                             config=ServiceConfig(image_root=str(tmp_path)))
        local = TestClient(create_app(state), raise_server_exceptions=False)
        screen_id = store.entries[0].id  # image_ref is img/0000.png
        good = local.get(f"/screens/{screen_id}/image")
        assert good.status_code == 200
        assert good.content == image_path.read_bytes()
        state.config.image_root = None
        assert local.get(f"/screens/{screen_id}/image").status_code == 404


class TestSearchRoute:
    def test_search_happy_path(self, client):
        response = client.post("/search", json=SEARCH_BODY)
        assert response.status_code == 200
        body = response.json()
        assert len(body["overall"]) <= 15
        assert set(body["per_facet"]) == {"screen_role"}
        first = body["overall"][0]
        assert {"screen_id", "overall_score", "facet_scores"} <= set(first)

    def test_unknown_facet_code(self, client):
        body = dict(SEARCH_BODY, clauses=[{"facet": "font", "text": "serif"}])
        response = client.post("/search", json=body)
        assert response.status_code == 400
        assert response.json()["code"] == "unknown_facet"

    def test_malformed_query_code(self, client):
        response = client.post("/search", json={"clauses": []})
        assert response.status_code == 400
        assert response.json()["code"] == "query_invalid"

    def test_invalid_json_body(self, client):
        response = client.post("/search", content=b"{nope",
                               headers={"content-type": "application/json"})
        assert response.status_code == 400
        assert response.json()["code"] == "query_invalid"

    def test_idempotent_byte_identical_bodies(self, client):
        first = client.post("/search", json=SEARCH_BODY)
        second = client.post("/search", json=SEARCH_BODY)
        assert first.content == second.content

    def test_search_does_not_mutate_store(self, client):
        before = client.get("/health").json()["screens"]
        client.post("/search", json=SEARCH_BODY)
        assert client.get("/health").json()["screens"] == before

    # /search never mutates state, so reusing the client across examples is sound
    @settings(max_examples=25, deadline=None,
              suppress_health_check=[HealthCheck.function_scoped_fixture])
    @given(payload=st.one_of(
        st.none(),
        st.integers(),
        st.lists(st.integers(), max_size=3),
        st.dictionaries(st.sampled_from(["clauses", "k", "missing_facet_policy", "junk"]),
                        st.one_of(st.none(), st.integers(), st.text(max_size=5),
                                  st.lists(st.dictionaries(
                                      st.sampled_from(["facet", "text", "weight"]),
                                      st.one_of(st.text(max_size=8), st.integers()),
                                      max_size=3), max_size=2)),
                        max_size=3),
    ))
    def test_fuzzed_payloads_always_structured_json(self, client, payload):
        response = client.post("/search", json=payload)
        body = response.json()
        if response.status_code == 200:
            assert set(body) == {"overall", "per_facet"}
        else:
            assert response.status_code in (400, 422)
            assert {"status", "code", "message"} <= set(body)


class TestScreensRoutes:
    def test_ingest_then_detail(self, client):
        response = client.post("/screens", files=png_upload((99, 1, 5)))
        assert response.status_code == 201
        body = response.json()
        assert body["degraded"] is False
        assert len(body["facets_embedded"]) == 14
        detail = client.get(f"/screens/{body['id']}")
        assert detail.status_code == 200
        record = detail.json()["record"]
        assert set(record) >= {f.value for f in FacetId}

    def test_duplicate_ingest_conflict(self, client):
        files = png_upload((7, 7, 7))
        first = client.post("/screens", files=files)
        assert first.status_code == 201
        again = client.post("/screens", files=png_upload((7, 7, 7)))
        assert again.status_code == 409
        assert again.json()["code"] == "duplicate_screen"

    def test_unknown_screen_404(self, client):
        response = client.get("/screens/not-a-screen")
        assert response.status_code == 404
        assert response.json()["code"] == "not_found"

    def test_unsupported_upload_type(self, client):
        response = client.post("/screens", files={"image": ("x.gif", b"GIF89a", "image/gif")})
        assert response.status_code == 400
        assert response.json()["code"] == "unsupported_image_type"

    def test_oversized_upload_rejected(self, client):
        huge = b"\x89PNG" + b"0" * (10 * 1024 * 1024 + 1)
        response = client.post("/screens", files={"image": ("big.png", huge, "image/png")})
        assert response.status_code == 400
        assert response.json()["code"] == "image_too_large"

    def test_undecodable_image_rejected(self, client):
        response = client.post("/screens", files={"image": ("x.png", b"not a png", "image/png")})
        assert response.status_code == 400
        assert response.json()["code"] == "image_undecodable"

    def test_async_ingest_job_lifecycle(self, client):
        response = client.post("/screens?mode=async", files=png_upload((1, 2, 99)))
        assert response.status_code == 202
        job_id = response.json()["job_id"]
        for _ in range(100):
            job = client.get(f"/jobs/{job_id}").json()
            if job["status"] != "pending":
                break
            time.sleep(0.05)
        assert job["status"] == "done"
        assert job["result"]["facets_embedded"]

    def test_unknown_job_404(self, client):
        assert client.get("/jobs/ghost").status_code == 404


class TestExtractRoute:
    def test_extract_returns_record_and_report(self, client):
        response = client.post("/extract", files=png_upload((4, 44, 90)))
        assert response.status_code == 200
        body = response.json()
        assert body["report"]["is_valid"] is True
        assert body["degraded"] is False
        assert len(body["record"]) >= 14

    def test_extract_does_not_index(self, client):
        before = client.get("/health").json()["screens"]
        client.post("/extract", files=png_upload((5, 5, 5)))
        assert client.get("/health").json()["screens"] == before


class TestFlowRoute:
    def test_flow_results(self, client):
        response = client.get("/screens/s0001/flow?direction=next&k=3")
        assert response.status_code == 200
        body = response.json()
        assert body["direction"] == "next"
        assert len(body["results"]) == 3
        assert "s0001" not in [r["screen_id"] for r in body["results"]]

    def test_flow_unavailable_on_empty_facet(self, client):
        response = client.get("/screens/dead-end/flow?direction=next")
        assert response.status_code == 422
        assert response.json()["code"] == "flow_unavailable"

    def test_flow_unknown_screen(self, client):
        response = client.get("/screens/ghost/flow?direction=next")
        assert response.status_code == 404

    def test_flow_bad_direction(self, client):
        response = client.get("/screens/s0001/flow?direction=sideways")
        assert response.status_code == 400


class TestProviderFailure:
    def test_extraction_failure_maps_to_502(self):
        store, provider = mock_store(1)
        vocab = default_vocabulary()
        state = ServiceState(
            store=store, vocab=vocab,
            mllm=MockMllmClient(vocab=vocab, scripted=["???"] * 3),
            embedder=provider,
            config=ServiceConfig(extraction=__import__("uisearch.extraction", fromlist=["ExtractionConfig"]).ExtractionConfig(backoff_s=0)),
        )
        client = TestClient(create_app(state), raise_server_exceptions=False)
        response = client.post("/screens", files=png_upload())
        assert response.status_code == 502
        assert response.json()["code"] == "provider_error"
