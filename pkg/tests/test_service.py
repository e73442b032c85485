import json

import pytest
from fastapi.testclient import TestClient

from illuminate.classify import TrainConfig, save_checkpoint, train_logreg
from illuminate.llmclient import BackendConfig
from illuminate.service import ServiceConfig, create_app, load_service_config
from illuminate.textprep import fit_tfidf, preprocess, tfidf_transform

DIAGNOSE_REPLY = (
    "Answer: A\n"
    "Explanation: Anhedonia and fatigue are core DSM-5 symptoms.\n"
    "Keywords: empty, tired"
)


@pytest.fixture(scope="module")
def checkpoint(tmp_path_factory, synth_corpus):
    path = tmp_path_factory.mktemp("model") / "logreg.json"
    docs = [preprocess(p.text) for p in synth_corpus.posts]
    vocab = fit_tfidf(docs, cap=300)
    X = [tfidf_transform(vocab, d) for d in docs]
    model = train_logreg(
        X,
        [p.label for p in synth_corpus.posts],
        TrainConfig(epochs=120, learning_rate=0.2),
        C=100.0,
        n_features=vocab.size,
    )
    save_checkpoint(model, path, vocab=vocab)
    return path


def write_script(tmp_path, entries):
    script = tmp_path / "script.jsonl"
    script.write_text("\n".join(json.dumps(e) for e in entries) + "\n")
    return script


def make_app(tmp_path, checkpoint=None, script_entries=None, default=None):
    script_path = None
    if script_entries is not None:
        script_path = str(write_script(tmp_path, script_entries))
    cfg = ServiceConfig(
        backend=BackendConfig(
            kind="mock", script_path=script_path, default_response=default
        ),
        model_checkpoint_path=str(checkpoint) if checkpoint else None,
        journal_dir=str(tmp_path / "journals"),
    )
    return create_app(cfg)


def test_healthz(tmp_path):
    client = TestClient(make_app(tmp_path, default=""))
    resp = client.get("/healthz")
    assert resp.status_code == 200
    assert resp.json() == {"status": "ok"}


class TestDiagnose:
    def test_classifier_path(self, tmp_path, checkpoint, synth_corpus):
        app = make_app(tmp_path, checkpoint=checkpoint)
        client = TestClient(app)
        post = synth_corpus.posts[1]  # label 1
        resp = client.post(
            "/v1/diagnose", json={"text": post.text, "engine": "classifier"}
        )
        assert resp.status_code == 200
        body = resp.json()
        assert body["label"] == "depressed"
        assert body["p1"] > 0.5
        assert body["lime"] is not None
        assert body["explanation"] == ""
        lime_tokens = {t["token"] for t in body["lime"]["tokens"]}
        assert lime_tokens <= set(preprocess(post.text).tokens)

    def test_classifier_without_explain(self, tmp_path, checkpoint, synth_corpus):
        client = TestClient(make_app(tmp_path, checkpoint=checkpoint))
        resp = client.post(
            "/v1/diagnose",
            json={
                "text": synth_corpus.posts[0].text,
                "engine": "classifier",
                "explain": False,
            },
        )
        assert resp.json()["lime"] is None

    def test_llm_path_round_trip(self, tmp_path):
        entries = [{"match": {"nth": 1}, "response": DIAGNOSE_REPLY}]
        client = TestClient(make_app(tmp_path, script_entries=entries))
        resp = client.post(
            "/v1/diagnose", json={"text": "so empty and tired", "engine": "llm"}
        )
        body = resp.json()
        assert body["label"] == "depressed"
        assert body["explanation"] == "Anhedonia and fatigue are core DSM-5 symptoms."
        assert body["keywords"] == ["empty", "tired"]
        assert body["p1"] is None

    def test_both_merges_and_flags_disagreement(
        self, tmp_path, checkpoint, synth_corpus
    ):
        entries = [
            {"match": {"nth": 1}, "response": "Answer: B\nExplanation: looks fine."}
        ]
        client = TestClient(make_app(tmp_path, checkpoint=checkpoint, script_entries=entries))
        post = synth_corpus.posts[1]  # classifier will say depressed
        resp = client.post("/v1/diagnose", json={"text": post.text, "engine": "both"})
        body = resp.json()
        assert body["label"] == "depressed"  # classifier wins label + p1
        assert body["explanation"] == "looks fine."
        assert body["warnings"]

    def test_empty_text_400(self, tmp_path):
        client = TestClient(make_app(tmp_path, default=""))
        resp = client.post("/v1/diagnose", json={"text": "   "})
        assert resp.status_code == 400

    def test_model_not_loaded_409(self, tmp_path):
        client = TestClient(make_app(tmp_path, default=""))
        resp = client.post(
            "/v1/diagnose", json={"text": "hello", "engine": "classifier"}
        )
        assert resp.status_code == 409

    def test_backend_failure_502(self, tmp_path):
        # strict empty script: the mock raises UnmatchedRequest
        app = make_app(tmp_path, script_entries=[])
        client = TestClient(app)
        resp = client.post("/v1/diagnose", json={"text": "hello", "engine": "llm"})
        assert resp.status_code == 502

    def test_unparseable_reply_502(self, tmp_path):
        entries = [{"match": {"nth": 1}, "response": "shrug"}]
        client = TestClient(make_app(tmp_path, script_entries=entries))
        resp = client.post("/v1/diagnose", json={"text": "hello", "engine": "llm"})
        assert resp.status_code == 502


class TestSessions:
    def test_create_distinct_ids(self, tmp_path):
        client = TestClient(make_app(tmp_path, default=""))
        a = client.post("/v1/sessions").json()["session_id"]
        b = client.post("/v1/sessions").json()["session_id"]
        assert a != b

    def test_unknown_session_404(self, tmp_path):
        client = TestClient(make_app(tmp_path, default=""))
        assert client.get("/v1/sessions/nope").status_code == 404
        resp = client.post("/v1/sessions/nope/messages", json={"text": "hi"})
        assert resp.status_code == 404

    def test_three_turn_script(self, tmp_path):
        entries = [
            {"match": {"nth": i}, "response": f"scripted reply {i}"} for i in (1, 2, 3)
        ]
        client = TestClient(make_app(tmp_path, script_entries=entries))
        sid = client.post("/v1/sessions").json()["session_id"]
        stages = []
        for i in range(3):
            resp = client.post(
                f"/v1/sessions/{sid}/messages", json={"text": f"message {i}"}
            )
            body = resp.json()
            assert body["reply"] == f"scripted reply {i + 1}"
            stages.append(body["stage"])
        # untagged scripted replies: understand -> relate, then stage holds
        assert stages == ["relate", "relate", "relate"]

    def test_crisis_absorbing_in_service(self, tmp_path):
        client = TestClient(make_app(tmp_path, default="[reflect] ok"))
        sid = client.post("/v1/sessions").json()["session_id"]
        resp = client.post(
            f"/v1/sessions/{sid}/messages", json={"text": "I want to end my life"}
        )
        assert resp.json()["risk"] == "crisis"
        for i in range(3):
            resp = client.post(
                f"/v1/sessions/{sid}/messages", json={"text": f"still here {i}"}
            )
            assert resp.json()["risk"] == "crisis"

    def test_six_turns_reach_support_with_plan(self, tmp_path):
        entries = [
            {"match": {"nth": i}, "response": f"[reflect] reply {i}"}
            for i in range(1, 8)
        ]
        client = TestClient(make_app(tmp_path, script_entries=entries))
        sid = client.post("/v1/sessions").json()["session_id"]
        last = None
        for i in range(6):
            last = client.post(
                f"/v1/sessions/{sid}/messages",
                json={"text": f"i stopped doing activities i enjoy {i}"},
            ).json()
        assert last["stage"] == "support"
        assert last["plan"] is not None
        assert len(last["plan"]["steps"]) >= 1

    def test_journal_replay_restores_transcript(self, tmp_path):
        entries = [
            {"match": {"nth": i}, "response": f"scripted {i}"} for i in (1, 2, 3)
        ]
        journal_dir = tmp_path / "journals"
        cfg = ServiceConfig(
            backend=BackendConfig(
                kind="mock", script_path=str(write_script(tmp_path, entries))
            ),
            journal_dir=str(journal_dir),
        )
        client = TestClient(create_app(cfg))
        sid = client.post("/v1/sessions").json()["session_id"]
        for i in range(3):
            client.post(f"/v1/sessions/{sid}/messages", json={"text": f"turn {i}"})
        before = client.get(f"/v1/sessions/{sid}").json()

        # simulate a restart: a fresh app over the same journal directory
        cfg2 = ServiceConfig(
            backend=BackendConfig(kind="mock", default_response="x"),
            journal_dir=str(journal_dir),
        )
        client2 = TestClient(create_app(cfg2))
        after = client2.get(f"/v1/sessions/{sid}").json()
        assert after == before

    def test_malformed_journal_line_skipped(self, tmp_path):
        journal_dir = tmp_path / "journals"
        journal_dir.mkdir()
        good = {"event": "created", "ts": 1.0}
        (journal_dir / "abc.jsonl").write_text(
            json.dumps(good) + "\nnot json at all\n"
        )
        cfg = ServiceConfig(
            backend=BackendConfig(kind="mock", default_response="x"),
            journal_dir=str(journal_dir),
        )
        client = TestClient(create_app(cfg))
        assert client.get("/v1/sessions/abc").status_code == 200

    def test_concurrent_post_409(self, tmp_path):
        app = make_app(tmp_path, default="[reflect] ok")
        client = TestClient(app)
        sid = client.post("/v1/sessions").json()["session_id"]
        store = app.state.store
        assert store.locks[sid].acquire(blocking=False)
        try:
            resp = client.post(f"/v1/sessions/{sid}/messages", json={"text": "hi"})
            assert resp.status_code == 409
        finally:
            store.locks[sid].release()
        resp = client.post(f"/v1/sessions/{sid}/messages", json={"text": "hi"})
        assert resp.status_code == 200

    def test_journal_turn_indices_strictly_increase(self, tmp_path):
        app = make_app(tmp_path, default="[clarify] ok")
        client = TestClient(app)
        sid = client.post("/v1/sessions").json()["session_id"]
        for i in range(4):
            client.post(f"/v1/sessions/{sid}/messages", json={"text": f"m{i}"})
        journal = app.state.store.journal_path(sid).read_text().splitlines()
        indices = [
            json.loads(line)["turn_index"]
            for line in journal
            if json.loads(line)["event"] == "turn"
        ]
        assert indices == sorted(indices)
        assert len(set(indices)) == len(indices) == 4

    def test_get_is_side_effect_free(self, tmp_path):
        app = make_app(tmp_path, default="[clarify] ok")
        client = TestClient(app)
        sid = client.post("/v1/sessions").json()["session_id"]
        client.post(f"/v1/sessions/{sid}/messages", json={"text": "hello"})
        journal_before = app.state.store.journal_path(sid).read_bytes()
        for _ in range(3):
            client.get(f"/v1/sessions/{sid}")
        assert app.state.store.journal_path(sid).read_bytes() == journal_before


def test_load_service_config(tmp_path):
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(
        json.dumps(
            {
                "port": 9100,
                "backend": {"kind": "mock", "default_response": "hi"},
                "journal_dir": str(tmp_path / "j"),
                "cors_origin": "http://localhost:5173",
            }
        )
    )
    cfg = load_service_config(cfg_path)
    assert cfg.port == 9100
    assert cfg.backend.kind == "mock"
    assert cfg.cors_origin == "http://localhost:5173"
