"""Acceptance suite: one test per release criterion, at stated tolerances.

Run with ``pytest -v -s tests/test_acceptance.py`` to see one PASS line per
criterion; a pytest failure is the FAIL line.
"""

from __future__ import annotations

import json
import socket
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
import requests

from slidetutor.corpus import build_index, load_corpus
from slidetutor.embedding import HashingEmbedder, normalize
from slidetutor.errors import CorruptManifestError, ZeroVectorError
from slidetutor.evalharness import run_ablation
from slidetutor.index import FlatIndex
from slidetutor.metrics import bleu, rouge_l, rouge_n
from slidetutor.pipeline import PipelineConfig, retrieve, truncate_input
from slidetutor.rerank import LexicalScorer
from slidetutor.service import create_app
from slidetutor.users import UserStore

from .conftest import ablation_rows, make_service_config, toy_qa_rows, write_corpus
from .reference_impls import ref_bleu, ref_eval_rouge1_f1, ref_search
from .stub_services import dead_url


def _ok(name: str) -> None:
    print(f"\nACCEPTANCE {name}: PASS")


def test_exact_knn_matches_bruteforce_oracle() -> None:
    """20 random corpora, d in {8, 64, 256}, k in {1, 5, 10, 50}: exact match."""
    rng = np.random.default_rng(20240817)
    started = time.monotonic()
    dims = [8, 64, 256]
    for corpus_idx in range(20):
        dim = dims[corpus_idx % 3]
        size = int(rng.integers(50, 1001))
        index = FlatIndex(dim)
        entries = []
        for i in range(size):
            doc_id = f"doc{i:04d}"
            index.add(doc_id, rng.normal(size=dim).astype(np.float32))
            entries.append((doc_id, [float(x) for x in index.vector_for(i)]))
        index.finalize()
        for _ in range(2):
            query = normalize(rng.normal(size=dim).astype(np.float32))
            query_list = [float(x) for x in query]
            for k in (1, 5, 10, 50):
                got = [c.doc_id for c in index.search(query, k)]
                want = [d for d, _ in ref_search(entries, query_list, k)]
                assert got == want, (
                    f"corpus {corpus_idx} (n={size}, d={dim}, k={k}) diverged"
                )
    elapsed = time.monotonic() - started
    assert elapsed < 60.0, f"oracle suite took {elapsed:.1f}s"
    _ok(f"exact-knn-oracle ({elapsed:.1f}s)")


def test_normalization_suite_1000_random_vectors() -> None:
    """Norm within 1e-6 of 1, idempotent, scale invariant; zero rejected."""
    rng = np.random.default_rng(7)
    for _ in range(1000):
        dim = int(rng.integers(2, 128))
        vec = (rng.normal(size=dim) * 10.0 ** float(rng.integers(-2, 3))).astype(
            np.float32
        )
        if not np.any(vec != 0.0):
            vec[0] = 1.0
        unit = normalize(vec)
        assert abs(float(np.linalg.norm(unit.astype(np.float64))) - 1.0) <= 1e-6
        again = normalize(unit)
        assert np.max(np.abs(again - unit)) <= 1e-6
        scale = float(rng.uniform(0.1, 100.0))
        scaled = normalize((vec.astype(np.float64) * scale).astype(np.float32))
        assert np.max(np.abs(scaled - unit)) <= 1e-6
    with pytest.raises(ZeroVectorError):
        normalize(np.zeros(16, dtype=np.float32))
    _ok("normalization-suite")


def test_metric_oracles_at_1e9() -> None:
    """Hand-derived ROUGE cases and oracle-pinned BLEU, both to 1e-9."""
    r1 = rouge_n("the cat on mat", "the cat sat on the mat", 1)
    assert r1.precision == pytest.approx(1.0, abs=1e-9)
    assert r1.recall == pytest.approx(4.0 / 6.0, abs=1e-9)
    assert r1.f1 == pytest.approx(0.8, abs=1e-9)

    r2 = rouge_n("the cat on mat", "the cat sat on the mat", 2)
    assert r2.f1 == pytest.approx(0.25, abs=1e-9)

    rl = rouge_l("the cat on mat", "the cat sat on the mat")
    assert rl.f1 == pytest.approx(0.8, abs=1e-9)
    assert rouge_l("a b", "b a").f1 == pytest.approx(0.5, abs=1e-9)

    cases = [
        (["the cat sat on the mat"], ["the cat sat on the mat"], 1.0),
        (["aaa bbb"], ["ccc ddd"], 0.408248290463863),
        (["cat"], ["dog"], 0.5),
        (["the cat on mat"], ["the cat sat on the mat"], 0.3258798048281462),
        (["the cat sat", "a dog"], ["the cat sat on the mat", "a dog barks"],
         0.44932896411722156),
    ]
    for cands, refs, pinned in cases:
        value = bleu(cands, refs)
        assert value == pytest.approx(pinned, abs=1e-9)
        assert value == pytest.approx(ref_bleu(cands, refs), abs=1e-9)
    _ok("metric-oracle")


def test_self_retrieval_recall_at_1(tmp_path: Path) -> None:
    """Toy corpus of 20 records: every exact answer query lands at rank 1."""
    corpus = load_corpus(write_corpus(tmp_path / "c", toy_qa_rows()))
    assert len(corpus) >= 20
    embedder = HashingEmbedder(256)
    index = build_index(corpus, embedder)
    for rerank_enabled in (True, False):
        cfg = PipelineConfig(k=10, rerank_enabled=rerank_enabled)
        hits = 0
        for rec in corpus.records:
            response = retrieve(
                rec.answer_text, cfg, index, corpus, embedder, LexicalScorer()
            )
            hits += response.best.doc_id == rec.doc_id
        recall_at_1 = hits / len(corpus)
        assert recall_at_1 == 1.0, f"recall@1={recall_at_1} rerank={rerank_enabled}"
    _ok("self-retrieval")


def test_ablation_direction_matches_bruteforce(tmp_path: Path) -> None:
    """Reranking strictly improves ROUGE-1 on the defect-seeded fixture."""
    rows = ablation_rows()
    corpus = load_corpus(write_corpus(tmp_path / "c", rows))
    embedder = HashingEmbedder(256)
    index = build_index(corpus, embedder)
    with_rr, without = run_ablation(
        corpus, PipelineConfig(k=10), index, embedder, LexicalScorer()
    )

    expected_without, preds_without = ref_eval_rouge1_f1(rows, 10, False, 256)
    expected_with, _ = ref_eval_rouge1_f1(rows, 10, True, 256)
    misranked = [
        r["id"] for r, p in zip(rows, preds_without) if r["id"] != p
    ]
    assert len(misranked) >= 2, f"fixture must misrank >= 2, got {misranked}"
    assert with_rr.rouge1.f1 > without.rouge1.f1
    assert without.rouge1.f1 == pytest.approx(expected_without, abs=1e-9)
    assert with_rr.rouge1.f1 == pytest.approx(expected_with, abs=1e-9)
    _ok(
        "ablation-direction "
        f"(rouge1 {without.rouge1.f1:.4f} -> {with_rr.rouge1.f1:.4f})"
    )


def test_index_persistence_and_corruption(tmp_path: Path) -> None:
    """Round trip identical for 100 queries; 3 corruptions all detected."""
    rng = np.random.default_rng(99)
    index = FlatIndex(64)
    for i in range(300):
        index.add(f"doc{i:04d}", rng.normal(size=64).astype(np.float32))
    index.finalize()
    index.save(tmp_path / "idx")
    loaded = FlatIndex.load(tmp_path / "idx")
    for _ in range(100):
        query = normalize(rng.normal(size=64).astype(np.float32))
        a = index.search(query, 10)
        b = loaded.search(query, 10)
        assert [(c.doc_id, c.stage1_score) for c in a] == [
            (c.doc_id, c.stage1_score) for c in b
        ]

    def corrupted(mutate) -> Path:
        target = tmp_path / f"corrupt_{mutate.__name__}"
        index.save(target)
        mutate(target)
        return target

    def truncate_vectors(target: Path) -> None:
        blob = (target / "vectors.bin").read_bytes()
        (target / "vectors.bin").write_bytes(blob[: len(blob) // 2])

    def count_mismatch(target: Path) -> None:
        manifest = json.loads((target / "manifest.json").read_text())
        manifest["count"] -= 1
        manifest["ids"] = manifest["ids"][:-1]
        (target / "manifest.json").write_text(json.dumps(manifest))

    def bad_version(target: Path) -> None:
        manifest = json.loads((target / "manifest.json").read_text())
        manifest["version"] = 2
        (target / "manifest.json").write_text(json.dumps(manifest))

    for mutate in (truncate_vectors, count_mismatch, bad_version):
        with pytest.raises(CorruptManifestError):
            FlatIndex.load(corrupted(mutate))
    _ok("index-persistence")


def _free_port() -> int:
    probe = socket.socket()
    probe.bind(("127.0.0.1", 0))
    port = probe.getsockname()[1]
    probe.close()
    return port


@pytest.fixture
def live_server(tmp_path: Path):
    """A freshly started service subprocess with a seeded admin."""
    corpus_dir = write_corpus(tmp_path / "corpus", toy_qa_rows())
    index = build_index(load_corpus(corpus_dir), HashingEmbedder(256))
    index.save(tmp_path / "idx")
    db_path = tmp_path / "users.db"
    UserStore(db_path).add("root", "rootpw", "admin")

    port = _free_port()
    config_path = tmp_path / "config.json"
    config_path.write_text(
        json.dumps(
            {
                "listen_addr": f"127.0.0.1:{port}",
                "corpus_dir": str(corpus_dir),
                "index_path": str(tmp_path / "idx"),
                "db_path": str(db_path),
            }
        )
    )
    proc = subprocess.Popen(
        [sys.executable, "-m", "slidetutor.cli", "serve", "--config", str(config_path)],
        stdout=subprocess.DEVNULL,
        stderr=subprocess.DEVNULL,
    )
    base = f"http://127.0.0.1:{port}"
    try:
        deadline = time.monotonic() + 30
        while True:
            try:
                requests.get(f"{base}/courses", timeout=1)
                break
            except requests.ConnectionError:
                if time.monotonic() > deadline:
                    raise RuntimeError("service did not come up in 30s")
                time.sleep(0.2)
        yield base
    finally:
        proc.terminate()
        proc.wait(timeout=10)


def test_api_contract_full_catalog(live_server: str) -> None:
    """Scripted session over the full endpoint catalog on a live service."""
    base = live_server

    # 401 gate before any login.
    assert requests.get(f"{base}/users/all").status_code == 401
    assert requests.post(f"{base}/chat", json={"question": "x"}).status_code == 401

    # Bad credentials rejected.
    bad = requests.post(
        f"{base}/login", json={"username": "root", "password": "wrong"}
    )
    assert bad.status_code == 401 and "token" not in bad.json()

    # Admin login.
    admin = requests.Session()
    login = admin.post(
        f"{base}/login", json={"username": "root", "password": "rootpw"}
    )
    assert login.status_code == 200
    admin_token = login.json()["token"]

    # Create: POST /user.
    created = admin.post(
        f"{base}/user",
        json={"username": "alice", "password": "alicepw", "user_type": "regular"},
    )
    assert created.status_code == 201
    alice_id = created.json()["user_id"]
    assert admin.post(
        f"{base}/user",
        json={"username": "alice", "password": "x", "user_type": "regular"},
    ).status_code == 409
    assert admin.post(f"{base}/user", json={"username": "nopw"}).status_code == 400

    # 403 gate: regular users cannot manage accounts.
    alice = requests.Session()
    assert alice.post(
        f"{base}/login", json={"username": "alice", "password": "alicepw"}
    ).status_code == 200
    assert alice.get(f"{base}/users/all").status_code == 403
    assert alice.post(
        f"{base}/user", json={"username": "x", "password": "y", "user_type": "regular"}
    ).status_code == 403

    # Update: PUT /user (promotion shows up in the filtered listings).
    assert admin.put(
        f"{base}/user/{alice_id}", json={"user_type": "admin"}
    ).status_code == 200
    admins = admin.get(f"{base}/users/admins").json()
    assert any(u["username"] == "alice" for u in admins)
    assert admin.put(f"{base}/user/99999", json={}).status_code == 404

    # Partition property over the listings.
    for i in range(3):
        admin.post(
            f"{base}/user",
            json={"username": f"reg{i}", "password": "pw", "user_type": "regular"},
        )
    everyone = admin.get(f"{base}/users/all").json()
    admin_ids = {u["user_id"] for u in admin.get(f"{base}/users/admins").json()}
    regular_ids = {u["user_id"] for u in admin.get(f"{base}/users/regular").json()}
    assert admin_ids | regular_ids == {u["user_id"] for u in everyone}
    assert admin_ids & regular_ids == set()
    assert all("password" not in u for u in everyone)

    # Content and chat answer under a valid session.
    weeks = admin.get(f"{base}/courses/ml101/weeks")
    assert weeks.status_code == 200 and weeks.json() == [1, 2]
    chat = admin.post(f"{base}/chat", json={"question": toy_qa_rows()[0]["answer"]})
    assert chat.status_code == 200 and chat.json()["doc_id"] == "d00"

    # Logout, then the token never authenticates again.
    headers = {"Authorization": f"Bearer {admin_token}"}
    assert requests.post(f"{base}/logout", headers=headers).status_code == 200
    assert requests.get(f"{base}/users/all", headers=headers).status_code == 401

    # Deletion invalidates both the account and its sessions.
    alice_token = alice.post(
        f"{base}/login", json={"username": "alice", "password": "alicepw"}
    ).json()["token"]
    admin2 = requests.Session()
    admin2.post(f"{base}/login", json={"username": "root", "password": "rootpw"})
    assert admin2.delete(f"{base}/user/{alice_id}").status_code == 200
    assert requests.get(
        f"{base}/users/all", headers={"Authorization": f"Bearer {alice_token}"}
    ).status_code == 401
    assert requests.post(
        f"{base}/login", json={"username": "alice", "password": "alicepw"}
    ).status_code == 401
    assert admin2.delete(f"{base}/user/{alice_id}").status_code == 404
    _ok("api-contract")


def test_truncation_of_10k_character_question(tmp_path: Path) -> None:
    """A 10000-character question still answers, clamped on a boundary."""
    from fastapi.testclient import TestClient

    corpus_dir = write_corpus(tmp_path / "corpus", toy_qa_rows())
    index = build_index(load_corpus(corpus_dir), HashingEmbedder(256))
    index.save(tmp_path / "idx")
    cfg = make_service_config(tmp_path, corpus_dir, tmp_path / "idx")
    UserStore(cfg.db_path).add("root", "rootpw", "admin")
    client = TestClient(create_app(cfg))
    client.post("/login", json={"username": "root", "password": "rootpw"})

    question = ("what keeps several hypotheses while decoding " * 250)[:10_000]
    assert len(question) == 10_000
    response = client.post("/chat", json={"question": question})
    assert response.status_code == 200
    used = response.json()["query_used"]
    assert len(used) <= cfg.max_input_chars
    assert used == truncate_input(question, cfg.max_input_chars)
    assert question.startswith(used)
    # The cut landed on a token boundary: the next character in the
    # original continues a different token or is a separator.
    assert not used[-1].isalnum() or not question[len(used)].isalnum() or (
        question[len(used) - 1] != used[-1]
    )
    _ok("truncation")


def test_degradation_never_5xx(tmp_path: Path) -> None:
    """Null TTS plus failing generator: 200 with degraded=true, never 5xx."""
    from fastapi.testclient import TestClient

    from slidetutor.config import AdapterConfig

    corpus_dir = write_corpus(tmp_path / "corpus", toy_qa_rows())
    corpus = load_corpus(corpus_dir)
    index = build_index(corpus, HashingEmbedder(256))
    index.save(tmp_path / "idx")
    cfg = make_service_config(tmp_path, corpus_dir, tmp_path / "idx")
    cfg.generator = AdapterConfig(mode="external", url=dead_url())
    cfg.tts = AdapterConfig(mode="null")
    UserStore(cfg.db_path).add("root", "rootpw", "admin")
    client = TestClient(create_app(cfg))
    client.post("/login", json={"username": "root", "password": "rootpw"})

    for rec in corpus.records[:10]:
        response = client.post(
            "/chat", json={"question": rec.answer_text, "want_audio": True}
        )
        assert response.status_code == 200, response.text
        body = response.json()
        assert body["degraded"] is True
        assert body["answer_text"] == rec.answer_text
        assert "audio_url" not in body
    _ok("degradation")
