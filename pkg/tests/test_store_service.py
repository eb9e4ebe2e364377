import json
import random
import threading

import pytest
from fastapi.testclient import TestClient

from spanalign.model import SOURCE, TARGET, Span, SpanLabel, SpanLink, WordLink
from spanalign.serialization import serialize
from spanalign.service import create_app
from spanalign.store import (
    DocumentStore,
    Edit,
    EditConflict,
    EditRejected,
    StoredDocument,
    apply_edit,
    import_dataset,
    format_import_summary,
)
from conftest import make_doc, random_complete_document


def fresh_stored(doc):
    return StoredDocument(doc=doc, revision=0, updated_at="2026-01-01T00:00:00+00:00")


def base_doc():
    return make_doc(6, 6, [], pair_id="p1")


# ---------------------------------------------------------------------------
# apply_edit

def test_create_span_link_increments_revision():
    stored = fresh_stored(base_doc())
    edit = Edit("create_span_link", {"label": "TRAN", "src": [0, 3], "tgt": [0, 3]}, client_revision=0)
    updated = apply_edit(stored, edit)
    assert updated.revision == 1
    assert len(updated.doc.span_links) == 1
    assert updated.doc.span_links[0].label == SpanLabel.TRAN


def test_revision_mismatch_conflicts():
    stored = fresh_stored(base_doc())
    edit = Edit("create_span_link", {"label": "ADDU", "src": [0, 2]}, client_revision=3)
    with pytest.raises(EditConflict):
        apply_edit(stored, edit)


def test_overlapping_span_rejected_with_report():
    stored = fresh_stored(base_doc())
    stored = apply_edit(stored, Edit("create_span_link", {"id": "a", "label": "TRAN", "src": [0, 3], "tgt": [0, 3]}, 0))
    with pytest.raises(EditRejected) as err:
        apply_edit(stored, Edit("create_span_link", {"label": "TRAN", "src": [2, 5], "tgt": [3, 6]}, 1))
    assert "OVERLAPPING_SPANS" in {e.code for e in err.value.report.errors}


def test_cross_span_word_link_rejected():
    stored = fresh_stored(base_doc())
    stored = apply_edit(stored, Edit("create_span_link", {"id": "a", "label": "TRAN", "src": [0, 3], "tgt": [0, 3]}, 0))
    stored = apply_edit(stored, Edit("create_span_link", {"id": "b", "label": "PARA", "src": [3, 6], "tgt": [3, 6]}, 1))
    with pytest.raises(EditRejected) as err:
        apply_edit(stored, Edit("create_word_link", {"src": 1, "tgt": 4, "parent": "a"}, 2))
    assert "WORD_LINK_CROSSES_SPANS" in {e.code for e in err.value.report.errors}


def test_delete_span_link_cascades_to_word_links():
    stored = fresh_stored(base_doc())
    stored = apply_edit(stored, Edit("create_span_link", {"id": "a", "label": "TRAN", "src": [0, 6], "tgt": [0, 6]}, 0))
    for k, (i, j) in enumerate([(0, 0), (1, 1), (2, 2)]):
        stored = apply_edit(stored, Edit("create_word_link", {"src": i, "tgt": j, "parent": "a"}, k + 1))
    assert len(stored.doc.word_links) == 3
    stored = apply_edit(stored, Edit("delete_span_link", {"id": "a"}, 4))
    assert stored.doc.span_links == ()
    assert stored.doc.word_links == ()
    assert stored.revision == 5


def test_relabel_and_strength_edits():
    stored = fresh_stored(base_doc())
    stored = apply_edit(stored, Edit("create_span_link", {"id": "a", "label": "TRAN", "src": [0, 6], "tgt": [0, 6]}, 0))
    stored = apply_edit(stored, Edit("relabel_link", {"id": "a", "label": "PARA"}, 1))
    assert stored.doc.span_links[0].label == SpanLabel.PARA
    stored = apply_edit(stored, Edit("create_word_link", {"src": 0, "tgt": 0, "strength": "sure", "parent": "a"}, 2))
    stored = apply_edit(stored, Edit("set_strength", {"src": 0, "tgt": 0, "parent": "a", "strength": "possible"}, 3))
    assert stored.doc.word_links[0].strength == "possible"
    stored = apply_edit(stored, Edit("delete_word_link", {"src": 0, "tgt": 0, "parent": "a"}, 4))
    assert stored.doc.word_links == ()


def test_relabel_to_one_sided_label_rejected_on_two_sided_link():
    stored = fresh_stored(base_doc())
    stored = apply_edit(stored, Edit("create_span_link", {"id": "a", "label": "TRAN", "src": [0, 6], "tgt": [0, 6]}, 0))
    with pytest.raises(EditRejected):
        apply_edit(stored, Edit("relabel_link", {"id": "a", "label": "ADDU"}, 1))


def test_unknown_edit_kind_rejected():
    stored = fresh_stored(base_doc())
    with pytest.raises(EditRejected):
        apply_edit(stored, Edit("explode", {}, 0))


# ---------------------------------------------------------------------------
# store persistence

def test_persistence_round_trip(tmp_path):
    store = DocumentStore(tmp_path / "store")
    rng = random.Random(55)
    doc = random_complete_document(rng, pair_id="pp")
    store.put(doc)
    edit = Edit("delete_span_link", {"id": doc.span_links[0].id}, 0)
    updated = store.apply("pp", edit)
    reloaded = DocumentStore(tmp_path / "store")
    stored = reloaded.get("pp")
    assert stored.revision == updated.revision == 1
    assert stored.doc == updated.doc
    assert serialize(stored.doc) == serialize(updated.doc)


def test_concurrent_conflicting_edits_one_winner(tmp_path):
    store = DocumentStore(tmp_path / "store")
    store.put(base_doc())
    results = []

    def attempt(label):
        try:
            store.apply("p1", Edit("create_span_link", {"label": label, "src": [0, 2]}, 0))
            results.append(("ok", label))
        except EditConflict:
            results.append(("conflict", label))

    threads = [threading.Thread(target=attempt, args=("ADDU",)), threading.Thread(target=attempt, args=("ADDF",))]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    outcomes = sorted(r[0] for r in results)
    assert outcomes == ["conflict", "ok"]
    assert store.get("p1").revision == 1


def test_import_dataset(tmp_path):
    data = tmp_path / "data"
    data.mkdir()
    rng = random.Random(66)
    good = random_complete_document(rng, pair_id="good")
    (data / "good.align.json").write_bytes(serialize(good))
    (data / "broken.align.json").write_text('{"pair_id": "x"}', encoding="utf-8")
    (data / "t1.source.cs.txt").write_text("dobrý den .\njak se máte ?\n", encoding="utf-8")
    (data / "t1.target.en.txt").write_text("good day .\nhow are you ?\n", encoding="utf-8")
    store = DocumentStore(tmp_path / "store")
    summary = import_dataset(data, store)
    assert {p.pair_id for p in summary.imported} == {"good", "t1"}
    assert len(summary.skipped) == 1
    assert store.get("t1").revision == 0
    text = format_import_summary(summary)
    assert "imported 2 recording(s)" in text
    assert "broken.align.json" in text


# ---------------------------------------------------------------------------
# HTTP API

@pytest.fixture()
def client(tmp_path):
    store = DocumentStore(tmp_path / "store")
    store.put(base_doc())
    return TestClient(create_app(store))


def test_http_list_and_get(client):
    listing = client.get("/docs").json()
    assert listing["documents"][0]["pair_id"] == "p1"
    assert listing["documents"][0]["revision"] == 0
    response = client.get("/docs/p1").json()
    assert response["revision"] == 0
    assert response["document"]["pair_id"] == "p1"
    assert client.get("/docs/ghost").status_code == 404


def test_http_labels(client):
    labels = client.get("/labels").json()["labels"]
    assert {entry["label"] for entry in labels} == {"TRAN", "PARA", "SUM", "GEN", "ADDF", "ADDU", "REPL"}
    one_sided = {entry["label"] for entry in labels if entry["one_sided"]}
    assert one_sided == {"ADDF", "ADDU"}


def test_http_edit_flow(client):
    ok = client.post("/docs/p1/edits", json={"kind": "create_span_link", "payload": {"id": "a", "label": "TRAN", "src": [0, 3], "tgt": [0, 3]}, "client_revision": 0})
    assert ok.status_code == 200
    assert ok.json()["revision"] == 1

    conflict = client.post("/docs/p1/edits", json={"kind": "create_span_link", "payload": {"label": "ADDU", "src": [3, 4]}, "client_revision": 0})
    assert conflict.status_code == 409
    assert conflict.json()["error"] == "CONFLICT"
    assert conflict.json()["revision"] == 1

    rejected = client.post("/docs/p1/edits", json={"kind": "create_span_link", "payload": {"label": "TRAN", "src": [2, 5], "tgt": [3, 6]}, "client_revision": 1})
    assert rejected.status_code == 422
    body = rejected.json()
    assert body["error"] == "REJECTED"
    assert any(e["code"] == "OVERLAPPING_SPANS" for e in body["report"]["errors"])
    # revision unchanged by the rejected edit
    assert client.get("/docs/p1").json()["revision"] == 1


def test_http_validation_endpoint(client):
    client.post("/docs/p1/edits", json={"kind": "create_span_link", "payload": {"label": "TRAN", "src": [0, 6], "tgt": [0, 6]}, "client_revision": 0})
    report = client.get("/docs/p1/validation").json()
    assert report["revision"] == 1
    assert report["errors"] == []
    assert report["is_complete"] is True
