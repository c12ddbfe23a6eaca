import pytest
from fastapi.testclient import TestClient

from solclone.review.core import ReviewStore
from solclone.review.service import create_app, export_session


@pytest.fixture()
def client(tmp_path):
    store = ReviewStore(tmp_path / "review", clock=lambda: "2025-01-01T00:00:00Z")
    app = create_app(
        store,
        functions={
            "fa:A#f#0": {"function_id": "fa:A#f#0", "function_code": "function f() public {}"},
            "fb:B#f#0": {"function_id": "fb:B#f#0", "function_code": "function f() external {}"},
        },
    )
    return TestClient(app), store


def _pair(i: int, set_label: str = "candidate") -> dict:
    return {
        "pair_id": f"fa{i}:A#f#0|fb{i}:B#f#0",
        "set": set_label,
        "stripe": "cm(0.85,0.90]:cd(0.60,0.80]",
        "cd_s": 0.7,
        "cm_s": 0.88,
        "same_name": True,
        "signature_compatible": True,
    }


def _create(client, name="sess", pairs=None, raters=("a", "b")):
    body = {
        "name": name,
        "raters": list(raters),
        "mode": "full",
        "seed": 7,
        "pairs": pairs or [_pair(i) for i in range(4)],
    }
    resp = client.post("/sessions", json=body)
    assert resp.status_code == 200, resp.text
    return resp.json()["session_id"]


class TestSessionEndpoints:
    def test_create_and_status(self, client):
        http, _store = client
        session_id = _create(http)
        status = http.get(f"/sessions/{session_id}").json()
        assert status["progress"]["pairs"] == 4
        assert status["raters"] == ["a", "b"]

    def test_duplicate_create_conflicts(self, client):
        http, _ = client
        _create(http, name="dup")
        resp = http.post(
            "/sessions",
            json={"name": "dup", "raters": ["a"], "pairs": [_pair(0)]},
        )
        assert resp.status_code == 409

    def test_unknown_session_404(self, client):
        http, _ = client
        assert http.get("/sessions/ghost").status_code == 404

    def test_next_pair_payload(self, client):
        http, _ = client
        session_id = _create(http)
        payload = http.get(f"/sessions/{session_id}/next", params={"rater": "a"}).json()
        assert payload["done"] is False
        assert set(payload["functions"]) == {"a", "b"}
        assert payload["cd_s"] == 0.7
        assert "stripe" in payload and "progress" in payload

    def test_next_requires_assigned_rater(self, client):
        http, _ = client
        session_id = _create(http)
        resp = http.get(f"/sessions/{session_id}/next", params={"rater": "zz"})
        assert resp.status_code == 403

    def test_session_inline_functions_win(self, client):
        http, _ = client
        body = {
            "name": "inline",
            "raters": ["a"],
            "pairs": [_pair(9)],
            "functions": {"fa9:A#f#0": {"function_id": "fa9:A#f#0", "function_code": "code"}},
        }
        http.post("/sessions", json=body)
        payload = http.get("/sessions/inline/next", params={"rater": "a"}).json()
        assert payload["functions"]["a"]["function_code"] == "code"


class TestJudgmentFlow:
    def _submit(self, http, session_id, rater, pair_id, verdict, labels=None):
        return http.post(
            f"/sessions/{session_id}/judgments",
            json={
                "pair_id": pair_id,
                "rater_id": rater,
                "verdict": verdict,
                "labels": labels or [],
            },
        )

    def test_full_two_rater_session(self, client):
        http, store = client
        session_id = _create(http, pairs=[_pair(i) for i in range(3)])
        for rater in ("a", "b"):
            while True:
                nxt = http.get(f"/sessions/{session_id}/next", params={"rater": rater}).json()
                if nxt["done"]:
                    break
                resp = self._submit(http, session_id, rater, nxt["pair_id"], "Type4Clone", ["modifier"])
                assert resp.status_code == 200
        status = http.get(f"/sessions/{session_id}").json()
        assert status["progress"]["judged"] == {"a": 3, "b": 3}
        agreement = http.get(f"/sessions/{session_id}/agreement").json()
        assert agreement["kappa"] == 1.0

    def test_labels_on_non_clone_rejected(self, client):
        http, _ = client
        session_id = _create(http)
        nxt = http.get(f"/sessions/{session_id}/next", params={"rater": "a"}).json()
        resp = self._submit(http, session_id, "a", nxt["pair_id"], "NonClone", ["modifier"])
        assert resp.status_code == 422

    def test_unknown_verdict_rejected(self, client):
        http, _ = client
        session_id = _create(http)
        nxt = http.get(f"/sessions/{session_id}/next", params={"rater": "a"}).json()
        resp = self._submit(http, session_id, "a", nxt["pair_id"], "Maybe")
        assert resp.status_code == 422

    def test_unknown_pair_404(self, client):
        http, _ = client
        session_id = _create(http)
        resp = self._submit(http, session_id, "a", "ghost|pair", "Type4Clone")
        assert resp.status_code == 404

    def test_conflicts_and_resolution_flow(self, client):
        http, _ = client
        session_id = _create(http, pairs=[_pair(i) for i in range(2)])
        pair_ids = [p["pair_id"] for p in (_pair(0), _pair(1))]
        for pid in pair_ids:
            self._submit(http, session_id, "a", pid, "Type4Clone")
        self._submit(http, session_id, "b", pair_ids[0], "Type4Clone")
        self._submit(http, session_id, "b", pair_ids[1], "NonClone")

        conflicts = http.get(f"/sessions/{session_id}/conflicts").json()["conflicts"]
        assert [c["pair_id"] for c in conflicts] == [pair_ids[1]]
        assert conflicts[0]["verdicts"] == {"a": "Type4Clone", "b": "NonClone"}

        resp = http.post(
            f"/sessions/{session_id}/resolutions",
            json={"pair_id": pair_ids[1], "verdict": "NonClone"},
        )
        assert resp.status_code == 200
        assert http.get(f"/sessions/{session_id}/conflicts").json()["conflicts"] == []

    def test_resolution_of_unconflicted_pair_409(self, client):
        http, _ = client
        session_id = _create(http, pairs=[_pair(0), _pair(1)])
        resp = http.post(
            f"/sessions/{session_id}/resolutions",
            json={"pair_id": _pair(0)["pair_id"], "verdict": "NonClone"},
        )
        assert resp.status_code == 409


class TestReports:
    def _run_session(self, http, session_id, pairs):
        # rater a: Type4 on candidates; rater b agrees everywhere
        for rater in ("a", "b"):
            for p in pairs:
                verdict = "Type4Clone" if p["set"] == "candidate" else "NonClone"
                http.post(
                    f"/sessions/{session_id}/judgments",
                    json={
                        "pair_id": p["pair_id"],
                        "rater_id": rater,
                        "verdict": verdict,
                        "labels": ["diff_algo"] if verdict == "Type4Clone" else [],
                    },
                )

    def test_reports_json_and_markdown(self, client):
        http, _ = client
        pairs = [_pair(0), _pair(1), _pair(2, "baseline"), _pair(3, "supplementary")]
        session_id = _create(http, pairs=pairs)
        self._run_session(http, session_id, pairs)

        metrics = http.get(f"/sessions/{session_id}/reports/metrics").json()
        assert metrics["tp"] == 2 and metrics["tn"] == 2
        stripes = http.get(f"/sessions/{session_id}/reports/stripes").json()
        assert stripes["candidate"]["totals"]["judged"] == 2
        labels = http.get(f"/sessions/{session_id}/reports/labels").json()
        assert labels["singles"] == {"diff_algo": 2}

        markdown = http.get(
            f"/sessions/{session_id}/reports/metrics", params={"format": "markdown"}
        )
        assert markdown.status_code == 200
        assert "Validation metrics" in markdown.text

    def test_metrics_blocked_by_conflict(self, client):
        http, _ = client
        pairs = [_pair(0), _pair(1)]
        session_id = _create(http, pairs=pairs)
        http.post(
            f"/sessions/{session_id}/judgments",
            json={"pair_id": pairs[0]["pair_id"], "rater_id": "a", "verdict": "Type4Clone"},
        )
        http.post(
            f"/sessions/{session_id}/judgments",
            json={"pair_id": pairs[0]["pair_id"], "rater_id": "b", "verdict": "NonClone"},
        )
        resp = http.get(f"/sessions/{session_id}/reports/metrics")
        assert resp.status_code == 409

    def test_unknown_report_404(self, client):
        http, _ = client
        session_id = _create(http)
        assert http.get(f"/sessions/{session_id}/reports/bogus").status_code == 404


class TestExport:
    def test_export_writes_snapshots(self, client, tmp_path):
        http, store = client
        pairs = [_pair(0), _pair(1), _pair(2, "baseline")]
        session_id = _create(http, pairs=pairs)
        for rater in ("a", "b"):
            for p in pairs:
                verdict = "Type4Clone" if p["set"] == "candidate" else "NonClone"
                http.post(
                    f"/sessions/{session_id}/judgments",
                    json={"pair_id": p["pair_id"], "rater_id": rater, "verdict": verdict},
                )
        out = tmp_path / "export"
        written = export_session(store, session_id, out)
        names = {p.name for p in written}
        assert {"judgments.jsonl", "agreement.json", "metrics.json", "stripes.json", "labels.json"} <= names
