from __future__ import annotations

import numpy as np
import pytest
from fastapi.testclient import TestClient

from evoclust.service import create_app


@pytest.fixture()
def client() -> TestClient:
    return TestClient(create_app())


def make_circles(client: TestClient, n=900) -> str:
    r = client.post("/datasets", json={"generator": {"kind": "circles", "n_points": n}})
    assert r.status_code == 201
    return r.json()["id"]


class TestDatasets:
    def test_generator_create(self, client):
        r = client.post("/datasets", json={"generator": {"kind": "circles", "n_points": 900}})
        assert r.status_code == 201
        body = r.json()
        assert body["n"] == 900 and body["d"] == 2 and body["has_truth"]

    def test_csv_upload(self, client):
        csv_text = "x,y,label\n0,0,0\n0.1,0,0\n5,5,1\n5.1,5,1\n"
        r = client.post("/datasets", json={"csv": csv_text, "label_column": "label"})
        assert r.status_code == 201
        assert r.json()["n"] == 4 and r.json()["d"] == 2

    def test_csv_without_truth(self, client):
        r = client.post("/datasets", json={"csv": "x,y\n0,0\n1,1\n"})
        assert r.status_code == 201
        assert not r.json()["has_truth"]

    def test_needs_exactly_one_source(self, client):
        r = client.post("/datasets", json={"csv": "x\n1\n", "generator": {"kind": "moons"}})
        assert r.status_code == 400
        r = client.post("/datasets", json={})
        assert r.status_code == 400

    def test_bad_csv_reports_400(self, client):
        r = client.post("/datasets", json={"csv": "x,y\n0,abc\n"})
        assert r.status_code == 400
        assert "abc" in r.json()["error"]

    def test_listing(self, client):
        make_circles(client)
        r = client.get("/datasets")
        assert r.status_code == 200
        assert len(r.json()) == 1
        assert r.json()[0]["scaler"] == "minmax"


class TestPoints:
    def test_default_dims(self, client):
        ds_id = make_circles(client)
        r = client.get(f"/datasets/{ds_id}/points")
        assert r.status_code == 200
        body = r.json()
        assert len(body["x"]) == 900 and len(body["y"]) == 900
        assert body["truth"] is not None
        assert body["displayed"] == 900

    def test_unknown_dataset(self, client):
        assert client.get("/datasets/ds-9999/points").status_code == 404

    def test_bad_dims(self, client):
        ds_id = make_circles(client)
        r = client.get(f"/datasets/{ds_id}/points?dims=0,7")
        assert r.status_code == 400
        assert r.json()["field"] == "dims"
        assert client.get(f"/datasets/{ds_id}/points?dims=a,b").status_code == 400


class TestCluster:
    def test_roundtrip_with_truth(self, client):
        ds_id = make_circles(client)
        r = client.post(f"/datasets/{ds_id}/cluster", json={"expansion": 0.5, "blur": 0.5})
        assert r.status_code == 200
        body = r.json()
        assert len(body["labels"]) == 900
        assert body["n_clusters"] == 2
        assert body["ari"] == 1.0
        assert body["runtime_s"] > 0
        assert body["config"]["expansion"] == 0.5

    def test_determinism(self, client):
        ds_id = make_circles(client)
        payload = {"expansion": 0.4, "blur": 0.6, "seed": 5}
        a = client.post(f"/datasets/{ds_id}/cluster", json=payload).json()
        b = client.post(f"/datasets/{ds_id}/cluster", json=payload).json()
        assert a["labels"] == b["labels"]

    def test_validation_names_field(self, client):
        ds_id = make_circles(client)
        r = client.post(f"/datasets/{ds_id}/cluster", json={"expansion": 1.5})
        assert r.status_code == 400
        assert r.json()["field"] == "expansion"
        r = client.post(f"/datasets/{ds_id}/cluster", json={"level": 3})
        assert r.status_code == 400
        assert r.json()["field"] == "level"

    def test_unknown_dataset_404(self, client):
        assert client.post("/datasets/ds-0042/cluster", json={}).status_code == 404

    def test_last_report_remembered(self, client):
        ds_id = make_circles(client)
        assert client.get(f"/datasets/{ds_id}/report").status_code == 404
        client.post(f"/datasets/{ds_id}/cluster", json={})
        r = client.get(f"/datasets/{ds_id}/report")
        assert r.status_code == 200
        assert r.json()["n_clusters"] == 2

    def test_ari_absent_without_truth(self, client):
        r = client.post("/datasets", json={"csv": "x,y\n0,0\n0.1,0\n5,5\n5.1,5\n"})
        ds_id = r.json()["id"]
        body = client.post(
            f"/datasets/{ds_id}/cluster", json={"min_cluster_size": 1}
        ).json()
        assert body["ari"] is None and body["nmi"] is None


def test_health(client):
    assert client.get("/health").json() == {"status": "ok"}


def test_downsampled_points(client):
    rng = np.random.default_rng(0)
    rows = "\n".join(f"{x},{y}" for x, y in rng.normal(size=(25_000, 2)))
    r = client.post("/datasets", json={"csv": "x,y\n" + rows})
    ds_id = r.json()["id"]
    body = client.get(f"/datasets/{ds_id}/points").json()
    assert body["n_total"] == 25_000
    assert body["displayed"] <= 20_000
    assert len(body["indices"]) == body["displayed"]
    assert body["indices"][0] == 0 and body["indices"][-1] == 24_999
