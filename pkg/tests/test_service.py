import math

import pytest
from fastapi.testclient import TestClient

from bdsmp.service import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def _rows(resp):
    return resp.json()["table"]["rows"]


def test_health(client):
    r = client.get("/v1/health")
    assert r.status_code == 200
    body = r.json()
    assert body["status"] == "ok"
    assert body["version"]


def test_expand_ergodic_model(client):
    r = client.post("/v1/expand", json={"model": {"preset": "fig1"}, "L": 3})
    assert r.status_code == 200
    table = r.json()["table"]
    assert table["columns"] == [
        "state", "kind", "shift",
        "coeff_0", "coeff_1", "coeff_2", "coeff_3",
        "guaranteed_k",
    ]
    rows = table["rows"]
    assert len(rows) == 101
    assert {row[1] for row in rows} == {"stationary"}
    assert math.fsum(row[3] for row in rows) == pytest.approx(1.0, abs=1e-9)
    assert table["model_digest"]


def test_expand_absorbing_model_has_both_kinds(client):
    r = client.post("/v1/expand", json={"model": {"preset": "fig5a"}, "L": 2})
    rows = _rows(r)
    kinds = {row[1] for row in rows}
    assert kinds == {"stationary", "quasi_H2"}
    state0 = next(r for r in rows if r[0] == 0 and r[1] == "stationary")
    assert state0[3] == pytest.approx(1.0, abs=1e-12)
    # interior stationary mass vanishes in the limit: positive shift
    state5 = next(r for r in rows if r[0] == 5 and r[1] == "stationary")
    assert state5[2] >= 1


def test_exact_blocks_and_normalization(client):
    r = client.post(
        "/v1/exact", json={"model": {"preset": "fig5b"}, "eps": [0.02, 0.05]}
    )
    rows = _rows(r)
    assert len(rows) == 202
    for eps in (0.02, 0.05):
        block = [row for row in rows if row[1] == eps]
        assert len(block) == 101
        assert math.fsum(row[2] for row in block) == pytest.approx(1.0, abs=1e-12)
        quasi = [row[3] for row in block if row[3] is not None]
        assert len(quasi) == 100  # state 0 is outside the conditional support
        assert math.fsum(quasi) == pytest.approx(1.0, abs=1e-12)


def test_exact_two_state_closed_form(client):
    # constant rates a up, b down: pi = (b, a) / (a + b)
    descriptor = {
        "N": 1,
        "g_plus": [[3.0, 0.0], [0.0, 0.0]],
        "g_minus": [[0.0, 0.0], [2.0, 0.0]],
    }
    r = client.post(
        "/v1/exact", json={"model": {"descriptor": descriptor}, "eps": [0.5]}
    )
    rows = _rows(r)
    assert rows[0][2] == pytest.approx(2.0 / 5.0, rel=1e-12)
    assert rows[1][2] == pytest.approx(3.0 / 5.0, rel=1e-12)


def test_compare_ratio_decreases(client):
    r = client.post(
        "/v1/compare",
        json={
            "model": {"preset": "fig1"},
            "L": 1,
            "eps": [1e-2, 1e-3, 1e-4],
            "states": [40],
        },
    )
    rows = _rows(r)
    assert [row[1] for row in rows] == [1e-2, 1e-3, 1e-4]
    ratios = [row[5] for row in rows]
    assert ratios[0] >= ratios[1] >= ratios[2]


def test_compare_order_zero_is_limiting(client):
    from bdsmp.builders import preset
    from bdsmp.distributions import limiting_stationary
    from bdsmp.model import from_linear_intensities

    r = client.post(
        "/v1/compare",
        json={"model": {"preset": "fig1"}, "L": 0, "eps": [1e-3], "states": [40, 80]},
    )
    lim = limiting_stationary(from_linear_intensities(preset("fig1"), 1))
    for row in _rows(r):
        assert row[3] == pytest.approx(lim.probs[int(row[0])], rel=1e-12)


def test_simulate_bit_reproducible(client):
    payload = {
        "model": {"preset": "fig5a"},
        "eps": 0.05,
        "horizon": 5e3,
        "seed": 11,
        "replications": 50,
    }
    a = client.post("/v1/simulate", json=payload)
    b = client.post("/v1/simulate", json=payload)
    assert a.status_code == 200
    assert a.json()["table"]["rows"] == b.json()["table"]["rows"]


def test_reproduce_panel_bundles(client):
    r = client.post("/v1/reproduce", json={"figures": ["fig4"]})
    names = [t["name"] for t in r.json()["tables"]]
    assert names == ["fig4a", "fig4b", "fig4c", "fig4d"]
    r = client.post("/v1/reproduce", json={"figures": ["fig6"]})
    names = [t["name"] for t in r.json()["tables"]]
    assert names == ["fig6a", "fig6b"]


def test_error_envelope_codes(client):
    r = client.post("/v1/expand", json={"model": {"preset": "nosuch"}})
    assert r.status_code == 400
    assert r.json()["error"]["code"] == "config"

    r = client.post("/v1/expand", json={"model": {"preset": "fig5b"}, "L": 80})
    assert r.status_code == 400
    assert r.json()["error"]["code"] == "precision"

    r = client.post("/v1/exact", json={"model": {"preset": "fig1"}, "eps": [2.0]})
    assert r.status_code == 400
    assert r.json()["error"]["code"] == "range"


def test_request_shape_rejected(client):
    r = client.post("/v1/expand", json={"model": {}})
    assert r.status_code == 422
    r = client.post(
        "/v1/expand",
        json={"model": {"preset": "fig1", "descriptor": {"N": 1, "g_plus": [], "g_minus": []}}},
    )
    assert r.status_code == 422
    r = client.post("/v1/exact", json={"model": {"preset": "fig1"}, "eps": []})
    assert r.status_code == 422
