"""HTTP layer tests run against the app in process."""
import pytest
from fastapi.testclient import TestClient

from qnsolve.service.app import app


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


class TestInfoEndpoints:
    def test_health(self, client):
        r = client.get("/health")
        assert r.status_code == 200
        assert r.json() == {"status": "ok"}

    def test_methods(self, client):
        r = client.get("/methods")
        assert r.status_code == 200
        assert r.json() == ["qn1", "qn2", "qn3", "qn4"]

    def test_problems_catalog(self, client):
        r = client.get("/problems")
        assert r.status_code == 200
        body = r.json()
        assert len(body) == 10
        by_name = {p["name"]: p for p in body}
        assert by_name["rosenbrock"]["dims"] == [2]
        assert by_name["rosenbrock"]["known_root"] is True
        assert by_name["broyden-tridiagonal"]["dims"] == [10, 20, 30]


class TestSolveEndpoint:
    def test_basic_solve(self, client):
        r = client.post("/solve", json={"problem": "rosenbrock", "dim": 2})
        assert r.status_code == 200
        body = r.json()
        assert body["status"] == "converged"
        assert body["trace"] is None
        assert len(body["x"]) == 2
        assert abs(body["x"][0] - 1.0) < 1e-8
        assert body["f_norm"] <= 1e-10 * max(body["f0_norm"], 1.0)
        assert body["restarts"] == 0

    def test_trace_included_on_request(self, client):
        r = client.post(
            "/solve",
            json={
                "problem": "rosenbrock",
                "dim": 2,
                "method": "qn3",
                "include_trace": True,
            },
        )
        assert r.status_code == 200
        body = r.json()
        trace = body["trace"]
        assert len(trace) == body["iterations"]
        assert [row["k"] for row in trace] == list(range(len(trace)))
        assert trace[0]["f_norm"] == body["f0_norm"]

    def test_settings_forwarded(self, client):
        r = client.post(
            "/solve",
            json={
                "problem": "rosenbrock",
                "dim": 2,
                "settings": {"max_iter": 2},
            },
        )
        assert r.status_code == 200
        assert r.json()["status"] == "max_iter"
        assert r.json()["iterations"] == 2

    def test_unknown_problem_is_404(self, client):
        r = client.post("/solve", json={"problem": "nope", "dim": 2})
        assert r.status_code == 404

    def test_unsupported_dim_is_422(self, client):
        r = client.post("/solve", json={"problem": "rosenbrock", "dim": 7})
        assert r.status_code == 422

    def test_bad_memory_depth_is_422(self, client):
        r = client.post(
            "/solve",
            json={
                "problem": "rosenbrock",
                "dim": 2,
                "method": "qn4",
                "settings": {"memory_depth": 0},
            },
        )
        assert r.status_code == 422

    def test_invalid_method_rejected_by_schema(self, client):
        r = client.post(
            "/solve", json={"problem": "rosenbrock", "dim": 2, "method": "qn9"}
        )
        assert r.status_code == 422


class TestBenchEndpoint:
    def test_small_suite(self, client):
        r = client.post(
            "/bench",
            json={
                "methods": ["qn1", "qn3"],
                "problems": [
                    {"name": "rosenbrock", "dim": 2},
                    {"name": "discrete-boundary-value", "dim": 10},
                ],
                "settings": {"b0": "scaled-identity"},
                "tau_grid": [1.0, 2.0, 4.0],
            },
        )
        assert r.status_code == 200
        body = r.json()
        assert len(body["records"]) == 4
        assert all(rec["status"] == "converged" for rec in body["records"])
        for key in ("profile_iterations", "profile_fevals"):
            prof = body[key]
            assert prof["taus"] == [1.0, 2.0, 4.0]
            assert set(prof["values"]) == {"qn1", "qn3"}
            for col in prof["values"].values():
                assert all(0.0 <= v <= 1.0 for v in col)
                assert all(b >= a for a, b in zip(col, col[1:]))
                assert col[-1] == 1.0  # everything converged

    def test_bad_tau_grid_is_422(self, client):
        r = client.post(
            "/bench",
            json={
                "methods": ["qn1"],
                "problems": [{"name": "rosenbrock", "dim": 2}],
                "tau_grid": [0.25, 1.0],
            },
        )
        assert r.status_code == 422

    def test_unknown_problem_in_suite_is_404(self, client):
        r = client.post(
            "/bench",
            json={"methods": ["qn1"], "problems": [{"name": "nope", "dim": 2}]},
        )
        assert r.status_code == 404

    def test_duplicate_methods_is_422(self, client):
        r = client.post(
            "/bench",
            json={
                "methods": ["qn1", "qn1"],
                "problems": [{"name": "rosenbrock", "dim": 2}],
            },
        )
        assert r.status_code == 422
