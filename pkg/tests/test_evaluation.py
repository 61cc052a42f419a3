import csv
import io
import json
import math
from pathlib import Path

import numpy as np
import pytest

from clearn.errors import InvalidParameterError
from clearn.evaluation import MethodSpec, Protocol, ReplicationReport, replicate, run_replication, summarize

PROTOCOLS = Path(__file__).resolve().parent.parent / "protocols"

TINY = {
    "generator": "disk",
    "n": 200,
    "train_fraction": 0.25,
    "cv_folds": 3,
    "methods": [
        {"name": "svm", "kind": "svm", "gamma_grid": [0.01], "probabilities": ["crho", "platt", "sollich"]},
        {"name": "c_learning", "kind": "c_learning", "gamma_grid": [0.01, 0.1], "omega_grid": [0.5]},
    ],
}


@pytest.fixture(scope="module")
def tiny_result():
    return replicate(TINY, 3, base_seed=5)


class TestReport:
    def test_single_value(self):
        r = ReplicationReport.from_values("m", [0.3], [0])
        assert r.mean == 0.3 and r.std == 0.0 and r.n == 1

    def test_constant(self):
        assert ReplicationReport.from_values("m", [0.2] * 4, range(4)).std == 0.0

    def test_sample_std(self):
        r = ReplicationReport.from_values("m", [1.0, 2.0, 4.0], [0, 1, 2])
        assert r.mean == pytest.approx(7 / 3)
        assert r.std == pytest.approx(math.sqrt(((1 - 7 / 3) ** 2 + (2 - 7 / 3) ** 2 + (4 - 7 / 3) ** 2) / 2))


class TestProtocol:
    def test_round_trip(self):
        p = Protocol.from_dict(TINY)
        assert Protocol.from_dict(p.to_dict()) == p

    def test_shipped_protocols_parse(self):
        for path in PROTOCOLS.glob("*.json"):
            Protocol.from_dict(json.loads(path.read_text()))

    @pytest.mark.parametrize(
        "patch",
        [
            {"generator": "moons"},
            {"gkl_form": "js"},
            {"sigma": -1.0},
            {"colour": "red"},
            {"methods": []},
        ],
    )
    def test_rejects(self, patch):
        with pytest.raises(InvalidParameterError):
            Protocol.from_dict({**TINY, **patch})

    def test_method_validation(self):
        with pytest.raises(InvalidParameterError):
            MethodSpec(name="a.b", kind="svm")
        with pytest.raises(InvalidParameterError):
            MethodSpec(name="svm", kind="svm", probabilities=["isotonic"])
        with pytest.raises(InvalidParameterError):
            MethodSpec(name="svm", kind="svm", solver="sgd")


class TestReplication:
    def test_metric_names(self):
        rec = run_replication(Protocol.from_dict(TINY), 1)
        for key in ("sigma", "bayes.cer", "svm.cer", "svm.crho.gkl", "svm.platt.gkl", "svm.sollich.cer",
                    "svm.rho_hat", "c_learning.eta_tilde.gkl", "c_learning.omega", "c_learning.converged"):
            assert key in rec
        assert rec["bayes.entropy"] > 0.49

    def test_sign_consistency_identity(self, tiny_result):
        for row in tiny_result.rows:
            assert row["svm.crho.cer"] == row["svm.cer"]
            assert row["svm.sollich.cer"] == row["svm.cer"]
            assert row["c_learning.eta_tilde.cer"] == row["c_learning.cer"]

    def test_deterministic(self, tiny_result):
        again = replicate(TINY, 3, base_seed=5)
        assert again.summary_json() == tiny_result.summary_json()
        assert again.per_rep_csv() == tiny_result.per_rep_csv()

    def test_seeds_and_counts(self, tiny_result):
        assert [r["seed"] for r in tiny_result.rows] == [5, 6, 7]
        s = tiny_result.summary()
        assert s["n_ok"] == 3 and s["n_failed"] == 0

    def test_summary_matches_per_rep_file(self, tiny_result):
        rows = list(csv.DictReader(io.StringIO(tiny_result.per_rep_csv())))
        metrics = tiny_result.summary()["metrics"]
        for name, stats in metrics.items():
            vals = [float(r[name]) for r in rows]
            assert stats["mean"] == pytest.approx(float(np.mean(vals)), rel=1e-15, abs=1e-300)
            assert stats["std"] == pytest.approx(float(np.std(vals, ddof=1)), rel=1e-12, abs=1e-300)

    def test_long_csv(self, tiny_result):
        rows = list(csv.DictReader(io.StringIO(tiny_result.long_csv())))
        assert {r["method"] for r in rows} == {"", "bayes", "svm", "c_learning"}
        assert len(rows) == 3 * len(tiny_result.reports)

    def test_failures_excluded(self):
        outcomes = [(2, {"m": 1.0}, None), (0, None, "ValueError: boom"), (1, {"m": 3.0}, None)]
        res = summarize(Protocol.from_dict(TINY), 0, 3, outcomes)
        assert res.metric("m").mean == 2.0 and res.metric("m").seeds == (1, 2)
        assert res.summary()["failures"] == [{"seed": 0, "error": "ValueError: boom"}]
        assert res.summary()["n_failed"] == 1

    def test_failing_replication_is_recorded(self):
        # three training points: too few for the bandwidth rule or five folds
        bad = {**TINY, "n": 30, "train_fraction": 0.1, "cv_folds": 5}
        res = replicate(bad, 2, base_seed=0)
        assert res.summary()["n_failed"] == 2 and not res.rows
        kind, _, msg = res.failures[0][1].partition(": ")
        assert kind.endswith("Error") and msg

    def test_parallel_matches_serial(self, tiny_result):
        par = replicate(TINY, 3, base_seed=5, n_jobs=2)
        assert par.summary_json() == tiny_result.summary_json()

    def test_bad_n_reps(self):
        with pytest.raises(InvalidParameterError):
            replicate(TINY, 0)
