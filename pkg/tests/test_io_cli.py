import io
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from blockpinv.cli import run_command
from blockpinv.exceptions import ValidationError
from blockpinv.golden import GOLDEN, example_partition, to_array
from blockpinv.io import (
    ProblemFile,
    dumps,
    load_matrix,
    load_problem,
    matrix_to_json,
    problem_from_json,
    save_matrix,
    save_problem,
)
from blockpinv.testing import random_matrix, random_partition1x2, random_partition2x2, random_weight

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def run(*argv):
    out = io.StringIO()
    code = run_command([str(a) for a in argv], stdout=out)
    return code, json.loads(out.getvalue())


def write(tmp_path, name, kind, matrices, options=None):
    path = tmp_path / name
    save_problem(path, ProblemFile(kind, matrices, options or {}))
    return path


def raw_problem(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return path


def report_matrix(obj):
    """Matrix-file JSON (as embedded in a report) to an array."""
    return np.array([[complex(*x) if isinstance(x, list) else x for x in row] for row in obj["data"]],
                    dtype=np.complex128).reshape(obj["rows"], obj["cols"])


class TestMatrixFiles:
    def test_complex_round_trip_is_bit_exact(self, tmp_path, rng):
        A = random_matrix(rng, 3, 4)
        A[0, 0] = 1.0 + 0.0j
        A[1, 1] = -0.0 + 1e-300j
        path = tmp_path / "a.json"
        save_matrix(path, "A", A)
        name, B = load_matrix(path)
        assert name == "A"
        assert B.tobytes() == A.tobytes()

    def test_real_entries_written_as_numbers(self):
        obj = matrix_to_json("X", np.array([[1.5, 2.0 + 1.0j]]))
        assert obj["data"] == [[1.5, [2.0, 1.0]]]

    @pytest.mark.parametrize("data, match", [
        ([[1, 2]], "expected 2 rows"),
        ([[1, 2], [3]], "expected 2 entries"),
        ([[1, "x"], [3, 4]], "number or an \\[re, im\\] pair"),
        ([[1, [1, 2, 3]], [3, 4]], "number or an \\[re, im\\] pair"),
        ([[1, True], [3, 4]], "number or an \\[re, im\\] pair"),
    ])
    def test_malformed_data(self, tmp_path, data, match):
        path = raw_problem(tmp_path, "m.json", {"name": "A", "rows": 2, "cols": 2, "data": data})
        with pytest.raises(ValidationError, match=match):
            load_matrix(path)

    def test_non_finite_rejected(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text('{"name": "A", "rows": 1, "cols": 1, "data": [[NaN]]}')
        with pytest.raises(ValidationError, match="finite"):
            load_matrix(path)


class TestProblemFiles:
    def test_worked_example_fixture(self):
        problem = load_problem(FIXTURES / "worked_example_4x4.json")
        part = problem.partition2x2()
        ref = example_partition()
        np.testing.assert_array_equal(part.A, ref.A)
        np.testing.assert_array_equal(part.Mw.value, ref.Mw.value)
        np.testing.assert_array_equal(part.Nw.value, ref.Nw.value)

    @pytest.mark.parametrize("fixture", sorted(p.name for p in FIXTURES.glob("*.json")))
    def test_fixture_round_trip(self, tmp_path, fixture):
        original = (FIXTURES / fixture).read_text()
        save_problem(tmp_path / "copy.json", load_problem(FIXTURES / fixture))
        assert (tmp_path / "copy.json").read_text() == original

    def test_random_complex_round_trip(self, tmp_path, rng):
        part = random_partition1x2(rng, 4, 2, 3)
        mats = {"A": part.A, "B": part.B, "M": part.M.value, "N1": part.N1.value, "L": part.L, "N2": part.N2}
        first = write(tmp_path, "p.json", "part1x2", mats, {"cmp_tol": 1e-9})
        again = tmp_path / "q.json"
        save_problem(again, load_problem(first))
        assert first.read_bytes() == again.read_bytes()
        for name, value in load_problem(again).matrices.items():
            assert value.tobytes() == np.asarray(mats[name], dtype=np.complex128).tobytes()

    def test_non_hermitian_weight_names_field(self, tmp_path):
        path = write_raw_weighted(tmp_path, M=[[2, 1], [0, 2]])
        with pytest.raises(ValidationError) as info:
            load_problem(path)
        assert info.value.field == "matrices.M"

    def test_missing_required_matrix(self, tmp_path):
        path = raw_problem(tmp_path, "p.json", {"kind": "part1x2", "matrices": [matrix_to_json("A", np.eye(2))]})
        with pytest.raises(ValidationError) as info:
            load_problem(path)
        assert info.value.field == "matrices.B"

    def test_unknown_kind(self, tmp_path):
        with pytest.raises(ValidationError, match="kind"):
            problem_from_json({"kind": "part3x3", "matrices": []})

    def test_unknown_option(self):
        with pytest.raises(ValidationError, match="options.speed"):
            problem_from_json({"kind": "plain", "matrices": [matrix_to_json("A", np.eye(2))],
                               "options": {"speed": 3}})

    def test_block_weights_assemble(self, rng):
        part = random_partition2x2(rng, 2, 2, 2, 1, weights=True)
        M, N = part.Mw.value, part.Nw.value
        mats = {"A11": part.A11, "A12": part.A12, "A21": part.A21, "A22": part.A22,
                "M11": M[:2, :2], "M12": M[:2, 2:], "M22": M[2:, 2:],
                "N11": N[:2, :2], "N12": N[:2, 2:], "N22": N[2:, 2:]}
        problem = ProblemFile("part2x2", mats)
        np.testing.assert_allclose(problem.partition2x2().Mw.value, M, atol=1e-15)

    def test_incomplete_block_weight(self, rng):
        mats = {"A11": np.eye(1), "A12": np.eye(1), "A21": np.eye(1), "A22": np.eye(1), "M11": np.eye(1)}
        with pytest.raises(ValidationError, match="M12"):
            ProblemFile("part2x2", mats)

    def test_options_feed_tolerances(self):
        problem = ProblemFile("plain", {"A": np.eye(2)}, {"num_tol": 1e-6, "rank_rtol": 1e-10})
        tols = problem.tolerances()
        assert tols.num_tol == 1e-6 and tols.rank_rtol == 1e-10


def write_raw_weighted(tmp_path, M):
    obj = {"kind": "weighted", "matrices": [
        matrix_to_json("A", np.eye(2)),
        {"name": "M", "rows": 2, "cols": 2, "data": M},
        matrix_to_json("N", np.eye(2)),
    ]}
    return raw_problem(tmp_path, "w.json", obj)


class TestCommands:
    def test_example_replay(self):
        code, report = run("example-sec5")
        assert code == 0 and report["golden_ok"]
        np.testing.assert_allclose(report_matrix(report["result"]), to_array(GOLDEN["result"]), atol=1e-10)
        assert set(report["golden"]) == set(GOLDEN)

    def test_pinv(self, tmp_path, rng):
        A = random_matrix(rng, 4, 3, rank=2)
        code, report = run("pinv", write(tmp_path, "p.json", "plain", {"A": A}))
        assert code == 0
        np.testing.assert_allclose(report_matrix(report["result"]), np.linalg.pinv(A), atol=1e-10)
        assert report["residuals"]["ok"]

    def test_wpinv_then_verify(self, tmp_path):
        problem = FIXTURES / "weighted_rank2.json"
        code, report = run("wpinv", problem)
        assert code == 0
        candidate = tmp_path / "report.json"
        candidate.write_text(dumps(report))
        code, checked = run("verify", problem, "--candidate", candidate)
        assert code == 0 and checked["accepted"]
        assert max(checked["residuals"][k] for k in ("r1", "r2", "r3", "r4")) <= 1e-8

    def test_verify_rejects_wrong_candidate(self, tmp_path):
        bad = tmp_path / "x.json"
        save_matrix(bad, "X", np.ones((3, 4)))
        code, report = run("verify", FIXTURES / "weighted_rank2.json", "--candidate", bad)
        assert code == 2 and report["accepted"] is False

    @pytest.mark.parametrize("method", ["thm32", "thm33", "unified", "xu"])
    def test_wpinv_1x2_methods(self, method):
        code, report = run("wpinv-1x2", FIXTURES / "row_blocks.json", "--method", method)
        assert code == 0 and report["residuals"]["ok"]
        _, oracle = run("wpinv", FIXTURES / "row_blocks.json")
        np.testing.assert_allclose(report_matrix(report["result"]), report_matrix(oracle["result"]), atol=1e-10)

    def test_wpinv_1x2_thm32_reports_ac_inverse(self):
        _, report = run("wpinv-1x2", FIXTURES / "row_blocks.json", "--method", "thm32")
        assert report["method"]["AC_residuals"]["ok"]

    def test_wpinv_1x2_n3_file(self, tmp_path, rng):
        n3 = tmp_path / "n3.json"
        save_matrix(n3, "N3", random_weight(rng, 3))
        code, report = run("wpinv-1x2", FIXTURES / "row_blocks.json", "--method", "unified", "--n3", n3)
        assert code == 0 and report["method"]["N3"] == "given"
        assert report["residuals"]["ok"]

    def test_method_from_file_options(self):
        code, report = run("wpinv-1x2", FIXTURES / "row_blocks.json")
        assert code == 0 and report["method"]["name"] == "xu"

    def test_wpinv_2x2_weighted_trace(self):
        code, report = run("wpinv-2x2", FIXTURES / "worked_example_4x4.json", "--method", "weighted", "--trace")
        assert code == 0
        assert {"B_sharp", "SE_g", "XRE", "result"} <= set(report["trace"])
        np.testing.assert_allclose(report_matrix(report["result"]), to_array(GOLDEN["result"]), atol=1e-10)

    def test_wpinv_2x2_positive_reports_13_inverse(self, tmp_path, rng):
        G = random_matrix(rng, 3, 4)
        A = G.conj().T @ G
        A = (A + A.conj().T) / 2
        mats = {"A11": A[:2, :2], "A12": A[:2, 2:], "A21": A[2:, :2], "A22": A[2:, 2:]}
        code, report = run("wpinv-2x2", write(tmp_path, "p.json", "part2x2", mats), "--method", "positive")
        assert code == 0 and report["method"]["inv13_residuals"]["ok"]

    def test_unweighted_method_rejects_weights(self):
        code, report = run("wpinv-2x2", FIXTURES / "worked_example_4x4.json", "--method", "general")
        assert code == 1 and report["error"]["field"] == "method"

    @pytest.mark.parametrize("fixture", sorted(p.name for p in FIXTURES.glob("*.json")))
    def test_compare_fixtures(self, fixture):
        code, report = run("compare", FIXTURES / fixture)
        assert code == 0 and report["agree"]
        for group in report["groups"].values():
            assert all(d["rel_fro_diff"] <= 1e-8 for d in group["pairwise"])

    def test_compare_random_fixtures(self, tmp_path, rng):
        for i in range(5):
            part = random_partition1x2(rng, 5, 2, 3, rank_a=1, cond=10)
            mats = {"A": part.A, "B": part.B, "M": part.M.value, "N1": part.N1.value, "L": part.L, "N2": part.N2}
            code, report = run("compare", write(tmp_path, f"a{i}.json", "part1x2", mats))
            assert code == 0, report.get("error")
            part = random_partition2x2(rng, 2, 3, 2, 2, rank=3, cond=10, weights=True, weight_cond=10)
            mats = {"A11": part.A11, "A12": part.A12, "A21": part.A21, "A22": part.A22,
                    "M": part.Mw.value, "N": part.Nw.value}
            code, report = run("compare", write(tmp_path, f"b{i}.json", "part2x2", mats))
            assert code == 0, report.get("error")

    def test_reports_are_deterministic(self):
        reports = []
        for _ in range(2):
            _, report = run("compare", FIXTURES / "row_blocks.json")
            report.pop("timing")
            reports.append(dumps(report))
        assert reports[0] == reports[1]

    def test_report_structure(self):
        _, report = run("wpinv", FIXTURES / "weighted_rank2.json")
        assert {"command", "status", "inputs", "method", "result", "residuals", "timing"} <= set(report)
        assert set(report["inputs"]) == {"A", "M", "N"}


class TestExitCodes:
    def test_special_case_violation(self):
        code, report = run("wpinv-2x2", FIXTURES / "range_violation.json", "--method", "special")
        assert code == 2
        assert report["error"]["type"] == "PreconditionError"
        residuals = report["error"]["residuals"]
        assert len(residuals) == 2 and all(r > 1e-8 for r in residuals.values())

    def test_non_pd_weight(self, tmp_path):
        code, report = run("wpinv", write_raw_weighted(tmp_path, M=[[1, 0], [0, -1]]))
        assert code == 1 and report["error"]["field"] == "matrices.M"

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert run("pinv", path)[0] == 1

    def test_missing_file(self, tmp_path):
        assert run("pinv", tmp_path / "nope.json")[0] == 1

    def test_unknown_command(self):
        code, report = run("frobnicate")
        assert code == 1 and report["error"]["field"] == "argv"

    def test_bad_method_choice(self):
        assert run("wpinv-2x2", FIXTURES / "worked_example_4x4.json", "--method", "magic")[0] == 1

    def test_env_override(self, monkeypatch):
        monkeypatch.setenv("BLOCKPINV_NUM_TOL", "1e-6")
        _, report = run("wpinv", FIXTURES / "weighted_rank2.json")
        assert report["tolerances"]["num_tol"] == 1e-6

    def test_flag_beats_env(self, monkeypatch):
        monkeypatch.setenv("BLOCKPINV_CMP_TOL", "1e-6")
        _, report = run("wpinv", FIXTURES / "weighted_rank2.json", "--cmp-tol", "1e-9")
        assert report["tolerances"]["cmp_tol"] == 1e-9

    def test_bad_env_value(self, monkeypatch):
        monkeypatch.setenv("BLOCKPINV_RANK_RTOL", "lots")
        assert run("wpinv", FIXTURES / "weighted_rank2.json")[0] == 1

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "blockpinv", "example-sec5"], capture_output=True, text=True)
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["golden_ok"]
