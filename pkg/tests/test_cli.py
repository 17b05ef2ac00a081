"""
Tests for the command-line surface: output formats, exit codes and the
error response.
"""

import io
import json
from fractions import Fraction

import pytest

from src.cli import EXIT_NEGATIVE, EXIT_OK, EXIT_UNDECIDED, EXIT_USAGE, format_number, main
from src.models import DecisionResult, SolverOptions


@pytest.fixture
def square_path_file(tmp_path):
    """Unit square with the 3-edge path around it."""
    path = tmp_path / "square.json"
    path.write_text(json.dumps({
        "points": [[0, 0], [1, 0], [1, 1], [0, 1]],
        "edges": [[0, 1], [1, 2], [2, 3]],
    }))
    return str(path)


def run(*argv):
    """Run the CLI and return (exit code, stdout, stderr)."""
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


class TestFormatNumber:
    """Test cases for number formatting."""

    def test_integers_and_fractions(self):
        assert format_number(Fraction(3)) == "3"
        assert format_number(Fraction(308, 3)) == "308/3 (102.666666666667)"

    def test_floats(self):
        assert format_number(3.0) == "3"
        assert format_number(2 ** 0.5) == "1.4142135623731"


class TestGen:
    """Test cases for the gen command."""

    def test_rectangle_instance(self):
        code, out, _ = run("gen", "--partition", "1,2,3,2", "--t", "2")
        assert code == EXIT_OK
        data = json.loads(out)
        assert data["regime"] == "large_t"
        assert len(data["points"]) == 31
        assert data["w"] == "308/3"

    def test_random_points(self):
        code, out, _ = run("gen", "--random-points", "5", "--seed", "1")
        assert code == EXIT_OK
        assert len(json.loads(out)["points"]) == 5

    def test_write_to_file(self, tmp_path):
        target = tmp_path / "inst.json"
        code, out, _ = run("gen", "--partition", "1 2 3 2", "--t", "3/2", "--out", str(target))
        assert code == EXIT_OK
        assert out == ""
        assert len(json.loads(target.read_text())["points"]) == 45

    def test_missing_t(self):
        code, _, err = run("gen", "--partition", "1,2,3,2")
        assert code == EXIT_USAGE
        assert json.loads(err.strip().splitlines()[-1])["error_code"] == "INPUT_ERROR"

    def test_dominant_element_rejected(self):
        code, _, err = run("gen", "--partition", "3,3", "--t", "2")
        assert code == EXIT_USAGE
        response = json.loads(err.strip().splitlines()[-1])
        assert response["error_code"] == "REDUCTION_ERROR"
        assert response["details"]["failure_step"] == "instance_generation"


class TestGraphCommands:
    """Test cases for mst, greedy and dilation."""

    def test_dilation_text(self, square_path_file):
        code, out, _ = run("dilation", "--in", square_path_file)
        assert code == EXIT_OK
        assert out.strip() == "3"

    def test_dilation_json(self, square_path_file):
        code, out, _ = run("dilation", "--in", square_path_file, "--json", "--method", "floyd_warshall")
        data = json.loads(out)
        assert data["dilation"] == "3"
        assert data["witness_pair"] == [0, 3]
        assert data["connected"] is True

    def test_mst(self, square_path_file):
        code, out, _ = run("mst", "--in", square_path_file)
        data = json.loads(out)
        assert data["edges"] == [[0, 1], [0, 3], [1, 2]]
        assert data["weight"]["exact"] == "3"

    def test_greedy(self, square_path_file):
        code, out, _ = run("greedy", "--in", square_path_file, "--t", "3/2")
        assert code == EXIT_OK
        assert len(json.loads(out)["edges"]) == 4


class TestSearchCommands:
    """Test cases for solve, solve-plane, decide and mdg."""

    def test_solve(self, square_path_file):
        code, out, _ = run("solve", "--in", square_path_file, "--t", "3")
        assert code == EXIT_OK
        data = json.loads(out)
        assert data["status"] == "optimal"
        assert data["edges"] == [[0, 1], [0, 3], [1, 2]]

    def test_solve_exhaustive(self, square_path_file):
        code, out, _ = run("solve", "--in", square_path_file, "--t", "3/2", "--exhaustive")
        assert code == EXIT_OK
        weight = json.loads(out)["weight"]
        assert weight["exact"] == "4"
        assert weight["decimal"] == "4"

    def test_solve_plane_infeasible(self, square_path_file):
        code, out, _ = run("solve-plane", "--in", square_path_file, "--t", "21/20")
        assert code == EXIT_NEGATIVE
        assert json.loads(out)["status"] == "infeasible"

    def test_decide(self, square_path_file):
        code, out, _ = run("decide", "--in", square_path_file, "--t", "3/2", "--w", "4")
        assert (code, out.strip()) == (EXIT_OK, "yes")
        code, out, _ = run("decide", "--in", square_path_file, "--t", "3/2", "--w", "39/10")
        assert (code, out.strip()) == (EXIT_NEGATIVE, "no")

    def test_solve_irrational_weight(self, square_path_file):
        code, out, _ = run("solve", "--in", square_path_file, "--t", "21/20")
        weight = json.loads(out)["weight"]
        assert weight["exact"] is None
        assert float(weight["decimal"]) == pytest.approx(4 + 2 * 2 ** 0.5)

    def test_decide_json_weight(self, square_path_file):
        code, out, _ = run("decide", "--in", square_path_file, "--t", "3/2", "--w", "4", "--json")
        assert code == EXIT_OK
        assert json.loads(out)["weight"] == {"exact": "4", "decimal": "4"}

    def test_decide_indeterminate(self, mocker, square_path_file):
        mock_solver = mocker.patch("src.cli.solver_service")
        mock_solver.decide_lwst.return_value = DecisionResult(outcome="indeterminate", nodes=7)
        mock_solver.defaults = SolverOptions(node_budget=10)
        code, out, _ = run("decide", "--in", square_path_file, "--t", "2", "--w", "5", "--json")
        assert code == EXIT_UNDECIDED
        assert json.loads(out)["nodes"] == 7

    def test_mdg(self, square_path_file):
        code, out, _ = run("mdg", "--in", square_path_file, "--w", "4")
        assert code == EXIT_OK
        data = json.loads(out)
        assert float(data["dilation"]) == pytest.approx(2 ** 0.5)


class TestPartitionCommands:
    """Test cases for partition and verify-reduction."""

    def test_partition_yes(self):
        code, out, _ = run("partition", "--partition", "1,2,3,2")
        assert (code, out.strip()) == (EXIT_OK, "yes 0,2")

    def test_partition_no(self):
        code, out, _ = run("partition", "--partition", "2,4")
        assert (code, out.strip()) == (EXIT_NEGATIVE, "no")

    def test_partition_from_file(self, tmp_path):
        path = tmp_path / "values.txt"
        path.write_text("2 3 3 4\n")
        code, out, _ = run("partition", "--partition-file", str(path), "--json")
        assert json.loads(out)["subset"] == [0, 3]

    def test_verify_reduction_forward(self):
        code, out, _ = run("verify-reduction", "--partition", "3,3", "--t", "2")
        assert code == EXIT_OK
        report = json.loads(out)
        assert report["points"] == 19
        assert report["forward"]["passed"] is True

    def test_verify_reduction_no_instance(self):
        code, out, _ = run("verify-reduction", "--partition", "2,4", "--t", "2")
        assert code == EXIT_OK
        assert "skipped" in json.loads(out)["forward"]

    def test_verify_reduction_reverse_never_contradicts(self):
        code, out, _ = run(
            "verify-reduction", "--partition", "3,3", "--t", "2",
            "--direction", "reverse", "--node-budget", "50",
        )
        reverse = json.loads(out)["reverse"]
        assert reverse["agreement"] != "disagree"
        assert code in (EXIT_OK, EXIT_UNDECIDED)

    @pytest.mark.parametrize("values, decision", [("3,3", "yes"), ("2,4", "no")])
    def test_verify_reduction_reverse_agrees(self, values, decision):
        code, out, _ = run(
            "verify-reduction", "--partition", values, "--t", "2",
            "--direction", "reverse", "--node-budget", "100000",
        )
        reverse = json.loads(out)["reverse"]
        assert reverse["decision"] == decision
        assert reverse["agreement"] == "agree"
        assert code == EXIT_OK


class TestOtherCommands:
    """Test cases for verify-lemmas and render."""

    def test_verify_lemmas(self):
        code, out, _ = run("verify-lemmas", "--t", "2", "--samples", "20")
        assert code == EXIT_OK
        assert len(out.strip().splitlines()) == 4

    def test_render_graph(self, square_path_file):
        code, out, _ = run("render", "--in", square_path_file)
        assert code == EXIT_OK
        assert "</svg>" in out

    def test_render_instance(self, tmp_path):
        inst = tmp_path / "inst.json"
        run("gen", "--partition", "1,2,3,2", "--t", "2", "--out", str(inst))
        svg = tmp_path / "inst.svg"
        code, _, _ = run("render", "--in", str(inst), "--subset", "0,2", "--out", str(svg))
        assert code == EXIT_OK
        assert "</svg>" in svg.read_text()

    def test_render_minimal_instance_document(self, tmp_path):
        _, out, _ = run("gen", "--partition", "1,2,3,2", "--t", "3/2")
        full = json.loads(out)
        doc = {key: full[key] for key in ("regime", "t", "w", "points", "gadgets")}
        doc["endpoints"] = {"p": full["endpoints"]["p"], "q": full["endpoints"]["q"]}
        path = tmp_path / "minimal.json"
        path.write_text(json.dumps(doc))
        code, svg, _ = run("render", "--in", str(path), "--subset", "0,2")
        assert code == EXIT_OK
        assert "</svg>" in svg


class TestErrors:
    """Test cases for error reporting."""

    def test_missing_file(self, tmp_path):
        code, _, err = run("dilation", "--in", str(tmp_path / "nope.json"))
        assert code == EXIT_USAGE
        response = json.loads(err.strip().splitlines()[-1])
        assert response["error_code"] == "IO_ERROR"
        assert response["details"]["command"] == "dilation"

    def test_malformed_json_echoed_with_json_flag(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{")
        code, out, err = run("mst", "--in", str(path), "--json")
        assert code == EXIT_USAGE
        assert json.loads(out)["error_code"] == "GEOMETRY_ERROR"

    def test_invalid_rational(self, square_path_file):
        code, _, err = run("solve", "--in", square_path_file, "--t", "abc")
        assert code == EXIT_USAGE
        assert json.loads(err.strip().splitlines()[-1])["error_code"] == "VALIDATION_ERROR"

    def test_unknown_command(self):
        assert run("frobnicate")[0] == EXIT_USAGE

    def test_missing_required_flag(self, square_path_file):
        code, _, err = run("greedy", "--in", square_path_file)
        assert code == EXIT_USAGE
        assert json.loads(err.strip().splitlines()[-1])["error_code"] == "VALIDATION_ERROR"
