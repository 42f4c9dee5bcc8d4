import json

import numpy as np
import pytest

from opennet import cli
from opennet.errors import ConditioningError, ValidationError
from opennet.fixtures import NAMES, fixture_path, load_fixture
from opennet.io import (
    csv_text,
    dumps,
    parse_edge_list,
    parse_edge_text,
    parse_roles,
    resolve_roles,
    serialize_edge_list,
)


class TestEdgeList:
    def test_unit_edges(self):
        spec = parse_edge_text("a b\nb c")
        assert spec.node_ids == ("a", "b", "c")
        assert spec.edges == ((0, 1, 1.0), (1, 2, 1.0))

    def test_weight(self):
        assert parse_edge_text("a b 2.5").edges == ((0, 1, 2.5),)

    def test_negative_weight_names_line(self):
        with pytest.raises(ValidationError, match="line 1"):
            parse_edge_text("a b -1")

    def test_malformed_line(self):
        with pytest.raises(ValidationError, match="line 3"):
            parse_edge_text("# header\na b\na b c d\n")
        with pytest.raises(ValidationError, match="line 1"):
            parse_edge_text("a b heavy")

    def test_comments_and_blank_lines(self):
        spec = parse_edge_text("# c\n\nx y 2 # trailing\n  \ny x\n")
        assert spec.node_ids == ("x", "y")
        assert spec.edges == ((0, 1, 2.0), (1, 0, 1.0))

    def test_empty(self):
        with pytest.raises(ValidationError):
            parse_edge_text("# nothing\n")

    @pytest.mark.parametrize("name", NAMES)
    def test_round_trip(self, name):
        spec = parse_edge_list(fixture_path(name))
        again = parse_edge_text(serialize_edge_list(spec))
        assert again == spec

    def test_round_trip_awkward_weights(self, rng):
        w = rng.uniform(0, 10, size=20)
        text = "\n".join(f"n{k} n{k + 1} {x!r}" for k, x in enumerate(w.tolist()))
        spec = parse_edge_text(text)
        assert parse_edge_text(serialize_edge_list(spec)) == spec
        assert [e[2] for e in spec.edges] == w.tolist()


class TestRoles:
    spec = parse_edge_text("a b\nb c")

    def test_inputs_only(self):
        assert resolve_roles(self.spec, {"inputs": ["a"]}) == ((0,), (0, 1, 2))

    def test_siso(self):
        assert resolve_roles(self.spec, {"inputs": ["a"], "outputs": ["c"]}) == ((0,), (2,))

    def test_unknown_label(self):
        with pytest.raises(ValidationError, match="zz"):
            resolve_roles(self.spec, {"inputs": ["zz"]})

    def test_empty_inputs(self):
        with pytest.raises(ValidationError):
            resolve_roles(self.spec, {"inputs": []})

    def test_file(self, tmp_path):
        p = tmp_path / "roles.json"
        p.write_text('{"inputs": ["b"]}')
        assert parse_roles(p, self.spec)[0] == (1,)
        p.write_text("{not json")
        with pytest.raises(ValidationError):
            parse_roles(p, self.spec)


class TestSerialisation:
    def test_floats_round_trip(self, rng):
        x = rng.normal(size=50) * 10.0 ** rng.integers(-300, 300, size=50)
        back = json.loads(dumps({"x": x}))["x"]
        assert np.array_equal(np.array(back), x)

    def test_non_finite_is_null(self):
        assert json.loads(dumps({"a": float("-inf"), "b": np.nan})) == {"a": None, "b": None}

    def test_csv(self):
        text = csv_text(["omega", "mag_db"], [(0.1, -3.0)])
        assert text == "omega,mag_db\n0.1,-3.0\n"


def run_cli(capsys, *argv):
    code = cli.run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestCli:
    def test_h2_chain3(self, capsys):
        code, out, _ = run_cli(capsys, "h2", "fixture:chain3")
        assert code == 0
        payload = json.loads(out)
        assert payload["h2_squared"] == pytest.approx(0.1875, rel=1e-12)
        assert payload["tool"]["name"] == "opennet"
        assert "config" in payload

    def test_structure_fig5(self, capsys):
        code, out, _ = run_cli(capsys, "structure", "fixture:fig5_weighted")
        assert code == 0
        assert json.loads(out)["shortest_path"] == 2

    def test_sample_full_set(self, capsys, tmp_path):
        spec = load_fixture("chain4")
        roles = tmp_path / "all.json"
        roles.write_text(json.dumps({"inputs": list(spec.node_ids)}))
        code, out, _ = run_cli(
            capsys, "sample", "fixture:chain4", "--real-inputs", str(roles), "--samples", "100"
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["std"] == pytest.approx(0.0, abs=1e-14)
        assert payload["classification"] == "typical"

    def test_byte_identical_runs(self, capsys):
        first = run_cli(capsys, "sample", "fixture:ring", "--samples", "500", "--seed", "9")[1]
        second = run_cli(capsys, "sample", "fixture:ring", "--samples", "500", "--seed", "9")[1]
        assert first == second

    def test_bode_csv(self, capsys, tmp_path):
        csv_path = tmp_path / "bode.csv"
        code, out, _ = run_cli(
            capsys, "bode", "fixture:fig5_weighted", "--pair", "in", "out", "--csv", str(csv_path)
        )
        assert code == 0
        assert csv_path.read_text().splitlines()[0] == "omega,mag_db,phase_deg"
        payload = json.loads(out)
        assert payload["prediction"]["predicted_slope_db_per_decade"] == -60

    def test_dcgain_paths(self, capsys):
        code, out, _ = run_cli(
            capsys, "dcgain", "fixture:fig4_dag", "--pair", "1", "5", "--paths", "--margin", "2"
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["inverse_entry"] == pytest.approx(-5 / 32, rel=1e-12)
        assert len(payload["paths"]) == 3

    def test_rank(self, capsys):
        code, out, _ = run_cli(capsys, "rank", "fixture:chain5", "--k", "2")
        assert code == 0
        assert [r["node"] for r in json.loads(out)["ranking"]] == ["5", "4"]

    def test_gramian_and_out_file(self, capsys, tmp_path):
        target = tmp_path / "g.json"
        code, out, _ = run_cli(capsys, "gramian", "fixture:star", "--out", str(target))
        assert code == 0 and out == ""
        assert json.loads(target.read_text())["trace"] == pytest.approx(2.25)

    def test_simulate_csv_stdout(self, capsys):
        code, out, _ = run_cli(capsys, "simulate", "fixture:chain2", "--horizon", "5", "--step", "0.5")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "time,y_2"
        assert len(lines) == 12

    def test_validation_exit_code(self, capsys, tmp_path):
        bad = tmp_path / "bad.edges"
        bad.write_text("a b -1\n")
        code, _, err = run_cli(capsys, "h2", str(bad))
        assert code == 1
        assert "line 1" in err

    def test_missing_file(self, capsys):
        assert run_cli(capsys, "h2", "nowhere.edges")[0] == 1

    def test_bad_flag_exit_code(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.run(["h2", "fixture:chain3", "--margin", "-1"])
        assert exc.value.code == 1

    def test_sample_size_mismatch(self, capsys):
        code, _, _ = run_cli(capsys, "sample", "fixture:chain3", "--m", "5")
        assert code == 1

    def test_numeric_exit_code(self, capsys, monkeypatch):
        def fail(*_):
            raise ConditioningError("Lyapunov residual too large")

        monkeypatch.setitem(cli.COMMANDS, "h2", fail)
        code, out, err = run_cli(capsys, "h2", "fixture:chain3")
        assert code == 2 and out == "" and "residual" in err

    def test_unknown_pair_label(self, capsys):
        code, _, err = run_cli(capsys, "dcgain", "fixture:chain3", "--pair", "1", "9")
        assert code == 1 and "9" in err
