import csv
import json
import time
from importlib import resources
from pathlib import Path

import numpy as np
import pytest

from collapse_lab.cli import main
from collapse_lab.config import load_config, parse_config
from collapse_lab.errors import ParseError, ValidationError
from collapse_lab.runner import RunReport, dumps, emit, run

BUNDLED = sorted(p for p in resources.files("collapse_lab").joinpath("examples").iterdir() if p.name.endswith(".json"))


def write(tmp_path, obj, name="cfg.json"):
    path = tmp_path / name
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj), encoding="utf-8")
    return path


class TestLoadConfig:
    def test_qubit_sweep_params(self, tmp_path):
        cfg = load_config(write(tmp_path, {"kind": "qubit-sweep", "state": {"p": 0.5, "gamma": [1, 0]}}))
        assert cfg.kind == "qubit-sweep"
        assert cfg.qubit.p == 0.5 and cfg.qubit.gamma == 1
        assert cfg.seed == 42 and cfg.shots == 100_000

    def test_bad_trace_names_state(self, tmp_path):
        with pytest.raises(ValidationError) as exc:
            load_config(write(tmp_path, {"kind": "coherence-audit", "state": [[0.5, 0], [0, 0.4]]}))
        assert exc.value.field == "state"

    def test_degenerate_observable(self, tmp_path):
        cfg = {"kind": "coherence-audit", "state": [[0.5, 0], [0, 0.5]],
               "observables": {"x": [[1, 0], [0, 1 + 1e-12]]}}
        with pytest.raises(ValidationError, match="degenerate observable") as exc:
            load_config(write(tmp_path, cfg))
        assert exc.value.field == "observables.x"

    def test_malformed_json_has_position(self, tmp_path):
        with pytest.raises(ParseError) as exc:
            load_config(write(tmp_path, '{\n  "kind": "qubit-sweep",\n  oops\n}'))
        assert exc.value.line == 3 and exc.value.column == 3

    def test_complex_pairs_and_dimension_mismatch(self, tmp_path):
        cfg = {"kind": "coherence-audit", "state": [[0.5, [0.1, 0.2]], [[0.1, -0.2], 0.5]],
               "observables": {"x": [[1, 0], [0, -1]]}}
        loaded = parse_config(cfg)
        assert loaded.state.matrix[0, 1] == 0.1 + 0.2j
        cfg["observables"] = {"x": [[1, 0, 0], [0, 2, 0], [0, 0, 3]]}
        with pytest.raises(ValidationError, match="dimension"):
            parse_config(cfg)

    @pytest.mark.parametrize("raw,field", [
        ({"kind": "nope"}, "kind"),
        ({"kind": "cmo-probe", "state": {"p": 0.5}}, "hamiltonian"),
        ({"kind": "two-measurement"}, "state"),
        ({"kind": "qubit-sweep", "seed": -1}, "seed"),
        ({"kind": "qubit-sweep", "shots": 0}, "shots"),
        ({"kind": "qubit-sweep", "output": {"format": "xml"}}, "output.format"),
        ({"kind": "cmo-probe", "state": {"p": 0.5}, "hamiltonian": [[0, 1], [0, 0]]}, "hamiltonian"),
        ({"kind": "coherence-audit", "state": {"p": 0.5, "gamma": [2, 0]}}, "state"),
        ({"kind": "cmo-probe", "state": {"p": 0.5}, "hamiltonian": [[0, 1], [1, 0]], "t_grid": [0.1, 0.2]}, "t_grid"),
    ])
    def test_validation_fields(self, raw, field):
        with pytest.raises(ValidationError) as exc:
            parse_config(raw)
        assert exc.value.field == field


class TestRun:
    def test_two_measurement_plus_state(self):
        cfg = parse_config({"kind": "two-measurement",
                            "state": {"p": 0.5, "gamma": [1, 0], "theta": np.pi / 2, "phi": 0}})
        rep = run(cfg)
        rows = {round(r[0]): r for r in rep.tables["distributions"].rows}
        assert rows[1][3] == pytest.approx(0.5, abs=1e-12)
        assert rows[-1][3] == pytest.approx(-0.5, abs=1e-12)

    def test_qubit_sweep_default_grid(self):
        rep = run(parse_config({"kind": "qubit-sweep"}))
        assert rep.summary["points"] == 11 * 3 * 3 * 7 * 9
        assert rep.summary["max_abs_diff"] < 1e-10

    def test_classical_random_n16(self):
        rep = run(parse_config({"kind": "classical-check", "classical": {"systems": 5, "size": 16}}))
        assert rep.summary["max_total_probability_residual"] < 1e-12
        assert rep.summary["max_total_variance_residual"] < 1e-12
        assert rep.summary["max_cmo_deviation_at_zero"] == 0.0

    def test_cmo_probe_reports_exponents(self):
        rep = run(parse_config({"kind": "cmo-probe", "state": {"p": 0.2, "gamma": [0.5, 0]},
                                "hamiltonian": [[0, 1], [1, 0]]}))
        assert 1.9 <= rep.summary["min_exponent"] <= rep.summary["max_exponent"] <= 2.1
        assert rep.summary["repeat_agreement_at_t_min"] > 0.999

    def test_coherence_audit(self):
        rep = run(parse_config({"kind": "coherence-audit", "state": {"p": 0.5, "gamma": [0, 1]}}))
        assert rep.coherence["trace_distance"] == pytest.approx(1.0)
        assert rep.summary["variational_trace_distance"] == pytest.approx(1.0, abs=1e-4)
        assert rep.coherence["incoherent"] is False

    def test_determinism_excluding_wall_time(self):
        cfg = parse_config({"kind": "two-measurement", "state": {"p": 0.3, "gamma": [0.2, 0.5], "theta": 1.0}, "shots": 5000})
        assert dumps(run(cfg), include_wall_time=False) == dumps(run(cfg), include_wall_time=False)


class TestEmit:
    def test_json_round_trip(self, tmp_path):
        rep = run(parse_config({"kind": "cmo-probe", "state": {"p": 0.2, "gamma": [0.5, 0]},
                                "hamiltonian": [[0, 1], [1, 0]], "shots": 1000}))
        path = emit(rep, "json", tmp_path / "r.json")[0]
        back = RunReport.from_dict(json.loads(path.read_text()))
        assert back.to_dict() == rep.to_dict()
        # NaN exponents on the diagonal are never written; JSON stays standard
        assert "NaN" not in path.read_text()

    def test_csv_distribution_table(self, tmp_path):
        rep = run(parse_config({"kind": "two-measurement", "state": {"p": 0.3, "gamma": [0.2, 0.5], "theta": 1.0},
                                "shots": 1000}))
        files = {p.name: p for p in emit(rep, "csv", tmp_path / "out")}
        with files["distributions.csv"].open() as fh:
            rows = list(csv.reader(fh))
        assert len(rows) == 3
        assert rows[0][:4] == ["y_label", "P_direct", "P_post", "residual"]
        assert float(rows[1][1]) == rep.tables["distributions"].rows[0][1]

    def test_csv_full_precision(self, tmp_path):
        rep = RunReport(scenario={}, seed=1)
        rep.table("t", ["v"]).add(1 / 3)
        path = [p for p in emit(rep, "csv", tmp_path) if p.name == "t.csv"][0]
        assert path.read_text().splitlines()[1] == "0.33333333333333331"


class TestCLI:
    def test_run_json_twice_identical(self, tmp_path, capsys):
        cfg = write(tmp_path, {"kind": "two-measurement", "state": {"p": 0.4, "gamma": [0.3, 0.3], "theta": 0.8},
                               "shots": 2000})
        outs = []
        for _ in range(2):
            assert main(["run", str(cfg), "--out", str(tmp_path / "r.json")]) == 0
            data = json.loads((tmp_path / "r.json").read_text())
            data.pop("wall_time")
            outs.append(json.dumps(data))
        assert outs[0] == outs[1]

    def test_overrides_are_echoed(self, tmp_path):
        cfg = write(tmp_path, {"kind": "two-measurement", "state": {"p": 0.4}, "observables": {"y": {"theta": 1.0}}})
        assert main(["run", str(cfg), "--seed", "9", "--shots", "123", "--out", str(tmp_path / "r.json")]) == 0
        data = json.loads((tmp_path / "r.json").read_text())
        assert data["seed"] == 9 and data["scenario"]["shots"] == 123

    def test_csv_format(self, tmp_path):
        cfg = write(tmp_path, {"kind": "qubit-sweep", "sweep": {"p": [0.5], "theta": [0.0, 1.0]}})
        assert main(["run", str(cfg), "--format", "csv", "--out", str(tmp_path / "csv")]) == 0
        assert (tmp_path / "csv" / "sweep.csv").exists()

    def test_validate(self, tmp_path, capsys):
        good = write(tmp_path, {"kind": "qubit-sweep"})
        assert main(["validate", str(good)]) == 0
        bad = write(tmp_path, {"kind": "coherence-audit", "state": [[0.9]]}, "bad.json")
        assert main(["validate", str(bad)]) == 2
        assert "state" in capsys.readouterr().err

    def test_parse_error_exit_code(self, tmp_path):
        assert main(["run", str(write(tmp_path, "{not json"))]) == 2

    def test_missing_file_is_runtime_error(self, tmp_path):
        assert main(["run", str(tmp_path / "missing.json")]) == 1

    def test_runtime_error_exit_code(self, tmp_path):
        # classical system whose only X cell with weight is shifted onto zero weight
        cfg = {"kind": "classical-check", "t_grid": [2.0],
               "classical": {"system": {"distribution": [1.0, 0.0], "partition_x": [0, 1], "partition_y": [0, 0]}}}
        assert main(["run", str(write(tmp_path, cfg))]) == 1

    def test_oracle(self, capsys):
        assert main(["oracle", "--p", "0.5", "--gamma-re", "1", "--theta", str(np.pi / 2)]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["P_direct"][1] == pytest.approx(1.0)
        assert out["P_post"] == pytest.approx([0.5, 0.5])
        assert out["trace_distance"] == pytest.approx(1.0)
        assert main(["oracle", "--p", "2"]) == 2

    def test_stdout_json(self, tmp_path, capsys):
        assert main(["run", str(write(tmp_path, {"kind": "qubit-sweep", "sweep": {"p": [0.5]}}))]) == 0
        assert json.loads(capsys.readouterr().out)["summary"]["points"] == 3 * 3 * 7 * 9


@pytest.mark.parametrize("path", BUNDLED, ids=lambda p: p.name)
def test_bundled_examples_run_quickly(path, tmp_path):
    cfg = load_config(path)
    start = time.perf_counter()
    rep = run(cfg)
    assert time.perf_counter() - start < 10.0
    emit(rep, cfg.output_format, tmp_path / Path(cfg.output_path).name)


def test_every_kind_has_a_bundled_example():
    kinds = {load_config(p).kind for p in BUNDLED}
    assert kinds == {"cmo-probe", "two-measurement", "classical-check", "coherence-audit", "qubit-sweep"}
