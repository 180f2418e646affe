import json
import math

import numpy as np
from click.testing import CliRunner
from pytest import approx, fixture

from cli import cli, format_number, run, to_json
from factors import FactorKind, hc
from grid import TWO_PI, make_grid
from trigpoly import SampleSet, dft_coeffs, eval_trig_poly


@fixture
def runner():
    return CliRunner()


@fixture
def write_samples(tmp_path):
    def write(values, name="samples.csv", times=None):
        path = tmp_path / name
        lines = ["t,value" if times is not None else "value"]
        for i, value in enumerate(values):
            lines.append(f"{float(times[i])!r},{float(value)!r}" if times is not None else repr(float(value)))
        path.write_text("\n".join(lines) + "\n")
        return str(path)
    return write


@fixture
def write_spec(tmp_path):
    def write(data, name="spec.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data))
        return str(path)
    return write


def json_line(output):
    """The JSON object line of a command's output (log lines may precede it)"""
    return json.loads(next(line for line in output.splitlines() if line.startswith("{")))


def csv_rows(output, header):
    lines = output.splitlines()
    rows = []
    for line in lines[lines.index(header) + 1:]:
        cells = line.split(",")
        try:
            float(cells[0])
        except ValueError:
            continue
        rows.append(cells)
    return rows


def test_format_number():
    assert format_number(0.1) == "0.10000000000000001"
    assert format_number(3) == "3"
    assert format_number(True) == "true"
    assert format_number(math.inf) == "null"
    assert to_json({"a": [1.5, None], "b": "x"}) == '{"a": [1.5, null], "b": "x"}'


def test_nodes(runner):
    result = runner.invoke(cli, ["nodes", "--N", "3"])
    assert result.exit_code == 0
    values = [float(line) for line in result.output.split()]
    assert values == approx([0.0, TWO_PI / 3, 2 * TWO_PI / 3], rel=1e-15)

    shifted = runner.invoke(cli, ["nodes", "--N", "3", "--indicator", "1"])
    assert float(shifted.output.split()[0]) == approx(math.pi / 3, rel=1e-15)


def test_nodes_rejects_even_count(runner):
    result = runner.invoke(cli, ["nodes", "--N", "4"])
    assert result.exit_code == 2


def test_coeffs(runner, write_samples):
    result = runner.invoke(cli, ["coeffs", "--in", write_samples([1.0, 0.0, 0.0])])
    assert result.exit_code == 0
    data = json_line(result.output)
    assert data["a0"] == approx(2 / 3, rel=1e-14)
    assert data["a"] == approx([2 / 3], rel=1e-14)
    assert data["b"] == approx([0.0], abs=1e-15)


def test_eval_full_period_with_polynomial_params(runner, write_samples, write_spec):
    values = [0.3, -1.0, 0.25, 0.8, -0.4]
    spec = write_spec({"gamma": [1, 0, 0], "nu": "nu1", "r": 3, "I1": 0, "I2": 0})
    result = runner.invoke(cli, ["eval", "--spec", spec, "--in", write_samples(values), "--points", "4"])
    assert result.exit_code == 0
    rows = csv_rows(result.output, "t,value")
    assert len(rows) == 4
    t = np.array([float(row[0]) for row in rows])
    got = np.array([float(row[1]) for row in rows])
    assert t == approx(TWO_PI * np.arange(4) / 4, abs=1e-15)
    expected = eval_trig_poly(dft_coeffs(SampleSet(make_grid(5), values)), t)
    assert got == approx(expected, abs=1e-12)


def test_eval_partial_range(runner, write_samples, write_spec):
    spec = write_spec({"gamma": [1, 1, 1], "nu": "nu1", "r": 3})
    result = runner.invoke(cli, ["eval", "--spec", spec, "--in", write_samples([1.0, 0.0, 0.0, 0.0, 0.0]),
                                 "--t0", "0", "--t1", "1", "--points", "3"])
    assert result.exit_code == 0
    rows = csv_rows(result.output, "t,value")
    assert [float(row[0]) for row in rows] == approx([0.0, 1 / 3, 2 / 3], rel=1e-15)


def test_eval_is_deterministic(runner, write_samples, write_spec):
    args = ["eval", "--spec", write_spec({"gamma": [1, 0.5, 0.5], "nu": "nu3", "r": 3}),
            "--in", write_samples([0.1, 0.7, -0.2, 0.4, 0.0, 1.0, -0.6]), "--points", "25"]
    first = runner.invoke(cli, args)
    second = runner.invoke(cli, args)
    assert first.exit_code == 0
    assert first.output == second.output


def test_eval_checks_node_column(runner, write_samples, write_spec):
    spec = write_spec({"gamma": [1, 1, 1], "nu": "nu1", "r": 3})
    grid = make_grid(3)
    good = write_samples([1.0, 2.0, 3.0], "good.csv", times=list(grid.nodes))
    assert runner.invoke(cli, ["eval", "--spec", spec, "--in", good, "--points", "5"]).exit_code == 0

    bad = write_samples([1.0, 2.0, 3.0], "bad.csv", times=[0.0, 2.0, 4.0])
    result = runner.invoke(cli, ["eval", "--spec", spec, "--in", bad])
    assert result.exit_code == 2


def test_eval_derivative_gate(runner, write_samples, write_spec):
    spec = write_spec({"gamma": [1, 1, 1], "nu": "nu1", "r": 3})
    result = runner.invoke(cli, ["eval", "--spec", spec, "--in", write_samples([1.0, 0.0, 0.0]),
                                 "--deriv", "3"])
    assert result.exit_code == 2


def test_eval_missing_spec_file(runner, write_samples, tmp_path):
    result = runner.invoke(cli, ["eval", "--spec", str(tmp_path / "missing.json"),
                                 "--in", write_samples([1.0, 0.0, 0.0])])
    assert result.exit_code == 2


def test_compare_with_cubic_oracle(runner, write_samples, write_spec):
    spec = write_spec({"gamma": [1, 1, 1], "nu": "nu1", "r": 3})
    values = [0.2, -0.5, 1.0, 0.1, -0.3, 0.9, 0.0, -1.0, 0.4]
    result = runner.invoke(cli, ["compare", "--spec", spec, "--in", write_samples(values), "--oracle", "cubic"])
    assert result.exit_code == 0
    data = json_line(result.output)
    assert data["sup_err"] <= 1e-8 * 2.0
    assert data["l2_err"] <= data["sup_err"] * math.sqrt(TWO_PI)


def test_power(runner, write_samples, write_spec):
    spec = write_spec({"gamma": [1, 1, 1], "nu": "nu1", "r": 3})
    result = runner.invoke(cli, ["power", "--spec", spec, "--in", write_samples([1.0, 0.0, 0.0, 0.5, -0.5]),
                                 "--deriv", "1"])
    assert result.exit_code == 0
    data = json_line(result.output)
    assert list(data) == ["series", "quadrature", "pc", "ps", "a0_term", "quadrature_error"]
    assert data["a0_term"] == 0.0
    assert data["quadrature"] == approx(data["series"], rel=1e-6)


def test_factors(runner, write_spec):
    spec = write_spec({"gamma": [1, 1, 1], "nu": "nu1", "r": 3, "N": 5})
    result = runner.invoke(cli, ["factors", "--spec", spec])
    assert result.exit_code == 0
    data = json_line(result.output)
    assert len(data["hc"]) == 2 and data["hc"] == data["hs"]
    assert data["relaxed"] is False and data["tail_terms"] >= 1

    no_size = write_spec({"gamma": [1, 1, 1], "nu": "nu1", "r": 3}, "no_size.json")
    assert runner.invoke(cli, ["factors", "--spec", no_size]).exit_code == 2


def test_degenerate_factor_exits_with_numerical_code(runner, write_samples, write_spec):
    alias_sum = hc((0.0, 1.0, 1.0), FactorKind.NU3, 1, 3, 3, 0, 0)
    spec = write_spec({"gamma": [-alias_sum, 1, 1], "nu": "nu3", "r": 3})
    result = runner.invoke(cli, ["eval", "--spec", spec, "--in", write_samples([1.0, 0.0, 0.0])])
    assert result.exit_code == 3


def test_moments(runner, write_samples):
    values = list(np.exp(np.sin(make_grid(9).nodes)))
    result = runner.invoke(cli, ["--tail-max-terms", "2000000", "moments", "--in", write_samples(values)])
    assert result.exit_code == 0
    data = json_line(result.output)
    assert len(data["trig"]) == 9 and len(data["cyclic"]) == 9
    assert data["max_rel_diff"] <= 1e-6


def test_convergence(runner):
    result = runner.invoke(cli, ["convergence", "--fn", "expsin", "--r", "3", "--Ns", "9,17,35"])
    assert result.exit_code == 0
    rows = csv_rows(result.output, "N,sup_err")
    assert [int(row[0]) for row in rows] == [9, 17, 35]
    summary = json_line(result.output)
    assert summary["order"] == approx(4.0, abs=0.5) and summary["exact"] is False


def test_convergence_needs_three_sizes(runner):
    result = runner.invoke(cli, ["convergence", "--fn", "expsin", "--r", "3", "--Ns", "9,17"])
    assert result.exit_code == 3


def test_sweep(runner, write_samples):
    values = [0.2, -0.5, 1.0, 0.1, -0.3, 0.9, 0.0, -1.0, 0.4]
    result = runner.invoke(cli, ["sweep", "--in", write_samples(values), "--r", "3", "--deriv", "2",
                                 "--grid", "0,1"])
    assert result.exit_code == 0
    rows = csv_rows(result.output, "g1,g2,g3,power,flag")
    assert len(rows) == 4
    assert all(row[4] in ("ok", "winner") for row in rows)
    cells = {tuple(float(x) for x in row[:3]): row for row in rows}
    assert cells[(1.0, 0.0, 0.0)][4] == "ok"


def test_sweep_free_header(runner, write_samples):
    result = runner.invoke(cli, ["sweep", "--in", write_samples([0.2, -0.5, 1.0, 0.1, -0.3]), "--r", "3",
                                 "--grid", "1", "--free"])
    assert result.exit_code == 0
    assert len(csv_rows(result.output, "g1,g2,g3,h1,h2,h3,power,flag")) == 1


def test_sweep_rejects_bad_grid(runner, write_samples):
    result = runner.invoke(cli, ["sweep", "--in", write_samples([0.2, -0.5, 1.0]), "--r", "3",
                                 "--grid", "a,b"])
    assert result.exit_code == 2


def test_run_returns_exit_codes(capsys):
    assert run(["nodes", "--N", "5"]) == 0
    assert len(capsys.readouterr().out.split()) == 5
    assert run(["nodes"]) == 2
    assert run(["nodes", "--N", "6"]) == 2
    assert run(["convergence", "--fn", "nope", "--r", "3", "--Ns", "5,7,9"]) == 2
