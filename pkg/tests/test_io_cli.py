import csv
import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

from irrepscatter import io
from irrepscatter.bipartition import decompose, verify_membership
from irrepscatter.cli import main
from irrepscatter.fixtures import build_corpus, corpus_problems, three_qubit_spectrum


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


# -- serialization ---------------------------------------------------------


def test_complex_roundtrip_is_exact(rng):
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    a[0, 0] = 1 / 3 + 1e-300j
    back = io.decode_complex(json.loads(io.dumps({"a": io.encode_complex(a)}))["a"])
    assert np.array_equal(back, a)


def test_decode_errors():
    with pytest.raises(io.SchemaError):
        io.decode_complex([1.0, 2.0, 3.0])
    with pytest.raises(io.SchemaError):
        io.decode_complex([["a", "b"]])
    with pytest.raises(io.SchemaError):
        io.decode_complex([[1, 0]], ndim=2)


def test_problem_roundtrip(tmp_path):
    for stem, problem in corpus_problems().items():
        path = tmp_path / f"{stem}.json"
        io.write_problem(path, problem)
        back = io.load_problem(path)
        assert back.dim == problem.dim
        assert [n for n, _ in back.generators] == [n for n, _ in problem.generators]
        for (_, a), (_, b) in zip(back.generators, problem.generators):
            assert np.array_equal(a, b)
        for k in problem.operators:
            assert np.array_equal(back.operators[k], problem.operators[k])
        assert back.tolerances == problem.tolerances


def test_problem_schema_errors():
    with pytest.raises(io.SchemaError):
        io.problem_from_dict({"generators": []})
    with pytest.raises(io.SchemaError):
        io.problem_from_dict({"dim": 2, "generators": [{"name": "a", "matrix": [[[1, 0]]]}]})
    with pytest.raises(io.SchemaError):
        io.problem_from_dict({"dim": 1, "generators": [], "options": {"tolerances": {"tol_bogus": 1}}})
    p = io.problem_from_dict({"dim": 1, "generators": [{"name": "a", "matrix": [[[1, 0]]]}]})
    with pytest.raises(io.SchemaError):
        p.lookup("nope")


def test_report_roundtrip_reproduces_residuals(tmp_path):
    problem = corpus_problems()["heisenberg4"]
    gens = problem.generator_matrices
    dec = decompose(gens)
    path = tmp_path / "r.json"
    io.write_json(path, io.decomposition_report(dec, gens))
    bpt, diag = io.load_report(path)
    assert bpt == dec.bpt
    again = max(verify_membership(bpt, g).residual for g in gens)
    assert again <= 10 * max(diag["max_residual"], 1e-16)


def test_pbpt_roundtrip():
    from irrepscatter.fixtures import singlet_triplet_pbpt
    pbpt = singlet_triplet_pbpt()
    back, obs = io.pbpt_from_dict(json.loads(io.dumps(io.pbpt_to_dict(pbpt, {"I": np.eye(4)}))))
    assert back.rows == pbpt.rows and back.cols == pbpt.cols
    for key, v in pbpt.cells.items():
        assert np.array_equal(back.cells[key], v)
    assert np.array_equal(obs["I"], np.eye(4))


def test_state_from_dict():
    rho = io.state_from_dict({"dim": 2, "psi": [[3, 0], [0, 4]]})
    np.testing.assert_allclose(np.trace(rho), 1)
    with pytest.raises(io.SchemaError):
        io.state_from_dict({"dim": 2})


def test_shipped_corpus_is_current(tmp_path, corpus_dir):
    build_corpus(tmp_path)
    fresh = sorted(p.name for p in tmp_path.iterdir())
    shipped = sorted(p.name for p in corpus_dir.glob("*.json"))
    assert fresh == shipped
    for name in fresh:
        assert (tmp_path / name).read_bytes() == (corpus_dir / name).read_bytes(), name


# -- CLI -------------------------------------------------------------------


def test_decompose_three_qubit(tmp_path, corpus_dir, capsys):
    out = tmp_path / "d.json"
    code, _, err = run(["decompose", "-i", corpus_dir / "three_qubit.json", "-o", out,
                        "--random-checks", 5], capsys)
    assert code == 0
    assert "blocks=[2x1, 2x1, 2x2]" in err
    data = json.loads(out.read_text())
    assert [(b["rows"], b["cols"]) for b in data["blocks"]] == [(2, 1), (2, 1), (2, 2)]
    assert data["diagnostics"]["max_off_block"] < 1e-10


@pytest.mark.parametrize("stem,shapes", [
    ("identity4", [(4, 1)]),
    ("glued_tree", [(3, 1), (5, 1), (1, 2)]),
])
def test_decompose_examples(tmp_path, corpus_dir, capsys, stem, shapes):
    out = tmp_path / "d.json"
    assert run(["decompose", "-i", corpus_dir / f"{stem}.json", "-o", out], capsys)[0] == 0
    blocks = json.loads(out.read_text())["blocks"]
    assert sorted((b["rows"], b["cols"]) for b in blocks) == sorted(shapes)


def test_decompose_is_deterministic(tmp_path, corpus_dir, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        run(["decompose", "-i", corpus_dir / "heisenberg4.json", "-o", p], capsys)
    assert a.read_bytes() == b.read_bytes()


@pytest.fixture
def three_qubit_report(tmp_path, corpus_dir, capsys):
    out = tmp_path / "d.json"
    run(["decompose", "-i", corpus_dir / "three_qubit.json", "-o", out], capsys)
    return out


def test_reduce_hamiltonian(three_qubit_report, corpus_dir, capsys):
    code, text, _ = run(["reduce", "-i", corpus_dir / "three_qubit.json", "-d", three_qubit_report,
                         "-t", "H_eps_1"], capsys)
    assert code == 0
    data = json.loads(text)
    np.testing.assert_allclose(data["spectrum"], np.sort(three_qubit_spectrum(1.0)), atol=1e-10)


def test_reduce_mixed_state(three_qubit_report, corpus_dir, capsys):
    code, text, _ = run(["reduce", "-i", corpus_dir / "three_qubit.json", "-d", three_qubit_report,
                         "-t", "rho_mixed", "--mode", "state"], capsys)
    assert code == 0
    rho = io.decode_complex(json.loads(text)["rho"])
    np.testing.assert_allclose(np.diag(rho).real, [0.25, 0.25, 0.25, 0.25], atol=1e-14)


def test_reduce_commutant_collective(tmp_path, corpus_dir, capsys):
    rep = tmp_path / "c.json"
    run(["decompose", "-i", corpus_dir / "collective3.json", "-o", rep], capsys)
    code, text, _ = run(["reduce", "-i", corpus_dir / "collective3.json", "-d", rep, "--mode", "commutant"],
                        capsys)
    assert code == 0
    assert json.loads(text)["isometry_count"] == 5


def test_reduce_not_in_algebra_exit_2(tmp_path, three_qubit_report, corpus_dir, capsys):
    data = io.read_json(corpus_dir / "three_qubit.json")
    x3 = np.kron(np.eye(4), np.array([[0, 1], [1, 0]]))
    data["operators"]["X3"] = io.encode_complex(x3)
    prob = tmp_path / "p.json"
    io.write_json(prob, data)
    code, _, err = run(["reduce", "-i", prob, "-d", three_qubit_report, "-t", "X3"], capsys)
    assert code == 2
    assert "residual" in err


def test_io_errors_exit_1(tmp_path, three_qubit_report, corpus_dir, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["decompose", "-i", bad], capsys)[0] == 1
    assert run(["decompose", "-i", tmp_path / "missing.json"], capsys)[0] == 1
    assert run(["reduce", "-i", corpus_dir / "heisenberg4.json", "-d", three_qubit_report, "-t", "x"],
               capsys)[0] == 1
    assert run(["reduce", "-i", corpus_dir / "three_qubit.json", "-d", three_qubit_report], capsys)[0] == 1


def test_coarse_grain_qutrit(corpus_dir, capsys):
    code, text, _ = run(["coarse-grain", "--state", corpus_dir / "qutrit_state.json",
                         "--pbpt", corpus_dir / "qutrit_pbpt.json"], capsys)
    assert code == 0
    data = json.loads(text)
    a1, a0, am = 0.6, 0.48, 0.64
    np.testing.assert_allclose(io.decode_complex(data["rho"]),
                               [[a0 ** 2, a1 * a0], [a0 * a1, a1 ** 2 + am ** 2]], atol=1e-12)
    top = data["observables"]["X"]["distortion"][0]
    assert top["difference"] == pytest.approx(am ** 2 / 2, abs=1e-12)


def test_coarse_grain_weather(corpus_dir, capsys):
    for side, want in (("B", [0.05, 0.45, 0.5]), ("A", [0.15, 0.85])):
        code, text, _ = run(["coarse-grain", "--state", corpus_dir / "weather_state.json",
                             "--pbpt", corpus_dir / "weather_clothing_pbpt.json", "--side", side], capsys)
        assert code == 0
        np.testing.assert_allclose(io.decode_complex(json.loads(text)["rho"]), np.diag(want), atol=1e-14)


def test_coarse_grain_singlet_triplet(corpus_dir, capsys):
    code, text, _ = run(["coarse-grain", "--state", corpus_dir / "two_spin_state.json",
                         "--pbpt", corpus_dir / "singlet_triplet_pbpt.json"], capsys)
    obs = json.loads(text)["observables"]
    assert code == 0
    assert obs["Jz"]["residual"] < 1e-10 and obs["Jx2"]["residual"] > 0.1
    assert obs["Jx2"]["distortion"] is None


def test_coarse_grain_non_orthonormal_exit_2(tmp_path, corpus_dir, capsys):
    data = io.read_json(corpus_dir / "qutrit_pbpt.json")
    data["cells"][1]["vector"] = data["cells"][0]["vector"]
    bad = tmp_path / "bad.json"
    io.write_json(bad, data)
    code, _, err = run(["coarse-grain", "--state", corpus_dir / "qutrit_state.json", "--pbpt", bad], capsys)
    assert code == 2
    assert "NotOrthonormal" in err


def test_uncertainty_single_point(capsys):
    code, text, _ = run(["uncertainty", "--d", 1024, "--wx", 32, "--wp", 32], capsys)
    assert code == 0
    rows = list(csv.DictReader(text.splitlines()))
    assert float(rows[0]["closed"]) == pytest.approx(0.656, abs=5e-4)
    code, text, _ = run(["uncertainty", "--d", 16, "--wx", 16, "--wp", 1], capsys)
    assert float(list(csv.DictReader(text.splitlines()))[0]["closed"]) == pytest.approx(1.0)


def test_uncertainty_scan_with_oracle(tmp_path, capsys):
    path = tmp_path / "scan.csv"
    code, _, _ = run(["uncertainty", "--d", 256, "--scan", "diagonal", "--direct-oracle", "--csv", path], capsys)
    assert code == 0
    rows = list(csv.DictReader(path.read_text().splitlines()))
    assert len(rows) == 9
    for r in rows:
        assert abs(float(r["closed"]) - float(r["direct"])) < 1e-10


def test_uncertainty_non_divisor_exit_1(capsys):
    code, _, err = run(["uncertainty", "--d", 10, "--wx", 3, "--wp", 2], capsys)
    assert code == 1
    assert "divide" in err
    assert run(["uncertainty", "--d", 10], capsys)[0] == 1


def test_purity_command(tmp_path, corpus_dir, capsys):
    rep = tmp_path / "h.json"
    run(["decompose", "-i", corpus_dir / "hydrogen_l3.json", "-o", rep], capsys)
    out = tmp_path / "p.csv"
    code, _, _ = run(["purity", "-i", corpus_dir / "hydrogen_l3.json", "-d", rep, "--hamiltonian", "H",
                      "--state", "rho0", "--commutant", "--times", "0:10:11", "--csv", out], capsys)
    assert code == 0
    rows = list(csv.DictReader(out.read_text().splitlines()))
    assert len(rows) == 11 and float(rows[0]["purity"]) == pytest.approx(1.0, abs=1e-10)
    assert run(["purity", "-i", corpus_dir / "hydrogen_l3.json", "-d", rep, "--hamiltonian", "H",
                "--state", "rho0", "--times", "bad"], capsys)[0] == 1


def test_verbose_trace(corpus_dir, capsys):
    code, _, err = run(["decompose", "-i", corpus_dir / "three_qubit.json", "--verbose", "-o", "-"], capsys)
    assert code == 0
    assert "scatter" in err and "lambdas" in err


@pytest.mark.skipif(shutil.which("irrep-scatter") is None, reason="console script not installed")
def test_console_script(corpus_dir):
    res = subprocess.run(["irrep-scatter", "uncertainty", "--d", "16", "--wx", "4", "--wp", "4"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.startswith("d,w_x,w_p")


def test_module_entry():
    res = subprocess.run([sys.executable, "-m", "irrepscatter.cli", "uncertainty", "--d", "8", "--wx", "3",
                          "--wp", "2"], capture_output=True, text=True)
    assert res.returncode == 1
