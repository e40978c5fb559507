import io
import json

import numpy as np
import pytest

from sagbihc.cli import main, system_from_json, system_to_json
from sagbihc.models import example_system


def run(argv):
    out = io.StringIO()
    code = main(argv, out)
    return code, out.getvalue()


@pytest.fixture
def gen_file(tmp_path):
    def make(*args):
        path = tmp_path / ("_".join(args) + ".json")
        code, _ = run(["gen", *args, "-o", str(path)])
        assert code == 0
        return str(path)

    return make


def test_system_json_roundtrip():
    sys = example_system("ex43", seed=1)
    back, w, opts = system_from_json(json.loads(json.dumps(system_to_json(sys, (1, 2), {"one_step": True}))))
    assert w == (1, 2) and opts == {"one_step": True}
    for C, D in zip(sys.coefficients, back.coefficients):
        assert np.array_equal(C, D)
    assert [str(p) for p in back.polynomials()] == [str(p) for p in sys.polynomials()]


def test_solve_ex42_summary(gen_file):
    code, text = run(["solve", gen_file("ex42")])
    assert code == 0
    assert "# paths tracked:                  6" in text
    assert "# total solutions (real):         6" in text


def test_solve_ex43_base_locus_exit_2(gen_file, capsys):
    code, text = run(["solve", gen_file("ex43"), "--base-locus"])
    assert code == 2
    assert "# total solutions (real):         4" in text
    assert "will not find all the solutions" in text + capsys.readouterr().err


def test_malformed_polynomial(tmp_path, capsys):
    data = system_to_json(example_system("ex41", seed=0))
    data["blocks"][0]["generators"][1] = "y^2 + * 1"
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    code, _ = run(["solve", str(path)])
    assert code == 1
    err = capsys.readouterr().err
    assert err.startswith("error:") and "offset" in err


def test_degree_ex41(gen_file):
    code, text = run(["degree", gen_file("ex41")])
    assert code == 0
    assert text.strip() == "deg_phi=8 deg_phi0=8"


def test_degree_drop_exit_code(gen_file):
    code, text = run(["degree", gen_file("ex43")])
    assert code == 2
    assert "deg_phi=2 deg_phi0=1" in text


def test_detect_weight_json(gen_file):
    code, text = run(["detect-weight", gen_file("ex41"), "--format", "json"])
    assert code == 0
    data = json.loads(text)
    assert data["certificate"]["verified"] is True
    assert data["weight"] == data["certificate"]["weight"]


def test_mixed_volume_unit_simplex(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps([{"points": [[0, 0], [1, 0], [0, 1]], "multiplicity": 2}]))
    code, text = run(["mixed-volume", str(path)])
    assert code == 0 and text.strip() == "1"


def test_result_roundtrip_and_determinism(gen_file, tmp_path):
    system = gen_file("ex41")
    r1, r2 = tmp_path / "r1.json", tmp_path / "r2.json"
    assert run(["solve", system, "--seed", "3", "-o", str(r1)])[0] == 0
    assert run(["solve", system, "--seed", "3", "-o", str(r2)])[0] == 0
    a, b = json.loads(r1.read_text()), json.loads(r2.read_text())
    a.pop("run_info"), b.pop("run_info")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    code, text = run(["verify", system, str(r1)])
    assert code == 0 and text.startswith("8 solutions verified")


def test_verify_detects_bad_point(gen_file, tmp_path, capsys):
    system = gen_file("ex41")
    r = tmp_path / "r.json"
    run(["solve", system, "-o", str(r)])
    data = json.loads(r.read_text())
    data["solutions"][0]["point"][0][0] += 1.0
    r.write_text(json.dumps(data))
    assert run(["verify", system, str(r)])[0] == 1


def test_gen_grassmannian_and_resonator(gen_file):
    code, text = run(["solve", gen_file("grassmannian", "2", "4"), "--no-degree-check"])
    assert code == 0 and "# total solutions (real):         2" in text
    code, text = run(["solve", gen_file("resonator", "1", "2"), "--no-degree-check"])
    assert code == 0 and "# total solutions (real):         5" in text


def test_negate_weight_and_force(gen_file, capsys):
    path = gen_file("ex42")
    code, _ = run(["solve", path, "--weight", "1,2,3", "--negate-weight", "--no-degree-check"])
    assert code == 1
    assert "SAGBI check" in capsys.readouterr().err
    code, _ = run(["solve", path, "--weight", "1,2,3", "--negate-weight", "--no-degree-check", "--force"])
    assert code == 2


def test_missing_file(capsys):
    assert run(["solve", "/nonexistent/system.json"])[0] == 1
    assert capsys.readouterr().err.startswith("error:")


def test_threads_env(gen_file, monkeypatch):
    monkeypatch.setenv("SAGBIHC_THREADS", "3")
    code, text = run(["solve", gen_file("ex41"), "--no-degree-check"])
    assert code == 0 and "# total solutions (real):         8" in text


def test_bench_all_pass():
    code, text = run(["bench"])
    assert code == 0, text
    assert text.count("PASS") == 11
