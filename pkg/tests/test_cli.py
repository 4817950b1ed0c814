import json
import sys

import numpy as np
import pytest

from core.bhlab import ratio_scan
from core.compose import LinearMap
from core.mpcore import from_json, to_json
from main import check_dependencies, main

SQUARE_OF_SUM = {(((0, 2),),): 1.0, (((0, 1), (1, 1)),): 2.0, (((1, 2),),): 1.0}


@pytest.fixture
def write_json(tmp_path):
    def write(name, payload):
        path = tmp_path / name
        path.write_text(payload if isinstance(payload, str) else json.dumps(payload), encoding="utf-8")
        return str(path)
    return write


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_norm_command(make_poly, write_json, capsys):
    path = write_json("P.json", to_json(make_poly((2,), (2,), SQUARE_OF_SUM)))
    code, out, err = run(["norm", "--in", path, "--starts", "16"], capsys)
    assert code == 0
    result = json.loads(out)
    assert result["lower"] == pytest.approx(4.0)
    assert result["upper"] == pytest.approx(4.0)
    assert "PASS" in err


def test_norm_with_certificate(make_poly, write_json, capsys):
    path = write_json("P.json", to_json(make_poly((1, 1), (2, 2), {(((0, 1),), ((1, 1),)): 2.0})))
    code, out, _ = run(["norm", "--in", path, "--certify"], capsys)
    assert code == 0
    assert json.loads(out)["continuity"][0]["violations"] == 0


def test_missing_file_names_the_field(tmp_path, capsys):
    code, out, err = run(["norm", "--in", str(tmp_path / "absent.json")], capsys)
    assert code == 1
    assert out == ""
    assert "'in'" in err


def test_malformed_polynomial_names_the_field(write_json, capsys):
    path = write_json("P.json", {"field": "real", "dims": [1], "terms": []})
    code, _, err = run(["norm", "--in", path], capsys)
    assert code == 1
    assert "multidegree" in err


def test_invalid_shared_option(make_poly, write_json, capsys):
    path = write_json("P.json", to_json(make_poly((2,), (2,), SQUARE_OF_SUM)))
    code, _, err = run(["norm", "--in", path, "--seed", "0"], capsys)
    assert code == 1
    assert "seed" in err


def test_psutil_is_optional(monkeypatch, capsys):
    monkeypatch.setitem(sys.modules, "psutil", None)
    assert check_dependencies()
    assert "psutil not installed" in capsys.readouterr().err


def test_missing_required_flag(capsys):
    assert run(["norm"], capsys)[0] == 1


def test_output_file(make_poly, write_json, tmp_path, capsys):
    path = write_json("P.json", to_json(make_poly((2,), (2,), SQUARE_OF_SUM)))
    target = tmp_path / "estimate.json"
    code, out, _ = run(["norm", "--in", path, "--out", str(target)], capsys)
    assert code == 0
    assert out == ""
    assert json.loads(target.read_text())["lower"] == pytest.approx(4.0)


def test_polarize_with_bounds(make_poly, write_json, capsys):
    path = write_json("P.json", to_json(make_poly((2,), (2,), {(((0, 1), (1, 1)),): 1.0})))
    code, out, _ = run(["polarize", "--in", path, "--bounds"], capsys)
    assert code == 0
    result = json.loads(out)
    assert result["form"]["entries"] == [{"key": [0, 1], "re": 0.5, "im": 0.0}]
    assert result["bounds"]["factor"] == 2.0
    assert result["bounds"]["pass"] is True


def test_misspelt_command_is_resolved(make_poly, write_json, capsys):
    pytest.importorskip("rapidfuzz")
    path = write_json("P.json", to_json(make_poly((2,), (2,), {(((0, 2),),): 1.0})))
    code, out, _ = run(["polarise", "--in", path], capsys)
    assert code == 0
    assert json.loads(out)["form"]["arity"] == 2


def test_complex_file_needs_complex_field(make_poly, write_json, capsys):
    from core.mpcore import Field
    P = make_poly((1,), (2,), {(((0, 1),),): 1j}, Field.COMPLEX)
    path = write_json("P.json", to_json(P))
    assert run(["norm", "--in", path], capsys)[0] == 1
    code, out, _ = run(["norm", "--in", path, "--field", "complex", "--starts", "4"], capsys)
    assert code == 0
    assert json.loads(out)["lower"] == pytest.approx(1.0)


def test_compose_check(rng, write_json, capsys):
    from core.mpcore import random_multipolynomial
    P = random_multipolynomial((1, 2), (2, 2), rng)
    t = write_json("t.json", LinearMap.identity(1).to_dict())
    u1 = write_json("u1.json", LinearMap(rng.uniform(-1, 1, (2, 3))).to_dict())
    u2 = write_json("u2.json", LinearMap(rng.uniform(-1, 1, (2, 2))).to_dict())
    code, out, _ = run(["compose-check", "--t", t, "--P", write_json("P.json", to_json(P)),
                        "--u", f"{u1},{u2}", "--starts", "8"], capsys)
    assert code == 0
    result = json.loads(out)
    assert result["kind"] == "ideal"
    assert result["pass"] is True


def test_compose_check_shape_error(rng, write_json, capsys):
    from core.mpcore import random_multipolynomial
    P = random_multipolynomial((1, 1), (2, 2), rng)
    t = write_json("t.json", LinearMap.identity(1).to_dict())
    u = write_json("u.json", LinearMap.identity(3).to_dict())
    code, _, _ = run(["compose-check", "--t", t, "--P", write_json("P.json", to_json(P)),
                      "--u", f"{u},{u}"], capsys)
    assert code == 1


def test_hyper_check_scalar_chain(make_poly, write_json, capsys):
    Q = write_json("Q.json", to_json(make_poly((2,), (1,), {(((0, 2),),): 1.0})))
    P = write_json("P.json", to_json(make_poly((3,), (1,), {(((0, 3),),): 1.0})))
    R = write_json("R.json", to_json(make_poly((2,), (1,), {(((0, 2),),): 1.0})))
    code, out, _ = run(["hyper-check", "--R", R, "--P", P, "--Q", Q, "--C", "1,2", "--K", "1,3"], capsys)
    assert code == 0
    result = json.loads(out)
    assert result["lhs_lower"] == pytest.approx(1.0)
    assert result["rhs"] == pytest.approx(3.0 * 2.0 ** 6)


def test_hyper_check_rejects_bad_constants(make_poly, write_json, capsys):
    Q = write_json("Q.json", to_json(make_poly((1,), (1,), {(((0, 1),),): 1.0})))
    code, _, err = run(["hyper-check", "--R", Q, "--P", Q, "--Q", Q, "--C", "2"], capsys)
    assert code == 1
    assert "C_seq" in err


def test_summing(make_poly, write_json, capsys):
    P = write_json("P.json", to_json(make_poly((1, 1), (2, 2), {(((0, 1),), ((0, 1),)): 1.0})))
    family = write_json("family.json", [[1.0, 0.0]] * 4)
    code, out, _ = run(["summing", "--P", P, "--families", f"{family},{family}",
                        "--p", "0.25", "--q", "1,1"], capsys)
    assert code == 0
    result = json.loads(out)
    assert result["ratio"] == pytest.approx(4.0 ** 2)
    assert result["null_regime"] is True


def test_bh_scan_matches_library_and_is_repeatable(tmp_path, capsys):
    argv = ["bh-scan", "--n", "1,1", "--p", "1.0", "--r", "2,4", "--seeds", "2", "--seed", "3",
            "--summary", str(tmp_path / "summary.json")]
    code, first, _ = run(argv, capsys)
    assert code == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["r_values"] == [2, 4]
    code, second, _ = run(argv, capsys)
    assert first == second
    assert first == ratio_scan((1, 1), 1.0, [2, 4], seeds_per_r=2, seed=3).to_csv()
    assert first.splitlines()[0].startswith("n,p,r,seed")


def test_bh_scan_default_exponent(capsys):
    code, out, _ = run(["bh-scan", "--n", "1,1", "--r", "1,2", "--seeds", "1"], capsys)
    assert code == 0
    assert float(out.splitlines()[1].split('"')[2].split(",")[1]) == pytest.approx(4 / 3)


def test_bh_scan_slope_check_fails(capsys):
    code, _, err = run(["bh-scan", "--n", "1,1", "--p", "0.5", "--r", "1,2", "--seeds", "2",
                        "--check-slope"], capsys)
    assert code == 2
    assert "FAIL" in err


def test_bh_scan_rejects_descending_r(capsys):
    assert run(["bh-scan", "--n", "1,1", "--r", "4,2"], capsys)[0] == 1


def test_ksz_command(tmp_path, capsys):
    target = tmp_path / "lift.json"
    code, out, _ = run(["ksz", "--r", "3", "--n", "2,1", "--seed", "5", "--save", str(target)], capsys)
    assert code == 0
    result = json.loads(out)
    assert result["coefficients"] == 27
    assert result["norm"]["lower"] == result["norm"]["upper"]
    lifted = from_json(target.read_text())
    assert lifted.dims == (6, 3)
    assert np.all(np.abs(lifted.coefficients()) == 1.0)
