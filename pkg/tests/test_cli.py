import json

import numpy as np
import pytest

from localdirac import io, local_dirac_moments, mixture_of
from localdirac.cli import EXIT_INVALID, EXIT_NUMERICAL, EXIT_OK, main
from localdirac.fourier import REFERENCE_SIGNAL, add_noise, fourier_coefficients
from localdirac.statmix import REFERENCE_MIXTURE, sample


def _write(path, obj):
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(path)


def _moments_file(tmp_path, mix, d, name="m.json"):
    return _write(tmp_path / name, io.moments_to_json(local_dirac_moments(mix, d)))


def _run(argv, tmp_path, name="out.json"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    return code, (json.loads(out.read_text()) if code == EXIT_OK and out.suffix == ".json" else out)


def _xis(report):
    return sorted(io._decode_scalar(c["xi"]) for c in report["result"]["components"])


# -- gen-moments -----------------------------------------------------------------------


def test_gen_moments_example(tmp_path):
    spec = _write(tmp_path / "spec.json", {"components": [{"xi": 2.0, "lambdas": [1.0, 1.0]}]})
    code, data = _run(["gen-moments", spec, "-d", "4"], tmp_path)
    assert code == EXIT_OK
    assert data == {"moments": [1.0, 3.0, 8.0, 20.0, 48.0], "normalized": True}


def test_gen_moments_csv(tmp_path):
    spec = _write(tmp_path / "spec.json", {"components": [{"xi": 2.0, "lambdas": [1.0, 1.0]}]})
    code, out = _run(["gen-moments", spec, "-d", "4", "--format", "csv"], tmp_path, "m.csv")
    assert code == EXIT_OK
    assert io.parse_moments(out.read_text()).values.tolist() == [1, 3, 8, 20, 48]


def test_gen_moments_pareto(tmp_path):
    spec = _write(tmp_path / "spec.json", {"pareto": {"alpha": 5.0, "xi": 1.0}})
    code, data = _run(["gen-moments", spec, "-d", "2"], tmp_path)
    np.testing.assert_allclose(data["moments"], [1, 1.25, 5 / 3])


@pytest.mark.parametrize("spec", [{"components": []}, [1, 2], {"pareto": {"alpha": 2.0, "xi": 1.0}}])
def test_gen_moments_invalid(tmp_path, spec, capsys):
    path = _write(tmp_path / "spec.json", spec)
    assert main(["gen-moments", path, "-d", "3"]) == EXIT_INVALID
    assert "error" in capsys.readouterr().err


def test_usage_error():
    assert main(["recover"]) == 2
    assert main(["no-such-command"]) == 2


# -- recover ------------------------------------------------------------------------------


MIX = mixture_of([-0.8, 1.1], [[0.7, 0.2], [0.3, -0.3]])


def test_recover_round_trip(tmp_path):
    path = _moments_file(tmp_path, MIX, 6)
    code, rep = _run(["recover", path, "-r", "2", "-l", "1"], tmp_path)
    assert code == EXIT_OK
    np.testing.assert_allclose(_xis(rep), [-0.8, 1.1], atol=1e-9)
    assert rep["seed"] == 0
    assert rep["subcommand"] == "recover"
    assert len(rep["inputs_digest"]) == 64
    assert {"seconds", "solver_seconds"} <= set(rep["timing"])
    assert "selector_residuals" in rep["diagnostics"]


def test_recover_methods_agree(tmp_path):
    path = _moments_file(tmp_path, MIX, 8)
    got = {}
    for method in ("auto", "linear", "elimination"):
        code, rep = _run(["recover", path, "-r", "2", "-l", "1", "--method", method], tmp_path, f"{method}.json")
        assert code == EXIT_OK
        got[method] = _xis(rep)
    np.testing.assert_allclose(got["linear"], got["auto"], atol=1e-8)
    np.testing.assert_allclose(got["elimination"], got["auto"], atol=1e-8)


def test_recover_insufficient_moments(tmp_path, capsys):
    path = _moments_file(tmp_path, MIX, 4)
    assert main(["recover", path, "-r", "2", "-l", "1"]) == EXIT_INVALID
    assert "needs" in capsys.readouterr().err


def test_elimination_needs_r2_l1(tmp_path):
    path = _moments_file(tmp_path, MIX, 8)
    assert main(["recover", path, "-r", "3", "-l", "1", "--method", "elimination"]) == EXIT_INVALID


def test_ambiguity_exits_numerical(tmp_path, capsys):
    # m_0..m_6 of this mixture are shared with a complex one
    path = _moments_file(tmp_path, mixture_of([-1.0, 2.0], [[0.6, 0.3], [0.4, -0.2]]), 6)
    assert main(["recover", path, "-r", "2", "-l", "1"]) == EXIT_NUMERICAL
    err = capsys.readouterr().err
    assert "ambiguous" in err and "diagnostics" in err


def test_reports_deterministic(tmp_path):
    path = _moments_file(tmp_path, MIX, 6)
    reps = []
    for _ in range(2):
        _, rep = _run(["recover", path, "-r", "2", "-l", "1", "--seed", "5"], tmp_path)
        rep.pop("timing")
        reps.append(json.dumps(rep, sort_keys=True))
    assert reps[0] == reps[1]


def test_recover_csv_output(tmp_path):
    path = _moments_file(tmp_path, MIX, 6)
    code, out = _run(["recover", path, "-r", "2", "-l", "1", "--format", "csv"], tmp_path, "r.csv")
    lines = out.read_text().splitlines()
    assert lines[0] == "component,xi,lambdas"
    assert len(lines) == 3


def test_thread_env_validated(tmp_path, monkeypatch):
    path = _moments_file(tmp_path, MIX, 6)
    monkeypatch.setenv("LOCALDIRAC_THREADS", "zero")
    assert main(["recover", path, "-r", "2", "-l", "1"]) == EXIT_INVALID


# -- fourier, statmix, ideal-check ---------------------------------------------------------------


def test_fourier_recon(tmp_path):
    c = add_noise(fourier_coefficients(REFERENCE_SIGNAL, 15), 1e-12, seed=0)
    coeffs = _write(tmp_path / "c.csv", io.fourier_to_csv(c))
    sig_out = tmp_path / "sig.json"
    code, rep = _run(["fourier", "recon", "--coeffs", coeffs, "-r", "10", "--signal-out", str(sig_out)], tmp_path)
    assert code == EXIT_OK
    t = json.loads(sig_out.read_text())["breakpoints"]
    assert np.linalg.norm(np.subtract(t, REFERENCE_SIGNAL.breakpoints)) <= 1e-7
    assert rep["subcommand"] == "fourier recon"


def test_statmix_estimate(tmp_path):
    xs = sample(REFERENCE_MIXTURE, 20_000, seed=0)
    path = _write(tmp_path / "xs.csv", "\n".join(map(repr, xs.tolist())))
    code, rep = _run(["statmix", "estimate", "--sample", path, "-r", "2", "-l", "2"], tmp_path)
    assert code == EXIT_OK
    xis = sorted(rep["result"]["xis"])
    assert abs(xis[0] + 1) <= 0.15 and abs(xis[1] - 2) <= 0.15
    assert rep["result"]["n_samples"] == 20_000


def test_ideal_check(tmp_path):
    good = _moments_file(tmp_path, mixture_of([0.7], [[1.0, -0.4]]), 8, "good.json")
    code, rep = _run(["ideal-check", good, "--family", "fij_first_order"], tmp_path)
    assert code == EXIT_OK
    assert rep["result"]["all_pass"] and rep["result"]["n_generators"] == 15
    bad = _write(tmp_path / "bad.csv", "1\n0.3\n2\n-1\n5\n0.2\n")
    code, rep = _run(["ideal-check", bad, "--family", "eisenbud_delta3"], tmp_path, "bad.json")
    assert code == EXIT_OK and not rep["result"]["all_pass"]


def test_ideal_check_delta_power_needs_n(tmp_path):
    good = _moments_file(tmp_path, mixture_of([0.7], [[1.0, -0.4]]), 8)
    assert main(["ideal-check", good, "--family", "delta_power"]) == EXIT_INVALID
    assert main(["ideal-check", good, "--family", "delta_power", "--n", "3", "--out", str(tmp_path / "o")]) == EXIT_OK


def test_missing_input_file(tmp_path):
    assert main(["recover", str(tmp_path / "nope.json"), "-r", "1", "-l", "0"]) == EXIT_INVALID
