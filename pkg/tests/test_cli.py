import csv
import io
import math

import pytest

from qudit_transfer.cli import main

from reference_values import TABLE1


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_table1_bell_row(capsys):
    code, out, _ = run(capsys, "table1", "--resource", "bell", "--d-max", "5")
    assert code == 0
    r = {int(x["d"]): x for x in rows(out)}
    e, n, sigma = TABLE1[3][2]
    assert float(r[3]["E"]) == pytest.approx(e, abs=5e-4)
    assert int(r[3]["n_E"]) == n
    assert float(r[3]["sigma"]) == pytest.approx(sigma, abs=5e-4)


def test_scheme_d8_deterministic(capsys):
    code, out, _ = run(capsys, "scheme", "--d", "8", "--set", "deterministic",
                       "--resource", "psi+")
    assert code == 0
    r = rows(out)
    assert len(r) == 64
    assert all(float(x["probability"]) == pytest.approx(1 / 64) for x in r)
    assert all(float(x["E"]) == pytest.approx(3) for x in r)
    assert [x["record"] for x in r] == sorted(x["record"] for x in r)


def test_sweep_peaks(capsys):
    code, out, _ = run(capsys, "sweep", "--d", "8", "--round", "1", "--resource", "psi+",
                       "--points", "721")
    assert code == 0
    r = rows(out)
    assert len(r) == 721
    for k in range(1, 8):
        x = r[90 * k]
        assert float(x["phi"]) == pytest.approx(2 * math.pi * k / 8)
        assert float(x["expected_E"]) == pytest.approx(1.0, abs=1e-9)
    assert max(float(x["expected_E"]) for x in r) == pytest.approx(1.0, abs=1e-9)


def test_output_is_deterministic(capsys, tmp_path):
    argv = ["scheme", "--d", "5", "--resource", "cluster", "--xi", "4"]
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b
    p = tmp_path / "out.csv"
    assert main(argv + ["--out", str(p)]) == 0
    assert p.read_text() == a


def test_csv_roundtrip_statistics(capsys):
    from qudit_transfer.schemes import make_scheme, power_of_two_phase_set
    from qudit_transfer.states import TwoQubitResource
    _, out, _ = run(capsys, "scheme", "--d", "6", "--resource", "psi+")
    r = rows(out)
    p = [float(x["probability"]) for x in r]
    e = [float(x["E"]) for x in r]
    mean = sum(a * b for a, b in zip(p, e)) / sum(p)
    st = make_scheme(6, TwoQubitResource.psi_plus(), power_of_two_phase_set(6)).stats(20)
    assert mean == pytest.approx(st.expected_ebits, abs=1e-10)


def test_explicit_phases(capsys):
    _, out, _ = run(capsys, "scheme", "--d", "3", "--phi", "3.141592653589793",
                    "--phi", "1.5707963267948966", "--postselect", "equal")
    r = rows(out)
    assert sum(float(x["probability"]) for x in r) == pytest.approx(1 / 3)


@pytest.mark.parametrize("argv", [["scheme", "--bogus"], ["nope"], ["scheme", "--d", "x"]])
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


@pytest.mark.parametrize("argv", [
    ["scheme", "--d", "1"],
    ["scheme", "--d", "4", "--set", "d3-constructed"],
    ["sweep", "--points", "1"],
    ["perturbation", "--d", "3", "--phi", "10", "--phi", "1"],
])
def test_precondition_errors_exit_1(argv, capsys):
    code, out, err = run(capsys, *argv)
    assert code == 1
    assert err.startswith("error:")
    assert out == ""


def test_report_subcommands(capsys):
    code, out, _ = run(capsys, "conditions", "--d", "3", "--set", "d3-constructed", "--xi", "0")
    assert code == 0
    assert "== final-round maximal-entanglement conditions ==" in out
    assert "all ok = True" in out
    code, out, _ = run(capsys, "photonic")
    assert code == 0 and float(rows(out)[0]["success"]) == pytest.approx(1 / 8)
    code, out, _ = run(capsys, "ghz", "--d", "2")
    r = rows(out)
    assert sum(float(x["probability"]) for x in r) == pytest.approx(1 / 4)
    code, out, _ = run(capsys, "perturbation", "--d", "4", "--phi", "3.141592653589793",
                       "--phi", "1.5707963267948966")
    assert all(11 < float(x["shortfall_over_zeta2"]) < 16 for x in rows(out))
    code, out, _ = run(capsys, "defects", "--points", "3")
    r = rows(out)
    assert float(r[0]["a_zz"]) == 232 and float(r[-1]["a_zz"]) == 201
    code, out, _ = run(capsys, "defects", "--model", "gev")
    assert code == 0 and rows(out)[0]["regime_ok"] == "True"
