"""CLI surface: records, exit codes, file flows, and byte stability."""

import json

import pytest

from chi_dlog import __version__
from chi_dlog.chi import load_chi
from chi_dlog.cli import main
from chi_dlog.qstate import DIM_CAP_ENV


def run_cli(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_prepare_chi_record(capsys):
    code, out, _ = run_cli(capsys, ["prepare-chi", "--n", "7", "--g", "3", "--seed", "1"])
    assert code == 0
    record = json.loads(out)
    assert list(record) == ["n", "g", "m", "seed", "version", "command", "mode",
                            "attempts", "observed_s", "success_s",
                            "acceptance_probability", "fidelity"]
    assert (record["n"], record["g"], record["m"]) == (7, 3, 6)
    assert record["command"] == "prepare-chi"
    assert record["mode"] == "sampled"
    assert record["version"] == __version__
    assert record["attempts"] == len(record["observed_s"])
    assert record["fidelity"] >= 1 - 1e-9


def test_prepare_chi_exhaustive_acceptance(capsys):
    code, out, _ = run_cli(capsys, ["prepare-chi", "--n", "5", "--g", "2",
                                    "--mode", "exhaustive"])
    assert code == 0
    record = json.loads(out)
    assert record["acceptance_probability"] == pytest.approx(0.5, abs=1e-12)
    assert record["attempts"] == 1


def test_prepare_chi_writes_loadable_file(capsys, tmp_path):
    path = tmp_path / "chi.txt"
    code, _, _ = run_cli(capsys, ["prepare-chi", "--n", "5", "--g", "2",
                                  "--mode", "exhaustive", "--output", str(path)])
    assert code == 0
    spec, handle = load_chi(path)
    assert (spec.modulus, spec.generator) == (5, 2)
    assert handle.verify() >= 1 - 1e-9


def test_prepare_chi_reruns_are_byte_identical(capsys):
    argv = ["prepare-chi", "--n", "13", "--g", "2", "--seed", "4"]
    _, first, _ = run_cli(capsys, argv)
    _, second, _ = run_cli(capsys, argv)
    assert first == second


def test_bad_group_exits_2(capsys):
    assert run_cli(capsys, ["prepare-chi", "--n", "8", "--g", "3"])[0] == 2
    assert run_cli(capsys, ["prepare-chi", "--n", "8", "--g", "2"])[0] == 2
    assert run_cli(capsys, ["dlog", "--n", "12", "--g", "5", "--x", "5",
                            "--prepare"])[0] == 2


def test_allow_subgroup(capsys):
    code, out, _ = run_cli(capsys, ["prepare-chi", "--n", "7", "--g", "2",
                                    "--allow-subgroup"])
    assert code == 0
    assert json.loads(out)["m"] == 3


def test_trivial_group(capsys):
    code, out, _ = run_cli(capsys, ["prepare-chi", "--n", "2", "--g", "1"])
    assert code == 0
    assert json.loads(out)["m"] == 1


def test_dlog_single_x(capsys):
    code, out, _ = run_cli(capsys, ["dlog", "--n", "7", "--g", "3", "--x", "2",
                                    "--prepare"])
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 1
    record = json.loads(lines[0])
    assert list(record) == ["n", "g", "m", "x", "p_oracle", "p_measured",
                            "success_mass", "chi_fidelity", "fourier_count",
                            "seed", "version"]
    assert record["x"] == 2
    assert record["p_measured"] == record["p_oracle"] == 2
    assert record["success_mass"] >= 1 - 1e-9
    assert record["fourier_count"] == 2
    assert record["version"] == __version__


def test_dlog_sweep_all_x(capsys):
    code, out, _ = run_cli(capsys, ["dlog", "--n", "13", "--g", "2",
                                    "--sweep-all-x", "--prepare"])
    assert code == 0
    records = [json.loads(line) for line in out.splitlines()]
    assert [r["x"] for r in records] == list(range(1, 13))  # ascending labels
    assert all(r["p_measured"] == r["p_oracle"] for r in records)


def test_dlog_reruns_are_byte_identical(capsys):
    argv = ["dlog", "--n", "13", "--g", "2", "--x-count", "3", "--prepare",
            "--mode", "sampled", "--seed", "9"]
    _, first, _ = run_cli(capsys, argv)
    _, second, _ = run_cli(capsys, argv)
    assert first == second
    assert len(first.splitlines()) == 3


def test_dlog_trials_shift_the_seed(capsys):
    code, out, _ = run_cli(capsys, ["dlog", "--n", "7", "--g", "3", "--x", "4",
                                    "--prepare", "--trials", "2", "--seed", "5"])
    assert code == 0
    records = [json.loads(line) for line in out.splitlines()]
    assert [r["seed"] for r in records] == [5, 6]


def test_dlog_output_file_matches_stdout(capsys, tmp_path):
    path = tmp_path / "runs.jsonl"
    _, out, _ = run_cli(capsys, ["dlog", "--n", "5", "--g", "2", "--sweep-all-x",
                                 "--prepare", "--output", str(path)])
    assert path.read_text() == out


def test_dlog_from_chi_file(capsys, tmp_path):
    path = tmp_path / "chi.txt"
    run_cli(capsys, ["prepare-chi", "--n", "7", "--g", "3", "--mode", "exhaustive",
                     "--output", str(path)])
    code, out, _ = run_cli(capsys, ["dlog", "--n", "7", "--g", "3", "--x", "6",
                                    "--chi", str(path)])
    assert code == 0
    assert json.loads(out)["p_measured"] == 3  # 3^3 = 27 = 6 mod 7


def test_dlog_chi_file_group_mismatch_exits_4(capsys, tmp_path):
    path = tmp_path / "chi.txt"
    run_cli(capsys, ["prepare-chi", "--n", "5", "--g", "2", "--mode", "exhaustive",
                     "--output", str(path)])
    code, _, err = run_cli(capsys, ["dlog", "--n", "7", "--g", "3", "--x", "2",
                                    "--chi", str(path)])
    assert code == 4
    assert "error" in err


def test_dlog_corrupted_chi_exits_4(capsys, tmp_path):
    path = tmp_path / "chi.txt"
    run_cli(capsys, ["prepare-chi", "--n", "7", "--g", "3", "--mode", "exhaustive",
                     "--output", str(path)])
    lines = path.read_text().splitlines()
    index, re_part, im_part = lines[1].split()
    lines[1] = f"{index} {float(re_part) * 3 + 0.5} {im_part}"
    path.write_text("\n".join(lines) + "\n")
    code, _, err = run_cli(capsys, ["dlog", "--n", "7", "--g", "3", "--x", "2",
                                    "--chi", str(path)])
    assert code == 4
    assert "error" in err


def test_dlog_mislabeled_chi_power_exits_4(capsys, tmp_path):
    # normalized state, but the header claims a power the amplitudes are not
    from chi_dlog.chi import ChiHandle, chi_reference, save_chi
    from chi_dlog.group import validate_group

    z7 = validate_group(7, 3)
    path = tmp_path / "chi.txt"
    save_chi(ChiHandle(power=2, state=chi_reference(z7, 2)), path)
    body = path.read_text().splitlines()[1:]
    path.write_text("chi m=6 power=1 n=7 g=3\n" + "\n".join(body) + "\n")
    code, _, err = run_cli(capsys, ["dlog", "--n", "7", "--g", "3", "--x", "2",
                                    "--chi", str(path)])
    assert code == 4
    assert "fidelity" in err


def test_dim_cap_env_exits_3(capsys, monkeypatch):
    monkeypatch.setenv(DIM_CAP_ENV, "100")  # joint dim for m=12 is 144
    code, _, err = run_cli(capsys, ["dlog", "--n", "13", "--g", "2", "--x", "2",
                                    "--prepare"])
    assert code == 3
    assert "error" in err


def test_dim_cap_flag_exits_3(capsys, monkeypatch):
    # register the key so the flag's os.environ write is rolled back
    monkeypatch.setenv(DIM_CAP_ENV, str(2 ** 24))
    code, _, _ = run_cli(capsys, ["dlog", "--n", "13", "--g", "2", "--x", "2",
                                  "--prepare", "--dim-cap", "100"])
    assert code == 3


def test_verify_subcommand(capsys):
    code, out, _ = run_cli(capsys, ["verify", "--max-m", "6"])
    assert code == 0
    assert "checks passed" in out
    code, out, _ = run_cli(capsys, ["verify", "--max-m", "1"])
    assert code == 0


def test_verify_flags_corrupted_chi_file(capsys, tmp_path):
    path = tmp_path / "chi.txt"
    run_cli(capsys, ["prepare-chi", "--n", "13", "--g", "2", "--mode", "exhaustive",
                     "--output", str(path)])
    lines = path.read_text().splitlines()
    index, re_part, im_part = lines[1].split()
    lines[1] = f"{index} {float(re_part) * 2 + 0.3} {im_part}"
    path.write_text("\n".join(lines) + "\n")
    code, out, _ = run_cli(capsys, ["verify", "--max-m", "4", "--chi", str(path)])
    assert code == 1
    assert "fidelity" in out


def test_resources_table(capsys):
    code, out, _ = run_cli(capsys, ["resources"])
    assert code == 0
    rows = {line.split()[0]: line.split()[1:] for line in out.splitlines()[2:]}
    assert rows["registers"] == ["2", "3"]
    assert rows["fourier_transforms"] == ["2", "4"]
    assert rows["division_ops"] == ["1", "-"]
    assert rows["measurements"] == ["1", "-"]


def test_argparse_rejects_conflicting_selectors():
    with pytest.raises(SystemExit) as exc:
        main(["dlog", "--n", "7", "--g", "3", "--x", "2", "--sweep-all-x",
              "--prepare"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["dlog", "--n", "7", "--g", "3", "--x", "2"])  # no chi source
    assert exc.value.code == 2
