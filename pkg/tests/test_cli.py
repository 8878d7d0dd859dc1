"""CLI surface: manifests, config round trips, output formats, exit codes."""

import json

import pytest

from heliox import cli


def run_cli(argv, capsys):
    """Invoke the CLI in-process; returns (exit_code, stdout, stderr)."""
    try:
        code = cli.main(argv)
    except SystemExit as exc:  # argparse usage errors
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


class TestParsing:
    def test_z_list_forms(self):
        assert cli._parse_z_list("2") == (2.0,)
        assert cli._parse_z_list("1,2,3") == (1.0, 2.0, 3.0)
        assert cli._parse_z_list("1:3:0.5") == (1.0, 1.5, 2.0, 2.5, 3.0)
        assert cli._parse_z_list("1:3") == (1.0, 2.0, 3.0)
        with pytest.raises(ValueError):
            cli._parse_z_list("3:1")
        with pytest.raises(ValueError):
            cli._parse_z_list("1:2:0")

    def test_config_parsing(self):
        cfg = cli.parse_config("a = 1\n# comment\n\nb= x y\nc =2 # tail\n")
        assert cfg == {"a": "1", "b": "x y", "c": "2"}
        with pytest.raises(ValueError):
            cli.parse_config("not a pair\n")

    @pytest.mark.parametrize(
        "man",
        [
            cli.RunManifest(command="energy", Z=(2.0,), omega=(6,)),
            cli.RunManifest(
                command="entropy",
                Z=(3.0,),
                omega=(12,),
                mu=2.5,
                R=8.0,
                nm=600,
                lmax=10,
                tol_s=2e-5,
                tol_l=3e-7,
                fmt="json",
                out="x.json",
                force_omega=True,
            ),
            cli.RunManifest(command="sweep", Z=(1.0, 2.0, 5.0)),
            cli.RunManifest(
                command="reproduce", table="table3", max_omega=12
            ),
        ],
    )
    def test_manifest_config_round_trip(self, man):
        assert cli.manifest_round_trip(man) == man

    def test_manifest_validation(self):
        with pytest.raises(ValueError):
            cli.RunManifest(command="energy", Z=()).validate()
        with pytest.raises(ValueError):
            cli.RunManifest(command="energy", Z=(-1.0,)).validate()
        with pytest.raises(ValueError):
            cli.RunManifest(command="sweep", Z=(0.9,)).validate()
        with pytest.raises(ValueError):
            cli.RunManifest(command="entropy", Z=(1.0, 2.0)).validate()
        with pytest.raises(ValueError):
            cli.RunManifest(command="energy", fmt="yaml").validate()
        with pytest.raises(ValueError):
            cli.RunManifest(command="reproduce", table="table9").validate()


class TestEnergyCommand:
    def test_closed_form_cell(self, capsys):
        code, out, _ = run_cli(["energy", "--Z", "2", "--omega", "0"], capsys)
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "Z,omega,mu,energy_hartree"
        assert lines[1] == "2,0,1.687500,-2.847656250"

    def test_grid_and_fixed_mu(self, capsys):
        code, out, _ = run_cli(
            ["energy", "--Z", "1,2", "--omega", "0,2", "--mu", "1.0"], capsys
        )
        assert code == 0
        rows = out.strip().splitlines()[1:]
        assert len(rows) == 4
        assert all(row.split(",")[2] == "1.000000" for row in rows)

    def test_json_payload(self, capsys):
        code, out, _ = run_cli(
            ["energy", "--Z", "2", "--omega", "0", "--format", "json"], capsys
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["command"] == "energy"
        assert payload["version"]
        assert "wall_time_s" in payload
        assert payload["results"][0]["energy_hartree"] == "-2.847656250"

    def test_deterministic_csv(self, capsys):
        args = ["energy", "--Z", "2,3", "--omega", "4"]
        _, first, _ = run_cli(args, capsys)
        _, second, _ = run_cli(args, capsys)
        assert first == second

    def test_output_file(self, capsys, tmp_path):
        out_path = tmp_path / "e.csv"
        code, _, err = run_cli(
            ["energy", "--Z", "2", "--omega", "0", "--out", str(out_path)],
            capsys,
        )
        assert code == 0
        assert out_path.read_text().splitlines()[1].endswith("-2.847656250")

    def test_omega_cap_is_usage_error(self, capsys):
        code, _, err = run_cli(["energy", "--Z", "2", "--omega", "13"], capsys)
        assert code == 2
        assert "force" in err


class TestEntropyCommand:
    ARGS = [
        "entropy", "--Z", "2", "--omega", "2", "--R", "8", "--nm", "200",
        "--lmax", "2", "--tol-s", "1e-2", "--tol-l", "1e-3",
    ]

    def test_small_run_csv(self, capsys):
        code, out, _ = run_cli(self.ARGS, capsys)
        assert code == 0
        header, row = out.strip().splitlines()
        cols = dict(zip(header.split(","), row.split(",")))
        assert cols["Z"] == "2" and cols["n_m"] == "200"
        assert 0.0 < float(cols["L"]) < 0.05
        assert 0.0 < float(cols["S_bits"]) < 0.2
        assert "ladder" in header

    def test_deterministic(self, capsys):
        _, first, _ = run_cli(self.ARGS, capsys)
        _, second, _ = run_cli(self.ARGS, capsys)
        assert first == second

    def test_json_ladder(self, capsys):
        code, out, _ = run_cli(self.ARGS + ["--format", "json"], capsys)
        assert code == 0
        payload = json.loads(out)
        ladder = payload["results"][0]["ladder"]
        assert len(ladder) == 2
        assert ladder[0]["n_m"] == 100 and ladder[1]["n_m"] == 200

    def test_unreachable_tolerance_exits_3(self, capsys):
        code, _, err = run_cli(
            ["entropy", "--Z", "2", "--omega", "2", "--R", "8", "--nm", "80",
             "--lmax", "1", "--tol-s", "1e-12", "--tol-l", "1e-12"],
            capsys,
        )
        assert code == 3
        assert "ladder" in err

    def test_config_file_with_flag_override(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "Z = 2\nomega = 2\nR = 8\nnm = 200\nlmax = 2\n"
            "tol_s = 1e-2\ntol_l = 1e-3\nformat = json\n"
        )
        code, out, _ = run_cli(["entropy", "--config", str(cfg)], capsys)
        assert code == 0
        assert json.loads(out)["results"][0]["n_m"] == "200"
        # CLI flag wins over the config value
        code, out, _ = run_cli(
            ["entropy", "--config", str(cfg), "--format", "csv"], capsys
        )
        assert code == 0
        assert out.startswith("Z,")


class TestSweepCommand:
    FAST = ["--omega", "2", "--R", "8", "--nm", "120", "--lmax", "1",
            "--tol-s", "1e-2", "--tol-l", "1e-2"]

    def test_columns_and_order(self, capsys):
        code, out, _ = run_cli(["sweep", "--Z", "3,2"] + self.FAST, capsys)
        assert code == 0
        header, *rows = out.strip().splitlines()
        assert header == "Z,S_bits,L,L_rescaled,ratio_S_over_L"
        assert [r.split(",")[0] for r in rows] == ["3", "2"]
        for row in rows:
            cols = row.split(",")
            # both columns were rounded to the same achieved precision
            assert float(cols[3]) == pytest.approx(
                6.856 * float(cols[2]), abs=7 * 10.0 ** -(len(cols[2].split(".")[1]))
            )

    def test_floor_refused(self, capsys):
        code, _, err = run_cli(["sweep", "--Z", "0.9,2"], capsys)
        assert code == 2
        assert "critical" in err

    def test_rescale_factor_reported_at_z5(self, capsys):
        # compact Z=5 state: shrink the box so the coarse grid resolves it
        fast_small = ["--omega", "2", "--R", "3", "--nm", "240", "--lmax", "1",
                      "--tol-s", "1e-2", "--tol-l", "1e-2"]
        code, out, err = run_cli(
            ["sweep", "--Z", "5", "--format", "json"] + fast_small, capsys
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["rescale_constant"] == 6.856
        assert payload["rescale_factor_z5"] is not None


class TestReproduceCommand:
    def test_unknown_table_is_usage_error(self, capsys):
        code, _, _ = run_cli(["reproduce", "table9"], capsys)
        assert code == 2

    def test_energy_table_small(self, capsys, tmp_path):
        out_csv = tmp_path / "t1.csv"
        code, out, _ = run_cli(
            ["reproduce", "table1", "--max-omega", "6", "--out", str(out_csv)],
            capsys,
        )
        assert code == 0
        text_rows = out.strip().splitlines()
        assert text_rows[1].split()[0] == "omega"
        assert "-2.903723702" in out  # the omega=6 helium cell
        csv_rows = out_csv.read_text().strip().splitlines()
        assert csv_rows[0] == "omega,Z=1,Z=2,Z=3,Z=4,Z=5"
        assert len(csv_rows) == 6
        # omega rows above the cutoff stay blank
        assert csv_rows[-1] == "14,,,,,"


class TestThreads:
    def test_thread_count_env(self, monkeypatch):
        monkeypatch.setenv("HELIOX_THREADS", "3")
        assert cli.thread_count() == 3
        monkeypatch.delenv("HELIOX_THREADS")
        assert cli.thread_count() >= 1
