import numpy as np
import pytest

from fapplab.cli import main, parse_config_file, resolve_config
from fapplab.errors import ConfigError


def run_cli(*args):
    return main(list(args))


def write_config(path, **pairs):
    lines = ["# test configuration"]
    lines += [f"{key}={value}" for key, value in pairs.items()]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


class TestConfigParsing:
    def test_comments_and_blanks_ignored(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("# hello\n\nkick=6.0\n", encoding="utf-8")
        assert parse_config_file(str(cfg)) == {"kick": "6.0"}

    def test_malformed_line_rejected(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("kick 6.0\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            parse_config_file(str(cfg))

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            resolve_config("bell", {"bogus": "1"})

    def test_bad_value_rejected(self):
        with pytest.raises(ConfigError):
            resolve_config("echo", {"ensemble": "many"})

    def test_range_checks(self):
        with pytest.raises(ConfigError):
            resolve_config("echo", {"ensemble": "10"})
        with pytest.raises(ConfigError):
            resolve_config("qfunction", {"j": "0.3"})
        with pytest.raises(ConfigError):
            resolve_config("classical-reverse", {"samples": "10"})

    def test_unknown_experiment(self):
        with pytest.raises(ConfigError):
            resolve_config("teleportation", {})

    def test_defaults_filled(self):
        cfg = resolve_config("bell", {})
        assert cfg == {"sampled": False, "shots": 10000}


class TestExitCodes:
    def test_config_error_is_2(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.cfg", experiment="bell", bogus="1")
        assert run_cli("--config", cfg, "--out", str(tmp_path / "o.csv")) == 2
        assert "config error" in capsys.readouterr().err

    def test_missing_experiment_is_2(self, tmp_path):
        assert run_cli("--out", str(tmp_path / "o.csv")) == 2

    def test_numerical_failure_is_3(self, tmp_path, capsys):
        # a grid far below the spin band limit trips the tolerance machinery
        cfg = write_config(tmp_path / "c.cfg", experiment="qfunction", j="10",
                           grid_nodes="4")
        assert run_cli("--config", cfg, "--out", str(tmp_path / "o.csv")) == 3
        assert "numerical failure" in capsys.readouterr().err

    def test_io_error_is_4(self, tmp_path):
        assert run_cli("--experiment", "bell",
                       "--out", str(tmp_path / "no" / "dir" / "o.csv")) == 4

    def test_success_is_0(self, tmp_path):
        assert run_cli("--experiment", "friend", "--out", str(tmp_path / "f.txt")) == 0


class TestOutputs:
    def test_bell_summary_and_file(self, tmp_path, capsys):
        out = tmp_path / "bell.csv"
        assert run_cli("--experiment", "bell", "--out", str(out)) == 0
        assert "chsh=2.828427" in capsys.readouterr().out
        text = out.read_text()
        assert "setting_pair,correlation" in text
        assert "lhv_bound=2.000000" in text

    def test_bell_sampled_mode(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.cfg", experiment="bell", sampled="true",
                           shots="4000")
        out = tmp_path / "bell.csv"
        assert run_cli("--config", cfg, "--seed", "3", "--out", str(out)) == 0
        assert "mode=sampled" in capsys.readouterr().out

    def test_reverse_unperturbed_probability_one(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.cfg", experiment="classical-reverse",
                           delta_kick="0.0", t_values="5", samples="500")
        out = tmp_path / "rev.csv"
        assert run_cli("--config", cfg, "--seed", "7", "--out", str(out)) == 0
        assert "probability=1.000000" in capsys.readouterr().out
        rows = [line for line in out.read_text().splitlines()
                if line and not line.startswith("#")]
        assert rows[0] == "t,probability,std_error,bound"
        assert rows[1].startswith("5,1.0,")

    def test_echo_zero_sigma_overlap_one(self, tmp_path):
        cfg = write_config(tmp_path / "c.cfg", experiment="echo", j="3",
                           sigma_scale="0.0", ensemble="100", times="0,5,10")
        out = tmp_path / "echo.csv"
        assert run_cli("--config", cfg, "--out", str(out)) == 0
        rows = [line.split(",") for line in out.read_text().splitlines()
                if line and not line.startswith("#")]
        assert rows[0] == ["t", "mean_overlap", "std_error", "bound"]
        for row in rows[1:]:
            assert float(row[1]) == pytest.approx(1.0, abs=1e-8)

    def test_qfunction_csv(self, tmp_path):
        cfg = write_config(tmp_path / "c.cfg", experiment="qfunction", j="2")
        out = tmp_path / "q.csv"
        assert run_cli("--config", cfg, "--out", str(out)) == 0
        lines = [line for line in out.read_text().splitlines()
                 if line and not line.startswith("#")]
        assert lines[0] == "theta,phi,weight,value"
        values = np.array([[float(x) for x in line.split(",")] for line in lines[1:]])
        assert np.sum(values[:, 2] * values[:, 3]) == pytest.approx(1.0, abs=1e-8)

    def test_friend_report_keys(self, tmp_path):
        cfg = write_config(tmp_path / "c.cfg", experiment="friend", observer_dim="3")
        out = tmp_path / "friend.txt"
        assert run_cli("--config", cfg, "--out", str(out)) == 0
        text = out.read_text()
        for key in ("fidelity_superposition_output", "branch_probability_up",
                    "p_plus_post_message", "message_purity"):
            assert key in text

    def test_config_echoed_with_defaults(self, tmp_path):
        out = tmp_path / "bell.csv"
        assert run_cli("--experiment", "bell", "--seed", "11", "--out", str(out)) == 0
        text = out.read_text()
        assert "# seed=11" in text
        assert "# sampled=false" in text  # default filled in
        assert "# shots=10000" in text


class TestReproducibility:
    def test_byte_identical_reruns(self, tmp_path):
        cfg = write_config(tmp_path / "c.cfg", experiment="classical-reverse",
                           t_values="3,5", samples="400")
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run_cli("--config", cfg, "--seed", "5", "--out", str(a)) == 0
        assert run_cli("--config", cfg, "--seed", "5", "--out", str(b)) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_thread_count_does_not_change_numbers(self, tmp_path):
        out1, out2 = tmp_path / "t1.csv", tmp_path / "t2.csv"
        cfg = write_config(tmp_path / "c.cfg", experiment="echo", j="2",
                           sigma_scale="0.05", ensemble="100", times="0,4")
        assert run_cli("--config", cfg, "--seed", "2", "--threads", "1",
                       "--out", str(out1)) == 0
        assert run_cli("--config", cfg, "--seed", "2", "--threads", "4",
                       "--out", str(out2)) == 0
        data1 = [line for line in out1.read_text().splitlines()
                 if not line.startswith("#")]
        data2 = [line for line in out2.read_text().splitlines()
                 if not line.startswith("#")]
        assert data1 == data2
