import json
from pathlib import Path

import pytest

from app.core.config import settings
from app.main import main

UNITARY_DIR = Path(__file__).resolve().parent.parent / "unitaries"

RUN_ARGS = ["run", "--N", "4", "--n", "2", "--decoys", "8", "--seed", "7"]


def run_json(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, json.loads(captured.out) if captured.out else None, captured.err


class TestRunCommand:
    """Test the run subcommand"""

    def test_equal_secrets(self, capsys):
        """Test equal secrets"""
        code, document, _ = run_json(
            capsys, RUN_ARGS + ["--secret-a", "1011", "--secret-b", "1011"]
        )

        assert code == 0
        assert document["schema"] == settings.schema_version
        assert document["seed"] == 7
        assert document["result"]["outcome"]["verdict"] == "equal"
        assert "transcript" not in document["result"]["outcome"]

    def test_unequal_secrets_by_decimal(self, capsys):
        """Test unequal secrets by decimal"""
        code, document, _ = run_json(capsys, RUN_ARGS + ["--secret-a", "13", "--secret-b", "12"])

        assert code == 0
        assert document["result"]["outcome"]["verdict"] == "unequal"

    def test_same_seed_same_bytes(self, capsys):
        """Test same seed same bytes"""
        argv = RUN_ARGS + ["--secret-a", "0110", "--secret-b", "0111", "--transcript"]
        main(argv)
        first = capsys.readouterr().out
        main(argv)
        second = capsys.readouterr().out

        assert first == second

    def test_text_format(self, capsys):
        """Test text format"""
        code = main(RUN_ARGS + ["--secret-a", "1", "--secret-b", "1", "--format", "text"])
        out = capsys.readouterr().out

        assert code == 0
        assert out.startswith("verdict: equal")

    def test_malformed_secret(self, capsys):
        """Test malformed secret"""
        code = main(RUN_ARGS + ["--secret-a", "10a1", "--secret-b", "1011"])
        captured = capsys.readouterr()

        assert code == 2
        assert captured.out == ""
        assert captured.err.startswith("error: --secret-a")

    def test_secret_out_of_range(self, capsys):
        """Test secret out of range"""
        assert main(RUN_ARGS + ["--secret-a", "16", "--secret-b", "0"]) == 2

    def test_group_size_out_of_range(self, capsys):
        """Test group size out of range"""
        argv = ["run", "--N", "4", "--n", "5", "--secret-a", "0", "--secret-b", "0"]
        assert main(argv) == 2
        assert "error:" in capsys.readouterr().err

    def test_entangle_needs_unitary(self, capsys):
        """Test entangle needs unitary"""
        code = main(RUN_ARGS + ["--secret-a", "1", "--secret-b", "1", "--attack", "entangle"])

        assert code == 2
        assert "--unitary" in capsys.readouterr().err

    def test_csv_rejected(self, capsys):
        """Test csv rejected"""
        assert main(RUN_ARGS + ["--secret-a", "1", "--secret-b", "1", "--format", "csv"]) == 2

    def test_missing_required_flag(self, capsys):
        """Test missing required flag"""
        assert main(["run", "--N", "4"]) == 2

    def test_save_transcript(self, capsys, tmp_path):
        """Test save transcript"""
        code = main(
            RUN_ARGS
            + ["--secret-a", "1", "--secret-b", "2", "--save-transcript", str(tmp_path)]
        )

        assert code == 0
        saved = json.loads((tmp_path / "run-7.json").read_text())
        assert saved["session_id"] == "run-7"
        assert saved["events"][-1]["payload"] == {"verdict": "unequal"}

    def test_seed_drawn_when_absent(self, capsys, mocker):
        """Test seed drawn when absent"""
        mocker.patch("app.cli.commands.draw_seed", return_value=1234)
        argv = ["run", "--N", "2", "--n", "2", "--secret-a", "1", "--secret-b", "1"]

        code, document, err = run_json(capsys, argv)

        assert code == 0
        assert "seed: 1234" in err
        assert document["seed"] == 1234


class TestExperimentCommands:
    """Test attack and guess subcommands"""

    def test_identity_probe(self, capsys):
        """Test attacking with the identity probe"""
        argv = [
            "attack",
            "--kind",
            "entangle",
            "--unitary",
            str(UNITARY_DIR / "identity.json"),
            "--trials",
            "100",
            "--decoys",
            "4",
            "--seed",
            "1",
        ]
        code, document, _ = run_json(capsys, argv)

        result = document["result"]
        assert code == 0
        assert result["estimate"] == 0
        assert result["pass"] is True
        assert result["details"]["constraints_satisfied"] is True
        assert result["details"]["ancilla_distinguishability"] == 0

    def test_cnot_probe_reports_constraints(self, capsys):
        """Test cnot probe reports constraints"""
        argv = [
            "attack",
            "--kind",
            "entangle",
            "--unitary",
            str(UNITARY_DIR / "cnot.json"),
            "--trials",
            "400",
            "--decoys",
            "1",
            "--seed",
            "2",
        ]
        code, document, _ = run_json(capsys, argv)

        assert code == 0
        assert document["result"]["details"]["constraints_satisfied"] is False

    def test_missing_unitary_file(self, capsys, tmp_path):
        """Test missing unitary file"""
        argv = ["attack", "--kind", "entangle", "--unitary", str(tmp_path / "u.json")]
        assert main(argv + ["--seed", "0"]) == 2

    def test_attack_kind_none(self, capsys):
        """Test attack kind none"""
        assert main(["attack", "--kind", "none", "--seed", "0"]) == 2

    def test_too_few_trials(self, capsys):
        """Test too few trials"""
        assert main(["attack", "--kind", "intercept", "--trials", "10", "--seed", "0"]) == 2

    def test_csv_report(self, capsys):
        """Test csv report"""
        argv = ["attack", "--kind", "intercept", "--trials", "200", "--decoys", "1"]
        main(argv + ["--seed", "5", "--format", "csv"])
        lines = capsys.readouterr().out.splitlines()

        assert lines[0] == "name,parameters,trials,estimate,analytic,std_error,pass"
        assert lines[1].startswith("detection,")

    def test_guess_tp(self, capsys):
        """Test the guess command for TP"""
        argv = ["guess", "--role", "tp", "--N", "2", "--n", "2", "--trials", "400"]
        code, document, _ = run_json(capsys, argv + ["--decoys", "2", "--seed", "3"])

        assert code == 0
        assert document["result"]["name"] == "guess_tp"
        assert document["result"]["analytic"] == 0.5


class TestStaticCommands:
    """Test truth-table, efficiency and correctness"""

    def test_truth_table(self, capsys):
        """Test the truth-table command"""
        code, document, _ = run_json(capsys, ["truth-table"])

        assert code == 0
        assert document["result"]["passed_count"] == 32

    def test_truth_table_text(self, capsys):
        """Test truth table text"""
        assert main(["truth-table", "--format", "text"]) == 0
        assert capsys.readouterr().out.strip().endswith("32/32 rows pass")

    def test_efficiency_text(self, capsys):
        """Test efficiency text"""
        assert main(["efficiency", "--n", "2", "--format", "text"]) == 0
        assert "1/3" in capsys.readouterr().out

    def test_efficiency_many(self, capsys):
        """Test efficiency many"""
        code, document, _ = run_json(capsys, ["efficiency", "--n", "2", "4", "1000000"])

        assert code == 0
        assert [r["numerator"] for r in document["result"][:2]] == [1, 2]
        assert all(r["bounds_ok"] for r in document["result"])

    def test_efficiency_tradeoff(self, capsys):
        """Test efficiency tradeoff"""
        code, document, _ = run_json(capsys, ["efficiency", "--N", "6"])

        assert code == 0
        assert [r["group_size"] for r in document["result"]] == [2, 3, 4, 5, 6]

    def test_efficiency_rejects_small_group(self, capsys):
        """Test efficiency rejects small group"""
        assert main(["efficiency", "--n", "1"]) == 2

    @pytest.mark.parametrize("fmt", ["json", "text"])
    def test_correctness(self, capsys, fmt):
        """Test the correctness sweep in json and text"""
        code = main(["correctness", "--max-N", "3", "--seed", "0", "--format", fmt])
        out = capsys.readouterr().out

        assert code == 0
        if fmt == "json":
            assert json.loads(out)["result"]["all_passed"] is True
        else:
            assert out.strip().endswith("all pass")

    def test_correctness_cap(self, capsys):
        """Test correctness cap"""
        assert main(["correctness", "--max-N", "9", "--seed", "0"]) == 2


class TestFlagOnlyConfiguration:
    """Test that command output depends on flags alone"""

    def test_environment_settings_are_ignored(self, capsys, monkeypatch):
        """Test shared settings do not leak into an experiment command"""
        monkeypatch.setattr(settings, "sigma_multiplier", 0.0)
        monkeypatch.setattr(settings, "min_trials", 10**6)
        monkeypatch.setattr(settings, "default_max_attempts", 5)
        argv = ["attack", "--kind", "intercept", "--decoys", "1", "--trials", "400"]

        code, document, _ = run_json(capsys, argv + ["--seed", "5"])

        assert code == 0
        assert document["result"]["pass"] is True

    def test_shared_settings_restored(self, capsys, monkeypatch):
        """Test the flag defaults only apply while a command runs"""
        monkeypatch.setattr(settings, "exhaustive_max_n", 2)

        assert main(["correctness", "--max-N", "3", "--seed", "0"]) == 0
        assert settings.exhaustive_max_n == 2

    def test_guess_uses_flag_max_attempts(self, capsys, monkeypatch):
        """Test the guess session config takes max attempts from its flag"""
        monkeypatch.setattr(settings, "default_max_attempts", 7)
        argv = ["guess", "--role", "tp", "--N", "2", "--n", "2", "--trials", "100"]

        code, document, _ = run_json(capsys, argv + ["--seed", "1"])

        assert code == 0
        assert document["result"]["parameters"]["max_attempts"] == 1
