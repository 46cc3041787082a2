import json
import os

import pandas as pd

from swap_nas.cli import main
from swap_nas.domain.exceptions.base_exception import EXIT_OK, EXIT_ORACLE, EXIT_RUNTIME, EXIT_USAGE
from swap_nas.infrastructure.persistence.artifacts import read_jsonl
from swap_nas.infrastructure.persistence.run_config import EFFECTIVE_CONFIG

CELL = "space=NB201;C=2,N=1;|conv3x3~0|+|skip~0|conv1x1~1|+|avgpool3x3~0|conv3x3~1|none~2|"
TINY = ["--dims", "3,8,8", "--batch-size", "4"]
TINY_SEARCH = [
    "--space", "NB201",
    "--population-size", "4",
    "--cycles", "2",
    "--mutation-times", "2",
    "--stem-channels", "2",
    "--stack-depth", "1",
] + TINY


def _score(capsys, *extra) -> dict:
    assert main(["score", CELL, *TINY, *extra]) == EXIT_OK
    return json.loads(capsys.readouterr().out.strip().splitlines()[-1])


class TestScore:
    def test_prints_one_record(self, capsys):
        record = _score(capsys)
        assert list(record)[:10] == ["genome", "seed", "S", "V", "swap", "reg_swap", "standard", "params_m", "flops", "f_theta"]
        assert record["genome"] == CELL
        assert record["S"] == 4
        assert 1 <= record["swap"] <= record["V"]

    def test_regularisation_off(self, capsys):
        record = _score(capsys, "--reg", "off")
        assert record["reg_swap"] == record["swap"]
        assert record["f_theta"] == 1.0

    def test_repeatable(self, capsys):
        assert _score(capsys, "--seed", "3") == _score(capsys, "--seed", "3")

    def test_token_batch(self, capsys):
        genome = "space=TFORM;L=1,H=2,DM=16,DF=32,T=4,V=50"
        assert main(["score", genome, "--batch-kind", "tokens", "--dims", "4", "--batch-size", "3"]) == EXIT_OK
        record = json.loads(capsys.readouterr().out.strip())
        assert record["V"] == 4 * 32

    def test_config_file_is_overridden_by_flags(self, tmp_path, capsys):
        config = tmp_path / "run.env"
        config.write_text("batch_size=2\nreg=off\n", encoding="utf-8")
        record = _score(capsys, "--config", str(config))
        assert record["S"] == 4
        assert record["reg_swap"] == record["swap"]

    def test_snapshot_reproduces_the_score(self, tmp_path, capsys):
        out = str(tmp_path / "score")
        first = _score(capsys, "--seed", "5", "--out", out)
        snapshot = open(os.path.join(out, EFFECTIVE_CONFIG), encoding="utf-8").read()
        assert f"genome={CELL}" in snapshot
        assert main(["score", "--config", os.path.join(out, EFFECTIVE_CONFIG), "--out", str(tmp_path / "again")]) == EXIT_OK
        assert json.loads(capsys.readouterr().out.strip().splitlines()[-1]) == first

    def test_unknown_config_key(self, tmp_path, capsys):
        config = tmp_path / "run.env"
        config.write_text("populaton_size=3\n", encoding="utf-8")
        assert main(["score", CELL, "--config", str(config)]) == EXIT_USAGE
        assert "unknown config keys" in capsys.readouterr().err


class TestExitCodes:
    def test_help(self):
        assert main(["--help"]) == EXIT_OK

    def test_unknown_command(self):
        assert main(["train"]) == EXIT_USAGE

    def test_bad_flag_value(self):
        assert main(["score", CELL, "--reg", "sometimes"]) == EXIT_USAGE

    def test_malformed_genome(self, capsys):
        assert main(["score", "space=NB201;C=2"]) == EXIT_USAGE
        err = capsys.readouterr().err
        assert "parse error at offset" in err
        assert "hint: swap-nas score --help" in err

    def test_degenerate_network(self, capsys):
        assert main(["score", "space=CHAIN;|4:5:1|", "--dims", "3,4,4", "--batch-size", "2"]) == EXIT_RUNTIME
        assert "degenerate shape" in capsys.readouterr().err

    def test_missing_ground_truth(self, tmp_path, capsys):
        code = main(["correlate", "--csv", str(tmp_path / "absent.csv"), "--out", str(tmp_path / "out")])
        assert code == EXIT_USAGE
        assert "arch_id, encoding, accuracy" in capsys.readouterr().err

    def test_invalid_search_config(self, tmp_path):
        assert main(["search", "--space", "NB201", "--population-size", "1", "--out", str(tmp_path)]) == EXIT_USAGE

    def test_oracle_cap_limit(self, tmp_path):
        assert main(["oracle-check", "--vcap", "6000", "--out", str(tmp_path)]) == EXIT_USAGE

    def test_oracle_without_enough_nets(self, tmp_path, capsys):
        assert main(["oracle-check", "--nets", "3", "--vcap", "5", "--out", str(tmp_path)]) == EXIT_ORACLE
        assert "only 0/3 nets" in capsys.readouterr().err


class TestSearch:
    def test_writes_artifacts(self, tmp_path, capsys):
        out = str(tmp_path / "run")
        assert main(["search", *TINY_SEARCH, "--out", out]) == EXIT_OK
        best = capsys.readouterr().out.strip().splitlines()[-1]

        for name in ("history.jsonl", "cycles.jsonl", "best.txt", EFFECTIVE_CONFIG):
            assert os.path.isfile(os.path.join(out, name))
        assert open(os.path.join(out, "best.txt"), encoding="utf-8").read().strip() == best
        assert len(read_jsonl(os.path.join(out, "cycles.jsonl"))) == 3
        history = read_jsonl(os.path.join(out, "history.jsonl"))
        assert len(history) >= 4
        assert all("mu" in record for record in history)

    def test_effective_config_reproduces_the_run(self, tmp_path, capsys):
        first, second = str(tmp_path / "a"), str(tmp_path / "b")
        assert main(["search", *TINY_SEARCH, "--seed", "11", "--out", first]) == EXIT_OK
        assert main(["search", "--config", os.path.join(first, EFFECTIVE_CONFIG), "--out", second]) == EXIT_OK

        def _read(path):
            return open(path, encoding="utf-8").read()

        assert _read(os.path.join(first, "best.txt")) == _read(os.path.join(second, "best.txt"))
        assert _read(os.path.join(first, "history.jsonl")) == _read(os.path.join(second, "history.jsonl"))
        snapshot = _read(os.path.join(first, EFFECTIVE_CONFIG))
        assert "population_size=4" in snapshot
        assert "tournament_size=2" in snapshot
        assert "dims=3,8,8" in snapshot

    def test_adaptive_flag(self, tmp_path, capsys):
        out = str(tmp_path / "run")
        assert main(["search", *TINY_SEARCH, "--adaptive", "--out", out]) == EXIT_OK
        cycles = read_jsonl(os.path.join(out, "cycles.jsonl"))
        assert cycles[0]["mu"] != 1.0


class TestHarnessCommands:
    def test_correlate(self, tmp_path, capsys):
        csv = tmp_path / "gt.csv"
        csv.write_text(
            "arch_id,encoding,accuracy\n"
            f"a,\"{CELL}\",70.0\n"
            "b,\"space=NB201;C=2,N=1;|conv3x3~0|+|conv3x3~0|conv3x3~1|+|conv3x3~0|conv3x3~1|conv3x3~2|\",75.0\n"
            "c,\"space=NB201;C=2,N=1;|skip~0|+|skip~0|none~1|+|avgpool3x3~0|skip~1|none~2|\",40.0\n"
            "d,\"space=NB201;C=2,N=1;|conv1x1~0|+|conv3x3~0|skip~1|+|none~0|conv1x1~1|conv3x3~2|\",60.0\n",
            encoding="utf-8",
        )
        out = str(tmp_path / "out")
        assert main(["correlate", "--csv", str(csv), "--seeds", "0,1", *TINY, "--out", out]) == EXIT_OK
        records = read_jsonl(os.path.join(out, "correlation.jsonl"))
        assert [r["metric"] for r in records] == ["swap", "reg_swap", "standard", "params", "flops", "reg_params", "reg_flops"]
        assert all(r["n"] == 4 and r["seeds"] == [0, 1] for r in records)
        assert os.path.isfile(os.path.join(out, "correlation_long.csv"))

    def test_ablate_batch_size(self, tmp_path, capsys):
        out = str(tmp_path / "out")
        args = ["ablate", "batch-size", "--space", "NB201", "--sizes", "2,4", "--seeds", "0", "--nets", "2",
                "--stem-channels", "2", "--stack-depth", "1", *TINY, "--out", out]
        assert main(args) == EXIT_OK
        assert os.path.isfile(os.path.join(out, "ablation_batch_size.csv"))
        assert len(pd.read_csv(os.path.join(out, "ablation_batch_size_long.csv"))) == 2 * 2 * 3

    def test_ablate_input_dim(self, tmp_path, capsys):
        out = str(tmp_path / "out")
        args = ["ablate", "input-dim", "--space", "NB201", "--crops", "4,8", "--seeds", "0", "--nets", "2",
                "--batch-kind", "image", "--stem-channels", "2", "--stack-depth", "1", *TINY, "--out", out]
        assert main(args) == EXIT_OK
        assert os.path.isfile(os.path.join(out, "ablation_input_dim.csv"))

    def test_oracle_check(self, tmp_path, capsys):
        out = str(tmp_path / "out")
        assert main(["oracle-check", "--space", "NB201", "--nets", "2", "--vcap", "2000", "--out", out]) == EXIT_OK
        report = json.load(open(os.path.join(out, "oracle.json"), encoding="utf-8"))
        assert report["passed"] and report["checked"] == 2
