import json

import pytest

from alod import cli
from alod.datastore import load_dataset
from alod.loop import read_comparison_csv


@pytest.fixture()
def small_config_path(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(
        json.dumps(
            {
                "n_images": 30,
                "num_classes": 4,
                "cycles": 2,
                "budget": 3,
                "a0_size": 8,
                "background_count": 4,
                "seed": 5,
            }
        )
    )
    return str(path)


class TestParsingAndConfig:
    def test_print_config(self, capsys):
        assert cli.main(["--print-config"]) == 0
        blob = json.loads(capsys.readouterr().out)
        assert blob["delta"] == 0.7
        assert blob["q"] == 0.9996
        assert blob["strategy"] == "product"
        assert blob["cost"]["draw_seconds"] == 34.5

    def test_no_command_is_config_error(self, capsys):
        assert cli.main([]) == 2

    def test_unknown_config_key_exits_2(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"n_imagez": 10}))
        code = cli.main(["simulate", "--config", str(path), "--out", str(tmp_path / "o")])
        assert code == 2
        assert "n_imagez" in capsys.readouterr().err

    def test_invalid_value_exits_2(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"cycles": 0}))
        code = cli.main(["simulate", "--config", str(path), "--out", str(tmp_path / "o")])
        assert code == 2

    def test_missing_config_file_exits_2(self, tmp_path):
        code = cli.main(
            ["simulate", "--config", str(tmp_path / "ghost.json"), "--out", str(tmp_path)]
        )
        assert code == 2


class TestGenerate:
    def test_writes_datasets(self, tmp_path, small_config_path, capsys):
        out = tmp_path / "gen"
        code = cli.main(["generate", "--config", small_config_path, "--out", str(out)])
        assert code == 0
        world, world_version = load_dataset(out / "world.jsonl")
        aux, aux_version = load_dataset(out / "auxiliary.jsonl")
        assert len(world) == 30
        assert len(world_version.weak_ids) == 30
        assert len(aux) == 60
        assert aux_version.full_ids == frozenset(aux)
        assert all(r.source == "auxiliary" for r in aux.values())
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "generate"

    def test_seed_determinism(self, tmp_path, small_config_path):
        outs = [tmp_path / "a", tmp_path / "b"]
        for out in outs:
            cli.main(["generate", "--config", small_config_path, "--out", str(out)])
        for name in ("world.jsonl", "auxiliary.jsonl"):
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()

    def test_seed_flag_changes_output(self, tmp_path, small_config_path):
        outs = [tmp_path / "a", tmp_path / "b"]
        for out, seed in zip(outs, ("5", "6")):
            cli.main(
                [
                    "generate", "--config", small_config_path,
                    "--seed", seed, "--out", str(out),
                ]
            )
        assert (outs[0] / "world.jsonl").read_bytes() != (outs[1] / "world.jsonl").read_bytes()


class TestSimulate:
    def test_run_directory_contents(self, tmp_path, small_config_path, capsys):
        out = tmp_path / "run"
        code = cli.main(["simulate", "--config", small_config_path, "--out", str(out)])
        assert code == 0
        names = sorted(p.name for p in out.iterdir())
        assert names == [
            "config.json",
            "curves.csv",
            "cycle_000.json",
            "cycle_001.json",
            "cycle_002.json",
            "manifest.json",
        ]
        assert "final AP50" in capsys.readouterr().out
        config = json.loads((out / "config.json").read_text())
        assert config["n_images"] == 30

    def test_strategy_flag_changes_acquisition(self, tmp_path, small_config_path):
        acquired = {}
        for strategy in ("product", "uniform"):
            out = tmp_path / strategy
            cli.main(
                [
                    "simulate", "--config", small_config_path,
                    "--strategy", strategy, "--out", str(out),
                ]
            )
            report = json.loads((out / "cycle_001.json").read_text())
            acquired[strategy] = report["acquired"]
        assert acquired["product"] != acquired["uniform"]


class TestCompare:
    def test_outputs(self, tmp_path, small_config_path, capsys):
        out = tmp_path / "cmp"
        code = cli.main(
            [
                "compare", "--config", small_config_path, "--out", str(out),
                "--strategies", "product", "uniform", "--seeds", "1", "2",
            ]
        )
        assert code == 0
        rows = read_comparison_csv(out / "comparison.csv")
        assert len(rows) == 2 * 2 * 3  # strategies x seeds x (cycles + 1)
        summary = (out / "summary.csv").read_text().splitlines()
        assert summary[0] == "strategy,mean_final_ap50"
        assert [line.split(",")[0] for line in summary[1:]] == ["product", "uniform"]

    def test_single_strategy_rejected(self, tmp_path, small_config_path):
        code = cli.main(
            [
                "compare", "--config", small_config_path,
                "--out", str(tmp_path / "o"), "--strategies", "product",
            ]
        )
        assert code == 2

    def test_unknown_strategy_rejected(self, tmp_path, small_config_path):
        code = cli.main(
            [
                "compare", "--config", small_config_path,
                "--out", str(tmp_path / "o"), "--strategies", "product", "psychic",
            ]
        )
        assert code == 2
