"""Тесты командной строки."""

import json

import pytest

from async_election.cli import (
    EXIT_HARD_FAILURE,
    EXIT_IO,
    EXIT_OK,
    EXIT_REPLAY_MISMATCH,
    EXIT_USAGE,
    build_parser,
    main,
    overrides_from_args,
)
from async_election.graph.edge_list import EdgeListParser
from async_election.output.directory_builder import TRACES_DIR
from async_election.protocol.messages import Dispute, encode
from async_election.utils.exceptions import ConfigError


def run_args(out, *extra):
    return [
        "--log-level", "WARNING",
        "run", "--graph", "ring", "--n", "8", "--quorum-low", "5",
        "--trials", "2", "--seed", "3", "--out", str(out), "--keep-traces", "all",
        *extra,
    ]


class TestOverrides:
    """Флаги превращаются в ключи конфигурации."""

    def test_mapping(self):
        args = build_parser().parse_args(
            [
                "run", "--graph", "connected-uniform-random", "--p", "0.3", "--n", "16", "32",
                "--preset", "paper", "--forced-candidates", "2", "--adversary", "unit-delay", "dispute-stress",
                "--wakeup", "all", "--gzip",
            ]
        )
        overrides = overrides_from_args(args)
        assert overrides["graphs"] == [{"family": "connected-uniform-random", "edge_probability": 0.3}]
        assert overrides["sizes"] == [16, 32]
        assert overrides["protocol"] == {"preset": "paper", "forced": {"candidates": 2}}
        assert [a["name"] for a in overrides["adversaries"]] == ["unit-delay", "dispute-stress"]
        assert all(a["wakeup"] == "all" for a in overrides["adversaries"])
        assert overrides["gzip_traces"] is True

    def test_empty(self):
        assert overrides_from_args(build_parser().parse_args(["run"])) == {}

    def test_edge_list_conflicts_with_graph(self):
        args = build_parser().parse_args(["run", "--graph", "ring", "--edge-list", "g.txt"])
        with pytest.raises(ConfigError):
            overrides_from_args(args)

    def test_probability_needs_graph(self):
        with pytest.raises(ConfigError):
            overrides_from_args(build_parser().parse_args(["run", "--p", "0.5"]))


class TestCommands:
    """Коды выхода подкоманд."""

    def test_run_replay_summarize(self, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(run_args(out)) == EXIT_OK
        assert "safety" in capsys.readouterr().out

        assert main(["replay", str(out / TRACES_DIR / "p000-t00001.jsonl")]) == EXIT_OK
        capsys.readouterr()

        assert main(["summarize", str(out)]) == EXIT_OK
        header = capsys.readouterr().out.splitlines()[0]
        assert header.startswith("n,family,adversary,trials")

    def test_single_node_is_usage_error(self, tmp_path):
        assert main(["run", "--graph", "ring", "--n", "1", "--out", str(tmp_path)]) == EXIT_USAGE

    def test_unknown_adversary_is_usage_error(self, tmp_path):
        argv = ["run", "--graph", "ring", "--n", "8", "--adversary", "gentle", "--out", str(tmp_path)]
        assert main(argv) == EXIT_USAGE

    def test_replay_mismatch(self, tmp_path):
        out = tmp_path / "out"
        assert main(run_args(out)) == EXIT_OK
        source = out / TRACES_DIR / "p000-t00000.jsonl"
        lines = source.read_text(encoding="utf-8").splitlines(keepends=True)
        record = json.loads(lines[2])
        record["time"] += 0.5
        lines[2] = json.dumps(record) + "\n"
        tampered = tmp_path / "tampered.jsonl"
        tampered.write_text("".join(lines), encoding="utf-8")
        assert main(["replay", str(tampered)]) == EXIT_REPLAY_MISMATCH

    def test_missing_trace_is_io_error(self, tmp_path):
        assert main(["replay", str(tmp_path / "none.jsonl")]) == EXIT_IO

    def test_summarize_missing_dir(self, tmp_path):
        assert main(["summarize", str(tmp_path / "none")]) == EXIT_IO

    def test_flood(self, capsys):
        assert main(["flood", "--graph", "ring", "--n", "8", "--k", "3"]) == EXIT_OK
        assert "time=6" in capsys.readouterr().out


    def test_corrupt_dispute_payload_is_io_error(self, tmp_path):
        out = tmp_path / "out"
        assert main(run_args(out)) == EXIT_OK
        source = out / TRACES_DIR / "p000-t00000.jsonl"
        lines = source.read_text(encoding="utf-8").splitlines(keepends=True)
        index = next(i for i, line in enumerate(lines[1:], 1) if json.loads(line).get("payload"))
        record = json.loads(lines[index])
        wire = encode(Dispute(3, 5))
        record["payload"] = (wire[:1] + wire[9:] + wire[1:9]).hex()
        lines[index] = json.dumps(record) + "\n"
        corrupted = tmp_path / "corrupted.jsonl"
        corrupted.write_text("".join(lines), encoding="utf-8")
        assert main(["replay", str(corrupted)]) == EXIT_IO

    def test_rank_space_beyond_int64_is_usage_error(self, tmp_path):
        argv = ["run", "--graph", "ring", "--n", "8", "--rank-space-max", str(2 ** 64), "--out", str(tmp_path)]
        assert main(argv) == EXIT_USAGE

    def test_graph_to_stdout(self, capsys):
        assert main(["graph", "--graph", "ring", "--n", "5"]) == EXIT_OK
        n, edges = EdgeListParser.parse(capsys.readouterr().out)
        assert n == 5
        assert sorted(edges) == [(0, 1), (0, 4), (1, 2), (2, 3), (3, 4)]

    def test_graph_file_feeds_run(self, tmp_path, capsys):
        path = tmp_path / "torus.txt"
        assert main(["graph", "--graph", "torus-2d", "--n", "16", "--out", str(path)]) == EXIT_OK
        assert path.read_text(encoding="utf-8").splitlines()[0] == "16 32"
        out = tmp_path / "out"
        argv = ["--log-level", "WARNING", "run", "--edge-list", str(path), "--quorum-low", "9", "--out", str(out)]
        assert main(argv) == EXIT_OK
        capsys.readouterr()
        assert main(["summarize", str(out)]) == EXIT_OK
        assert ",from-edge-list," in capsys.readouterr().out

    def test_graph_single_node_is_usage_error(self):
        assert main(["graph", "--graph", "ring", "--n", "1"]) == EXIT_USAGE
    def test_exit_codes_distinct(self):
        assert len({EXIT_OK, EXIT_HARD_FAILURE, EXIT_USAGE, EXIT_REPLAY_MISMATCH, EXIT_IO}) == 5
