"""Тесты оркестрации, артефактов и повтора трасс."""

import json

import pytest

from async_election.core import ExperimentRunner, derive_seed, replay
from async_election.models import VerdictStatus
from async_election.output.directory_builder import REPORTS_DIR, TRACES_DIR
from async_election.output.file_manager import CONFIG_FILE, SUMMARY_FILE, VERDICTS_FILE, VERDICTS_JSON, FileManager
from async_election.utils.exceptions import ParameterError, ReplayMismatchError, TraceParseError


def sweep(tmp_path=None, **overrides):
    config = {
        "graphs": [{"family": "ring"}],
        "sizes": [8],
        "protocol": {"quorum_low": 5},
        "adversaries": [{"name": "uniform-delay", "wakeup": "single"}],
        "trials": 3,
        "seed": 42,
        "logging": {"level": "WARNING"},
    }
    if tmp_path is not None:
        config["output_path"] = str(tmp_path / "out")
        config["keep_traces"] = "all"
    config.update(overrides)
    return config


def write_lines(path, lines):
    path.write_text("".join(lines), encoding="utf-8")


class TestSeeds:
    """Производные зерна."""

    def test_derive_seed(self):
        assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
        assert len({derive_seed(1, 0, t) for t in range(100)}) == 100
        assert 0 <= derive_seed(7) < 2 ** 64


class TestExperimentRunner:
    """Свип без записи на диск."""

    def test_smoke(self):
        result = ExperimentRunner(config_dict=sweep(), write_artifacts=False).run_experiment()
        assert result.exit_code == 0
        assert len(result.reports) == 3
        assert [r.trial for r in result.reports] == [0, 1, 2]
        assert result.output_dir is None
        names = [v.name for v in result.verdicts]
        assert "safety" in names
        assert "message-bound[ring uniform-delay/single]" in names
        assert "time-bound[uniform-delay/single]" in names
        assert not any(v.hard and v.failed for v in result.verdicts)

    def test_points(self):
        runner = ExperimentRunner(
            config_dict=sweep(
                graphs=[{"family": "ring"}, {"family": "complete"}],
                sizes=[8, 16],
                adversaries=[{"name": "unit-delay"}, {"name": "uniform-delay"}],
            ),
            write_artifacts=False,
        )
        points = runner.build_points()
        assert len(points) == 8
        assert [p.index for p in points] == list(range(8))
        # один граф на пару (семейство, n)
        assert points[0].graph is points[1].graph

    def test_same_config_same_reports(self):
        first = ExperimentRunner(config_dict=sweep(), write_artifacts=False).run_experiment()
        second = ExperimentRunner(config_dict=sweep(), write_artifacts=False).run_experiment()
        assert [r.model_dump() for r in first.reports] == [r.model_dump() for r in second.reports]

    def test_workers_do_not_change_results(self):
        serial = ExperimentRunner(config_dict=sweep(), write_artifacts=False).run_experiment()
        parallel = ExperimentRunner(config_dict=sweep(workers=2), write_artifacts=False).run_experiment()
        assert [r.model_dump() for r in serial.reports] == [r.model_dump() for r in parallel.reports]

    def test_no_candidates_is_not_a_hard_failure(self):
        config = sweep(protocol={"forced": {"candidates": 0}})
        result = ExperimentRunner(config_dict=config, write_artifacts=False).run_experiment()
        assert result.exit_code == 0
        liveness = next(v for v in result.verdicts if v.name == "liveness")
        assert liveness.status == VerdictStatus.CLASSIFIED
        assert all(r.failure_reason == "no-candidate" for r in result.reports)

    def test_bad_rank_space(self):
        runner = ExperimentRunner(config_dict=sweep(protocol={"rank_space_max": 10}), write_artifacts=False)
        with pytest.raises(ParameterError):
            runner.run_experiment()

    def test_distinct_ranks_retries(self):
        # 64 узла в пространстве из 64^2 рангов: совпадения часты
        protocol = {
            "quorum_low": 4,
            "rank_space_max": 64 ** 2,
            "distinct_ranks": True,
            "max_rank_retries": 50,
            "forced": {"candidates": 3, "referees": 6},
        }
        config = sweep(sizes=[64], trials=4, protocol=protocol)
        result = ExperimentRunner(config_dict=config, write_artifacts=False).run_experiment()
        assert not any(r.flags.rank_collision for r in result.reports)


class TestArtifacts:
    """Каталог эксперимента и повтор сохраненных трасс."""

    @pytest.fixture
    def saved(self, tmp_path):
        result = ExperimentRunner(config_dict=sweep(tmp_path)).run_experiment()
        return result, tmp_path / "out"

    def test_layout(self, saved):
        result, out = saved
        assert result.output_dir == out
        for name in (SUMMARY_FILE, VERDICTS_FILE, VERDICTS_JSON, CONFIG_FILE):
            assert (out / name).is_file()
        assert sorted(p.name for p in (out / REPORTS_DIR).iterdir()) == [
            "p000-t00000.json",
            "p000-t00001.json",
            "p000-t00002.json",
        ]
        assert result.traces_kept == 3
        assert (out / TRACES_DIR / "p000-t00001.jsonl").is_file()
        assert json.loads((out / VERDICTS_JSON).read_text(encoding="utf-8"))[0]["name"]

    def test_reports_reload(self, saved):
        result, out = saved
        assert FileManager.load_reports(out) == result.reports

    def test_replay_matches(self, saved):
        _, out = saved
        verdicts = replay(out / TRACES_DIR / "p000-t00002.jsonl")
        assert not any(v.hard and v.failed for v in verdicts)

    def test_replay_deleted_record(self, saved, tmp_path):
        _, out = saved
        source = out / TRACES_DIR / "p000-t00000.jsonl"
        lines = source.read_text(encoding="utf-8").splitlines(keepends=True)
        # строка 0 - заголовок, строка k+1 - запись k
        broken = tmp_path / "broken.jsonl"
        write_lines(broken, lines[:4] + lines[5:])
        with pytest.raises(ReplayMismatchError) as info:
            replay(broken)
        assert info.value.index == 3

    def test_replay_truncated(self, saved, tmp_path):
        _, out = saved
        lines = (out / TRACES_DIR / "p000-t00000.jsonl").read_text(encoding="utf-8").splitlines(keepends=True)
        broken = tmp_path / "short.jsonl"
        write_lines(broken, lines[:-1])
        with pytest.raises(ReplayMismatchError) as info:
            replay(broken)
        assert info.value.index == len(lines) - 2

    def test_replay_header_tampered(self, saved, tmp_path):
        _, out = saved
        lines = (out / TRACES_DIR / "p000-t00000.jsonl").read_text(encoding="utf-8").splitlines(keepends=True)
        first = json.loads(lines[0])
        first["header"]["origin"] = 5.0
        broken = tmp_path / "header.jsonl"
        write_lines(broken, [json.dumps(first) + "\n"] + lines[1:])
        with pytest.raises(ReplayMismatchError) as info:
            replay(broken)
        assert info.value.index == -1

    def test_replay_garbage(self, tmp_path):
        path = tmp_path / "garbage.jsonl"
        path.write_text("not json\n", encoding="utf-8")
        with pytest.raises(TraceParseError):
            replay(path)

    def test_gzip_traces(self, tmp_path):
        result = ExperimentRunner(config_dict=sweep(tmp_path, gzip_traces=True, trials=1)).run_experiment()
        path = result.output_dir / TRACES_DIR / "p000-t00000.jsonl.gz"
        assert path.is_file()
        assert not any(v.hard and v.failed for v in replay(path))
