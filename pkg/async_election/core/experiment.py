"""Оркестрация экспериментов и повтор трасс."""

import json
import time
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from async_election.core.config import Config, resolve_params
from async_election.graph.generator import Graph, generate
from async_election.metrics.checks import (
    MIN_CONCENTRATION_REPORTS,
    check_message_bound,
    check_role_concentration,
    check_time_bound,
    run_checks,
)
from async_election.metrics.summary import format_verdicts, summarize
from async_election.models import (
    AdversarySpec,
    ExperimentConfig,
    ExperimentResult,
    ForcedRoles,
    GraphFamilyTag,
    ProtocolParams,
    RunReport,
    TraceRetention,
    Verdict,
    VerdictStatus,
)
from async_election.output import DirectoryBuilder, FileManager
from async_election.simnet.adversary import make_adversary
from async_election.simnet.engine import format_record, run
from async_election.simnet.trace import Trace
from async_election.utils.exceptions import ReplayMismatchError, TraceParseError
from async_election.utils.logger import get_logger, setup_logger

logger = get_logger(__name__)

UNIT_DELAY = "unit-delay"


def derive_seed(master: int, *keys: int) -> int:
    """
    64-битное зерно из мастер-зерна и ключей (точка, прогон, попытка).

    Args:
        master: Мастер-зерно
        keys: Неотрицательные целые ключи

    Returns:
        Зерно в [0, 2^64)
    """
    state = np.random.SeedSequence([master, *keys]).generate_state(1, dtype=np.uint64)
    return int(state[0])


@dataclass(frozen=True)
class SweepPoint:
    """Точка свипа: граф, параметры и противник."""

    index: int
    graph: Graph
    params: ProtocolParams
    adversary: AdversarySpec

    @property
    def label(self) -> str:
        return f"{self.graph.family} n={self.graph.n} {self.adversary.label}"


@dataclass(frozen=True)
class TrialTask:
    """Независимая единица работы для пула процессов."""

    point: int
    trial: int
    seed: int
    graph: Graph
    params: ProtocolParams
    adversary: AdversarySpec
    roles: Optional[ForcedRoles] = None
    max_events: int = 10 ** 9
    rank_tiebreak: bool = False
    distinct_ranks: bool = False
    max_rank_retries: int = 10
    keep_traces: TraceRetention = TraceRetention.FAILURES_ONLY


@dataclass
class TrialResult:
    point: int
    trial: int
    report: RunReport
    verdicts: List[Verdict]
    retries: int = 0
    trace: Optional[Trace] = field(default=None, repr=False)

    @property
    def failed(self) -> bool:
        return any(v.failed for v in self.verdicts) or not self.report.exactly_one_leader


def run_trial(task: TrialTask) -> TrialResult:
    """
    Один прогон с проверками; при distinct_ranks совпадение рангов перезапускает прогон.

    Args:
        task: Задание

    Returns:
        Результат прогона
    """
    retries = 0
    seed = task.seed
    while True:
        adversary = make_adversary(task.adversary, seed)
        trace, report = run(
            task.graph,
            task.params,
            adversary,
            seed,
            roles=task.roles,
            max_events=task.max_events,
            rank_tiebreak=task.rank_tiebreak,
            trial=task.trial,
        )
        if not (task.distinct_ranks and report.flags.rank_collision) or retries >= task.max_rank_retries:
            break
        retries += 1
        seed = derive_seed(task.seed, retries)
        logger.debug(f"Совпадение рангов в прогоне {task.trial}: перезапуск #{retries} с seed={seed}")

    verdicts = run_checks(trace, report, unit_delay=task.adversary.name == UNIT_DELAY)
    result = TrialResult(task.point, task.trial, report, verdicts, retries)
    if task.keep_traces == TraceRetention.ALL or (
        task.keep_traces == TraceRetention.FAILURES_ONLY and result.failed
    ):
        result.trace = trace
    return result


def _init_worker(level: str) -> None:
    setup_logger(level=level)


def aggregate_verdicts(name: str, verdicts: Sequence[Verdict]) -> Verdict:
    """Сводит вердикты одной проверки по всем прогонам."""
    counts: Dict[str, int] = defaultdict(int)
    for v in verdicts:
        counts[v.status.value] += 1
    failed = [v for v in verdicts if v.failed]
    hard = any(v.hard for v in verdicts)

    if failed:
        status = VerdictStatus.FAIL
        message = f"провалено {len(failed)} из {len(verdicts)}: {failed[0].message}"
    elif len(counts) == 1:
        status = verdicts[0].status
        message = f"{len(verdicts)} прогонов: {status.value}"
    else:
        status = VerdictStatus.PASS
        message = ", ".join(f"{k}={v}" for k, v in sorted(counts.items()))
    return Verdict(name=name, status=status, hard=hard, message=message, details=dict(counts))


class ExperimentRunner:
    """
    Запуск свипа: точки (граф, n, противник) x прогоны, проверки и артефакты.

    Прогоны независимы и сливаются по номеру прогона, поэтому результат
    не зависит от числа рабочих процессов.
    """

    def __init__(
        self,
        config_path: Optional[str] = None,
        config_dict: Optional[Dict[str, Any]] = None,
        overrides: Optional[Dict[str, Any]] = None,
        write_artifacts: bool = True,
    ) -> None:
        """
        Инициализация.

        Args:
            config_path: Путь к YAML конфигурации
            config_dict: Словарь конфигурации (альтернатива config_path)
            overrides: Переопределения из командной строки
            write_artifacts: Сохранять отчеты, сводку и трассы на диск

        Raises:
            ConfigError: При ошибках конфигурации
        """
        self.config = Config(config_path=config_path, config_dict=config_dict, overrides=overrides)

        logging_config = self.config.get_logging_config()
        self.log_level = logging_config.get("level", "INFO")
        setup_logger(
            level=self.log_level,
            log_file=logging_config.get("file"),
            format_string=logging_config.get("format"),
        )
        self.logger = get_logger(__name__)
        self.worker_log_level = logging_config.get("worker_level", "WARNING")

        self.experiment: ExperimentConfig = self.config.get_experiment_config()
        self.write_artifacts = write_artifacts
        self.file_manager = FileManager(self.config.get_output_path())
        self.directory_builder = DirectoryBuilder()

    def build_points(self) -> List[SweepPoint]:
        """
        Раскрывает конфигурацию в точки свипа.

        Один граф на пару (семейство, n), общий для всех противников и прогонов.
        """
        exp = self.experiment
        points: List[SweepPoint] = []
        for graph_index, family in enumerate(exp.graphs):
            if family.family == GraphFamilyTag.EDGE_LIST:
                variants = [family]
            elif family.n is not None:
                variants = [family]
            else:
                variants = [family.model_copy(update={"n": n}) for n in exp.sizes]

            for variant in variants:
                graph = generate(variant, seed=derive_seed(exp.seed, graph_index, variant.n or 0))
                params = resolve_params(exp.protocol, graph.n)
                for adversary in exp.adversaries:
                    points.append(SweepPoint(len(points), graph, params, adversary))
        return points

    def _tasks(self, points: Sequence[SweepPoint]) -> List[TrialTask]:
        exp = self.experiment
        roles = exp.protocol.forced if exp.protocol.forced.active else None
        return [
            TrialTask(
                point=point.index,
                trial=trial,
                seed=derive_seed(exp.seed, point.index, trial),
                graph=point.graph,
                params=point.params,
                adversary=point.adversary,
                roles=roles,
                max_events=exp.max_events,
                rank_tiebreak=exp.protocol.rank_tiebreak,
                distinct_ranks=exp.protocol.distinct_ranks,
                max_rank_retries=exp.protocol.max_rank_retries,
                keep_traces=exp.keep_traces,
            )
            for point in points
            for trial in range(exp.trials)
        ]

    def _execute(self, tasks: List[TrialTask]) -> List[TrialResult]:
        workers = self.experiment.workers
        if workers <= 1 or len(tasks) <= 1:
            return [run_trial(task) for task in tasks]
        self.logger.info(f"Параллельное выполнение: {workers} процессов")
        with ProcessPoolExecutor(
            max_workers=workers,
            initializer=_init_worker,
            initargs=(self.worker_log_level,),
        ) as executor:
            # map сохраняет порядок заданий
            return list(executor.map(run_trial, tasks, chunksize=max(1, len(tasks) // (4 * workers))))

    def sweep_verdicts(self, points: Sequence[SweepPoint], results: Sequence[TrialResult]) -> List[Verdict]:
        """Вердикты свипа: сводка проверок прогонов и проверки трендов."""
        by_name: Dict[str, List[Verdict]] = defaultdict(list)
        for result in results:
            for verdict in result.verdicts:
                by_name[verdict.name].append(verdict)
        verdicts = [aggregate_verdicts(name, group) for name, group in by_name.items()]

        reports = [r.report for r in results]
        by_family_adversary: Dict[Tuple[str, str], List[RunReport]] = defaultdict(list)
        by_adversary: Dict[str, List[RunReport]] = defaultdict(list)
        for report in reports:
            by_family_adversary[(report.family, report.adversary)].append(report)
            by_adversary[report.adversary].append(report)

        for (family, adversary), group in sorted(by_family_adversary.items()):
            verdict = check_message_bound(group)
            verdicts.append(verdict.model_copy(update={"name": f"message-bound[{family} {adversary}]"}))
        for adversary, group in sorted(by_adversary.items()):
            verdict = check_time_bound(group)
            verdicts.append(verdict.model_copy(update={"name": f"time-bound[{adversary}]"}))

        if not self.experiment.protocol.forced.active and self.experiment.trials >= MIN_CONCENTRATION_REPORTS:
            per_point: Dict[int, List[RunReport]] = defaultdict(list)
            for result in results:
                per_point[result.point].append(result.report)
            for point in points:
                verdict = check_role_concentration(per_point[point.index], point.params)
                verdicts.append(verdict.model_copy(update={"name": f"role-concentration[{point.label}]"}))
        return verdicts

    def run_experiment(self) -> ExperimentResult:
        """
        Выполняет все прогоны, проверки и сохраняет артефакты.

        Returns:
            ExperimentResult: exit_code 1, если провалена жесткая проверка

        Raises:
            ParameterError: Недопустимые параметры графа или протокола
            OutputError: Ошибка записи артефактов
        """
        start_time = time.time()
        exp = self.experiment

        points = self.build_points()
        for point in points:
            self.logger.info(
                f"Точка {point.index}: {point.label}, D={point.graph.diameter}, "
                f"quorum_low={point.params.quorum_low}, p={point.params.role_probability:.4f}"
            )
        tasks = self._tasks(points)
        self.logger.info(f"Прогонов: {len(tasks)} ({len(points)} точек по {exp.trials})")

        results = self._execute(tasks)
        reports = [r.report for r in results]
        rows = summarize(reports)
        verdicts = self.sweep_verdicts(points, results)
        hard_failed = [v for v in verdicts if v.hard and v.failed]

        for result in results:
            if result.report.flags.rank_collision:
                self.logger.warning(f"Точка {result.point}, прогон {result.trial}: совпадение рангов")
            elif result.report.flags.election_failure:
                self.logger.warning(
                    f"Точка {result.point}, прогон {result.trial}: выборы не состоялись "
                    f"({result.report.failure_reason})"
                )
        for verdict in hard_failed:
            self.logger.error(f"Жесткая проверка провалена: {verdict.name}: {verdict.message}")

        output_dir = None
        traces_kept = 0
        if self.write_artifacts:
            output_dir, traces_kept = self._save(results, rows, verdicts)

        elapsed = time.time() - start_time
        self.logger.info(f"Эксперимент завершен за {elapsed:.2f}с, жестких провалов: {len(hard_failed)}")
        return ExperimentResult(
            exit_code=1 if hard_failed else 0,
            reports=reports,
            rows=rows,
            verdicts=verdicts,
            output_dir=output_dir,
            retries=sum(r.retries for r in results),
            traces_kept=traces_kept,
        )

    def _save(self, results: Sequence[TrialResult], rows, verdicts: Sequence[Verdict]) -> Tuple[Path, int]:
        output_dir = self.directory_builder.build_structure(self.config.get_output_path())
        self.file_manager.save_config(self.experiment)

        traces_kept = 0
        for result in results:
            stem = f"p{result.point:03d}-t{result.trial:05d}"
            self.file_manager.save_report(result.report, stem)
            if result.trace is not None:
                self.file_manager.save_trace(result.trace, stem, compress=self.experiment.gzip_traces)
                traces_kept += 1

        summary_path = self.file_manager.save_summary(rows)
        self.file_manager.save_verdicts(verdicts)
        self.logger.info(f"Артефакты сохранены в {output_dir}: сводка {summary_path}, трасс {traces_kept}")
        return output_dir, traces_kept


def _header_inputs(header: Dict[str, Any]):
    try:
        graph = Graph.from_edges(
            int(header["n"]),
            [tuple(edge) for edge in header["edges"]],
            family=header.get("family", GraphFamilyTag.EDGE_LIST.value),
        )
        params = ProtocolParams.model_validate(header["params"])
        spec = AdversarySpec.model_validate(header["adversary"])
        roles = ForcedRoles.model_validate(header["roles"]) if header.get("roles") else None
        return graph, params, spec, roles, int(header["seed"])
    except (KeyError, TypeError, ValueError) as e:
        raise TraceParseError(f"Заголовок трассы неполон или некорректен: {e}") from e


def replay(trace_path: Union[str, Path]) -> List[Verdict]:
    """
    Повторяет прогон по входам из заголовка трассы и сверяет записи.

    Args:
        trace_path: Путь к трассе (.jsonl или .jsonl.gz)

    Returns:
        Вердикты всех проверок прогона

    Raises:
        TraceParseError: Трасса не читается
        ReplayMismatchError: Первая расходящаяся запись
    """
    recorded = Trace.from_jsonl(trace_path)
    header = recorded.header
    graph, params, spec, roles, seed = _header_inputs(header)

    regenerated, report = run(
        graph,
        params,
        make_adversary(spec, seed),
        seed,
        roles=roles,
        max_events=int(header.get("max_events", 10 ** 9)),
        rank_tiebreak=bool(header.get("rank_tiebreak", False)),
        trial=int(header.get("trial", 0)),
    )

    if json.loads(json.dumps(regenerated.header)) != header:
        raise ReplayMismatchError("Заголовок повтора отличается от записанного", index=-1)

    for index in range(max(len(recorded), len(regenerated))):
        expected = recorded[index].to_dict() if index < len(recorded) else None
        actual = regenerated[index].to_dict() if index < len(regenerated) else None
        if expected != actual:
            where = format_record(regenerated[index]) if actual is not None else "конец трассы"
            logger.error(f"Повтор разошелся на записи {index}: {where}")
            raise ReplayMismatchError(
                f"Повтор разошелся с трассой на записи {index}",
                index=index,
                expected=expected,
                actual=actual,
            )

    logger.info(f"Повтор совпал: {len(recorded)} записей")
    verdicts = run_checks(recorded, report, unit_delay=spec.name == UNIT_DELAY)
    logger.info("\n" + format_verdicts(verdicts))
    return verdicts
