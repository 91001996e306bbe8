"""Командная строка: run, replay, flood, graph, summarize."""

import argparse
import sys
from typing import Any, Dict, List, Optional

from async_election.core.experiment import ExperimentRunner, replay
from async_election.graph.edge_list import EdgeListParser
from async_election.graph.generator import generate
from async_election.metrics.summary import format_verdicts, summarize, to_csv
from async_election.models import GraphFamily
from async_election.output.file_manager import FileManager
from async_election.simnet.flooding import flood_only
from async_election.utils.exceptions import (
    AdversaryError,
    ConfigError,
    GraphValidationError,
    OutputError,
    ParameterError,
    ReplayMismatchError,
    TraceParseError,
)
from async_election.utils.logger import get_logger, setup_logger

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_HARD_FAILURE = 1
EXIT_USAGE = 2
EXIT_REPLAY_MISMATCH = 3
EXIT_IO = 4

FAMILIES = ["ring", "torus-2d", "complete", "connected-uniform-random"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="async_election",
        description="Симулятор рандомизированных асинхронных выборов лидера",
    )
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING, ERROR")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="Прогоны и свипы")
    run_p.add_argument("--config", help="YAML конфигурация")
    run_p.add_argument("--graph", nargs="+", choices=FAMILIES, help="Семейства графов")
    run_p.add_argument("--n", nargs="+", type=int, help="Значения n")
    run_p.add_argument("--edge-list", help="Файл со списком ребер")
    run_p.add_argument("--p", type=float, help="Вероятность ребра для connected-uniform-random")
    run_p.add_argument("--preset", choices=["paper", "desk"], help="Пресет констант")
    run_p.add_argument("--c", type=float, help="Коэффициент c вероятности ролей")
    run_p.add_argument("--quorum-fraction", type=float, help="Доля q в quorum_low")
    run_p.add_argument("--quorum-low", type=int, help="Явный порог одобрений")
    run_p.add_argument("--rank-space-max", type=int, help="Верхняя граница рангов")
    run_p.add_argument("--n-estimate-policy", choices=["exact", "lower", "upper"], help="Оценка n у узлов")
    run_p.add_argument("--n-estimate-factor", type=float, help="c1 для lower, c2 для upper")
    run_p.add_argument("--forced-candidates", type=int, help="Ровно столько кандидатов")
    run_p.add_argument("--forced-referees", type=int, help="Ровно столько рефери")
    run_p.add_argument("--candidate-nodes", nargs="+", type=int, help="Явные узлы-кандидаты")
    run_p.add_argument("--referee-nodes", nargs="+", type=int, help="Явные узлы-рефери")
    run_p.add_argument("--adversary", nargs="+", help="Противники: unit-delay, uniform-delay, dispute-stress, arbitrary-order")
    run_p.add_argument("--wakeup", choices=["single", "all", "random-subset"], help="Расписание пробуждения")
    run_p.add_argument("--initiator", type=int, help="Инициатор для --wakeup single")
    run_p.add_argument("--trials", type=int, help="Прогонов на точку")
    run_p.add_argument("--seed", type=int, help="Мастер-зерно")
    run_p.add_argument("--out", help="Каталог артефактов")
    run_p.add_argument("--keep-traces", choices=["none", "failures-only", "all"], help="Какие трассы сохранять")
    run_p.add_argument("--gzip", action="store_true", default=None, help="Сжимать трассы")
    run_p.add_argument("--workers", type=int, help="Параллельных процессов")
    run_p.add_argument("--max-events", type=int, help="Лимит событий на прогон")
    run_p.add_argument("--distinct-ranks", action="store_true", default=None, help="Перезапуск при совпадении рангов")
    run_p.add_argument("--rank-tiebreak", action="store_true", default=None, help="Дописывать индекс узла к рангу")

    replay_p = sub.add_parser("replay", help="Повтор сохраненной трассы")
    replay_p.add_argument("trace", help="Путь к .jsonl или .jsonl.gz")

    flood_p = sub.add_parser("flood", help="Время затопления k сообщений")
    flood_p.add_argument("--graph", required=True, choices=FAMILIES)
    flood_p.add_argument("--n", required=True, type=int)
    flood_p.add_argument("--k", type=int, default=1)
    flood_p.add_argument("--source", type=int, default=0)
    flood_p.add_argument("--p", type=float, help="Вероятность ребра для connected-uniform-random")
    flood_p.add_argument("--seed", type=int, default=0)

    graph_p = sub.add_parser("graph", help="Сгенерировать граф в формате списка ребер")
    graph_p.add_argument("--graph", required=True, choices=FAMILIES)
    graph_p.add_argument("--n", required=True, type=int)
    graph_p.add_argument("--p", type=float, help="Вероятность ребра для connected-uniform-random")
    graph_p.add_argument("--seed", type=int, default=0)
    graph_p.add_argument("--out", help="Файл; без него список ребер печатается в stdout")

    summary_p = sub.add_parser("summarize", help="Пересчитать сводку по сохраненным отчетам")
    summary_p.add_argument("directory", help="Каталог эксперимента или reports/")

    return parser


def _set(target: Dict[str, Any], key: str, value: Any) -> None:
    if value is not None:
        target[key] = value


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    """
    Переводит флаги run в ключи конфигурации.

    Args:
        args: Разобранные аргументы

    Returns:
        Словарь, накладываемый поверх YAML

    Raises:
        ConfigError: Несовместимые флаги
    """
    overrides: Dict[str, Any] = {}

    if args.edge_list and args.graph:
        raise ConfigError("--edge-list и --graph взаимоисключающие", fields={"graph": "два источника топологии"})
    if args.p is not None and not args.graph:
        raise ConfigError("--p задается вместе с --graph connected-uniform-random", fields={"p": "нет семейства"})
    if args.edge_list:
        overrides["graphs"] = [{"family": "from-edge-list", "edge_list_path": args.edge_list}]
    elif args.graph:
        graphs: List[Dict[str, Any]] = []
        for family in args.graph:
            entry: Dict[str, Any] = {"family": family}
            if family == "connected-uniform-random" and args.p is not None:
                entry["edge_probability"] = args.p
            graphs.append(entry)
        overrides["graphs"] = graphs
    _set(overrides, "sizes", args.n)

    protocol: Dict[str, Any] = {}
    _set(protocol, "preset", args.preset)
    _set(protocol, "role_coefficient", args.c)
    _set(protocol, "quorum_fraction", args.quorum_fraction)
    _set(protocol, "quorum_low", args.quorum_low)
    _set(protocol, "rank_space_max", args.rank_space_max)
    _set(protocol, "distinct_ranks", args.distinct_ranks)
    _set(protocol, "rank_tiebreak", args.rank_tiebreak)
    policy: Dict[str, Any] = {}
    _set(policy, "kind", args.n_estimate_policy)
    _set(policy, "factor", args.n_estimate_factor)
    if policy:
        protocol["n_estimate_policy"] = policy
    forced: Dict[str, Any] = {}
    _set(forced, "candidates", args.forced_candidates)
    _set(forced, "referees", args.forced_referees)
    _set(forced, "candidate_nodes", args.candidate_nodes)
    _set(forced, "referee_nodes", args.referee_nodes)
    if forced:
        protocol["forced"] = forced
    if protocol:
        overrides["protocol"] = protocol

    if args.adversary or args.wakeup or args.initiator is not None:
        adversaries = []
        for name in args.adversary or ["uniform-delay"]:
            spec: Dict[str, Any] = {"name": name}
            _set(spec, "wakeup", args.wakeup)
            _set(spec, "initiator", args.initiator)
            adversaries.append(spec)
        overrides["adversaries"] = adversaries

    _set(overrides, "trials", args.trials)
    _set(overrides, "seed", args.seed)
    _set(overrides, "output_path", args.out)
    _set(overrides, "keep_traces", args.keep_traces)
    _set(overrides, "gzip_traces", args.gzip)
    _set(overrides, "workers", args.workers)
    _set(overrides, "max_events", args.max_events)
    if args.log_level:
        overrides["logging"] = {"level": args.log_level}
    return overrides


def _cmd_run(args: argparse.Namespace) -> int:
    runner = ExperimentRunner(config_path=args.config, overrides=overrides_from_args(args))
    result = runner.run_experiment()
    sys.stdout.write(format_verdicts(result.verdicts))
    if result.output_dir is not None:
        sys.stdout.write(f"Артефакты: {result.output_dir}\n")
    return result.exit_code


def _cmd_replay(args: argparse.Namespace) -> int:
    verdicts = replay(args.trace)
    sys.stdout.write(format_verdicts(verdicts))
    return EXIT_HARD_FAILURE if any(v.hard and v.failed for v in verdicts) else EXIT_OK


def _cmd_flood(args: argparse.Namespace) -> int:
    family = GraphFamily(family=args.graph, n=args.n, edge_probability=args.p)
    graph = generate(family, seed=args.seed)
    completion = flood_only(graph, args.source, args.k)
    bound = graph.diameter + args.k - 1
    sys.stdout.write(f"D={graph.diameter} k={args.k} time={completion:g} bound={bound}\n")
    return EXIT_OK if completion <= bound else EXIT_HARD_FAILURE


def _cmd_graph(args: argparse.Namespace) -> int:
    family = GraphFamily(family=args.graph, n=args.n, edge_probability=args.p)
    graph = generate(family, seed=args.seed)
    if args.out:
        path = EdgeListParser.write(graph, args.out)
        logger.info(f"Граф {family.family.value} n={graph.n} m={graph.m} записан в {path}")
    else:
        sys.stdout.write(EdgeListParser.format(graph))
    return EXIT_OK


def _cmd_summarize(args: argparse.Namespace) -> int:
    sys.stdout.write(to_csv(summarize(FileManager.load_reports(args.directory))))
    return EXIT_OK


COMMANDS = {
    "run": _cmd_run,
    "replay": _cmd_replay,
    "flood": _cmd_flood,
    "graph": _cmd_graph,
    "summarize": _cmd_summarize,
}


def main(argv: Optional[List[str]] = None) -> int:
    """
    Точка входа.

    Returns:
        0 при успехе, 1 при провале жесткой проверки, 2 при ошибке конфигурации,
        3 при расхождении повтора, 4 при ошибке ввода-вывода
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command != "run" or args.log_level:
        setup_logger(level=args.log_level or "INFO")

    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        logger.error(str(e))
        for name, problem in e.fields.items():
            logger.error(f"  {name}: {problem}")
        return EXIT_USAGE
    except (ParameterError, GraphValidationError, AdversaryError) as e:
        logger.error(str(e))
        return EXIT_USAGE
    except ReplayMismatchError as e:
        logger.error(f"{e} (запись {e.index})")
        return EXIT_REPLAY_MISMATCH
    except (OutputError, TraceParseError) as e:
        logger.error(str(e))
        return EXIT_IO
