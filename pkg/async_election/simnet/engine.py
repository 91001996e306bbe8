"""
Дискретно-событийный движок асинхронной сети.

Каждое направление ребра везет не более одного сообщения: следующая передача
стартует в момент доставки предыдущей. События упорядочены по (время, номер).
"""

import heapq
import itertools
from typing import Dict, Iterable, List, Optional, Set, Tuple

import numpy as np

from async_election.graph.generator import Graph
from async_election.models import MAX_RANK, ForcedRoles, ProtocolParams, RunReport
from async_election.protocol.messages import Message, describe
from async_election.protocol.state import Emission, NodeState
from async_election.protocol.transitions import (
    OrderPolicy,
    RoleOverride,
    Tiebreak,
    initialize,
    next_to_send,
    on_receive,
)
from async_election.simnet.adversary import Adversary, DelayPolicy, FifoOrder
from async_election.simnet.adversary import OrderPolicy as SendOrderPolicy
from async_election.simnet.trace import DELIVER_EVENT, WAKEUP_EVENT, Trace, TraceRecord
from async_election.utils.exceptions import AdversaryError, ParameterError, ProtocolInvariantError
from async_election.utils.logger import get_logger

logger = get_logger(__name__)

DEFAULT_MAX_EVENTS = 10 ** 9
TRACE_FORMAT = 1

_WAKE = 0
_DELIVER = 1


class EventLoop:
    """
    Очередь событий и каналы без логики узлов.

    Подклассы решают, что делает узел при пробуждении и при доставке,
    и возвращают Emission; движок сам запускает передачи по освободившимся
    направлениям и ведет трассу.
    """

    def __init__(
        self,
        graph: Graph,
        delay_policy: DelayPolicy,
        order_policy: Optional[SendOrderPolicy] = None,
        max_events: int = DEFAULT_MAX_EVENTS,
    ):
        self.graph = graph
        self.delay_policy = delay_policy
        self.order_policy = None if isinstance(order_policy, FifoOrder) else order_policy
        self.max_events = max_events

        self.states: List[NodeState] = [NodeState(degree=graph.degree(u)) for u in range(graph.n)]
        self.trace = Trace()
        self.now = 0.0
        self.transmissions = 0
        self.events = 0
        self.non_quiescent = False

        self._queue: List[tuple] = []
        self._seq = itertools.count()
        self._busy: Set[Tuple[int, int]] = set()

    def on_wakeup(self, node: int) -> Emission:
        raise NotImplementedError

    def on_deliver(self, dst: int, port: int, msg: Message) -> Emission:
        raise NotImplementedError

    def schedule_wakeup(self, node: int, time: float) -> None:
        heapq.heappush(self._queue, (time, next(self._seq), _WAKE, node))

    def _order_for(self, node: int, port: int) -> Optional[OrderPolicy]:
        if self.order_policy is None:
            return None
        policy = self.order_policy
        return lambda queue: policy.choose(queue, node, port)

    def kick(self, node: int, ports: Iterable[int]) -> None:
        """Запускает передачу по каждому свободному направлению с непустой очередью."""
        state = self.states[node]
        for port in sorted(ports):
            if (node, port) in self._busy:
                continue
            msg = next_to_send(state, port, self._order_for(node, port))
            if msg is None:
                continue
            dst = self.graph.neighbor(node, port)
            delay = self.delay_policy.delay(node, dst, msg, self.now, self.trace.records)
            if not 0.0 < delay <= 1.0:
                raise AdversaryError(f"Задержка {delay} вне (0, 1] на ребре {node}->{dst}")
            self._busy.add((node, port))
            self.transmissions += 1
            heapq.heappush(self._queue, (self.now + delay, next(self._seq), _DELIVER, node, port, msg, self.now))

    def _record(self, **fields) -> None:
        self.trace.append(TraceRecord(index=len(self.trace), time=self.now, **fields))

    def step(self) -> None:
        event = heapq.heappop(self._queue)
        self.events += 1
        self.now = event[0]

        if event[2] == _WAKE:
            node = event[3]
            emission = self.on_wakeup(node)
            self._record(kind=WAKEUP_EVENT, dst=node, notices=tuple(emission.notices))
            self.kick(node, emission.ports)
            return

        _, _, _, src, port, msg, sent_at = event
        self._busy.discard((src, port))
        dst = self.graph.neighbor(src, port)
        emission = self.on_deliver(dst, self.graph.port_to(dst, src), msg)
        self._record(
            kind=DELIVER_EVENT,
            src=src,
            dst=dst,
            message=msg,
            sent_at=sent_at,
            notices=tuple(emission.notices),
        )
        self.kick(dst, emission.ports)
        self.kick(src, (port,))

    def run_loop(self) -> None:
        """Обрабатывает события до затишья или до исчерпания лимита."""
        while self._queue:
            if self.events >= self.max_events:
                self.non_quiescent = True
                logger.warning(f"Лимит событий {self.max_events} исчерпан в момент {self.now:.3f}")
                return
            self.step()

        pending = [u for u, state in enumerate(self.states) if state.pending]
        if pending:
            raise ProtocolInvariantError(f"Затишье при непустых очередях узлов {pending[:10]}")


def assign_roles(roles: Optional[ForcedRoles], n: int, rng: np.random.Generator) -> List[Optional[RoleOverride]]:
    """
    Превращает принудительные роли в переопределения монет по узлам.

    Явные списки узлов важнее счетчиков; счетчики разыгрываются равномерно
    без повторов. Не заданная роль остается за монетой.

    Args:
        roles: Принудительные роли или None
        n: Число узлов
        rng: Случайность выбора узлов

    Returns:
        По узлу: (кандидат?, рефери?) с None для незафиксированной роли, либо None

    Raises:
        ParameterError: Узел вне графа или ролей больше, чем узлов
    """
    if roles is None or not roles.active:
        return [None] * n

    def pick(nodes: Optional[List[int]], count: Optional[int], what: str) -> Optional[Set[int]]:
        if nodes is not None:
            bad = [u for u in nodes if not 0 <= u < n]
            if bad:
                raise ParameterError(f"{what}: узлы {bad} вне графа из {n} узлов")
            return set(nodes)
        if count is None:
            return None
        if count > n:
            raise ParameterError(f"{what}: {count} больше числа узлов {n}")
        return {int(u) for u in rng.choice(n, size=count, replace=False)}

    candidates = pick(roles.candidate_nodes, roles.candidates, "кандидаты")
    referees = pick(roles.referee_nodes, roles.referees, "рефери")
    return [
        (None if candidates is None else u in candidates, None if referees is None else u in referees)
        for u in range(n)
    ]


class Simulation(EventLoop):
    """Один прогон протокола выборов против заданного противника."""

    def __init__(
        self,
        graph: Graph,
        params: ProtocolParams,
        adversary: Adversary,
        seed: int,
        roles: Optional[ForcedRoles] = None,
        max_events: int = DEFAULT_MAX_EVENTS,
        rank_tiebreak: bool = False,
    ):
        if graph.n < 2:
            raise ParameterError("Сеть из одного узла вырождена, требуется n >= 2")
        super().__init__(graph, adversary.delay, adversary.order, max_events)
        self.params = params
        self.adversary = adversary
        self.seed = seed
        self.roles = roles
        self.rank_tiebreak = rank_tiebreak

        streams = np.random.SeedSequence(seed).spawn(graph.n + 1)
        self.rngs = [np.random.default_rng(s) for s in streams[: graph.n]]
        self.overrides = assign_roles(roles, graph.n, np.random.default_rng(streams[graph.n]))
        base = 10 ** len(str(graph.n))
        if rank_tiebreak and params.rank_space_max * base + graph.n - 1 > MAX_RANK:
            raise ParameterError(
                f"rank_tiebreak: ранги до {params.rank_space_max} с индексом узла превышают {MAX_RANK}"
            )
        self.tiebreaks: List[Optional[Tiebreak]] = [
            (u, base) if rank_tiebreak else None for u in range(graph.n)
        ]

    def on_wakeup(self, node: int) -> Emission:
        state = self.states[node]
        if state.awake:
            return Emission()
        _, emission = initialize(state, self.params, self.rngs[node], self.overrides[node], self.tiebreaks[node])
        return emission

    def on_deliver(self, dst: int, port: int, msg: Message) -> Emission:
        _, emission = on_receive(
            self.states[dst], port, msg, self.params, self.rngs[dst], self.overrides[dst], self.tiebreaks[dst]
        )
        return emission

    def _header(self, origin: float, trial: int) -> Dict:
        spec = self.adversary.spec
        return {
            "format": TRACE_FORMAT,
            "n": self.graph.n,
            "m": self.graph.m,
            "D": self.graph.diameter,
            "family": self.graph.family,
            "edges": [list(e) for e in sorted(self.graph.edges)],
            "params": self.params.model_dump(mode="json"),
            "adversary": spec.model_dump(mode="json") if spec is not None else {"name": self.adversary.name},
            "adversary_label": self.adversary.label,
            "seed": self.seed,
            "roles": self.roles.model_dump(mode="json") if self.roles is not None else None,
            "rank_tiebreak": self.rank_tiebreak,
            "max_events": self.max_events,
            "origin": origin,
            "trial": trial,
        }

    def execute(self, trial: int = 0) -> Tuple[Trace, RunReport]:
        """
        Прогоняет протокол до затишья.

        Args:
            trial: Номер прогона для отчета

        Returns:
            (трасса, отчет)

        Raises:
            AdversaryError: Пустое расписание пробуждений или недопустимая задержка
        """
        # metrics.report сам импортирует simnet.trace
        from async_election.metrics.report import build_report

        schedule = self.adversary.wakeup.schedule(self.graph, self.adversary.wakeup_rng)
        if not schedule:
            raise AdversaryError("Расписание пробуждений пусто: хотя бы один узел должен проснуться")
        origin = min(schedule.values())
        for node in sorted(schedule):
            self.schedule_wakeup(node, schedule[node] - origin)
        self.trace.header = self._header(origin, trial)

        logger.debug(
            f"Прогон n={self.graph.n} m={self.graph.m} противник={self.adversary.label} "
            f"seed={self.seed}: пробуждений {len(schedule)}"
        )
        self.run_loop()

        report = build_report(
            self.trace,
            total_transmissions=self.transmissions,
            non_quiescent=self.non_quiescent,
            trial=trial,
        )
        logger.debug(
            f"Готово: событий {self.events}, передач {self.transmissions}, "
            f"лидеры {report.leaders_elected}, время {report.completion_time:.3f}"
        )
        return self.trace, report


def run(
    graph: Graph,
    params: ProtocolParams,
    adversary: Adversary,
    seed: int,
    roles: Optional[ForcedRoles] = None,
    max_events: int = DEFAULT_MAX_EVENTS,
    rank_tiebreak: bool = False,
    trial: int = 0,
) -> Tuple[Trace, RunReport]:
    """
    Прогон протокола на графе.

    Одинаковые (граф, параметры, противник, зерно) дают побитово одинаковые трассы,
    если противник собран заново тем же make_adversary.

    Args:
        graph: Связный граф, n >= 2
        params: Параметры протокола
        adversary: Противник (состояние адаптивных политик расходуется)
        seed: Зерно случайности узлов
        roles: Принудительные роли
        max_events: Лимит событий
        rank_tiebreak: Дописывать индекс узла к рангу
        trial: Номер прогона для отчета

    Returns:
        (трасса, отчет)
    """
    simulation = Simulation(graph, params, adversary, seed, roles, max_events, rank_tiebreak)
    return simulation.execute(trial)


def format_record(record: TraceRecord) -> str:
    """Строка вида "time kind src dst payload" для логов и отладки."""
    src = "-" if record.src is None else str(record.src)
    payload = describe(record.message) if record.message is not None else "-"
    return f"{record.time:.6f} {record.kind} {src} {record.dst} {payload}"
