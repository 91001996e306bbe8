"""Затопление k инертных сообщений без протокола выборов."""

from dataclasses import dataclass
from typing import List, Optional

from async_election.graph.generator import Graph
from async_election.protocol.messages import Message
from async_election.protocol.state import Emission
from async_election.protocol.transitions import relay
from async_election.simnet.adversary import DelayPolicy, UnitDelay
from async_election.simnet.engine import DEFAULT_MAX_EVENTS, EventLoop
from async_election.utils.exceptions import ParameterError
from async_election.utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class Token:
    """Инертная полезная нагрузка: узлы только ретранслируют ее."""

    index: int


class FloodSimulation(EventLoop):
    """Источник в момент 0 ставит k токенов во все порты; остальные узлы их ретранслируют."""

    def __init__(
        self,
        graph: Graph,
        source: int,
        k: int,
        delay_policy: DelayPolicy,
        max_events: int = DEFAULT_MAX_EVENTS,
    ):
        super().__init__(graph, delay_policy, None, max_events)
        self.source = source
        self.k = k
        self.held: List[int] = [0] * graph.n
        self.completed_at: List[Optional[float]] = [None] * graph.n

    def _count(self, node: int, fresh: bool) -> None:
        if not fresh:
            return
        self.held[node] += 1
        if self.held[node] == self.k:
            self.completed_at[node] = self.now

    def on_wakeup(self, node: int) -> Emission:
        state = self.states[node]
        emission = Emission()
        for index in range(self.k):
            token = Token(index)
            state.m_list.add(token)
            for port in range(state.degree):
                state.send_list[port].append(token)
                emission.sends.append((port, token))
            self._count(node, True)
        return emission

    def on_deliver(self, dst: int, port: int, msg: Message) -> Emission:
        fresh, emission = relay(self.states[dst], port, msg)
        self._count(dst, fresh)
        return emission


def flood_only(
    graph: Graph,
    source: int,
    k: int,
    delay_policy: Optional[DelayPolicy] = None,
) -> float:
    """
    Время, за которое k сообщений источника доходят до всех узлов.

    Args:
        graph: Связный граф
        source: Узел-источник
        k: Число различных сообщений, k >= 1
        delay_policy: Политика задержек (по умолчанию единичные)

    Returns:
        Момент, когда последний узел получил все k сообщений

    Raises:
        ParameterError: Неверный источник или k
    """
    if not 0 <= source < graph.n:
        raise ParameterError(f"Источник {source} вне графа из {graph.n} узлов")
    if k < 1:
        raise ParameterError(f"k={k}: требуется хотя бы одно сообщение")

    simulation = FloodSimulation(graph, source, k, delay_policy or UnitDelay())
    simulation.schedule_wakeup(source, 0.0)
    simulation.run_loop()

    missing = [u for u, t in enumerate(simulation.completed_at) if t is None]
    if missing:
        raise ParameterError(f"Узлы {missing[:10]} не получили всех сообщений: граф несвязен?")
    completion = max(t for t in simulation.completed_at if t is not None)
    logger.debug(f"Затопление k={k} из {source} на n={graph.n}: {completion:.3f} (передач {simulation.transmissions})")
    return completion
