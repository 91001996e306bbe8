"""Противник: расписание пробуждений, задержки передач и порядок отправки."""

import bisect
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from async_election.graph.generator import Graph
from async_election.models import AdversarySpec
from async_election.protocol.messages import Approved, Loses, Message, Request
from async_election.protocol.state import NoticeKind
from async_election.simnet.trace import TraceRecord
from async_election.utils.exceptions import AdversaryError

ADVERSARY_STREAM = 0xAD


class WakeupSchedule(ABC):
    """Кого и когда будит противник. Не разбуженные извне узлы дремлют до первого сообщения."""

    name: str = ""

    @abstractmethod
    def schedule(self, graph: Graph, rng: np.random.Generator) -> Dict[int, float]:
        """
        Возвращает моменты внешнего пробуждения.

        Args:
            graph: Топология
            rng: Случайность противника

        Returns:
            Узел -> момент; хотя бы один узел
        """
        pass


class DelayPolicy(ABC):
    """Задержка каждой передачи, в (0, 1]."""

    @abstractmethod
    def delay(
        self,
        src: int,
        dst: int,
        message: Message,
        send_time: float,
        history: Sequence[TraceRecord],
    ) -> float:
        """
        Выбирает задержку передачи.

        Args:
            src: Отправитель
            dst: Получатель
            message: Передаваемое сообщение
            send_time: Момент начала передачи
            history: Трасса до текущего момента, включая исходы монет

        Returns:
            Задержка в (0, 1]
        """
        pass


class OrderPolicy(ABC):
    """Какое сообщение очереди порта отправить следующим."""

    @abstractmethod
    def choose(self, queue: Sequence[Message], src: int, port: int) -> int:
        """Возвращает индекс сообщения в непустой очереди."""
        pass


class SingleInitiator(WakeupSchedule):
    name = "single"

    def __init__(self, node: int = 0):
        self.node = node

    def schedule(self, graph: Graph, rng: np.random.Generator) -> Dict[int, float]:
        if not 0 <= self.node < graph.n:
            raise AdversaryError(f"Инициатор {self.node} вне графа из {graph.n} узлов")
        return {self.node: 0.0}


class AllAtOnce(WakeupSchedule):
    name = "all"

    def schedule(self, graph: Graph, rng: np.random.Generator) -> Dict[int, float]:
        return {u: 0.0 for u in range(graph.n)}


class RandomSubset(WakeupSchedule):
    """Каждый узел будится с вероятностью fraction в случайный момент из [0, spread)."""

    name = "random-subset"

    def __init__(self, fraction: float = 0.5, spread: float = 2.0):
        self.fraction = fraction
        self.spread = spread

    def schedule(self, graph: Graph, rng: np.random.Generator) -> Dict[int, float]:
        first = int(rng.integers(graph.n))
        times = {first: 0.0}
        for u in range(graph.n):
            if u != first and rng.random() < self.fraction:
                times[u] = float(rng.random() * self.spread)
        return times


class UnitDelay(DelayPolicy):
    def delay(self, src, dst, message, send_time, history) -> float:
        return 1.0


class UniformDelay(DelayPolicy):
    """Равномерные задержки в (0, 1]."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng

    def delay(self, src, dst, message, send_time, history) -> float:
        return 1.0 - float(self.rng.random())


class DisputeStress(DelayPolicy):
    """
    Адаптивный противник, загоняющий рефери в споры.

    Запрос сильнейшего из известных кандидатов доходит до каждого второго
    известного рефери последним, а до остальных первым: одни рефери успевают
    выбрать более слабых и затем спорят, другие отказывают слабым. Одобрения
    и ответы на споры (Loses) идут с максимальной задержкой. Прочее идет быстро.
    """

    FAST = 0.01
    STRONG_FAST = 0.005
    SLOW = 1.0

    def __init__(self) -> None:
        self._cursor = 0
        self._best_candidate: Optional[int] = None
        self._referees: List[int] = []

    def _observe(self, history: Sequence[TraceRecord]) -> None:
        for record in history[self._cursor:]:
            for notice in record.notices:
                if notice.kind != NoticeKind.ROLES:
                    continue
                candidate, referee = notice.detail
                if candidate and (self._best_candidate is None or notice.rank > self._best_candidate):
                    self._best_candidate = notice.rank
                if referee:
                    bisect.insort(self._referees, record.dst)
        self._cursor = len(history)

    def _held_back(self, node: int) -> bool:
        position = bisect.bisect_left(self._referees, node)
        is_referee = position < len(self._referees) and self._referees[position] == node
        return is_referee and position % 2 == 1

    def delay(self, src, dst, message, send_time, history) -> float:
        self._observe(history)
        if isinstance(message, Request) and message.rank == self._best_candidate:
            return self.SLOW if self._held_back(dst) else self.STRONG_FAST
        if isinstance(message, (Approved, Loses)):
            return self.SLOW
        return self.FAST


class FifoOrder(OrderPolicy):
    def choose(self, queue, src, port) -> int:
        return 0


class ArbitraryOrder(OrderPolicy):
    """Противник берет из очереди порта произвольное сообщение."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng

    def choose(self, queue, src, port) -> int:
        return int(self.rng.integers(len(queue)))


@dataclass
class Adversary:
    """Собранный противник одного прогона."""

    name: str
    wakeup: WakeupSchedule
    delay: DelayPolicy
    order: OrderPolicy
    spec: Optional[AdversarySpec] = None
    wakeup_rng: np.random.Generator = field(default_factory=lambda: np.random.default_rng(0))

    @property
    def label(self) -> str:
        return f"{self.name}/{self.wakeup.name}"


PolicyFactory = Callable[[np.random.Generator, np.random.Generator], Tuple[DelayPolicy, OrderPolicy]]


def builtin_adversaries() -> Dict[str, PolicyFactory]:
    """
    Каталог встроенных политик задержек и порядка.

    Returns:
        Имя -> фабрика (rng задержек, rng порядка) -> (DelayPolicy, OrderPolicy)
    """
    return {
        "unit-delay": lambda d_rng, o_rng: (UnitDelay(), FifoOrder()),
        "uniform-delay": lambda d_rng, o_rng: (UniformDelay(d_rng), FifoOrder()),
        "dispute-stress": lambda d_rng, o_rng: (DisputeStress(), FifoOrder()),
        "arbitrary-order": lambda d_rng, o_rng: (UniformDelay(d_rng), ArbitraryOrder(o_rng)),
    }


def wakeup_schedules() -> Dict[str, Callable[[AdversarySpec], WakeupSchedule]]:
    """Каталог расписаний пробуждения."""
    return {
        "single": lambda spec: SingleInitiator(spec.initiator),
        "all": lambda spec: AllAtOnce(),
        "random-subset": lambda spec: RandomSubset(),
    }


def make_adversary(spec: AdversarySpec, seed: int) -> Adversary:
    """
    Собирает противника по спецификации; одинаковые (spec, seed) дают одинаковое поведение.

    Args:
        spec: Имя политики и расписания
        seed: Зерно, если в spec оно не задано

    Returns:
        Противник

    Raises:
        AdversaryError: Неизвестное имя
    """
    catalog = builtin_adversaries()
    schedules = wakeup_schedules()
    if spec.name not in catalog:
        raise AdversaryError(f"Неизвестный противник: {spec.name}. Доступны: {', '.join(sorted(catalog))}")
    if spec.wakeup not in schedules:
        raise AdversaryError(f"Неизвестное расписание пробуждения: {spec.wakeup}")

    base = spec.seed if spec.seed is not None else seed
    # отдельный поток, чтобы не совпасть с потоками узлов из SeedSequence(seed)
    streams = np.random.SeedSequence([base, ADVERSARY_STREAM]).spawn(3)
    delay_rng, order_rng, wakeup_rng = (np.random.default_rng(s) for s in streams)
    delay, order = catalog[spec.name](delay_rng, order_rng)
    return Adversary(
        name=spec.name,
        wakeup=schedules[spec.wakeup](spec),
        delay=delay,
        order=order,
        spec=spec,
        wakeup_rng=wakeup_rng,
    )
