"""Состояние узла и результат перехода."""

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Deque, List, Optional, Set, Tuple

from async_election.protocol.messages import Message

NO_RANK = -1


class CandState(str, Enum):
    """Состояние кандидатуры."""

    CANDIDATE = "candidate"
    NON_ELECTED = "non-elected"
    ELECTED = "elected"


class RefState(str, Enum):
    """Состояние рефери."""

    NON_SELECTED = "non-selected"
    READY = "ready"
    CHOSEN_SELECTED = "chosen-selected"
    IN_DISPUTE = "in-dispute"


class NoticeKind(str, Enum):
    """Уведомления о смене состояния для симулятора и метрик."""

    ROLES = "roles"  # rank, detail=(кандидат, рефери)
    GENERATED = "generated"  # message
    CHOSEN = "chosen"  # rank нового выбранного
    LOST = "lost"  # кандидат выбыл
    BECAME_LEADER = "became-leader"  # rank, detail=ранги рефери кворума
    LEARNED_LEADER = "learned-leader"  # rank лидера
    TERMINATED = "terminated"
    RANK_COLLISION = "rank-collision"  # rank запроса совпал с chosen/contender


@dataclass(frozen=True)
class Notice:
    kind: NoticeKind
    rank: Optional[int] = None
    message: Optional[Message] = None
    detail: Tuple[int, ...] = ()


@dataclass
class Emission:
    """Что переход поставил в очереди портов и какие уведомления выпустил."""

    sends: List[Tuple[int, Message]] = field(default_factory=list)
    notices: List[Notice] = field(default_factory=list)

    def extend(self, other: "Emission") -> "Emission":
        self.sends.extend(other.sends)
        self.notices.extend(other.notices)
        return self

    @property
    def ports(self) -> Set[int]:
        return {port for port, _ in self.sends}


@dataclass
class NodeState:
    """
    Состояние одного узла.

    Узел знает только число своих портов. ``quorum`` хранит ранги рефери,
    чьи одобрения засчитаны; протокол его не читает, он нужен метрикам.
    """

    degree: int
    awake: bool = False
    terminated: bool = False
    rank: int = NO_RANK
    cand_state: CandState = CandState.NON_ELECTED
    ref_state: RefState = RefState.NON_SELECTED
    chosen: int = NO_RANK
    contender: int = NO_RANK
    num_replies: int = 0
    m_list: Set[Message] = field(default_factory=set)
    send_list: List[Deque[Message]] = field(default_factory=list)
    leader_rank: Optional[int] = None
    quorum: List[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.send_list:
            self.send_list = [deque() for _ in range(self.degree)]

    @property
    def is_candidate(self) -> bool:
        return self.cand_state == CandState.CANDIDATE

    @property
    def is_referee(self) -> bool:
        return self.ref_state != RefState.NON_SELECTED

    @property
    def pending(self) -> int:
        """Сообщений в очередях всех портов."""
        return sum(len(q) for q in self.send_list)
