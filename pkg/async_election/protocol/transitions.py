"""
Переходы автомата узла.

Каждая операция принимает состояние и входное событие и возвращает пару
(состояние, Emission). Состояние принадлежит ровно одной симуляции и
обновляется на месте; при одинаковых входах и случайности результат
детерминирован.
"""

from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from async_election.models import ProtocolParams
from async_election.protocol.messages import (
    WAKEUP,
    Approved,
    Declined,
    Dispute,
    Leader,
    Loses,
    Message,
    Request,
    Wakeup,
)
from async_election.protocol.state import (
    NO_RANK,
    CandState,
    Emission,
    NodeState,
    Notice,
    NoticeKind,
    RefState,
)
from async_election.utils.exceptions import ProtocolInvariantError

# (кандидат?, рефери?) вместо подбрасывания монет; None оставляет монету
RoleOverride = Tuple[Optional[bool], Optional[bool]]
# (индекс узла, основание) для отладочного разрешения совпадений рангов
Tiebreak = Tuple[int, int]
OrderPolicy = Callable[[Sequence[Message]], int]

Transition = Tuple[NodeState, Emission]


def _broadcast(state: NodeState, msg: Message, emission: Emission) -> bool:
    """Ставит сгенерированное узлом сообщение во все порты и сразу отмечает в M-List."""
    if msg in state.m_list:
        # уже рассылается: услышано раньше или сгенерировано другим рефери
        return False
    state.m_list.add(msg)
    for port in range(state.degree):
        state.send_list[port].append(msg)
        emission.sends.append((port, msg))
    emission.notices.append(Notice(NoticeKind.GENERATED, message=msg))
    return True


def relay(state: NodeState, port: int, msg: Message) -> Tuple[bool, Emission]:
    """
    Правило затопления: новое сообщение запоминается и уходит во все порты,
    кроме входного; повтор вычеркивается из очереди входного порта.

    Args:
        state: Состояние узла
        port: Порт, по которому пришло сообщение
        msg: Сообщение

    Returns:
        (сообщение новое?, Emission)
    """
    emission = Emission()
    if msg in state.m_list:
        queue = state.send_list[port]
        try:
            queue.remove(msg)
        except ValueError:
            pass
        return False, emission

    state.m_list.add(msg)
    for other in range(state.degree):
        if other != port:
            state.send_list[other].append(msg)
            emission.sends.append((other, msg))
    return True, emission


def initialize(
    state: NodeState,
    params: ProtocolParams,
    rng: np.random.Generator,
    roles: Optional[RoleOverride] = None,
    tiebreak: Optional[Tiebreak] = None,
) -> Transition:
    """
    Пробуждение узла: рассылка Wakeup, выбор ранга и двух ролей.

    Args:
        state: Спящий узел
        params: Параметры протокола
        rng: Источник случайности узла
        roles: Принудительные роли (кандидат, рефери) вместо монет
        tiebreak: (индекс, основание) для отладочного дописывания индекса к рангу

    Returns:
        (состояние, Emission)

    Raises:
        ProtocolInvariantError: Узел уже проснулся
    """
    if state.awake:
        raise ProtocolInvariantError("initialize вызван повторно для проснувшегося узла")

    emission = Emission()
    state.awake = True
    _broadcast(state, WAKEUP, emission)

    rank = int(rng.integers(1, params.rank_space_max, endpoint=True))
    if tiebreak is not None:
        index, base = tiebreak
        rank = rank * base + index
    state.rank = rank

    candidate_coin = bool(rng.random() < params.role_probability)
    referee_coin = bool(rng.random() < params.role_probability)
    if roles is not None:
        forced_candidate, forced_referee = roles
        if forced_candidate is not None:
            candidate_coin = forced_candidate
        if forced_referee is not None:
            referee_coin = forced_referee

    if candidate_coin:
        state.cand_state = CandState.CANDIDATE
        state.num_replies = 0
        _broadcast(state, Request(rank), emission)
    else:
        state.cand_state = CandState.NON_ELECTED

    if referee_coin:
        state.ref_state = RefState.READY
    else:
        state.ref_state = RefState.NON_SELECTED
    state.chosen = NO_RANK
    state.contender = NO_RANK

    emission.notices.append(Notice(NoticeKind.ROLES, rank=rank, detail=(int(candidate_coin), int(referee_coin))))
    return state, emission


def next_to_send(
    state: NodeState,
    port: int,
    order_policy: Optional[OrderPolicy] = None,
) -> Optional[Message]:
    """
    Забирает следующее сообщение из очереди порта.

    Args:
        state: Состояние узла
        port: Освободившийся порт
        order_policy: Выбор индекса в очереди (по умолчанию голова FIFO)

    Returns:
        Сообщение или None, если очередь пуста
    """
    queue = state.send_list[port]
    if not queue:
        return None
    index = 0 if order_policy is None else order_policy(queue)
    if not 0 <= index < len(queue):
        raise ProtocolInvariantError(f"Политика порядка вернула индекс {index} вне очереди длины {len(queue)}")
    msg = queue[index]
    del queue[index]
    return msg


def on_receive(
    state: NodeState,
    port: int,
    msg: Message,
    params: ProtocolParams,
    rng: np.random.Generator,
    roles: Optional[RoleOverride] = None,
    tiebreak: Optional[Tiebreak] = None,
) -> Transition:
    """
    Обработка входящего сообщения: дедупликация, ретрансляция и диспетчеризация.

    Завершившийся узел досылает уже поставленные в очередь сообщения,
    но новые входящие отбрасывает; повторы по-прежнему вычеркиваются.
    Первое сообщение будит спящий узел.

    Args:
        state: Состояние узла
        port: Входной порт
        msg: Сообщение
        params: Параметры протокола
        rng: Случайность узла (нужна только при неявном пробуждении)
        roles: Принудительные роли на случай пробуждения
        tiebreak: Отладочное разрешение совпадений рангов

    Returns:
        (состояние, Emission)
    """
    emission = Emission()
    if msg in state.m_list:
        relay(state, port, msg)
        return state, emission
    if state.terminated:
        return state, emission

    if not state.awake and not isinstance(msg, Wakeup):
        _, woke = initialize(state, params, rng, roles, tiebreak)
        emission.extend(woke)
        if msg in state.m_list:
            # узел только что сгенерировал такое же сообщение (совпадение рангов)
            relay(state, port, msg)
            return state, emission

    _, relayed = relay(state, port, msg)
    emission.extend(relayed)

    if isinstance(msg, Wakeup):
        if not state.awake:
            _, woke = initialize(state, params, rng, roles, tiebreak)
            emission.extend(woke)
    elif isinstance(msg, Leader):
        if not (state.cand_state == CandState.ELECTED and msg.rank == state.rank):
            state.leader_rank = msg.rank
            state.cand_state = CandState.NON_ELECTED
            state.terminated = True
            emission.notices.append(Notice(NoticeKind.LEARNED_LEADER, rank=msg.rank))
            emission.notices.append(Notice(NoticeKind.TERMINATED, rank=msg.rank))
    elif isinstance(msg, (Approved, Declined)) and msg.candidate_rank == state.rank:
        _, reply = candidate_on_reply(state, msg, params)
        emission.extend(reply)
    elif isinstance(msg, Dispute) and msg.chosen_rank == state.rank:
        _, reply = candidate_dispute_response(state, msg)
        emission.extend(reply)
    elif state.is_referee:
        _, reply = referee_dispatch(state, msg, params)
        emission.extend(reply)
    return state, emission


def candidate_on_reply(state: NodeState, msg: Message, params: ProtocolParams) -> Transition:
    """
    Ответ рефери на кандидатуру: отказ снимает кандидата, одобрения копятся до quorum_low.

    Args:
        state: Состояние узла-кандидата
        msg: Approved или Declined с рангом узла
        params: Параметры протокола

    Returns:
        (состояние, Emission)
    """
    emission = Emission()
    if not state.is_candidate:
        return state, emission

    if isinstance(msg, Declined):
        state.cand_state = CandState.NON_ELECTED
        _broadcast(state, Loses(state.rank), emission)
        emission.notices.append(Notice(NoticeKind.LOST, rank=state.rank))
    elif isinstance(msg, Approved):
        state.num_replies += 1
        state.quorum.append(msg.referee_rank)
        if state.num_replies == params.quorum_low:
            state.cand_state = CandState.ELECTED
            state.leader_rank = state.rank
            _broadcast(state, Leader(state.rank), emission)
            state.terminated = True
            emission.notices.append(Notice(NoticeKind.BECAME_LEADER, rank=state.rank, detail=tuple(state.quorum)))
            emission.notices.append(Notice(NoticeKind.TERMINATED, rank=state.rank))
    return state, emission


def referee_dispatch(state: NodeState, msg: Message, params: ProtocolParams) -> Transition:
    """Рефери реагирует только на Request и на Loses своего выбранного во время спора."""
    if isinstance(msg, Request):
        return referee_request_response(state, msg.rank, params)
    if isinstance(msg, Loses) and state.ref_state == RefState.IN_DISPUTE and state.chosen == msg.rank:
        return referee_dispute_reply_response(state)
    return state, Emission()


def referee_request_response(state: NodeState, candidate_rank: int, params: ProtocolParams) -> Transition:
    """
    Запрос кандидата u к рефери.

    Ready: u становится выбранным и одобряется.
    Chosen-Selected с выбранным v: слабому u отказ; если v уже проиграл,
    одобрить u; если спор v с u уже объявлен кем-то, ждать его исхода;
    иначе объявить спор самому.
    In-Dispute с претендентом w: слабому u отказ; иначе отказ w и новый спор за u.

    Args:
        state: Состояние рефери
        candidate_rank: Ранг u
        params: Параметры протокола

    Returns:
        (состояние, Emission)
    """
    emission = Emission()
    u = candidate_rank
    if u != NO_RANK and u in (state.chosen, state.contender):
        emission.notices.append(Notice(NoticeKind.RANK_COLLISION, rank=u))

    if state.ref_state == RefState.READY:
        state.chosen = u
        _broadcast(state, Approved(u, state.rank), emission)
        state.ref_state = RefState.CHOSEN_SELECTED
        emission.notices.append(Notice(NoticeKind.CHOSEN, rank=u))

    elif state.ref_state == RefState.CHOSEN_SELECTED:
        v = state.chosen
        if u < v:
            _broadcast(state, Declined(u, state.rank), emission)
        elif Loses(v) in state.m_list:
            state.chosen = u
            _broadcast(state, Approved(u, state.rank), emission)
            emission.notices.append(Notice(NoticeKind.CHOSEN, rank=u))
        elif Dispute(v, u) in state.m_list:
            state.contender = u
            state.ref_state = RefState.IN_DISPUTE
        else:
            state.contender = u
            _broadcast(state, Dispute(v, u), emission)
            state.ref_state = RefState.IN_DISPUTE

    elif state.ref_state == RefState.IN_DISPUTE:
        w = state.contender
        if u < w:
            _broadcast(state, Declined(u, state.rank), emission)
        else:
            _broadcast(state, Declined(w, state.rank), emission)
            state.contender = u
            _broadcast(state, Dispute(state.chosen, u), emission)

    return state, emission


def candidate_dispute_response(state: NodeState, dispute: Dispute) -> Transition:
    """
    Кандидат, попавший в спор с более сильным, снимается; избранный не отвечает.

    Args:
        state: Состояние узла с рангом dispute.chosen_rank
        dispute: Сообщение спора

    Returns:
        (состояние, Emission)
    """
    emission = Emission()
    if state.is_candidate:
        state.cand_state = CandState.NON_ELECTED
        _broadcast(state, Loses(state.rank), emission)
        emission.notices.append(Notice(NoticeKind.LOST, rank=state.rank))
    return state, emission


def referee_dispute_reply_response(state: NodeState) -> Transition:
    """Выбранный проиграл спор: претендент становится выбранным и одобряется."""
    emission = Emission()
    state.chosen = state.contender
    state.contender = NO_RANK
    state.ref_state = RefState.CHOSEN_SELECTED
    _broadcast(state, Approved(state.chosen, state.rank), emission)
    emission.notices.append(Notice(NoticeKind.CHOSEN, rank=state.chosen))
    return state, emission
