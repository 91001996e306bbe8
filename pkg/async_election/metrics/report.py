"""Сборка RunReport по трассе прогона."""

from collections import Counter, defaultdict
from typing import Dict, List, Optional, Set

from async_election.models import RunFlags, RunReport
from async_election.protocol.messages import Approved, Declined, Dispute, Message
from async_election.protocol.state import NoticeKind
from async_election.simnet.trace import Trace
from async_election.utils.exceptions import TraceParseError

REFEREE_PAYLOADS = (Approved, Declined, Dispute)

NO_CANDIDATE = "no-candidate"
REFEREE_SHORTFALL = "referee-shortfall"
STALLED = "stalled"


def _header_field(trace: Trace, key: str):
    try:
        return trace.header[key]
    except KeyError as e:
        raise TraceParseError(f"В заголовке трассы нет поля {key!r}") from e


def node_leaders(trace: Trace) -> Dict[int, int]:
    """Узел -> ранг лидера, который узел записал (свой при избрании или услышанный)."""
    leaders: Dict[int, int] = {}
    for record, notice in trace.notices(NoticeKind.BECAME_LEADER, NoticeKind.LEARNED_LEADER):
        leaders[record.dst] = notice.rank
    return leaders


def referee_generated(trace: Trace) -> Dict[int, int]:
    """Узел -> сколько различных сообщений рефери (Approved/Declined/Dispute) он сгенерировал."""
    counts: Dict[int, int] = defaultdict(int)
    for record, notice in trace.notices(NoticeKind.GENERATED):
        if isinstance(notice.message, REFEREE_PAYLOADS):
            counts[record.dst] += 1
    return dict(counts)


def payload_transmissions(trace: Trace) -> Counter:
    """Сообщение -> число его передач по ребрам."""
    return Counter(record.message for record in trace.deliveries())


def has_rank_collision(trace: Trace) -> bool:
    """Два узла вытянули один ранг или рефери увидел запрос с рангом своего выбранного."""
    ranks = [notice.rank for _, notice in trace.notices(NoticeKind.ROLES)]
    if len(set(ranks)) != len(ranks):
        return True
    return any(True for _ in trace.notices(NoticeKind.RANK_COLLISION))


def generated_payloads(trace: Trace) -> Set[Message]:
    return {notice.message for _, notice in trace.notices(NoticeKind.GENERATED)}


def build_report(
    trace: Trace,
    total_transmissions: Optional[int] = None,
    non_quiescent: bool = False,
    trial: int = 0,
) -> RunReport:
    """
    Строит отчет только по трассе и ее заголовку.

    Args:
        trace: Трасса прогона
        total_transmissions: Счетчик передач движка (по умолчанию число доставок)
        non_quiescent: Прогон прерван по лимиту событий
        trial: Номер прогона в точке свипа

    Returns:
        Отчет прогона

    Raises:
        TraceParseError: В заголовке нет n, m, D или параметров
    """
    n = int(_header_field(trace, "n"))
    params = _header_field(trace, "params")
    deliveries = payload_transmissions(trace)

    n_candidates = 0
    n_referees = 0
    wake_times: List[float] = []
    for record, notice in trace.notices(NoticeKind.ROLES):
        candidate, referee = notice.detail
        n_candidates += int(candidate)
        n_referees += int(referee)
        wake_times.append(record.time)

    leaders_elected: List[int] = []
    election_time: Optional[float] = None
    for record, notice in trace.notices(NoticeKind.BECAME_LEADER):
        leaders_elected.append(notice.rank)
        if election_time is None:
            election_time = record.time

    leaders = node_leaders(trace)
    agreed_leader = None
    if len(leaders) == n and len(set(leaders.values())) == 1:
        agreed_leader = next(iter(leaders.values()))

    terminated = {record.dst for record, _ in trace.notices(NoticeKind.TERMINATED)}
    quorum_low = int(params["quorum_low"])
    failure_reason = None
    if not leaders_elected and not non_quiescent:
        if n_candidates == 0:
            failure_reason = NO_CANDIDATE
        elif n_referees < quorum_low:
            failure_reason = REFEREE_SHORTFALL
        else:
            failure_reason = STALLED

    per_referee = referee_generated(trace)
    adversary = trace.header.get("adversary_label") or trace.header.get("adversary", {}).get("name", "")
    return RunReport(
        n=n,
        m=int(_header_field(trace, "m")),
        D=int(_header_field(trace, "D")),
        family=str(trace.header.get("family", "")),
        adversary=str(adversary),
        seed=int(trace.header.get("seed", 0)),
        trial=trial,
        n_estimate=int(params["n_estimate"]),
        role_coefficient=float(params["role_coefficient"]),
        role_probability=float(params["role_probability"]),
        quorum_low=quorum_low,
        leaders_elected=leaders_elected,
        agreed_leader=agreed_leader,
        n_candidates=n_candidates,
        n_referees=n_referees,
        total_transmissions=sum(deliveries.values()) if total_transmissions is None else total_transmissions,
        unique_messages=len(generated_payloads(trace)),
        max_payload_transmissions=max(deliveries.values(), default=0),
        max_referee_generated=max(per_referee.values(), default=0),
        terminated_nodes=len(terminated),
        completion_time=trace.records[-1].time if trace.records else 0.0,
        election_time=election_time,
        all_awake_time=max(wake_times) if len(wake_times) == n else None,
        failure_reason=failure_reason,
        flags=RunFlags(
            rank_collision=has_rank_collision(trace),
            election_failure=not leaders_elected and not non_quiescent,
            non_quiescent=non_quiescent,
        ),
    )
