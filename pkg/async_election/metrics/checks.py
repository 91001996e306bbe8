"""
Проверки трасс и отчетов.

Функции чистые: принимают трассу или отчеты и возвращают Verdict.
Жесткие проверки (hard=True) определяют код выхода эксперимента.
"""

import math
from collections import defaultdict
from itertools import combinations
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from async_election.metrics.report import NO_CANDIDATE, REFEREE_SHORTFALL, has_rank_collision
from async_election.models import ProtocolParams, RunReport, Verdict, VerdictStatus
from async_election.protocol.messages import Approved, Loses, Message
from async_election.protocol.state import NoticeKind
from async_election.simnet.trace import Trace
from async_election.utils.logger import get_logger

logger = get_logger(__name__)

EPS = 1e-9
TREND_TOLERANCE = 0.2
ENVELOPE_PHASES = 5
MIN_CONCENTRATION_REPORTS = 100
MIN_SWEEP_POINTS = 3
CONCENTRATION_WINDOW = 0.1


def _verdict(name: str, status: VerdictStatus, hard: bool = False, message: str = "", **details) -> Verdict:
    return Verdict(name=name, status=status, hard=hard, message=message, details=details)


def log2_squared(n: int) -> float:
    return math.log2(n) ** 2


def verify_safety(trace: Trace) -> Verdict:
    """
    Не более одного избранного; в прогонах без совпадения рангов при
    2*quorum_low > N_R любые два набора одобрений размера кворума пересекаются.

    Args:
        trace: Завершенная трасса

    Returns:
        Verdict "safety"
    """
    params = trace.header.get("params", {})
    quorum_low = int(params.get("quorum_low", 1))
    collision = has_rank_collision(trace)

    elected = [(record.dst, notice.rank, tuple(notice.detail)) for record, notice in trace.notices(NoticeKind.BECAME_LEADER)]
    if len(elected) > 1:
        ranks = [rank for _, rank, _ in elected]
        if collision:
            return _verdict(
                "safety",
                VerdictStatus.CLASSIFIED,
                message=f"Несколько лидеров при совпадении рангов: {ranks}",
                leaders=ranks,
                rank_collision=True,
            )
        return _verdict("safety", VerdictStatus.FAIL, hard=True, message=f"Избрано несколько лидеров: {ranks}", leaders=ranks)

    n_referees = sum(int(notice.detail[1]) for _, notice in trace.notices(NoticeKind.ROLES))
    details: Dict = {"leaders": [rank for _, rank, _ in elected], "n_referees": n_referees, "quorum_low": quorum_low}
    if collision or 2 * quorum_low <= n_referees:
        details["intersection"] = "not-applicable"
        return _verdict("safety", VerdictStatus.PASS, hard=True, message="Не более одного лидера", **details)

    # кто кого одобрял, по рангам рефери
    approvals: Dict[int, Set[int]] = defaultdict(set)
    for _, notice in trace.notices(NoticeKind.GENERATED):
        if isinstance(notice.message, Approved):
            approvals[notice.message.candidate_rank].add(notice.message.referee_rank)
    quorums: List[Set[int]] = [set(quorum) for _, _, quorum in elected]
    quorums += [refs for rank, refs in sorted(approvals.items()) if len(refs) >= quorum_low]

    guaranteed = 2 * quorum_low - n_referees
    pairs = 0
    smallest: Optional[int] = None
    for a, b in combinations(quorums, 2):
        overlap = len(a & b)
        pairs += 1
        smallest = overlap if smallest is None else min(smallest, overlap)
    details.update({"quorum_sets": len(quorums), "pairs": pairs, "min_intersection": smallest, "guaranteed": guaranteed})
    if smallest is not None and smallest < 1:
        return _verdict("safety", VerdictStatus.FAIL, hard=True, message="Два кворума одобрений не пересекаются", **details)
    return _verdict("safety", VerdictStatus.PASS, hard=True, message="Не более одного лидера, кворумы пересекаются", **details)


def verify_liveness(report: RunReport) -> Verdict:
    """
    Ровно один лидер, и каждый узел завершился, зная его.

    Провал выборов из-за отсутствия кандидатов или нехватки рефери
    классифицируется, а не считается ошибкой.
    """
    if report.flags.non_quiescent:
        return _verdict("liveness", VerdictStatus.INCONCLUSIVE, message="Прогон не дошел до затишья")
    if report.exactly_one_leader and report.agreed_leader == report.leaders_elected[0] and report.terminated_nodes == report.n:
        return _verdict("liveness", VerdictStatus.PASS, message=f"Лидер {report.agreed_leader} известен всем")
    if report.failure_reason in (NO_CANDIDATE, REFEREE_SHORTFALL):
        return _verdict(
            "liveness",
            VerdictStatus.CLASSIFIED,
            message=f"election-failure({report.failure_reason})",
            reason=report.failure_reason,
        )
    if report.flags.rank_collision:
        return _verdict("liveness", VerdictStatus.CLASSIFIED, message="rank-collision", reason="rank-collision")
    return _verdict(
        "liveness",
        VerdictStatus.FAIL,
        message=f"Лидеры {report.leaders_elected}, согласие {report.agreed_leader}, "
        f"завершились {report.terminated_nodes}/{report.n}",
        reason=report.failure_reason,
    )


def chernoff_bound(mu: float, delta: float = CONCENTRATION_WINDOW) -> float:
    """Нижняя оценка P(|X - mu| < delta*mu) для суммы независимых бернуллиевских величин."""
    return max(0.0, 1.0 - 2.0 * math.exp(-(delta ** 2) * mu / 3.0))


def role_window_failure(params: ProtocolParams) -> float:
    """Оценка вероятности выхода N_C (или N_R) из окна [0.9mu, 1.1mu]."""
    return 2.0 * math.exp(-(CONCENTRATION_WINDOW ** 2) * params.mu / 3.0)


def check_role_concentration(reports: Sequence[RunReport], params: ProtocolParams) -> Verdict:
    """
    Доля прогонов, где N_C и N_R лежат в [0.9mu, 1.1mu], против оценки Чернова.

    Args:
        reports: Отчеты с одинаковыми параметрами
        params: Эти параметры

    Returns:
        Verdict "role-concentration"
    """
    if params.role_probability >= 1.0:
        return _verdict("role-concentration", VerdictStatus.INAPPLICABLE, message="Вероятность роли 1: N_C = N_R = n")
    if len(reports) < MIN_CONCENTRATION_REPORTS:
        return _verdict(
            "role-concentration",
            VerdictStatus.INCONCLUSIVE,
            message=f"Нужно не меньше {MIN_CONCENTRATION_REPORTS} прогонов, есть {len(reports)}",
        )

    mu = params.mu
    low, high = (1 - CONCENTRATION_WINDOW) * mu, (1 + CONCENTRATION_WINDOW) * mu
    counts = np.array([[r.n_candidates, r.n_referees] for r in reports], dtype=float)
    inside = np.all((counts >= low) & (counts <= high), axis=1)
    observed = float(inside.mean())

    predicted = chernoff_bound(mu)
    stderr = math.sqrt(predicted * (1.0 - predicted) / len(reports))
    threshold = predicted - 3.0 * stderr
    status = VerdictStatus.PASS if observed >= threshold else VerdictStatus.FAIL
    return Verdict(
        name="role-concentration",
        status=status,
        message=f"В окне {observed:.3f}, порог {threshold:.3f} (mu={mu:.1f})",
        details={
            "mu": mu,
            "window": [low, high],
            "observed": observed,
            "predicted": predicted,
            "threshold": threshold,
            "nc_mean": float(counts[:, 0].mean()),
            "nc_std": float(counts[:, 0].std()),
            "nr_mean": float(counts[:, 1].mean()),
            "nr_std": float(counts[:, 1].std()),
            "reports": len(reports),
        },
        fitted=observed,
    )


def _trend_violations(series: Dict[int, float]) -> List[Tuple[int, int]]:
    """Пары соседних n, где значение выросло больше допуска."""
    points = sorted(series.items())
    return [
        (n0, n1)
        for (n0, v0), (n1, v1) in zip(points, points[1:])
        if v1 > v0 * (1.0 + TREND_TOLERANCE) + EPS
    ]


def _by_n(reports: Iterable[RunReport], value) -> Dict[int, float]:
    grouped: Dict[int, List[float]] = defaultdict(list)
    for r in reports:
        grouped[r.n].append(value(r))
    return {n: max(values) for n, values in grouped.items()}


def check_payload_bounds(report: RunReport) -> Verdict:
    """Сообщение передается не больше 2m раз; рефери генерирует не больше 2*N_C+1 сообщений."""
    transmission_limit = 2 * report.m
    referee_limit = 2 * report.n_candidates + 1
    problems = []
    if report.max_payload_transmissions > transmission_limit:
        problems.append(f"передач одного сообщения {report.max_payload_transmissions} > 2m={transmission_limit}")
    if report.max_referee_generated > referee_limit:
        problems.append(f"сообщений рефери {report.max_referee_generated} > 2*N_C+1={referee_limit}")
    status = VerdictStatus.FAIL if problems else VerdictStatus.PASS
    return _verdict(
        "payload-bounds",
        status,
        hard=True,
        message="; ".join(problems) or "Границы на сообщения соблюдены",
        max_payload_transmissions=report.max_payload_transmissions,
        max_referee_generated=report.max_referee_generated,
    )


def check_message_bound(reports: Sequence[RunReport]) -> Verdict:
    """
    kappa(n) = max T/(m log2^2 n) и upsilon(n) = max U/log2^2 n по одному семейству.

    Проходит, если обе величины не растут с n больше чем на 20% и в каждом
    прогоне соблюдены границы check_payload_bounds.

    Args:
        reports: Отчеты свипа по n на одном семействе

    Returns:
        Verdict "message-bound" с fitted = max kappa
    """
    reports = [r for r in reports if not r.flags.non_quiescent]
    per_run = [check_payload_bounds(r) for r in reports]
    broken = [v.message for v in per_run if v.failed]

    kappa = _by_n(reports, lambda r: r.total_transmissions / (r.m * log2_squared(r.n)))
    upsilon = _by_n(reports, lambda r: r.unique_messages / log2_squared(r.n))
    details = {
        "kappa": {str(n): v for n, v in sorted(kappa.items())},
        "upsilon": {str(n): v for n, v in sorted(upsilon.items())},
        "payload_violations": len(broken),
    }
    fitted = max(kappa.values(), default=None)

    if broken:
        return Verdict(
            name="message-bound", status=VerdictStatus.FAIL, message=broken[0], details=details, fitted=fitted
        )
    if len(kappa) < MIN_SWEEP_POINTS:
        return Verdict(
            name="message-bound",
            status=VerdictStatus.INCONCLUSIVE,
            message=f"Нужно хотя бы {MIN_SWEEP_POINTS} значения n, есть {len(kappa)}",
            details=details,
            fitted=fitted,
        )

    growth = _trend_violations(kappa) + _trend_violations(upsilon)
    details["growth"] = [list(pair) for pair in growth]
    status = VerdictStatus.FAIL if growth else VerdictStatus.PASS
    message = f"kappa max {fitted:.4f}" + (f", рост между n {growth}" if growth else "")
    return Verdict(name="message-bound", status=status, message=message, details=details, fitted=fitted)


def check_time_envelope(report: RunReport) -> Verdict:
    """completion_time <= 5*(D + unique_messages): пять фаз рассылки, каждая не дольше D+k-1."""
    if report.flags.non_quiescent:
        return _verdict("time-envelope", VerdictStatus.INCONCLUSIVE, hard=True, message="Прогон не дошел до затишья")
    limit = ENVELOPE_PHASES * (report.D + report.unique_messages)
    ok = report.completion_time <= limit + EPS
    return _verdict(
        "time-envelope",
        VerdictStatus.PASS if ok else VerdictStatus.FAIL,
        hard=True,
        message=f"{report.completion_time:.3f} {'<=' if ok else '>'} {limit}",
        completion_time=report.completion_time,
        limit=limit,
    )


def check_time_bound(reports: Sequence[RunReport]) -> Verdict:
    """
    tau = completion_time/(D + log2^2 n) по семействам.

    Каждый прогон обязан уложиться в check_time_envelope; tau по каждому
    семейству не должен расти с n больше чем на 20%.

    Args:
        reports: Отчеты свипа (можно нескольких семейств)

    Returns:
        Verdict "time-bound" с fitted = max tau
    """
    reports = [r for r in reports if not r.flags.non_quiescent]
    broken = [v.message for v in map(check_time_envelope, reports) if v.failed]

    families: Dict[str, List[RunReport]] = defaultdict(list)
    for r in reports:
        families[r.family].append(r)

    tau = {
        family: _by_n(group, lambda r: r.completion_time / (r.D + log2_squared(r.n)))
        for family, group in sorted(families.items())
    }
    details = {
        "tau": {family: {str(n): v for n, v in sorted(series.items())} for family, series in tau.items()},
        "envelope_violations": len(broken),
    }
    fitted = max((v for series in tau.values() for v in series.values()), default=None)

    if broken:
        return Verdict(name="time-bound", status=VerdictStatus.FAIL, message=broken[0], details=details, fitted=fitted)
    if not any(len(series) >= 2 for series in tau.values()):
        return Verdict(
            name="time-bound",
            status=VerdictStatus.INCONCLUSIVE,
            message="Для тренда нужно хотя бы два значения n в семействе",
            details=details,
            fitted=fitted,
        )

    growth = {family: _trend_violations(series) for family, series in tau.items()}
    growth = {family: pairs for family, pairs in growth.items() if pairs}
    details["growth"] = {family: [list(p) for p in pairs] for family, pairs in growth.items()}
    status = VerdictStatus.FAIL if growth else VerdictStatus.PASS
    message = f"tau max {fitted:.4f}" + (f", рост: {sorted(growth)}" if growth else "")
    return Verdict(name="time-bound", status=status, message=message, details=details, fitted=fitted)


def verify_channel_discipline(trace: Trace, report: Optional[RunReport] = None) -> Verdict:
    """
    FIFO и занятость каналов, задержки в (0, 1], причинность и сохранение числа передач.

    Args:
        trace: Трасса
        report: Отчет того же прогона для сверки числа передач

    Returns:
        Verdict "channel-discipline"
    """
    problems: List[str] = []
    last_time = 0.0
    last_delivery: Dict[Tuple[int, int], float] = {}
    known: Dict[int, Dict[Message, float]] = defaultdict(dict)
    deliveries = 0

    for record in trace:
        if record.time < last_time - EPS:
            problems.append(f"#{record.index}: время идет назад")
        last_time = record.time

        if record.message is not None:
            deliveries += 1
            edge = (record.src, record.dst)
            delay = record.time - record.sent_at
            if not 0.0 < delay <= 1.0 + EPS:
                problems.append(f"#{record.index}: задержка {delay} вне (0, 1]")
            if edge in last_delivery and record.sent_at < last_delivery[edge] - EPS:
                problems.append(f"#{record.index}: передача {edge} начата до доставки предыдущей")
            last_delivery[edge] = record.time
            had = known[record.src].get(record.message)
            if had is None or had > record.sent_at + EPS:
                problems.append(f"#{record.index}: {record.src} отправил сообщение раньше, чем получил его")
            known[record.dst].setdefault(record.message, record.time)

        for notice in record.notices:
            if notice.kind == NoticeKind.GENERATED:
                known[record.dst].setdefault(notice.message, record.time)

    if report is not None and not report.flags.non_quiescent and report.total_transmissions != deliveries:
        problems.append(f"передач {report.total_transmissions}, доставок {deliveries}")

    return _verdict(
        "channel-discipline",
        VerdictStatus.FAIL if problems else VerdictStatus.PASS,
        hard=True,
        message=problems[0] if problems else f"{deliveries} доставок без нарушений",
        violations=len(problems),
    )


def verify_quorum_count(trace: Trace) -> Verdict:
    """Лидер собрал ровно quorum_low одобрений, и каждое доставлено ему до избрания."""
    quorum_low = int(trace.header.get("params", {}).get("quorum_low", 1))
    received: Dict[int, Set[Message]] = defaultdict(set)
    problems: List[str] = []
    leaders = 0

    for record in trace:
        if record.message is not None:
            received[record.dst].add(record.message)
        for notice in record.notices:
            if notice.kind != NoticeKind.BECAME_LEADER:
                continue
            leaders += 1
            quorum = list(notice.detail)
            if len(quorum) != quorum_low:
                problems.append(f"лидер {notice.rank}: {len(quorum)} одобрений вместо {quorum_low}")
            missing = [r for r in quorum if Approved(notice.rank, r) not in received[record.dst]]
            if missing:
                problems.append(f"лидер {notice.rank}: нет доставленных одобрений от рефери {missing}")

    return _verdict(
        "quorum-count",
        VerdictStatus.FAIL if problems else VerdictStatus.PASS,
        hard=True,
        message=problems[0] if problems else f"Проверено избраний: {leaders}",
        leaders=leaders,
    )


def verify_referee_monotonicity(trace: Trace) -> Verdict:
    """Выбранный рефери строго растет, и смене выбранного v предшествует Loses(v)."""
    if has_rank_collision(trace):
        return _verdict("referee-monotonicity", VerdictStatus.INAPPLICABLE, message="Совпадение рангов")

    chosen: Dict[int, int] = {}
    known: Dict[int, Set[Message]] = defaultdict(set)
    problems: List[str] = []
    changes = 0
    for record in trace:
        if record.message is not None:
            known[record.dst].add(record.message)
        for notice in record.notices:
            if notice.kind == NoticeKind.GENERATED:
                known[record.dst].add(notice.message)
            if notice.kind != NoticeKind.CHOSEN:
                continue
            previous = chosen.get(record.dst)
            if previous is not None:
                changes += 1
                if notice.rank <= previous:
                    problems.append(f"рефери {record.dst}: выбранный {previous} -> {notice.rank}")
                if Loses(previous) not in known[record.dst]:
                    problems.append(f"рефери {record.dst}: смена {previous} без Loses")
            chosen[record.dst] = notice.rank

    return _verdict(
        "referee-monotonicity",
        VerdictStatus.FAIL if problems else VerdictStatus.PASS,
        message=problems[0] if problems else f"Смен выбранного: {changes}",
        changes=changes,
    )


def check_wakeup_bound(report: RunReport, unit_delay: bool = False) -> Verdict:
    """Все узлы просыпаются; при единичных задержках не позже момента D."""
    if report.flags.non_quiescent:
        return _verdict("wakeup-bound", VerdictStatus.INCONCLUSIVE, hard=True, message="Прогон не дошел до затишья")
    if report.all_awake_time is None:
        return _verdict("wakeup-bound", VerdictStatus.FAIL, hard=True, message="Не все узлы проснулись")
    if unit_delay and report.all_awake_time > report.D + EPS:
        return _verdict(
            "wakeup-bound",
            VerdictStatus.FAIL,
            hard=True,
            message=f"Последний узел проснулся в {report.all_awake_time} > D={report.D}",
        )
    return _verdict(
        "wakeup-bound",
        VerdictStatus.PASS,
        hard=True,
        message=f"Все проснулись к {report.all_awake_time:.3f}",
        all_awake_time=report.all_awake_time,
    )


def run_checks(trace: Trace, report: RunReport, unit_delay: bool = False) -> List[Verdict]:
    """Все проверки одного прогона в фиксированном порядке."""
    verdicts = [
        verify_safety(trace),
        verify_liveness(report),
        verify_channel_discipline(trace, report),
        verify_quorum_count(trace),
        verify_referee_monotonicity(trace),
        check_time_envelope(report),
        check_payload_bounds(report),
        check_wakeup_bound(report, unit_delay),
    ]
    for verdict in verdicts:
        if verdict.failed:
            logger.debug(f"{verdict.name}: {verdict.message} (seed={report.seed})")
    return verdicts
