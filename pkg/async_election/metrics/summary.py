"""Сводка свипа: строки по (n, семейство, противник), CSV и таблица вердиктов."""

import csv
import io
from collections import defaultdict
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from async_election.metrics.checks import log2_squared
from async_election.models import RunReport, SweepRow, Verdict

SUMMARY_FIELDS = list(SweepRow.model_fields)


def summarize(reports: Iterable[RunReport]) -> List[SweepRow]:
    """
    Агрегирует отчеты по точкам свипа.

    Прогоны с совпадением рангов считаются отдельно и не попадают
    в multi_leader_count.

    Args:
        reports: Отчеты прогонов

    Returns:
        Строки, упорядоченные по (семейство, противник, n)
    """
    groups: Dict[Tuple[str, str, int], List[RunReport]] = defaultdict(list)
    for report in reports:
        groups[(report.family, report.adversary, report.n)].append(report)

    rows = []
    for (family, adversary, n), group in sorted(groups.items()):
        kappa = np.array([r.total_transmissions / (r.m * log2_squared(r.n)) for r in group])
        tau = np.array([r.completion_time / (r.D + log2_squared(r.n)) for r in group])
        nc = np.array([r.n_candidates for r in group], dtype=float)
        nr = np.array([r.n_referees for r in group], dtype=float)
        rows.append(
            SweepRow(
                n=n,
                family=family,
                adversary=adversary,
                trials=len(group),
                exactly_one_rate=float(np.mean([r.exactly_one_leader for r in group])),
                multi_leader_count=sum(
                    1 for r in group if len(r.leaders_elected) > 1 and not r.flags.rank_collision
                ),
                collision_count=sum(1 for r in group if r.flags.rank_collision),
                failure_count=sum(1 for r in group if r.flags.election_failure),
                kappa_mean=float(kappa.mean()),
                kappa_max=float(kappa.max()),
                tau_mean=float(tau.mean()),
                tau_max=float(tau.max()),
                nc_mean=float(nc.mean()),
                nc_std=float(nc.std()),
                nr_mean=float(nr.mean()),
                nr_std=float(nr.std()),
            )
        )
    return rows


def _cell(value) -> str:
    # фиксированная точность: одинаковый конфиг дает побайтно одинаковый CSV
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def to_csv(rows: Sequence[SweepRow]) -> str:
    """CSV со строкой заголовка; строки в порядке summarize."""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=SUMMARY_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({key: _cell(value) for key, value in row.model_dump().items()})
    return buffer.getvalue()


def format_verdicts(verdicts: Sequence[Verdict]) -> str:
    """Таблица вердиктов для человека: имя, статус, жесткость, пояснение."""
    if not verdicts:
        return "Проверок нет\n"
    width = max(len(v.name) for v in verdicts)
    lines = []
    for v in verdicts:
        mark = "hard" if v.hard else "soft"
        fitted = f" [{v.fitted:.4f}]" if v.fitted is not None else ""
        lines.append(f"{v.name.ljust(width)}  {v.status.value:<12}  {mark}  {v.message}{fitted}")
    return "\n".join(lines) + "\n"
