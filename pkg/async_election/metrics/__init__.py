"""Отчеты, проверки и сводки прогонов."""

from async_election.metrics.checks import (
    check_message_bound,
    check_payload_bounds,
    check_role_concentration,
    check_time_bound,
    check_time_envelope,
    check_wakeup_bound,
    chernoff_bound,
    run_checks,
    verify_channel_discipline,
    verify_liveness,
    verify_quorum_count,
    verify_referee_monotonicity,
    verify_safety,
)
from async_election.metrics.report import build_report
from async_election.metrics.summary import format_verdicts, summarize, to_csv

__all__ = [
    "check_message_bound",
    "check_payload_bounds",
    "check_role_concentration",
    "check_time_bound",
    "check_time_envelope",
    "check_wakeup_bound",
    "chernoff_bound",
    "run_checks",
    "verify_channel_discipline",
    "verify_liveness",
    "verify_quorum_count",
    "verify_referee_monotonicity",
    "verify_safety",
    "build_report",
    "format_verdicts",
    "summarize",
    "to_csv",
]
