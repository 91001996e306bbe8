"""Дискретно-событийная модель асинхронной сети."""

from async_election.simnet.adversary import (
    Adversary,
    DelayPolicy,
    OrderPolicy,
    WakeupSchedule,
    builtin_adversaries,
    make_adversary,
    wakeup_schedules,
)
from async_election.simnet.engine import EventLoop, Simulation, run
from async_election.simnet.flooding import Token, flood_only
from async_election.simnet.trace import Trace, TraceRecord

__all__ = [
    "Adversary",
    "DelayPolicy",
    "OrderPolicy",
    "WakeupSchedule",
    "builtin_adversaries",
    "make_adversary",
    "wakeup_schedules",
    "EventLoop",
    "Simulation",
    "run",
    "Token",
    "flood_only",
    "Trace",
    "TraceRecord",
]
