"""Утилиты библиотеки."""

from async_election.utils.exceptions import (
    ElectionSimError,
    ConfigError,
    ParameterError,
    GraphValidationError,
    ProtocolInvariantError,
    AdversaryError,
    TraceParseError,
    ReplayMismatchError,
    OutputError,
)

__all__ = [
    "ElectionSimError",
    "ConfigError",
    "ParameterError",
    "GraphValidationError",
    "ProtocolInvariantError",
    "AdversaryError",
    "TraceParseError",
    "ReplayMismatchError",
    "OutputError",
]
