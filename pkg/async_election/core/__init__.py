"""Конфигурация и оркестрация экспериментов."""

from async_election.core.config import PRESETS, Config, resolve_params
from async_election.core.experiment import ExperimentRunner, derive_seed, replay, run_trial

__all__ = ["PRESETS", "Config", "resolve_params", "ExperimentRunner", "derive_seed", "replay", "run_trial"]
