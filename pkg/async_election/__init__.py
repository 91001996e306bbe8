"""
Симулятор рандомизированных асинхронных выборов лидера.

Основной класс для использования: ExperimentRunner
"""

from async_election.core.experiment import ExperimentRunner, replay
from async_election.simnet.engine import run
from async_election.simnet.flooding import flood_only

__all__ = ["ExperimentRunner", "replay", "run", "flood_only"]
__version__ = "0.1.0"
