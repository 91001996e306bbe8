"""Конфигурация экспериментов."""

import copy
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from pydantic import ValidationError

from async_election.models import ExperimentConfig, ProtocolParams, ProtocolSpec
from async_election.utils.exceptions import ConfigError, ParameterError
from async_election.utils.logger import get_logger

logger = get_logger(__name__)

# paper годится только для астрономически больших n; desk проверен на n от 128 до 4096
PRESETS: Dict[str, Dict[str, float]] = {
    "paper": {"role_coefficient": 1000.0, "quorum_fraction": 0.9},
    "desk": {"role_coefficient": 16.0, "quorum_fraction": 0.8},
}


def resolve_params(spec: ProtocolSpec, n: int) -> ProtocolParams:
    """
    Параметры протокола для сети из n узлов.

    Args:
        spec: Пресет, переопределения и политика оценки n
        n: Реальное число узлов

    Returns:
        Параметры протокола

    Raises:
        ParameterError: Неизвестный пресет или параметры нарушают инварианты
    """
    if spec.preset not in PRESETS:
        raise ParameterError(f"Неизвестный пресет: {spec.preset}. Доступны: {', '.join(sorted(PRESETS))}")
    preset = PRESETS[spec.preset]
    role_coefficient = spec.role_coefficient if spec.role_coefficient is not None else preset["role_coefficient"]
    quorum_fraction = spec.quorum_fraction if spec.quorum_fraction is not None else preset["quorum_fraction"]

    policy = spec.n_estimate_policy
    n_estimate = policy.estimate(n)
    if not policy.admits(n, n_estimate):
        raise ParameterError(f"Оценка {n_estimate} не согласована с n={n} для политики {policy.kind.value}")

    try:
        return ProtocolParams.build(
            n_estimate=n_estimate,
            role_coefficient=role_coefficient,
            quorum_fraction=quorum_fraction,
            quorum_low=spec.quorum_low,
            rank_space_max=spec.rank_space_max,
        )
    except ValidationError as e:
        raise ParameterError(f"Недопустимые параметры протокола для n={n}: {e}") from e


def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _field_errors(error: ValidationError) -> Dict[str, str]:
    return {".".join(str(part) for part in item["loc"]) or "<root>": item["msg"] for item in error.errors()}


class Config:
    """Менеджер конфигурации эксперимента."""

    def __init__(
        self,
        config_path: Optional[str] = None,
        config_dict: Optional[Dict[str, Any]] = None,
        overrides: Optional[Dict[str, Any]] = None,
    ):
        """
        Инициализация конфигурации.

        Args:
            config_path: Путь к YAML файлу конфигурации
            config_dict: Словарь с конфигурацией (альтернатива config_path)
            overrides: Ключи, переопределяющие файл (флаги командной строки)

        Raises:
            ConfigError: При ошибках загрузки или валидации
        """
        self.config_dict: Dict[str, Any] = self._default_config()

        if config_path:
            self.config_dict = _merge(self.config_dict, self._load_from_file(config_path))
        elif config_dict:
            self.config_dict = _merge(self.config_dict, config_dict)

        if overrides:
            self.config_dict = _merge(self.config_dict, overrides)

        self._experiment = self._validate()

    @staticmethod
    def _load_from_file(config_path: str) -> Dict[str, Any]:
        """Загружает конфигурацию из YAML файла."""
        path = Path(config_path)
        if not path.exists():
            raise ConfigError(f"Файл конфигурации не найден: {config_path}")

        try:
            with open(path, "r", encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
        except (OSError, yaml.YAMLError) as e:
            raise ConfigError(f"Ошибка загрузки конфигурации: {e}") from e

        if not isinstance(data, dict):
            raise ConfigError("Конфигурация должна быть словарем")
        return data

    def _default_config(self) -> Dict[str, Any]:
        """Возвращает конфигурацию по умолчанию: дымовой прогон на кольце."""
        return {
            "graphs": [{"family": "ring"}],
            "sizes": [16],
            "protocol": {"preset": "desk"},
            "adversaries": [{"name": "uniform-delay", "wakeup": "single"}],
            "trials": 1,
            "seed": 0,
            "output_path": "./election_runs",
            "keep_traces": "failures-only",
            "logging": {
                "level": "INFO",
            },
        }

    def _validate(self) -> ExperimentConfig:
        """Валидирует конфигурацию и собирает ExperimentConfig."""
        if not isinstance(self.config_dict, dict):
            raise ConfigError("Конфигурация должна быть словарем")

        data = {key: value for key, value in self.config_dict.items() if key != "logging"}
        try:
            experiment = ExperimentConfig.model_validate(data)
        except ValidationError as e:
            fields = _field_errors(e)
            details = "; ".join(f"{k}: {v}" for k, v in fields.items())
            raise ConfigError(f"Невалидная конфигурация: {details}", fields=fields) from e

        if experiment.protocol.preset not in PRESETS:
            raise ConfigError(
                f"Неизвестный пресет: {experiment.protocol.preset}",
                fields={"protocol.preset": f"ожидается одно из {sorted(PRESETS)}"},
            )
        return experiment

    def get_experiment_config(self) -> ExperimentConfig:
        """Возвращает конфигурацию эксперимента."""
        return self._experiment

    def get_output_path(self) -> Path:
        """Возвращает путь для сохранения артефактов."""
        return Path(self._experiment.output_path)

    def get_logging_config(self) -> Dict[str, Any]:
        """Возвращает конфигурацию логирования."""
        return self.config_dict.get("logging", {})
