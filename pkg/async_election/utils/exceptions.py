"""Исключения библиотеки."""

from typing import Optional


class ElectionSimError(Exception):
    """Базовое исключение библиотеки."""

    pass


class ConfigError(ElectionSimError):
    """Ошибка загрузки или валидации конфигурации эксперимента."""

    def __init__(self, message: str, fields: Optional[dict] = None):
        super().__init__(message)
        self.fields = fields or {}


class ParameterError(ElectionSimError):
    """Недопустимые параметры семейства графов или протокола."""

    pass


class GraphValidationError(ElectionSimError):
    """Граф нарушает инварианты (связность, петли, кратные ребра)."""

    pass


class ProtocolInvariantError(ElectionSimError):
    """Нарушен внутренний инвариант автомата узла."""

    pass


class AdversaryError(ElectionSimError):
    """Ошибка противника: неизвестное имя или задержка вне (0, 1]."""

    pass


class TraceParseError(ElectionSimError):
    """Ошибка разбора трассы или отчета."""

    pass


class ReplayMismatchError(ElectionSimError):
    """Повторное исполнение трассы разошлось с записанной."""

    def __init__(self, message: str, index: int, expected=None, actual=None):
        super().__init__(message)
        self.index = index
        self.expected = expected
        self.actual = actual


class OutputError(ElectionSimError):
    """Ошибка сохранения артефактов."""

    pass
