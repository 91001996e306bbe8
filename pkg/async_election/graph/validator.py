"""Валидатор топологий."""

from typing import Iterable, List, Tuple

import networkx as nx

from async_election.utils.exceptions import GraphValidationError
from async_election.utils.logger import get_logger

logger = get_logger(__name__)


class GraphValidator:
    """Проверка инвариантов графа: узлы в диапазоне, без петель и кратных ребер, связность."""

    @staticmethod
    def validate(n: int, edges: Iterable[Tuple[int, int]]) -> List[Tuple[int, int]]:
        """
        Валидирует и нормализует список ребер.

        Args:
            n: Число узлов
            edges: Неориентированные ребра (u, v)

        Returns:
            Отсортированный список ребер вида (min, max)

        Raises:
            GraphValidationError: При нарушении инвариантов
        """
        errors = []
        if n < 1:
            raise GraphValidationError(f"Число узлов должно быть положительным: {n}")

        seen = set()
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                errors.append(f"ребро ({u}, {v}) выходит за диапазон 0..{n - 1}")
                continue
            if u == v:
                errors.append(f"петля в узле {u}")
                continue
            key = (min(u, v), max(u, v))
            if key in seen:
                errors.append(f"кратное ребро {key}")
                continue
            seen.add(key)

        if errors:
            error_msg = "Ошибки валидации графа:\n" + "\n".join(f"  - {e}" for e in errors)
            logger.error(error_msg)
            raise GraphValidationError(error_msg)

        check = nx.Graph()
        check.add_nodes_from(range(n))
        check.add_edges_from(seen)
        if not nx.is_connected(check):
            components = nx.number_connected_components(check)
            raise GraphValidationError(f"Граф несвязен: {components} компонент")

        return sorted(seen)
