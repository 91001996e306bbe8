"""Текстовый формат списка ребер: строка "n m", затем m строк "u v"."""

from pathlib import Path
from typing import List, Tuple, Union

from async_election.graph.generator import Graph
from async_election.graph.validator import GraphValidator
from async_election.models import GraphFamilyTag
from async_election.utils.exceptions import GraphValidationError, OutputError
from async_election.utils.logger import get_logger

logger = get_logger(__name__)


class EdgeListParser:
    """Разбор и запись списка ребер."""

    @staticmethod
    def parse(text: str) -> Tuple[int, List[Tuple[int, int]]]:
        """
        Парсит список ребер из строки.

        Args:
            text: Содержимое файла

        Returns:
            (n, список ребер)

        Raises:
            GraphValidationError: При ошибках формата
        """
        lines = [line.strip() for line in text.splitlines()]
        lines = [line for line in lines if line and not line.startswith("#")]
        if not lines:
            raise GraphValidationError("Пустой список ребер")

        try:
            n, m = (int(x) for x in lines[0].split())
        except ValueError as e:
            raise GraphValidationError(f"Первая строка должна быть 'n m': {lines[0]!r}") from e

        body = lines[1:]
        if len(body) != m:
            raise GraphValidationError(f"Заявлено {m} ребер, найдено {len(body)}")

        edges = []
        for lineno, line in enumerate(body, start=2):
            parts = line.split()
            if len(parts) != 2:
                raise GraphValidationError(f"Строка {lineno}: ожидалось 'u v', получено {line!r}")
            try:
                edges.append((int(parts[0]), int(parts[1])))
            except ValueError as e:
                raise GraphValidationError(f"Строка {lineno}: не целые номера узлов") from e
        return n, edges

    @staticmethod
    def read(path: Union[str, Path]) -> Graph:
        """
        Читает и валидирует граф из файла.

        Args:
            path: Путь к файлу

        Returns:
            Граф
        """
        path = Path(path)
        if not path.exists():
            raise GraphValidationError(f"Файл списка ребер не найден: {path}")
        n, edges = EdgeListParser.parse(path.read_text(encoding="utf-8"))
        graph = Graph.from_edges(n, GraphValidator.validate(n, edges), family=GraphFamilyTag.EDGE_LIST.value)
        logger.info(f"Граф загружен из {path}: n={graph.n}, m={graph.m}")
        return graph

    @staticmethod
    def format(graph: Graph) -> str:
        """Сериализует граф в текстовый формат."""
        lines = [f"{graph.n} {graph.m}"]
        lines.extend(f"{u} {v}" for u, v in sorted(graph.edges))
        return "\n".join(lines) + "\n"

    @staticmethod
    def write(graph: Graph, path: Union[str, Path]) -> Path:
        """Записывает граф в файл."""
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(EdgeListParser.format(graph), encoding="utf-8")
        except OSError as e:
            raise OutputError(f"Ошибка записи списка ребер {path}: {e}") from e
        return path
