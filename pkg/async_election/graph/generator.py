"""Построение и измерение топологий."""

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, List, Optional, Tuple

import networkx as nx
import numpy as np

from async_election.graph.validator import GraphValidator
from async_election.models import GraphFamily, GraphFamilyTag
from async_election.utils.exceptions import ParameterError
from async_election.utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class Graph:
    """
    Неизменяемый неориентированный связный граф.

    Ребро узла адресуется номером порта: ``adjacency[u][port]`` дает соседа.
    Номера узлов нужны только симулятору, протокол видит лишь порты.
    """

    n: int
    edges: FrozenSet[Tuple[int, int]]
    adjacency: Tuple[Tuple[int, ...], ...]
    family: str = GraphFamilyTag.EDGE_LIST.value
    seed: Optional[int] = None
    augmented_edges: int = 0
    _ports: Tuple[Dict[int, int], ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self) -> None:
        ports = tuple({v: port for port, v in enumerate(neigh)} for neigh in self.adjacency)
        object.__setattr__(self, "_ports", ports)

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: List[Tuple[int, int]],
        family: str = GraphFamilyTag.EDGE_LIST.value,
        seed: Optional[int] = None,
        augmented_edges: int = 0,
    ) -> "Graph":
        """
        Строит граф из уже провалидированного списка ребер.

        Args:
            n: Число узлов
            edges: Ребра (u, v) с u < v
            family: Метка семейства
            seed: Зерно генерации
            augmented_edges: Сколько ребер добавлено для связности

        Returns:
            Граф
        """
        neighbours: List[List[int]] = [[] for _ in range(n)]
        for u, v in edges:
            neighbours[u].append(v)
            neighbours[v].append(u)
        return cls(
            n=n,
            edges=frozenset(edges),
            adjacency=tuple(tuple(sorted(neigh)) for neigh in neighbours),
            family=family,
            seed=seed,
            augmented_edges=augmented_edges,
        )

    @property
    def m(self) -> int:
        return len(self.edges)

    def degree(self, u: int) -> int:
        return len(self.adjacency[u])

    def neighbor(self, u: int, port: int) -> int:
        return self.adjacency[u][port]

    def port_to(self, u: int, v: int) -> int:
        """Номер порта узла u, ведущего к v."""
        return self._ports[u][v]

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges)
        return g

    @cached_property
    def diameter(self) -> int:
        return diameter(self)


def diameter(g: Graph) -> int:
    """
    Точный диаметр: максимум эксцентриситетов по BFS из каждого узла.

    Args:
        g: Связный граф

    Returns:
        Наибольшее число переходов между парой узлов
    """
    if g.n == 1:
        return 0
    return int(nx.diameter(g.to_networkx()))


def generate(family: GraphFamily, seed: int = 0) -> Graph:
    """
    Генерирует граф семейства; одинаковые (family, seed) дают одинаковый граф.

    Args:
        family: Описание семейства и параметров
        seed: 64-битное зерно

    Returns:
        Связный граф

    Raises:
        ParameterError: При недопустимых параметрах
        GraphValidationError: Явный список ребер несвязен или некорректен
    """
    # edge_list импортирует Graph из этого модуля
    from async_election.graph.edge_list import EdgeListParser

    tag = family.family
    if tag == GraphFamilyTag.EDGE_LIST:
        if family.edges is not None:
            if family.n is None and not family.edges:
                raise ParameterError("Пустой список ребер без n")
            n = family.n if family.n is not None else 1 + max(max(e) for e in family.edges)
            edges = GraphValidator.validate(n, family.edges)
            return Graph.from_edges(n, edges, family=tag.value, seed=seed)
        if family.edge_list_path is not None:
            return EdgeListParser.read(family.edge_list_path)
        raise ParameterError("Для from-edge-list нужен edges или edge_list_path")

    n = family.n
    if n is None or n < 2:
        raise ParameterError(f"{tag.value}: требуется n >= 2, получено {n}")

    augmented = 0
    if tag == GraphFamilyTag.RING:
        g = nx.cycle_graph(n)
    elif tag == GraphFamilyTag.COMPLETE:
        g = nx.complete_graph(n)
    elif tag == GraphFamilyTag.TORUS_2D:
        rows, cols = _torus_shape(family)
        grid = nx.grid_2d_graph(rows, cols, periodic=True)
        g = nx.relabel_nodes(grid, {(r, c): r * cols + c for r, c in grid.nodes})
    elif tag == GraphFamilyTag.RANDOM:
        g, augmented = _connected_random(family, n, seed)
    else:
        raise ParameterError(f"Неизвестное семейство графов: {tag}")

    edges = GraphValidator.validate(g.number_of_nodes(), list(g.edges()))
    graph = Graph.from_edges(g.number_of_nodes(), edges, family=tag.value, seed=seed, augmented_edges=augmented)
    logger.debug(f"Граф {tag.value}: n={graph.n}, m={graph.m}, добавлено ребер: {augmented}")
    return graph


def _torus_shape(family: GraphFamily) -> Tuple[int, int]:
    rows, cols = family.rows, family.cols
    if rows is None or cols is None:
        side = math.isqrt(family.n)
        if side * side != family.n:
            raise ParameterError(f"torus-2d: n={family.n} не квадрат, задайте rows и cols")
        rows, cols = side, side
    if rows < 3 or cols < 3:
        raise ParameterError("torus-2d: rows и cols должны быть не меньше 3")
    if family.n is not None and rows * cols != family.n:
        raise ParameterError(f"torus-2d: rows*cols={rows * cols} не равно n={family.n}")
    return rows, cols


def _connected_random(family: GraphFamily, n: int, seed: int) -> Tuple[nx.Graph, int]:
    """Случайный граф, дополненный случайными ребрами между компонентами до связности."""
    if family.edge_count is not None:
        max_edges = n * (n - 1) // 2
        if not 0 < family.edge_count <= max_edges:
            raise ParameterError(f"edge_count должно лежать в (0, {max_edges}]")
        g = nx.gnm_random_graph(n, family.edge_count, seed=seed)
    else:
        p = family.edge_probability
        if p is None or not 0.0 < p <= 1.0:
            raise ParameterError(f"edge_probability должна лежать в (0, 1], получено {p}")
        g = nx.gnp_random_graph(n, p, seed=seed)

    rng = np.random.default_rng(seed)
    augmented = 0
    while not nx.is_connected(g):
        components = sorted((sorted(c) for c in nx.connected_components(g)), key=lambda c: c[0])
        i, j = rng.choice(len(components), size=2, replace=False)
        u = int(rng.choice(components[i]))
        v = int(rng.choice(components[j]))
        g.add_edge(u, v)
        augmented += 1

    if augmented:
        logger.debug(f"Случайный граф n={n} дополнен {augmented} ребрами до связности")
    return g, augmented
