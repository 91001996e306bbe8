"""Тесты топологий."""

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from async_election.graph import EdgeListParser, GraphValidator, generate
from async_election.models import GraphFamily
from async_election.utils.exceptions import GraphValidationError, ParameterError


class TestFamilies:
    """Размеры и диаметры детерминированных семейств."""

    def test_ring(self):
        g = generate(GraphFamily(family="ring", n=8))
        assert (g.n, g.m, g.diameter) == (8, 8, 4)
        assert all(g.degree(u) == 2 for u in range(g.n))

    def test_complete(self):
        g = generate(GraphFamily(family="complete", n=5))
        assert (g.m, g.diameter) == (10, 1)

    def test_square_torus(self):
        g = generate(GraphFamily(family="torus-2d", n=16))
        assert (g.m, g.diameter) == (32, 4)
        assert all(g.degree(u) == 4 for u in range(g.n))

    def test_rectangular_torus(self):
        g = generate(GraphFamily(family="torus-2d", n=12, rows=3, cols=4))
        assert (g.m, g.diameter) == (24, 3)

    def test_torus_needs_square_or_shape(self):
        with pytest.raises(ParameterError):
            generate(GraphFamily(family="torus-2d", n=12))

    def test_single_node_rejected(self):
        with pytest.raises(ParameterError):
            generate(GraphFamily(family="ring", n=1))

    def test_random_requires_probability(self):
        with pytest.raises(ParameterError):
            generate(GraphFamily(family="connected-uniform-random", n=10))

    def test_random_with_edge_count(self):
        g = generate(GraphFamily(family="connected-uniform-random", n=10, edge_count=20), seed=3)
        assert g.m >= 20
        assert nx.is_connected(g.to_networkx())

    def test_explicit_edges(self):
        g = generate(GraphFamily(family="from-edge-list", edges=[(0, 1), (1, 2)]))
        assert (g.n, g.m, g.diameter) == (3, 2, 2)


class TestPorts:
    """Порты адресуют соседей согласованно с обеих сторон ребра."""

    def test_port_roundtrip(self):
        g = generate(GraphFamily(family="torus-2d", n=9))
        for u in range(g.n):
            for port in range(g.degree(u)):
                v = g.neighbor(u, port)
                assert g.port_to(u, v) == port
                assert g.neighbor(v, g.port_to(v, u)) == u


class TestRandomGraphs:
    """connected-uniform-random всегда связен и воспроизводим."""

    @settings(max_examples=40, deadline=None)
    @given(
        n=st.integers(min_value=2, max_value=30),
        p=st.floats(min_value=0.01, max_value=1.0),
        seed=st.integers(min_value=0, max_value=2 ** 32 - 1),
    )
    def test_connected_and_deterministic(self, n, p, seed):
        family = GraphFamily(family="connected-uniform-random", n=n, edge_probability=p)
        first = generate(family, seed=seed)
        second = generate(family, seed=seed)
        assert nx.is_connected(first.to_networkx())
        assert first.edges == second.edges
        assert first.augmented_edges == second.augmented_edges


class TestValidator:
    """Отказ на петлях, кратных ребрах, чужих узлах и несвязности."""

    @pytest.mark.parametrize(
        "edges",
        [
            [(0, 0), (0, 1)],
            [(0, 1), (1, 0)],
            [(0, 1), (1, 5)],
            [(0, 1), (2, 3)],
        ],
        ids=["self-loop", "duplicate", "out-of-range", "disconnected"],
    )
    def test_rejects(self, edges):
        with pytest.raises(GraphValidationError):
            GraphValidator.validate(4, edges)

    def test_normalizes(self):
        assert GraphValidator.validate(3, [(2, 1), (1, 0)]) == [(0, 1), (1, 2)]


class TestEdgeList:
    """Текстовый формат "n m" и m строк "u v"."""

    def test_read_file(self, tmp_path):
        path = tmp_path / "g.txt"
        path.write_text("# треугольник\n3 3\n0 1\n1 2\n2 0\n", encoding="utf-8")
        g = EdgeListParser.read(path)
        assert (g.n, g.m, g.diameter) == (3, 3, 1)

    def test_write_then_read(self, tmp_path):
        g = generate(GraphFamily(family="ring", n=6))
        path = EdgeListParser.write(g, tmp_path / "ring.txt")
        assert EdgeListParser.read(path).edges == g.edges

    def test_count_mismatch(self):
        with pytest.raises(GraphValidationError):
            EdgeListParser.parse("3 3\n0 1\n1 2\n")

    def test_bad_header(self):
        with pytest.raises(GraphValidationError):
            EdgeListParser.parse("три ребра\n0 1\n")

    def test_missing_file(self, tmp_path):
        with pytest.raises(GraphValidationError):
            EdgeListParser.read(tmp_path / "nope.txt")
