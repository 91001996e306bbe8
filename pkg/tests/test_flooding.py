"""Тесты затопления k сообщений."""

import pytest

from async_election.graph.generator import generate
from async_election.models import GraphFamily
from async_election.simnet import Token, flood_only
from async_election.utils.exceptions import ParameterError


def graph(family: str, n: int):
    return generate(GraphFamily(family=family, n=n))


class TestFloodTime:
    """Единичные задержки: одно сообщение идет ровно D, k сообщений не дольше D + k - 1."""

    @pytest.mark.parametrize(
        "family,n,k,expected",
        [("ring", 8, 1, 4.0), ("torus-2d", 16, 1, 4.0), ("complete", 4, 3, 3.0), ("complete", 6, 1, 1.0)],
    )
    def test_exact(self, family, n, k, expected):
        assert flood_only(graph(family, n), 0, k) == expected

    @pytest.mark.parametrize("family,n,k", [("ring", 8, 5), ("torus-2d", 16, 4), ("ring", 9, 3)])
    def test_pipeline_bound(self, family, n, k):
        g = graph(family, n)
        assert flood_only(g, 0, k) <= g.diameter + k - 1

    @pytest.mark.parametrize(
        "family,n,diameter",
        [("ring", 8, 4), ("torus-2d", 64, 8), ("complete", 16, 1)],
    )
    @pytest.mark.parametrize("k", [1, 5, 20])
    def test_pipeline_is_tight(self, family, n, diameter, k):
        g = graph(family, n)
        assert g.diameter == diameter
        assert flood_only(g, 0, k) == diameter + k - 1


class TestFloodArguments:
    """Неверные аргументы."""

    def test_zero_messages(self):
        with pytest.raises(ParameterError):
            flood_only(graph("ring", 4), 0, 0)

    def test_source_outside(self):
        with pytest.raises(ParameterError):
            flood_only(graph("ring", 4), 4, 1)

    def test_tokens_are_values(self):
        assert Token(2) == Token(2) and Token(1) != Token(2)
