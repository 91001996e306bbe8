"""Общие фикстуры тестов."""

import pytest

from async_election.graph.generator import Graph, generate
from async_election.models import AdversarySpec, ForcedRoles, GraphFamily, ProtocolParams
from async_election.simnet.adversary import make_adversary

BIG_RANKS = 2 ** 40


@pytest.fixture
def two_nodes() -> Graph:
    """Одно ребро 0-1."""
    return Graph.from_edges(2, [(0, 1)])


@pytest.fixture
def ring8() -> Graph:
    return generate(GraphFamily(family="ring", n=8))


@pytest.fixture
def complete4() -> Graph:
    return generate(GraphFamily(family="complete", n=4))


@pytest.fixture
def make_params():
    """Фабрика параметров: desk-константы и большое пространство рангов."""

    def _make(n: int, quorum_low=None, rank_space_max: int = BIG_RANKS) -> ProtocolParams:
        return ProtocolParams.build(
            n,
            role_coefficient=16.0,
            quorum_fraction=0.8,
            quorum_low=quorum_low,
            rank_space_max=rank_space_max,
        )

    return _make


@pytest.fixture
def unit_adversary():
    """Фабрика противника с единичными задержками."""

    def _make(wakeup: str = "single", initiator: int = 0, seed: int = 0):
        return make_adversary(AdversarySpec(name="unit-delay", wakeup=wakeup, initiator=initiator), seed)

    return _make


@pytest.fixture
def oracle_roles() -> ForcedRoles:
    """Узел 0 кандидат, узел 1 рефери."""
    return ForcedRoles(candidate_nodes=[0], referee_nodes=[1])


@pytest.fixture
def oracle_run(two_nodes, make_params, unit_adversary, oracle_roles):
    """(трасса, отчет) прогона на двух узлах с quorum_low = 1."""
    from async_election.simnet import run

    return run(two_nodes, make_params(2, quorum_low=1), unit_adversary(), seed=7, roles=oracle_roles)
