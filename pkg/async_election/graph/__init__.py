"""Топологии сетей."""

from async_election.graph.generator import Graph, diameter, generate
from async_election.graph.edge_list import EdgeListParser
from async_election.graph.validator import GraphValidator

__all__ = ["Graph", "diameter", "generate", "EdgeListParser", "GraphValidator"]
