"""Finite posets as Alexandrov sites.

Opens are up-closed sets, so U_x = {y : y >= x} is the smallest open around x.
Maximal points are open cells and minimal points are closed cells.
"""

from __future__ import annotations

import logging
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import networkx as nx

from descentiq.errors import ModelError
from descentiq.groupcoh.finite import FiniteGroup

logger = logging.getLogger(__name__)

Chain = tuple[str, ...]


class PosetSite:
    def __init__(self, points: Sequence[str], leq: Iterable[tuple[str, str]] = (),
                 chain_cap: int = 0):
        self.points = [str(p) for p in points]
        if len(set(self.points)) != len(self.points):
            raise ModelError("Point names must be unique")
        self.chain_cap = chain_cap
        self._chain_cache: dict[int, list[Chain]] = {}
        self.index = {p: i for i, p in enumerate(self.points)}
        graph = nx.DiGraph()
        graph.add_nodes_from(self.points)
        for a, b in leq:
            for p in (a, b):
                if p not in self.index:
                    raise ModelError(f"Unknown point: {p}. Available: {self.points}")
            if a != b:
                graph.add_edge(a, b)
        if not nx.is_directed_acyclic_graph(graph):
            cycle = nx.find_cycle(graph)
            a, b = cycle[0][0], cycle[0][1]
            raise ModelError(f"Antisymmetry fails: {a} <= {b} and {b} <= {a}")
        self.graph = graph
        self.closure = nx.transitive_closure_dag(graph)
        self.hasse = nx.transitive_reduction(graph)
        logger.debug("poset with %d points and %d covering pairs", len(self.points),
                     self.hasse.number_of_edges())

    # -- order -------------------------------------------------------------

    def leq(self, a: str, b: str) -> bool:
        return a == b or self.closure.has_edge(a, b)

    def less(self, a: str, b: str) -> bool:
        return a != b and self.closure.has_edge(a, b)

    def up_set(self, x: str) -> list[str]:
        """The minimal open U_x, in point order."""
        above = set(self.closure.successors(x)) | {x}
        return [p for p in self.points if p in above]

    def above(self, x: str) -> list[str]:
        succ = set(self.closure.successors(x))
        return [p for p in self.points if p in succ]

    def covering_pairs(self) -> list[tuple[str, str]]:
        return sorted(self.hasse.edges(), key=lambda e: (self.index[e[0]], self.index[e[1]]))

    def comparable_pairs(self) -> list[tuple[str, str]]:
        return [(a, b) for a in self.points for b in self.above(a)]

    def open_violation(self, subset: Iterable[str]) -> tuple[str, str] | None:
        s = set(subset)
        for x in self.points:
            if x in s:
                for y in self.above(x):
                    if y not in s:
                        return x, y
        return None

    def is_open(self, subset: Iterable[str]) -> bool:
        return self.open_violation(subset) is None

    def is_connected(self) -> bool:
        return nx.is_weakly_connected(self.graph) if self.points else True

    def minimal_points(self) -> list[str]:
        return [p for p in self.points if self.graph.in_degree(p) == 0]

    def maximal_points(self) -> list[str]:
        return [p for p in self.points if self.graph.out_degree(p) == 0]

    # -- chains ------------------------------------------------------------

    @cached_property
    def height(self) -> int:
        """Length (number of steps) of the longest strict chain."""
        if not self.points:
            return 0
        return nx.dag_longest_path_length(self.graph)

    def chains(self, q: int) -> list[Chain]:
        """Strict chains x0 < ... < xq, lexicographic in point order.

        With a nonzero ``chain_cap`` asking for q above the cap is an error
        rather than a silently truncated complex.
        """
        if q < 0 or q > self.height:
            return []
        if self.chain_cap and q > self.chain_cap:
            raise ValueError(f"Chains of length {q} exceed chain_cap={self.chain_cap}")
        if q not in self._chain_cache:
            shorter = self.chains(q - 1) if q else []
            self._chain_cache[q] = (
                [(p,) for p in self.points] if q == 0
                else [c + (y,) for c in shorter for y in self.above(c[-1])]
            )
        return self._chain_cache[q]

    def weak_chains(self, q: int) -> list[Chain]:
        """Chains x0 <= ... <= xq with repetitions allowed."""
        chains: list[Chain] = [(p,) for p in self.points]
        for _ in range(q):
            chains = [c + (y,) for c in chains for y in self.up_set(c[-1])]
        return chains

    # -- sub-sites ---------------------------------------------------------

    def restrict(self, subset: Iterable[str]) -> PosetSite:
        s = set(subset)
        pts = [p for p in self.points if p in s]
        pairs = [(a, b) for a, b in self.comparable_pairs() if a in s and b in s]
        return PosetSite(pts, pairs, chain_cap=self.chain_cap)

    def suspension(self, poles: Sequence[str] = ("N", "S")) -> PosetSite:
        """Add two incomparable minimal points below everything."""
        pairs = self.comparable_pairs() + [(n, p) for n in poles for p in self.points]
        return PosetSite(list(poles) + self.points, pairs, chain_cap=self.chain_cap)

    def __repr__(self) -> str:
        return f"PosetSite({len(self.points)} points, height {self.height})"


class PosetMap:
    """A monotone map between finite posets (continuous for up-set topologies)."""

    def __init__(self, source: PosetSite, target: PosetSite, mapping: Mapping[str, str]):
        self.source = source
        self.target = target
        missing = [p for p in source.points if p not in mapping]
        if missing:
            raise ModelError(f"Map is undefined on {missing}")
        for p, q in mapping.items():
            if q not in target.index:
                raise ModelError(f"Map sends {p} to unknown point {q}")
        self.mapping = dict(mapping)
        for a, b in source.comparable_pairs():
            if not target.leq(self.mapping[a], self.mapping[b]):
                raise ModelError(
                    f"Map is not monotone: {a} <= {b} but {self.mapping[a]} !<= {self.mapping[b]}"
                )

    def __call__(self, p: str) -> str:
        return self.mapping[p]

    def preimage(self, subset: Iterable[str]) -> list[str]:
        s = set(subset)
        return [p for p in self.source.points if self.mapping[p] in s]

    def fiber(self, q: str) -> list[str]:
        return self.preimage([q])


class PosetAction:
    """A finite group acting on a poset by order automorphisms (deck transformations)."""

    def __init__(self, site: PosetSite, group: FiniteGroup, maps: Sequence[Mapping[str, str]]):
        if len(maps) != group.order:
            raise ModelError(f"Need {group.order} point maps, got {len(maps)}")
        self.site = site
        self.group = group
        self.maps = [dict(m) for m in maps]
        for g, m in enumerate(self.maps):
            name = group.names[g]
            if sorted(m) != sorted(site.points) or sorted(m.values()) != sorted(site.points):
                raise ModelError(f"{name} does not permute the points")
            for a, b in site.comparable_pairs():
                if not site.less(m[a], m[b]):
                    raise ModelError(f"{name} does not preserve {a} <= {b}")
        if any(p != q for p, q in self.maps[0].items()):
            raise ModelError("Identity element must fix every point")
        for g in group.elements():
            for h in group.elements():
                gh = group.mul(g, h)
                for p in site.points:
                    if self.maps[g][self.maps[h][p]] != self.maps[gh][p]:
                        raise ModelError(
                            f"Action law fails at {p} for ({group.names[g]}, {group.names[h]})"
                        )

    def __call__(self, g: int, p: str) -> str:
        return self.maps[g][p]

    def inverse(self, g: int, p: str) -> str:
        return self.maps[self.group.inv(g)][p]

    def orbit(self, p: str) -> list[str]:
        seen = {self.maps[g][p] for g in self.group.elements()}
        return [q for q in self.site.points if q in seen]

    def stabilizer(self, p: str) -> list[int]:
        return [g for g in self.group.elements() if self.maps[g][p] == p]
