"""Dependency graph over CPF targets and a deterministic evaluation order."""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Set, Tuple

from .errors import CycleError
from .model import DERIVED, INTERM, OBSERV, STATE, DynamicRef, Expr, Var, walk

CLASS_RANK = {DERIVED: 0, INTERM: 1, STATE: 2, OBSERV: 3}


@dataclass(frozen=True)
class DependencyGraph:
    """``edges[v]`` lists the CPF targets read by the CPF of ``v``."""
    nodes: Tuple[str, ...]
    classes: Dict[str, str]
    edges: Dict[str, Tuple[str, ...]]
    roots: Dict[str, Tuple[str, ...]]   # non-CPF keys each CPF reads

    def successors(self) -> Dict[str, List[str]]:
        out: Dict[str, List[str]] = {n: [] for n in self.nodes}
        for v, preds in self.edges.items():
            for u in preds:
                out[u].append(v)
        return out

    def edge_list(self) -> List[Tuple[str, str]]:
        return [(u, v) for v in self.nodes for u in self.edges[v]]


@dataclass(frozen=True)
class EvaluationOrder:
    order: Tuple[str, ...]
    levels: Dict[str, int]

    def __iter__(self):
        return iter(self.order)

    def __len__(self) -> int:
        return len(self.order)


def references(expr: Expr) -> Set[str]:
    """Every valuation key an expression may read."""
    keys: Set[str] = set()
    for node in walk(expr):
        if isinstance(node, Var):
            keys.add(node.key)
        elif isinstance(node, DynamicRef):
            keys.update(k for _, k in node.table)
    return keys


def graph_from_cpfs(cpfs: Mapping[str, Expr],
                    classes: Mapping[str, str]) -> DependencyGraph:
    """``classes`` gives the fluent class of each target key."""
    nodes = tuple(cpfs)
    targets = set(nodes)
    edges, roots = {}, {}
    for v, expr in cpfs.items():
        refs = references(expr)
        edges[v] = tuple(sorted(r for r in refs if r in targets))
        roots[v] = tuple(sorted(r for r in refs if r not in targets))
    return DependencyGraph(nodes, dict(classes), edges, roots)


def build_graph(grounded) -> DependencyGraph:
    return graph_from_cpfs(grounded.cpfs,
                           {k: grounded.cpf_class(k) for k in grounded.cpfs})


def find_cycle(graph: DependencyGraph) -> Optional[List[str]]:
    """One directed cycle ``[a, b, ...]`` (``a`` not repeated), or None.

    Iterative DFS with white/grey/black colouring.
    """
    succ = graph.successors()
    colour = {n: 0 for n in graph.nodes}
    for start in sorted(graph.nodes):
        if colour[start]:
            continue
        colour[start] = 1
        path = [start]
        stack = [iter(sorted(succ[start]))]
        while stack:
            nxt = next(stack[-1], None)
            if nxt is None:
                colour[path.pop()] = 2
                stack.pop()
            elif colour[nxt] == 1:
                return path[path.index(nxt):]
            elif colour[nxt] == 0:
                colour[nxt] = 1
                path.append(nxt)
                stack.append(iter(sorted(succ[nxt])))
    return None


def topological_order(graph: DependencyGraph) -> EvaluationOrder:
    """Kahn's algorithm; ready nodes are taken by class rank, then name."""
    succ = graph.successors()
    indegree = {n: len(graph.edges[n]) for n in graph.nodes}
    rank = {n: CLASS_RANK.get(graph.classes.get(n), 4) for n in graph.nodes}
    ready = [(rank[n], n) for n in graph.nodes if indegree[n] == 0]
    heapq.heapify(ready)
    order: List[str] = []
    levels: Dict[str, int] = {}
    while ready:
        _, n = heapq.heappop(ready)
        order.append(n)
        levels[n] = 1 + max((levels[u] for u in graph.edges[n]), default=-1)
        for v in succ[n]:
            indegree[v] -= 1
            if indegree[v] == 0:
                heapq.heappush(ready, (rank[v], v))
    if len(order) != len(graph.nodes):
        cycle = find_cycle(graph)
        raise CycleError(cycle or sorted(n for n in graph.nodes if indegree[n] > 0))
    return EvaluationOrder(tuple(order), levels)


def schedule(grounded) -> EvaluationOrder:
    """Compute and cache the evaluation order of a grounded model."""
    if grounded.order is None:
        grounded.order = topological_order(build_graph(grounded))
    return grounded.order
