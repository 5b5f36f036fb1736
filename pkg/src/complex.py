"""The transition subcomplex S as a graph, the edge dynamics g on it and the
eventual range ER.

S is the union of the transition edges e_ab, one per allowed pair ab, joining
the exit node of a to the entry node of b. Components and Betti numbers are
computed on the undirected graph; g uses the edge orientation.
"""
import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
from networkx.utils import UnionFind

from .errors import InternalInvariantError, NotPrimitiveError
from .substitution import Substitution

logger = logging.getLogger(__name__)

Pair = Tuple[int, int]
Node = Tuple[str, int]

EXIT = "exit"
ENTRY = "entry"


def exit_node(a: int) -> Node:
    return (EXIT, a)


def entry_node(b: int) -> Node:
    return (ENTRY, b)


@dataclass(frozen=True)
class TransitionComplex:
    """Bipartite graph on exit/entry nodes; letter edges are kept for drawing K only"""
    alphabet: Tuple[str, ...]
    edges: Tuple[Pair, ...]

    @property
    def d(self) -> int:
        return len(self.alphabet)

    @property
    def nodes(self) -> Tuple[Node, ...]:
        return tuple(exit_node(a) for a in range(self.d)) + tuple(entry_node(b) for b in range(self.d))

    @property
    def letter_edges(self) -> Tuple[Tuple[Node, Node], ...]:
        return tuple((entry_node(a), exit_node(a)) for a in range(self.d))

    @staticmethod
    def endpoints(pair: Pair) -> Tuple[Node, Node]:
        return exit_node(pair[0]), entry_node(pair[1])

    def node_name(self, node: Node) -> str:
        kind, letter = node
        return f"{'x' if kind == EXIT else 'n'}_{self.alphabet[letter]}"

    def label(self, pair: Pair) -> str:
        a, b = self.alphabet[pair[0]], self.alphabet[pair[1]]
        if len(a) == 1 and len(b) == 1:
            return a + b
        return f"{a} {b}"

    def graph(self, edges: Optional[Iterable[Pair]] = None) -> nx.Graph:
        """Undirected graph of the given transition edges and their incident nodes"""
        graph = nx.Graph()
        for pair in (self.edges if edges is None else edges):
            u, v = self.endpoints(pair)
            graph.add_edge(u, v, pair=pair)
        return graph


@dataclass(frozen=True)
class Component:
    nodes: FrozenSet[Node]
    edges: Tuple[Pair, ...]

    @property
    def betti(self) -> int:
        return len(self.edges) - len(self.nodes) + 1


@dataclass(frozen=True)
class ComponentDecomposition:
    components: Tuple[Component, ...]
    p: int
    b1_S: int
    er_components: Tuple[Component, ...] = ()
    k: Optional[int] = None
    l: Optional[int] = None

    def component_of(self, pair: Pair) -> int:
        for i, component in enumerate(self.components):
            if pair in component.edges:
                return i
        raise KeyError(pair)


@dataclass(frozen=True)
class Cycle:
    """A g-cycle of edges, starting at its smallest edge"""
    edges: Tuple[Pair, ...]

    @property
    def period(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class EdgeDynamics:
    g_map: Dict[Pair, Pair]
    er_edges: FrozenSet[Pair] = frozenset()
    cycles: Tuple[Cycle, ...] = ()


@dataclass(frozen=True)
class AsymptoticReport:
    cycles: Tuple[Cycle, ...]
    right_branching: Tuple[Tuple[int, Tuple[Pair, ...]], ...] = ()
    left_branching: Tuple[Tuple[int, Tuple[Pair, ...]], ...] = ()

    @property
    def carriers(self) -> Tuple[int, ...]:
        letters = {a for a, _ in self.right_branching} | {b for b, _ in self.left_branching}
        return tuple(sorted(letters))


def build_transition_complex(pairs: Iterable[Sequence[int]], alphabet: Sequence[str]) -> TransitionComplex:
    edges = tuple(sorted({(int(p[0]), int(p[1])) for p in pairs}))
    if not edges:
        raise NotPrimitiveError("no allowed transitions")
    d = len(alphabet)
    for a, b in edges:
        if not (0 <= a < d and 0 <= b < d):
            raise InternalInvariantError(f"transition ({a}, {b}) outside the alphabet")

    leaving = {a for a, _ in edges}
    arriving = {b for _, b in edges}
    for letter in range(d):
        if letter not in leaving and letter not in arriving:
            raise NotPrimitiveError(f"letter {alphabet[letter]!r} occurs in no allowed transition")
        if letter not in leaving or letter not in arriving:
            side = "followed" if letter not in leaving else "preceded"
            raise NotPrimitiveError(f"letter {alphabet[letter]!r} is never {side} by another letter")

    return TransitionComplex(tuple(alphabet), edges)


def _components(nodes: Iterable[Node], edges: Sequence[Pair]) -> Tuple[Component, ...]:
    forest = UnionFind(nodes)
    for pair in edges:
        forest.union(*TransitionComplex.endpoints(pair))

    grouped_edges: Dict[Node, List[Pair]] = {}
    for pair in edges:
        grouped_edges.setdefault(forest[exit_node(pair[0])], []).append(pair)

    components = []
    for members in forest.to_sets():
        root = forest[next(iter(members))]
        components.append(Component(frozenset(members), tuple(sorted(grouped_edges.get(root, ())))))
    # ordered by smallest edge label; edgeless nodes would sort last
    components.sort(key=lambda c: (not c.edges, c.edges[:1], sorted(c.nodes)))
    return tuple(components)


def decompose_components(c: TransitionComplex, sub: Optional[Iterable[Pair]] = None) -> ComponentDecomposition:
    components = _components(c.nodes, c.edges)
    p = len(components)
    b1 = len(c.edges) - len(c.nodes) + p
    if sub is None:
        return ComponentDecomposition(components, p, b1)

    sub_edges = sorted(set(sub))
    sub_nodes = {node for pair in sub_edges for node in c.endpoints(pair)}
    er_components = _components(sub_nodes, sub_edges)
    k = len(er_components)
    l = len(sub_edges) - len(sub_nodes) + k
    return ComponentDecomposition(components, p, b1, er_components, k, l)


def cycle_rank(c: TransitionComplex, edges: Iterable[Pair]) -> int:
    """First Betti number from a spanning-forest cycle basis"""
    return len(nx.cycle_basis(c.graph(edges)))


def g_edge_map(s: Substitution, pairs: Iterable[Pair]) -> EdgeDynamics:
    """g(e_ab) = e_cd with c the last letter of phi(a) and d the first letter of phi(b)"""
    allowed = set(pairs)
    g_map: Dict[Pair, Pair] = {}
    for a, b in sorted(allowed):
        image = (s.last_letter(a), s.first_letter(b))
        if image not in allowed:
            raise InternalInvariantError(
                f"g sends e_{s.label((a, b))} to a disallowed transition {s.label(image)}", stage="g")
        g_map[(a, b)] = image
    return EdgeDynamics(g_map)


def _cycle_from(g_map: Dict[Pair, Pair], start: Pair) -> Cycle:
    edges = [start]
    current = g_map[start]
    while current != start:
        edges.append(current)
        current = g_map[current]
    return Cycle(tuple(edges))


def eventual_range(d: EdgeDynamics, c: TransitionComplex) -> EdgeDynamics:
    """ER by iterating images and, independently, as the periodic edges of g"""
    image = set(c.edges)
    while True:
        next_image = {d.g_map[pair] for pair in image}
        if next_image == image:
            break
        image = next_image

    functional = nx.DiGraph()
    functional.add_nodes_from(d.g_map)
    functional.add_edges_from(d.g_map.items())
    cycles = sorted(
        (_cycle_from(d.g_map, min(members)) for members in nx.simple_cycles(functional)),
        key=lambda cycle: cycle.edges[0],
    )
    periodic = {pair for cycle in cycles for pair in cycle.edges}

    if periodic != image:
        raise InternalInvariantError(
            f"eventual range by iteration ({len(image)} edges) differs from periodic edges ({len(periodic)})",
            stage="eventual range")

    logger.debug(f"Eventual range has {len(image)} edges in {len(cycles)} g-cycles")
    return EdgeDynamics(d.g_map, frozenset(image), tuple(cycles))


def is_bijective_on_er(d: EdgeDynamics) -> bool:
    images = [d.g_map[pair] for pair in d.er_edges]
    return set(images) == set(d.er_edges) and len(images) == len(set(images))


def asymptotic_cycles(d: EdgeDynamics) -> AsymptoticReport:
    """g-cycles on ER plus the letters where ER branches (pairs of asymptotic composants)"""
    outgoing: Dict[int, List[Pair]] = {}
    incoming: Dict[int, List[Pair]] = {}
    for a, b in sorted(d.er_edges):
        outgoing.setdefault(a, []).append((a, b))
        incoming.setdefault(b, []).append((a, b))

    right = tuple((a, tuple(edges)) for a, edges in sorted(outgoing.items()) if len(edges) > 1)
    left = tuple((b, tuple(edges)) for b, edges in sorted(incoming.items()) if len(edges) > 1)
    return AsymptoticReport(d.cycles, right, left)
