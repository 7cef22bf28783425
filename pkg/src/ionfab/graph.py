"""Multi-tier qubit interaction graph of a machine.

Three edge tiers:

* COLLECTIVE: any pair inside one ELU (motional bus makes a complete graph),
* FAST: pairs within the ELU's fast-gate distance; always a subset of the
  collective tier,
* PHOTONIC: communication-ion to communication-ion edges between distinct
  ELUs; never created by the constructor, added dynamically via
  :meth:`InteractionGraph.with_photonic_links`.

Graphs are immutable once built.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass

from .arch import ArchitectureSpec
from .errors import DomainError
from .rates import elu_gate_rate, mean_connection_rate, slow_gate_time

# Speed ratio of proximity gates to collective-bus gates.
FAST_GATE_SPEEDUP = 5.0


class Tier(enum.Enum):
    FAST = "fast"
    COLLECTIVE = "collective"
    PHOTONIC = "photonic"


class Role(enum.Enum):
    MEMORY = "memory"
    COMMUNICATION = "communication"


@dataclass(frozen=True)
class QubitNode:
    elu_id: str
    position: int
    role: Role

    @property
    def label(self) -> str:
        return f"{self.elu_id}.{self.position}"


@dataclass(frozen=True)
class Edge:
    a: int  # node indices
    b: int
    tier: Tier
    time_cost: float  # s
    fidelity: float


@dataclass(frozen=True)
class InteractionGraph:
    nodes: tuple[QubitNode, ...]
    edges: tuple[Edge, ...]

    def node_index(self, elu_id: str, position: int) -> int:
        for i, n in enumerate(self.nodes):
            if n.elu_id == elu_id and n.position == position:
                return i
        raise KeyError(f"no qubit {elu_id}.{position}")

    def tier_edges(self, tier: Tier) -> list[Edge]:
        return [e for e in self.edges if e.tier is tier]

    def with_photonic_links(self, links, spec: ArchitectureSpec) -> "InteractionGraph":
        """New graph with PHOTONIC edges added between communication ions.

        ``links`` is an iterable of ((elu_a, pos_a), (elu_b, pos_b)) pairs.
        Edge time cost is the expected pair wait 1/mean_connection_rate plus
        the teleport and classical overheads.
        """
        rate = mean_connection_rate(spec.attempt_rate, spec.collection_fraction,
                                    spec.detector_efficiency)
        wait = 1.0 / rate + spec.teleport_overhead_time + spec.classical_latency
        new_edges = list(self.edges)
        for (elu_a, pos_a), (elu_b, pos_b) in links:
            ia = self.node_index(elu_a, pos_a)
            ib = self.node_index(elu_b, pos_b)
            na, nb = self.nodes[ia], self.nodes[ib]
            if na.elu_id == nb.elu_id:
                raise DomainError("photonic link endpoints must be in distinct ELUs")
            if na.role is not Role.COMMUNICATION or nb.role is not Role.COMMUNICATION:
                raise DomainError("photonic link endpoints must be communication ions")
            new_edges.append(Edge(ia, ib, Tier.PHOTONIC, wait,
                                  spec.two_qubit_gate_fidelity))
        return InteractionGraph(self.nodes, tuple(new_edges))


def build_interaction_graph(spec: ArchitectureSpec) -> InteractionGraph:
    """Static two-tier graph of a machine; photonic edges are added later."""
    nodes: list[QubitNode] = []
    edges: list[Edge] = []
    for elu in spec.elus:
        comm = set(elu.comm_ion_indices)
        offset = len(nodes)
        for pos in range(elu.n_ions):
            role = Role.COMMUNICATION if pos in comm else Role.MEMORY
            nodes.append(QubitNode(elu.id, pos, role))
        tau_slow = slow_gate_time(elu_gate_rate(spec, elu.id))
        tau_fast = tau_slow / FAST_GATE_SPEEDUP
        fid = spec.two_qubit_gate_fidelity
        for i in range(elu.n_ions):
            for j in range(i + 1, elu.n_ions):
                edges.append(Edge(offset + i, offset + j, Tier.COLLECTIVE,
                                  tau_slow, fid))
                if j - i <= elu.fast_gate_distance:
                    edges.append(Edge(offset + i, offset + j, Tier.FAST,
                                      tau_fast, fid))
    return InteractionGraph(tuple(nodes), tuple(edges))


@dataclass(frozen=True)
class DistanceProfile:
    histogram: dict[int, int]   # hop count -> number of unordered pairs
    unreachable_pairs: int

    @property
    def max_distance(self) -> int:
        return max(self.histogram) if self.histogram else 0


_PROFILE_TIERS = {
    "fast": (Tier.FAST,),
    "collective": (Tier.COLLECTIVE,),
    "fast+photonic": (Tier.FAST, Tier.PHOTONIC),
}


def graph_distance_profile(g: InteractionGraph, tier: str) -> DistanceProfile:
    """Histogram of shortest-path hop counts between all qubit pairs.

    ``tier`` is one of ``fast``, ``collective``, ``fast+photonic``.
    """
    try:
        tiers = _PROFILE_TIERS[tier]
    except KeyError:
        raise DomainError(
            f"tier must be one of {sorted(_PROFILE_TIERS)}, got {tier!r}") from None
    n = len(g.nodes)
    adj: list[list[int]] = [[] for _ in range(n)]
    for e in g.edges:
        if e.tier in tiers:
            adj[e.a].append(e.b)
            adj[e.b].append(e.a)
    hist: dict[int, int] = {}
    unreachable = 0
    for src in range(n):
        dist = [-1] * n
        dist[src] = 0
        q = deque([src])
        while q:
            u = q.popleft()
            for w in adj[u]:
                if dist[w] < 0:
                    dist[w] = dist[u] + 1
                    q.append(w)
        for other in range(src + 1, n):
            if dist[other] < 0:
                unreachable += 1
            else:
                hist[dist[other]] = hist.get(dist[other], 0) + 1
    return DistanceProfile(dict(sorted(hist.items())), unreachable)


def to_dot(g: InteractionGraph, tier: str | None = None) -> str:
    """Graph in DOT text form; ``tier`` limits output to one tier name."""
    lines = ["graph ionfab {"]
    for node in g.nodes:
        lines.append(f'  "{node.label}" [role={node.role.value}];')
    colors = {Tier.FAST: "red", Tier.COLLECTIVE: "blue", Tier.PHOTONIC: "purple"}
    for e in g.edges:
        if tier is not None and e.tier.value != tier:
            continue
        a, b = g.nodes[e.a].label, g.nodes[e.b].label
        lines.append(f'  "{a}" -- "{b}" [tier={e.tier.value}, color={colors[e.tier]}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
