"""Qubit assignment and ASAP gate scheduling against the pair supply.

Program qubits live on memory ions (communication ions are reserved for the
photonic interface). Scheduling processes operations in program order and
starts each as soon as every ion it touches is free, which preserves
program-order dependencies between operations sharing a qubit.

Durations:

* single-qubit gates: the host ELU's ``single_qubit_gate_time``;
* two-qubit gates inside one ELU: tau_fast = tau_slow/kappa on a fast edge
  (positions within the fast-gate distance), else tau_slow = 2*pi/R_gate(N);
* GLOBAL_MS: tau_slow, operands confined to one ELU;
* MEASURE: the species detection time (plus the shuttle cost when
  ``measure_isolation`` is on and another ion of the ELU is busy);
* remote two-qubit gates: one entangled pair (waited for in BUFFERED mode)
  + teleport_overhead_time + the slower side's local gate-and-measure
  sequence + classical_latency. Each side charges one local two-qubit gate
  between the program ion and its nearest communication ion plus one
  detection; the two sides run in parallel.

The fidelity estimate is the product of ``two_qubit_gate_fidelity`` over
entangling operations (swaps count as three) times exp(-idle/T2) per qubit,
where idle time is measured from circuit start to the qubit's last
operation, minus its busy time.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .arch import ArchitectureSpec, EluSpec
from .circuits import TWO_QUBIT_KINDS, Circuit, GateKind, GateOp
from .errors import CapacityError, DomainError
from .netsim import SwitchConfig, make_link, run_sim
from .rates import elu_gate_rate, link_success_probability, slow_gate_time
from .graph import FAST_GATE_SPEEDUP

# A swap decomposes into three proximity CNOTs.
SWAP_GATE_COUNT = 3

BRUTE_FORCE_MAX_QUBITS = 8
BRUTE_FORCE_MAX_ELUS = 3


@dataclass(frozen=True)
class QubitMap:
    """Injective program-qubit -> (ELU id, chain position) assignment."""

    mapping: dict[int, tuple[str, int]]

    def elu_of(self, q: int) -> str:
        return self.mapping[q][0]

    def validate(self, circuit: Circuit, spec: ArchitectureSpec) -> None:
        if set(self.mapping) != set(range(circuit.n_qubits)):
            raise DomainError("map must cover exactly the circuit's qubits")
        targets = list(self.mapping.values())
        if len(set(targets)) != len(targets):
            raise DomainError("map is not injective")
        memory = {e.id: set(e.memory_positions()) for e in spec.elus}
        for q, (eid, pos) in self.mapping.items():
            if eid not in memory:
                raise DomainError(f"q{q} mapped to unknown ELU {eid!r}")
            if pos not in memory[eid]:
                raise DomainError(
                    f"q{q} mapped to {eid}.{pos}, not a memory ion position")


def crossing_count(circuit: Circuit, qmap: QubitMap) -> int:
    """Multi-qubit operations whose operands span more than one ELU."""
    return sum(
        1 for op in circuit.ops
        if op.is_multi_qubit
        and len({qmap.elu_of(q) for q in op.operands}) > 1
    )


def _fill_positions(order: list[int], elu_for: dict[int, str],
                    spec: ArchitectureSpec) -> QubitMap:
    cursors = {e.id: iter(e.memory_positions()) for e in spec.elus}
    mapping = {q: (elu_for[q], next(cursors[elu_for[q]])) for q in order}
    return QubitMap(mapping)


def assign_qubits(circuit: Circuit, spec: ArchitectureSpec,
                  strategy: str = "greedy_interaction_cut",
                  user_map: dict[int, tuple[str, int]] | None = None) -> QubitMap:
    """Map program qubits to memory ions.

    ``round_robin`` deals qubits across ELUs cyclically;
    ``greedy_interaction_cut`` greedily minimizes entangling operations that
    cross ELUs, placing heavy qubits first; ``user`` validates a given map.
    """
    capacity = {e.id: e.memory_ion_count for e in spec.elus}
    if circuit.n_qubits > sum(capacity.values()):
        raise CapacityError(
            f"{circuit.n_qubits} qubits exceed {sum(capacity.values())} memory ions")

    if strategy == "user":
        if user_map is None:
            raise DomainError("user strategy requires a map")
        qmap = QubitMap(dict(user_map))
        qmap.validate(circuit, spec)
        return qmap

    elu_ids = spec.elu_ids()
    if strategy == "round_robin":
        elu_for: dict[int, str] = {}
        used = {eid: 0 for eid in elu_ids}
        cursor = 0
        for q in range(circuit.n_qubits):
            for _ in range(len(elu_ids)):
                eid = elu_ids[cursor % len(elu_ids)]
                cursor += 1
                if used[eid] < capacity[eid]:
                    used[eid] += 1
                    elu_for[q] = eid
                    break
        return _fill_positions(sorted(elu_for), elu_for, spec)

    if strategy == "greedy_interaction_cut":
        weights = circuit.interaction_weights()
        degree = {q: 0 for q in range(circuit.n_qubits)}
        for (a, b), w in weights.items():
            degree[a] += w
            degree[b] += w
        order = sorted(degree, key=lambda q: (-degree[q], q))
        elu_for = {}
        used = {eid: 0 for eid in elu_ids}
        for q in order:
            best_eid, best_key = None, None
            for eid in elu_ids:
                if used[eid] >= capacity[eid]:
                    continue
                cut = sum(w for (a, b), w in weights.items()
                          if (a == q and b in elu_for and elu_for[b] != eid)
                          or (b == q and a in elu_for and elu_for[a] != eid))
                key = (cut, -(capacity[eid] - used[eid]), elu_ids.index(eid))
                if best_key is None or key < best_key:
                    best_key, best_eid = key, eid
            elu_for[q] = best_eid
            used[best_eid] += 1
        return _fill_positions(sorted(elu_for), elu_for, spec)

    raise DomainError(f"unknown assignment strategy {strategy!r}")


def brute_force_best_map(circuit: Circuit,
                         spec: ArchitectureSpec) -> tuple[QubitMap, int]:
    """Exhaustive minimum-crossing assignment; the optimality oracle.

    Only the qubit -> ELU partition matters for crossing counts, so the
    search enumerates ELU assignment vectors in lexicographic order (ties
    resolved to the first minimum found).
    """
    if circuit.n_qubits > BRUTE_FORCE_MAX_QUBITS:
        raise DomainError(
            f"{circuit.n_qubits} qubits exceed oracle cap {BRUTE_FORCE_MAX_QUBITS}")
    if len(spec.elus) > BRUTE_FORCE_MAX_ELUS:
        raise DomainError(
            f"{len(spec.elus)} ELUs exceed oracle cap {BRUTE_FORCE_MAX_ELUS}")
    capacity = {e.id: e.memory_ion_count for e in spec.elus}
    if circuit.n_qubits > sum(capacity.values()):
        raise CapacityError("circuit does not fit on the machine")

    elu_ids = spec.elu_ids()
    spans = [tuple(op.operands) for op in circuit.ops if op.is_multi_qubit]
    best_vec, best_cross = None, None
    for vec in itertools.product(range(len(elu_ids)), repeat=circuit.n_qubits):
        counts = [0] * len(elu_ids)
        for e in vec:
            counts[e] += 1
        if any(counts[i] > capacity[elu_ids[i]] for i in range(len(elu_ids))):
            continue
        cross = sum(1 for ops in spans if len({vec[q] for q in ops}) > 1)
        if best_cross is None or cross < best_cross:
            best_vec, best_cross = vec, cross
    if best_vec is None:
        raise CapacityError("no feasible assignment")
    elu_for = {q: elu_ids[best_vec[q]] for q in range(circuit.n_qubits)}
    return _fill_positions(sorted(elu_for), elu_for, spec), best_cross


# ---------------------------------------------------------------------------
# Pair supply
# ---------------------------------------------------------------------------

class IdealPairSupply:
    """Pairs are always available: delivery at request time."""

    def request(self, pair: tuple[str, str], t: float) -> float:
        return t


class BufferedPairSupply:
    """Pair deliveries taken from a seeded photonic-network simulation.

    The success stream per ELU pair is generated by the network simulator
    over a demand-free run with one static link per needed pair (nearest
    free communication ions) and consumed FIFO by the scheduler. The stream
    does not model the scheduler's own buffer depletion, which is exact
    whenever the buffer capacity is not binding. Deterministic per seed:
    horizon extensions rerun the same seed, whose event prefix is stable.
    """

    def __init__(self, spec: ArchitectureSpec, pairs: set[tuple[str, str]],
                 seed: int, expected_requests: int = 16):
        self.spec = spec
        self.seed = seed
        self.pairs = sorted(pairs)
        p = link_success_probability(spec.collection_fraction,
                                     spec.detector_efficiency)
        if p <= 0:
            raise DomainError("zero link success probability, pairs can never arrive")
        self.analytic_rate = spec.attempt_rate * p
        self.config = self._build_config()
        self.horizon = max(
            2.0 * expected_requests / self.analytic_rate, 10.0 / self.analytic_rate)
        self.streams: dict[tuple[str, str], list[float]] = {}
        self.cursor: dict[tuple[str, str], int] = {pair: 0 for pair in self.pairs}
        self._regenerate()

    def _build_config(self) -> SwitchConfig:
        free: dict[str, list[int]] = {
            e.id: sorted(e.comm_ion_indices) for e in self.spec.elus}
        links = set()
        for a, b in self.pairs:
            if not free[a] or not free[b]:
                raise CapacityError(
                    f"not enough communication ions to link {a} and {b}")
            links.add(make_link((a, free[a].pop(0)), (b, free[b].pop(0))))
        return SwitchConfig(frozenset(links))

    def _regenerate(self) -> None:
        result = run_sim(self.spec, [(0.0, self.config)], [], self.horizon,
                         self.seed, collect_success_times=True)
        self.streams = {pair: result.success_times[pair] for pair in self.pairs}

    def request(self, pair: tuple[str, str], t: float) -> float:
        pair = tuple(sorted(pair))
        if pair not in self.cursor:
            raise DomainError(f"unplanned ELU pair {pair}")
        lifetime = self.spec.pair_lifetime
        for _ in range(40):
            stream = self.streams[pair]
            while self.cursor[pair] < len(stream):
                s = stream[self.cursor[pair]]
                self.cursor[pair] += 1
                if lifetime is not None and s + lifetime <= t:
                    continue  # pair would have expired before this request
                return max(t, s)
            self.horizon *= 2.0
            self._regenerate()
        raise DomainError(f"pair supply for {pair} exhausted; rate too low?")


# ---------------------------------------------------------------------------
# Scheduling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TimelineEntry:
    start: float
    duration: float
    op: GateOp | None  # None for inserted swaps
    ions: tuple[tuple[str, int], ...]  # every physical ion held by the operation
    elus: tuple[str, ...]
    used_pair: bool = False

    @property
    def end(self) -> float:
        return self.start + self.duration

    @property
    def label(self) -> str:
        return self.op.kind.value if self.op is not None else "SWAP"

    @property
    def operand_text(self) -> str:
        if self.op is None:
            return ""
        return " ".join(f"q{q}" for q in self.op.operands)


@dataclass(frozen=True)
class FidelityBreakdown:
    total: float
    gate_factor: float
    idle_factor: float
    per_qubit_idle: dict[int, float] = field(default_factory=dict)


@dataclass(frozen=True)
class ScheduleResult:
    timeline: tuple[TimelineEntry, ...]
    makespan: float
    pairs_consumed: int
    swaps_inserted: int
    fidelity_estimate: float
    per_qubit_idle: dict[int, float]
    qmap: QubitMap
    mode: str
    seed: int | None = None

    def timeline_csv(self) -> str:
        lines = ["start_s,dur_s,gate,operands,elus,resource"]
        for e in self.timeline:
            ions = " ".join(f"{eid}.{pos}" for eid, pos in e.ions)
            lines.append(f"{e.start!r},{e.duration!r},{e.label},"
                         f"{e.operand_text},{'+'.join(e.elus)},{ions}")
        return "\n".join(lines) + "\n"


class _EluContext:
    def __init__(self, spec: ArchitectureSpec, elu: EluSpec):
        self.elu = elu
        self.tau_slow = slow_gate_time(elu_gate_rate(spec, elu.id))
        self.tau_fast = self.tau_slow / FAST_GATE_SPEEDUP

    def two_qubit_time(self, pos_a: int, pos_b: int) -> float:
        if abs(pos_a - pos_b) <= self.elu.fast_gate_distance:
            return self.tau_fast
        return self.tau_slow


def schedule(
    circuit: Circuit,
    qmap: QubitMap,
    spec: ArchitectureSpec,
    pair_supply_mode: str = "ideal",
    seed: int | None = None,
    strict_proximity: bool = False,
    measure_isolation: bool = False,
    comm_attempts_during_gates: bool = True,
) -> ScheduleResult:
    """ASAP list schedule of a mapped circuit.

    ``pair_supply_mode`` is ``ideal`` (pairs always available) or
    ``buffered`` (pair waits from the seeded network simulation; ``seed``
    required). ``strict_proximity`` forbids collective-tier gates and
    inserts chain swaps instead. ``comm_attempts_during_gates=False`` makes
    remote operations wait until both ELUs are fully idle before requesting
    a pair (communication exclusivity).
    """
    qmap.validate(circuit, spec)
    contexts = {e.id: _EluContext(spec, e) for e in spec.elus}
    position_of = dict(qmap.mapping)  # mutates under strict-proximity swaps
    qubit_at: dict[tuple[str, int], int] = {
        ion: q for q, ion in position_of.items()}

    if pair_supply_mode == "ideal":
        supply = IdealPairSupply()
    elif pair_supply_mode == "buffered":
        if seed is None:
            raise DomainError("buffered mode requires a seed")
        needed = {
            tuple(sorted({qmap.elu_of(q) for q in op.operands}))
            for op in circuit.ops
            if op.kind in TWO_QUBIT_KINDS
            and len({qmap.elu_of(q) for q in op.operands}) > 1
        }
        remote_ops = sum(
            1 for op in circuit.ops
            if op.kind in TWO_QUBIT_KINDS
            and len({qmap.elu_of(q) for q in op.operands}) > 1)
        supply = (BufferedPairSupply(spec, needed, seed, expected_requests=max(remote_ops, 1))
                  if needed else IdealPairSupply())
    else:
        raise DomainError(f"unknown pair supply mode {pair_supply_mode!r}")

    ion_free: dict[tuple[str, int], float] = {}
    for elu in spec.elus:
        for pos in range(elu.n_ions):
            ion_free[(elu.id, pos)] = 0.0

    timeline: list[TimelineEntry] = []
    pairs_consumed = 0
    swaps_inserted = 0
    gate_factor = 1.0
    busy: dict[int, float] = {q: 0.0 for q in range(circuit.n_qubits)}
    last_end: dict[int, float] = {q: 0.0 for q in range(circuit.n_qubits)}

    def place(start: float, duration: float, op: GateOp,
              ions: list[tuple[str, int]], used_pair: bool = False) -> None:
        nonlocal timeline
        for ion in ions:
            ion_free[ion] = start + duration
        elus = tuple(sorted({eid for eid, _ in ions}))
        timeline.append(TimelineEntry(start, duration, op, tuple(ions), elus,
                                      used_pair))
        for q in op.operands:
            busy[q] += duration
            last_end[q] = start + duration

    def elu_busy_until(eid: str) -> float:
        n = contexts[eid].elu.n_ions
        return max(ion_free[(eid, pos)] for pos in range(n))

    def nearest_comm(eid: str, pos: int) -> int:
        comm = contexts[eid].elu.comm_ion_indices
        return min(comm, key=lambda c: (abs(c - pos), c))

    def do_swaps(op: GateOp, eid: str, ready: float) -> float:
        """Move operand 0 along the chain until within fast-gate distance.

        Each swap exchanges the qubit with its chain neighbor (occupied or
        not) in three proximity gates. Returns the time after the last swap.
        """
        nonlocal swaps_inserted, gate_factor
        ctx = contexts[eid]
        q0, q1 = op.operands
        step = 1 if position_of[q1][1] > position_of[q0][1] else -1
        t = ready
        while abs(position_of[q1][1] - position_of[q0][1]) > ctx.elu.fast_gate_distance:
            cur = position_of[q0][1]
            nxt = cur + step
            start = max(t, ion_free[(eid, cur)], ion_free[(eid, nxt)])
            dur = SWAP_GATE_COUNT * ctx.tau_fast
            ion_free[(eid, cur)] = start + dur
            ion_free[(eid, nxt)] = start + dur
            other = qubit_at.get((eid, nxt))
            qubit_at.pop((eid, cur), None)
            if other is not None:
                position_of[other] = (eid, cur)
                qubit_at[(eid, cur)] = other
                busy[other] += dur
                last_end[other] = start + dur
            position_of[q0] = (eid, nxt)
            qubit_at[(eid, nxt)] = q0
            gate_factor *= spec.two_qubit_gate_fidelity ** SWAP_GATE_COUNT
            busy[q0] += dur
            last_end[q0] = start + dur
            timeline.append(TimelineEntry(start, dur, None,
                                          ((eid, cur), (eid, nxt)), (eid,)))
            t = start + dur
            swaps_inserted += 1
        return t

    for op in circuit.ops:
        touched = [position_of[q] for q in op.operands]
        elus = {eid for eid, _ in touched}

        if op.kind in (GateKind.X, GateKind.H, GateKind.RZ):
            (eid, pos) = touched[0]
            start = ion_free[(eid, pos)]
            place(start, contexts[eid].elu.single_qubit_gate_time, op, touched)

        elif op.kind is GateKind.MEASURE:
            (eid, pos) = touched[0]
            start = ion_free[(eid, pos)]
            duration = spec.species.detection_time
            if measure_isolation:
                others_busy = any(
                    ion_free[(eid, p)] > start
                    for p in range(contexts[eid].elu.n_ions) if p != pos)
                if others_busy:
                    duration += contexts[eid].elu.shuttle_cost_time
            place(start, duration, op, touched)

        elif op.kind is GateKind.GLOBAL_MS:
            if len(elus) > 1:
                raise DomainError(
                    f"GLOBAL_MS spans ELUs {sorted(elus)} after mapping")
            eid = next(iter(elus))
            start = max(ion_free[ion] for ion in touched)
            place(start, contexts[eid].tau_slow, op, touched)
            gate_factor *= spec.two_qubit_gate_fidelity

        elif len(elus) == 1:
            eid = next(iter(elus))
            ctx = contexts[eid]
            ready = max(ion_free[ion] for ion in touched)
            if strict_proximity and abs(touched[0][1] - touched[1][1]) > ctx.elu.fast_gate_distance:
                ready = do_swaps(op, eid, ready)
                touched = [position_of[q] for q in op.operands]
                ready = max(ready, *(ion_free[ion] for ion in touched))
            start = ready
            duration = ctx.two_qubit_time(touched[0][1], touched[1][1])
            place(start, duration, op, touched)
            gate_factor *= spec.two_qubit_gate_fidelity

        else:
            # Remote two-qubit gate: consume one pair, teleport.
            (eid_a, pos_a), (eid_b, pos_b) = touched
            ready = max(ion_free[(eid_a, pos_a)], ion_free[(eid_b, pos_b)])
            if not comm_attempts_during_gates:
                ready = max(ready, elu_busy_until(eid_a), elu_busy_until(eid_b))
            delivery = supply.request(tuple(sorted((eid_a, eid_b))), ready)
            comm_a = (eid_a, nearest_comm(eid_a, pos_a))
            comm_b = (eid_b, nearest_comm(eid_b, pos_b))
            start = max(delivery, ion_free[comm_a], ion_free[comm_b])
            side_a = (contexts[eid_a].two_qubit_time(pos_a, comm_a[1])
                      + spec.species.detection_time)
            side_b = (contexts[eid_b].two_qubit_time(pos_b, comm_b[1])
                      + spec.species.detection_time)
            duration = (spec.teleport_overhead_time + max(side_a, side_b)
                        + spec.classical_latency)
            place(start, duration, op, touched + [comm_a, comm_b], used_pair=True)
            pairs_consumed += 1
            gate_factor *= spec.two_qubit_gate_fidelity

    makespan = max((e.end for e in timeline), default=0.0)
    t2 = spec.species.qubit_coherence_time
    idle = {q: max(0.0, last_end[q] - busy[q]) for q in busy}
    idle_factor = math.exp(-sum(idle.values()) / t2)
    return ScheduleResult(
        timeline=tuple(timeline),
        makespan=makespan,
        pairs_consumed=pairs_consumed,
        swaps_inserted=swaps_inserted,
        fidelity_estimate=gate_factor * idle_factor,
        per_qubit_idle=idle,
        qmap=QubitMap(dict(position_of)),
        mode=pair_supply_mode,
        seed=seed,
    )


def fidelity_estimate(result: ScheduleResult,
                      spec: ArchitectureSpec) -> FidelityBreakdown:
    """Recompute the fidelity product of a schedule with a per-term breakdown."""
    gate_factor = 1.0
    for entry in result.timeline:
        if entry.op is None:  # inserted swap, three proximity gates
            gate_factor *= spec.two_qubit_gate_fidelity ** SWAP_GATE_COUNT
        elif entry.op.kind in (GateKind.MS, GateKind.CNOT, GateKind.GLOBAL_MS):
            gate_factor *= spec.two_qubit_gate_fidelity
    t2 = spec.species.qubit_coherence_time
    idle_factor = math.exp(-sum(result.per_qubit_idle.values()) / t2)
    return FidelityBreakdown(
        total=gate_factor * idle_factor,
        gate_factor=gate_factor,
        idle_factor=idle_factor,
        per_qubit_idle=dict(result.per_qubit_idle),
    )
