"""Deterministic discrete-event simulation of heralded entanglement generation.

Model
-----
Active links fire entanglement attempts on a fixed clock: attempts happen at
``window_start + j/R`` for j = 1, 2, ... while a link is active, where R is
the spec's attempt rate and a window opens whenever a link (re)starts after
configuration or suspension (the attempt phase resets). Each attempt
succeeds with probability p = (F*eta_D)^2/2, or ``p_override`` when given.
Successful pairs enter the FIFO buffer owned by the unordered ELU pair
(newest pair dropped and counted when full), requests block until a live
pair exists, switch reconfiguration suspends changed links, and collisions
invalidate all buffered pairs of the struck ELU and suspend its links for
the reload time.

Determinism contract
--------------------
A run is a pure function of (spec, schedule, demand, horizon, seed). The
generator is the stdlib Mersenne Twister (random.Random), whose output is
stable across platforms and Python versions, consumed in this exact order:

1. one uniform per ELU (in spec order) with a nonzero collision rate, for
   its first collision gap: dt = -log(1-u)/rate;
2. one uniform per link activation or success, for the geometric count of
   failed attempts before the next success: k = floor(log(1-u)/log1p(-p));
3. one uniform per collision, for the next gap of that ELU.

Attempt outcomes are therefore sampled one draw per *success*, not per
attempt, which is distributionally identical to per-attempt Bernoulli draws
and keeps multi-second horizons at megahertz attempt rates cheap. Attempt
counts are exact (closed-form slot counting per active window). Events at
equal times process in the fixed priority order RECONFIG_DONE < RELOAD_DONE
< COLLISION < SUCCESS < PAIR_EXPIRED < PAIR_REQUEST < PAIR_DELIVERED, then
by sequence number; an attempt landing exactly on a suspension boundary
does not fire.
"""

from __future__ import annotations

import heapq
import math
import random
from collections import deque
from dataclasses import dataclass, field

from .arch import ArchitectureSpec
from .errors import DomainError
from .rates import link_success_probability

Port = tuple[str, int]          # (elu id, chain position of the comm ion)
Link = tuple[Port, Port]        # normalized: ports in sorted order

EVENT_KINDS = ("ATTEMPT", "SUCCESS", "RECONFIG_DONE", "PAIR_EXPIRED",
               "COLLISION", "RELOAD_DONE", "PAIR_REQUEST", "PAIR_DELIVERED")

# Priorities for equal-time ties; the relative order of RECONFIG_DONE,
# COLLISION, SUCCESS, and PAIR_REQUEST is a documented contract.
_PRIO = {"_SCHED": 0, "RECONFIG_DONE": 1, "RELOAD_DONE": 2, "COLLISION": 3,
         "SUCCESS": 4, "PAIR_EXPIRED": 5, "PAIR_REQUEST": 6, "PAIR_DELIVERED": 7}


def make_link(a: Port, b: Port) -> Link:
    if a[0] == b[0]:
        raise DomainError(f"link endpoints must be in distinct ELUs, got {a} and {b}")
    return (a, b) if a <= b else (b, a)


def link_label(link: Link) -> str:
    (ea, pa), (eb, pb) = link
    return f"{ea}.{pa}-{eb}.{pb}"


def link_pair(link: Link) -> tuple[str, str]:
    elus = sorted((link[0][0], link[1][0]))
    return (elus[0], elus[1])


@dataclass(frozen=True)
class SwitchConfig:
    """A non-blocking matching of communication-ion ports."""

    active_links: frozenset[Link]

    def __post_init__(self):
        seen: set[Port] = set()
        norm = set()
        for link in self.active_links:
            link = make_link(*link)
            norm.add(link)
            for port in link:
                if port in seen:
                    raise DomainError(f"port {port} used by two links")
                seen.add(port)
        object.__setattr__(self, "active_links", frozenset(norm))

    @property
    def ports(self) -> set[Port]:
        return {p for link in self.active_links for p in link}


def reconfigure(cfg: SwitchConfig, new_links) -> SwitchConfig:
    """New switch configuration from a link set; raises on port conflicts."""
    return SwitchConfig(frozenset(make_link(*l) for l in new_links))


def changed_links(old: SwitchConfig, new: SwitchConfig) -> set[Link]:
    """Links whose membership changed; these are charged the reconfiguration time."""
    return set(old.active_links ^ new.active_links)


@dataclass(frozen=True)
class PairRecord:
    creation_time: float
    expiry_time: float  # math.inf when pairs never expire
    seq: int


class PairBuffer:
    """FIFO buffer of entangled pairs owned by an unordered ELU pair."""

    def __init__(self, owner: tuple[str, str], capacity: int):
        if capacity < 1:
            raise DomainError(f"buffer capacity must be >= 1, got {capacity}")
        self.owner = tuple(sorted(owner))
        self.capacity = capacity
        self.queue: deque[PairRecord] = deque()

    def __len__(self) -> int:
        return len(self.queue)

    def push(self, record: PairRecord) -> bool:
        """Enqueue; returns False (tail drop) when the buffer is full."""
        if len(self.queue) >= self.capacity:
            return False
        self.queue.append(record)
        return True

    def take(self, now: float) -> tuple[PairRecord | None, list[PairRecord]]:
        """Oldest unexpired pair (removed) and any expired heads discarded first."""
        expired = []
        while self.queue and self.queue[0].expiry_time <= now:
            expired.append(self.queue.popleft())
        if self.queue:
            return self.queue.popleft(), expired
        return None, expired


def buffer_take(buffer: PairBuffer, now: float) -> PairRecord | None:
    """Convenience wrapper over :meth:`PairBuffer.take` discarding the expiry list."""
    record, _ = buffer.take(now)
    return record


@dataclass(frozen=True)
class SimEvent:
    time: float
    kind: str
    link: str      # link label or "" when not link-scoped
    elu_a: str
    elu_b: str     # "" for single-ELU events
    seq: int

    def csv_row(self) -> str:
        return f"{self.time!r},{self.kind},{self.link},{self.elu_a},{self.elu_b},{self.seq}"


@dataclass(frozen=True)
class LinkStats:
    attempts: int
    successes: int
    measured_rate: float  # successes / horizon, 1/s


@dataclass(frozen=True)
class Ledger:
    successes: int
    delivered: int
    expired: int
    invalidated: int
    overflow_dropped: int
    residual: int

    @property
    def conserved(self) -> bool:
        return (self.delivered + self.expired + self.invalidated
                + self.overflow_dropped + self.residual == self.successes)


@dataclass(frozen=True)
class SimResult:
    horizon: float
    seed: int
    per_link: dict[str, LinkStats]
    mean_connection_rate: float  # mean of per-link measured rates
    ledger: Ledger
    collisions: int
    request_count: int
    requests_served: int
    latency_mean: float
    latency_max: float
    buffer_occupancy: dict[str, list[tuple[float, int]]] = field(default_factory=dict)
    events: tuple[SimEvent, ...] | None = None
    success_times: dict[tuple[str, str], list[float]] | None = None

    def events_csv(self) -> str:
        if self.events is None:
            raise DomainError("run was executed without store_log=True")
        lines = ["time_s,kind,link,elu_a,elu_b,seq"]
        lines.extend(ev.csv_row() for ev in self.events)
        return "\n".join(lines) + "\n"


def merge_aggregates(results: list[SimResult]) -> dict:
    """Associative merge of ensemble aggregate counters (e.g. over seeds)."""
    out = {"runs": len(results), "attempts": 0, "successes": 0, "delivered": 0,
           "expired": 0, "invalidated": 0, "overflow_dropped": 0, "collisions": 0}
    for r in results:
        out["attempts"] += sum(s.attempts for s in r.per_link.values())
        out["successes"] += r.ledger.successes
        out["delivered"] += r.ledger.delivered
        out["expired"] += r.ledger.expired
        out["invalidated"] += r.ledger.invalidated
        out["overflow_dropped"] += r.ledger.overflow_dropped
        out["collisions"] += r.collisions
    return out


# ---------------------------------------------------------------------------
# Core simulator
# ---------------------------------------------------------------------------

class _LinkState:
    __slots__ = ("link", "label", "pair", "in_config", "reconfig_until",
                 "window_start", "consumed", "countdown", "epoch",
                 "attempts", "successes", "open_")

    def __init__(self, link: Link):
        self.link = link
        self.label = link_label(link)
        self.pair = link_pair(link)
        self.in_config = False
        self.reconfig_until = 0.0
        self.window_start = 0.0
        self.consumed = 0       # attempt slots consumed in the open window
        self.countdown = -1     # failures left before next success; -1 = unsampled
        self.epoch = 0
        self.attempts = 0
        self.successes = 0
        self.open_ = False


def _slots_before(window_start: float, rate: float, t: float) -> int:
    """Largest j >= 0 with window_start + j/rate < t (strict)."""
    if t <= window_start:
        return 0
    j = int((t - window_start) * rate)
    while window_start + (j + 1) / rate < t:
        j += 1
    while j > 0 and not window_start + j / rate < t:
        j -= 1
    return j


def validate_switch_config(spec: ArchitectureSpec, cfg: SwitchConfig) -> None:
    comm: dict[str, set[int]] = {e.id: set(e.comm_ion_indices) for e in spec.elus}
    for link in cfg.active_links:
        for elu_id, pos in link:
            if elu_id not in comm:
                raise DomainError(f"unknown ELU {elu_id!r} in switch config")
            if pos not in comm[elu_id]:
                raise DomainError(
                    f"port {elu_id}.{pos} is not a communication ion")
    if len(cfg.ports) > spec.switch.port_count:
        raise DomainError(
            f"config uses {len(cfg.ports)} ports, switch has {spec.switch.port_count}")


def run_sim(
    spec: ArchitectureSpec,
    switch_schedule: list[tuple[float, SwitchConfig]],
    demand: list[tuple[float, tuple[str, str]]],
    horizon: float,
    seed: int,
    p_override: float | None = None,
    store_log: bool = False,
    collect_success_times: bool = False,
) -> SimResult:
    """Run the event simulation; bit-identical output for identical inputs."""
    if not horizon > 0:
        raise DomainError(f"horizon must be > 0, got {horizon!r}")
    times = [t for t, _ in switch_schedule]
    if times != sorted(times):
        raise DomainError("switch schedule times must be sorted")
    for _, cfg in switch_schedule:
        validate_switch_config(spec, cfg)
    if p_override is not None and not 0.0 <= p_override <= 1.0:
        raise DomainError(f"p_override out of [0,1]: {p_override!r}")

    p = p_override if p_override is not None else link_success_probability(
        spec.collection_fraction, spec.detector_efficiency)
    rate = spec.attempt_rate
    lifetime = spec.pair_lifetime if spec.pair_lifetime is not None else math.inf
    rng = random.Random(seed)
    log1m_p = math.log1p(-p) if 0.0 < p < 1.0 else None

    # Every link that ever appears; demanded pairs must be connectable.
    links: dict[Link, _LinkState] = {}
    for _, cfg in switch_schedule:
        for link in cfg.active_links:
            links.setdefault(link, _LinkState(link))
    connectable = {st.pair for st in links.values()}
    for t, pair in demand:
        if tuple(sorted(pair)) not in connectable:
            raise DomainError(
                f"request for ELU pair {pair} that no scheduled link can serve")

    buffers: dict[tuple[str, str], PairBuffer] = {
        pair: PairBuffer(pair, spec.buffer_capacity) for pair in connectable}
    waiting: dict[tuple[str, str], deque] = {pair: deque() for pair in connectable}
    buffer_epoch: dict[tuple[str, str], int] = {pair: 0 for pair in connectable}
    elu_reload_until: dict[str, float] = {e.id: 0.0 for e in spec.elus}
    elu_epoch: dict[str, int] = {e.id: 0 for e in spec.elus}
    collision_rates = {e.id: e.collision_rate_per_ion * e.n_ions for e in spec.elus}

    log: list[SimEvent] = [] if store_log else None
    occupancy: dict[str, list[tuple[float, int]]] = {}
    success_times: dict[tuple[str, str], list[float]] = (
        {pair: [] for pair in connectable} if collect_success_times else None)
    event_seq = 0

    counters = {"successes": 0, "delivered": 0, "expired": 0, "invalidated": 0,
                "overflow": 0, "collisions": 0, "requests": 0}
    latency_total = 0.0
    latency_max = 0.0

    heap: list = []
    push_seq = 0

    def push(t: float, kind: str, payload) -> None:
        nonlocal push_seq
        heapq.heappush(heap, (t, _PRIO[kind], push_seq, kind, payload))
        push_seq += 1

    def emit(t: float, kind: str, link: str, elu_a: str, elu_b: str) -> None:
        nonlocal event_seq
        if log is not None:
            log.append(SimEvent(t, kind, link, elu_a, elu_b, event_seq))
        event_seq += 1

    def note_occupancy(pair: tuple[str, str], t: float) -> None:
        if store_log:
            occupancy.setdefault("-".join(pair), []).append((t, len(buffers[pair])))

    def sample_countdown() -> int:
        if p <= 0.0:
            return -2  # never succeeds
        if p >= 1.0:
            return 0
        u = 1.0 - rng.random()  # in (0, 1]
        return int(math.log(u) / log1m_p)

    def schedule_success(st: _LinkState, now: float) -> None:
        if not st.open_ or st.countdown == -2:
            return
        slot = st.consumed + st.countdown + 1
        t = st.window_start + slot / rate
        if t < horizon:
            push(t, "SUCCESS", (st, st.epoch, slot))

    def open_window(st: _LinkState, now: float) -> None:
        if st.open_ or not st.in_config:
            return
        if now < st.reconfig_until or now < elu_reload_until[st.pair[0]] \
                or now < elu_reload_until[st.pair[1]]:
            return
        st.open_ = True
        st.window_start = now
        st.consumed = 0
        if st.countdown == -1:
            st.countdown = sample_countdown()
        st.epoch += 1
        schedule_success(st, now)

    def close_window(st: _LinkState, now: float) -> None:
        if not st.open_:
            return
        fired = _slots_before(st.window_start, rate, now)
        failed = fired - st.consumed
        st.attempts += failed
        if st.countdown >= 0:
            st.countdown -= failed
        st.consumed = fired
        st.open_ = False
        st.epoch += 1  # cancels the pending success event

    def deliver(pair: tuple[str, str], req_time: float, now: float) -> None:
        nonlocal latency_total, latency_max
        counters["delivered"] += 1
        lat = now - req_time
        latency_total += lat
        latency_max = max(latency_max, lat)
        emit(now, "PAIR_DELIVERED", "", pair[0], pair[1])

    def reschedule_expiry(pair: tuple[str, str]) -> None:
        if lifetime is math.inf:
            return
        buffer_epoch[pair] += 1
        q = buffers[pair].queue
        if q:
            push(q[0].expiry_time, "PAIR_EXPIRED", (pair, buffer_epoch[pair]))

    # Initial collision gaps, ELUs in spec order (documented draw order).
    for elu in spec.elus:
        r = collision_rates[elu.id]
        if r > 0:
            u = rng.random()
            push(-math.log(1.0 - u) / r, "COLLISION", elu.id)

    current = SwitchConfig(frozenset())
    first_sched = True
    for t, cfg in switch_schedule:
        push(t, "_SCHED", cfg)
    for t, pair in demand:
        push(t, "PAIR_REQUEST", tuple(sorted(pair)))

    pair_seq = 0
    while heap:
        t, _prio, _ps, kind, payload = heapq.heappop(heap)
        if t >= horizon:
            break

        if kind == "_SCHED":
            # The first entry is the switch's initial state and is free;
            # later entries charge reconfiguration_time to changed links.
            new_cfg: SwitchConfig = payload
            removed = current.active_links - new_cfg.active_links
            added = new_cfg.active_links - current.active_links
            for link in sorted(removed):
                st = links[link]
                close_window(st, t)
                st.in_config = False
            for link in sorted(added):
                st = links[link]
                st.in_config = True
                if first_sched:
                    open_window(st, t)
                else:
                    st.reconfig_until = t + spec.switch.reconfiguration_time
                    push(st.reconfig_until, "RECONFIG_DONE", (st, st.epoch + 1))
                    st.epoch += 1
            current = new_cfg
            first_sched = False

        elif kind == "RECONFIG_DONE":
            st, epoch = payload
            if st.epoch != epoch or not st.in_config:
                continue
            emit(t, "RECONFIG_DONE", st.label, st.pair[0], st.pair[1])
            open_window(st, t)

        elif kind == "COLLISION":
            elu_id = payload
            counters["collisions"] += 1
            emit(t, "COLLISION", "", elu_id, "")
            for pair, buf in sorted(buffers.items()):
                if elu_id in pair and len(buf):
                    counters["invalidated"] += len(buf)
                    buf.queue.clear()
                    reschedule_expiry(pair)
                    note_occupancy(pair, t)
            elu = spec.elu(elu_id)
            until = t + elu.reload_time
            elu_reload_until[elu_id] = max(elu_reload_until[elu_id], until)
            elu_epoch[elu_id] += 1
            push(elu_reload_until[elu_id], "RELOAD_DONE", (elu_id, elu_epoch[elu_id]))
            for link in sorted(links):
                if elu_id in (link[0][0], link[1][0]):
                    close_window(links[link], t)
            u = rng.random()
            push(t - math.log(1.0 - u) / collision_rates[elu_id], "COLLISION", elu_id)

        elif kind == "RELOAD_DONE":
            elu_id, epoch = payload
            if elu_epoch[elu_id] != epoch or t < elu_reload_until[elu_id]:
                continue
            emit(t, "RELOAD_DONE", "", elu_id, "")
            for link in sorted(links):
                if elu_id in (link[0][0], link[1][0]):
                    open_window(links[link], t)

        elif kind == "SUCCESS":
            st, epoch, slot = payload
            if st.epoch != epoch:
                continue
            st.attempts += slot - st.consumed
            st.consumed = slot
            st.successes += 1
            counters["successes"] += 1
            emit(t, "SUCCESS", st.label, st.pair[0], st.pair[1])
            if success_times is not None:
                success_times[st.pair].append(t)
            pair = st.pair
            record = PairRecord(t, t + lifetime, pair_seq)
            pair_seq += 1
            if waiting[pair]:
                req_time = waiting[pair].popleft()
                deliver(pair, req_time, t)
            else:
                buf = buffers[pair]
                was_empty = len(buf) == 0
                if buf.push(record):
                    if was_empty:
                        reschedule_expiry(pair)
                    note_occupancy(pair, t)
                else:
                    counters["overflow"] += 1
            st.countdown = sample_countdown()
            schedule_success(st, t)

        elif kind == "PAIR_EXPIRED":
            pair, epoch = payload
            if buffer_epoch[pair] != epoch:
                continue
            buf = buffers[pair]
            record, pre_expired = buf.take(t)
            # The scheduled head is exactly at its expiry instant, so take()
            # classifies it into pre_expired and record is the next live pair;
            # put the live pair back.
            if record is not None:
                buf.queue.appendleft(record)
            for _ in pre_expired:
                counters["expired"] += 1
                emit(t, "PAIR_EXPIRED", "", pair[0], pair[1])
            reschedule_expiry(pair)
            note_occupancy(pair, t)

        elif kind == "PAIR_REQUEST":
            pair = payload
            counters["requests"] += 1
            emit(t, "PAIR_REQUEST", "", pair[0], pair[1])
            record, expired = buffers[pair].take(t)
            for _ in expired:
                counters["expired"] += 1
                emit(t, "PAIR_EXPIRED", "", pair[0], pair[1])
            if record is not None:
                reschedule_expiry(pair)
                note_occupancy(pair, t)
                deliver(pair, t, t)
            else:
                if expired:
                    reschedule_expiry(pair)
                    note_occupancy(pair, t)
                waiting[pair].append(t)

    # Horizon close-out: final attempt accounting and residual pairs.
    for link in sorted(links):
        close_window(links[link], horizon)
    residual = 0
    for pair, buf in sorted(buffers.items()):
        record, expired = buf.take(horizon)
        if record is not None:
            buf.queue.appendleft(record)
        for _ in expired:
            counters["expired"] += 1
            emit(horizon, "PAIR_EXPIRED", "", pair[0], pair[1])
        residual += len(buf)

    per_link = {
        st.label: LinkStats(st.attempts, st.successes, st.successes / horizon)
        for _, st in sorted((l, s) for l, s in links.items())
    }
    mean_rate = (sum(s.measured_rate for s in per_link.values()) / len(per_link)
                 if per_link else 0.0)
    served = counters["delivered"]
    return SimResult(
        horizon=horizon,
        seed=seed,
        per_link=per_link,
        mean_connection_rate=mean_rate,
        ledger=Ledger(
            successes=counters["successes"],
            delivered=counters["delivered"],
            expired=counters["expired"],
            invalidated=counters["invalidated"],
            overflow_dropped=counters["overflow"],
            residual=residual,
        ),
        collisions=counters["collisions"],
        request_count=counters["requests"],
        requests_served=served,
        latency_mean=latency_total / served if served else 0.0,
        latency_max=latency_max,
        buffer_occupancy=occupancy,
        events=tuple(log) if log is not None else None,
        success_times=success_times,
    )


# ---------------------------------------------------------------------------
# Cross-validation against the closed-form rate
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RateCheck:
    attempts: int
    successes: int
    measured_rate: float
    analytic_rate: float
    z_score: float


def default_link(spec: ArchitectureSpec) -> Link:
    """First communication ions of the first two ELUs."""
    if len(spec.elus) < 2:
        raise DomainError("need at least two ELUs to form a link")
    a, b = spec.elus[0], spec.elus[1]
    if not a.comm_ion_indices or not b.comm_ion_indices:
        raise DomainError("both ELUs need communication ions")
    return make_link((a.id, min(a.comm_ion_indices)), (b.id, min(b.comm_ion_indices)))


def theoretical_rate_check(spec: ArchitectureSpec, link: Link | None = None,
                           seed: int = 0, attempts: int = 1_000_000,
                           p_override: float | None = None) -> RateCheck:
    """Standardized fixed-attempt-count run compared against R*p.

    Returns the rate measured over the attempt span (R * successes/attempts),
    the analytic rate, and the binomial z-score of the observed success count.
    """
    if link is None:
        link = default_link(spec)
    horizon = (attempts + 0.5) / spec.attempt_rate
    cfg = SwitchConfig(frozenset({link}))
    result = run_sim(spec, [(0.0, cfg)], [], horizon, seed, p_override=p_override)
    stats = result.per_link[link_label(link)]
    p = p_override if p_override is not None else link_success_probability(
        spec.collection_fraction, spec.detector_efficiency)
    analytic = spec.attempt_rate * p
    n = stats.attempts
    if 0.0 < p < 1.0 and n:
        z = (stats.successes - n * p) / math.sqrt(n * p * (1.0 - p))
    else:
        z = 0.0
    return RateCheck(
        attempts=n,
        successes=stats.successes,
        measured_rate=spec.attempt_rate * stats.successes / n if n else 0.0,
        analytic_rate=analytic,
        z_score=z,
    )
