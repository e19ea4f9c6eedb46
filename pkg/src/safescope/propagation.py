"""Failure propagation over the platform dependency graph and minimum-configuration analysis.

A failure seeds at the functions a monitor watches. If the monitor misses it,
propagation is worst-case: every subsystem consuming a tainted function is
assumed to taint everything it provides in turn. If the monitor catches it and
the system reaction disables or degrades the seed functions, the failure is
contained after direct consumers are notified.

The reaction grammar recognizes `disable <function>`, `degrade <function>` and
`notify <subsystem>` inside otherwise free reaction text; anything else is
treated as non-containing. Notify phrases never extend the affected set beyond
the consumers of the seed functions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from .errors import NotRedMonitor, UnknownMonitor, UnknownSubsystem
from .heuristics import ClassificationTag, TriageState
from .model import FallbackEdge, Monitor, PlatformModel, variant_monitors


class Containment(Enum):
    CONTAINED_BY_REACTION = "CONTAINED_BY_REACTION"
    PROPAGATES = "PROPAGATES"
    NO_CONSUMERS = "NO_CONSUMERS"


@dataclass(frozen=True, slots=True)
class FunctionEdge:
    provider: str
    consumer: str
    function: str


@dataclass(frozen=True, slots=True)
class DependencyGraph:
    nodes: tuple[str, ...]
    function_edges: tuple[FunctionEdge, ...]
    fallback_edges: tuple[FallbackEdge, ...]

    def edges_from(self, provider: str) -> tuple[FunctionEdge, ...]:
        return tuple(e for e in self.function_edges if e.provider == provider)


@dataclass(frozen=True, slots=True)
class AffectedSubsystem:
    subsystem_id: str
    via_function: str
    hops: int


@dataclass(frozen=True, slots=True)
class PropagationTrace:
    monitor_id: str
    detected: bool
    affected_subsystems: tuple[AffectedSubsystem, ...]
    containment: Containment


@dataclass(frozen=True, slots=True)
class VariantScore:
    variant_id: str
    external_impact_count: int
    induced_dependencies: tuple[str, ...]

    @property
    def key(self) -> tuple[int, int, str]:
        return (self.external_impact_count, len(self.induced_dependencies), self.variant_id)


@dataclass(frozen=True, slots=True)
class MinConfigResult:
    subsystem_id: str
    chosen_variant: str
    external_impact_count: int
    induced_dependencies: tuple[str, ...]
    ranking: tuple[VariantScore, ...]


@dataclass(frozen=True, slots=True)
class FallbackCandidate:
    fallback_provider: str
    function: str
    coverage: float


def build_graph(platform: PlatformModel) -> DependencyGraph:
    """One edge per (provider, consumer, function) triple; no self-loops;
    output independent of declaration order."""
    providers: dict[str, list[str]] = {}
    for sub in platform.subsystems:
        for fn in sub.functions_provided:
            providers.setdefault(fn, []).append(sub.id)

    edges: set[FunctionEdge] = set()
    for consumer in platform.subsystems:
        for fn in consumer.functions_consumed:
            for provider in providers.get(fn, []):
                if provider != consumer.id:
                    edges.add(FunctionEdge(provider=provider, consumer=consumer.id, function=fn))

    return DependencyGraph(
        nodes=tuple(sorted(s.id for s in platform.subsystems)),
        function_edges=tuple(
            sorted(edges, key=lambda e: (e.provider, e.consumer, e.function))
        ),
        fallback_edges=platform.fallback_edges,
    )


# ---------------------------------------------------------------------------
# reaction grammar

_REACTION_RE = re.compile(
    r"\b(disable|degrade|notify)\s+([A-Za-z0-9_.\-]+)", re.IGNORECASE
)


def parse_reaction(text: str) -> dict[str, set[str]]:
    """Extract the structured phrases from reaction text.

    Returns {"disable": {...}, "degrade": {...}, "notify": {...}} with
    lower-cased arguments; unstructured prose contributes nothing.
    """
    out: dict[str, set[str]] = {"disable": set(), "degrade": set(), "notify": set()}
    for verb, arg in _REACTION_RE.findall(text):
        out[verb.lower()].add(arg.lower())
    return out


def reaction_contains(monitor: Monitor) -> bool:
    """True when the reaction marks every watched function disabled or degraded."""
    if not monitor.affected_functions:
        return False
    phrases = parse_reaction(monitor.system_reaction)
    degraded = phrases["disable"] | phrases["degrade"]
    return all(fn.lower() in degraded for fn in monitor.affected_functions)


# ---------------------------------------------------------------------------
# tracing


def _bfs_closure(
    graph: DependencyGraph, origin: str, seed_functions: set[str], max_hops: int | None
) -> list[AffectedSubsystem]:
    """Breadth-first worst-case taint: from the origin only seed-labeled edges
    propagate; from any downstream subsystem every provided function does."""
    reached: dict[str, tuple[int, str]] = {}  # subsystem -> (hops, via_function)
    frontier = [origin]
    hops = 0
    while frontier and (max_hops is None or hops < max_hops):
        hops += 1
        next_frontier: list[str] = []
        for node in frontier:
            for edge in graph.edges_from(node):
                if node == origin and edge.function not in seed_functions:
                    continue
                if edge.consumer == origin or edge.consumer in reached:
                    continue
                candidate = (hops, edge.function)
                current = reached.get(edge.consumer)
                if current is None or candidate < current:
                    reached[edge.consumer] = candidate
        # Collect this level's nodes once all parents were examined, so the
        # via_function is the smallest label among first-reaching edges.
        next_frontier = [s for s, (h, _) in reached.items() if h == hops]
        frontier = next_frontier
    return [
        AffectedSubsystem(subsystem_id=s, via_function=via, hops=h)
        for s, (h, via) in sorted(reached.items(), key=lambda kv: (kv[1][0], kv[0]))
    ]


def trace(
    monitor_id: str, state: TriageState, detected: bool, graph: DependencyGraph
) -> PropagationTrace:
    """Trace which subsystems a failure reaches, for the detected and the
    undetected case."""
    try:
        monitor = state.spec.monitor(monitor_id)
    except KeyError:
        raise UnknownMonitor(monitor_id) from None
    origin = state.spec.subsystem_id
    seeds = set(monitor.affected_functions)

    contained = detected and reaction_contains(monitor)
    affected = _bfs_closure(graph, origin, seeds, max_hops=1 if contained else None)

    if contained:
        containment = Containment.CONTAINED_BY_REACTION
    elif affected:
        containment = Containment.PROPAGATES
    else:
        containment = Containment.NO_CONSUMERS

    return PropagationTrace(
        monitor_id=monitor_id,
        detected=detected,
        affected_subsystems=tuple(affected),
        containment=containment,
    )


# ---------------------------------------------------------------------------
# minimum configuration


def _dependency_closure(platform: PlatformModel, start: str, deps: tuple[str, ...]) -> tuple[str, ...]:
    """Transitive dependencies, binding each dependency to its
    lexicographically-first variant."""
    seen: set[str] = set()
    stack = list(deps)
    while stack:
        dep = stack.pop()
        if dep in seen or dep == start:
            continue
        seen.add(dep)
        sub = platform.subsystem(dep)
        if sub is None or not sub.variants:
            continue
        first_variant = min(sub.variants, key=lambda v: v.id)
        stack.extend(first_variant.dependencies)
    return tuple(sorted(seen))


def min_config(
    subsystem_id: str, state: TriageState, graph: DependencyGraph
) -> MinConfigResult:
    """Rank variants by (failures affecting other subsystems, induced
    dependencies, id) and pick the minimum."""
    subsystem = state.platform.subsystem(subsystem_id)
    if subsystem is None:
        raise UnknownSubsystem(subsystem_id)

    own_monitors = (
        state.spec.monitors if subsystem_id == state.spec.subsystem_id else ()
    )

    scores: list[VariantScore] = []
    for variant in subsystem.variants:
        monitors = variant_monitors(own_monitors, variant)
        impact = 0
        for m in monitors:
            if ClassificationTag.VEHICLE_LEVEL in state.tags(m.id):
                impact += 1
                continue
            undetected = trace(m.id, state, detected=False, graph=graph)
            if undetected.containment is Containment.PROPAGATES:
                impact += 1
        scores.append(
            VariantScore(
                variant_id=variant.id,
                external_impact_count=impact,
                induced_dependencies=_dependency_closure(
                    state.platform, subsystem_id, variant.dependencies
                ),
            )
        )

    scores.sort(key=lambda s: s.key)
    chosen = scores[0]
    return MinConfigResult(
        subsystem_id=subsystem_id,
        chosen_variant=chosen.variant_id,
        external_impact_count=chosen.external_impact_count,
        induced_dependencies=chosen.induced_dependencies,
        ranking=tuple(scores),
    )


# ---------------------------------------------------------------------------
# fallbacks


def fallback_candidates(
    monitor_id: str, state: TriageState, graph: DependencyGraph
) -> tuple[FallbackCandidate, ...]:
    """Subsystems that can partially take over a red monitor's functions,
    best coverage first."""
    if ClassificationTag.RED_IMMEDIATE not in state.tags(monitor_id):
        raise NotRedMonitor(monitor_id)
    monitor = state.spec.monitor(monitor_id)
    affected = set(monitor.affected_functions)
    candidates = [
        FallbackCandidate(
            fallback_provider=e.fallback_provider, function=e.function, coverage=e.coverage
        )
        for e in graph.fallback_edges
        if e.function in affected and e.primary_provider == state.spec.subsystem_id
    ]
    candidates.sort(key=lambda c: (-c.coverage, c.fallback_provider, c.function))
    return tuple(candidates)


# ---------------------------------------------------------------------------
# export


def to_dot(graph: DependencyGraph) -> str:
    """DOT rendering: nodes are subsystems, edge labels are function ids.
    Fallback edges are dashed."""
    lines = ["digraph platform {", "  rankdir=LR;"]
    for node in graph.nodes:
        lines.append(f'  "{node}";')
    for e in graph.function_edges:
        lines.append(f'  "{e.provider}" -> "{e.consumer}" [label="{e.function}"];')
    for f in graph.fallback_edges:
        lines.append(
            f'  "{f.fallback_provider}" -> "{f.primary_provider}" '
            f'[label="{f.function} ({f.coverage:g})", style=dashed];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
