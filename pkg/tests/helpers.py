"""Shared test utilities: independent oracles and random model generators.

The oracles deliberately re-derive results through different mechanisms than
the implementation (fixpoint iteration instead of BFS, token splitting instead
of lookaround regexes, exhaustive enumeration instead of ranking) so that
agreement is evidence, not tautology.
"""

from __future__ import annotations

import random
import re
from typing import Iterable, Sequence

from safescope.model import (
    DetectionPhase,
    DiagnosticSpec,
    FailureOrigin,
    Monitor,
    PlatformModel,
    SubsystemDescriptor,
    VariantDescriptor,
    WarningLamp,
)

# ---------------------------------------------------------------------------
# propagation oracle: naive fixpoint over (provider, consumer, function) triples


def closure_oracle(
    edges: Iterable[tuple[str, str, str]], origin: str, seed_functions: set[str]
) -> set[str]:
    """Transitive worst-case taint: keep adding consumers until nothing changes.

    From the origin only edges labeled with a seed function count; from any
    already-affected subsystem every outgoing edge counts.
    """
    edges = list(edges)
    affected: set[str] = set()
    while True:
        new: set[str] = set()
        for provider, consumer, function in edges:
            if consumer == origin or consumer in affected:
                continue
            if provider == origin and function in seed_functions:
                new.add(consumer)
            elif provider in affected:
                new.add(consumer)
        if not new:
            return affected
        affected |= new


# ---------------------------------------------------------------------------
# symmetry oracle: token-split normalization, then plain grouping

_TOKEN_SPLIT_RE = re.compile(r"([^A-Za-z0-9]+)")
_LOCATION_FULL_RE = re.compile(r"(F|R)[1-9]?(L|R)\Z")


def _normalize_by_tokens(text: str) -> str:
    parts = _TOKEN_SPLIT_RE.split(text)
    return "".join(
        "<pos>" if _LOCATION_FULL_RE.fullmatch(part) else part for part in parts
    )


def grouping_oracle(monitors: Sequence[Monitor]) -> dict[tuple, list[str]]:
    """Group monitors by a normalization key derived independently of the
    implementation's signature function."""
    groups: dict[tuple, list[str]] = {}
    for m in monitors:
        key = (
            _normalize_by_tokens(m.id),
            _normalize_by_tokens(m.description),
            _normalize_by_tokens(m.trigger_condition),
            m.healing_condition,
            m.system_reaction,
            m.dtc_codes,
            m.lamp,
            m.affected_functions,
            m.part_id,
            m.failure_origin,
            m.trailer_related,
            m.affects_tractor,
            m.detection_phase,
        )
        groups.setdefault(key, []).append(m.id)
    return groups


# ---------------------------------------------------------------------------
# random model generators


def make_monitor(
    monitor_id: str,
    *,
    description: str = "generic check",
    trigger: str = "threshold exceeded",
    healing: str = "",
    reaction: str = "",
    dtcs: tuple[str, ...] = (),
    lamp: WarningLamp = WarningLamp.NONE,
    functions: tuple[str, ...] = (),
    part_id: str | None = None,
    location: str | None = None,
    origin: FailureOrigin = FailureOrigin.INTERNAL,
    trailer_related: bool = False,
    affects_tractor: bool = True,
    phase: DetectionPhase = DetectionPhase.UNKNOWN,
) -> Monitor:
    return Monitor(
        id=monitor_id,
        description=description,
        trigger_condition=trigger,
        healing_condition=healing,
        system_reaction=reaction,
        dtc_codes=dtcs,
        lamp=lamp,
        affected_functions=functions,
        part_id=part_id,
        location=location,
        failure_origin=origin,
        trailer_related=trailer_related,
        affects_tractor=affects_tractor,
        detection_phase=phase,
    )


def random_platform(rng: random.Random) -> tuple[PlatformModel, list[tuple[str, str, str]]]:
    """Platform with <= 8 subsystems and <= 16 function edges, plus the edge
    triples it was built from (providers may overlap so the realized edge set
    can differ; the triples returned are the realized ones)."""
    n = rng.randint(2, 8)
    names = [f"S{i}" for i in range(n)]
    functions = [f"f{i}" for i in range(rng.randint(1, 10))]

    provided: dict[str, set[str]] = {s: set() for s in names}
    consumed: dict[str, set[str]] = {s: set() for s in names}
    for _ in range(rng.randint(0, 16)):
        provider, consumer = rng.sample(names, 2)
        fn = rng.choice(functions)
        provided[provider].add(fn)
        consumed[consumer].add(fn)

    subsystems = tuple(
        SubsystemDescriptor(
            id=s,
            name=s,
            functions_provided=tuple(sorted(provided[s])),
            functions_consumed=tuple(sorted(consumed[s])),
            variants=(VariantDescriptor(id="V0"),),
        )
        for s in names
    )
    platform = PlatformModel(subsystems=subsystems)

    realized = [
        (p, c, fn)
        for p in names
        for fn in provided[p]
        for c in names
        if c != p and fn in consumed[c]
    ]
    return platform, realized


def random_trace_spec(rng: random.Random, platform: PlatformModel) -> DiagnosticSpec:
    """Spec for subsystem S0 with monitors whose seeds draw from S0's functions."""
    origin = platform.subsystems[0]
    candidates = list(origin.functions_provided) + list(origin.functions_consumed)
    monitors = []
    for i in range(rng.randint(1, 3)):
        if candidates and rng.random() < 0.9:
            k = rng.randint(1, min(3, len(candidates)))
            seeds = tuple(sorted(rng.sample(candidates, k)))
        else:
            seeds = ()
        reaction = ""
        if seeds and rng.random() < 0.5:
            verbs = [rng.choice(["disable", "degrade"]) + " " + fn for fn in seeds]
            reaction = "; ".join(verbs)
        monitors.append(
            make_monitor(
                f"M{i}",
                functions=seeds,
                reaction=reaction,
                lamp=rng.choice(list(WarningLamp)),
            )
        )
    return DiagnosticSpec(subsystem_id=origin.id, monitors=tuple(monitors), dtcs=())


_LOCATIONS = ["FL", "FR", "R1L", "R1R", "R2L", "R2R", None]


def random_symmetry_monitors(rng: random.Random, max_monitors: int = 50) -> list[Monitor]:
    """Monitors with randomized fields and embedded position tokens, suitable
    for symmetry-grouping properties. Ids are unique, as in any valid spec;
    monitors sharing a base and differing only in position can group."""
    monitors = []
    n = rng.randint(0, max_monitors)
    base_count = max(1, n // 4)
    used: set[str] = set()
    for i in range(n):
        base = rng.randrange(base_count)
        loc = rng.choice(_LOCATIONS)
        suffix = f"_{loc}" if loc else ""
        monitor_id = f"M{base:02d}{suffix}"
        if monitor_id in used or rng.random() > 0.8:
            monitor_id = f"M{base:02d}_{i}{suffix}"
        used.add(monitor_id)
        monitors.append(
            make_monitor(
                monitor_id,
                description=f"sensor {loc} drift" if loc else "sensor drift",
                trigger=rng.choice(["limit hit", "gradient high"]),
                dtcs=rng.choice([(), (f"D{base}",)]),
                lamp=rng.choice(list(WarningLamp)),
                functions=rng.choice([("braking",), ("speed",), ()]),
                location=loc,
                phase=rng.choice(list(DetectionPhase)),
            )
        )
    return monitors
