"""Domain types and parsers for diagnostic specifications, platform models and field data.

The diagnostic spec travels as CSV with the fixed header::

    monitor_id,description,trigger_condition,healing_condition,system_reaction,
    dtc_codes,lamp,affected_functions,part_id,location,failure_origin,
    trailer_related,affects_tractor,detection_phase

(one line; wrapped here for readability). `dtc_codes` and `affected_functions`
are `;`-separated. Trailing optional columns may be omitted from the header;
empty cells and absent columns fall back to conservative defaults (lamp NONE,
origin INTERNAL, not trailer related, affects tractor, phase UNKNOWN) so that
incomplete rows stay inside the safety funnel instead of silently dropping out.

Lines starting with `#` are comments. Two structured comment forms carry data
that has no CSV column:

    #subsystem: EBS
    #dtc: C0101,Front axle pressure sensor circuit,wheel_speed;supply_voltage

Remaining leading comment lines become `source_meta` (free-text provenance).
All other comments are skipped. Fields must not contain literal newlines.

The platform model travels as strict JSON (unknown keys rejected), field
failure data as a three-column CSV. All types are immutable after
construction; parsing is a pure function of the input text.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable

from .errors import (
    DanglingReference,
    DuplicateMonitorId,
    InvalidLocation,
    MalformedRow,
    NonPositiveExposure,
    SchemaViolation,
    SubsystemNotInPlatform,
    UnknownLampValue,
)

SPEC_HEADER = (
    "monitor_id",
    "description",
    "trigger_condition",
    "healing_condition",
    "system_reaction",
    "dtc_codes",
    "lamp",
    "affected_functions",
    "part_id",
    "location",
    "failure_origin",
    "trailer_related",
    "affects_tractor",
    "detection_phase",
)
# Columns a header must at least carry; the rest may be omitted and default.
_REQUIRED_COLUMNS = 6  # through dtc_codes

FIELD_DATA_HEADER = ("dtc_code", "occurrence_count", "exposure_hours")

# Wheel/axle position: side of the vehicle plus optional axle number, e.g.
# FL, RR, R2L. Empty means the monitor is not tied to a position.
LOCATION_RE = re.compile(r"^(F|R)[1-9]?(L|R)$")

_IDENT_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_.\-]*$")


class WarningLamp(Enum):
    """Driver warning lamp raised by a monitor.

    RED means a failure requiring an immediate stop; YELLOW a severe failure
    that does not force an immediate stop; NONE no lamp.
    """

    RED = "RED"
    YELLOW = "YELLOW"
    NONE = "NONE"


class FailureOrigin(Enum):
    """Whether the detected fault originates inside the subsystem or outside
    it (missing bus signals, power supply, other ECUs)."""

    INTERNAL = "INTERNAL"
    EXTERNAL = "EXTERNAL"


class DetectionPhase(Enum):
    STARTUP = "STARTUP"
    CONTINUOUS = "CONTINUOUS"
    UNKNOWN = "UNKNOWN"


class InterfaceKind(Enum):
    NETWORK_SIGNAL = "NETWORK_SIGNAL"
    ANALOG = "ANALOG"
    MECHANICAL = "MECHANICAL"


@dataclass(frozen=True, slots=True)
class Dtc:
    """Workshop-facing trouble code, optionally with freeze-frame fields."""

    code: str
    description: str = ""
    snapshot_fields: tuple[str, ...] = ()


@dataclass(frozen=True, slots=True)
class Monitor:
    """One diagnostic monitor row of the specification."""

    id: str
    description: str
    trigger_condition: str
    healing_condition: str
    system_reaction: str
    dtc_codes: tuple[str, ...]
    lamp: WarningLamp
    affected_functions: tuple[str, ...]
    part_id: str | None
    location: str | None
    failure_origin: FailureOrigin
    trailer_related: bool
    affects_tractor: bool
    detection_phase: DetectionPhase


@dataclass(frozen=True, slots=True)
class DiagnosticSpec:
    """Parsed diagnostic specification of one subsystem."""

    subsystem_id: str
    monitors: tuple[Monitor, ...]
    dtcs: tuple[Dtc, ...]
    source_meta: str = ""

    def monitor(self, monitor_id: str) -> Monitor:
        for m in self.monitors:
            if m.id == monitor_id:
                return m
        raise KeyError(monitor_id)

    @property
    def monitor_ids(self) -> tuple[str, ...]:
        return tuple(m.id for m in self.monitors)


@dataclass(frozen=True, slots=True)
class Part:
    id: str
    description: str = ""
    driver_interaction: bool = False


@dataclass(frozen=True, slots=True)
class VariantDescriptor:
    """One buildable configuration of a subsystem.

    `applicable_monitor_tags` select which monitors exist in the variant.
    Selectors use a `namespace:value` syntax matched against a monitor:

    - ``loc:<POS>``    location equals POS (``loc:`` matches empty location)
    - ``part:<id>``    part_id equals id
    - ``fn:<f>``       f is among affected_functions
    - ``origin:<o>``   failure origin (internal/external)
    - ``phase:<p>``    detection phase
    - ``trailer:<b>``  trailer_related is true/false

    Selectors OR within a namespace and AND across namespaces; an empty list
    selects every monitor.
    """

    id: str
    features: tuple[str, ...] = ()
    applicable_monitor_tags: tuple[str, ...] = ()
    dependencies: tuple[str, ...] = ()


@dataclass(frozen=True, slots=True)
class InterfaceDescriptor:
    id: str
    kind: InterfaceKind
    description: str = ""
    signal_frequency_hz: float | None = None
    granularity: str | None = None


@dataclass(frozen=True, slots=True)
class SubsystemDescriptor:
    id: str
    name: str
    parts: tuple[Part, ...] = ()
    functions_provided: tuple[str, ...] = ()
    functions_consumed: tuple[str, ...] = ()
    variants: tuple[VariantDescriptor, ...] = ()
    interfaces: tuple[InterfaceDescriptor, ...] = ()

    def part(self, part_id: str) -> Part | None:
        for p in self.parts:
            if p.id == part_id:
                return p
        return None


@dataclass(frozen=True, slots=True)
class FallbackEdge:
    """Another subsystem able to fulfil part of a function, e.g. parking
    brakes covering half of service braking."""

    function: str
    primary_provider: str
    fallback_provider: str
    coverage: float


@dataclass(frozen=True, slots=True)
class PlatformModel:
    subsystems: tuple[SubsystemDescriptor, ...]
    fallback_edges: tuple[FallbackEdge, ...] = ()
    external_sources: tuple[str, ...] = ()

    def subsystem(self, subsystem_id: str) -> SubsystemDescriptor | None:
        for s in self.subsystems:
            if s.id == subsystem_id:
                return s
        return None


@dataclass(frozen=True, slots=True)
class FieldFailureRecord:
    dtc_code: str
    occurrence_count: int
    exposure_hours: float


@dataclass(frozen=True, slots=True)
class ValidationFinding:
    kind: str  # "unknown_part" | "undeclared_function"
    monitor_id: str
    detail: str


@dataclass(frozen=True, slots=True)
class ValidationReport:
    findings: tuple[ValidationFinding, ...]

    @property
    def is_empty(self) -> bool:
        return not self.findings

    @property
    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for f in self.findings:
            out[f.kind] = out.get(f.kind, 0) + 1
        return out


# ---------------------------------------------------------------------------
# diagnostic spec CSV


def _split_list(cell: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in cell.split(";") if part.strip())


def _parse_bool(cell: str, default: bool, line_no: int, column: str) -> bool:
    text = cell.strip().lower()
    if text == "":
        return default
    if text == "true":
        return True
    if text == "false":
        return False
    raise MalformedRow(line_no, f"{column} must be true/false or empty, got {cell!r}")


def _check_ident(value: str, line_no: int, column: str) -> str:
    if not _IDENT_RE.match(value):
        raise MalformedRow(line_no, f"{column} {value!r} is not a valid identifier")
    return value


def parse_spec(text: str) -> DiagnosticSpec:
    """Parse a diagnostic-specification CSV document.

    Raises the first offending problem as MalformedRow, DuplicateMonitorId,
    UnknownLampValue or InvalidLocation; never silently drops a row.
    """
    subsystem_id = "UNSPECIFIED"
    meta_lines: list[str] = []
    declared_dtcs: dict[str, Dtc] = {}
    data_lines: list[tuple[int, str]] = []
    header_cols: tuple[str, ...] | None = None

    for line_no, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            body = stripped[1:]
            if body.startswith(" "):
                body = body[1:]
            if body.startswith("subsystem:"):
                subsystem_id = body[len("subsystem:"):].strip()
            elif body.startswith("dtc:"):
                declared = _parse_dtc_comment(body[len("dtc:"):], line_no)
                declared_dtcs[declared.code] = declared
            else:
                meta_lines.append(body)
            continue
        if header_cols is None:
            header_cols = _parse_header(raw, line_no)
            continue
        data_lines.append((line_no, raw))

    if header_cols is None:
        raise MalformedRow(1, "missing header row")

    monitors: list[Monitor] = []
    seen_ids: set[str] = set()
    for line_no, raw in data_lines:
        monitor = _parse_monitor_row(raw, header_cols, line_no)
        if monitor.id in seen_ids:
            raise DuplicateMonitorId(monitor.id)
        seen_ids.add(monitor.id)
        monitors.append(monitor)

    referenced = {code for m in monitors for code in m.dtc_codes}
    all_codes = sorted(referenced | set(declared_dtcs))
    dtcs = tuple(declared_dtcs.get(code, Dtc(code=code)) for code in all_codes)

    return DiagnosticSpec(
        subsystem_id=subsystem_id,
        monitors=tuple(monitors),
        dtcs=dtcs,
        source_meta="\n".join(meta_lines),
    )


def _parse_header(raw: str, line_no: int) -> tuple[str, ...]:
    cols = tuple(c.strip() for c in next(csv.reader([raw])))
    if len(cols) < _REQUIRED_COLUMNS or cols != SPEC_HEADER[: len(cols)]:
        raise MalformedRow(
            line_no,
            "header must be the canonical column list "
            "(optionally truncated after dtc_codes)",
        )
    return cols


def _parse_dtc_comment(rest: str, line_no: int) -> Dtc:
    try:
        cells = next(csv.reader([rest.strip()]))
    except (csv.Error, StopIteration) as exc:
        raise MalformedRow(line_no, f"bad #dtc: line: {exc}") from exc
    if not cells or not cells[0].strip():
        raise MalformedRow(line_no, "bad #dtc: line: missing code")
    code = _check_ident(cells[0].strip(), line_no, "dtc code")
    description = cells[1].strip() if len(cells) > 1 else ""
    snapshot = _split_list(cells[2]) if len(cells) > 2 else ()
    return Dtc(code=code, description=description, snapshot_fields=snapshot)


def _parse_monitor_row(raw: str, header: tuple[str, ...], line_no: int) -> Monitor:
    try:
        cells = next(csv.reader([raw]))
    except (csv.Error, StopIteration) as exc:
        raise MalformedRow(line_no, f"unparseable CSV row: {exc}") from exc
    if len(cells) != len(header):
        raise MalformedRow(
            line_no, f"expected {len(header)} columns, got {len(cells)}"
        )
    row = dict(zip(header, cells))

    def cell(column: str) -> str:
        return row.get(column, "").strip()

    monitor_id = _check_ident(cell("monitor_id"), line_no, "monitor_id")

    lamp_text = cell("lamp")
    if lamp_text == "":
        lamp = WarningLamp.NONE
    else:
        try:
            lamp = WarningLamp(lamp_text.upper())
        except ValueError:
            raise UnknownLampValue(line_no, lamp_text) from None

    location_text = cell("location")
    location: str | None = None
    if location_text:
        if not LOCATION_RE.match(location_text):
            raise InvalidLocation(line_no, location_text)
        location = location_text

    origin_text = cell("failure_origin")
    if origin_text == "":
        origin = FailureOrigin.INTERNAL
    else:
        try:
            origin = FailureOrigin(origin_text.upper())
        except ValueError:
            raise MalformedRow(
                line_no, f"failure_origin must be INTERNAL or EXTERNAL, got {origin_text!r}"
            ) from None

    phase_text = cell("detection_phase")
    if phase_text == "":
        phase = DetectionPhase.UNKNOWN
    else:
        try:
            phase = DetectionPhase(phase_text.upper())
        except ValueError:
            raise MalformedRow(
                line_no,
                f"detection_phase must be STARTUP, CONTINUOUS or UNKNOWN, got {phase_text!r}",
            ) from None

    for dtc_code in _split_list(cell("dtc_codes")):
        _check_ident(dtc_code, line_no, "dtc code")

    trailer_related = _parse_bool(cell("trailer_related"), False, line_no, "trailer_related")
    affects_tractor = _parse_bool(cell("affects_tractor"), True, line_no, "affects_tractor")
    if not trailer_related:
        # Field is only meaningful for trailer monitors.
        affects_tractor = True

    return Monitor(
        id=monitor_id,
        description=cell("description"),
        trigger_condition=cell("trigger_condition"),
        healing_condition=cell("healing_condition"),
        system_reaction=cell("system_reaction"),
        dtc_codes=_split_list(cell("dtc_codes")),
        lamp=lamp,
        affected_functions=_split_list(cell("affected_functions")),
        part_id=cell("part_id") or None,
        location=location,
        failure_origin=origin,
        trailer_related=trailer_related,
        affects_tractor=affects_tractor,
        detection_phase=phase,
    )


def to_csv(spec: DiagnosticSpec) -> str:
    """Serialize a spec back to its CSV form. parse_spec(to_csv(s)) == s."""
    buf = io.StringIO()
    for line in spec.source_meta.splitlines():
        buf.write(f"#{line}\n" if line.startswith(" ") else f"# {line}\n")
    buf.write(f"#subsystem: {spec.subsystem_id}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SPEC_HEADER)
    for m in spec.monitors:
        writer.writerow(
            [
                m.id,
                m.description,
                m.trigger_condition,
                m.healing_condition,
                m.system_reaction,
                ";".join(m.dtc_codes),
                m.lamp.value,
                ";".join(m.affected_functions),
                m.part_id or "",
                m.location or "",
                m.failure_origin.value,
                "true" if m.trailer_related else "false",
                "true" if m.affects_tractor else "false",
                m.detection_phase.value,
            ]
        )
    for dtc in spec.dtcs:
        if not dtc.description and not dtc.snapshot_fields:
            continue  # synthesized entries round-trip via the references
        row_buf = io.StringIO()
        csv.writer(row_buf, lineterminator="").writerow(
            [dtc.code, dtc.description, ";".join(dtc.snapshot_fields)]
        )
        buf.write(f"#dtc: {row_buf.getvalue()}\n")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# platform model JSON

_SUBSYSTEM_KEYS = {
    "id",
    "name",
    "parts",
    "variants",
    "functions_provided",
    "functions_consumed",
    "interfaces",
}
_PART_KEYS = {"id", "description", "driver_interaction"}
_VARIANT_KEYS = {"id", "features", "applicable_monitor_tags", "dependencies"}
_INTERFACE_KEYS = {"id", "kind", "description", "signal_frequency_hz", "granularity"}
_EDGE_KEYS = {"function", "primary_provider", "fallback_provider", "coverage"}
_TOP_KEYS = {"subsystems", "fallback_edges", "external_sources"}


def _require(obj: Any, path: str, typ: type, what: str) -> Any:
    if not isinstance(obj, typ):
        raise SchemaViolation(path, f"expected {what}")
    return obj


def _reject_unknown(obj: dict[str, Any], allowed: set[str], path: str) -> None:
    for key in obj:
        if key not in allowed:
            raise SchemaViolation(f"{path}/{key}", "unknown key")


def _str_list(obj: Any, path: str) -> tuple[str, ...]:
    _require(obj, path, list, "array of strings")
    out = []
    for i, item in enumerate(obj):
        _require(item, f"{path}/{i}", str, "string")
        out.append(item)
    return tuple(out)


def parse_platform(text: str) -> PlatformModel:
    """Parse and validate a platform-model JSON document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaViolation("/", f"not valid JSON: {exc}") from exc
    _require(doc, "/", dict, "object")
    _reject_unknown(doc, _TOP_KEYS, "")
    raw_subsystems = _require(doc.get("subsystems", []), "/subsystems", list, "array")

    subsystems: list[SubsystemDescriptor] = []
    for i, raw in enumerate(raw_subsystems):
        subsystems.append(_parse_subsystem(raw, f"/subsystems/{i}"))

    ids = [s.id for s in subsystems]
    if len(set(ids)) != len(ids):
        dup = next(x for x in ids if ids.count(x) > 1)
        raise SchemaViolation("/subsystems", f"duplicate subsystem id {dup!r}")

    external = _str_list(doc.get("external_sources", []), "/external_sources")

    edges: list[FallbackEdge] = []
    raw_edges = _require(doc.get("fallback_edges", []), "/fallback_edges", list, "array")
    for i, raw in enumerate(raw_edges):
        edges.append(_parse_edge(raw, f"/fallback_edges/{i}"))

    model = PlatformModel(
        subsystems=tuple(subsystems),
        fallback_edges=tuple(edges),
        external_sources=external,
    )
    _check_references(model)
    return model


def _parse_subsystem(raw: Any, path: str) -> SubsystemDescriptor:
    _require(raw, path, dict, "object")
    _reject_unknown(raw, _SUBSYSTEM_KEYS, path)
    sub_id = _require(raw.get("id"), f"{path}/id", str, "string")

    parts = []
    for i, p in enumerate(_require(raw.get("parts", []), f"{path}/parts", list, "array")):
        ppath = f"{path}/parts/{i}"
        _require(p, ppath, dict, "object")
        _reject_unknown(p, _PART_KEYS, ppath)
        parts.append(
            Part(
                id=_require(p.get("id"), f"{ppath}/id", str, "string"),
                description=p.get("description", ""),
                driver_interaction=_require(
                    p.get("driver_interaction", False),
                    f"{ppath}/driver_interaction",
                    bool,
                    "boolean",
                ),
            )
        )
    part_ids = [p.id for p in parts]
    if len(set(part_ids)) != len(part_ids):
        raise SchemaViolation(f"{path}/parts", "duplicate part id")

    variants = []
    for i, v in enumerate(_require(raw.get("variants", []), f"{path}/variants", list, "array")):
        vpath = f"{path}/variants/{i}"
        _require(v, vpath, dict, "object")
        _reject_unknown(v, _VARIANT_KEYS, vpath)
        variants.append(
            VariantDescriptor(
                id=_require(v.get("id"), f"{vpath}/id", str, "string"),
                features=_str_list(v.get("features", []), f"{vpath}/features"),
                applicable_monitor_tags=_str_list(
                    v.get("applicable_monitor_tags", []), f"{vpath}/applicable_monitor_tags"
                ),
                dependencies=_str_list(v.get("dependencies", []), f"{vpath}/dependencies"),
            )
        )
    if not variants:
        raise SchemaViolation(f"{path}/variants", "subsystem needs at least one variant")
    variant_ids = [v.id for v in variants]
    if len(set(variant_ids)) != len(variant_ids):
        raise SchemaViolation(f"{path}/variants", "duplicate variant id")

    interfaces = []
    for i, itf in enumerate(
        _require(raw.get("interfaces", []), f"{path}/interfaces", list, "array")
    ):
        ipath = f"{path}/interfaces/{i}"
        _require(itf, ipath, dict, "object")
        _reject_unknown(itf, _INTERFACE_KEYS, ipath)
        kind_text = _require(itf.get("kind"), f"{ipath}/kind", str, "string")
        try:
            kind = InterfaceKind(kind_text)
        except ValueError:
            raise SchemaViolation(f"{ipath}/kind", f"unknown interface kind {kind_text!r}") from None
        freq = itf.get("signal_frequency_hz")
        if freq is not None and not isinstance(freq, (int, float)):
            raise SchemaViolation(f"{ipath}/signal_frequency_hz", "expected number or null")
        interfaces.append(
            InterfaceDescriptor(
                id=_require(itf.get("id"), f"{ipath}/id", str, "string"),
                kind=kind,
                description=itf.get("description", ""),
                signal_frequency_hz=float(freq) if freq is not None else None,
                granularity=itf.get("granularity"),
            )
        )

    return SubsystemDescriptor(
        id=sub_id,
        name=raw.get("name", sub_id),
        parts=tuple(parts),
        functions_provided=_str_list(
            raw.get("functions_provided", []), f"{path}/functions_provided"
        ),
        functions_consumed=_str_list(
            raw.get("functions_consumed", []), f"{path}/functions_consumed"
        ),
        variants=tuple(variants),
        interfaces=tuple(interfaces),
    )


def _parse_edge(raw: Any, path: str) -> FallbackEdge:
    _require(raw, path, dict, "object")
    _reject_unknown(raw, _EDGE_KEYS, path)
    coverage = raw.get("coverage")
    if not isinstance(coverage, (int, float)) or not 0.0 <= float(coverage) <= 1.0:
        raise SchemaViolation(f"{path}/coverage", "expected number in [0,1]")
    edge = FallbackEdge(
        function=_require(raw.get("function"), f"{path}/function", str, "string"),
        primary_provider=_require(
            raw.get("primary_provider"), f"{path}/primary_provider", str, "string"
        ),
        fallback_provider=_require(
            raw.get("fallback_provider"), f"{path}/fallback_provider", str, "string"
        ),
        coverage=float(coverage),
    )
    if edge.primary_provider == edge.fallback_provider:
        raise SchemaViolation(f"{path}/fallback_provider", "fallback must differ from primary")
    return edge


def _check_references(model: PlatformModel) -> None:
    known = {s.id for s in model.subsystems}
    provided = {f for s in model.subsystems for f in s.functions_provided}
    available = provided | set(model.external_sources)

    for sub in model.subsystems:
        for variant in sub.variants:
            for dep in variant.dependencies:
                if dep not in known:
                    raise DanglingReference("subsystem", dep)
        for consumed in sub.functions_consumed:
            if consumed not in available:
                raise DanglingReference("function", consumed)

    for edge in model.fallback_edges:
        if edge.primary_provider not in known:
            raise DanglingReference("subsystem", edge.primary_provider)
        if edge.fallback_provider not in known:
            raise DanglingReference("subsystem", edge.fallback_provider)
        if edge.function not in available:
            raise DanglingReference("function", edge.function)


def platform_to_json(model: PlatformModel) -> str:
    """Serialize a platform model to its JSON document form."""
    doc = {
        "subsystems": [
            {
                "id": s.id,
                "name": s.name,
                "parts": [
                    {"id": p.id, "description": p.description, "driver_interaction": p.driver_interaction}
                    for p in s.parts
                ],
                "functions_provided": list(s.functions_provided),
                "functions_consumed": list(s.functions_consumed),
                "variants": [
                    {
                        "id": v.id,
                        "features": list(v.features),
                        "applicable_monitor_tags": list(v.applicable_monitor_tags),
                        "dependencies": list(v.dependencies),
                    }
                    for v in s.variants
                ],
                "interfaces": [
                    {
                        "id": i.id,
                        "kind": i.kind.value,
                        "description": i.description,
                        "signal_frequency_hz": i.signal_frequency_hz,
                        "granularity": i.granularity,
                    }
                    for i in s.interfaces
                ],
            }
            for s in model.subsystems
        ],
        "fallback_edges": [
            {
                "function": e.function,
                "primary_provider": e.primary_provider,
                "fallback_provider": e.fallback_provider,
                "coverage": e.coverage,
            }
            for e in model.fallback_edges
        ],
        "external_sources": list(model.external_sources),
    }
    return json.dumps(doc, indent=2) + "\n"


# ---------------------------------------------------------------------------
# field failure data CSV


def parse_field_data(text: str) -> tuple[FieldFailureRecord, ...]:
    """Parse fleet failure counts: `dtc_code,occurrence_count,exposure_hours`."""
    records: list[FieldFailureRecord] = []
    header_seen = False
    for line_no, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if not header_seen:
            cols = tuple(c.strip() for c in next(csv.reader([raw])))
            if cols != FIELD_DATA_HEADER:
                raise MalformedRow(line_no, f"header must be {','.join(FIELD_DATA_HEADER)}")
            header_seen = True
            continue
        cells = next(csv.reader([raw]))
        if len(cells) != 3:
            raise MalformedRow(line_no, f"expected 3 columns, got {len(cells)}")
        code = _check_ident(cells[0].strip(), line_no, "dtc_code")
        try:
            count = int(cells[1])
        except ValueError:
            raise MalformedRow(line_no, f"occurrence_count not an integer: {cells[1]!r}") from None
        if count < 0:
            raise MalformedRow(line_no, "occurrence_count must be >= 0")
        try:
            exposure = float(cells[2])
        except ValueError:
            raise MalformedRow(line_no, f"exposure_hours not a number: {cells[2]!r}") from None
        if exposure <= 0:
            raise NonPositiveExposure(line_no)
        records.append(FieldFailureRecord(code, count, exposure))
    if not header_seen:
        raise MalformedRow(1, "missing header row")
    return tuple(records)


# ---------------------------------------------------------------------------
# cross-reference validation


def validate(spec: DiagnosticSpec, platform: PlatformModel) -> ValidationReport:
    """Cross-check a spec against the platform model.

    Empty report iff every monitor part resolves within the subsystem and
    every affected function is declared (provided or consumed) by it.
    """
    subsystem = platform.subsystem(spec.subsystem_id)
    if subsystem is None:
        raise SubsystemNotInPlatform(spec.subsystem_id)

    declared = set(subsystem.functions_provided) | set(subsystem.functions_consumed)
    part_ids = {p.id for p in subsystem.parts}

    findings: list[ValidationFinding] = []
    for m in spec.monitors:
        if m.part_id is not None and m.part_id not in part_ids:
            findings.append(
                ValidationFinding("unknown_part", m.id, f"part {m.part_id!r} not in {subsystem.id}")
            )
        for fn in m.affected_functions:
            if fn not in declared:
                findings.append(
                    ValidationFinding(
                        "undeclared_function", m.id, f"function {fn!r} not declared by {subsystem.id}"
                    )
                )
    return ValidationReport(findings=tuple(findings))


def variant_monitors(
    monitors: Iterable[Monitor], variant: VariantDescriptor
) -> tuple[Monitor, ...]:
    """Monitors that exist in a variant, per the selector rules on
    VariantDescriptor.applicable_monitor_tags."""
    selectors: dict[str, list[str]] = {}
    for tag in variant.applicable_monitor_tags:
        namespace, _, value = tag.partition(":")
        selectors.setdefault(namespace, []).append(value)
    if not selectors:
        return tuple(monitors)

    def matches(m: Monitor) -> bool:
        for namespace, values in selectors.items():
            if namespace == "loc":
                ok = (m.location or "") in values
            elif namespace == "part":
                ok = (m.part_id or "") in values
            elif namespace == "fn":
                ok = any(fn in values for fn in m.affected_functions)
            elif namespace == "origin":
                ok = m.failure_origin.value.lower() in [v.lower() for v in values]
            elif namespace == "phase":
                ok = m.detection_phase.value.lower() in [v.lower() for v in values]
            elif namespace == "trailer":
                ok = str(m.trailer_related).lower() in [v.lower() for v in values]
            else:
                ok = False
            if not ok:
                return False
        return True

    return tuple(m for m in monitors if matches(m))
