#!/usr/bin/env python3
"""Regenerate the bundled EBS fixture (spec, platform, answers, field data).

The fixture is synthetic but engineered to the case-study population shape:
720 monitor rows, 210 distinct DTCs, 220 external-origin monitors, 170
deferrable/trailer/driver-interface monitors, a 330-monitor residue folding
into 60 position-symmetry classes of which 20 are startup-checkable.

Deterministic: running it twice produces byte-identical files. The count
assertions at the bottom recompute every population slice naively, without
the funnel implementation.
"""

from __future__ import annotations

import io
import csv
import json
import re
import sys
from pathlib import Path

FIXTURE_DIR = Path(__file__).resolve().parents[1] / "src" / "safescope" / "fixtures"

HEADER = (
    "monitor_id,description,trigger_condition,healing_condition,system_reaction,"
    "dtc_codes,lamp,affected_functions,part_id,location,failure_origin,"
    "trailer_related,affects_tractor,detection_phase"
)

WHEELS6 = ("FL", "FR", "R1L", "R1R", "R2L", "R2R")
WHEELS3 = ("FL", "R1L", "R2L")

# (description, trigger, part, affected functions, reaction)
WHEEL_FAMILIES = [
    (
        "Brake pressure sensor {pos} signal out of range",
        "Pressure reading at {pos} outside 0..12 bar for 100 ms",
        "PCM",
        "service_braking",
        "degrade service_braking; notify ADI_SOURCES",
    ),
    (
        "Wheel speed sensor {pos} implausible",
        "Speed gradient at {pos} exceeds physical limit",
        "WSS",
        "wheel_speed;vehicle_speed",
        "disable wheel_speed; degrade vehicle_speed",
    ),
    (
        "Pressure control valve {pos} stuck",
        "Commanded and measured pressure at {pos} diverge",
        "VALVE_BLOCK",
        "service_braking;stability_control",
        "maintain pressure with neighbouring channel",
    ),
    (
        "Pressure modulator {pos} leakage",
        "Pressure drop at {pos} above threshold with valves closed",
        "PCM",
        "service_braking",
        "degrade service_braking",
    ),
    (
        "Load sensor {pos} open circuit",
        "Load signal at {pos} below electrical minimum",
        "WSS",
        "stability_control",
        "freeze axle load estimate",
    ),
]

STARTUP_WHEEL_FAMILIES = [
    (
        "Valve actuation self test {pos} failed",
        "Startup actuation sequence at {pos} did not complete",
        "VALVE_BLOCK",
        "service_braking",
        "repeat self test; disable service_braking",
    ),
    (
        "Speed sensor supply check {pos} failed",
        "Sensor supply voltage at {pos} out of band during init",
        "WSS",
        "wheel_speed",
        "disable wheel_speed",
    ),
]

AXLE_FAMILIES = [
    (
        "Axle modulator {pos} calibration drift",
        "Calibration offset at {pos} beyond tolerance",
        "PCM",
        "service_braking",
        "degrade service_braking",
    ),
]

# External-origin population: (count, id prefix, description, trigger,
# affected functions, reaction)
EXTERNAL_FAMILIES = [
    (
        40,
        "EBS_X_PWR",
        "Supply voltage outside operating band",
        "Battery rail below 18 V or above 32 V",
        "service_braking;stability_control",
        "reduce actuation duty cycle",
    ),
    (
        40,
        "EBS_X_RET",
        "CAN timeout from retarder controller",
        "No retarder status frame for 500 ms",
        "brake_arbitration",
        "arbitrate without retarder contribution",
    ),
    (
        50,
        "EBS_X_ADI",
        "CAN timeout of electronic brake demand",
        "No demand frame on vehicle bus for 200 ms",
        "service_braking",
        "hold last demand then ramp out",
    ),
    (
        50,
        "EBS_X_STEER",
        "Steering angle signal invalid",
        "Steering angle checksum or age invalid",
        "stability_control",
        "degrade stability_control",
    ),
    (
        40,
        "EBS_X_TRX",
        "CAN timeout from transmission controller",
        "No gear state frame for 500 ms",
        "vehicle_speed",
        "estimate speed from wheel sensors only",
    ),
]

YELLOW_FAMILIES = [
    (
        "Brake lining wear above service threshold",
        "Lining wear estimate beyond service limit",
        "RESERVOIR",
        "service_braking",
        "request workshop visit",
    ),
    (
        "Air dryer cartridge efficiency low",
        "Regeneration cycles above expected count",
        "RESERVOIR",
        "service_braking",
        "schedule maintenance",
    ),
    (
        "Reservoir pressure build-up slow",
        "Time to cut-off pressure above limit",
        "RESERVOIR",
        "service_braking",
        "request workshop visit",
    ),
]

TRAILER_FAMILIES = [
    (
        "Trailer control line pressure deviation",
        "Trailer control pressure diverges from demand",
        "TRAILER_CONTROL_MODULE",
        "service_braking",
    ),
    (
        "Trailer supply line leakage",
        "Trailer supply pressure drops with coupling closed",
        "TRAILER_CONTROL_MODULE",
        "service_braking",
    ),
]

FBM_FAMILIES = [
    (
        "Foot brake module potentiometer implausible",
        "Pedal position channels disagree",
        "service_braking",
    ),
    (
        "Foot brake module supply fault",
        "Pedal sensor supply out of band",
        "service_braking",
    ),
]


def build_monitor_rows() -> list[dict[str, str]]:
    rows: list[dict[str, str]] = []

    def add(
        monitor_id: str,
        description: str,
        trigger: str,
        healing: str,
        reaction: str,
        dtcs: list[str],
        lamp: str,
        functions: str,
        part: str,
        location: str,
        origin: str,
        trailer: str,
        tractor: str,
        phase: str,
    ) -> None:
        rows.append(
            {
                "monitor_id": monitor_id,
                "description": description,
                "trigger_condition": trigger,
                "healing_condition": healing,
                "system_reaction": reaction,
                "dtc_codes": ";".join(dtcs),
                "lamp": lamp,
                "affected_functions": functions,
                "part_id": part,
                "location": location,
                "failure_origin": origin,
                "trailer_related": trailer,
                "affects_tractor": tractor,
                "detection_phase": phase,
            }
        )

    # --- residual symmetry classes -------------------------------------
    # 50 six-wheel classes: 15 startup-checkable, 35 continuous red.
    class_codes: list[str] = []
    next_class_code = 0

    def claim_code() -> str:
        nonlocal next_class_code
        code = f"C{0x200 + next_class_code:04X}"
        next_class_code += 1
        class_codes.append(code)
        return code

    for k in range(50):
        startup = k < 15
        if startup:
            family = STARTUP_WHEEL_FAMILIES[k % len(STARTUP_WHEEL_FAMILIES)]
            lamp, phase = "NONE", "STARTUP"
        else:
            family = WHEEL_FAMILIES[k % len(WHEEL_FAMILIES)]
            lamp, phase = "RED", "CONTINUOUS"
        description, trigger, part, functions, reaction = family
        code = claim_code()
        for pos in WHEELS6:
            add(
                monitor_id=f"EBS_W{k:03d}_{pos}",
                description=description.format(pos=pos),
                trigger=trigger.format(pos=pos),
                healing="Condition absent for 3 drive cycles" if not startup else "",
                reaction=reaction,
                dtcs=[code],
                lamp=lamp,
                functions=functions,
                part=part,
                location=pos,
                origin="INTERNAL",
                trailer="false",
                tractor="true",
                phase=phase,
            )

    # 10 three-position axle classes: 5 startup, 5 continuous red without DTCs.
    for j in range(10):
        startup = j < 5
        description, trigger, part, functions, reaction = AXLE_FAMILIES[0]
        description = f"{description} group {j}"
        lamp = "NONE" if startup else "RED"
        phase = "STARTUP" if startup else "CONTINUOUS"
        dtcs = [claim_code()] if startup else []
        for pos in WHEELS3:
            add(
                monitor_id=f"EBS_A{j:02d}_{pos}",
                description=description.format(pos=pos),
                trigger=trigger.format(pos=pos),
                healing="",
                reaction=reaction,
                dtcs=dtcs,
                lamp=lamp,
                functions=functions,
                part=part,
                location=pos,
                origin="INTERNAL",
                trailer="false",
                tractor="true",
                phase=phase,
            )

    residual_count = len(rows)
    assert residual_count == 330, residual_count
    assert len(class_codes) == 55, len(class_codes)

    # --- shared-code pool for everything else ---------------------------
    pool = [f"C{0x300 + i:04X}" for i in range(155)]
    pool_cursor = 0

    def pool_codes(extra: bool = False) -> list[str]:
        nonlocal pool_cursor
        codes = [pool[pool_cursor % len(pool)]]
        if extra:
            codes.append(pool[(pool_cursor + 1) % len(pool)])
        pool_cursor += 1
        return codes

    # --- external-origin (vehicle-level) monitors ------------------------
    for count, prefix, description, trigger, functions, reaction in EXTERNAL_FAMILIES:
        for i in range(count):
            # A few monitors carry two DTCs; several monitors share codes.
            add(
                monitor_id=f"{prefix}_{i:03d}",
                description=f"{description} (instance {i})",
                trigger=trigger,
                healing="Signal restored for 5 s",
                reaction=reaction,
                dtcs=pool_codes(extra=(prefix == "EBS_X_PWR" and i < 10)),
                lamp="YELLOW",
                functions=functions,
                part="ECU_CORE" if prefix == "EBS_X_PWR" else "",
                location="",
                origin="EXTERNAL",
                trailer="false",
                tractor="true",
                phase="CONTINUOUS",
            )

    # --- internally handled but deferrable (yellow lamps) ----------------
    for i in range(60):
        description, trigger, part, functions, reaction = YELLOW_FAMILIES[
            i % len(YELLOW_FAMILIES)
        ]
        add(
            monitor_id=f"EBS_Y{i:03d}",
            description=f"{description} (zone {i})",
            trigger=trigger,
            healing="Serviced and reset in workshop",
            reaction=reaction,
            dtcs=pool_codes(),
            lamp="YELLOW",
            functions=functions,
            part=part,
            location="",
            origin="INTERNAL",
            trailer="false",
            tractor="true",
            phase="CONTINUOUS",
        )

    # --- trailer-only monitors -------------------------------------------
    for i in range(60):
        description, trigger, part, functions = TRAILER_FAMILIES[i % len(TRAILER_FAMILIES)]
        add(
            monitor_id=f"EBS_T{i:03d}",
            description=f"{description} (circuit {i})",
            trigger=trigger,
            healing="",
            reaction="limit trailer demand",
            dtcs=pool_codes(),
            lamp="RED" if i < 30 else "NONE",
            functions=functions,
            part=part,
            location="",
            origin="INTERNAL",
            trailer="true",
            tractor="false",
            phase="CONTINUOUS",
        )

    # --- foot brake module (driver interface) monitors --------------------
    for i in range(50):
        description, trigger, functions = FBM_FAMILIES[i % len(FBM_FAMILIES)]
        add(
            monitor_id=f"EBS_F{i:03d}",
            description=f"{description} (channel {i})",
            trigger=trigger,
            healing="",
            reaction="fall back to electronic brake demand",
            dtcs=pool_codes(),
            lamp="RED" if i < 25 else "NONE",
            functions=functions,
            part="FBM",
            location="",
            origin="INTERNAL",
            trailer="false",
            tractor="true",
            phase="CONTINUOUS",
        )

    assert len(rows) == 720, len(rows)
    return rows


def write_spec_csv(rows: list[dict[str, str]]) -> str:
    buf = io.StringIO()
    buf.write("# Synthetic diagnostic specification for the EBS service-brake subsystem.\n")
    buf.write("# Export shaped to the population counts of the published case study.\n")
    buf.write("#subsystem: EBS\n")
    buf.write(HEADER + "\n")
    writer = csv.DictWriter(buf, fieldnames=HEADER.split(","), lineterminator="\n")
    for row in rows:
        writer.writerow(row)
    # Descriptions for a few frequently shared codes.
    buf.write('#dtc: C0300,Vehicle bus communication fault,source_address;bus_load\n')
    buf.write('#dtc: C0200,Brake pressure sensor circuit,wheel_position;pressure_bar\n')
    return buf.getvalue()


PLATFORM = {
    "subsystems": [
        {
            "id": "EBS",
            "name": "Electronic braking subsystem (service brakes)",
            "parts": [
                {"id": "FBM", "description": "Foot brake module (pedal)", "driver_interaction": True},
                {"id": "PCM", "description": "Pressure control modulator", "driver_interaction": False},
                {"id": "WSS", "description": "Wheel speed sensor", "driver_interaction": False},
                {"id": "VALVE_BLOCK", "description": "Valve block", "driver_interaction": False},
                {"id": "RESERVOIR", "description": "Air reservoir and dryer", "driver_interaction": False},
                {"id": "ECU_CORE", "description": "Brake ECU core", "driver_interaction": False},
                {"id": "TRAILER_CONTROL_MODULE", "description": "Trailer control module", "driver_interaction": False},
            ],
            "functions_provided": [
                "service_braking",
                "brake_arbitration",
                "wheel_speed",
                "vehicle_speed",
                "stability_control",
            ],
            "functions_consumed": [
                "power_24v",
                "brake_demand_electronic",
                "steering_angle_signal",
                "driver_brake_pedal_force",
            ],
            "variants": [
                {
                    "id": "EBS_4X2",
                    "features": ["two_axles"],
                    "applicable_monitor_tags": ["loc:", "loc:FL", "loc:FR", "loc:R1L", "loc:R1R"],
                    "dependencies": ["POWER_SUPPLY", "PARKING_BRAKE"],
                },
                {
                    "id": "EBS_6X4",
                    "features": ["three_axles"],
                    "applicable_monitor_tags": [],
                    "dependencies": ["POWER_SUPPLY"],
                },
            ],
            "interfaces": [
                {
                    "id": "IF_BRAKE_DEMAND_CAN",
                    "kind": "NETWORK_SIGNAL",
                    "description": "Electronic brake demand (torque request)",
                    "signal_frequency_hz": 100.0,
                    "granularity": "0.1 kNm",
                },
                {
                    "id": "IF_FBM_ANALOG",
                    "kind": "ANALOG",
                    "description": "Foot brake module pedal position",
                    "signal_frequency_hz": None,
                    "granularity": None,
                },
            ],
        },
        {
            "id": "PARKING_BRAKE",
            "name": "Parking brake",
            "parts": [
                {"id": "PB_LEVER", "description": "Parking brake lever", "driver_interaction": True}
            ],
            "functions_provided": ["parking_braking"],
            "functions_consumed": ["power_24v", "brake_arbitration"],
            "variants": [
                {"id": "PB_ELECTRONIC", "features": ["epb"], "applicable_monitor_tags": [], "dependencies": ["POWER_SUPPLY"]},
                {"id": "PB_MECHANICAL", "features": [], "applicable_monitor_tags": [], "dependencies": []},
            ],
            "interfaces": [],
        },
        {
            "id": "RETARDER",
            "name": "Hydraulic retarder",
            "parts": [],
            "functions_provided": ["retarder_braking"],
            "functions_consumed": ["power_24v", "brake_arbitration", "vehicle_speed"],
            "variants": [
                {"id": "RET_STD", "features": [], "applicable_monitor_tags": [], "dependencies": ["TRANSMISSION"]}
            ],
            "interfaces": [],
        },
        {
            "id": "ENGINE_BRAKE",
            "name": "Engine and exhaust brake",
            "parts": [],
            "functions_provided": ["engine_braking"],
            "functions_consumed": ["power_24v", "brake_arbitration", "gear_state"],
            "variants": [
                {"id": "ENG_STD", "features": [], "applicable_monitor_tags": [], "dependencies": []}
            ],
            "interfaces": [],
        },
        {
            "id": "TRANSMISSION",
            "name": "Transmission",
            "parts": [],
            "functions_provided": ["gear_state"],
            "functions_consumed": ["power_24v", "vehicle_speed"],
            "variants": [
                {"id": "TRX_AUTO", "features": ["automated"], "applicable_monitor_tags": [], "dependencies": []},
                {"id": "TRX_MANUAL", "features": [], "applicable_monitor_tags": [], "dependencies": []},
            ],
            "interfaces": [],
        },
        {
            "id": "POWER_SUPPLY",
            "name": "Power supply",
            "parts": [],
            "functions_provided": ["power_24v"],
            "functions_consumed": [],
            "variants": [
                {"id": "PWR_STD", "features": [], "applicable_monitor_tags": [], "dependencies": []}
            ],
            "interfaces": [],
        },
        {
            "id": "ADI_SOURCES",
            "name": "ADI-side demand and perception sources",
            "parts": [],
            "functions_provided": ["brake_demand_electronic", "steering_angle_signal"],
            "functions_consumed": ["service_braking", "stability_control", "wheel_speed"],
            "variants": [
                {"id": "ADI_IF_V1", "features": [], "applicable_monitor_tags": [], "dependencies": []}
            ],
            "interfaces": [],
        },
    ],
    "fallback_edges": [
        {
            "function": "service_braking",
            "primary_provider": "EBS",
            "fallback_provider": "PARKING_BRAKE",
            "coverage": 0.5,
        },
        {
            "function": "vehicle_speed",
            "primary_provider": "EBS",
            "fallback_provider": "TRANSMISSION",
            "coverage": 0.7,
        },
    ],
    "external_sources": ["driver_brake_pedal_force"],
}


FIELD_ROWS = [
    ("C0200", 3, 1_000_000),
    ("C0200", 2, 500_000),  # duplicate code on purpose: aggregation
    ("C0201", 0, 250_000),
    ("C0202", 7, 2_000_000),
    ("C0210", 1, 800_000),
    ("C0215", 60, 1_000_000),  # above the one-per-50000-hours benchmark
    ("C0300", 12, 3_000_000),
    ("C0301", 4, 3_000_000),
    ("C0310", 9, 1_500_000),
    ("C0340", 2, 900_000),
]


def write_field_csv() -> str:
    lines = ["dtc_code,occurrence_count,exposure_hours"]
    for code, count, hours in FIELD_ROWS:
        lines.append(f"{code},{count},{hours}")
    return "\n".join(lines) + "\n"


def build_answers(spec_text: str, platform_text: str) -> str:
    from safescope.heuristics import (
        AnswerKind,
        new_state,
    )
    from safescope.model import parse_platform, parse_spec

    spec = parse_spec(spec_text)
    platform = parse_platform(platform_text)
    state = new_state(spec, platform)

    lines = []
    for i, q in enumerate(state.questions):
        if q.answer_kind is AnswerKind.TEXT:
            value = _text_answer(q.step.value, q.target)
        elif q.answer_kind is AnswerKind.BOOLEAN:
            value = i % 3 == 0
        elif q.answer_kind is AnswerKind.DURATION_LIMITS:
            value = {"min_ms": 50, "max_ms": 500}
        elif q.answer_kind is AnswerKind.INTERFACE_SPEC:
            value = {
                "id": "IF_BRAKE_DEMAND_CAN",
                "kind": "NETWORK_SIGNAL",
                "description": "Electronic brake demand (torque request)",
                "signal_frequency_hz": 100.0,
                "granularity": "0.1 kNm",
            }
        else:  # DATA_NEED
            value = {
                "data_item": f"fault status of {q.target}",
                "format": "NETWORK_SIGNAL" if i % 2 == 0 else "ECU_MEMORY",
            }
        lines.append(
            json.dumps(
                {
                    "question_id": q.id,
                    "kind": q.answer_kind.value,
                    "value": value,
                    "author": "ebs.analyst",
                    "timestamp": "2026-05-04T10:00:00Z",
                },
                sort_keys=True,
            )
        )
    return "\n".join(lines) + "\n"


_TEXT_ANSWERS = {
    "S1B": "Legacy expects pedal gradient limits; bus load headroom confirmed.",
    "S1C": "Electronic demand allows faster and finer setpoints than the pedal.",
    "S2C": "Loss reduces deceleration capability and may surprise following traffic.",
    "S4A": "Dual-circuit layout keeps a degraded braking mode available.",
    "S4B": "Parking brake covers part of service braking; transmission can supply speed.",
    "S5A": "Stored fault code with freeze frame and affected channel.",
    "S5B": "Longer pedal travel, pulling to one side, or warning lamp.",
    "S6": "Pre-drive pedal feel and air pressure gauge checks.",
    "S6A": "Automated actuation self test at power-up; repeat hourly while parked.",
    "S8A": "Automated variant with electronic demand path is easiest to automate.",
    "S8B": "Requires stable 24 V supply and parking brake as fallback provider.",
}


def _text_answer(step: str, target: str) -> str:
    return _TEXT_ANSWERS.get(step, f"Reviewed for {target}.")


# ---------------------------------------------------------------------------
# naive re-counts, kept free of the package's funnel/classification code


def verify(rows: list[dict[str, str]]) -> None:
    assert len(rows) == 720

    codes = {c for row in rows for c in row["dtc_codes"].split(";") if c}
    assert len(codes) == 210, len(codes)

    uses: dict[str, int] = {}
    for row in rows:
        for c in row["dtc_codes"].split(";"):
            if c:
                uses[c] = uses.get(c, 0) + 1
    assert any(n >= 2 for n in uses.values())
    assert any(not row["dtc_codes"] for row in rows)

    external = [r for r in rows if r["failure_origin"] == "EXTERNAL"]
    assert len(external) == 220, len(external)

    internal = [r for r in rows if r["failure_origin"] == "INTERNAL"]
    assert len(internal) == 500

    def deferred(r: dict[str, str]) -> bool:
        return (
            r["lamp"] == "YELLOW"
            or (r["trailer_related"] == "true" and r["affects_tractor"] == "false")
            or r["part_id"] == "FBM"
        )

    stage2 = [r for r in internal if deferred(r)]
    assert len(stage2) == 170, len(stage2)

    residual = [r for r in internal if not deferred(r)]
    assert len(residual) == 330, len(residual)

    pos_re = re.compile(r"(?<![A-Za-z0-9])(?:F|R)[1-9]?(?:L|R)(?![A-Za-z0-9])")

    def naive_signature(r: dict[str, str]) -> tuple:
        return (
            pos_re.sub("*", r["monitor_id"]),
            pos_re.sub("*", r["description"]),
            pos_re.sub("*", r["trigger_condition"]),
            r["healing_condition"],
            r["system_reaction"],
            r["dtc_codes"],
            r["lamp"],
            r["affected_functions"],
            r["part_id"],
            r["failure_origin"],
            r["trailer_related"],
            r["affects_tractor"],
            r["detection_phase"],
        )

    classes: dict[tuple, list[str]] = {}
    for r in residual:
        classes.setdefault(naive_signature(r), []).append(r["monitor_id"])
    assert len(classes) == 60, len(classes)
    assert sum(len(v) for v in classes.values()) == 330

    startup_classes = [
        sig for sig in classes if sig[-1] == "STARTUP"
    ]
    assert len(startup_classes) == 20, len(startup_classes)


def main() -> int:
    rows = build_monitor_rows()
    verify(rows)

    spec_text = write_spec_csv(rows)
    platform_text = json.dumps(PLATFORM, indent=2) + "\n"
    field_text = write_field_csv()
    answers_text = build_answers(spec_text, platform_text)

    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    (FIXTURE_DIR / "ebs_synthetic.csv").write_text(spec_text, encoding="utf-8")
    (FIXTURE_DIR / "ebs_platform.json").write_text(platform_text, encoding="utf-8")
    (FIXTURE_DIR / "ebs_field_data.csv").write_text(field_text, encoding="utf-8")
    (FIXTURE_DIR / "ebs_answers.jsonl").write_text(answers_text, encoding="utf-8")
    print(f"wrote fixture files to {FIXTURE_DIR}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
