"""Domain exceptions. Parse errors report the first offending line and abort."""

from __future__ import annotations


class SafescopeError(Exception):
    """Base class for all domain errors raised by this package."""


class ParseError(SafescopeError):
    """Base class for input-format errors (CSV/JSON parsing)."""


class MalformedRow(ParseError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class DuplicateMonitorId(ParseError):
    def __init__(self, monitor_id: str):
        super().__init__(f"duplicate monitor id {monitor_id!r}")
        self.monitor_id = monitor_id


class UnknownLampValue(ParseError):
    def __init__(self, line: int, value: str):
        super().__init__(f"line {line}: unknown lamp value {value!r}")
        self.line = line
        self.value = value


class InvalidLocation(ParseError):
    def __init__(self, line: int, value: str):
        super().__init__(f"line {line}: invalid location {value!r}")
        self.line = line
        self.value = value


class SchemaViolation(ParseError):
    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


class DanglingReference(ParseError):
    def __init__(self, kind: str, ref_id: str):
        super().__init__(f"dangling {kind} reference {ref_id!r}")
        self.kind = kind
        self.ref_id = ref_id


class NonPositiveExposure(ParseError):
    def __init__(self, line: int):
        super().__init__(f"line {line}: exposure_hours must be > 0")
        self.line = line


class SubsystemNotInPlatform(SafescopeError):
    def __init__(self, subsystem_id: str):
        super().__init__(f"subsystem {subsystem_id!r} not present in platform model")
        self.subsystem_id = subsystem_id


class UnknownQuestion(SafescopeError):
    def __init__(self, question_id: str):
        super().__init__(f"unknown question {question_id!r}")
        self.question_id = question_id


class TypeMismatch(SafescopeError):
    def __init__(self, question_id: str, expected: str, got: str):
        super().__init__(f"answer to {question_id!r}: expected {expected}, got {got}")
        self.question_id = question_id
        self.expected = expected
        self.got = got


class InvalidStageOrder(SafescopeError):
    """Stage list violates the funnel-stage invariants."""


class UnknownMonitor(SafescopeError):
    def __init__(self, monitor_id: str):
        super().__init__(f"unknown monitor {monitor_id!r}")
        self.monitor_id = monitor_id


class UnknownSubsystem(SafescopeError):
    def __init__(self, subsystem_id: str):
        super().__init__(f"unknown subsystem {subsystem_id!r}")
        self.subsystem_id = subsystem_id


class NotRedMonitor(SafescopeError):
    def __init__(self, monitor_id: str):
        super().__init__(f"monitor {monitor_id!r} is not tagged RED_IMMEDIATE")
        self.monitor_id = monitor_id


class FunnelNotRun(SafescopeError):
    """Requirement generation needs a funnel report."""


class RevisionMismatch(SafescopeError):
    def __init__(self, expected: int, got: int):
        super().__init__(f"inputs derived from revision {got}, state is at {expected}")
        self.expected = expected
        self.got = got
