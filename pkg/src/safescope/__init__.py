"""Diagnostic-specification triage toolkit for functional-safety concept work.

Takes a subsystem's diagnostic specification (monitors, DTCs, lamps) plus a
platform model, classifies monitors with deterministic rules, collects expert
answers to a fixed questionnaire, runs the staged reduction funnel, traces
failure propagation, and emits the subsystem report consumed by vehicle
architects.
"""

__version__ = "0.1.0"
