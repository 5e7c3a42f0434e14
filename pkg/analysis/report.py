from __future__ import annotations

from typing import Any, Optional, Sequence

import json
from fractions import Fraction

from utils.tools import (
    format_flag,
    format_vector,
    format_rational,
    format_index_set,
)

from .problem import SolutionRecord, ProblemInstance
from .families import Radical, LambdaInterval, SolutionFamily
from .conditions import BoundednessReport, MultiplicityReport
from .enumerator import EnumerationResult

import config

Payload = dict[str, Any]


def rational(value: Fraction) -> Payload:
    return {"exact": format_rational(value), "approx": float(value)}


def vector(values: Sequence[Fraction]) -> Payload:
    return {
        "exact": [format_rational(_v) for _v in values],
        "approx": [float(_v) for _v in values],
    }


def indices(values: Sequence[int]) -> list[int]:
    """0-based indices to the 1-based form used in every report."""
    return [_i + 1 for _i in values]


def bound(value: Optional[Fraction | Radical], side: str) -> Payload:
    if value is None:
        return {"exact": side + "inf", "approx": None}

    return {"exact": str(value), "approx": float(value)}


def optional_rational(value: Optional[Fraction]) -> Optional[Payload]:
    return None if value is None else rational(value)


def instance_payload(inst: ProblemInstance) -> Payload:
    return {
        "m": inst.m,
        "n": inst.n,
        "l": inst.l,
        "epsilon": rational(inst.epsilon),
    }


def record_payload(record: SolutionRecord) -> Payload:
    return {
        "x": vector(record.x),
        "support": indices(record.support),
        "active_set": indices(record.active_set),
        "residual_sq": rational(record.residual_sq),
        "strict_interior": record.strict_interior,
    }


def enumeration_payload(result: EnumerationResult) -> Payload:
    return {
        "kstar": result.kstar,
        "optimal_supports": [indices(_s) for _s in result.optimal_supports],
        "witnesses": [
            record_payload(result.witnesses[_s]) for _s in result.optimal_supports
        ],
        "max_active_cardinality": result.max_active_cardinality,
        "max_active_witness": record_payload(result.max_active_witness),
        "empirical_gamma": {
            "label": "EMPIRICAL (enumerated witnesses only)",
            "value": optional_rational(result.empirical_gamma),
        },
    }


def necessary_payload(
    holds: bool, direction: Optional[Sequence[Fraction]]
) -> Payload:
    return {
        "holds": holds,
        "violation_direction": None if direction is None else vector(direction),
        # the three rearrangements of the stacked matrix share one null space
        "stacked_forms": {
            "[A_S; B_IbarS; B_IS]": holds,
            "[A_S; B_IS; B_IbarS]": holds,
            "Null(A_S), Null(B_IS), Null(B_IbarS)": holds,
        },
    }


def multiplicity_payload(report: MultiplicityReport) -> Payload:
    return {
        "strict_interior": report.strict_interior,
        "conditions": {
            _label: {
                "status": _outcome.status.value,
                "directions": [vector(_d) for _d in _outcome.directions],
                "notes": _outcome.notes,
            }
            for _label, _outcome in report.outcomes.items()
        },
    }


def interval_payload(interval: LambdaInterval) -> Payload:
    return {
        "lower": bound(interval.lower, "-"),
        "upper": bound(interval.upper, "+"),
        "lower_open": interval.lower_open,
        "upper_open": interval.upper_open,
        "rational_inner_lower": optional_rational(interval.rational_inner_lower),
        "rational_inner_upper": optional_rational(interval.rational_inner_upper),
    }


def family_payload(
    family: SolutionFamily,
    steps: Sequence[Fraction],
    samples: Sequence[SolutionRecord],
) -> Payload:

    return {
        "condition": family.condition_label,
        "direction": vector(family.direction),
        "interval": interval_payload(family.interval),
        "samples": [
            {"lambda": rational(_step), "x": vector(_record.x)}
            for _step, _record in zip(steps, samples)
        ],
        "verified": True,
    }


def boundedness_payload(report: BoundednessReport) -> Payload:
    payload = {
        "E1": report.E1,
        "E2": report.E2,
        "E3": report.E3,
        "spark": report.spark,
        "bounded_certified": report.bounded_certified,
        "verdict": report.verdict,
        "empirical_gamma": optional_rational(report.empirical_gamma),
    }

    if report.dependent_subset is not None:
        payload["dependent_columns"] = indices(report.dependent_subset)

    if report.cone_failure is not None:
        columns, eta = report.cone_failure
        payload["cone_failure"] = {"columns": indices(columns), "eta": vector(eta)}

    return payload


def envelope(command: str, **sections: Any) -> Payload:
    return {"schema_version": config.SCHEMA_VERSION, "command": command, **sections}


def _float17(value: float) -> str:
    text = format(value, ".17g")
    return text if any(_c in text for _c in ".en") else text + ".0"


def _encode(value: Any, depth: int) -> str:
    """json.dumps(indent=2) layout, with floats at 17 significant digits."""
    pad, close = "  " * (depth + 1), "  " * depth

    if isinstance(value, dict):
        if not value:
            return "{}"

        items = [
            f"{pad}{json.dumps(str(_key))}: {_encode(_item, depth + 1)}"
            for _key, _item in value.items()
        ]
        return "{\n" + ",\n".join(items) + f"\n{close}}}"

    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"

        items = [f"{pad}{_encode(_item, depth + 1)}" for _item in value]
        return "[\n" + ",\n".join(items) + f"\n{close}]"

    if isinstance(value, float):
        return _float17(value)

    return json.dumps(value)


def render_json(payload: Payload) -> str:
    return _encode(payload, 0) + "\n"


def _is_number(value: Any) -> bool:
    return isinstance(value, dict) and set(value) == {"exact", "approx"}


def _is_index_list(value: Any) -> bool:
    if not isinstance(value, list) or not value:
        return False

    return all(type(_v) is int for _v in value)


def _inline(value: Any) -> Optional[str]:
    """Single-line rendering of a leaf, or None for nested structures."""
    if value is None:
        return "none"

    if isinstance(value, bool):
        return format_flag(value)

    if isinstance(value, (int, float, str)):
        return str(value)

    if _is_number(value):
        exact, approx = value["exact"], value["approx"]

        if isinstance(exact, list):
            approx = "(" + ", ".join(repr(_a) for _a in approx) + ")"
            return f"{format_vector(exact)} ~ {approx}"

        return exact if approx is None else f"{exact} ~ {approx!r}"

    if _is_index_list(value):
        return format_index_set(_v - 1 for _v in value)

    if isinstance(value, list) and all(_is_index_list(_v) for _v in value):
        sets = [format_index_set(_i - 1 for _i in _v) for _v in value]
        return ", ".join(sets) or "none"

    return None


def _walk(value: Any, depth: int) -> list[str]:
    pad = "  " * depth
    lines = []

    if isinstance(value, dict):
        for _key, _item in value.items():
            text = _inline(_item)

            if text is not None:
                lines.append(f"{pad}{_key}: {text}")

            else:
                lines.append(f"{pad}{_key}:")
                lines.extend(_walk(_item, depth + 1))

    elif isinstance(value, list):
        if not value:
            lines.append(f"{pad}(none)")

        for n, _item in enumerate(value, start=1):
            text = _inline(_item)

            if text is not None:
                lines.append(f"{pad}- {text}")

            else:
                lines.append(f"{pad}[{n}]")
                lines.extend(_walk(_item, depth + 1))

    return lines


def render_text(payload: Payload) -> str:
    lines = [
        "=" * 50,
        f"SPARSETOOL {payload['command'].upper()} REPORT",
        f"Schema version: {payload['schema_version']}",
        "=" * 50,
        "",
    ]

    for _key, _value in payload.items():
        if _key in ("schema_version", "command"):
            continue

        lines.append(_key.upper().replace("_", " "))
        lines.append("-" * 30)

        text = _inline(_value)
        lines.extend([f"  {text}"] if text is not None else _walk(_value, 1))
        lines.append("")

    return "\n".join(lines)


def render(payload: Payload, fmt: str) -> str:
    return render_json(payload) if fmt == "json" else render_text(payload)
