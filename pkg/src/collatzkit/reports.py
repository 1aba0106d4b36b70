"""Report envelopes and renderers shared by the command-line surface.

Payloads are deterministic for a given config and tool version: keys are
sorted, list orders are fixed by the producing code, and integers that may
not fit in 64 bits are rendered as decimal strings.  Wall time is the one
envelope field excluded from byte-identity comparisons.
"""

from __future__ import annotations

import csv
import io
import json

from . import __version__

INT64_MAX = 2**63


def _sanitize(value):
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, int):
        return value if -INT64_MAX <= value < INT64_MAX else str(value)
    if isinstance(value, float):
        return value
    if isinstance(value, dict):
        return {k: _sanitize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_sanitize(v) for v in value]
    return value


def make_envelope(command: str, config: dict, payload: dict,
                  violations: int, wall_time: float) -> dict:
    return {
        "tool": "collatzkit",
        "version": __version__,
        "command": command,
        "config": _sanitize(config),
        "wall_time_s": round(wall_time, 6),
        "violations": violations,
        "verdict": "pass" if violations == 0 else "fail",
        "payload": _sanitize(payload),
    }


def render_json(envelope: dict) -> str:
    return json.dumps(envelope, sort_keys=True, indent=2) + "\n"


def _rows_for_csv(command: str, payload: dict) -> tuple[list[str], list[list]]:
    if command == "parity":
        header = ["bucket", "pigeons", "pigeonholes", "ratio", "partial_sum"]
        rows = [[r["bucket"], r["pigeons"], r["pigeonholes"], r["ratio"], r["partial_sum"]]
                for r in payload["rows"]]
        return header, rows
    if command == "stats":
        return ["length", "count"], [list(pair) for pair in payload["length_histogram"]]
    if command == "audit":
        header = ["length", "pattern", "count", "expected", "exact"]
        return header, [[r["length"], r["pattern"], r["count"], r["expected"], r["exact"]]
                        for r in payload["rows"]]
    if command == "pcycles":
        rows = [[payload["p"], c["canonical"], c["length"], *c["members"]]
                for c in payload["cycles"]]
        return ["p", "canonical", "length", "members"], rows
    raise ValueError(f"csv output is not defined for the {command} command")


def render_csv(command: str, payload: dict) -> str:
    header, rows = _rows_for_csv(command, payload)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _format_table(header: list[str], rows: list[list]) -> str:
    cells = [header] + [[str(c) for c in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in cells]
    return "\n".join(lines) + "\n"


def render_table(command: str, envelope: dict) -> str:
    payload = envelope["payload"]
    if command == "parity":
        header = ["bucket", "pigeons", "pigeonholes", "ratio", "partial_sum"]
        rows = [[r["bucket"], r["pigeons"], r["pigeonholes"], r["ratio"], r["partial_sum"]]
                for r in payload["rows"]]
        body = _format_table(header, rows)
        return body + f"sum: {payload['final_sum']}\n"
    if command == "stats":
        body = _format_table(["length", "count"],
                             [list(pair) for pair in payload["length_histogram"]])
        return body + f"chains: {payload['strings_found']}  mean length: {payload['mean_length']}\n"
    if command == "audit":
        header = ["length", "pattern", "count", "expected", "exact"]
        rows = [[r["length"], r["pattern"], r["count"], r["expected"], r["exact"]]
                for r in payload["rows"]]
        return _format_table(header, rows)
    if command == "pcycles":
        header = ["canonical", "length", "members"]
        rows = [[c["canonical"], c["length"], " ".join(str(m) for m in c["members"])]
                for c in payload["cycles"]]
        return _format_table(header, rows)
    lines = [f"verdict: {envelope['verdict']}"]
    for key in sorted(payload):
        value = payload[key]
        if isinstance(value, list) and len(value) > 20:
            value = f"[{len(value)} entries]"
        lines.append(f"{key}: {value}")
    return "\n".join(lines) + "\n"


def render(envelope: dict, fmt: str) -> str:
    if fmt == "json":
        return render_json(envelope)
    if fmt == "csv":
        return render_csv(envelope["command"], envelope["payload"])
    if fmt == "table":
        return render_table(envelope["command"], envelope)
    raise ValueError(f"unknown output format {fmt!r}")
