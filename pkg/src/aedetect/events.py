"""Detected hits and their JSON/CSV serialisation (shared by all detectors)."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

METHODS = ("ste-zcr", "ia", "sta-lta", "aic")

EVENT_FIELDS = ("method", "onset_s", "endpoint_s", "lifespan_s",
                "onset_idx", "endpoint_idx", "truncated")


@dataclass(frozen=True)
class AeEvent:
    """One hit as sample indices into the analysed frame.

    ``core_end`` is only produced by the STE-ZCR detector; the baselines
    leave it ``None``. ``truncated`` marks an endpoint (or onset) forced by
    the frame edge or by a following hit.
    """

    onset: int
    endpoint: int
    core_end: int | None = None
    truncated: bool = False

    def __post_init__(self):
        if self.onset < 0 or self.endpoint < self.onset:
            raise ValueError(f"bad event interval [{self.onset}, {self.endpoint}]")
        if self.core_end is not None and not self.onset < self.core_end <= self.endpoint:
            raise ValueError(
                f"core end {self.core_end} outside ({self.onset}, {self.endpoint}]")

    @property
    def lifespan(self) -> int:
        return self.endpoint - self.onset


def check_ordered(events) -> None:
    """Raise unless events are strictly ordered and non-overlapping."""
    for a, b in zip(events, events[1:]):
        if not a.endpoint < b.onset:
            raise AssertionError(f"events overlap or are out of order: {a} then {b}")


def event_rows(events, sample_rate: float, method: str) -> list[dict]:
    rows = []
    for ev in events:
        rows.append({
            "method": method,
            "onset_s": ev.onset / sample_rate,
            "endpoint_s": ev.endpoint / sample_rate,
            "lifespan_s": ev.lifespan / sample_rate,
            "onset_idx": int(ev.onset),
            "endpoint_idx": int(ev.endpoint),
            "truncated": bool(ev.truncated),
        })
    return rows


def events_to_json(events, sample_rate: float, method: str, manifest: dict | None = None) -> str:
    doc = {
        "manifest": manifest or {},
        "method": method,
        "sample_rate": sample_rate,
        "events": event_rows(events, sample_rate, method),
    }
    return json.dumps(doc, indent=2)


def events_to_csv(events, sample_rate: float, method: str, manifest: dict | None = None) -> str:
    buf = io.StringIO()
    if manifest is not None:
        buf.write("# manifest: " + json.dumps(manifest, sort_keys=True) + "\n")
    buf.write(f"# sample_rate: {sample_rate!r}\n")
    w = csv.DictWriter(buf, fieldnames=EVENT_FIELDS, lineterminator="\n")
    w.writeheader()
    for row in event_rows(events, sample_rate, method):
        w.writerow({**row, "onset_s": repr(row["onset_s"]), "endpoint_s": repr(row["endpoint_s"]),
                    "lifespan_s": repr(row["lifespan_s"]),
                    "truncated": "true" if row["truncated"] else "false"})
    return buf.getvalue()


def _event_from_row(row: dict) -> AeEvent:
    trunc = row["truncated"]
    if isinstance(trunc, str):
        trunc = trunc.strip().lower() in ("true", "1", "yes")
    return AeEvent(int(row["onset_idx"]), int(row["endpoint_idx"]), truncated=bool(trunc))


def read_events(text: str) -> tuple[list[AeEvent], float, str]:
    """Parse what :func:`events_to_json` or :func:`events_to_csv` wrote.

    Returns ``(events, sample_rate, method)``.
    """
    stripped = text.lstrip()
    if stripped.startswith("{"):
        doc = json.loads(text)
        evs = [_event_from_row(r) for r in doc["events"]]
        return evs, float(doc["sample_rate"]), doc.get("method", "")
    rate = None
    lines = []
    for line in text.splitlines():
        if line.startswith("# sample_rate:"):
            rate = float(line.split(":", 1)[1])
        elif not line.startswith("#"):
            lines.append(line)
    rows = list(csv.DictReader(lines))
    if rate is None:
        # recover the rate from any event with a non-zero onset
        for r in rows:
            if int(r["onset_idx"]) > 0:
                rate = int(r["onset_idx"]) / float(r["onset_s"])
                break
    if rate is None:
        raise ValueError("event CSV carries no sample rate")
    method = rows[0]["method"] if rows else ""
    return [_event_from_row(r) for r in rows], rate, method
