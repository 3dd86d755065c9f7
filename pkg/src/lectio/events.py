"""Timed-event data model for lecture annotations.

Events are either points (a single instant) or states (an interval with a
start and an end). An observation is one annotator's full set of events for
one lecture; an annotation bundles every observation of that lecture.
Behavioral-coding exports (tab- or comma-delimited, one row per point event
or per state START/STOP) are ingested here.

Timestamps are seconds rounded to 3 decimals at ingestion so comparisons are
bit-exact.
"""

from __future__ import annotations

import csv
import io
import logging
import re
from dataclasses import dataclass

from .errors import PairingError, ParseError, ValidationError
from .taxonomy import Taxonomy

log = logging.getLogger(__name__)

TIME_DECIMALS = 3


def round_time(seconds: float) -> float:
    return round(float(seconds), TIME_DECIMALS)


@dataclass(frozen=True)
class Interval:
    start: float
    end: float

    def __post_init__(self):
        if self.end < self.start:
            raise ValidationError(f"interval end {self.end} before start {self.start}")

    def length(self) -> float:
        return self.end - self.start


@dataclass(frozen=True)
class Event:
    """A single feature occurrence: a point in time or a state interval."""

    feature_id: str
    kind: str  # "point" | "state"
    start: float
    end: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "start", round_time(self.start))
        if self.end is not None:
            object.__setattr__(self, "end", round_time(self.end))
        if self.start < 0:
            raise ValidationError(f"negative timestamp {self.start}")
        if self.kind == "point":
            if self.end is not None:
                raise ValidationError("point events carry no end time")
        elif self.kind == "state":
            if self.end is None or self.end <= self.start:
                raise ValidationError(
                    f"state event needs end > start, got [{self.start}, {self.end}]")
        else:
            raise ValidationError(f"unknown event kind {self.kind!r}")

    def interval(self) -> Interval:
        return Interval(self.start, self.end if self.end is not None else self.start)


@dataclass(frozen=True)
class Observation:
    """One annotator's events for one lecture."""

    lecture_id: str
    annotator_id: str
    events: tuple[Event, ...]
    source: str = "human"  # "human" | "model"
    model_id: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        if self.source not in ("human", "model"):
            raise ValidationError(f"unknown observation source {self.source!r}")
        if (self.source == "model") != (self.model_id is not None):
            raise ValidationError("model_id present iff source is 'model'")


@dataclass(frozen=True)
class Annotation:
    """All observations collected for one lecture."""

    lecture_id: str
    observations: tuple[Observation, ...]

    def __post_init__(self):
        object.__setattr__(self, "observations", tuple(self.observations))
        if not self.observations:
            raise ValidationError("annotation needs at least one observation")
        for obs in self.observations:
            if obs.lecture_id != self.lecture_id:
                raise ValidationError(
                    f"observation lecture {obs.lecture_id!r} != {self.lecture_id!r}")


def overlap(a: Interval, b: Interval) -> float:
    """Shared duration of two intervals; 0 when they only touch."""
    return max(0.0, min(a.end, b.end) - max(a.start, b.start))


def merge_intervals(intervals: list[Interval]) -> list[Interval]:
    """Union of intervals as a sorted list of disjoint intervals."""
    merged: list[Interval] = []
    for iv in sorted(intervals, key=lambda i: (i.start, i.end)):
        if merged and iv.start <= merged[-1].end:
            if iv.end > merged[-1].end:
                merged[-1] = Interval(merged[-1].start, iv.end)
        else:
            merged.append(iv)
    return merged


def total_duration(events: list[Event] | tuple[Event, ...], feature_id: str) -> float:
    """Union length of the feature's state events; points contribute nothing."""
    intervals = [Interval(e.start, e.end) for e in events
                 if e.feature_id == feature_id and e.kind == "state"]
    return sum(iv.length() for iv in merge_intervals(intervals))


# -- behavioral-coding export ingestion --------------------------------------

EXPORT_COLUMNS = ("observation_id", "media_file", "behavior", "behavior_type",
                  "time", "status")


def _slug(name: str) -> str:
    return re.sub(r"[^a-z0-9]+", "_", name.strip().lower()).strip("_") or "unnamed"


def _behavior_mapper(taxonomy: Taxonomy | None):
    if taxonomy is None:
        return lambda name: name.strip()
    by_id = {f.id: f.id for f in taxonomy.features}
    by_display = {f.display_name.strip().lower(): f.id for f in taxonomy.features}

    def map_name(name: str) -> str:
        name = name.strip()
        if name in by_id:
            return name
        return by_display.get(name.lower(), f"ext_{_slug(name)}")

    return map_name


def _lecture_id_from_media(media_file: str) -> str:
    stem = media_file.replace("\\", "/").rsplit("/", 1)[-1]
    return stem.rsplit(".", 1)[0] if "." in stem else stem


def parse_boris_export(document: str, taxonomy: Taxonomy | None = None) -> list[Observation]:
    """Parse a behavioral-coding export into observations.

    One observation per observation_id group; POINT rows become point events,
    STATE START/STOP rows pair into state events. Behavior names resolve to
    feature ids via the taxonomy's display names (case-insensitive, trimmed);
    unmapped names keep a synthetic ``ext_``-prefixed id and are reported via
    a warning, never dropped.
    """
    sample = document[:4096]
    delimiter = "\t" if "\t" in sample.split("\n", 1)[0] else ","
    reader = csv.DictReader(io.StringIO(document), delimiter=delimiter)
    if reader.fieldnames is None:
        raise ParseError("empty export document")
    header = [h.strip() for h in reader.fieldnames]
    missing = [c for c in EXPORT_COLUMNS if c not in header]
    if missing:
        raise ParseError(f"export missing columns: {missing}")

    rows = []
    for lineno, row in enumerate(reader, start=2):
        try:
            t = float(row["time"])
        except (TypeError, ValueError):
            raise ParseError(f"non-numeric time {row.get('time')!r} on line {lineno}")
        behavior_type = (row["behavior_type"] or "").strip().upper()
        status = (row["status"] or "").strip().upper()
        if behavior_type not in ("POINT", "STATE"):
            raise ParseError(f"unknown behavior_type {row['behavior_type']!r} on line {lineno}")
        if status not in ("START", "STOP", "POINT"):
            raise ParseError(f"unknown status {row['status']!r} on line {lineno}")
        rows.append({
            "observation_id": (row["observation_id"] or "").strip(),
            "media_file": (row["media_file"] or "").strip(),
            "behavior": (row["behavior"] or "").strip(),
            "behavior_type": behavior_type,
            "time": round_time(t),
            "status": status,
        })

    map_name = _behavior_mapper(taxonomy)
    unmapped: set[str] = set()

    observations: list[Observation] = []
    seen_order: list[str] = []
    by_obs: dict[str, list[dict]] = {}
    for row in rows:
        oid = row["observation_id"]
        if oid not in by_obs:
            by_obs[oid] = []
            seen_order.append(oid)
        by_obs[oid].append(row)

    for oid in seen_order:
        group = sorted(by_obs[oid], key=lambda r: r["time"])
        media = group[0]["media_file"]
        events: list[Event] = []
        open_states: dict[str, float] = {}
        for row in group:
            fid = map_name(row["behavior"])
            if fid.startswith("ext_"):
                unmapped.add(row["behavior"])
            if row["behavior_type"] == "POINT":
                if row["status"] != "POINT":
                    raise PairingError(
                        f"POINT behavior with status {row['status']} in {oid}")
                events.append(Event(fid, "point", row["time"]))
                continue
            # STATE row
            if row["status"] == "START":
                if fid in open_states:
                    raise PairingError(
                        f"STATE {row['behavior']!r} started twice without stop in {oid}")
                open_states[fid] = row["time"]
            elif row["status"] == "STOP":
                if fid not in open_states:
                    raise PairingError(
                        f"STATE {row['behavior']!r} stopped without start in {oid}")
                start = open_states.pop(fid)
                if row["time"] <= start:
                    raise PairingError(
                        f"STATE {row['behavior']!r} stop {row['time']} not after "
                        f"start {start} in {oid}")
                events.append(Event(fid, "state", start, row["time"]))
            else:
                raise PairingError(
                    f"STATE behavior with status {row['status']} in {oid}")
        if open_states:
            raise PairingError(
                f"unclosed STATE events in {oid}: {sorted(open_states)}")
        events.sort(key=lambda e: (e.start, e.end if e.end is not None else e.start,
                                   e.feature_id))
        observations.append(Observation(
            lecture_id=_lecture_id_from_media(media),
            annotator_id=oid,
            events=tuple(events),
        ))

    if unmapped:
        log.warning("export behaviors not in taxonomy, kept with ext_ ids: %s",
                    sorted(unmapped))
    return observations


def serialize_boris_export(observations: list[Observation],
                           taxonomy: Taxonomy | None = None,
                           delimiter: str = ",") -> str:
    """Render observations back into the export format.

    Feature ids are written as behaviors via the taxonomy display name when
    available; the (behavior, kind, start, end) multiset round-trips.
    """
    display = {f.id: f.display_name for f in taxonomy.features} if taxonomy else {}
    out = io.StringIO()
    writer = csv.writer(out, delimiter=delimiter, lineterminator="\n")
    writer.writerow(EXPORT_COLUMNS)
    for obs in observations:
        media = f"{obs.lecture_id}.mp4"
        rows = []
        for ev in obs.events:
            behavior = display.get(ev.feature_id, ev.feature_id)
            if ev.kind == "point":
                rows.append((ev.start, behavior, "POINT", ev.start, "POINT"))
            else:
                rows.append((ev.start, behavior, "STATE", ev.start, "START"))
                rows.append((ev.start, behavior, "STATE", ev.end, "STOP"))
        rows.sort(key=lambda r: (r[3], r[0]))
        for _, behavior, btype, t, status in rows:
            writer.writerow((obs.annotator_id, media, behavior, btype,
                             f"{t:.3f}", status))
    return out.getvalue()


# -- canonical event document -------------------------------------------------

def observation_to_doc(obs: Observation) -> dict:
    """The JSON-ready event document used across the system."""
    return {
        "lecture_id": obs.lecture_id,
        "annotator_id": obs.annotator_id,
        "source": obs.source,
        "model_id": obs.model_id,
        "events": [
            {"feature_id": e.feature_id, "kind": e.kind,
             "start": e.start, "end": e.end}
            for e in obs.events
        ],
    }


def observation_from_doc(doc: dict) -> Observation:
    try:
        events = tuple(
            Event(e["feature_id"], e["kind"], e["start"], e.get("end"))
            for e in doc["events"]
        )
        return Observation(
            lecture_id=doc["lecture_id"],
            annotator_id=doc["annotator_id"],
            events=events,
            source=doc.get("source", "human"),
            model_id=doc.get("model_id"),
        )
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed event document: {exc}") from exc
