"""Per-lecture summaries, timelines, sentence tables, and cross-lecture trends.

These functions produce the exact payloads the HTTP API serves; the
dashboard and the plot-emitting CLI both render from them without
recomputing anything.
"""

from __future__ import annotations

from dataclasses import dataclass

from .classify import Prediction
from .errors import MissingDuration, UnknownFeature, ZeroDuration
from .events import Event, Interval
from .taxonomy import Taxonomy, feature_by_id
from .transcript import Transcript

# one notion of "same occurrence" system-wide: matches the consensus merge gap
OCCURRENCE_MERGE_GAP = 2.0


@dataclass(frozen=True)
class LectureSummary:
    lecture_id: str
    counts: dict[str, int]
    durations: dict[str, float]
    source: str  # "gold" | "model"
    model_id: str | None = None


@dataclass(frozen=True)
class TimelineEntry:
    feature_id: str
    start: float  # minutes, 2 decimals
    end: float | None


@dataclass(frozen=True)
class SentenceTableRow:
    text: str
    start: float
    end: float


@dataclass(frozen=True)
class TrendReport:
    lectures: tuple[str, ...]
    per_feature: dict[str, list[tuple[int, float]]]  # (count, rate per hour)


def predictions_to_events(predictions: list[Prediction], transcript: Transcript,
                          taxonomy: Taxonomy) -> list[Event]:
    """Turn decided sentence labels into events.

    Adjacent decided sentences with the same label merge when their gap is
    below the occurrence merge gap; merged spans become state events, except
    point-kind features which yield a point at the span start.
    """
    by_sentence = {s.sentence_id: s for s in transcript.sentences}
    spans: dict[str, list[Interval]] = {}
    for p in sorted(predictions, key=lambda p: p.sentence_id):
        sentence = by_sentence.get(p.sentence_id)
        if sentence is None:
            continue
        for label in p.decided:
            spans.setdefault(label, []).append(Interval(sentence.start, sentence.end))

    events: list[Event] = []
    for fid in sorted(spans):
        merged: list[Interval] = []
        for iv in sorted(spans[fid], key=lambda i: i.start):
            if merged and iv.start - merged[-1].end < OCCURRENCE_MERGE_GAP:
                if iv.end > merged[-1].end:
                    merged[-1] = Interval(merged[-1].start, iv.end)
            else:
                merged.append(iv)
        feature = feature_by_id(taxonomy, fid)
        kind = feature.default_kind if feature else "state"
        for iv in merged:
            if kind == "point":
                events.append(Event(fid, "point", iv.start))
            else:
                events.append(Event(fid, "state", iv.start, iv.end))
    return events


def _merge_occurrences(events: list[Event]) -> list[Event]:
    """Merge state events of the same feature whose gap is below the
    occurrence gap; points pass through."""
    out: list[Event] = [e for e in events if e.kind == "point"]
    by_feature: dict[str, list[Event]] = {}
    for e in events:
        if e.kind == "state":
            by_feature.setdefault(e.feature_id, []).append(e)
    for fid in sorted(by_feature):
        merged: list[Interval] = []
        for e in sorted(by_feature[fid], key=lambda e: (e.start, e.end)):
            iv = Interval(e.start, e.end)
            if merged and iv.start - merged[-1].end < OCCURRENCE_MERGE_GAP:
                if iv.end > merged[-1].end:
                    merged[-1] = Interval(merged[-1].start, iv.end)
            else:
                merged.append(iv)
        out.extend(Event(fid, "state", iv.start, iv.end) for iv in merged)
    out.sort(key=lambda e: (e.feature_id, e.start))
    return out


def summarize_lecture(events: list[Event], taxonomy: Taxonomy,
                      lecture_id: str = "", source: str = "gold",
                      model_id: str | None = None) -> LectureSummary:
    """Occurrence counts and total state time per feature.

    Accepts gold or model event lists; sentence predictions convert first via
    predictions_to_events. Counts are merged occurrences, not sentences.
    """
    for e in events:
        if feature_by_id(taxonomy, e.feature_id) is None:
            raise UnknownFeature(f"event feature {e.feature_id!r} not in taxonomy")
    merged = _merge_occurrences(events)
    counts: dict[str, int] = {}
    durations: dict[str, float] = {}
    for e in merged:
        counts[e.feature_id] = counts.get(e.feature_id, 0) + 1
        if e.kind == "state":
            durations[e.feature_id] = round(
                durations.get(e.feature_id, 0.0) + (e.end - e.start), 3)
    return LectureSummary(lecture_id=lecture_id, counts=counts,
                          durations=durations, source=source, model_id=model_id)


def timeline(events: list[Event], taxonomy: Taxonomy) -> list[TimelineEntry]:
    """One entry per event with times in minutes, sorted by (feature, start)."""
    for e in events:
        if feature_by_id(taxonomy, e.feature_id) is None:
            raise UnknownFeature(f"event feature {e.feature_id!r} not in taxonomy")
    entries = [
        TimelineEntry(
            feature_id=e.feature_id,
            start=round(e.start / 60.0, 2),
            end=round(e.end / 60.0, 2) if e.end is not None else None)
        for e in events
    ]
    entries.sort(key=lambda t: (t.feature_id, t.start, t.end if t.end is not None else -1))
    return entries


def sentence_table(transcript: Transcript, predictions: list[Prediction],
                   feature_id: str,
                   taxonomy: Taxonomy | None = None) -> list[SentenceTableRow]:
    """Rows for every sentence whose decided labels include the feature."""
    if taxonomy is not None and feature_by_id(taxonomy, feature_id) is None:
        raise UnknownFeature(f"{feature_id!r} not in taxonomy")
    by_sentence = {s.sentence_id: s for s in transcript.sentences}
    rows = []
    for p in predictions:
        if feature_id in p.decided and p.sentence_id in by_sentence:
            s = by_sentence[p.sentence_id]
            rows.append(SentenceTableRow(text=s.text, start=s.start, end=s.end))
    rows.sort(key=lambda r: r.start)
    return rows


def trends(summaries: list[LectureSummary],
           durations: dict[str, float]) -> TrendReport:
    """Counts and per-hour rates per feature across lectures, caller order."""
    lecture_ids = []
    for summary in summaries:
        if summary.lecture_id not in durations:
            raise MissingDuration(f"no duration for {summary.lecture_id!r}")
        if durations[summary.lecture_id] <= 0:
            raise ZeroDuration(f"non-positive duration for {summary.lecture_id!r}")
        lecture_ids.append(summary.lecture_id)

    feature_ids = sorted({fid for s in summaries for fid in s.counts})
    per_feature: dict[str, list[tuple[int, float]]] = {}
    for fid in feature_ids:
        series = []
        for summary in summaries:
            count = summary.counts.get(fid, 0)
            hours = durations[summary.lecture_id] / 3600.0
            series.append((count, round(count / hours, 4)))
        per_feature[fid] = series
    return TrendReport(lectures=tuple(lecture_ids), per_feature=per_feature)


# -- payload serialization (used verbatim by the HTTP API) ---------------------

def summary_payload(summary: LectureSummary) -> dict:
    return {
        "lecture_id": summary.lecture_id,
        "counts": {fid: summary.counts[fid] for fid in sorted(summary.counts)},
        "durations": {fid: summary.durations[fid]
                      for fid in sorted(summary.durations)},
        "source": summary.source,
        "model_id": summary.model_id,
    }


def timeline_payload(entries: list[TimelineEntry]) -> list[dict]:
    return [
        {"feature_id": t.feature_id, "start": t.start, "end": t.end}
        for t in entries
    ]


def sentence_table_payload(rows: list[SentenceTableRow]) -> list[dict]:
    return [{"text": r.text, "start": r.start, "end": r.end} for r in rows]


def trends_payload(report: TrendReport) -> dict:
    return {
        "lectures": list(report.lectures),
        "per_feature": {
            fid: [[count, rate] for count, rate in series]
            for fid, series in sorted(report.per_feature.items())
        },
    }
