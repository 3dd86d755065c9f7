"""Temporal join of transcript sentences with gold events.

Produces the labeled sentence dataset the text classifiers train and
evaluate on. A sentence takes a state feature when the event covers enough
of it (overlap normalized by sentence length, so lecture-long events still
label their sentences) and a point feature when a gold point falls within a
small window around it.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from .consensus import GoldAnnotation
from .errors import LectureMismatch, ParseError, ValidationError
from .events import Interval, overlap
from .taxonomy import Taxonomy
from .transcript import Transcript

DEFAULT_QUESTION_FEATURES = ("asking_questions", "student_questions")


@dataclass(frozen=True)
class AlignConfig:
    state_overlap_fraction: float = 0.5
    point_tolerance: float = 1.0
    question_features: tuple[str, ...] = DEFAULT_QUESTION_FEATURES
    question_mark_fallback: bool = True

    def __post_init__(self):
        if not (0.0 < self.state_overlap_fraction <= 1.0):
            raise ValidationError("state_overlap_fraction must be in (0, 1]")
        if self.point_tolerance < 0:
            raise ValidationError("point_tolerance must be non-negative")


@dataclass(frozen=True)
class LabeledSentence:
    sentence_id: int
    text: str
    start: float
    end: float
    labels: frozenset[str]
    question_flag: bool


def label_sentences(transcript: Transcript, gold: GoldAnnotation,
                    taxonomy: Taxonomy,
                    config: AlignConfig | None = None) -> list[LabeledSentence]:
    """Assign gold features to each sentence of the transcript.

    Labels are restricted to the taxonomy's text_label_set; the question flag
    fires on question features or (optionally) a terminal question mark.
    """
    if transcript.lecture_id != gold.lecture_id:
        raise LectureMismatch(
            f"transcript {transcript.lecture_id!r} vs gold {gold.lecture_id!r}")
    config = config or AlignConfig()
    candidate_ids = set(taxonomy.text_label_set) | set(config.question_features)

    states = [e for e in gold.events if e.kind == "state" and e.feature_id in candidate_ids]
    points = [e for e in gold.events if e.kind == "point" and e.feature_id in candidate_ids]

    labeled = []
    for s in transcript.sentences:
        span = Interval(s.start, s.end)
        length = span.length()
        received = set()
        for e in states:
            if e.feature_id in received:
                continue
            if length > 0 and overlap(span, Interval(e.start, e.end)) / length >= \
                    config.state_overlap_fraction:
                received.add(e.feature_id)
        for e in points:
            if e.feature_id in received:
                continue
            if s.start - config.point_tolerance <= e.start <= s.end + config.point_tolerance:
                received.add(e.feature_id)
        question = bool(received & set(config.question_features))
        if not question and config.question_mark_fallback:
            question = s.text.rstrip().endswith("?")
        labeled.append(LabeledSentence(
            sentence_id=s.sentence_id,
            text=s.text,
            start=s.start,
            end=s.end,
            labels=frozenset(received & set(taxonomy.text_label_set)),
            question_flag=question,
        ))
    return labeled


def export_dataset(labeled: list[LabeledSentence], taxonomy: Taxonomy) -> str:
    """Comma-delimited dataset: id, times, question flag, one 0/1 column per
    text label in taxonomy order, then the quoted text."""
    header = ["sentence_id", "start", "end", "question_flag",
              *taxonomy.text_label_set, "text"]
    lines = [",".join(header)]
    for s in labeled:
        flags = ["1" if fid in s.labels else "0" for fid in taxonomy.text_label_set]
        quoted = '"' + s.text.replace('"', '""') + '"'
        lines.append(",".join([str(s.sentence_id), repr(s.start), repr(s.end),
                               "1" if s.question_flag else "0", *flags, quoted]))
    return "\n".join(lines) + "\n"


def import_dataset(document: str, taxonomy: Taxonomy) -> list[LabeledSentence]:
    """Inverse of export_dataset; rejects documents whose label columns do not
    match the taxonomy's text_label_set."""
    reader = csv.reader(io.StringIO(document))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty dataset document")
    expected = ["sentence_id", "start", "end", "question_flag",
                *taxonomy.text_label_set, "text"]
    if header != expected:
        raise ParseError(f"dataset header {header} != expected {expected}")
    labeled = []
    for row in reader:
        if not row:
            continue
        if len(row) != len(expected):
            raise ParseError(f"row width {len(row)} != {len(expected)}: {row}")
        labels = frozenset(
            fid for fid, flag in zip(taxonomy.text_label_set, row[4:-1])
            if flag == "1")
        labeled.append(LabeledSentence(
            sentence_id=int(row[0]),
            text=row[-1],
            start=float(row[1]),
            end=float(row[2]),
            labels=labels,
            question_flag=row[3] == "1",
        ))
    return labeled
