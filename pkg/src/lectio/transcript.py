"""ASR transcript ingestion and sentence reflow.

Speech recognizers emit timed segments; classification works on timed
sentences. ``reflow_sentences`` joins the segment stream, splits it at
sentence terminators, and interpolates each sentence boundary inside its
covering segment by proportional character position, so the output sentences
tile the input span exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import EmptyInput, OrderError, ParseError

SEGMENT_OVERLAP_TOLERANCE = 0.05
_TERMINATORS = ".?!"


@dataclass(frozen=True)
class AsrSegment:
    index: int
    start: float
    end: float
    text: str


@dataclass(frozen=True)
class SentenceRecord:
    sentence_id: int
    start: float
    end: float
    text: str


@dataclass(frozen=True)
class Transcript:
    lecture_id: str
    language: str
    sentences: tuple[SentenceRecord, ...]

    def duration(self) -> float:
        return self.sentences[-1].end if self.sentences else 0.0


def parse_asr_json(document: str) -> list[AsrSegment]:
    """Parse an ASR JSON document into ordered segments.

    Schema: object with required "segments" (array of {id, start, end, text})
    and optional "text"; extra fields are ignored. Segments must be ordered
    and non-overlapping beyond a 0.05s tolerance.
    """
    try:
        raw = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict) or "segments" not in raw:
        raise ParseError('ASR document must be an object with a "segments" array')
    if not isinstance(raw["segments"], list):
        raise ParseError('"segments" must be an array')

    segments: list[AsrSegment] = []
    for pos, entry in enumerate(raw["segments"]):
        if not isinstance(entry, dict):
            raise ParseError(f"segment {pos} is not an object")
        try:
            idx = entry["id"]
            start = entry["start"]
            end = entry["end"]
            text = entry["text"]
        except KeyError as exc:
            raise ParseError(f"segment {pos} missing field {exc}") from exc
        if not isinstance(idx, int) or isinstance(idx, bool) or idx < 0:
            raise ParseError(f"segment {pos} id must be a non-negative integer")
        if not isinstance(start, (int, float)) or not isinstance(end, (int, float)):
            raise ParseError(f"segment {pos} start/end must be numbers")
        if not isinstance(text, str):
            raise ParseError(f"segment {pos} text must be a string")
        if end <= start:
            raise ParseError(f"segment {pos} end {end} not after start {start}")
        segments.append(AsrSegment(index=idx, start=float(start), end=float(end),
                                   text=text))

    for prev, cur in zip(segments, segments[1:]):
        if cur.start < prev.end - SEGMENT_OVERLAP_TOLERANCE:
            raise OrderError(
                f"segment starting {cur.start} overlaps previous ending {prev.end}")
    return segments


def _split_positions(text: str) -> list[int]:
    """Character positions just after each sentence terminator that splits.

    '?' and '!' split when followed by whitespace or end of text; '.' splits
    only when followed by whitespace then an uppercase letter, or end of text
    (cheap guard against abbreviations).
    """
    positions = []
    n = len(text)
    for i, ch in enumerate(text):
        if ch not in _TERMINATORS:
            continue
        j = i + 1
        if j >= n:
            positions.append(j)
            continue
        if not text[j].isspace():
            continue
        if ch in "?!":
            positions.append(j)
            continue
        k = j
        while k < n and text[k].isspace():
            k += 1
        if k >= n or text[k].isupper():
            positions.append(j)
    return positions


def reflow_sentences(segments: list[AsrSegment]) -> list[SentenceRecord]:
    """Re-split a segment stream into timed sentences.

    Timestamps are interpolated linearly over characters within the owning
    segment; a sentence's boundary is the position right after its final
    terminator, with inter-sentence whitespace accruing to the following
    sentence and a trailing unterminated remainder merging into the last
    sentence when it is whitespace-only.
    """
    segs = [s for s in segments if s.text]
    if not segs or not "".join(s.text for s in segs).strip():
        raise EmptyInput("no non-whitespace text in segments")

    # cumulative character offsets of each segment in the joined stream
    offsets = [0]
    for s in segs:
        offsets.append(offsets[-1] + len(s.text))
    joined = "".join(s.text for s in segs)
    total = offsets[-1]

    def time_at(pos: int, side: str) -> float:
        """Time of a character-stream position.

        At exact segment boundaries the 'end' side maps to the earlier
        segment's end and the 'start' side to the later segment's start, so
        inter-segment gaps are preserved.
        """
        if pos <= 0:
            return segs[0].start
        if pos >= total:
            return segs[-1].end
        for k, s in enumerate(segs):
            lo, hi = offsets[k], offsets[k + 1]
            if pos == lo:
                return s.start if side == "start" else segs[k - 1].end
            if lo < pos < hi:
                frac = (pos - lo) / (hi - lo)
                return s.start + frac * (s.end - s.start)
        return segs[-1].end

    bounds = _split_positions(joined)
    if not bounds:
        bounds = [total]
    elif joined[bounds[-1]:].strip():
        bounds.append(total)  # unterminated tail becomes its own sentence
    else:
        bounds[-1] = total  # whitespace-only tail merges into the last sentence

    sentences: list[SentenceRecord] = []
    lo = 0
    for pos in bounds:
        text = joined[lo:pos].strip()
        start = round(time_at(lo, "start"), 3)
        end = round(time_at(pos, "end"), 3)
        if not text:
            lo = pos
            continue
        sentences.append(SentenceRecord(
            sentence_id=len(sentences), start=start, end=end, text=text))
        lo = pos
    return sentences


def normalize_for_wer(text: str) -> list[str]:
    """Word tokens for error-rate scoring.

    Lowercase; every character that is not a letter, digit, or apostrophe
    becomes a space; apostrophes survive only inside words; empty tokens drop.
    """
    cleaned = "".join(
        ch if ch.isalnum() or ch == "'" else " " for ch in text.lower())
    tokens = []
    for tok in cleaned.split():
        tok = tok.strip("'")
        if tok:
            tokens.append(tok)
    return tokens
