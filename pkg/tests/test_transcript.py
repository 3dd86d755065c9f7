import json

import pytest

from lectio.errors import EmptyInput, OrderError, ParseError
from lectio.transcript import (AsrSegment, normalize_for_wer, parse_asr_json,
                               reflow_sentences)


def test_parse_single_segment():
    doc = '{"segments":[{"id":0,"start":0.0,"end":3.2,"text":" Hello everyone."}]}'
    segments = parse_asr_json(doc)
    assert segments == [AsrSegment(0, 0.0, 3.2, " Hello everyone.")]


def test_parse_empty_segments():
    assert parse_asr_json('{"segments":[]}') == []


def test_parse_preserves_whitespace():
    doc = '{"segments":[{"id":0,"start":0,"end":1,"text":"  padded  "}]}'
    assert parse_asr_json(doc)[0].text == "  padded  "


def test_parse_extra_fields_ignored():
    doc = json.dumps({
        "text": "whole", "language": "en",
        "segments": [{"id": 0, "start": 0, "end": 1, "text": "x",
                      "avg_logprob": -0.3}],
    })
    assert len(parse_asr_json(doc)) == 1


def test_parse_rejects_bad_segments():
    with pytest.raises(ParseError):
        parse_asr_json('{"segments":[{"id":0,"start":2.0,"end":2.0,"text":"x"}]}')
    with pytest.raises(ParseError):
        parse_asr_json('{"segments":[{"id":0,"start":0.0,"text":"x"}]}')
    with pytest.raises(ParseError):
        parse_asr_json('{"no_segments": true}')
    with pytest.raises(ParseError):
        parse_asr_json("not json at all")


def test_parse_rejects_overlap_beyond_tolerance():
    doc = json.dumps({"segments": [
        {"id": 0, "start": 0.0, "end": 5.0, "text": "a"},
        {"id": 1, "start": 3.0, "end": 6.0, "text": "b"},
    ]})
    with pytest.raises(OrderError):
        parse_asr_json(doc)


def test_parse_allows_overlap_within_tolerance():
    doc = json.dumps({"segments": [
        {"id": 0, "start": 0.0, "end": 5.0, "text": "a"},
        {"id": 1, "start": 4.96, "end": 6.0, "text": "b"},
    ]})
    assert len(parse_asr_json(doc)) == 2


# -- reflow ---------------------------------------------------------------

def interpolation_oracle(segments, char_pos):
    """Independent proportional-position computation for a char offset."""
    offset = 0
    for seg in segments:
        if char_pos <= offset + len(seg.text):
            frac = (char_pos - offset) / len(seg.text)
            return seg.start + frac * (seg.end - seg.start)
        offset += len(seg.text)
    return segments[-1].end


def test_reflow_equal_char_count_splits_at_midpoint():
    # "abcd. Fgh." -> chunks "abcd." and " Fgh.", 5 chars each
    segs = [AsrSegment(0, 0.0, 4.0, "abcd. Fgh.")]
    sentences = reflow_sentences(segs)
    assert [s.text for s in sentences] == ["abcd.", "Fgh."]
    assert (sentences[0].start, sentences[0].end) == (0.0, 2.0)
    assert (sentences[1].start, sentences[1].end) == (2.0, 4.0)


def test_reflow_proportional_boundary():
    # "Hello. Bye." boundary right after the first terminator: 6/11 of 4s
    segs = [AsrSegment(0, 0.0, 4.0, "Hello. Bye.")]
    sentences = reflow_sentences(segs)
    expected = round(interpolation_oracle(segs, 6), 3)
    assert expected == round(4.0 * 6 / 11, 3) == 2.182
    assert [s.text for s in sentences] == ["Hello.", "Bye."]
    assert sentences[0].end == expected
    assert sentences[1].start == expected


def test_reflow_no_terminator():
    segs = [AsrSegment(0, 1.0, 3.5, "No terminator here")]
    sentences = reflow_sentences(segs)
    assert len(sentences) == 1
    assert sentences[0].start == 1.0
    assert sentences[0].end == 3.5
    assert sentences[0].text == "No terminator here"


def test_reflow_cross_segment_merge():
    segs = [AsrSegment(0, 0.0, 2.0, "What is"),
            AsrSegment(1, 2.0, 4.5, " a wave?")]
    sentences = reflow_sentences(segs)
    assert len(sentences) == 1
    assert sentences[0].text == "What is a wave?"
    assert sentences[0].start == 0.0
    assert sentences[0].end == 4.5


def test_reflow_abbreviation_guard():
    segs = [AsrSegment(0, 0.0, 4.0, "Use e.g. the lab. Then stop.")]
    sentences = reflow_sentences(segs)
    assert [s.text for s in sentences] == ["Use e.g. the lab.", "Then stop."]


def test_reflow_question_and_bang_split_before_lowercase():
    segs = [AsrSegment(0, 0.0, 6.0, "Why? because waves! obviously.")]
    sentences = reflow_sentences(segs)
    assert [s.text for s in sentences] == ["Why?", "because waves!", "obviously."]


def test_reflow_trailing_whitespace_merges():
    segs = [AsrSegment(0, 0.0, 4.0, "Done.   ")]
    sentences = reflow_sentences(segs)
    assert len(sentences) == 1
    assert sentences[0].end == 4.0


def test_reflow_tiles_input_span():
    segs = [AsrSegment(0, 0.0, 5.0, " First one. Second"),
            AsrSegment(1, 5.5, 9.0, " one continues. Third here.")]
    sentences = reflow_sentences(segs)
    assert sentences[0].start == segs[0].start
    assert sentences[-1].end == segs[-1].end
    for a, b in zip(sentences, sentences[1:]):
        gap = round(b.start - a.end, 3)
        assert gap in (0.0, 0.5)  # contiguous, or exactly the inter-segment gap
    joined = " ".join(s.text for s in sentences).split()
    original = "".join(s.text for s in segs).split()
    assert joined == original


def test_reflow_sentence_ids_dense():
    segs = [AsrSegment(0, 0.0, 9.0, "One. Two. Three.")]
    sentences = reflow_sentences(segs)
    assert [s.sentence_id for s in sentences] == [0, 1, 2]
    assert all(s.text for s in sentences)


def test_reflow_empty_input():
    with pytest.raises(EmptyInput):
        reflow_sentences([])
    with pytest.raises(EmptyInput):
        reflow_sentences([AsrSegment(0, 0.0, 1.0, "   ")])


# -- normalize_for_wer -------------------------------------------------------

def test_normalize_examples():
    assert normalize_for_wer("Hello, World!") == ["hello", "world"]
    assert normalize_for_wer("don't stop") == ["don't", "stop"]
    assert normalize_for_wer("  ") == []


def test_normalize_strips_edge_apostrophes():
    assert normalize_for_wer("'quoted' dogs' bones") == ["quoted", "dogs", "bones"]


def test_normalize_keeps_digits():
    assert normalize_for_wer("room 101, 3rd floor") == ["room", "101", "3rd", "floor"]


def test_normalize_idempotent():
    for text in ("Hello, World!", "don't STOP now...", "x  y\tz", "a-b c_d"):
        once = normalize_for_wer(text)
        again = normalize_for_wer(" ".join(once))
        assert once == again
