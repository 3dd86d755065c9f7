import functools
import random

import pytest
from hypothesis import given, strategies as st

from lectio.errors import EmptyReference, MissingHypothesis
from lectio.wer import (benchmark, load_reported_benchmark,
                        render_benchmark_table, wer)


def recursive_edit_cost(reference, hypothesis):
    """Brute-force recursive edit distance oracle (unit costs)."""
    @functools.lru_cache(maxsize=None)
    def go(i, j):
        if i == len(reference):
            return len(hypothesis) - j
        if j == len(hypothesis):
            return len(reference) - i
        return min(
            go(i + 1, j + 1) + (reference[i] != hypothesis[j]),
            go(i + 1, j) + 1,
            go(i, j + 1) + 1,
        )
    return go(0, 0)


def test_wer_identity():
    b = wer(["hello", "world"], ["hello", "world"])
    assert (b.substitutions, b.deletions, b.insertions) == (0, 0, 0)
    assert b.wer == 0.0


def test_wer_single_deletion():
    ref = ["the", "cat", "sat", "on", "the", "mat"]
    hyp = ["the", "cat", "sat", "on", "mat"]
    b = wer(ref, hyp)
    assert recursive_edit_cost(tuple(ref), tuple(hyp)) == 1
    assert b.deletions == 1
    assert b.substitutions == 0 and b.insertions == 0
    assert b.wer == pytest.approx(1 / 6)


def test_wer_sub_plus_insert():
    b = wer(["hello", "world"], ["hello", "word", "there"])
    assert recursive_edit_cost(("hello", "world"), ("hello", "word", "there")) == 2
    assert (b.substitutions, b.insertions, b.deletions) == (1, 1, 0)
    assert b.wer == 1.0


def test_wer_empty_hypothesis_is_one():
    b = wer(["a", "b", "c"], [])
    assert b.wer == 1.0
    assert b.deletions == 3


def test_wer_empty_reference_raises():
    with pytest.raises(EmptyReference):
        wer([], ["a"])


def test_wer_can_exceed_one():
    b = wer(["a"], ["x", "y", "z"])
    assert b.wer > 1.0


def test_wer_breakdown_consistency():
    rng = random.Random(7)
    vocab = ["a", "b", "c", "d"]
    for _ in range(300):
        ref = [rng.choice(vocab) for _ in range(rng.randint(1, 8))]
        hyp = [rng.choice(vocab) for _ in range(rng.randint(0, 8))]
        b = wer(ref, hyp)
        cost = recursive_edit_cost(tuple(ref), tuple(hyp))
        assert b.substitutions + b.deletions + b.insertions == cost
        assert b.wer == cost / len(ref)
        assert b.substitutions + b.deletions <= len(ref)
        assert b.substitutions + b.deletions + b.insertions <= len(ref) + len(hyp)


@given(st.lists(st.sampled_from("abc"), min_size=1, max_size=8),
       st.lists(st.sampled_from("abc"), max_size=8))
def test_wer_matches_oracle(ref, hyp):
    b = wer(ref, hyp)
    assert b.substitutions + b.deletions + b.insertions == \
        recursive_edit_cost(tuple(ref), tuple(hyp))


@given(st.lists(st.sampled_from("abcd"), min_size=1, max_size=8),
       st.lists(st.sampled_from("abcd"), max_size=8))
def test_wer_invariant_under_relabeling(ref, hyp):
    mapping = {"a": "w", "b": "x", "c": "y", "d": "z"}
    b1 = wer(ref, hyp)
    b2 = wer([mapping[t] for t in ref], [mapping[t] for t in hyp])
    assert b1 == b2


def test_wer_deterministic_tiebreak():
    # cost ties: the canonical traceback must always give the same split
    b1 = wer(["a", "b"], ["b"])
    b2 = wer(["a", "b"], ["b"])
    assert b1 == b2


# -- benchmark -------------------------------------------------------------

def test_benchmark_identical_hypotheses_zero():
    refs = {"f1": "the quick fox", "f2": "jumps over"}
    hyps = {"beta": dict(refs), "alpha": dict(refs)}
    report = benchmark(refs, hyps)
    assert [r.engine_id for r in report.rows] == ["alpha", "beta"]
    assert all(r.mean_wer_percent == 0.0 for r in report.rows)


def test_benchmark_hand_computed_means():
    refs = {"f1": "a b c"}
    hyps = {"good": {"f1": "a b c"}, "meh": {"f1": "a x c"}}
    report = benchmark(refs, hyps)
    assert report.rows[0].engine_id == "good"
    assert report.rows[0].mean_wer_percent == 0.0
    assert report.rows[1].mean_wer_percent == pytest.approx(100 / 3)


def test_benchmark_missing_hypothesis():
    with pytest.raises(MissingHypothesis):
        benchmark({"f1": "a", "f2": "b"}, {"e": {"f1": "a"}})


def test_benchmark_empty_reference():
    with pytest.raises(EmptyReference):
        benchmark({"f1": "!!!"}, {"e": {"f1": "a"}})


def test_benchmark_normalizes_before_scoring():
    refs = {"f1": "Hello, World!"}
    hyps = {"e": {"f1": "hello world"}}
    assert benchmark(refs, hyps).rows[0].mean_wer_percent == 0.0


# -- reported fixture ----------------------------------------------------------

def test_reported_fixture_values_and_order():
    report = load_reported_benchmark()
    means = [r.mean_wer_percent for r in report.rows]
    assert means == [16.81, 19.02, 34.26, 43.62, 47.15, 49.97, 50.18, 63.04]
    assert report.rows[0].engine_id == "whisper"
    assert len(report.fragment_ids) == 6


def test_render_benchmark_table():
    report = load_reported_benchmark()
    table = render_benchmark_table(report)
    lines = table.strip().split("\n")
    assert lines[0] == "engine,mean_wer_percent"
    assert len(lines) == 9
    assert lines[1] == "whisper,16.81"
    assert render_benchmark_table(report) == table  # stable


def test_render_empty_and_zero():
    from lectio.wer import BenchmarkReport, BenchmarkRow

    empty = BenchmarkReport(rows=(), fragment_ids=())
    assert render_benchmark_table(empty) == "engine,mean_wer_percent\n"
    one = BenchmarkReport(
        rows=(BenchmarkRow("e", 0.0, ()),), fragment_ids=("f",))
    assert "e,0.00" in render_benchmark_table(one)
