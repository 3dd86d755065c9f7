"""Word error rate and the transcription-engine benchmark harness.

WER comes from a minimum-edit-distance word alignment with unit costs. The
traceback resolves cost ties by preferring substitution over deletion over
insertion, so the S/D/I decomposition (not only the total) is reproducible
bit-exactly across runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from .errors import EmptyReference, MissingHypothesis
from .transcript import normalize_for_wer


@dataclass(frozen=True)
class WerBreakdown:
    substitutions: int
    deletions: int
    insertions: int
    reference_length: int
    wer: float


@dataclass(frozen=True)
class BenchmarkRow:
    engine_id: str
    mean_wer_percent: float
    per_fragment: tuple[WerBreakdown, ...]


@dataclass(frozen=True)
class BenchmarkReport:
    rows: tuple[BenchmarkRow, ...]
    fragment_ids: tuple[str, ...]


def wer(reference: list[str], hypothesis: list[str]) -> WerBreakdown:
    """Align hypothesis to reference and count substitutions/deletions/insertions."""
    n, m = len(reference), len(hypothesis)
    if n == 0:
        raise EmptyReference("WER undefined for an empty reference")

    # d[i][j]: edit cost between reference[:i] and hypothesis[:j]
    d = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        d[i][0] = i
    for j in range(1, m + 1):
        d[0][j] = j
    for i in range(1, n + 1):
        ref_tok = reference[i - 1]
        row, prev = d[i], d[i - 1]
        for j in range(1, m + 1):
            sub = prev[j - 1] + (ref_tok != hypothesis[j - 1])
            row[j] = min(sub, prev[j] + 1, row[j - 1] + 1)

    subs = dels = ins = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and d[i][j] == d[i - 1][j - 1] + (reference[i - 1] != hypothesis[j - 1]):
            if reference[i - 1] != hypothesis[j - 1]:
                subs += 1
            i, j = i - 1, j - 1
        elif i > 0 and d[i][j] == d[i - 1][j] + 1:
            dels += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return WerBreakdown(substitutions=subs, deletions=dels, insertions=ins,
                        reference_length=n, wer=(subs + dels + ins) / n)


def benchmark(references: dict[str, str],
              hypotheses: dict[str, dict[str, str]]) -> BenchmarkReport:
    """Score every engine on every fragment; best mean WER first.

    Means are macro-averages of per-fragment WER, in percent. Ties between
    engines break on engine_id.
    """
    fragment_ids = tuple(sorted(references))
    ref_tokens = {}
    for fid in fragment_ids:
        tokens = normalize_for_wer(references[fid])
        if not tokens:
            raise EmptyReference(f"reference {fid} empty after normalization")
        ref_tokens[fid] = tokens

    rows = []
    for engine_id in sorted(hypotheses):
        engine_hyps = hypotheses[engine_id]
        breakdowns = []
        for fid in fragment_ids:
            if fid not in engine_hyps:
                raise MissingHypothesis(f"engine {engine_id} missing fragment {fid}")
            breakdowns.append(wer(ref_tokens[fid],
                                  normalize_for_wer(engine_hyps[fid])))
        mean = 100.0 * sum(b.wer for b in breakdowns) / len(breakdowns)
        rows.append(BenchmarkRow(engine_id=engine_id, mean_wer_percent=mean,
                                 per_fragment=tuple(breakdowns)))
    rows.sort(key=lambda r: (r.mean_wer_percent, r.engine_id))
    return BenchmarkReport(rows=tuple(rows), fragment_ids=fragment_ids)


def render_benchmark_table(report: BenchmarkReport) -> str:
    """Comma-delimited table, mean WER to 2 decimals, best engine first."""
    lines = ["engine,mean_wer_percent"]
    for row in report.rows:
        lines.append(f"{row.engine_id},{row.mean_wer_percent:.2f}")
    return "\n".join(lines) + "\n"


def load_reported_benchmark() -> BenchmarkReport:
    """The bundled published engine comparison, replayed as-is.

    The source audio is not redistributable, so these means cannot be
    recomputed; rows carry no per-fragment breakdowns.
    """
    text = resources.files("lectio.data").joinpath(
        "reported_wer_benchmark.json").read_text(encoding="utf-8")
    doc = json.loads(text)
    rows = tuple(sorted(
        (BenchmarkRow(engine_id=e, mean_wer_percent=float(p), per_fragment=())
         for e, p in doc["mean_wer_percent"].items()),
        key=lambda r: (r.mean_wer_percent, r.engine_id)))
    return BenchmarkReport(rows=rows, fragment_ids=tuple(doc["fragment_ids"]))
