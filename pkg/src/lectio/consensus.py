"""Multi-annotator consensus merging and inter-annotator agreement.

State events merge by pointwise voting: a time point is gold-active when at
least min_support observations cover it. The implementation sweeps exact
event boundaries, which coincides with discretizing at grid_step and voting
per cell midpoint (up to one grid step at boundaries; exactly, when input
timestamps are grid-aligned). Point events merge by single-linkage
clustering. All knobs live in ConsensusConfig.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import KindMismatch, NoObservations, TooFewObservations, ValidationError
from .events import Annotation, Event, Interval, merge_intervals, overlap
from .taxonomy import Taxonomy, feature_by_id


@dataclass(frozen=True)
class ConsensusConfig:
    min_support: int | str = "majority"  # count, or "majority" = ceil(k/2)
    point_cluster_window: float = 5.0
    min_state_duration: float = 1.0
    max_merge_gap: float = 2.0
    grid_step: float = 0.1

    def __post_init__(self):
        if isinstance(self.min_support, str):
            if self.min_support != "majority":
                raise ValidationError("min_support must be a count or 'majority'")
        elif self.min_support < 1:
            raise ValidationError("min_support must be positive")
        for name in ("point_cluster_window", "min_state_duration",
                     "max_merge_gap", "grid_step"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be positive")
        if self.grid_step > self.min_state_duration:
            raise ValidationError("grid_step must not exceed min_state_duration")

    def resolve_support(self, annotator_count: int) -> int:
        if self.min_support == "majority":
            return math.ceil(annotator_count / 2)
        return int(self.min_support)


@dataclass(frozen=True)
class GoldAnnotation:
    """Consensus events for one lecture, with per-event supporter counts."""

    lecture_id: str
    events: tuple[Event, ...]
    support: dict[int, int]
    config: ConsensusConfig
    annotator_count: int


@dataclass(frozen=True)
class AgreementReport:
    per_feature: dict[str, float]
    annotator_pairs: int


def _check_kind(taxonomy: Taxonomy | None, feature_id: str, wanted: str):
    if taxonomy is None:
        return
    feature = feature_by_id(taxonomy, feature_id)
    if feature is not None and feature.default_kind != wanted:
        raise KindMismatch(
            f"{feature_id} is {feature.default_kind}-kind, not {wanted}")


def _observer_intervals(annotation: Annotation, feature_id: str) -> list[list[Interval]]:
    """Each observation's state coverage for the feature, self-merged so one
    annotator never counts twice at the same time point."""
    per_obs = []
    for obs in annotation.observations:
        ivs = [Interval(e.start, e.end) for e in obs.events
               if e.feature_id == feature_id and e.kind == "state"]
        if ivs:
            per_obs.append(merge_intervals(ivs))
    return per_obs


def merge_states(annotation: Annotation, feature_id: str, config: ConsensusConfig,
                 taxonomy: Taxonomy | None = None) -> list[Event]:
    """Vote state events of one feature into gold intervals.

    Maximal spans covered by >= min_support observations survive; gaps
    shorter than max_merge_gap close; merged intervals shorter than
    min_state_duration drop. Boundaries land exactly on contributing
    annotator boundaries.
    """
    if not annotation.observations:
        raise NoObservations(f"no observations for {annotation.lecture_id}")
    _check_kind(taxonomy, feature_id, "state")
    support_needed = config.resolve_support(len(annotation.observations))

    per_obs = _observer_intervals(annotation, feature_id)
    deltas: dict[float, int] = {}
    for ivs in per_obs:
        for iv in ivs:
            deltas[iv.start] = deltas.get(iv.start, 0) + 1
            deltas[iv.end] = deltas.get(iv.end, 0) - 1

    active: list[Interval] = []
    count = 0
    span_start: float | None = None
    for t in sorted(deltas):
        count += deltas[t]
        if count >= support_needed and span_start is None:
            span_start = t
        elif count < support_needed and span_start is not None:
            if t > span_start:
                active.append(Interval(span_start, t))
            span_start = None

    # close small gaps, then drop short intervals
    merged: list[Interval] = []
    for iv in active:
        if merged and iv.start - merged[-1].end < config.max_merge_gap:
            merged[-1] = Interval(merged[-1].start, iv.end)
        else:
            merged.append(iv)
    kept = [iv for iv in merged if iv.length() >= config.min_state_duration]
    return [Event(feature_id, "state", iv.start, iv.end) for iv in kept]


def merge_points(annotation: Annotation, feature_id: str, config: ConsensusConfig,
                 taxonomy: Taxonomy | None = None) -> list[Event]:
    """Cluster point events of one feature into gold points.

    Single-linkage with threshold point_cluster_window; support counts each
    annotator at most once per cluster; surviving clusters place their gold
    point at the lower median member timestamp.
    """
    if not annotation.observations:
        raise NoObservations(f"no observations for {annotation.lecture_id}")
    _check_kind(taxonomy, feature_id, "point")
    support_needed = config.resolve_support(len(annotation.observations))

    points = sorted(
        (e.start, obs.annotator_id)
        for obs in annotation.observations
        for e in obs.events
        if e.feature_id == feature_id and e.kind == "point")
    clusters: list[list[tuple[float, str]]] = []
    for ts, annotator in points:
        if clusters and ts - clusters[-1][-1][0] <= config.point_cluster_window:
            clusters[-1].append((ts, annotator))
        else:
            clusters.append([(ts, annotator)])

    gold = []
    for cluster in clusters:
        supporters = {annotator for _, annotator in cluster}
        if len(supporters) < support_needed:
            continue
        times = sorted(ts for ts, _ in cluster)
        gold.append(Event(feature_id, "point", times[(len(times) - 1) // 2]))
    return gold


def merge_annotation(annotation: Annotation, taxonomy: Taxonomy | None = None,
                     config: ConsensusConfig | None = None) -> GoldAnnotation:
    """Merge every observed feature; routing by taxonomy kind when known,
    otherwise by the kinds actually observed."""
    config = config or ConsensusConfig()
    observed: list[str] = []
    for obs in annotation.observations:
        for e in obs.events:
            if e.feature_id not in observed:
                observed.append(e.feature_id)

    events: list[Event] = []
    for fid in sorted(observed):
        feature = feature_by_id(taxonomy, fid) if taxonomy else None
        kinds_seen = {e.kind for obs in annotation.observations
                      for e in obs.events if e.feature_id == fid}
        if feature is not None:
            routes = [feature.default_kind]
        else:
            routes = sorted(kinds_seen)
        for kind in routes:
            if kind == "state":
                events.extend(merge_states(annotation, fid, config))
            else:
                events.extend(merge_points(annotation, fid, config))

    events.sort(key=lambda e: (e.feature_id, e.start))
    support = {}
    for idx, ev in enumerate(events):
        if ev.kind == "state":
            iv = Interval(ev.start, ev.end)
            supporters = sum(
                1 for obs in annotation.observations
                if any(e.feature_id == ev.feature_id and e.kind == "state"
                       and overlap(Interval(e.start, e.end), iv) > 0
                       for e in obs.events))
        else:
            supporters = len({
                obs.annotator_id for obs in annotation.observations
                if any(e.feature_id == ev.feature_id and e.kind == "point"
                       and abs(e.start - ev.start) <= config.point_cluster_window
                       for e in obs.events)})
        support[idx] = supporters
    return GoldAnnotation(lecture_id=annotation.lecture_id, events=tuple(events),
                          support=support, config=config,
                          annotator_count=len(annotation.observations))


def _state_coefficient(a: list[Interval], b: list[Interval]) -> float:
    ua, ub = merge_intervals(a), merge_intervals(b)
    shared = sum(overlap(x, y) for x in ua for y in ub)
    denom = min(sum(i.length() for i in ua), sum(i.length() for i in ub))
    return shared / denom if denom > 0 else 0.0


def _point_coefficient(a: list[float], b: list[float], window: float) -> float:
    pairs = sorted(
        (abs(x - y), i, j)
        for i, x in enumerate(a) for j, y in enumerate(b)
        if abs(x - y) <= window)
    used_a: set[int] = set()
    used_b: set[int] = set()
    matched = 0
    for _, i, j in pairs:
        if i in used_a or j in used_b:
            continue
        used_a.add(i)
        used_b.add(j)
        matched += 1
    return matched / min(len(a), len(b))


def agreement(annotation: Annotation,
              config: ConsensusConfig | None = None) -> AgreementReport:
    """Mean pairwise agreement per feature.

    States compare as overlap coefficient (shared duration over the smaller
    total); points as the greedy nearest-first matched fraction within
    point_cluster_window. A pair contributes to a feature only when both
    annotators marked it.
    """
    if len(annotation.observations) < 2:
        raise TooFewObservations("agreement needs at least two observations")
    config = config or ConsensusConfig()

    per_obs_states: list[dict[str, list[Interval]]] = []
    per_obs_points: list[dict[str, list[float]]] = []
    for obs in annotation.observations:
        states: dict[str, list[Interval]] = {}
        points: dict[str, list[float]] = {}
        for e in obs.events:
            if e.kind == "state":
                states.setdefault(e.feature_id, []).append(Interval(e.start, e.end))
            else:
                points.setdefault(e.feature_id, []).append(e.start)
        per_obs_states.append(states)
        per_obs_points.append(points)

    sums: dict[str, float] = {}
    counts: dict[str, int] = {}
    k = len(annotation.observations)
    for i in range(k):
        for j in range(i + 1, k):
            feature_ids = (set(per_obs_states[i]) | set(per_obs_points[i])) & \
                          (set(per_obs_states[j]) | set(per_obs_points[j]))
            for fid in feature_ids:
                components = []
                if fid in per_obs_states[i] and fid in per_obs_states[j]:
                    components.append(_state_coefficient(
                        per_obs_states[i][fid], per_obs_states[j][fid]))
                if fid in per_obs_points[i] and fid in per_obs_points[j]:
                    components.append(_point_coefficient(
                        per_obs_points[i][fid], per_obs_points[j][fid],
                        config.point_cluster_window))
                if not components:
                    continue
                value = sum(components) / len(components)
                sums[fid] = sums.get(fid, 0.0) + value
                counts[fid] = counts.get(fid, 0) + 1

    per_feature = {fid: sums[fid] / counts[fid] for fid in sums}
    return AgreementReport(per_feature=per_feature,
                           annotator_pairs=k * (k - 1) // 2)


# -- gold event document -------------------------------------------------------

def gold_to_doc(gold: GoldAnnotation) -> dict:
    """Canonical event document for gold annotations, with a config echo."""
    return {
        "lecture_id": gold.lecture_id,
        "annotator_id": "gold",
        "source": "human",
        "model_id": None,
        "events": [
            {"feature_id": e.feature_id, "kind": e.kind,
             "start": e.start, "end": e.end}
            for e in gold.events
        ],
        "support": [gold.support[i] for i in range(len(gold.events))],
        "annotator_count": gold.annotator_count,
        "config": {
            "min_support": gold.config.min_support,
            "point_cluster_window": gold.config.point_cluster_window,
            "min_state_duration": gold.config.min_state_duration,
            "max_merge_gap": gold.config.max_merge_gap,
            "grid_step": gold.config.grid_step,
        },
    }


def gold_from_doc(doc: dict) -> GoldAnnotation:
    events = tuple(
        Event(e["feature_id"], e["kind"], e["start"], e.get("end"))
        for e in doc["events"])
    support = {i: s for i, s in enumerate(doc.get("support", []))}
    cfg = doc.get("config", {})
    return GoldAnnotation(
        lecture_id=doc["lecture_id"],
        events=events,
        support=support,
        config=ConsensusConfig(**cfg) if cfg else ConsensusConfig(),
        annotator_count=int(doc.get("annotator_count", 0)),
    )
