"""Didactic feature taxonomy.

The closed set of observable teaching behaviours the system can detect,
grouped by the evidence channel they are detectable from (audio, visual, or
either), together with the ordered label subset the text classifiers use.
Deployments may replace the built-in set with a YAML document; see
``docs/formats.md``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import yaml

from .errors import ParseError, ValidationError

CATEGORIES = ("audio", "visual", "audio_or_visual")
EVENT_KINDS = ("point", "state")

# Text-label subset used by the default multilabel model (configurable).
DEFAULT_TEXT_LABELS = (
    "asking_questions",
    "student_questions",
    "bibliography_reference",
    "giving_hints",
    "organization",
    "summing_up",
)

# Short interjection-like behaviours default to point events.
_POINT_KIND_IDS = {"laughter", "asking_questions", "student_questions"}

# id, display name, category, text-classifiable, teaching-practice areas
_FEATURE_TABLE = (
    # audio channel
    ("asking_questions", "Asking questions", "audio", True,
     ("Activating prior knowledge", "Encouraging learner engagement",
      "Using questions to deepen learning")),
    ("question_types", "Giving questions to students", "audio", True,
     ("Using questions to deepen learning", "Arousing interest",
      "Providing clear explanation")),
    ("student_questions", "Students asking questions", "audio", True,
     ("Facilitating collaborative learning", "Empowering learners",
      "Encouraging learner engagement")),
    ("laughter", "Laughter", "audio", False,
     ("Arousing interest",)),
    ("discipline", "Discipline", "audio", True,
     ("Maintaining positive discipline",)),
    ("student_discussion", "Students' discussion", "audio", True,
     ("Facilitating collaborative learning", "Empowering learners",
      "Encouraging learner engagement")),
    ("voice_intonation", "Voice intonation for emphasis", "audio", False,
     ("Encouraging learner engagement", "Pacing and maintaining momentum")),
    # visual channel (slides or the teacher view)
    ("films_animations", "Films or animations in slides", "visual", False,
     ("Providing clear explanation", "Arousing interest")),
    ("images_in_slides", "Images in slides", "visual", False,
     ("Providing clear explanation", "Arousing interest")),
    ("charts_in_slides", "Charts in slides", "visual", False,
     ("Providing clear explanation", "Arousing interest")),
    ("showing_websites", "Showing websites", "visual", False,
     ("Providing clear explanation", "Arousing interest")),
    ("active_explaining_slides", "Actively explaining slides", "visual", False,
     ("Encouraging learner engagement",)),
    ("movement_across_podium", "Movement across podium", "visual", False,
     ("Encouraging learner engagement",)),
    ("writing_on_whiteboard", "Writing on a whiteboard", "visual", False,
     ("Providing clear explanation", "Arousing interest")),
    ("writing_on_slides", "Writing on slides", "visual", False,
     ("Providing clear explanation", "Arousing interest")),
    ("demonstration", "Demonstration", "visual", False,
     ("Arousing interest", "Providing clear explanation")),
    ("eye_contact", "Eye contact", "visual", False,
     ("Encouraging learner engagement",)),
    # either channel
    ("bibliography_reference", "Referring to bibliography or other research",
     "audio_or_visual", True,
     ("Deciding on teaching aids and learning resources",)),
    ("test_session", "Session on tests", "audio_or_visual", True,
     ("Activating prior knowledge",
      "Checking for understanding and providing feedback", "Assessment")),
    ("giving_hints", "Giving hints", "audio_or_visual", True,
     ("Activating prior knowledge", "Encouraging learner engagement")),
    ("organization", "Organization: class outline and topic transitions",
     "audio_or_visual", True,
     ("Setting expectations and routines",
      "Establishing interaction and rapport", "Determining lesson objectives",
      "Deciding on teaching aids and learning resources",
      "Pacing and maintaining momentum")),
    ("assignments", "Assignments", "audio_or_visual", True,
     ("Supporting self-directed learning", "Setting meaningful assignments")),
    ("summing_up", "Summing up", "audio_or_visual", True,
     ("Concluding the lesson",)),
)


@dataclass(frozen=True)
class DidacticFeature:
    """One detectable teaching behaviour."""

    id: str
    display_name: str
    category: str
    default_kind: str
    text_classifiable: bool
    stp_areas: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not self.id or self.id != self.id.strip() or " " in self.id:
            raise ValidationError(f"feature id must be a bare token: {self.id!r}")
        if self.category not in CATEGORIES:
            raise ValidationError(f"unknown category {self.category!r} for {self.id}")
        if self.default_kind not in EVENT_KINDS:
            raise ValidationError(f"unknown event kind {self.default_kind!r} for {self.id}")
        if self.text_classifiable and self.category == "visual":
            raise ValidationError(
                f"text-classifiable feature {self.id} cannot be visual-only")


@dataclass(frozen=True)
class Taxonomy:
    """An ordered feature set plus the text-label subset; immutable."""

    version: str
    features: tuple[DidacticFeature, ...]
    text_label_set: tuple[str, ...]

    def __post_init__(self):
        ids = [f.id for f in self.features]
        dupes = {i for i in ids if ids.count(i) > 1}
        if dupes:
            raise ValidationError(f"duplicate feature ids: {sorted(dupes)}")
        if not self.text_label_set:
            raise ValidationError("text_label_set must not be empty")
        classifiable = {f.id for f in self.features if f.text_classifiable}
        unknown = [t for t in self.text_label_set if t not in classifiable]
        if unknown:
            raise ValidationError(
                f"text_label_set entries not text-classifiable features: {unknown}")

    def feature_ids(self) -> list[str]:
        return [f.id for f in self.features]


def default_taxonomy() -> Taxonomy:
    """The built-in feature set. Deterministic; two calls compare equal."""
    features = tuple(
        DidacticFeature(
            id=fid,
            display_name=name,
            category=category,
            default_kind="point" if fid in _POINT_KIND_IDS else "state",
            text_classifiable=text_ok,
            stp_areas=tuple(areas),
        )
        for fid, name, category, text_ok, areas in _FEATURE_TABLE
    )
    return Taxonomy(version="builtin-1", features=features,
                    text_label_set=DEFAULT_TEXT_LABELS)


def feature_by_id(taxonomy: Taxonomy, feature_id: str) -> DidacticFeature | None:
    """Exact-match lookup; ids are case-sensitive tokens."""
    for feature in taxonomy.features:
        if feature.id == feature_id:
            return feature
    return None


_TOP_FIELDS = {"version", "features", "text_label_set"}
_FEATURE_FIELDS = {"id", "display_name", "category", "default_kind",
                   "text_classifiable", "stp_areas"}


def load_taxonomy(document: str) -> Taxonomy:
    """Parse and validate a taxonomy YAML document.

    Raises ParseError for malformed documents (including unknown fields) and
    ValidationError for invariant violations.
    """
    try:
        raw = yaml.safe_load(document)
    except yaml.YAMLError as exc:
        raise ParseError(f"invalid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ParseError("taxonomy document must be a mapping")
    extra = set(raw) - _TOP_FIELDS
    if extra:
        raise ParseError(f"unknown top-level fields: {sorted(extra)}")
    missing = _TOP_FIELDS - set(raw)
    if missing:
        raise ParseError(f"missing top-level fields: {sorted(missing)}")
    if not isinstance(raw["features"], list):
        raise ParseError("features must be a list")
    if not isinstance(raw["text_label_set"], list):
        raise ParseError("text_label_set must be a list")

    features = []
    for entry in raw["features"]:
        if not isinstance(entry, dict):
            raise ParseError(f"feature entry must be a mapping: {entry!r}")
        extra = set(entry) - _FEATURE_FIELDS
        if extra:
            raise ParseError(f"unknown feature fields: {sorted(extra)}")
        missing = _FEATURE_FIELDS - set(entry)
        if missing:
            raise ParseError(f"feature entry missing fields: {sorted(missing)}")
        if not isinstance(entry["stp_areas"], list):
            raise ParseError(f"stp_areas must be a list for {entry.get('id')!r}")
        if not isinstance(entry["text_classifiable"], bool):
            raise ParseError(f"text_classifiable must be boolean for {entry.get('id')!r}")
        features.append(DidacticFeature(
            id=str(entry["id"]),
            display_name=str(entry["display_name"]),
            category=str(entry["category"]),
            default_kind=str(entry["default_kind"]),
            text_classifiable=entry["text_classifiable"],
            stp_areas=tuple(str(a) for a in entry["stp_areas"]),
        ))
    return Taxonomy(version=str(raw["version"]), features=tuple(features),
                    text_label_set=tuple(str(t) for t in raw["text_label_set"]))


def dump_taxonomy(taxonomy: Taxonomy) -> str:
    """Serialize a taxonomy to the YAML document format (round-trips)."""
    doc = {
        "version": taxonomy.version,
        "features": [
            {
                "id": f.id,
                "display_name": f.display_name,
                "category": f.category,
                "default_kind": f.default_kind,
                "text_classifiable": f.text_classifiable,
                "stp_areas": list(f.stp_areas),
            }
            for f in taxonomy.features
        ],
        "text_label_set": list(taxonomy.text_label_set),
    }
    return yaml.safe_dump(doc, sort_keys=False, allow_unicode=True)
