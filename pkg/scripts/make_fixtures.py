#!/usr/bin/env python3
"""Regenerate the bundled data fixtures (seeded, deterministic).

Writes:
  src/lectio/data/synthetic_sentences.csv  - 200-sentence keyword dataset
  src/lectio/data/fixture_transcript.json  - ~150-sentence demo transcript

Run from the repo root: python scripts/make_fixtures.py
"""

import json
import random
from pathlib import Path

from lectio.align import LabeledSentence, export_dataset
from lectio.taxonomy import default_taxonomy

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "src" / "lectio" / "data"

QUESTION_FEATURES = {"asking_questions", "student_questions"}

# keyword-bearing templates per text label; {f} slots take filler nouns
TEMPLATES = {
    "asking_questions": [
        "What do you think happens to the {f} when we double the frequency?",
        "Can anyone tell me why the {f} behaves this way?",
        "Who remembers the formula for the {f}?",
        "How would you measure the {f} in this setup?",
    ],
    "student_questions": [
        "A student asks whether the {f} depends on temperature.",
        "One of you raised the question of how the {f} scales.",
        "Someone in the back asks about the {f} boundary case.",
        "A student wonders if the {f} result generalizes.",
    ],
    "bibliography_reference": [
        "See the textbook chapter on the {f} for the full derivation.",
        "This result comes from a classic study of the {f}.",
        "The reference list includes two surveys about the {f}.",
        "For further reading on the {f}, check the cited monograph.",
    ],
    "giving_hints": [
        "Here is a hint: start from the {f} and integrate.",
        "The trick is to rewrite the {f} in polar form.",
        "A useful shortcut for the {f} is dimensional analysis.",
        "Hint for the homework: the {f} term cancels out.",
    ],
    "organization": [
        "Today we will cover the {f} and then two worked examples.",
        "Moving on to the next topic, the {f}.",
        "The outline for this session starts with the {f}.",
        "Let us switch from the {f} to the lab procedure now.",
    ],
    "summing_up": [
        "To sum up, the {f} explains both observations.",
        "In conclusion, the {f} follows directly from conservation laws.",
        "Summing up this section, remember the {f} above all.",
        "So the key takeaway today is the {f}.",
    ],
}

FILLERS = [
    "The amplitude of the wave stays constant in a lossless medium.",
    "We write the dispersion relation on the board.",
    "Energy is conserved throughout the oscillation.",
    "The second derivative gives the curvature of the field.",
    "Consider a particle moving along the x axis.",
    "The boundary conditions fix the allowed modes.",
    "This integral evaluates to a simple closed form.",
    "The experiment uses a laser and a beam splitter.",
    "Velocity is the time derivative of position.",
    "The standing wave has nodes at both ends.",
    "We approximate the potential near the minimum.",
    "The phase difference determines the interference pattern.",
    "Pressure relates to momentum transfer at the wall.",
    "The units work out to joules per second.",
    "Let the spring constant be k and the mass m.",
]

NOUNS = ["wave equation", "dispersion relation", "phase velocity",
         "interference pattern", "harmonic oscillator", "refraction index",
         "standing wave", "group velocity", "wavefront", "resonance condition"]


def make_sentence(rng, labels):
    if not labels:
        return rng.choice(FILLERS)
    parts = []
    for label in labels:
        template = rng.choice(TEMPLATES[label])
        parts.append(template.format(f=rng.choice(NOUNS)))
    return " ".join(parts)


def make_dataset(rng, count=200):
    label_ids = list(TEMPLATES)
    rows = []
    for i in range(count):
        roll = rng.random()
        if roll < 0.30:
            labels = []
        elif roll < 0.85:
            labels = [label_ids[i % len(label_ids)]]
        else:
            labels = rng.sample(label_ids, 2)
        text = make_sentence(rng, labels)
        start = round(i * 5.0, 3)
        end = round(start + 4.5, 3)
        question = bool(set(labels) & QUESTION_FEATURES) or text.endswith("?")
        rows.append(LabeledSentence(
            sentence_id=i, text=text, start=start, end=end,
            labels=frozenset(labels), question_flag=question))
    return rows


def make_transcript(rng, count=150):
    label_ids = list(TEMPLATES)
    segments = []
    for i in range(count):
        roll = rng.random()
        if roll < 0.65:
            labels = []
        else:
            labels = [rng.choice(label_ids)]
        # a few adjacent same-label pairs to exercise occurrence merging
        if i % 29 == 0 and i > 0:
            labels = ["organization"]
        text = make_sentence(rng, labels)
        start = round(i * 6.0, 3)
        end = round(start + 5.5, 3)
        segments.append({"id": i, "start": start, "end": end, "text": " " + text})
    return {
        "text": "".join(s["text"] for s in segments),
        "segments": segments,
    }


def main():
    taxonomy = default_taxonomy()
    rng = random.Random(42)
    dataset = make_dataset(rng)
    (DATA / "synthetic_sentences.csv").write_text(
        export_dataset(dataset, taxonomy), encoding="utf-8")
    print(f"dataset: {len(dataset)} sentences, "
          f"{sum(1 for s in dataset if s.labels)} labeled")

    rng = random.Random(20240917)
    doc = make_transcript(rng)
    (DATA / "fixture_transcript.json").write_text(
        json.dumps(doc, indent=1), encoding="utf-8")
    print(f"transcript: {len(doc['segments'])} segments")


if __name__ == "__main__":
    main()
