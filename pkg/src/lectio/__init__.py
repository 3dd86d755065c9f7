"""Lecture analytics: didactic-feature detection over lecture transcripts.

Ingests transcripts (or dispatches audio to an external ASR engine), detects
teaching behaviours at sentence level, merges multi-annotator observations
into gold annotations, scores ASR engines and classifiers, and serves
summaries, timelines, and trends over HTTP and a CLI.
"""

__version__ = "0.1.0"
