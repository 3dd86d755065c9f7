"""Command-line interface with headless parity to the HTTP API.

Each verb composes the same module operations the API handlers use, against
the same store, and prints the same canonical JSON payloads. Report verbs
optionally render matplotlib figures next to their delimited output.

Flags override environment variables (DATA_DIR, ASR_ENDPOINT, ADMIN_TOKEN,
LISTEN_ADDR), which override defaults.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..align import export_dataset, label_sentences
from ..consensus import ConsensusConfig, gold_to_doc, merge_annotation
from ..errors import LectioError, ValidationError
from ..events import Annotation, parse_boris_export
from ..store import LectureRecord, Store
from ..taxonomy import load_taxonomy
from ..wer import benchmark, load_reported_benchmark, render_benchmark_table
from .bootstrap import ensure_default_models
from .config import ServiceConfig, canonical_json, error_code_for
from .pipeline import (ingest_transcript_document, job_payload, lecture_payload,
                       new_id, queue_job, run_analysis, run_transcription,
                       summary_for, timeline_for)


def _open_store(config: ServiceConfig) -> Store:
    config.ensure_dirs()
    return Store(str(config.db_path))


def _taxonomy(args):
    """Working taxonomy for CLI verbs; matches the API's (API parity)."""
    from .pipeline import service_taxonomy

    if getattr(args, "taxonomy", None):
        return service_taxonomy(
            load_taxonomy(Path(args.taxonomy).read_text(encoding="utf-8")))
    return service_taxonomy()


def cmd_ingest(config: ServiceConfig, args) -> int:
    store = _open_store(config)
    try:
        lid = args.lecture_id or new_id("lec")
        if args.transcript:
            record = store.put_lecture(LectureRecord(
                lecture_id=lid, title=args.title, source_uri=None))
            document = Path(args.transcript).read_text(encoding="utf-8")
            ingest_transcript_document(store, record, document)
            payload = {"lecture": lecture_payload(store.get_lecture(lid)),
                       "job_id": None}
        else:
            media = Path(args.media)
            if not media.is_file():
                raise ValidationError(f"no such file: {media}")
            from .pipeline import store_media_blob
            blob = store_media_blob(config, media.read_bytes(),
                                    media.suffix.lower())
            record = store.put_lecture(LectureRecord(
                lecture_id=lid, title=args.title, source_uri=str(blob)))
            job = queue_job(store, lid, "transcribe")
            payload = {"lecture": lecture_payload(record), "job_id": job.job_id}
        print(canonical_json(payload))
        return 0
    finally:
        store.close()


def cmd_transcribe(config: ServiceConfig, args) -> int:
    store = _open_store(config)
    try:
        job = queue_job(store, args.lecture, "transcribe")
        try:
            run_transcription(store, config, args.lecture)
            store.finish_job(job.job_id, "done")
        except LectioError as exc:
            store.finish_job(job.job_id, "error", f"{error_code_for(exc)}: {exc}")
            raise
        print(canonical_json(job_payload(store.get_job(job.job_id))))
        return 0
    finally:
        store.close()


def cmd_analyze(config: ServiceConfig, args) -> int:
    store = _open_store(config)
    try:
        ensure_default_models(store, config.models_dir)
        job = queue_job(store, args.lecture, "analyze",
                        detail={"model_id": args.model})
        try:
            run_analysis(store, config, args.lecture, args.model)
            store.finish_job(job.job_id, "done")
        except LectioError as exc:
            store.finish_job(job.job_id, "error", f"{error_code_for(exc)}: {exc}")
            raise
        print(canonical_json(job_payload(store.get_job(job.job_id))))
        return 0
    finally:
        store.close()


def cmd_summary(config: ServiceConfig, args) -> int:
    store = _open_store(config)
    try:
        taxonomy = _taxonomy(args)
        if store.get_lecture(args.lecture) is None:
            from ..errors import ForeignKeyError
            raise ForeignKeyError(f"unknown lecture {args.lecture!r}")
        payload = summary_for(store, args.lecture, args.source, args.model, taxonomy)
        if args.format == "csv":
            lines = ["feature_id,count,duration_seconds"]
            for fid in sorted(payload["counts"]):
                duration = payload["durations"].get(fid, "")
                lines.append(f"{fid},{payload['counts'][fid]},{duration}")
            text = "\n".join(lines) + "\n"
            print(text, end="")
        else:
            text = canonical_json(payload)
            print(text)

        if args.out_dir:
            out = Path(args.out_dir)
            out.mkdir(parents=True, exist_ok=True)
            (out / "summary.json").write_text(canonical_json(payload) + "\n",
                                              encoding="utf-8")
            csv_lines = ["feature_id,count,duration_seconds"]
            for fid in sorted(payload["counts"]):
                duration = payload["durations"].get(fid, "")
                csv_lines.append(f"{fid},{payload['counts'][fid]},{duration}")
            (out / "summary.csv").write_text("\n".join(csv_lines) + "\n",
                                             encoding="utf-8")
            timeline_entries = timeline_for(store, args.lecture, args.source,
                                            args.model, taxonomy)
            (out / "timeline.json").write_text(
                canonical_json(timeline_entries) + "\n", encoding="utf-8")

            from ..summarize import LectureSummary, TimelineEntry
            from ..plots import render_summary_counts, render_timeline
            summary = LectureSummary(
                lecture_id=payload["lecture_id"], counts=payload["counts"],
                durations=payload["durations"], source=payload["source"],
                model_id=payload["model_id"])
            entries = [TimelineEntry(feature_id=t["feature_id"], start=t["start"],
                                     end=t["end"]) for t in timeline_entries]
            render_summary_counts(summary, taxonomy, out / "summary_counts.png")
            render_timeline(entries, taxonomy, out / "timeline.png")
        return 0
    finally:
        store.close()


def cmd_bench_wer(config: ServiceConfig, args) -> int:
    if args.reported:
        report = load_reported_benchmark()
    else:
        if not args.references or not args.hypotheses:
            raise ValidationError(
                "bench-wer needs --references and --hypotheses (or --reported)")
        references = {}
        for path in sorted(Path(args.references).glob("*.txt")):
            references[path.stem] = path.read_text(encoding="utf-8")
        if not references:
            raise ValidationError(f"no reference fragments in {args.references}")
        hypotheses = {}
        for engine_dir in sorted(p for p in Path(args.hypotheses).iterdir()
                                 if p.is_dir()):
            hypotheses[engine_dir.name] = {
                path.stem: path.read_text(encoding="utf-8")
                for path in sorted(engine_dir.glob("*.txt"))
            }
        if not hypotheses:
            raise ValidationError(f"no engine directories in {args.hypotheses}")
        report = benchmark(references, hypotheses)

    table = render_benchmark_table(report)
    print(table, end="")
    if args.out:
        Path(args.out).write_text(table, encoding="utf-8")
    if args.plots_dir:
        from ..plots import render_benchmark
        out = Path(args.plots_dir)
        out.mkdir(parents=True, exist_ok=True)
        render_benchmark(report, out / "wer_benchmark.png")
    return 0


def cmd_consensus(config: ServiceConfig, args) -> int:
    taxonomy = _taxonomy(args)
    document = Path(args.observations).read_text(encoding="utf-8")
    observations = parse_boris_export(document, taxonomy)
    if not observations:
        raise ValidationError("export contains no observations")
    by_lecture: dict[str, list] = {}
    for obs in observations:
        by_lecture.setdefault(obs.lecture_id, []).append(obs)
    if args.lecture:
        if args.lecture not in by_lecture:
            raise ValidationError(
                f"lecture {args.lecture!r} not in export; found {sorted(by_lecture)}")
        chosen = args.lecture
    elif len(by_lecture) == 1:
        chosen = next(iter(by_lecture))
    else:
        raise ValidationError(
            f"export covers several lectures {sorted(by_lecture)}; pass --lecture")

    min_support: int | str = "majority"
    if args.min_support != "majority":
        min_support = int(args.min_support)
    cfg = ConsensusConfig(
        min_support=min_support,
        point_cluster_window=args.window,
        min_state_duration=args.min_duration,
        max_merge_gap=args.merge_gap,
    )
    annotation = Annotation(lecture_id=chosen,
                            observations=tuple(by_lecture[chosen]))
    gold = merge_annotation(annotation, taxonomy, cfg)
    doc = canonical_json(gold_to_doc(gold))
    if args.out:
        Path(args.out).write_text(doc + "\n", encoding="utf-8")
    else:
        print(doc)
    return 0


def cmd_export_dataset(config: ServiceConfig, args) -> int:
    store = _open_store(config)
    try:
        taxonomy = _taxonomy(args)
        transcript = store.get_transcript(args.lecture)
        if transcript is None:
            raise ValidationError(f"lecture {args.lecture!r} has no transcript")
        if args.gold:
            from ..consensus import gold_from_doc
            gold = gold_from_doc(json.loads(
                Path(args.gold).read_text(encoding="utf-8")))
        else:
            gold = store.get_gold(args.lecture)
            if gold is None:
                raise ValidationError(
                    f"lecture {args.lecture!r} has no stored gold annotation")
        labeled = label_sentences(transcript, gold, taxonomy)
        text = export_dataset(labeled, taxonomy)
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        else:
            print(text, end="")
        return 0
    finally:
        store.close()


def cmd_serve(config: ServiceConfig, args) -> int:
    import uvicorn

    from .app import create_app

    host, _, port = config.listen_addr.rpartition(":")
    app = create_app(config)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lectio", description="Lecture analytics toolkit")
    parser.add_argument("--data-dir", help="data directory (env DATA_DIR)")
    parser.add_argument("--asr-endpoint", help="ASR service URL (env ASR_ENDPOINT)")
    parser.add_argument("--admin-token", help="admin bearer token (env ADMIN_TOKEN)")
    parser.add_argument("--listen-addr", help="serve address (env LISTEN_ADDR)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="register a lecture from a transcript or media file")
    p.add_argument("--title", required=True)
    p.add_argument("--lecture-id")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--transcript", help="ASR JSON document")
    group.add_argument("--media", help="audio/video file")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("transcribe", help="transcribe a registered lecture's media")
    p.add_argument("--lecture", required=True)
    p.set_defaults(func=cmd_transcribe)

    p = sub.add_parser("analyze", help="run a model over a transcribed lecture")
    p.add_argument("--lecture", required=True)
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("summary", help="per-lecture feature summary")
    p.add_argument("--lecture", required=True)
    p.add_argument("--source", choices=("model", "gold"), default="model")
    p.add_argument("--model")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out-dir", help="write summary.{json,csv}, timeline.json and figures here")
    p.add_argument("--taxonomy")
    p.set_defaults(func=cmd_summary)

    p = sub.add_parser("bench-wer", help="benchmark transcription engines")
    p.add_argument("--references", help="directory of <fragment>.txt references")
    p.add_argument("--hypotheses", help="directory of <engine>/<fragment>.txt")
    p.add_argument("--reported", action="store_true",
                   help="replay the bundled published engine comparison")
    p.add_argument("--out", help="also write the table to this file")
    p.add_argument("--plots-dir", help="render a benchmark figure here")
    p.set_defaults(func=cmd_bench_wer)

    p = sub.add_parser("consensus", help="merge an observation export into gold events")
    p.add_argument("--observations", required=True, help="behavioral export file")
    p.add_argument("--lecture", help="lecture id when the export covers several")
    p.add_argument("--out", help="write the gold event document here")
    p.add_argument("--taxonomy")
    p.add_argument("--min-support", default="majority")
    p.add_argument("--window", type=float, default=5.0)
    p.add_argument("--min-duration", type=float, default=1.0)
    p.add_argument("--merge-gap", type=float, default=2.0)
    p.set_defaults(func=cmd_consensus)

    p = sub.add_parser("export-dataset", help="labeled sentence dataset for a lecture")
    p.add_argument("--lecture", required=True)
    p.add_argument("--gold", help="gold event document (defaults to stored gold)")
    p.add_argument("--out")
    p.add_argument("--taxonomy")
    p.set_defaults(func=cmd_export_dataset)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    config = ServiceConfig.from_env(
        data_dir=args.data_dir,
        asr_endpoint=args.asr_endpoint,
        admin_token=args.admin_token,
        listen_addr=args.listen_addr,
    )
    try:
        return args.func(config, args)
    except LectioError as exc:
        print(f"{error_code_for(exc)}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
