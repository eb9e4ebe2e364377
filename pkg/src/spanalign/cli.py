"""Command-line entry points for the whole toolkit."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .aligner.baselines import baseline_word_align, random_baseline
from .aligner.params import AlignerParams
from .aligner.pipeline import run_pipeline
from .analysis import (
    comparative_reports,
    span_length_distribution,
    token_label_distribution,
    weighted_length_ratio,
)
from .embfile import read_embedding_file
from .labeler import TrainConfig, extract_features, load_model, save_model, train
from .metrics import label_kappa, segmentation_kappa
from .model import SOURCE, TARGET
from .report import aggregate_reports, evaluate_pair, format_report, report_to_dict
from .serialization import SerializationError, deserialize, serialize
from .store import DocumentStore, format_import_summary, import_dataset, load_documents
from .tokenizer import parse_transcript
from .validation import validate_document


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "func"):
        parser.print_help()
        return 2
    return args.func(args)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spanalign", description="Alignment workbench for interpreted-speech transcripts.")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("validate", help="validate alignment files")
    p.add_argument("paths", nargs="+")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("stats", help="corpus statistics over complete alignment files")
    p.add_argument("paths", nargs="+")
    p.add_argument("--split", action="store_true", help="report per split (dev/test parent directory) and combined")
    p.add_argument("--out-dir", help="write plot-ready TSV files here")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("align", help="run the automatic alignment pipeline on one pair")
    p.add_argument("pair", help="alignment file providing the two sides, or SRC.txt,TGT.txt raw transcripts")
    p.add_argument("--line-emb", required=True, help="line embedding files: SRC,TGT")
    p.add_argument("--tok-emb", required=True, help="token embedding files: SRC,TGT")
    p.add_argument("--params", help="JSON file with aligner parameters")
    p.add_argument("--labeler", help="trained labeler model file")
    p.add_argument("--default-labels", action="store_true", help="label TRAN/ADDU without a classifier (default)")
    p.add_argument("--src-lang", default="xx")
    p.add_argument("--tgt-lang", default="xx")
    p.add_argument("--out", help="write the aligned document here (default: stdout)")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("evaluate", help="score a hypothesis document against a reference")
    p.add_argument("--ref", required=True, help="reference file or directory")
    p.add_argument("--hyp", required=True, help="hypothesis file or directory (matched by file name)")
    p.add_argument("--hyp-words", help="JSON word-link file from baseline-word instead of --hyp span links")
    p.add_argument("--k", type=int, help="window size for Pk/WindowDiff")
    p.add_argument("--json", dest="json_out", help="write machine-readable scores here")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("kappa", help="inter-annotator agreement between two annotations of one pair")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.set_defaults(func=cmd_kappa)

    p = sub.add_parser("baseline-random", help="boundary/label-preserving random baseline")
    p.add_argument("--ref", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the baseline document here (default: stdout)")
    p.set_defaults(func=cmd_baseline_random)

    p = sub.add_parser("baseline-word", help="window-limited global word alignment baseline")
    p.add_argument("--tok-emb", required=True, help="token embedding files: SRC,TGT")
    p.add_argument("--max-distance", type=int, default=50)
    p.add_argument("--out", help="write JSON word links here (default: stdout)")
    p.set_defaults(func=cmd_baseline_word)

    p = sub.add_parser("train-labeler", help="train the span-label classifier on annotated documents")
    p.add_argument("--data", required=True, help="directory of complete alignment files")
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--max-epochs", type=int, default=200)
    p.add_argument("--patience", type=int, default=10)
    p.set_defaults(func=cmd_train_labeler)

    p = sub.add_parser("import", help="import a dataset directory into a store")
    p.add_argument("path")
    p.add_argument("--store", required=True)
    p.set_defaults(func=cmd_import)

    p = sub.add_parser("serve", help="run the annotation HTTP service")
    p.add_argument("--store", required=True)
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--import", dest="import_dir", help="import this dataset directory before serving")
    p.add_argument("--ui", help="serve a built UI directory at /")
    p.set_defaults(func=cmd_serve)
    return parser


def _load_doc(path: str):
    return deserialize(Path(path).read_bytes())


def _write_doc(doc, out: str | None) -> None:
    data = serialize(doc)
    if out:
        Path(out).write_bytes(data)
    else:
        sys.stdout.write(data.decode("utf-8"))


def cmd_validate(args) -> int:
    failed = 0
    for raw in args.paths:
        for file in _alignment_files(raw):
            try:
                doc = _load_doc(str(file))
            except (SerializationError, OSError) as exc:
                print(f"{file}: UNREADABLE ({exc})")
                failed += 1
                continue
            report = validate_document(doc)
            if report.ok:
                state = "complete" if report.is_complete else "incomplete"
                print(f"{file}: OK ({state})")
            else:
                failed += 1
                print(f"{file}: {len(report.errors)} error(s)")
                for err in report.errors:
                    print(f"  {err.code}: {err.message}")
    return 1 if failed else 0


def _alignment_files(raw: str) -> list[Path]:
    p = Path(raw)
    return sorted(p.rglob("*.align.json")) if p.is_dir() else [p]


def cmd_stats(args) -> int:
    groups: dict[str, list] = {}
    for raw in args.paths:
        for file in _alignment_files(raw):
            doc = _load_doc(str(file))
            groups.setdefault("all", []).append(doc)
            if args.split:
                groups.setdefault(file.parent.name, []).append(doc)
    for name, docs in sorted(groups.items()):
        print(f"== split: {name} ({len(docs)} recording(s)) ==")
        _print_stats(docs, args.out_dir, name)
        print()
    return 0


def _print_stats(docs, out_dir: str | None, split_name: str) -> None:
    dist = token_label_distribution(docs)
    labels = sorted(set(dist.source) | set(dist.target))
    print("token label distribution (%):")
    print("  side " + "".join(f"{label:>8}" for label in labels))
    for side_name, side_dist in (("src", dist.source), ("trg", dist.target)):
        print(f"  {side_name:<5}" + "".join(f"{side_dist.get(label, 0.0):8.2f}" for label in labels))
    print("weighted length ratios (tgt/src, two-sided labels):")
    for label, ratio in weighted_length_ratio(docs).items():
        print(f"  {label:>5}: {ratio:.3f}")
    print("span length by label (tokens):")
    for label, summary in span_length_distribution(docs, "label").items():
        print(f"  {label:>5}: n={summary.count:<5} mean={summary.mean:6.2f}  q1={summary.q1:5.1f} med={summary.median:5.1f} q3={summary.q3:5.1f}")
    comp = comparative_reports(docs)
    if comp.direct_char_ratio is not None:
        print(f"direct interpreting char ratio (tgt/src): {100 * comp.direct_char_ratio:.2f}%")
    if comp.relay_char_ratio is not None:
        print(f"relay interpreting char ratio (tgt/src):  {100 * comp.relay_char_ratio:.2f}%")
    if comp.multi_track:
        print("multi-track pairs (first/second):")
        for row in comp.multi_track:
            print(f"  ({row.first_doc_id},{row.second_doc_id}): char {row.char_ratio:.2f}  token {row.token_ratio:.2f}")
    if out_dir:
        _write_stats_files(docs, Path(out_dir), split_name)


def _write_stats_files(docs, out_dir: Path, split_name: str) -> None:
    from .analysis import span_length_samples

    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"span_lengths.{split_name}.tsv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("label\tside\tlength\n")
        for label, side, length in span_length_samples(docs):
            fh.write(f"{label}\t{side}\t{length}\n")
    print(f"wrote {path}")


def _load_emb_pair(spec: str):
    parts = spec.split(",")
    if len(parts) != 2:
        raise SystemExit(f"expected SRC,TGT embedding files, got {spec!r}")
    return read_embedding_file(parts[0]), read_embedding_file(parts[1])


def _load_pair_sides(pair: str, src_lang: str, tgt_lang: str):
    if "," in pair:
        src_path, tgt_path = pair.split(",", 1)
        source = parse_transcript(Path(src_path).read_text(encoding="utf-8"), doc_id=Path(src_path).stem, lang=src_lang, role=SOURCE)
        target = parse_transcript(Path(tgt_path).read_text(encoding="utf-8"), doc_id=Path(tgt_path).stem, lang=tgt_lang, role=TARGET)
        return source, target
    doc = _load_doc(pair)
    return doc.source, doc.target


def cmd_align(args) -> int:
    source, target = _load_pair_sides(args.pair, args.src_lang, args.tgt_lang)
    src_line, tgt_line = _load_emb_pair(args.line_emb)
    src_tok, tgt_tok = _load_emb_pair(args.tok_emb)
    params = AlignerParams()
    if args.params:
        params = AlignerParams.from_dict(json.loads(Path(args.params).read_text(encoding="utf-8")))
    labeler_params = load_model(args.labeler) if args.labeler and not args.default_labels else None
    doc = run_pipeline(source, target, src_line, tgt_line, src_tok, tgt_tok, params=params, labeler_params=labeler_params)
    _write_doc(doc, args.out)
    return 0


def cmd_evaluate(args) -> int:
    ref_path, hyp_path = Path(args.ref), Path(args.hyp)
    if args.hyp_words:
        return _evaluate_word_file(args)
    pairs: list[tuple[Path, Path]] = []
    if ref_path.is_dir():
        for ref_file in sorted(ref_path.rglob("*.align.json")):
            hyp_file = hyp_path / ref_file.relative_to(ref_path)
            if hyp_file.exists():
                pairs.append((ref_file, hyp_file))
    else:
        pairs.append((ref_path, hyp_path))
    reports = [evaluate_pair(_load_doc(str(r)), _load_doc(str(h)), k=args.k) for r, h in pairs]
    for report in reports:
        print(format_report(report))
        print()
    payload = [report_to_dict(r) for r in reports]
    if len(reports) > 1:
        agg = aggregate_reports(reports)
        payload.append({"pair_id": "macro-average", **agg})
        print("macro-average over recordings:")
        for key, value in sorted(agg.items()):
            print(f"  {key} = {value}")
    if args.json_out:
        Path(args.json_out).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return 0


def _evaluate_word_file(args) -> int:
    from .metrics import evaluate_word_alignment, word_link_sets

    ref = _load_doc(args.ref)
    pred_obj = json.loads(Path(args.hyp_words).read_text(encoding="utf-8"))
    pred = {(int(i), int(j)) for i, j in pred_obj["pairs"]}
    sure, possible = word_link_sets(ref)
    score = evaluate_word_alignment(pred, sure, possible)
    print(f"AER {score.aer:.4f}  P {score.precision:.4f}  R {score.recall if score.recall is not None else 'n/a'}  F1 {score.f1 if score.f1 is not None else 'n/a'}")
    if args.json_out:
        Path(args.json_out).write_text(
            json.dumps({"aer": score.aer, "precision": score.precision, "recall": score.recall, "f1": score.f1}, indent=2) + "\n",
            encoding="utf-8",
        )
    return 0


def cmd_kappa(args) -> int:
    a = _load_doc(args.a)
    b = _load_doc(args.b)
    for side in (SOURCE, TARGET):
        score = segmentation_kappa(a, b, side)
        print(f"segmentation kappa ({side}): {score.kappa:.4f}  (po={score.observed_agreement:.4f}, pe={score.expected_agreement:.4f})")
    score = label_kappa(a, b)
    print(f"label kappa (token level):  {score.kappa:.4f}  (po={score.observed_agreement:.4f}, pe={score.expected_agreement:.4f})")
    return 0


def cmd_baseline_random(args) -> int:
    ref = _load_doc(args.ref)
    doc = random_baseline(ref, args.seed)
    _write_doc(doc, args.out)
    return 0


def cmd_baseline_word(args) -> int:
    src_tok, tgt_tok = _load_emb_pair(args.tok_emb)
    params = AlignerParams(baseline_max_distance=args.max_distance)
    pairs = sorted(baseline_word_align(src_tok, tgt_tok, params))
    payload = json.dumps({"pairs": [[i, j] for i, j in pairs]}, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(payload, encoding="utf-8")
    else:
        sys.stdout.write(payload)
    return 0


def cmd_train_labeler(args) -> int:
    from .aligner.embeddings import fallback_embed, normalized_sum

    docs = load_documents([args.data])
    examples = []
    for doc in docs:
        src_emb = fallback_embed([t.surface for t in doc.source.tokens], unit="token")
        tgt_emb = fallback_embed([t.surface for t in doc.target.tokens], unit="token")
        for link in doc.span_links:
            if link.is_one_sided or link.label is None or link.label.value not in ("TRAN", "PARA", "SUM", "GEN", "REPL"):
                continue
            u = normalized_sum(src_emb.vectors[link.src.start : link.src.end].astype(np.float64))
            v = normalized_sum(tgt_emb.vectors[link.tgt.start : link.tgt.end].astype(np.float64))
            sim = float(np.clip(np.dot(u, v), -1.0, 1.0))
            examples.append((extract_features(link, sim), link.label))
    config = TrainConfig(learning_rate=args.learning_rate, max_epochs=args.max_epochs, patience=args.patience, seed=args.seed)
    params = train(examples, config)
    save_model(args.out, params, seed=args.seed)
    print(f"trained on {len(examples)} links from {len(docs)} document(s); wrote {args.out}")
    return 0


def cmd_import(args) -> int:
    store = DocumentStore(args.store)
    summary = import_dataset(args.path, store)
    print(format_import_summary(summary))
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    store = DocumentStore(args.store)
    if args.import_dir:
        print(format_import_summary(import_dataset(args.import_dir, store)))
    serve(args.store, host=args.host, port=args.port, ui_dir=args.ui)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
