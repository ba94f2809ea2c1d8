"""Command-line interface: train, evaluate, recognize, inspect.

Exit codes: 0 success, 1 usage error, 2 I/O or format error,
3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import bankfile, features
from .dataset import SplitSpec, read_idx, read_pgm, read_pgm_dir, split
from .errors import BankFormatError, DatasetError, InvalidModel, MissingClass, NumeralHmmError
from .evaluation import EvaluationReport
from .hmm import TrainConfig, Topology, classify, classify_batch, train_bank
from .pipeline import PipelineConfig, glyph_sequence, sequences, stages

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _threshold(text: str):
    if text == "otsu":
        return text
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("threshold must be 'otsu' or an integer") from None
    if not 0 <= value <= 256:
        raise argparse.ArgumentTypeError("fixed threshold must lie in 0..256")
    return value


def _workers() -> int:
    raw = os.environ.get("NUMERAL_HMM_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"NUMERAL_HMM_THREADS must be an integer, got {raw!r}") from None
    return n if n > 0 else (os.cpu_count() or 1)


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("feature pipeline (defaults come from the bank manifest when present)")
    g.add_argument("--side", type=int, help="normalized glyph side in pixels (default 64)")
    g.add_argument("--threshold", type=_threshold, help="'otsu' (default) or a fixed integer")
    g.add_argument("--prune", type=int, dest="prune_length", help="spur pruning length, 0 = off")
    g.add_argument("--collapse-runs", dest="collapse", action=argparse.BooleanOptionalAction,
                   help="merge repeated direction codes")
    g.add_argument("--ink", choices=["dark", "light", "auto"], help="ink polarity (default auto)")


def _add_dataset_flags(p: argparse.ArgumentParser, split_flags: bool = True) -> None:
    g = p.add_argument_group("dataset")
    g.add_argument("--images", help="IDX images file")
    g.add_argument("--labels", help="IDX labels file")
    g.add_argument("--pgm-dir", help="directory laid out as <root>/<digit>/<name>.pgm")
    if split_flags:
        g.add_argument("--train-per-class", type=int, default=40)
        g.add_argument("--test-per-class", type=int, default=100)
        g.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="numeral-hmm", description="Handwritten digit recognition with discrete HMMs.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train a model bank")
    _add_dataset_flags(p)
    _add_pipeline_flags(p)
    g = p.add_argument_group("hmm")
    g.add_argument("--states", type=int, default=10)
    g.add_argument("--topology", choices=["left_to_right", "ergodic"], default="left_to_right")
    g.add_argument("--skip", type=int, default=1, help="largest forward jump of a left-to-right model")
    g.add_argument("--max-iters", type=int, default=100)
    g.add_argument("--tol", type=float, default=1e-4)
    g.add_argument("--emission-floor", type=float, default=1e-6)
    p.add_argument("--out", required=True, help="model bank file to write")

    p = sub.add_parser("evaluate", help="evaluate a bank on the test split")
    p.add_argument("--bank", required=True)
    _add_dataset_flags(p)
    p.add_argument("--no-split", action="store_true", help="test on every sample instead of the split")
    p.add_argument("--out-dir", default=".", help="where per_class.csv and confusion.csv go")
    _add_pipeline_flags(p)

    p = sub.add_parser("recognize", help="classify one PGM image")
    p.add_argument("--bank", required=True)
    p.add_argument("image")
    _add_pipeline_flags(p)

    p = sub.add_parser("inspect", help="dump every pipeline stage for one PGM image")
    p.add_argument("image")
    p.add_argument("--bank", help="read pipeline defaults from this bank's manifest")
    _add_pipeline_flags(p)
    return parser


# --------------------------------------------------------------------------


def manifest_path(bank_path: str | os.PathLike) -> Path:
    return Path(f"{bank_path}.manifest.json")


def _sha256(path: str | os.PathLike) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _pipeline_overrides(args) -> dict:
    keys = ("side", "threshold", "prune_length", "collapse", "ink")
    return {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}


def _resolve_pipeline(args, bank_path) -> PipelineConfig:
    base = PipelineConfig()
    if bank_path is not None and manifest_path(bank_path).exists():
        with open(manifest_path(bank_path)) as fh:
            base = PipelineConfig.from_dict(json.load(fh)["pipeline"])
    return replace(base, **_pipeline_overrides(args))


def _load_samples(args):
    if args.pgm_dir:
        if args.images or args.labels:
            raise UsageError("use either --pgm-dir or --images/--labels")
        return read_pgm_dir(args.pgm_dir), [args.pgm_dir]
    if not (args.images and args.labels):
        raise UsageError("--images and --labels (or --pgm-dir) are required")
    return read_idx(args.images, args.labels), [args.images, args.labels]


def _dataset_hashes(paths) -> dict:
    out = {}
    for p in paths:
        if Path(p).is_dir():
            h = hashlib.sha256()
            for f in sorted(Path(p).rglob("*.pgm")):
                h.update(str(f.relative_to(p)).encode())
                h.update(_sha256(f).encode())
            out[str(p)] = h.hexdigest()
        else:
            out[str(p)] = _sha256(p)
    return out


def cmd_train(args) -> int:
    try:
        topology = Topology.left_to_right(args.skip) if args.topology == "left_to_right" else Topology()
        train_cfg = TrainConfig(
            n_states=args.states, topology=topology, max_iters=args.max_iters, tol=args.tol,
            emission_floor=args.emission_floor, seed=args.seed,
        )
        cfg = replace(PipelineConfig(train=train_cfg), **_pipeline_overrides(args))
        spec = SplitSpec(args.train_per_class, args.test_per_class, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    samples, paths = _load_samples(args)
    train, _ = split(samples, spec)
    seqs = sequences([s.image for s in train], cfg, workers=_workers())
    grouped: dict[int, list[list[int]]] = {d: [] for d in range(10)}
    rejected = 0
    for s, q in zip(train, seqs):
        if q:
            grouped[s.label].append(q)
        else:
            rejected += 1
    bank = train_bank(grouped, cfg.train, workers=_workers())
    bankfile.save(bank, args.out)
    manifest = {
        "bank": {"path": str(args.out), "sha256": _sha256(args.out)},
        "dataset": _dataset_hashes(paths),
        "pipeline": cfg.to_dict(),
        "seed": args.seed,
        "split": {"train_per_class": spec.train_per_class, "test_per_class": spec.test_per_class},
        "training_sequences": {str(d): len(grouped[d]) for d in range(10)},
        "rejected_training_glyphs": rejected,
    }
    with open(manifest_path(args.out), "w", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {args.out} ({len(train)} training glyphs, {rejected} rejected)")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    bank = bankfile.load(args.bank)
    cfg = _resolve_pipeline(args, args.bank)
    samples, _ = _load_samples(args)
    if args.no_split:
        test = samples
    else:
        try:
            spec = SplitSpec(args.train_per_class, args.test_per_class, args.seed)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        _, test = split(samples, spec)
    if not test:
        print("error: no test samples", file=sys.stderr)
        return EXIT_IO
    seqs = sequences([s.image for s in test], cfg, workers=_workers())
    preds = classify_batch(bank, seqs)
    report = EvaluationReport.from_predictions([s.label for s in test], [p.label for p in preds])
    report.check()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "per_class.csv", "w", newline="") as fh:
        fh.write(report.per_class_csv())
    with open(out / "confusion.csv", "w", newline="") as fh:
        fh.write(report.confusion_csv())
    print(report.summary())
    return EXIT_OK


def cmd_recognize(args) -> int:
    bank = bankfile.load(args.bank)
    cfg = _resolve_pipeline(args, args.bank)
    image = read_pgm(args.image)
    pred = classify(bank, glyph_sequence(image, cfg))
    if pred.rejected:
        print("label=REJECT")
        return EXIT_OK
    print(f"label={pred.label}")
    for d, s in enumerate(pred.scores):
        print(f"score[{d}]={s!r}")
    return EXIT_OK


def cmd_inspect(args) -> int:
    cfg = _resolve_pipeline(args, args.bank)
    image = read_pgm(args.image)
    st = stages(image, cfg)
    if st.skeleton is None:
        print("EMPTY")
        return EXIT_OK
    print("[binary]")
    print(features.render(st.binary))
    print("[skeleton]")
    print(features.render(st.skeleton, st.points))
    print("[features]")
    print(st.summary)
    print("[sequence]")
    print(" ".join(map(str, st.sequence)) if st.sequence else "EMPTY")
    return EXIT_OK


COMMANDS = {"train": cmd_train, "evaluate": cmd_evaluate, "recognize": cmd_recognize, "inspect": cmd_inspect}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvalidModel, AssertionError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (OSError, DatasetError, BankFormatError, MissingClass, NumeralHmmError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
