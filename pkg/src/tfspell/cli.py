"""Command-line entry point.

Exit codes: 0 success, 1 usage error (bad flags or paths), 2 data error
(malformed input files), 3 runtime error (training failure and the like).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import evaluation, mlp, synth
from .dispatch import recognize
from .landmarks import (
    AxisConvention,
    Frame,
    MalformedRecord,
    canonicalize,
    read_frames,
    read_labels,
    write_frames,
    write_labels,
)
from .rules import InvalidKeypointMap, KeypointMap

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RUNTIME = 0, 1, 2, 3


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def _nonneg_float(text):
    v = float(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative number, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tfspell", description="Thai finger spelling recognition from hand landmarks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common_train_flags(p):
        p.add_argument("--encoding", choices=[e.value for e in mlp.Encoding], default="relative")
        p.add_argument("--epochs", type=_positive_int, default=mlp.TrainConfig.epochs)
        p.add_argument("--batch", type=_positive_int, default=mlp.TrainConfig.batch_size)
        p.add_argument("--lr", type=_positive_float, default=mlp.TrainConfig.learning_rate)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--y-axis", choices=["up", "down"], default="up")

    g = sub.add_parser("gen", help="write a synthetic dataset (frames.jsonl + labels.csv)")
    g.add_argument("--out", required=True)
    g.add_argument("--kind", choices=["single", "point"], default="single")
    g.add_argument("--classes", type=int, default=30)
    g.add_argument("--per-class", type=_positive_int, default=50)
    g.add_argument("--noise", type=_nonneg_float, default=0.005)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--map")
    g.add_argument("--y-axis", choices=["up", "down"], default="up")

    t = sub.add_parser("train", help="train a single-hand model")
    t.add_argument("--in", dest="inp", required=True)
    t.add_argument("--labels", required=True)
    t.add_argument("--out", required=True)
    common_train_flags(t)

    b = sub.add_parser("bootstrap", help="bootstrap repeats of train + held-out evaluation")
    b.add_argument("--in", dest="inp", required=True)
    b.add_argument("--labels", required=True)
    b.add_argument("--test-in", required=True)
    b.add_argument("--test-labels", required=True)
    b.add_argument("--repeats", type=_positive_int, default=10)
    b.add_argument("--out")
    common_train_flags(b)

    c = sub.add_parser("classify", help="recognize every frame of a landmark stream")
    c.add_argument("--model", required=True)
    c.add_argument("--map")
    c.add_argument("--in", dest="inp", required=True)
    c.add_argument("--out")
    c.add_argument("--y-axis", choices=["up", "down"], default="up")

    e = sub.add_parser("eval", help="score predictions against labels")
    e.add_argument("--in", dest="inp", required=True)
    e.add_argument("--labels", required=True)
    e.add_argument("--out", required=True, help="directory for confusion.csv, rates.csv, summary.json")

    a = sub.add_parser("audit", help="summarize detection-audit records")
    a.add_argument("--in", dest="inp", required=True)
    a.add_argument("--out")
    return parser


def _need_file(path):
    if path is not None and not os.path.isfile(path):
        raise UsageError(f"input file not found: {path}")


def _need_out_parent(path):
    if path is None:
        return
    parent = Path(path).resolve().parent
    if not parent.is_dir():
        raise UsageError(f"output directory does not exist: {parent}")


def _load_map(path) -> KeypointMap:
    return KeypointMap.default() if path is None else KeypointMap.load(path)


def _labelled_hands(frames: list[Frame], labels: dict[str, str], source: str):
    data = []
    for f in frames:
        if len(f.hands) != 1:
            raise DataError(f"{source}: frame {f.frame_id!r} has {len(f.hands)} hands; training needs exactly 1")
        if f.frame_id not in labels:
            raise DataError(f"{source}: frame {f.frame_id!r} has no label")
        data.append((f.hands[0], labels[f.frame_id]))
    return data


def _read_canonical(path, y_axis) -> list[Frame]:
    try:
        frames = read_frames(path)
    except MalformedRecord as exc:
        raise DataError(f"{path}: {exc}") from None
    return [canonicalize(f, AxisConvention(y_axis)) for f in frames]


def _read_labels(path):
    try:
        return read_labels(path)
    except MalformedRecord as exc:
        raise DataError(f"{path}: {exc}") from None


def _emit(text: str, path) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def cmd_gen(args) -> None:
    out = Path(args.out)
    if out.exists() and not out.is_dir():
        raise UsageError(f"--out must be a directory: {out}")
    _need_file(args.map)
    params = synth.PoseParams(noise_sigma=args.noise, seed=args.seed)
    frames, labels = [], []
    if args.kind == "single":
        try:
            data = synth.generate_class_dataset(args.classes, args.per_class, params)
        except synth.InvalidParams as exc:
            raise UsageError(str(exc)) from None
        for i, (hand, label) in enumerate(data):
            fid = f"{label}-{i:05d}"
            frames.append(Frame(fid, (hand,)))
            labels.append((fid, label))
    else:
        kmap = _load_map(args.map)
        for target in sorted(kmap):
            for j in range(args.per_class):
                p = synth.PoseParams(noise_sigma=args.noise, seed=args.seed * 1_000_003 + target * 10_007 + j)
                f = synth.generate_pointing_frame(target, p)
                fid = f"{kmap[target]}-t{target:02d}-{j:04d}"
                frames.append(Frame(fid, f.hands))
                labels.append((fid, kmap[target]))
    if args.y_axis == "down":
        frames = [canonicalize(f, AxisConvention.DOWN) for f in frames]
    out.mkdir(parents=True, exist_ok=True)
    write_frames(out / "frames.jsonl", frames)
    write_labels(out / "labels.csv", labels)
    print(f"wrote {len(frames)} frames to {out / 'frames.jsonl'} and labels to {out / 'labels.csv'}")


def _train_config(args) -> mlp.TrainConfig:
    return mlp.TrainConfig(epochs=args.epochs, batch_size=args.batch, learning_rate=args.lr, seed=args.seed)


def cmd_train(args) -> None:
    _need_file(args.inp)
    _need_file(args.labels)
    _need_out_parent(args.out)
    data = _labelled_hands(_read_canonical(args.inp, args.y_axis), _read_labels(args.labels), args.inp)
    try:
        model, history = mlp.train(data, _train_config(args), args.encoding)
    except mlp.InsufficientData as exc:
        raise DataError(str(exc)) from None
    Path(args.out).write_bytes(mlp.save_model(model))
    last = history[-1]
    print(f"epoch {last.epoch} loss {last.loss:.6f} train_accuracy {last.accuracy:.4f}")


def cmd_bootstrap(args) -> None:
    for p in (args.inp, args.labels, args.test_in, args.test_labels):
        _need_file(p)
    _need_out_parent(args.out)
    train_set = _labelled_hands(_read_canonical(args.inp, args.y_axis), _read_labels(args.labels), args.inp)
    test_set = _labelled_hands(
        _read_canonical(args.test_in, args.y_axis), _read_labels(args.test_labels), args.test_in
    )
    accs = evaluation.bootstrap_eval(train_set, test_set, _train_config(args), args.encoding, args.repeats)
    report = {"encoding": args.encoding, "seed": args.seed, "repeats": args.repeats, "accuracies": accs}
    _emit(json.dumps(report, indent=2) + "\n", args.out)


def cmd_classify(args) -> None:
    _need_file(args.model)
    _need_file(args.map)
    _need_file(args.inp)
    _need_out_parent(args.out)
    model = mlp.load_model(Path(args.model).read_bytes())
    kmap = _load_map(args.map)
    frames = _read_canonical(args.inp, args.y_axis)
    lines = [json.dumps(recognize(f, model, kmap).to_record()) + "\n" for f in frames]
    _emit("".join(lines), args.out)


def _read_predictions(path) -> list[tuple[str, str | None]]:
    preds = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                fid, label = rec["frame_id"], rec["label"]
            except (json.JSONDecodeError, KeyError, TypeError):
                raise DataError(f"{path}: line {lineno}: not a prediction record") from None
            if not isinstance(fid, str) or not (label is None or isinstance(label, str)):
                raise DataError(f"{path}: line {lineno}: frame_id must be a string and label a string or null")
            preds.append((fid, label))
    return preds


def cmd_eval(args) -> None:
    _need_file(args.inp)
    _need_file(args.labels)
    out = Path(args.out)
    if out.exists() and not out.is_dir():
        raise UsageError(f"--out must be a directory: {out}")
    preds = _read_predictions(args.inp)
    truth = _read_labels(args.labels)
    pairs = []
    for fid, label in preds:
        if fid not in truth:
            raise DataError(f"{args.labels}: no label for frame {fid!r}")
        pairs.append((truth[fid], label))
    cm = evaluation.confusion(pairs)
    out.mkdir(parents=True, exist_ok=True)
    evaluation.write_confusion_csv(cm, out / "confusion.csv")
    evaluation.write_rates_csv(cm, out / "rates.csv")
    evaluation.write_summary_json(cm, out / "summary.json")
    acc = evaluation.accuracy(cm) if cm.total else float("nan")
    print(f"n {cm.total} accuracy {acc:.4f} rejected {int(cm.rejected.sum())}")


def cmd_audit(args) -> None:
    _need_file(args.inp)
    _need_out_parent(args.out)
    try:
        records = evaluation.read_audit_csv(args.inp)
    except ValueError as exc:
        raise DataError(f"{args.inp}: {exc}") from None
    summary = {g: s.to_dict() for g, s in evaluation.audit_summary(records).items()}
    _emit(json.dumps(summary, indent=2) + "\n", args.out)


COMMANDS = {
    "gen": cmd_gen,
    "train": cmd_train,
    "bootstrap": cmd_bootstrap,
    "classify": cmd_classify,
    "eval": cmd_eval,
    "audit": cmd_audit,
}


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        COMMANDS[args.command](args)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, MalformedRecord, InvalidKeypointMap, mlp.CorruptModel, evaluation.UnknownLabel,
            synth.InvalidParams) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
