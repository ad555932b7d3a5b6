"""Command-line workflow: synth / train / eval / gradcheck / attn-dump / sweep / ablate.

Exit codes: 0 success, 1 usage or config error, 2 data or format error,
3 gradient check failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import checks, data, trainer
from .alignment import export_attention
from .anaf import FormatError
from .config import ConfigError, load_config
from .model import VARIANTS, Model
from .tensor import ShapeError, no_grad

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_GRADCHECK = 3


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems with exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str):
    return [float(x) for x in text.split(",") if x != ""]


def _counts(text: str):
    parts = [int(x) for x in text.split(",")]
    return tuple(parts)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ananet", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="generate a planted synthetic dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=17)
    p.add_argument("--n-per-class", type=_counts, default=(300, 50, 50),
                   help="train,dev,test pairs per class")
    p.add_argument("--regions", type=int, default=8, dest="K")
    p.add_argument("--tokens", type=int, default=12, dest="N")
    p.add_argument("--d-r", type=int, default=64)
    p.add_argument("--d-G", type=int, default=32)
    p.add_argument("--d-B", type=int, default=48)
    p.add_argument("--alignment-strength", type=float, default=4.0)
    p.add_argument("--association-strength", type=float, default=1.2)
    p.add_argument("--noise-sigma", type=float, default=0.1)

    for name in ("train", "eval", "attn-dump", "sweep", "ablate"):
        q = sub.add_parser(name)
        q.add_argument("--data", required=True, help="dataset directory with <split>.jsonl")

    t = sub.choices["train"]
    t.add_argument("--out", required=True, help="model file to write")
    t.add_argument("--config", default=None, help="key=value config file")
    t.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="config override (wins over --config)")
    t.add_argument("--variant", choices=VARIANTS, default="full")
    t.add_argument("--log", default=None, help="per-epoch CSV log path")

    e = sub.choices["eval"]
    e.add_argument("--model", required=True)
    e.add_argument("--split", default="test")

    g = sub.add_parser("gradcheck", help="finite-difference check of every op")
    g.add_argument("--eps", type=float, default=1e-5)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--tol", type=float, default=checks.GRADCHECK_TOL)

    a = sub.choices["attn-dump"]
    a.add_argument("--model", required=True)
    a.add_argument("--split", default="test")
    a.add_argument("--ids", required=True, help="comma-separated pair ids")
    a.add_argument("--out", required=True, help="directory for per-id JSON files")

    s = sub.choices["sweep"]
    s.add_argument("--lambda-grid", type=_floats, required=True)
    s.add_argument("--eta-grid", type=_floats, required=True)
    s.add_argument("--out", required=True, help="CSV path for (lambda, eta, dev_acc)")
    s.add_argument("--config", default=None)
    s.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    s.add_argument("--epochs", type=int, default=None)

    b = sub.choices["ablate"]
    b.add_argument("--variants", default=",".join(VARIANTS),
                   help="comma-separated subset of " + ",".join(VARIANTS))
    b.add_argument("--config", default=None)
    b.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    b.add_argument("--epochs", type=int, default=None)

    return parser


def _overrides(pairs):
    out = []
    for raw in pairs:
        if "=" not in raw:
            raise ConfigError(f"override {raw!r} is not KEY=VALUE")
        key, value = raw.split("=", 1)
        out.append((key.strip(), value.strip()))
    return out


def _config_from_args(args):
    return load_config(args.config, _overrides(args.set))


def _load_split(data_dir, split: str):
    return data.load_dataset(Path(data_dir) / f"{split}.jsonl")


def cmd_synth(args) -> int:
    cfg = data.SynthConfig(
        n_per_class=args.n_per_class, K=args.K, N=args.N,
        d_r=args.d_r, d_G=args.d_G, d_B=args.d_B,
        alignment_strength=args.alignment_strength,
        association_strength=args.association_strength,
        noise_sigma=args.noise_sigma, seed=args.seed)
    try:
        cfg.validate()
    except ValueError as e:
        print(f"ananet synth: {e}", file=sys.stderr)
        return EXIT_USAGE
    summary = data.generate_synthetic(cfg, args.out)
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _config_from_args(args)
    train_records = _load_split(args.data, "train")
    dev_records = _load_split(args.data, "dev")
    model = Model(cfg, variant=args.variant)
    result = trainer.train(model, train_records, dev_records, log_path=args.log)
    model.save(args.out)
    print(json.dumps({
        "best_epoch": result.best_epoch,
        "best_dev_accuracy": result.best_dev_accuracy,
        "epochs": len(result.history),
        "model": str(args.out),
    }, sort_keys=True))
    return EXIT_OK


def cmd_eval(args) -> int:
    model = Model.load(args.model)
    records = _load_split(args.data, args.split)
    report = trainer.evaluate(model, records)
    print(json.dumps(report.to_dict(), sort_keys=True))
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    reports = checks.run_gradcheck_suite(seed=args.seed, eps=args.eps)
    for report in reports:
        print(checks.format_report(report, tol=args.tol))
    if not checks.suite_passed(reports, tol=args.tol):
        return EXIT_GRADCHECK
    return EXIT_OK


def cmd_attn_dump(args) -> int:
    model = Model.load(args.model)
    records = {r.id: r for r in _load_split(args.data, args.split)}
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    wanted = [x for x in args.ids.split(",") if x != ""]
    written = []
    for pair_id in wanted:
        if pair_id not in records:
            raise data.DataError(f"id {pair_id!r} not in split {args.split!r}")
        with no_grad():
            out = model.forward(records[pair_id])
        if out.align is None:
            raise data.DataError(
                f"variant {model.variant!r} has no alignment stream to dump")
        payload = export_attention(out.align, pair_id)
        path = out_dir / f"{pair_id}.json"
        with open(path, "w", encoding="utf-8") as f:
            json.dump(payload, f, sort_keys=True)
        written.append(str(path))
    print(json.dumps({"written": written}, sort_keys=True))
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _config_from_args(args)
    train_records = _load_split(args.data, "train")
    dev_records = _load_split(args.data, "dev")
    rows = trainer.sweep(cfg, train_records, dev_records,
                         args.lambda_grid, args.eta_grid, epochs=args.epochs)
    trainer.write_sweep_csv(rows, args.out)
    print(json.dumps({"cells": len(rows), "csv": str(args.out)}, sort_keys=True))
    return EXIT_OK


def cmd_ablate(args) -> int:
    cfg = _config_from_args(args)
    variants = tuple(x for x in args.variants.split(",") if x != "")
    for variant in variants:
        if variant not in VARIANTS:
            print(f"ananet ablate: unknown variant {variant!r}", file=sys.stderr)
            return EXIT_USAGE
    train_records = _load_split(args.data, "train")
    dev_records = _load_split(args.data, "dev")
    test_records = _load_split(args.data, "test")
    reports = trainer.ablate(cfg, train_records, dev_records, test_records,
                             variants=variants, epochs=args.epochs)
    print(json.dumps({v: r.to_dict() for v, r in reports.items()}, sort_keys=True))
    return EXIT_OK


_COMMANDS = {
    "synth": cmd_synth,
    "train": cmd_train,
    "eval": cmd_eval,
    "gradcheck": cmd_gradcheck,
    "attn-dump": cmd_attn_dump,
    "sweep": cmd_sweep,
    "ablate": cmd_ablate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as e:
        print(f"ananet: config error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (data.DataError, FormatError, ShapeError, FileNotFoundError, OSError) as e:
        print(f"ananet: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
