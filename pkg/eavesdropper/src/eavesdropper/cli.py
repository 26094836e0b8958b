"""CLI: train, train-adv, and evaluate against exported frame datasets."""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from .dataset import load_dataset
from .evaluate import accuracy_csv, confusion_csv, evaluate
from .train import TrainConfig, load_model, save_model, train, train_adversarial


def _config_from_args(args: argparse.Namespace) -> TrainConfig:
    kwargs = dict(
        batch_size=args.batch_size,
        initial_lr=args.lr,
        epochs=args.epochs,
        seed=args.seed,
        base_filters=args.base_filters,
    )
    if args.augment:
        lo_d, hi_d, lo_f, hi_f = (float(v) for v in args.augment.split(":"))
        kwargs["augment_delta_f"] = (lo_d, hi_d)
        kwargs["augment_f_m"] = (lo_f, hi_f)
    return TrainConfig(**kwargs)


def cmd_train(args: argparse.Namespace, adversarial: bool) -> int:
    config = _config_from_args(args)
    if adversarial and not config.augmented:
        print("error: train-adv needs --augment 'dlo:dhi:flo:fhi' (Hz)", file=sys.stderr)
        return 2
    train_set = load_dataset(args.dataset, split="train")
    val_set = load_dataset(args.dataset, split="val")
    runner = train_adversarial if adversarial else train
    model, log = runner(train_set, val_set, config)
    save_model(model, config, train_set.classes, log, args.model)
    print(
        f"trained on {len(train_set)} frames for {config.epochs} epochs; "
        f"final val accuracy {log.val_accuracies[-1]:.3f} -> {args.model}"
    )
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    model, classes, _ = load_model(args.model)
    split = None if args.split == "all" else args.split
    dataset = load_dataset(args.dataset, split=split)
    cells, confusion = evaluate(model, dataset, classes)
    csv_text = accuracy_csv(cells, args.seed)
    if args.out == "-":
        sys.stdout.write(csv_text)
    else:
        with open(args.out, "w") as fh:
            fh.write(csv_text)
    if args.confusion_out:
        with open(args.confusion_out, "w") as fh:
            fh.write(confusion_csv(confusion, classes))
    overall = sum(c.accuracy * c.n for c in cells) / max(sum(c.n for c in cells), 1)
    print(f"evaluated {sum(c.n for c in cells)} frames; overall accuracy {overall:.3f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cnn-eavesdropper")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--config", default=None, help="JSON file of option defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_train_args(p):
        p.add_argument("--dataset", required=True)
        p.add_argument("--model", required=True, help="output model file")
        p.add_argument("--epochs", type=int, default=15)
        p.add_argument("--batch-size", type=int, default=256)
        p.add_argument("--lr", type=float, default=0.02)
        p.add_argument("--base-filters", type=int, default=16)
        p.add_argument(
            "--augment",
            default=None,
            help="cloaking ranges 'dlo:dhi:flo:fhi' in Hz (log-uniform draws)",
        )

    t = sub.add_parser("train", help="train on clean frames")
    add_train_args(t)
    t.set_defaults(func=lambda a: cmd_train(a, adversarial=False))

    ta = sub.add_parser("train-adv", help="train with random cloaking augmentation")
    add_train_args(ta)
    ta.set_defaults(func=lambda a: cmd_train(a, adversarial=True))

    e = sub.add_parser("evaluate", help="accuracy table + confusion matrix")
    e.add_argument("--dataset", required=True)
    e.add_argument("--model", required=True)
    e.add_argument("--split", default="test", choices=("train", "val", "test", "all"))
    e.add_argument("--out", default="-")
    e.add_argument("--confusion-out", default=None)
    e.set_defaults(func=cmd_evaluate)

    parser.subcommand_parsers = {"train": t, "train-adv": ta, "evaluate": e}
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        # Config supplies defaults; explicit flags still win on re-parse.
        with open(args.config) as fh:
            overrides = json.load(fh)
        known = set(vars(args))
        bad = [k for k in overrides if k.replace("-", "_") not in known]
        if bad:
            print(f"error: unknown config keys {bad}", file=sys.stderr)
            return 3
        defaults = {k.replace("-", "_"): v for k, v in overrides.items()}
        parser.set_defaults(**defaults)
        parser.subcommand_parsers[args.command].set_defaults(**defaults)
        args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
