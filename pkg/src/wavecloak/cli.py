"""Command-line entry points for dataset generation and experiment sweeps.

All subcommands are deterministic given --seed. CSV outputs start with
comment rows recording the seed and a hash of the resolved configuration, so
any results file can be traced back to the exact run that made it.

Exit codes: 0 success, 2 invalid parameters, 3 bad configuration, 4 dataset
format problems, 5 I/O failures (see errors.py).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from typing import List, Optional, Sequence

import numpy as np

from . import baseline, dataset_io, sweeps
from .errors import InvalidConfigError, InvalidParameterError, WavecloakError
from .framegen import (
    DEFAULT_SNR_GRID,
    dataset1_config,
    dataset2_config,
)
from .frames import spectrogram
from .modems import DIGITAL_SCHEMES, ModulationScheme
from .obfuscate import ObfuscationParams
from .sweeps import record_to_frame


def _parse_floats(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v != ""]
    except ValueError as exc:
        raise InvalidParameterError(f"expected comma-separated numbers, got {text!r}") from exc


def _parse_pairs(text: str) -> List[tuple]:
    """Cloaking parameter list: 'df:fm' pairs separated by commas."""
    pairs = []
    for chunk in text.split(","):
        if not chunk:
            continue
        try:
            df, fm = chunk.split(":")
            pairs.append((float(df), float(fm)))
        except ValueError as exc:
            raise InvalidParameterError(
                f"expected delta_f:f_m pairs like '1.5e6:5e5', got {chunk!r}"
            ) from exc
    return pairs


def _config_hash(args: argparse.Namespace) -> str:
    doc = {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}
    blob = json.dumps(doc, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _write_csv(path: str, args: argparse.Namespace, header: Sequence[str], rows) -> None:
    lines = [
        f"# wavecloak {args.command}",
        f"# seed={args.seed} config_sha256={_config_hash(args)}",
        ",".join(header),
    ]
    for row in rows:
        lines.append(",".join(str(v) for v in row))
    text = "\n".join(lines) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _scheme(tag: str) -> ModulationScheme:
    try:
        return ModulationScheme(tag.lower())
    except ValueError:
        raise InvalidParameterError(
            f"unknown scheme {tag!r}; choose from {[s.value for s in ModulationScheme]}"
        ) from None


def _obf_from_args(args: argparse.Namespace) -> Optional[ObfuscationParams]:
    if args.delta_f is None and args.f_m is None:
        return None
    if args.delta_f is None or args.f_m is None:
        raise InvalidParameterError("--delta-f and --f-m must be given together")
    return ObfuscationParams(args.delta_f, args.f_m)


def cmd_gen_dataset(args: argparse.Namespace) -> int:
    pairs = _parse_pairs(args.obf) if args.obf else []
    snr_grid = _parse_floats(args.snr_grid) if args.snr_grid else list(DEFAULT_SNR_GRID)
    maker = {"dataset1": dataset1_config, "dataset2": dataset2_config}.get(args.profile)
    if maker is None:
        raise InvalidConfigError(f"unknown profile {args.profile!r}")
    config = maker(
        scale=args.scale,
        master_seed=args.seed,
        obf_pairs=pairs,
        snr_grid_db=snr_grid,
        channel=args.channel,
    )
    from .framegen import generate_dataset

    manifest = generate_dataset(config, args.out)
    counts = {s: 0 for s in ("train", "val", "test")}
    for rec in manifest.frames:
        counts[rec.split] += 1
    print(
        f"wrote {len(manifest.frames)} frames to {args.out} "
        f"(train={counts['train']} val={counts['val']} test={counts['test']}, "
        f"classes={len(manifest.classes)}, snr points={len(snr_grid)})"
    )
    return 0


def cmd_ser_sweep(args: argparse.Namespace) -> int:
    scheme = _scheme(args.scheme)
    modes = [m.strip() for m in args.modes.split(",") if m.strip()]
    obf = _obf_from_args(args)
    if obf is None and any(m != "clean" for m in modes):
        raise InvalidParameterError("cloaked modes need --delta-f and --f-m")
    points = sweeps.ser_sweep(
        scheme,
        _parse_floats(args.esn0),
        modes,
        args.symbols,
        args.seed,
        obf=obf,
        threads=args.threads,
    )
    _write_csv(
        args.out,
        args,
        ("snr_db", "mode", "ser", "ci95", "num_symbols", "num_errors"),
        [(p.snr_db, p.mode, p.ser, p.ci95, p.num_symbols, p.num_errors) for p in points],
    )
    return 0


def cmd_accuracy_sweep(args: argparse.Namespace) -> int:
    manifest = dataset_io.load_manifest(args.dataset)
    if args.model_mode == "baseline-train":
        data, records = dataset_io.load_split(args.dataset, manifest, "train")
        frames = [
            record_to_frame(data[i], manifest.sample_rate, records[i].label)
            for i in range(len(records))
        ]
        labels = [r.label for r in records]
        if args.classes == "digital":
            digital = {s.value for s in DIGITAL_SCHEMES}
            keep = [i for i, l in enumerate(labels) if l in digital]
            frames = [frames[i] for i in keep]
            labels = [labels[i] for i in keep]
        model = baseline.train_baseline(frames, labels)
        baseline.save_model(model, args.model)
        print(f"trained baseline on {len(frames)} frames -> {args.model}")
        return 0
    model = baseline.load_model(args.model)
    data, records = dataset_io.load_split(args.dataset, manifest, args.split)
    if args.classes == "digital":
        digital = {s.value for s in DIGITAL_SCHEMES}
        keep = [i for i, r in enumerate(records) if r.label in digital]
        data = data[keep]
        records = [records[i] for i in keep]
    frames = [
        record_to_frame(data[i], manifest.sample_rate, records[i].label)
        for i in range(len(records))
    ]
    rows = sweeps.accuracy_table(frames, records, model, equalize=args.equalize)
    _write_csv(
        args.out,
        args,
        ("snr_db", "delta_f", "f_m", "mode", "accuracy", "n"),
        [(r.snr_db, r.delta_f, r.f_m, r.mode, r.accuracy, r.n) for r in rows],
    )
    return 0


def cmd_spectrogram(args: argparse.Namespace) -> int:
    if args.dataset is not None:
        manifest = dataset_io.load_manifest(args.dataset)
        samples = dataset_io.load_record(args.dataset, manifest, args.index)
        frame = record_to_frame(samples, manifest.sample_rate, manifest.frames[args.index].label)
    else:
        from .framegen import FrameSpec, build_frame

        spec = FrameSpec(
            scheme=_scheme(args.scheme),
            snr_db=args.snr,
            seed=args.seed,
            obf=_obf_from_args(args),
        )
        frame = build_frame(spec)
    matrix = spectrogram(frame, args.window_len, args.hop, args.fft_len)
    if args.out.endswith(".npy"):
        np.save(args.out, matrix)
    else:
        np.savetxt(args.out, matrix, fmt="%.8e")
    print(f"wrote {matrix.shape[0]}x{matrix.shape[1]} magnitude grid to {args.out}")
    return 0


def cmd_fading_sweep(args: argparse.Namespace) -> int:
    if args.metric == "accuracy":
        obf = _obf_from_args(args)
        if obf is None:
            raise InvalidParameterError("accuracy metric needs --delta-f and --f-m")
        rows = sweeps.fading_accuracy_sweep(
            _parse_floats(args.esn0),
            [int(v) for v in _parse_floats(args.taps)],
            args.frames_per_scheme,
            args.seed,
            obf=obf,
            decay_db_per_tap=args.decay_db,
        )
        _write_csv(
            args.out,
            args,
            ("snr_db", "num_taps", "cloaked", "accuracy", "n"),
            [(r.snr_db, r.num_taps, int(r.cloaked), r.accuracy, r.n) for r in rows],
        )
        return 0
    scheme = _scheme(args.scheme)
    rows = sweeps.fading_sweep(
        scheme,
        _parse_floats(args.esn0),
        [int(v) for v in _parse_floats(args.taps)],
        [e.strip() for e in args.equalizers.split(",") if e.strip()],
        args.symbols,
        args.seed,
        obf=_obf_from_args(args),
        decay_db_per_tap=args.decay_db,
        threads=args.threads,
    )
    _write_csv(
        args.out,
        args,
        ("snr_db", "num_taps", "equalizer", "cloaked", "ser", "ci95", "num_symbols"),
        [
            (r.snr_db, r.num_taps, r.equalizer, int(r.cloaked), r.ser, r.ci95, r.num_symbols)
            for r in rows
        ],
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavecloak",
        description="Waveform-obfuscation modem toolkit",
    )
    parser.add_argument("--seed", type=int, default=0, help="master seed for all randomness")
    parser.add_argument("--threads", type=int, default=1, help="parallel sweep workers")
    parser.add_argument("--config", type=str, default=None, help="JSON file of option defaults")
    parser.add_argument(
        "--print-default-config",
        action="store_true",
        help="print the resolved options of the chosen subcommand as JSON and exit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-dataset", help="export a frame dataset with manifest")
    g.add_argument("--profile", default="dataset1", choices=("dataset1", "dataset2"))
    g.add_argument("--scale", type=int, default=100, help="divide the full frame counts by this")
    g.add_argument("--out", required=True)
    g.add_argument("--obf", default="", help="cloaking pairs 'df:fm,df:fm' in Hz; empty = clean")
    g.add_argument("--snr-grid", default="", help="comma-separated SNR grid in dB")
    g.add_argument("--channel", default="awgn", choices=("awgn", "flat", "multipath"))
    g.set_defaults(func=cmd_gen_dataset)

    s = sub.add_parser("ser-sweep", help="symbol error rate over an Es/N0 grid")
    s.add_argument("--scheme", default="qpsk")
    s.add_argument("--esn0", default="0,2,4,6,8,10", help="Es/N0 grid in dB")
    s.add_argument("--modes", default="clean", help=f"subset of {sweeps.SER_MODES}")
    s.add_argument("--symbols", type=int, default=100000)
    s.add_argument("--delta-f", type=float, default=None, help="cloaking delta_f in Hz")
    s.add_argument("--f-m", type=float, default=None, help="cloaking f_m in Hz")
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_ser_sweep)

    a = sub.add_parser("accuracy-sweep", help="baseline classifier accuracy over a dataset")
    a.add_argument("--dataset", required=True)
    a.add_argument("--model-mode", default="baseline-eval", choices=("baseline-train", "baseline-eval"))
    a.add_argument("--model", required=True, help="model file to write (train) or read (eval)")
    a.add_argument("--split", default="test", choices=("train", "val", "test"))
    a.add_argument("--classes", default="all", choices=("all", "digital"))
    a.add_argument("--equalize", action="store_true", help="remove cloaking before classifying")
    a.add_argument("--out", default="-")
    a.set_defaults(func=cmd_accuracy_sweep)

    p = sub.add_parser("spectrogram", help="emit a magnitude grid for one frame")
    p.add_argument("--dataset", default=None)
    p.add_argument("--index", type=int, default=0)
    p.add_argument("--scheme", default="qpsk", help="generate on the fly when no dataset given")
    p.add_argument("--snr", type=float, default=30.0)
    p.add_argument("--delta-f", type=float, default=None)
    p.add_argument("--f-m", type=float, default=None)
    p.add_argument("--window-len", type=int, default=128)
    p.add_argument("--hop", type=int, default=32)
    p.add_argument("--fft-len", type=int, default=256)
    p.add_argument("--out", required=True, help=".npy for binary, anything else for text")
    p.set_defaults(func=cmd_spectrogram)

    f = sub.add_parser("fading-sweep", help="SER or accuracy under frequency-selective fading")
    f.add_argument("--metric", default="ser", choices=("ser", "accuracy"))
    f.add_argument("--scheme", default="qpsk")
    f.add_argument("--esn0", default="0,5,10,15")
    f.add_argument("--taps", default="1,2,4", help="channel tap counts to sweep")
    f.add_argument("--equalizers", default="mlsd,mmse")
    f.add_argument("--symbols", type=int, default=20000)
    f.add_argument("--frames-per-scheme", type=int, default=30, help="accuracy metric only")
    f.add_argument("--decay-db", type=float, default=3.0, help="power-delay decay per tap")
    f.add_argument("--delta-f", type=float, default=None)
    f.add_argument("--f-m", type=float, default=None)
    f.add_argument("--out", default="-")
    f.set_defaults(func=cmd_fading_sweep)

    # Config-file defaults must reach the subparser actions too (subparsers
    # parse into a fresh namespace, so parent set_defaults alone is ignored).
    parser.subcommand_parsers = {
        "gen-dataset": g,
        "ser-sweep": s,
        "accuracy-sweep": a,
        "spectrogram": p,
        "fading-sweep": f,
    }
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            with open(args.config) as fh:
                overrides = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: unreadable config {args.config}: {exc}", file=sys.stderr)
            return InvalidConfigError.exit_code
        if not isinstance(overrides, dict):
            print("error: config file must hold a JSON object", file=sys.stderr)
            return InvalidConfigError.exit_code
        known = set(vars(args))
        bad = [k for k in overrides if k.replace("-", "_") not in known]
        if bad:
            print(f"error: unknown config keys {bad}", file=sys.stderr)
            return InvalidConfigError.exit_code
        defaults = {k.replace("-", "_"): v for k, v in overrides.items()}
        parser.set_defaults(**defaults)
        parser.subcommand_parsers[args.command].set_defaults(**defaults)
        args = parser.parse_args(argv)
    if args.print_default_config:
        doc = {k: v for k, v in vars(args).items() if k not in ("func", "print_default_config")}
        print(json.dumps(doc, indent=1, default=str))
        return 0
    try:
        return args.func(args)
    except WavecloakError as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
