"""Command-line workflow: gen, train, eval, ablate, analyze, export.

Configuration is a JSON file with flat "fusion", "train", and "synthetic"
sections mirroring FusionConfig, TrainConfig, and SyntheticSpec.  Any value
can be overridden on the command line with --<section>.<key>=<value>; flag
overrides win over file values, and the merged effective config is echoed
to the output directory as config.json.

Exit codes: 0 success, 2 missing/unreadable input file, 3 configuration or
usage error, 4 numeric abort (non-finite loss).
"""

import argparse
import json
import os
import re
import sys
from pathlib import Path

from .checkpoint import load_checkpoint
from .errors import (
    CheckpointError,
    ConfigError,
    CorpusFormatError,
    FndFusionError,
    NumericError,
)
from .metrics import (
    evaluate,
    export_features,
    format_comparison_table,
    format_metrics_table,
    sample_report,
    similarity_bins,
)
from .model import VARIANTS, FusionConfig, FusionModel
from .corpus import read_corpus, read_corpus_jsonl, write_corpus, write_corpus_jsonl
from .synthetic import SyntheticSpec, generate_synthetic, split
from .training import TrainConfig, resume, train

ENV_OUT_ROOT = "FNDFUSION_OUT_ROOT"
_SECTIONS = {"fusion": FusionConfig, "train": TrainConfig, "synthetic": SyntheticSpec}
_OVERRIDE_RE = re.compile(r"^--(fusion|train|synthetic)\.([A-Za-z_][A-Za-z0-9_]*)=(.*)$")


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; the contract wants 3
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _coerce(section, key, raw):
    cls = _SECTIONS[section]
    fields = cls.__dataclass_fields__
    if key not in fields:
        raise ConfigError(f"unknown key {section}.{key}")
    target = fields[key].type
    if target in ("bool", bool):
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise ConfigError(f"{section}.{key}: expected a boolean, got {raw!r}")
    if target in ("int", int):
        return int(raw)
    if target in ("float", float):
        return float(raw)
    return raw


def _load_config_file(path):
    if path is None:
        return {}
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    with open(p, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {path}: invalid JSON: {e}") from e
    unknown = set(data) - set(_SECTIONS) - {"inputs"}
    if unknown:
        raise ConfigError(f"config file {path}: unknown sections {sorted(unknown)}")
    return data


def _merge_config(file_cfg, overrides):
    merged = {name: dict(file_cfg.get(name, {})) for name in _SECTIONS}
    for section, key, raw in overrides:
        merged[section][key] = _coerce(section, key, raw)
    return merged


def _parse_overrides(leftover, parser):
    overrides = []
    for token in leftover:
        m = _OVERRIDE_RE.match(token)
        if not m:
            parser.error(f"unrecognized argument: {token}")
        overrides.append((m.group(1), m.group(2), m.group(3)))
    return overrides


def _effective(merged):
    return {
        "fusion": FusionConfig.from_dict(merged["fusion"]),
        "train": TrainConfig.from_dict(merged["train"]),
        "synthetic": _synthetic_from_dict(merged["synthetic"]),
    }


def _synthetic_from_dict(d):
    known = set(SyntheticSpec.__dataclass_fields__)
    extra = set(d) - known
    if extra:
        raise ConfigError(f"unknown synthetic config keys: {sorted(extra)}")
    spec = SyntheticSpec(**d)
    spec.validate()
    return spec


def _out_dir(args):
    if args.out_dir:
        d = Path(args.out_dir)
    else:
        root = Path(os.environ.get(ENV_OUT_ROOT, "runs"))
        d = root / args.command
    d.mkdir(parents=True, exist_ok=True)
    return d


def _echo_config(out_dir, effective, inputs):
    payload = {
        "fusion": effective["fusion"].to_dict(),
        "train": effective["train"].to_dict(),
        "synthetic": effective["synthetic"].__dict__,
        "inputs": inputs,
    }
    with open(out_dir / "config.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _read_any_corpus(path):
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"corpus not found: {path}")
    if p.suffix == ".jsonl":
        return read_corpus_jsonl(p)
    return read_corpus(p)


def _write_any_corpus(records, path):
    if Path(path).suffix == ".jsonl":
        write_corpus_jsonl(records, path)
    else:
        write_corpus(records, path)


def _load_ckpt(path):
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"checkpoint not found: {path}")
    return load_checkpoint(p)


# ---------------------------------------------------------------------------

def cmd_gen(args, effective, out_dir, inputs):
    records = generate_synthetic(effective["synthetic"])
    out = Path(args.out) if args.out else out_dir / "corpus.fnde"
    out.parent.mkdir(parents=True, exist_ok=True)
    _write_any_corpus(records, out)
    n_fake = sum(r.label for r in records)
    print(f"wrote {len(records)} records ({len(records) - n_fake} real / {n_fake} fake) "
          f"to {out}")
    return 0


def _train_one(fusion_cfg, train_cfg, train_records, test_records, out_dir, resume_from=None):
    ckpt_path = out_dir / "checkpoint.bin"
    if resume_from is not None:
        model, run = resume(resume_from, train_records, test_records, train_cfg,
                            expected_config=fusion_cfg, out_checkpoint_path=ckpt_path)
    else:
        model = FusionModel(fusion_cfg)
        _, run = train(model, train_records, test_records, train_cfg,
                       checkpoint_path=ckpt_path)
    run.save(out_dir / "runlog.json")
    return model, run


def cmd_train(args, effective, out_dir, inputs):
    _, train_records = _read_any_corpus(args.corpus)
    test_records = None
    if args.test_corpus:
        _, test_records = _read_any_corpus(args.test_corpus)
    model, run = _train_one(effective["fusion"], effective["train"], train_records,
                            test_records, out_dir,
                            resume_from=Path(args.resume_from) if args.resume_from else None)
    tcfg = effective["train"]
    if test_records:
        report_records, corpus_id = test_records, args.test_corpus
    elif tcfg.eval_split == "held_out_validation":
        # report on the same held-out carve the trainer selected against
        _, report_records = split(train_records, 1.0 - tcfg.val_fraction, tcfg.seed)
        corpus_id = f"{args.corpus}#validation"
    else:
        report_records, corpus_id = train_records, args.corpus
    report = evaluate(model, report_records, corpus_id=corpus_id)
    with open(out_dir / "metrics.json", "w", encoding="utf-8") as fh:
        fh.write(report.to_json() + "\n")
    with open(out_dir / "table.txt", "w", encoding="utf-8") as fh:
        fh.write(format_metrics_table(report, label=model.config.variant))
    print(f"selected epoch {run.selected_epoch}; accuracy {report.accuracy:.4f}; "
          f"artifacts in {out_dir}")
    return 0


def cmd_eval(args, effective, out_dir, inputs):
    model, _ = _load_ckpt(args.checkpoint)
    _, records = _read_any_corpus(args.corpus)
    report = evaluate(model, records, corpus_id=args.corpus)
    with open(out_dir / "metrics.json", "w", encoding="utf-8") as fh:
        fh.write(report.to_json() + "\n")
    table = format_metrics_table(report, label=model.config.variant)
    with open(out_dir / "table.txt", "w", encoding="utf-8") as fh:
        fh.write(table)
    print(table, end="")
    return 0


def cmd_ablate(args, effective, out_dir, inputs):
    _, records = _read_any_corpus(args.corpus)
    if args.test_corpus:
        _, test_records = _read_any_corpus(args.test_corpus)
        train_records = records
    else:
        train_records, test_records = split(records, args.train_fraction,
                                            effective["train"].seed)
    reports = {}
    for variant in VARIANTS:
        fusion_cfg = FusionConfig.from_dict({**effective["fusion"].to_dict(),
                                             "variant": variant})
        vdir = out_dir / variant
        vdir.mkdir(parents=True, exist_ok=True)
        model, _ = _train_one(fusion_cfg, effective["train"], train_records,
                              test_records, vdir)
        reports[variant] = evaluate(model, test_records, corpus_id=args.corpus)
        print(f"variant={variant} accuracy={reports[variant].accuracy:.4f}",
              file=sys.stderr)
    table = format_comparison_table(reports)
    with open(out_dir / "table.txt", "w", encoding="utf-8") as fh:
        fh.write(table)
    with open(out_dir / "ablation.json", "w", encoding="utf-8") as fh:
        json.dump({v: r.to_dict() for v, r in reports.items()}, fh, indent=2)
        fh.write("\n")
    print(table, end="")
    return 0


def cmd_analyze(args, effective, out_dir, inputs):
    _, records = _read_any_corpus(args.corpus)
    model = None
    if args.checkpoint:
        model, _ = _load_ckpt(args.checkpoint)
    report = similarity_bins(records, model=model, bin_count=args.bins)
    with open(out_dir / "bins.json", "w", encoding="utf-8") as fh:
        fh.write(report.to_json() + "\n")
    report.save_csv(out_dir / "bins.csv")
    if args.ids:
        if model is None:
            raise ConfigError("--ids requires --checkpoint")
        reports = sample_report(model, records, args.ids.split(","))
        with open(out_dir / "samples.json", "w", encoding="utf-8") as fh:
            json.dump([r.to_dict() for r in reports], fh, indent=2)
            fh.write("\n")
    print(f"similarity bins ({report.score_kind}) written to {out_dir}")
    return 0


def cmd_export(args, effective, out_dir, inputs):
    model, _ = _load_ckpt(args.checkpoint)
    _, records = _read_any_corpus(args.corpus)
    out = Path(args.out) if args.out else out_dir / "features.csv"
    export_features(model, records, args.stage, out)
    print(f"wrote {len(records)} feature rows to {out}")
    return 0


# ---------------------------------------------------------------------------

def build_parser():
    parser = _Parser(prog="fndfusion",
                     description="similarity-gated multimodal fusion workflows")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", "--spec", dest="config",
                       help="JSON config with fusion/train/synthetic sections")
        p.add_argument("--out-dir", help=f"output directory (default: ${ENV_OUT_ROOT} "
                                         "or ./runs, plus the subcommand name)")

    p = sub.add_parser("gen", parents=[], help="generate a synthetic corpus")
    common(p)
    p.add_argument("--out", help="corpus path (.fnde binary or .jsonl)")

    p = sub.add_parser("train", help="train one model")
    common(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--test-corpus")
    p.add_argument("--resume-from", help="continue from a checkpoint")

    p = sub.add_parser("eval", help="evaluate a checkpoint on a corpus")
    common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--corpus", required=True)

    p = sub.add_parser("ablate", help="train and compare all variants")
    common(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--test-corpus")
    p.add_argument("--train-fraction", type=float, default=0.8,
                   help="split used when no --test-corpus is given")

    p = sub.add_parser("analyze", help="similarity-bin statistics and sample traces")
    common(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--checkpoint")
    p.add_argument("--bins", type=int, default=10)
    p.add_argument("--ids", help="comma-separated record ids for per-sample reports")

    p = sub.add_parser("export", help="export pre-classifier features as CSV")
    common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--stage", choices=("aggregated", "projected"), default="aggregated")
    p.add_argument("--out")
    return parser


_COMMANDS = {
    "gen": cmd_gen,
    "train": cmd_train,
    "eval": cmd_eval,
    "ablate": cmd_ablate,
    "analyze": cmd_analyze,
    "export": cmd_export,
}


def main(argv=None):
    parser = build_parser()
    try:
        args, leftover = parser.parse_known_args(argv)
        overrides = _parse_overrides(leftover, parser)
        merged = _merge_config(_load_config_file(args.config), overrides)
        effective = _effective(merged)
        out_dir = _out_dir(args)
        inputs = {"command": args.command}
        for key in ("corpus", "test_corpus", "checkpoint", "out"):
            if getattr(args, key, None):
                inputs[key] = str(getattr(args, key))
        _echo_config(out_dir, effective, inputs)
        return _COMMANDS[args.command](args, effective, out_dir, inputs)
    except FileNotFoundError as e:
        print(f"error: missing file: {e}", file=sys.stderr)
        return 2
    except (CorpusFormatError, CheckpointError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    except NumericError as e:
        print(f"error: NumericError: {e}", file=sys.stderr)
        return 4
    except (ConfigError, FndFusionError, KeyError, ValueError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
