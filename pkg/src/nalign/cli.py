"""Command line front end: align, bootstrap, eval, calibrate."""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, RunConfig, apply_overrides, load_config
from .pipeline import (
    DEFAULT_NAME_CONFIDENCE,
    Pipeline,
    PipelineError,
    bootstrap_unsupervised,
    evaluate,
    split_name_confidence,
)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="run configuration file (key = value lines)")
    p.add_argument("--kg1-rel", dest="kg1_rel")
    p.add_argument("--kg1-attr", dest="kg1_attr")
    p.add_argument("--kg2-rel", dest="kg2_rel")
    p.add_argument("--kg2-attr", dest="kg2_attr")
    p.add_argument("--truth")
    p.add_argument("--seeds")
    p.add_argument("--seed-ratio", dest="seed_ratio", type=float)
    p.add_argument("--range1")
    p.add_argument("--range2")
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--iota", type=float)
    p.add_argument("--theta", type=float)
    p.add_argument("--c-absent", dest="c_absent", type=float)
    p.add_argument("--c-penalty", dest="c_penalty", type=float)
    p.add_argument("--c-name", dest="c_name", type=float)
    p.add_argument("--k-sim", dest="k_sim", type=int)
    p.add_argument("--k-value", dest="k_value", type=int)
    p.add_argument("--theta-filter", dest="theta_filter", type=float)
    p.add_argument("--end-iteration", dest="end_iteration", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--eval-mode", dest="eval_mode", choices=("test", "all"))
    for flag in ("attr", "name", "translated", "description", "value", "range",
                 "swapping"):
        group = p.add_mutually_exclusive_group()
        group.add_argument(f"--{flag}", dest=f"use_{flag}",
                           action="store_true", default=None)
        group.add_argument(f"--no-{flag}", dest=f"use_{flag}",
                           action="store_false", default=None)
    for name in ("emb_name_1", "emb_name_2", "emb_translated_1", "emb_translated_2",
                 "emb_description_1", "emb_description_2", "emb_value_1", "emb_value_2"):
        p.add_argument("--" + name.replace("_", "-"), dest=name)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--figures", dest="write_figures", action="store_true", default=None)
    group.add_argument("--no-figures", dest="write_figures", action="store_false", default=None)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--evidence", dest="write_evidence", action="store_true", default=None)
    group.add_argument("--no-evidence", dest="write_evidence", action="store_false", default=None)


def _build_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> RunConfig:
    import dataclasses

    cfg = RunConfig()
    if args.config:
        cfg = load_config(args.config, cfg)
    known = {f.name for f in dataclasses.fields(RunConfig)}
    overrides = {
        key: value
        for key, value in vars(args).items()
        if key in known and value is not None
    }
    apply_overrides(cfg, overrides)
    if not args.config and cfg.kg1_rel is None and cfg.kg1_attr is None:
        parser.error("either --config or explicit input paths are required")
    return cfg


def _print_report(rep) -> None:
    print(f"matched pairs : {rep.matched}")
    print(f"hits@1        : {rep.hits_at_1:.4f}")
    print(f"precision     : {rep.precision:.4f}")
    print(f"recall        : {rep.recall:.4f}")
    print(f"f1            : {rep.f1:.4f}")
    if rep.runtime_seconds:
        print(f"runtime       : {rep.runtime_seconds:.1f}s")


def cmd_align(args, parser) -> int:
    cfg = _build_config(args, parser)
    rep = Pipeline(cfg).run()
    _print_report(rep)
    return 0


def cmd_bootstrap(args, parser) -> int:
    cfg = _build_config(args, parser)
    if args.step == 1:
        step = bootstrap_step_one(cfg)
        _print_report(step)
        return 0
    rep = bootstrap_unsupervised(cfg)
    _print_report(rep)
    return 0


def bootstrap_step_one(cfg: RunConfig):
    from dataclasses import replace
    import os

    from .pipeline import emit_bootstrap_pairs

    step_cfg = replace(
        cfg, use_name=False, use_translated=False, use_description=False,
        use_value=False, out_dir=os.path.join(cfg.out_dir, "step1"),
    )
    pipeline = Pipeline(step_cfg)
    rep = pipeline.run()
    path = emit_bootstrap_pairs(
        pipeline, cfg.theta_filter, os.path.join(cfg.out_dir, "bootstrap_pairs_step1.tsv")
    )
    print(f"finetune pairs: {path}")
    return rep


def cmd_calibrate(args, parser) -> int:
    cfg = _build_config(args, parser)
    pipeline = Pipeline(cfg)
    pipeline.prepare()
    channels = cfg.enabled_name_channels()
    if not channels:
        print("no name channels enabled; nothing to calibrate", file=sys.stderr)
        return 1
    total = cfg.c_name if cfg.c_name is not None else pipeline.calibrate_name_confidence()
    conf = split_name_confidence(total, channels, cfg.c_penalty, cfg.name_finetuned)
    print(f"c_name (total evidence): {total:.6f}")
    for ch, c in conf.confidence.items():
        print(f"  {ch}: {c:.6f}")
    return 0


def cmd_eval(args, parser) -> int:
    def read_pairs(path):
        pairs = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                parts = line.rstrip("\n").split("\t")
                if len(parts) >= 2:
                    pairs.append((parts[0], parts[1]))
        return pairs

    pred = read_pairs(args.pred)
    truth = read_pairs(args.truth)
    seeds = read_pairs(args.seeds) if args.seeds else []
    rep = evaluate(pred, truth, args.mode, seeds)
    _print_report(rep)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="nalign",
        description="Entity alignment by truth-value inference over cross-graph paths",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_align = sub.add_parser("align", help="run a supervised or unsupervised alignment")
    _add_config_flags(p_align)
    p_align.set_defaults(func=cmd_align)

    p_boot = sub.add_parser("bootstrap", help="seedless bootstrap loop")
    _add_config_flags(p_boot)
    p_boot.add_argument("--step", type=int, choices=(1, 2), default=None,
                        help="run only this bootstrap step")
    p_boot.set_defaults(func=cmd_bootstrap)

    p_cal = sub.add_parser("calibrate", help="probe-run name-evidence calibration")
    _add_config_flags(p_cal)
    p_cal.set_defaults(func=cmd_calibrate)

    p_eval = sub.add_parser("eval", help="score an alignment file against ground truth")
    p_eval.add_argument("--pred", required=True)
    p_eval.add_argument("--truth", required=True)
    p_eval.add_argument("--seeds")
    p_eval.add_argument("--mode", choices=("test", "all"), default="all")
    p_eval.set_defaults(func=cmd_eval)

    args = parser.parse_args(argv)
    sub_parser = parser
    try:
        return args.func(args, sub_parser)
    except (ConfigError, PipelineError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
