"""Command-line surface.

Subcommands: split, mine-templates, train-ci, train-sc, predict,
evaluate, stats. Every command reads defaults from an optional INI
config (--config), with explicit flags winning. All randomness flows
from one seeded generator per command; the seed and the resolved
configuration are recorded in checkpoint metadata, and identical
config + seed reproduce every output file byte for byte.

Exit codes: 0 success, 1 user error (bad arguments, missing or invalid
files), 2 internal error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import traceback
from typing import Optional

import numpy as np

from .chem import ChemError
from .config import ConfigError, RunConfig, parse_ratios
from .models import (CenterModel, OracleCenterModel, OracleSynthonModel,
                     SynthonClassifier)
from .pipeline import (DEFAULT_KS, evaluate, evaluate_submodules,
                       predict_reactants, write_metrics_csv,
                       write_predictions_csv)
from .rxn import ReactionError, TemplateLibrary, build_template_library, read_dataset
from .tensor import load_checkpoint, save_checkpoint
from .train import (prepare_center_examples, prepare_synthon_groups,
                    train_center_model, train_synthon_model, write_history_csv)

CHECKPOINT_FORMAT = 1


class UserError(Exception):
    """Bad input from the operator: message only, no traceback."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UserError(f"{self.prog}: {message}")


# ---------------------------------------------------------------------------
# shared plumbing

def _require_file(path: str, what: str) -> str:
    if not os.path.isfile(path):
        raise UserError(f"{what} not found: {path}")
    return path


def _load_dataset(path: str):
    _require_file(path, "dataset")
    try:
        data = read_dataset(path)
    except ReactionError as exc:
        raise UserError(f"cannot read dataset {path}: {exc}")
    if not data:
        raise UserError(f"dataset {path} has no parseable reactions")
    return data


def _load_library(path: str) -> TemplateLibrary:
    _require_file(path, "template library")
    try:
        return TemplateLibrary.load(path)
    except (ValueError, KeyError) as exc:
        raise UserError(f"cannot read template library {path}: {exc}")


def _resolve_config(args) -> RunConfig:
    """Config file (if any) with explicit flags layered on top."""
    try:
        cfg = RunConfig.load(getattr(args, "config", None))
        for name in vars(cfg):
            if hasattr(args, name) and getattr(args, name) is not None:
                setattr(cfg, name, getattr(args, name))
        return cfg.validate()
    except ConfigError as exc:
        raise UserError(str(exc))


def _save_model(path: str, model, kind: str, cfg: RunConfig, extra: dict) -> None:
    meta = {"format": CHECKPOINT_FORMAT, "kind": kind,
            "config": cfg.to_dict(), "seed": cfg.seed}
    meta.update(extra)
    save_checkpoint(path, dict(model.state_dict()), meta)


def _load_model_meta(path: str, kind: str):
    _require_file(path, f"{kind} checkpoint")
    try:
        arrays, meta = load_checkpoint(path)
    except ValueError as exc:
        raise UserError(f"cannot read checkpoint {path}: {exc}")
    if meta.get("format") != CHECKPOINT_FORMAT:
        raise UserError(f"checkpoint {path} has format {meta.get('format')}, "
                        f"expected {CHECKPOINT_FORMAT}")
    if meta.get("kind") != kind:
        raise UserError(f"checkpoint {path} holds a {meta.get('kind')!r} model, "
                        f"expected {kind!r}")
    return arrays, meta


def load_center_model(path: str) -> tuple[CenterModel, dict]:
    arrays, meta = _load_model_meta(path, "center")
    c = meta["config"]
    model = CenterModel(np.random.default_rng(0), width=c["width"],
                        n_layers=c["n_layers"], heads=c["heads"],
                        dropout=c.get("dropout", 0.0))
    try:
        model.load_state_dict(arrays)
    except (KeyError, ValueError) as exc:
        raise UserError(f"checkpoint {path} does not match the model: {exc}")
    model.eval()
    return model, meta


def load_synthon_model(path: str) -> tuple[SynthonClassifier, dict]:
    arrays, meta = _load_model_meta(path, "synthon")
    c = meta["config"]
    model = SynthonClassifier(
        np.random.default_rng(0), n_classes=meta["n_classes"],
        width=c["width"], n_layers=c["n_layers"], heads=c["heads"],
        class_emb_dim=c["class_emb_dim"], pair_width=c["pair_width"],
        pair_layers=c["pair_layers"], pair_heads=c["pair_heads"],
        dropout=c.get("dropout", 0.0))
    try:
        model.load_state_dict(arrays)
    except (KeyError, ValueError) as exc:
        raise UserError(f"checkpoint {path} does not match the model: {exc}")
    model.eval()
    return model, meta


def _model_bundle(args, data):
    """(ci_model, sc_model, library) from checkpoints or oracle stubs."""
    library = _load_library(args.library)
    if getattr(args, "oracle", False):
        return OracleCenterModel(data), OracleSynthonModel(data, library), library
    if not args.ci or not args.sc:
        raise UserError("--ci and --sc checkpoints are required (or use --oracle)")
    ci_model, _ = load_center_model(args.ci)
    sc_model, _ = load_synthon_model(args.sc)
    return ci_model, sc_model, library


# ---------------------------------------------------------------------------
# commands

def cmd_split(args) -> int:
    cfg = _resolve_config(args)
    _require_file(cfg.dataset, "dataset")
    with open(cfg.dataset, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        rows = list(reader)
    if header is None or "rxn" not in header:
        raise UserError(f"dataset {cfg.dataset} needs a header with an 'rxn' column")
    fractions = parse_ratios(cfg.ratios)
    rng = np.random.default_rng(cfg.seed)
    order = rng.permutation(len(rows))
    n_train = int(len(rows) * fractions[0])
    n_valid = int(len(rows) * fractions[1])
    parts = {
        "train": order[:n_train],
        "valid": order[n_train:n_train + n_valid],
        "test": order[n_train + n_valid:],
    }
    os.makedirs(args.out_dir, exist_ok=True)
    for name, idx in parts.items():
        path = os.path.join(args.out_dir, f"{name}.csv")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for i in idx:
                writer.writerow(rows[i])
        print(f"{name}: {len(idx)} rows -> {path}")
    return 0


def cmd_mine_templates(args) -> int:
    cfg = _resolve_config(args)
    data = _load_dataset(cfg.dataset)
    library, records = build_template_library(data, k=cfg.k)
    library.save(args.out)
    n_failed = sum(1 for r in records if r.keys is None)
    if args.coverage:
        with open(args.coverage, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "semi_coverage", "full_coverage"])
            for kk, semi, full in library.coverage_curve():
                writer.writerow([kk, "%.12g" % semi, "%.12g" % full])
    if args.failures:
        with open(args.failures, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["id", "cause"])
            for rec in records:
                if rec.keys is None:
                    writer.writerow([rec.rxn_id, rec.cause])
    print(f"reactions: {len(data)}  distinct semi-templates: "
          f"{len(library.all_frequencies)}  classes kept: {len(library.templates)}")
    print(f"coverage at K={cfg.k}: %.4f  extraction failures: {n_failed}"
          % library.coverage_at(cfg.k))
    print(f"library -> {args.out}")
    return 0


def cmd_train_ci(args) -> int:
    cfg = _resolve_config(args)
    data = _load_dataset(cfg.dataset)
    products, labels = prepare_center_examples(data)
    if not products:
        raise UserError("no trainable reactions in the dataset")
    rng = np.random.default_rng(cfg.seed)
    model = CenterModel(rng, width=cfg.width, n_layers=cfg.n_layers,
                        heads=cfg.heads, dropout=cfg.dropout)
    history = train_center_model(
        model, products, labels, epochs=cfg.ci_epochs,
        batch_size=cfg.batch_size, lr=cfg.ci_lr, rng=rng,
        one_cycle=cfg.one_cycle)
    _save_model(args.out, model, "center", cfg,
                {"epochs": len(history), "final_loss": history[-1]["loss"]})
    if args.loss_csv:
        write_history_csv(args.loss_csv, history)
    print(f"trained {len(history)} epochs on {len(products)} reactions, "
          "final loss %.6g" % history[-1]["loss"])
    print(f"checkpoint -> {args.out}")
    return 0


def cmd_train_sc(args) -> int:
    cfg = _resolve_config(args)
    data = _load_dataset(cfg.dataset)
    library = _load_library(args.library)
    groups = prepare_synthon_groups(data, library)
    if not groups:
        raise UserError("no reactions with extractable templates in the dataset")
    rng = np.random.default_rng(cfg.seed)
    model = SynthonClassifier(
        rng, n_classes=library.n_classes, width=cfg.width,
        n_layers=cfg.n_layers, heads=cfg.heads,
        class_emb_dim=cfg.class_emb_dim, pair_width=cfg.pair_width,
        pair_layers=cfg.pair_layers, pair_heads=cfg.pair_heads,
        dropout=cfg.dropout)
    history = train_synthon_model(
        model, groups, epochs=cfg.sc_epochs, batch_size=cfg.batch_size,
        lr=cfg.sc_lr, rng=rng, correcting=cfg.use_correcting,
        one_cycle=cfg.one_cycle)
    _save_model(args.out, model, "synthon", cfg,
                {"epochs": len(history), "final_loss": history[-1]["loss"],
                 "n_classes": library.n_classes,
                 "correcting": cfg.use_correcting})
    if args.loss_csv:
        write_history_csv(args.loss_csv, history)
    print(f"trained {len(history)} epochs on {len(groups)} synthon groups, "
          "final loss %.6g" % history[-1]["loss"])
    print(f"checkpoint -> {args.out}")
    return 0


def cmd_predict(args) -> int:
    cfg = _resolve_config(args)
    data = _load_dataset(cfg.dataset)
    ci_model, sc_model, library = _model_bundle(args, data)
    predictions = []
    for rxn in data:
        predictions.append(predict_reactants(
            rxn.product, ci_model, sc_model, library, k_ci=cfg.k_ci,
            k_sc=cfg.k_sc, k_total=cfg.k_total, use_filter=cfg.use_filter,
            use_correcting=cfg.use_correcting, context=rxn.rxn_id,
            product_id=rxn.rxn_id))
    write_predictions_csv(args.out, predictions)
    n_empty = sum(1 for p in predictions if not p.candidates)
    print(f"predicted {len(predictions)} products "
          f"({n_empty} with no feasible candidate) -> {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    cfg = _resolve_config(args)
    data = _load_dataset(cfg.dataset)
    ci_model, sc_model, library = _model_bundle(args, data)
    repeats = max(1, args.repeat)
    ks = DEFAULT_KS
    sums = {"e2e": {k: 0.0 for k in ks}, "ci": {k: 0.0 for k in ks},
            "sc": {k: 0.0 for k in ks}}
    collected = None
    for run in range(repeats):
        collect = [] if (run == 0 and args.predictions) else None
        e2e = evaluate(data, ci_model, sc_model, library, ks=ks,
                       k_ci=cfg.k_ci, k_sc=cfg.k_sc, k_total=cfg.k_total,
                       use_filter=cfg.use_filter,
                       use_correcting=cfg.use_correcting, collect=collect)
        ci_acc, sc_acc = evaluate_submodules(
            data, ci_model, sc_model, library, ks=ks,
            use_correcting=cfg.use_correcting)
        for k in ks:
            sums["e2e"][k] += e2e[k]
            sums["ci"][k] += ci_acc[k]
            sums["sc"][k] += sc_acc[k]
        if collect is not None:
            collected = collect
    e2e = {k: sums["e2e"][k] / repeats for k in ks}
    ci_acc = {k: sums["ci"][k] / repeats for k in ks}
    sc_acc = {k: sums["sc"][k] / repeats for k in ks}
    write_metrics_csv(args.out, ks, ci_acc, sc_acc, e2e)
    if collected is not None:
        write_predictions_csv(args.predictions, collected)
    print("k    center   template  end-to-end")
    for k in ks:
        print("%-4d %-8.4f %-9.4f %.4f" % (k, ci_acc[k], sc_acc[k], e2e[k]))
    print(f"metrics -> {args.out}")
    return 0


def cmd_stats(args) -> int:
    library = _load_library(args.library)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "semi_coverage", "full_coverage"])
        for kk, semi, full in library.coverage_curve():
            writer.writerow([kk, "%.12g" % semi, "%.12g" % full])
    n_semi = len(library.all_frequencies)
    n_full = len(library.full_frequencies)
    print(f"distinct semi-templates: {n_semi}")
    print(f"distinct full templates: {n_full}")
    if n_semi:
        print("redundancy (full/semi): %.3g" % (n_full / n_semi))
    for mark in (50, library.k):
        print(f"semi coverage at top-{mark}: %.4f" % library.coverage_at(mark))
    print(f"synthons: {library.total_synthons}  "
          f"extraction failures: {library.failed_synthons}")
    print(f"coverage table -> {args.out}")
    return 0


# ---------------------------------------------------------------------------
# parser

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI config file; flags override it")
    p.add_argument("--dataset", help="reaction CSV (id, class, rxn)")
    p.add_argument("--seed", type=int, help="run seed")


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--width", type=int, help="encoder width")
    p.add_argument("--n-layers", dest="n_layers", type=int,
                   help="encoder depth")
    p.add_argument("--heads", type=int, help="attention heads")
    p.add_argument("--dropout", type=float, help="dropout probability")
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--no-one-cycle", dest="one_cycle", action="store_false",
                   default=None, help="constant learning rate")


def _add_inference_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--library", required=True, help="template library JSON")
    p.add_argument("--ci", help="center model checkpoint")
    p.add_argument("--sc", help="synthon model checkpoint")
    p.add_argument("--oracle", action="store_true",
                   help="use ground-truth stubs instead of checkpoints")
    p.add_argument("--k-ci", dest="k_ci", type=int, help="centers to expand")
    p.add_argument("--k-sc", dest="k_sc", type=int,
                   help="template assignments per center")
    p.add_argument("--k-total", dest="k_total", type=int, help="answers kept")
    p.add_argument("--no-filter", dest="use_filter", action="store_false",
                   default=None, help="disable the pair prior filter")
    p.add_argument("--no-correcting", dest="use_correcting",
                   action="store_false", default=None,
                   help="disable the self-correcting refinement")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="retrokit",
                     description="Single-step retrosynthesis toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("split", help="shuffle a dataset into train/valid/test")
    _add_common(p)
    p.add_argument("--ratios", help="train:valid:test weights, e.g. 8:1:1")
    p.add_argument("--out-dir", required=True, help="directory for the splits")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("mine-templates",
                       help="extract semi-templates and build the class library")
    _add_common(p)
    p.add_argument("--k", type=int, help="number of template classes kept")
    p.add_argument("--out", required=True, help="library JSON path")
    p.add_argument("--coverage", help="coverage curve CSV path")
    p.add_argument("--failures", help="extraction failure log CSV path")
    p.set_defaults(func=cmd_mine_templates)

    p = sub.add_parser("train-ci", help="train the reaction center model")
    _add_common(p)
    _add_model_flags(p)
    p.add_argument("--epochs", dest="ci_epochs", type=int)
    p.add_argument("--lr", dest="ci_lr", type=float)
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--loss-csv", help="per-epoch loss CSV path")
    p.set_defaults(func=cmd_train_ci)

    p = sub.add_parser("train-sc", help="train the template classifier")
    _add_common(p)
    _add_model_flags(p)
    p.add_argument("--library", required=True, help="template library JSON")
    p.add_argument("--epochs", dest="sc_epochs", type=int)
    p.add_argument("--lr", dest="sc_lr", type=float)
    p.add_argument("--class-emb", dest="class_emb_dim", type=int)
    p.add_argument("--pair-width", dest="pair_width", type=int)
    p.add_argument("--pair-layers", dest="pair_layers", type=int)
    p.add_argument("--pair-heads", dest="pair_heads", type=int)
    p.add_argument("--no-correcting", dest="use_correcting",
                   action="store_false", default=None,
                   help="train without the refinement loss")
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--loss-csv", help="per-epoch loss CSV path")
    p.set_defaults(func=cmd_train_sc)

    p = sub.add_parser("predict", help="rank reactant sets for each product")
    _add_common(p)
    _add_inference_flags(p)
    p.add_argument("--out", required=True, help="predictions CSV path")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="top-k accuracy tables for a split")
    _add_common(p)
    _add_inference_flags(p)
    p.add_argument("--out", required=True, help="metrics CSV path")
    p.add_argument("--predictions", help="also write ranked predictions CSV")
    p.add_argument("--repeat", type=int, default=1,
                   help="average the metrics over N identical runs")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("stats", help="coverage and redundancy report")
    p.add_argument("--library", required=True, help="template library JSON")
    p.add_argument("--out", required=True, help="coverage CSV path")
    p.set_defaults(func=cmd_stats)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UserError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ChemError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception:
        traceback.print_exc()
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
