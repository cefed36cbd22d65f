"""Command-line surface.

Each command is a thin shell over module operations; values printed or
written by the CLI equal in-process results exactly. Exit codes: 0
success, 1 usage/config error, 2 data validation error, 3 internal
invariant violation.

Config keys can be overridden per invocation with dotted flags, e.g.:

    drgrade simulate --panel.seed 7 --out-predictions p.csv --out-labels l.csv
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .config import RunConfig
from .core import PredictionPanel
from .ensemble import EnsembleStrategy, ensemble_predict
from .errors import ConfigError, DataError
from .fusion import load_model, save_model, train
from .metrics import score_panel
from .panelio import (
    read_labels,
    read_metrics,
    read_pool,
    read_predictions,
    read_splits,
    subset_sample_ids,
    write_history,
    write_labels,
    write_metrics,
    write_predictions,
    write_selection_report,
    write_splits,
)
from .report import compose_report
from .selection import select_top
from .simulator import gen_labels, gen_panel
from .splitting import stratified_split, PRNG_NAME


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _split_overrides(extras) -> list[tuple[str, str]]:
    """Leftover CLI tokens as (section.key, value) pairs."""
    out = []
    i = 0
    while i < len(extras):
        tok = extras[i]
        if not (tok.startswith("--") and "." in tok):
            raise ConfigError(f"unrecognized argument {tok!r}")
        if i + 1 >= len(extras):
            raise ConfigError(f"override {tok!r} is missing a value")
        out.append((tok[2:], extras[i + 1]))
        i += 2
    return out


def _provenance(cfg: RunConfig, *extra) -> list[str]:
    return [f"drgrade v{__version__}", f"config_sha256={cfg.digest()}", *extra]


def _load_panel(path):
    panel, warnings = read_predictions(path)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    return panel


def cmd_split(args, cfg: RunConfig) -> int:
    ids, labels = read_labels(args.labels)
    order = np.argsort(ids)
    ids = [ids[i] for i in order]
    labels = labels[order]
    spec = cfg.split_spec()
    assignments = stratified_split(labels, spec)
    comments = _provenance(
        cfg,
        f"prng={PRNG_NAME} master_seed={spec.master_seed} "
        f"resplit_seeds={','.join(str(s) for s in spec.resplit_seeds)}",
    )
    write_splits(args.out, ids, assignments, comments)
    sizes = [int((assignments[0].tags == t).sum()) for t in (0, 1, 2)]
    print(f"wrote {args.out}: {len(ids)} samples -> train/val/test {sizes[0]}/{sizes[1]}/{sizes[2]}")
    return 0


def _restrict_by_subset(panel, args):
    if args.splits is None:
        return panel
    split_map = read_splits(args.splits)
    if args.resplit not in split_map:
        raise DataError(f"resplit {args.resplit!r} not in {args.splits}")
    wanted = subset_sample_ids(split_map[args.resplit], args.subset)
    keep = [s for s in panel.samples if s in set(wanted)]
    if not keep:
        raise DataError(f"no panel samples in subset {args.subset!r}")
    return panel.restrict(keep)


def cmd_eval(args, cfg: RunConfig) -> int:
    panel = _load_panel(args.predictions)
    panel = _restrict_by_subset(panel, args)
    scores = score_panel(panel)
    comments = _provenance(cfg, f"n_samples={panel.n_samples}")
    write_metrics(args.out, scores, comments)
    for s in scores:
        print(f"{s.model_id}: qwk={s.qwk:.4f} auc={s.auc:.4f}")
    return 0


def cmd_ensemble(args, cfg: RunConfig) -> int:
    panel = _load_panel(args.predictions)
    kind = args.strategy or cfg.strategy_kind()
    net = None
    if kind == "fusion":
        if args.model is None:
            raise ConfigError("strategy 'fusion' requires --model FILE")
        net = load_model(args.model)
    probs, _ = ensemble_predict(panel, EnsembleStrategy(kind=kind, fusion_model=net))
    out_panel = PredictionPanel(
        models=("ensemble",),
        samples=panel.samples,
        probs=probs[None, :, :],
        labels=panel.labels,
    )
    write_predictions(args.out, out_panel, _provenance(cfg, f"strategy={kind}"))
    print(f"wrote {args.out}: strategy={kind} over {panel.n_models} models")
    return 0


def cmd_train_fusion(args, cfg: RunConfig) -> int:
    panel = _load_panel(args.predictions)
    split_map = read_splits(args.splits)
    if args.resplit not in split_map:
        raise DataError(f"resplit {args.resplit!r} not in {args.splits}")
    tags = split_map[args.resplit]
    train_ids = [s for s in panel.samples if tags.get(s) == "train"]
    val_ids = [s for s in panel.samples if tags.get(s) == "val"]
    tcfg = cfg.train_config()
    result = train(panel, train_ids, val_ids, tcfg)
    meta = {
        "seed": tcfg.seed,
        "initial_lr": tcfg.initial_lr,
        "decay": tcfg.decay,
        "epochs": tcfg.epochs,
        "batch_size": tcfg.batch_size,
        "best_epoch": result.best.epoch,
        "val_qwk": result.best.val_qwk,
        "config_sha256": cfg.digest(),
    }
    save_model(args.model_out, result.best.net, meta)
    write_history(args.history_out, result.history, _provenance(cfg))
    print(
        f"best epoch {result.best.epoch}: val qwk={result.best.val_qwk:.4f} "
        f"auc={result.best.val_auc:.4f}"
    )
    return 0


def cmd_simulate(args, cfg: RunConfig) -> int:
    spec = cfg.panel_spec()
    labels = gen_labels(spec)
    panel = gen_panel(labels, spec)
    comments = _provenance(cfg, f"prng={PRNG_NAME} seed={spec.seed}")
    write_predictions(args.out_predictions, panel, comments)
    write_labels(args.out_labels, panel.samples, labels, comments)
    print(
        f"wrote {args.out_predictions} and {args.out_labels}: "
        f"{spec.n_models} models x {spec.n_samples} samples"
    )
    return 0


def cmd_report(args, cfg: RunConfig) -> int:
    models = read_metrics(args.models)
    strategies = read_metrics(args.strategies)
    single = read_metrics(args.single) if args.single else None
    multi = read_metrics(args.multi) if args.multi else None
    if (single is None) != (multi is None):
        raise ConfigError("--single and --multi must be given together")
    text = compose_report(models, strategies, single, multi)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_select(args, cfg: RunConfig) -> int:
    pool = read_pool(args.scores)
    selected = select_top(pool, args.n)
    write_selection_report(args.out, pool, selected, _provenance(cfg))
    print(f"selected {len(selected)} of {len(pool)} candidates -> {args.out}")
    return 0


def build_parser() -> _Parser:
    p = _Parser(prog="drgrade", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--config", help="INI config file", default=None)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("split", help="stratified train/val/test splits")
    sp.add_argument("--labels", required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_split)

    ev = sub.add_parser("eval", help="per-model QWK and ovo macro-AUC")
    ev.add_argument("--predictions", required=True)
    ev.add_argument("--splits", default=None)
    ev.add_argument("--resplit", default="A")
    ev.add_argument("--subset", default="test", choices=("train", "val", "test"))
    ev.add_argument("--out", required=True)
    ev.set_defaults(func=cmd_eval)

    en = sub.add_parser("ensemble", help="combine a panel into one predictor")
    en.add_argument("--predictions", required=True)
    en.add_argument("--strategy", choices=("vote", "avg", "fusion"), default=None)
    en.add_argument("--model", default=None, help="fusion model file")
    en.add_argument("--out", required=True)
    en.set_defaults(func=cmd_ensemble)

    tf = sub.add_parser("train-fusion", help="train the label-fusion net")
    tf.add_argument("--predictions", required=True)
    tf.add_argument("--splits", required=True)
    tf.add_argument("--resplit", default="A")
    tf.add_argument("--model-out", required=True)
    tf.add_argument("--history-out", required=True)
    tf.set_defaults(func=cmd_train_fusion)

    sm = sub.add_parser("simulate", help="synthesize a classifier panel")
    sm.add_argument("--out-predictions", required=True)
    sm.add_argument("--out-labels", required=True)
    sm.set_defaults(func=cmd_simulate)

    rp = sub.add_parser("report", help="text tables from metrics files")
    rp.add_argument("--models", required=True)
    rp.add_argument("--strategies", required=True)
    rp.add_argument("--single", default=None)
    rp.add_argument("--multi", default=None)
    rp.add_argument("--out", default=None)
    rp.set_defaults(func=cmd_report)

    se = sub.add_parser("select", help="top-n candidates across resplits")
    se.add_argument("--scores", required=True)
    se.add_argument("-n", type=int, default=16)
    se.add_argument("--out", required=True)
    se.set_defaults(func=cmd_select)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args, extras = parser.parse_known_args(argv)
        overrides = _split_overrides(extras)
        cfg = RunConfig.load(args.config, overrides)
        return args.func(args, cfg)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (DataError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # internal invariant violation
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
