"""Command-line interface: ``rulevote {prep,train,vote,bench}``.

Defaults for any subcommand can come from an INI file passed with
``--config``: section ``[train]`` (etc.) keys are flag names with dashes
replaced by underscores. ``RULEVOTE_DATA`` names the directory searched for
benchmark CSV files.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import sys
from fractions import Fraction
from pathlib import Path

from .data import load_csv
from .decider import GbtDecider, OracleDecider, TreeDecider
from .experiment import SUITES, ExperimentConfig, repeat_experiment
from .foil import FoilLearner
from .metrics import LEVELS, evaluate, format_table, pct
from .preprocess import fit_recipe, load_recipe
from .ripper import RipperLearner
from .ruleio import load_rules, save_rules
from .tree import TreeLearner
from .voting import VotingConfig, run_ensemble, write_results

log = logging.getLogger("rulevote")


def _fraction(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def cmd_prep(args):
    data = load_csv(args.data, args.label_col)
    fitted = fit_recipe(load_recipe(args.recipe), data)
    out = fitted.transform(data)
    out.to_csv(args.out)
    print(f"wrote {args.out}: {len(out)} instances, {len(out.schema)} attributes")


def cmd_train(args):
    data = load_csv(args.data, args.label_col)
    if args.learner == "foil":
        model = FoilLearner(jobs=args.jobs).fit(data)
    elif args.learner == "ripper":
        model = RipperLearner(k=args.k, seed=args.seed, jobs=args.jobs).fit(data)
    elif args.learner == "tree":
        model = TreeLearner(args.max_depth, args.min_leaf, args.seed).fit(data)
    else:
        gbt = GbtDecider(args.rounds, args.depth, args.lr, seed=args.seed).train(data)
        gbt.save(args.out)
        print(f"wrote {args.out}: {gbt.rounds} rounds x {len(gbt.labels)} labels")
        return
    save_rules(model, args.out)
    print(f"wrote {args.out}: {model.n_rules()} rules")


def _decider(choice, train_path, label_col):
    kind, _, arg = choice.partition(":")
    if kind == "oracle":
        return OracleDecider()
    if kind == "gbt" and arg:
        return GbtDecider.load(arg)
    if kind in ("gbt", "tree"):
        if not train_path:
            raise SystemExit(f"--decider {kind} without a model file needs --train")
        train = load_csv(train_path, label_col)
        return (GbtDecider() if kind == "gbt" else TreeDecider()).train(train)
    raise SystemExit(f"unknown decider {choice!r}; use gbt:PATH, gbt, tree or oracle")


def cmd_vote(args):
    test = load_csv(args.test, args.label_col)
    models = [load_rules(p) for p in args.models.split(",")]
    decider = _decider(args.decider, args.train, args.label_col)
    if isinstance(decider, OracleDecider):
        decider.train(test)
    multiclass = {"auto": None, "yes": True, "no": False}[args.multiclass]
    cfg = VotingConfig(args.threshold, args.tolerance, multiclass)
    results = run_ensemble(models, decider, test, cfg)
    write_results(args.out, results, test)
    truth = test.label_values()
    if all(t is not None for t in truth):
        rep = evaluate(results, truth, models[0].labels)
        print(format_table("Voting", ["accuracy", "macro precision", "macro recall"] + list(LEVELS),
                           [[pct(rep.accuracy), pct(rep.macro_precision), pct(rep.macro_recall)]
                            + [pct(rep.explainability_distribution[lv]) for lv in LEVELS]]))
    print(f"wrote {args.out}: {len(results)} results")


def cmd_bench(args):
    overrides = {"jobs": 1, "ripper_k": args.k, "ambiguity": args.ambiguity}
    if args.threshold is not None or args.tolerance is not None:
        overrides["voting"] = VotingConfig(args.threshold or Fraction(7, 10),
                                           args.tolerance if args.tolerance is not None
                                           else Fraction(1, 10))
    cfg = ExperimentConfig.for_suite(args.suite, args.data, **overrides)
    if not Path(cfg.data_path).exists():
        raise SystemExit(f"data file {cfg.data_path} not found (set RULEVOTE_DATA or --data)")
    reps = args.reps if args.reps is not None else SUITES[args.suite].repetitions
    report = repeat_experiment(cfg, reps, args.seed, args.jobs)
    text = report.tables()
    print(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{args.suite}_report.txt").write_text(text, encoding="utf-8")
        (out / f"{args.suite}_runs.csv").write_text(report.csv(), encoding="utf-8")


def build_parser():
    p = argparse.ArgumentParser(prog="rulevote", description="Rule learning with explainable voting")
    p.add_argument("--config", help="INI file with per-command defaults")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("prep", help="apply a preprocessing recipe to a CSV file")
    s.add_argument("--data", required=True)
    s.add_argument("--label-col", required=True)
    s.add_argument("--recipe", required=True, help="recipe file or shipped recipe name")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_prep)

    s = sub.add_parser("train", help="train a rule learner or a boosted-tree decider")
    s.add_argument("--data", required=True)
    s.add_argument("--label-col", required=True)
    s.add_argument("--learner", choices=("foil", "ripper", "tree", "gbt"), required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.add_argument("--k", type=int, default=2, help="RIPPER optimization passes")
    s.add_argument("--max-depth", type=int, default=None)
    s.add_argument("--min-leaf", type=int, default=1)
    s.add_argument("--rounds", type=int, default=100)
    s.add_argument("--depth", type=int, default=3)
    s.add_argument("--lr", type=float, default=0.1)
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("vote", help="run the voting ensemble on a test CSV")
    s.add_argument("--models", required=True, help="comma-separated rule files")
    s.add_argument("--decider", required=True, help="gbt:PATH, gbt, tree or oracle")
    s.add_argument("--train", help="training CSV for deciders trained on the fly")
    s.add_argument("--test", required=True)
    s.add_argument("--label-col", required=True)
    s.add_argument("--threshold", type=_fraction, default=Fraction(7, 10))
    s.add_argument("--tolerance", type=_fraction, default=Fraction(1, 10))
    s.add_argument("--multiclass", choices=("auto", "yes", "no"), default="auto")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_vote)

    s = sub.add_parser("bench", help="repeated end-to-end benchmark on a named suite")
    s.add_argument("--suite", choices=sorted(SUITES), required=True)
    s.add_argument("--data", help="CSV file or directory (default: $RULEVOTE_DATA)")
    s.add_argument("--reps", type=int, default=None)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--k", type=int, default=2)
    s.add_argument("--threshold", type=_fraction, default=None)
    s.add_argument("--tolerance", type=_fraction, default=None)
    s.add_argument("--ambiguity", action="store_true", help="also report tree/rule ambiguity")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--out", help="directory for report and per-run CSV")
    s.set_defaults(func=cmd_bench)
    return p


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    ini = configparser.ConfigParser()
    if not ini.read(known.config):
        raise SystemExit(f"cannot read config file {known.config}")
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for name, sp in subparsers.choices.items():
        if ini.has_section(name):
            defaults = {}
            for action in sp._actions:
                if action.dest in ini[name]:
                    raw = ini[name][action.dest]
                    defaults[action.dest] = action.type(raw) if action.type else raw
                    action.required = False
            sp.set_defaults(**defaults)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    _apply_config(parser, argv)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (OSError, ValueError, KeyError) as exc:
        print(f"rulevote: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
