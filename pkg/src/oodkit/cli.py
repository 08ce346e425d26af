"""Command-line interface.

Subcommands: fit, score, eval, sweep, sweep-classes, synth. Scores and
summary tables are emitted as CSV with fixed 6-decimal formatting; binary
artifacts (feature and model files) keep full precision. Exit codes: 0 on
success, 1 on usage errors, 2 on data or validation errors. Diagnostics go
to stderr, data to files or stdout.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from .errors import OodkitError
from .evaluation import class_count_sweep, run_experiments
from .features import (
    ExperimentManifest,
    SHRINKAGE_MODES,
    load_features,
    save_features,
    save_manifest,
)
from .gaussian import fit_gaussian, load_model, save_model
from .invariants import DIRECTIONS, component_sweep, fit_invariants
from .scoring import score
from .synthetic import SCENARIOS, gen_synthetic


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # exit 1, not argparse's default 2
        raise _UsageError(f"{self.prog}: {message}")


def _build_parser() -> _Parser:
    parser = _Parser(prog="oodkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit a Gaussian model on a feature file")
    fit.add_argument("--train", required=True, help="training UOFV1 feature file")
    fit.add_argument("--out", required=True, help="output model file (.uom)")
    fit.add_argument("--shrinkage", choices=SHRINKAGE_MODES, default="ledoit_wolf")

    sc = sub.add_parser("score", help="score a feature file against a model")
    sc.add_argument("--model", required=True, help="model file from fit")
    sc.add_argument("--test", required=True, help="UOFV1 feature file to score")
    sc.add_argument("--out", default=None, help="CSV output path (default stdout)")

    ev = sub.add_parser("eval", help="run manifest experiments and report AUROC")
    ev.add_argument("--manifest", required=True, nargs="+", help="manifest JSON file(s)")
    ev.add_argument("--out", default=None, help="CSV output path (default stdout)")
    ev.add_argument("--threads", type=int, default=1)

    sw = sub.add_parser("sweep", help="AUROC over principal-component subsets")
    sw.add_argument("--train", required=True)
    sw.add_argument("--test-in", required=True)
    sw.add_argument("--test-out", required=True)
    sw.add_argument("--direction", choices=DIRECTIONS, default="from_most_invariant")
    sw.add_argument(
        "--grid",
        default="0.03,0.05,0.1,0.2,0.4,0.6,0.8,0.9,1.0",
        help="comma-separated ascending variance fractions in (0, 1]",
    )
    sw.add_argument("--epsilon-floor", type=float, default=1e-12)
    sw.add_argument("--threads", type=int, default=1)
    sw.add_argument(
        "--two-column",
        action="store_true",
        help="emit gnuplot-ready 'fraction auc' lines instead of CSV",
    )
    sw.add_argument("--out", default=None)

    sv = sub.add_parser("sweep-classes", help="AUROC as class pools are merged")
    sv.add_argument("--pools", required=True, nargs="+", help="per-class feature files")
    sv.add_argument("--ood-near", required=True)
    sv.add_argument("--ood-far", required=True)
    sv.add_argument("--k", required=True, help="comma-separated class counts")
    sv.add_argument("--shrinkage", choices=SHRINKAGE_MODES, default="ledoit_wolf")
    sv.add_argument("--seed", type=int, default=0)
    sv.add_argument("--threads", type=int, default=1)
    sv.add_argument("--out", default=None)

    sy = sub.add_parser("synth", help="write a synthetic scenario to a directory")
    sy.add_argument("--scenario", choices=sorted(SCENARIOS), required=True)
    sy.add_argument("--out-dir", required=True)
    sy.add_argument("--n-train", type=int, default=2000)
    sy.add_argument("--n-test", type=int, default=1000)
    sy.add_argument("--noise-sigma", type=float, default=0.01)
    sy.add_argument("--seed", type=int, default=0)

    return parser


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _parse_floats(raw: str, flag: str) -> list[float]:
    try:
        return [float(tok) for tok in raw.split(",") if tok.strip()]
    except ValueError:
        raise _UsageError(f"{flag}: expected comma-separated numbers, got {raw!r}")


def _parse_ints(raw: str, flag: str) -> list[int]:
    try:
        return [int(tok) for tok in raw.split(",") if tok.strip()]
    except ValueError:
        raise _UsageError(f"{flag}: expected comma-separated integers, got {raw!r}")


def _cmd_fit(args: argparse.Namespace) -> None:
    model = fit_gaussian(load_features(args.train), shrinkage=args.shrinkage)
    save_model(model, args.out)


def _cmd_score(args: argparse.Namespace) -> None:
    model = load_model(args.model)
    report = score(model, load_features(args.test))
    header = "sample_index,total," + ",".join(
        f"s_{i + 1}" for i in range(model.layer_count)
    )
    lines = [header]
    for i in range(report.n_samples):
        cells = [str(i), f"{report.total[i]:.6f}"]
        cells += [f"{v:.6f}" for v in report.per_layer[i]]
        lines.append(",".join(cells))
    _emit("\n".join(lines) + "\n", args.out)


def _cmd_eval(args: argparse.Namespace) -> None:
    if args.threads < 1:
        raise _UsageError("--threads must be at least 1")
    results = run_experiments(args.manifest, threads=args.threads)
    lines = ["name,auroc,n_in,n_out,mean_in,mean_out"]
    for r in results:
        lines.append(
            f"{r.name},{r.auroc:.6f},{r.n_in},{r.n_out},"
            f"{r.mean_score_in:.6f},{r.mean_score_out:.6f}"
        )
    _emit("\n".join(lines) + "\n", args.out)


def _cmd_sweep(args: argparse.Namespace) -> None:
    grid = _parse_floats(args.grid, "--grid")
    if args.threads < 1:
        raise _UsageError("--threads must be at least 1")
    bases = fit_invariants(load_features(args.train))
    points = component_sweep(
        bases,
        load_features(args.test_in),
        load_features(args.test_out),
        direction=args.direction,
        grid=grid,
        epsilon_floor=args.epsilon_floor,
        threads=args.threads,
    )
    if args.two_column:
        lines = [f"{p.fraction:.6f} {p.auroc:.6f}" for p in points]
    else:
        layer_cols = ",".join(f"components_l{i + 1}" for i in range(len(bases)))
        lines = [f"fraction,auc,{layer_cols}"]
        for p in points:
            counts = ",".join(str(c) for c in p.components_per_layer)
            lines.append(f"{p.fraction:.6f},{p.auroc:.6f},{counts}")
    _emit("\n".join(lines) + "\n", args.out)


def _cmd_sweep_classes(args: argparse.Namespace) -> None:
    k_values = _parse_ints(args.k, "--k")
    if not k_values:
        raise _UsageError("--k: need at least one class count")
    if args.threads < 1:
        raise _UsageError("--threads must be at least 1")
    points = class_count_sweep(
        [load_features(p) for p in args.pools],
        load_features(args.ood_near),
        load_features(args.ood_far),
        k_values,
        shrinkage=args.shrinkage,
        seed=args.seed,
        threads=args.threads,
    )
    lines = ["k,auc_near,auc_far"]
    lines += [f"{p.k},{p.auc_near:.6f},{p.auc_far:.6f}" for p in points]
    _emit("\n".join(lines) + "\n", args.out)


def _cmd_synth(args: argparse.Namespace) -> None:
    config = SCENARIOS[args.scenario](
        n_train=args.n_train,
        n_test=args.n_test,
        noise_sigma=args.noise_sigma,
        seed=args.seed,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    train, test_in, test_out = gen_synthetic(config)
    save_features(train, out_dir / "train.uof")
    save_features(test_in, out_dir / "test_in.uof")
    save_features(test_out, out_dir / "test_out.uof")
    manifest = ExperimentManifest(
        name=f"synthetic:{args.scenario}",
        train_path=Path("train.uof"),
        test_in_path=Path("test_in.uof"),
        test_out_path=Path("test_out.uof"),
        shrinkage="ledoit_wolf",
    )
    manifest_path = out_dir / "manifest.json"
    save_manifest(manifest, manifest_path)
    sys.stdout.write(f"{manifest_path}\n")


_COMMANDS = {
    "fit": _cmd_fit,
    "score": _cmd_score,
    "eval": _cmd_eval,
    "sweep": _cmd_sweep,
    "sweep-classes": _cmd_sweep_classes,
    "synth": _cmd_synth,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    try:
        _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (OodkitError, OSError) as exc:
        print(f"oodkit {args.command}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
