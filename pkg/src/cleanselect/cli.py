"""Command line front end.

One binary, subcommand style. Defaults can come from a JSON config file
(--config) and a named preset (--preset); explicit flags always win. All
randomness flows from --seed, and identical invocations produce
byte-identical outputs.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import bench, corpus, formats, presets
from .induced import ProbeConfig, fit_probe, knn_probabilities, predict_probe
from .mixfix import MixFixConfig, mixfix_run, write_history
from .selection import SelectionResult, consistency_select, intersect, loss_select, selection_quality
from .zeroshot import l2_normalize, zeroshot_probabilities

logger = logging.getLogger("cleanselect")


def _add_common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--preset", default=None, help="named threshold preset, e.g. cifar10-sym")
    p.add_argument("--config", default=None, help="JSON file of flag defaults; explicit flags win")
    p.add_argument("-v", "--verbose", action="count", default=0)


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(prog="cleanselect", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    subparsers: dict[str, argparse.ArgumentParser] = {}

    def add_parser(name, **kwargs):
        p = sub.add_parser(name, **kwargs)
        subparsers[name] = p
        return p

    p = add_parser("inject-noise", help="corrupt the true labels of a manifest dataset")
    _add_common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--kind", choices=corpus.NOISE_KINDS, required=True)
    p.add_argument("--ratio", type=float, required=True)
    p.add_argument("--pair-map", default=None, help="JSON file mapping class index to class index")
    p.add_argument("--include-original", action="store_true")
    p.add_argument("--out", required=True, help="output .lab1 path")
    p.add_argument("--out-manifest", default=None, help="optionally write a manifest pointing at the new labels")

    p = add_parser("zeroshot", help="prompt-bank probability estimates")
    _add_common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--temperature", type=float, default=100.0)
    p.add_argument("--agg", choices=("mean", "sum"), default="mean")
    p.add_argument("--out", required=True, help="output .emb1 path for the probability rows")

    p = add_parser("probe", help="induced-classifier probability estimates")
    _add_common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--mode", choices=("logistic", "knn"), required=True)
    p.add_argument("--k", type=int, default=None, help="neighbour count for knn mode")
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--iterations", type=int, default=300)
    p.add_argument("--out", required=True)

    p = add_parser("select", help="turn probability files into a clean-sample mask")
    _add_common(p)
    p.add_argument("--probs", action="append", required=True, help="probability .emb1 file (repeatable)")
    p.add_argument("--labels", required=True, help="noisy labels .lab1")
    p.add_argument("--selector", choices=("consistency", "loss", "both-intersect"), required=True)
    p.add_argument("--theta-consistency", type=float, default=None)
    p.add_argument("--theta-loss", type=float, default=None)
    p.add_argument("--loss-mode", choices=("per_class", "single"), default="per_class")
    p.add_argument("--truth", default=None, help="true labels .lab1 for the quality report")
    p.add_argument("--out", required=True, help="output mask .lab1 (0/1)")
    p.add_argument("--report", default=None, help="output report JSON")

    p = add_parser("mixfix", help="absorb/relabel/drop training loop on a selection mask")
    _add_common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--mask", required=True, help="selection mask .lab1 (0/1)")
    p.add_argument("--theta-r", type=float, default=None)
    p.add_argument("--theta-rp", type=float, default=None)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--probe-iterations", type=int, default=20)
    p.add_argument("--sticky", action="store_true")
    p.add_argument("--holdout-manifest", default=None)
    p.add_argument("--out", required=True, help="output probe parameters (.bin, PRB1)")
    p.add_argument("--history", default=None, help="output history CSV")

    p = add_parser("evaluate", help="score a mask (and optional scores) against ground truth")
    _add_common(p)
    p.add_argument("--mask", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--scores", default=None, help="optional Nx1 .emb1 of continuous scores")
    p.add_argument("--report", required=True)

    p = add_parser("simulate", help="run a sweep spec and write CSV/JSON reports")
    _add_common(p)
    p.add_argument("--spec", required=True, help="sweep spec JSON")
    p.add_argument("--out-dir", required=True)

    return parser, subparsers


def _apply_config_and_preset(subparsers, argv):
    """Pre-scan for --config/--preset so their values become subcommand
    defaults; explicit flags then override them during the real parse.
    (Defaults must land on the subparsers: argparse-subparsers parse into a
    fresh namespace, so top-level defaults would be shadowed.)"""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    pre.add_argument("--preset", default=None)
    known, _ = pre.parse_known_args(argv)
    overrides = {}
    if known.config:
        overrides.update(json.loads(Path(known.config).read_text(encoding="utf-8")))
    if known.preset:
        preset = presets.resolve(known.preset)  # unknown preset fails here, before work starts
        overrides.setdefault("theta_consistency", preset.theta_consistency)
        overrides.setdefault("theta_loss", preset.theta_loss)
        overrides.setdefault("theta_r", preset.theta_r)
        overrides.setdefault("theta_rp", preset.theta_r_prime)
    if not overrides:
        return
    for sub in subparsers.values():
        valid = {k: v for k, v in overrides.items() if any(a.dest == k for a in sub._actions)}
        if valid:
            sub.set_defaults(**valid)


def _fill_theta_defaults(args):
    for name, fallback in (
        ("theta_consistency", 0.8),
        ("theta_loss", 0.5),
        ("theta_r", 0.7),
        ("theta_rp", 0.8),
    ):
        if getattr(args, name, None) is None and hasattr(args, name):
            setattr(args, name, fallback)


def _load_pair_map(path):
    if path is None:
        return None
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return {int(k): int(v) for k, v in raw.items()}


def _write_json(payload, path):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def _cmd_inject_noise(args):
    ds, bank = corpus.load_dataset(args.manifest)
    pair_map = _load_pair_map(args.pair_map)
    if pair_map is None and args.preset:
        pair_map = presets.resolve(args.preset).pair_map
    spec = corpus.NoiseSpec(
        kind=args.kind,
        ratio=args.ratio,
        pair_map=pair_map,
        seed=args.seed,
        include_original=args.include_original,
    )
    noisy = corpus.inject_noise(ds, spec, prompts=bank)
    formats.save_labels(noisy.noisy_labels, args.out)
    if args.out_manifest:
        manifest = formats.load_manifest(args.manifest)
        old_dir = Path(args.manifest).parent.resolve()
        new_dir = Path(args.out_manifest).parent.resolve()

        def rebase(p):
            resolved = (old_dir / p).resolve()
            return str(resolved.relative_to(new_dir)) if resolved.is_relative_to(new_dir) else str(resolved)

        manifest["embeddings"] = rebase(manifest["embeddings"])
        if manifest.get("true_labels"):
            manifest["true_labels"] = rebase(manifest["true_labels"])
        for entry in manifest["prompts"]:
            entry["path"] = rebase(entry["path"])
        out_labels = Path(args.out).resolve()
        manifest["labels"] = (
            str(out_labels.relative_to(new_dir)) if out_labels.is_relative_to(new_dir) else str(out_labels)
        )
        formats.save_manifest(manifest, args.out_manifest)
    logger.info("wrote %s (%d labels)", args.out, noisy.n)
    return 0


def _cmd_zeroshot(args):
    ds, bank = corpus.load_dataset(args.manifest)
    if bank is None:
        raise corpus.ValidationError("manifest has no prompt files; zeroshot needs a prompt bank")
    bank = bench._normalized_bank(bank)
    probs = zeroshot_probabilities(l2_normalize(ds.embeddings), bank, args.temperature, args.agg)
    formats.save_embeddings(probs, args.out)
    return 0


def _cmd_probe(args):
    ds, _ = corpus.load_dataset(args.manifest)
    if args.mode == "logistic":
        xn = l2_normalize(ds.embeddings)
        norm = corpus.NoisyDataset(xn, ds.noisy_labels, ds.true_labels, ds.num_classes, list(ds.class_names))
        cfg = ProbeConfig(l2_lambda=args.l2, iterations=args.iterations, seed=args.seed)
        probe = fit_probe(norm, cfg, allow_missing=True)
        probs = predict_probe(probe, xn)
    else:
        probs = knn_probabilities(ds, args.k)
    formats.save_embeddings(probs, args.out)
    return 0


def _selection_report(result: SelectionResult, noisy, truth):
    payload = {
        "selector": result.selector_id,
        "threshold": None if result.threshold != result.threshold else result.threshold,
        "n": result.n,
        "n_selected": result.n_selected,
        "warnings": list(result.warnings),
    }
    if truth is not None:
        quality = selection_quality(result, noisy, truth)
        payload.update(
            precision=quality.precision,
            recall=quality.recall,
            f1=quality.f1,
            roc_auc=quality.roc_auc,
            per_class_selected_counts=quality.per_class_selected_counts.tolist(),
        )
    return payload


def _cmd_select(args):
    labels = formats.load_labels(args.labels)
    truth = formats.load_labels(args.truth) if args.truth else None
    prob_files = [formats.load_embeddings(p).astype(np.float64) for p in args.probs]

    results = []
    for probs in prob_files:
        if args.selector in ("consistency", "both-intersect"):
            results.append(consistency_select(probs, labels, args.theta_consistency))
        if args.selector in ("loss", "both-intersect"):
            results.append(loss_select(probs, labels, args.theta_loss, args.loss_mode))
    result = results[0] if len(results) == 1 else intersect(results)

    formats.save_labels(result.mask.astype(np.int64), args.out)
    if args.report:
        _write_json(_selection_report(result, labels, truth), args.report)
    return 0


def _cmd_mixfix(args):
    ds, _ = corpus.load_dataset(args.manifest)
    mask = formats.load_labels(args.mask)
    if mask.shape[0] != ds.n or not np.isin(mask, (0, 1)).all():
        raise corpus.ValidationError("mask must be a 0/1 vector matching the dataset size")
    xn = l2_normalize(ds.embeddings)
    norm = corpus.NoisyDataset(xn, ds.noisy_labels, ds.true_labels, ds.num_classes, list(ds.class_names))
    selected = SelectionResult(mask.astype(np.float64), mask.astype(bool), "mask-file", 0.5)
    holdout = holdout_labels = None
    if args.holdout_manifest:
        hds, _ = corpus.load_dataset(args.holdout_manifest)
        holdout = l2_normalize(hds.embeddings)
        holdout_labels = hds.noisy_labels
    cfg = MixFixConfig(
        theta_r=args.theta_r,
        theta_r_prime=args.theta_rp,
        epochs=args.epochs,
        probe=ProbeConfig(iterations=args.probe_iterations),
        sticky=args.sticky,
        seed=args.seed,
    )
    state, _ = mixfix_run(norm, selected, cfg, holdout, holdout_labels)
    formats.save_probe_params(state.probe.weights, state.probe.bias, args.out)
    if args.history:
        write_history(state.history, args.history)
    return 0


def _cmd_evaluate(args):
    mask = formats.load_labels(args.mask)
    labels = formats.load_labels(args.labels)
    truth = formats.load_labels(args.truth)
    if not np.isin(mask, (0, 1)).all():
        raise corpus.ValidationError("mask must contain only 0/1 values")
    scores = mask.astype(np.float64)
    if args.scores:
        scores = formats.load_embeddings(args.scores).astype(np.float64).ravel()
        if scores.shape[0] != mask.shape[0]:
            raise corpus.ValidationError("scores length does not match mask length")
    result = SelectionResult(scores, mask.astype(bool), "evaluate", float("nan"))
    _write_json(_selection_report(result, labels, truth), args.report)
    return 0


def _cmd_simulate(args):
    spec = bench.SweepSpec.from_json(args.spec)
    report = bench.run_sweep(spec)
    csv_path, json_path = bench.write_report(report, args.out_dir)
    logger.info("wrote %s and %s (%d rows)", csv_path, json_path, len(report.rows))
    return 0


_HANDLERS = {
    "inject-noise": _cmd_inject_noise,
    "zeroshot": _cmd_zeroshot,
    "probe": _cmd_probe,
    "select": _cmd_select,
    "mixfix": _cmd_mixfix,
    "evaluate": _cmd_evaluate,
    "simulate": _cmd_simulate,
}


def dispatch(argv) -> int:
    parser, subparsers = build_parser()
    try:
        _apply_config_and_preset(subparsers, argv)
    except Exception as e:  # noqa: BLE001 - bad preset/config must fail before any work
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:  # argparse handles --help (0) and usage errors (2)
        return int(e.code or 0)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    _fill_theta_defaults(args)
    try:
        return _HANDLERS[args.command](args)
    except Exception as e:  # noqa: BLE001 - single-line machine-parsable failure
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
