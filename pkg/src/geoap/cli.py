"""Command-line harness.

Subcommands
-----------
cluster    one clustering run, optional result document
sweep-tau  neighborhood-threshold sweep at a fixed cluster count
sweep-k    cluster-count sweep (standard or geometric)
ablation   random vertex-relabeling study
eval       score a prediction against a truth label file

Exit codes: 0 success, 1 usage error, 2 data error (missing or malformed
files), 3 non-convergence or divergence, 4 calibration failure.
"""

from __future__ import annotations

import sys

import click

from . import data as dio
from .engine import EngineConfig, Mode
from .errors import (
    CalibrationError,
    DataFormatError,
    DivergenceError,
    NonConvergenceError,
)
from .graph import TopoDistance
from .metrics import classification_rate, macro_f1, nmi
from .similarity import FeatureMetric
from .sweeps import (
    ablation as run_ablation,
    evaluate_labels,
    prepare_similarity,
    resolve_and_run,
    sweep_k as run_sweep_k,
    sweep_tau as run_sweep_tau,
)

_METRICS = {m.value: m for m in FeatureMetric}
_TOPOS = {t.value: t for t in TopoDistance}
_MODES = {m.value: m for m in Mode}


def _dataset_options(fn):
    fn = click.option("--features", type=str, default=None, help="Feature file path.")(fn)
    fn = click.option("--edges", type=str, default=None, help="Edge list path.")(fn)
    fn = click.option("--labels", type=str, default=None, help="Ground-truth label file path.")(fn)
    fn = click.option(
        "--features-ids/--no-features-ids",
        default=False,
        help="Whether the feature file has a leading node-id column.",
    )(fn)
    fn = click.option(
        "--feature-metric",
        type=click.Choice(sorted(_METRICS)),
        default="euclidean",
        show_default=True,
        help="Distance metric over feature vectors.",
    )(fn)
    return fn


def _engine_options(fn):
    fn = click.option("--damping", type=float, default=0.9, show_default=True)(fn)
    fn = click.option("--max-iter", type=int, default=1000, show_default=True)(fn)
    fn = click.option("--conv-iter", type=int, default=100, show_default=True)(fn)
    fn = click.option(
        "--no-smoothing", is_flag=True, default=False, help="Skip the label smoothing pass."
    )(fn)
    return fn


def _load(features, edges, labels, features_ids, need_features=True, need_edges=False,
          need_labels=False):
    if need_features and features is None:
        raise click.UsageError("--features is required for this command")
    if need_edges and edges is None:
        raise click.UsageError("--edges is required for this command")
    if need_labels and labels is None:
        raise click.UsageError("--labels is required for this command")
    return dio.load_dataset(
        features_path=features,
        edges_path=edges,
        labels_path=labels,
        features_have_ids=features_ids,
    )


def _engine_config(mode, damping, max_iter, conv_iter, no_smoothing):
    try:
        return EngineConfig(
            damping=damping,
            max_iter=max_iter,
            conv_iter=conv_iter,
            mode=mode,
            smoothing=not no_smoothing,
        )
    except ValueError as exc:
        raise click.UsageError(str(exc))


def _csv_values(text, cast, flag):
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise click.UsageError(f"{flag} needs at least one value")
    try:
        return [cast(p) for p in parts]
    except ValueError:
        raise click.UsageError(f"{flag} holds a malformed value: {text!r}")


def _print_metrics(values):
    if values is None:
        return
    click.echo(
        "nmi={nmi:.4f} cr={cr:.4f} f1={f1:.4f} (n_evaluated={n_evaluated})".format(**values)
    )


@click.group()
def cli():
    """Exemplar clustering with optional network-topology constraints."""


@cli.command("cluster")
@_dataset_options
@_engine_options
@click.option("--mode", type=click.Choice(sorted(_MODES)), default="standard", show_default=True)
@click.option("--topo", type=click.Choice(sorted(_TOPOS)), default=None,
              help="Topological distance kind (geometric mode).")
@click.option("--tau", type=float, default=None, help="Neighborhood threshold (geometric mode).")
@click.option("--preference", type=float, default=None,
              help="Shared exemplar preference (default: median off-diagonal similarity).")
@click.option("--target-k", type=int, default=None,
              help="Calibrate the preference to this cluster count.")
@click.option("--output", type=str, default=None, help="Write a result document here.")
@click.option("--trace", type=str, default=None, help="Write per-iteration diagnostics here.")
def cmd_cluster(features, edges, labels, features_ids, feature_metric, damping, max_iter,
                conv_iter, no_smoothing, mode, topo, tau, preference, target_k, output, trace):
    """Run one clustering job over a feature file (plus a network in
    geometric mode) and print a summary."""
    mode = _MODES[mode]
    if preference is not None and target_k is not None:
        raise click.UsageError("--preference and --target-k are mutually exclusive")
    if mode is Mode.GEOMETRIC:
        if topo is None or tau is None:
            raise click.UsageError("geometric mode requires --topo and --tau")
    else:
        if topo is not None or tau is not None:
            raise click.UsageError("--topo/--tau only apply to geometric mode")
    dataset = _load(features, edges, labels, features_ids,
                    need_edges=mode is Mode.GEOMETRIC)
    config = _engine_config(mode, damping, max_iter, conv_iter, no_smoothing)
    sim = prepare_similarity(dataset, _METRICS[feature_metric])

    mask = None
    if mode is Mode.GEOMETRIC:
        from .graph import neighborhood_mask

        mask = neighborhood_mask(dataset.graph, _TOPOS[topo], tau)

    trace_fh = open(trace, "w", encoding="utf-8") if trace else None
    try:
        trace_fn = None
        if trace_fh is not None:
            def trace_fn(iteration, n_exemplars, max_delta):
                trace_fh.write(f"{iteration} {n_exemplars} {max_delta:.12g}\n")
        try:
            pref, result = resolve_and_run(
                sim, mask, config, preference=preference, target_k=target_k, trace=trace_fn
            )
        except CalibrationError as exc:
            if exc.closest_result is None:
                raise
            click.echo(
                f"warning: {exc}; reporting the closest achieved cluster count",
                err=True,
            )
            pref, result = exc.closest_preference, exc.closest_result
    finally:
        if trace_fh is not None:
            trace_fh.close()

    if not result.converged:
        click.echo(
            f"warning: exemplar set was still drifting after {config.max_iter} "
            "iterations; reporting the final state",
            err=True,
        )

    metric_values = evaluate_labels(dataset, result.labels)
    click.echo(
        f"mode={mode.value} metric={feature_metric}"
        + (f" topo={topo} tau={tau:g}" if mode is Mode.GEOMETRIC else "")
    )
    click.echo(
        f"n={dataset.n} k={result.k} preference={pref:.6g} "
        f"iterations={result.iterations_run} converged={result.converged}"
    )
    click.echo("exemplars: " + " ".join(dataset.ids[e] for e in result.exemplars))
    click.echo(f"net_similarity={result.net_similarity:.6g}")
    _print_metrics(metric_values)

    if output:
        params = {
            "command": "cluster",
            "mode": mode.value,
            "feature_metric": feature_metric,
            "topo": topo,
            "tau": tau,
            "preference": pref,
            "target_k": target_k,
            "damping": damping,
            "max_iter": max_iter,
            "conv_iter": conv_iter,
            "smoothing": not no_smoothing,
        }
        doc = dio.build_result_document(dataset, result, params)
        if metric_values is not None:
            dio.attach_metrics(doc, metric_values)
        dio.write_result(doc, output)
    return 0


@cli.command("sweep-tau")
@_dataset_options
@_engine_options
@click.option("--topo", type=click.Choice(sorted(_TOPOS)), required=True)
@click.option("--tau-grid", type=str, required=True, help="Comma-separated thresholds.")
@click.option("--target-k", type=int, required=True)
@click.option("--output", type=str, default=None, help="Write the sweep report here.")
def cmd_sweep_tau(features, edges, labels, features_ids, feature_metric, damping, max_iter,
                  conv_iter, no_smoothing, topo, tau_grid, target_k, output):
    """Geometric runs across a grid of neighborhood thresholds, each
    calibrated to the same cluster count; reports the NMI-optimal
    threshold (ties to the smallest)."""
    taus = _csv_values(tau_grid, float, "--tau-grid")
    dataset = _load(features, edges, labels, features_ids, need_edges=True, need_labels=True)
    config = _engine_config(Mode.GEOMETRIC, damping, max_iter, conv_iter, no_smoothing)
    sim = prepare_similarity(dataset, _METRICS[feature_metric])
    report = run_sweep_tau(dataset, sim, _TOPOS[topo], taus, target_k, config)
    _emit_sweep(report, output, _sweep_config(feature_metric, damping, max_iter, conv_iter,
                                              no_smoothing, command="sweep-tau"))
    return 0


@cli.command("sweep-k")
@_dataset_options
@_engine_options
@click.option("--mode", type=click.Choice(sorted(_MODES)), default="geometric", show_default=True)
@click.option("--topo", type=click.Choice(sorted(_TOPOS)), default=None)
@click.option("--tau", type=float, default=None)
@click.option("--k-list", type=str, required=True, help="Comma-separated cluster counts.")
@click.option("--output", type=str, default=None, help="Write the sweep report here.")
def cmd_sweep_k(features, edges, labels, features_ids, feature_metric, damping, max_iter,
                conv_iter, no_smoothing, mode, topo, tau, k_list, output):
    """Calibrated runs across a list of cluster counts."""
    ks = _csv_values(k_list, int, "--k-list")
    mode = _MODES[mode]
    if mode is Mode.GEOMETRIC and (topo is None or tau is None):
        raise click.UsageError("geometric k sweeps require --topo and --tau")
    if mode is Mode.STANDARD and (topo is not None or tau is not None):
        raise click.UsageError("--topo/--tau only apply to geometric mode")
    dataset = _load(features, edges, labels, features_ids,
                    need_edges=mode is Mode.GEOMETRIC, need_labels=True)
    config = _engine_config(mode, damping, max_iter, conv_iter, no_smoothing)
    sim = prepare_similarity(dataset, _METRICS[feature_metric])
    report = run_sweep_k(
        dataset, sim, ks, config,
        topo_kind=_TOPOS[topo] if topo else None, tau=tau,
    )
    _emit_sweep(report, output, _sweep_config(feature_metric, damping, max_iter, conv_iter,
                                              no_smoothing, command="sweep-k"))
    return 0


@cli.command("ablation")
@_dataset_options
@_engine_options
@click.option("--topo", type=click.Choice(sorted(_TOPOS)), required=True)
@click.option("--tau", type=float, required=True)
@click.option("--target-k", type=int, required=True)
@click.option("--repetitions", type=int, default=100, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--output", type=str, default=None, help="Write the ablation report here.")
def cmd_ablation(features, edges, labels, features_ids, feature_metric, damping, max_iter,
                 conv_iter, no_smoothing, topo, tau, target_k, repetitions, seed, output):
    """Random vertex-relabeling study: permute the network's node
    identities, rebuild neighborhoods, recalibrate, rerun; repeat."""
    if repetitions < 1:
        raise click.UsageError("--repetitions must be positive")
    dataset = _load(features, edges, labels, features_ids, need_edges=True, need_labels=True)
    config = _engine_config(Mode.GEOMETRIC, damping, max_iter, conv_iter, no_smoothing)
    sim = prepare_similarity(dataset, _METRICS[feature_metric])
    report = run_ablation(
        dataset, sim, _TOPOS[topo], tau, target_k, repetitions, seed, config
    )
    click.echo(
        f"ablation: {report.completed}/{report.repetitions} runs completed (seed={seed})"
    )
    if report.failures:
        click.echo(f"warning: {len(report.failures)} runs failed and were excluded", err=True)
    for key in ("nmi", "cr", "f1"):
        if report.mean:
            click.echo(f"{key}: mean={report.mean[key]:.4f} std={report.std[key]:.4f}")
    if output:
        doc = {"config": _sweep_config(feature_metric, damping, max_iter, conv_iter,
                                       no_smoothing, command="ablation",
                                       topo=topo, tau=tau, target_k=target_k)}
        doc.update(report.to_dict())
        dio.write_result(doc, output)
    return 0


@cli.command("eval")
@click.option("--pred", type=str, required=True,
              help="Predicted labels: a result document or a label file.")
@click.option("--labels", type=str, required=True, help="Ground-truth label file.")
@click.option("--output", type=str, default=None, help="Write the metric values here.")
def cmd_eval(pred, labels, output):
    """Score predictions against ground truth (NMI and macro F1 in
    percent, classification rate in percent)."""
    pred_pairs = _read_predictions(pred)
    truth_pairs = dio.read_label_pairs(labels)
    evaluated = [(p, truth_pairs[node]) for node, p in pred_pairs.items()
                 if node in truth_pairs]
    missing = [node for node in truth_pairs if node not in pred_pairs]
    if missing:
        raise DataFormatError(
            f"{len(missing)} labeled nodes have no prediction (first: {sorted(missing)[0]!r})",
            pred,
        )
    if not evaluated:
        raise DataFormatError("no nodes are shared between predictions and truth", pred)
    pred_seq = [p for p, _ in evaluated]
    truth_seq = [t for _, t in evaluated]
    values = {
        "nmi": 100.0 * nmi(pred_seq, truth_seq),
        "cr": classification_rate(pred_seq, truth_seq),
        "f1": 100.0 * macro_f1(pred_seq, truth_seq),
        "n_evaluated": len(evaluated),
    }
    _print_metrics(values)
    if output:
        dio.write_result({"config": {"command": "eval"}, "metrics": values}, output)
    return 0


def _read_predictions(path):
    """Accept either a result document (JSON) or a plain label file."""
    with open(path, encoding="utf-8") as f:
        head = f.read(1)
    if head == "{":
        doc = dio.load_result(path)
        if "ids" not in doc or "labels" not in doc:
            raise DataFormatError("result document lacks ids/labels fields", path)
        return dict(zip(doc["ids"], (str(l) for l in doc["labels"])))
    return dio.read_label_pairs(path)


def _sweep_config(feature_metric, damping, max_iter, conv_iter, no_smoothing, command,
                  **extra):
    cfg = {
        "command": command,
        "feature_metric": feature_metric,
        "damping": damping,
        "max_iter": max_iter,
        "conv_iter": conv_iter,
        "smoothing": not no_smoothing,
    }
    cfg.update(extra)
    return cfg


def _emit_sweep(report, output, config):
    doc = {"config": config}
    doc.update(report.to_dict())
    axis = report.axis
    for cell in report.cells:
        if cell.error is not None:
            click.echo(f"{axis}={cell.value:g} failed: {cell.error}", err=True)
        else:
            m = cell.metrics
            click.echo(
                f"{axis}={cell.value:g} k={cell.k} preference={cell.preference:.6g} "
                f"nmi={m['nmi']:.4f} cr={m['cr']:.4f} f1={m['f1']:.4f}"
            )
    if report.optimum is not None:
        click.echo(f"optimum: {axis}={report.optimum:g}")
    if output:
        dio.write_result(doc, output)
    if report.optimum is None:
        click.echo("no grid point produced a successful run", err=True)
        raise NonConvergenceError("every grid point failed")
    return 0


def main(argv=None):
    """Entry point with the documented exit-code mapping."""
    try:
        rv = cli.main(args=argv, standalone_mode=False)
        return int(rv) if isinstance(rv, int) else 0
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except DataFormatError as exc:
        click.echo(f"data error: {exc}", err=True)
        return 2
    except OSError as exc:
        click.echo(f"data error: {exc}", err=True)
        return 2
    except (NonConvergenceError, DivergenceError) as exc:
        click.echo(f"engine error: {exc}", err=True)
        return 3
    except CalibrationError as exc:
        click.echo(f"calibration error: {exc}", err=True)
        return 4
    except ValueError as exc:
        click.echo(f"usage error: {exc}", err=True)
        return 1


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
