"""Command-line entry points: run, diagnose, report, render.

``run`` executes an experiment from a config file and writes chain logs,
diagnostic traces, alignment reports (when a reference distribution is
available), and color-strip figures. The other subcommands recompute any
of those artifacts from existing logs.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import datetime
import re
import sys
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .chainlog import (
    config_digest,
    output_from_log,
    read_chain_log,
    read_reference_histogram,
    replay_entries,
    write_chain_log,
)
from .colors import GridHistogram
from .config import RunConfig, load_config
from .diagnostics import build_alignment_report, cumulative_rhat
from .errors import ColorElicitError, MissingReference
from .figures import render_color_strip, render_rhat_trace, render_scatter_kde
from .reportio import export_report
from .respondents import LlmRespondent, OracleRespondent, ReplayRespondent
from .samplers import ChainOutput, run_experiment


def object_slug(name: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-") or "object"


def log_filename(method: str, obj: str, chain_id: int) -> str:
    return f"{method}_{object_slug(obj)}_chain{chain_id}.jsonl"


def _wall_clock() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def _respondent_factory(cfg: RunConfig, method: str, replay_dir: Path | None):
    kind = cfg.respondent.kind

    if kind == "oracle":
        def factory(obj: str, chain_id: int, rng: np.random.Generator):
            return OracleRespondent(
                cfg.target, rng,
                match_mode=cfg.respondent.match_mode,
                match_threshold=cfg.respondent.match_threshold,
            )
        return factory

    if kind == "llm":
        def factory(obj: str, chain_id: int, rng: np.random.Generator):
            return LlmRespondent(cfg.respondent)
        return factory

    if replay_dir is None:
        raise ColorElicitError("replay mode needs --replay-from pointing at logs")

    def factory(obj: str, chain_id: int, rng: np.random.Generator):
        path = replay_dir / log_filename(method, obj, chain_id)
        _, records = read_chain_log(path)
        return ReplayRespondent(replay_entries(records))
    return factory


def _references_for(
    cfg: RunConfig, objects: Sequence[str]
) -> dict[str, GridHistogram] | None:
    """Reference histograms per object: an explicit file/directory wins;
    oracle mode falls back to the target's own lattice histogram."""
    if cfg.reference_path is not None:
        return _load_references(cfg.reference_path, objects)
    if cfg.respondent.kind == "oracle" and cfg.target is not None:
        hist = cfg.target.grid_histogram()
        return {obj: hist for obj in objects}
    return None


def _load_references(path: Path, objects: Sequence[str]) -> dict[str, GridHistogram]:
    if path.is_dir():
        refs = {}
        for obj in objects:
            candidate = path / f"{object_slug(obj)}.txt"
            if not candidate.exists():
                raise MissingReference(f"no reference file {candidate} for {obj!r}")
            refs[obj] = read_reference_histogram(candidate)
        return refs
    hist = read_reference_histogram(path)
    return {obj: hist for obj in objects}


def _write_rhat_csv(path: Path, trace) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "rhat", "rhat_h", "rhat_s", "rhat_l", "degenerate"])
        for i, t in enumerate(trace.iterations):
            writer.writerow([
                t,
                repr(trace.values[i]),
                repr(trace.per_dimension["h"][i]),
                repr(trace.per_dimension["s"][i]),
                repr(trace.per_dimension["l"][i]),
                int(trace.degenerate[i]),
            ])


def _write_curves(report, out_dir: Path) -> None:
    """Alignment-vs-iteration curves, one CSV per object and method."""
    for (obj, method), curve in report.curves.items():
        path = out_dir / "curves" / f"alignment_{method}_{object_slug(obj)}.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["iteration", "hellinger_mean", "hellinger_sem", "mode_mean", "mode_sem"]
            )
            for i, t in enumerate(curve.iterations):
                writer.writerow([
                    t,
                    repr(curve.hellinger_mean[i]),
                    repr(curve.hellinger_sem[i]),
                    repr(curve.mode_mean[i]),
                    repr(curve.mode_sem[i]),
                ])


def _group_outputs(outputs: Sequence[ChainOutput]) -> dict[tuple[str, str], list[ChainOutput]]:
    groups: dict[tuple[str, str], list[ChainOutput]] = {}
    for out in outputs:
        groups.setdefault((out.object, out.method), []).append(out)
    for chains in groups.values():
        chains.sort(key=lambda c: c.chain_id)
    return groups


def _rhat_traces(groups: dict[tuple[str, str], list[ChainOutput]]):
    """Cumulative traces per (object, method), truncated to the shortest
    chain (ragged direct-sampling chains) and skipping groups that cannot
    support the diagnostic."""
    traces = {}
    skipped = []
    for (obj, method), chains in sorted(groups.items()):
        usable = [c.samples for c in chains if c.complete and c.samples]
        if len(usable) < 2:
            skipped.append((obj, method, "needs at least 2 complete chains"))
            continue
        min_len = min(len(s) for s in usable)
        if min_len < 2:
            skipped.append((obj, method, "chains shorter than 2 samples"))
            continue
        traces[(obj, method)] = cumulative_rhat([s[:min_len] for s in usable])
    return traces, skipped


def _emit_diagnostics(groups, out_dir: Path, print_fn) -> None:
    traces, skipped = _rhat_traces(groups)
    for (obj, method), trace in traces.items():
        base = out_dir / "diagnostics"
        _write_rhat_csv(base / f"rhat_{method}_{object_slug(obj)}.csv", trace)
        render_rhat_trace(
            {f"{obj} ({method})": trace},
            base / f"rhat_{method}_{object_slug(obj)}.png",
        )
        hit = trace.first_below()
        hit_txt = f"reaches 1.1 at t={hit}" if hit is not None else "never reaches 1.1"
        print_fn(f"  rhat {method}/{obj}: final={trace.final():.4f} ({hit_txt})")
    for obj, method, reason in skipped:
        print_fn(f"  rhat {method}/{obj}: skipped ({reason})")


def _emit_strips(groups, out_dir: Path, print_fn) -> None:
    for (obj, method), chains in sorted(groups.items()):
        rows = [c.samples for c in chains if c.samples]
        if not rows:
            continue
        path = out_dir / "figures" / f"strip_{method}_{object_slug(obj)}.png"
        render_color_strip(rows, path)
        print_fn(f"  strip {method}/{obj}: {path}")


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    out_dir = Path(args.out) if args.out else cfg.out_dir
    log_dir = out_dir / "logs"
    digest = config_digest(cfg.digest_data())
    replay_dir = Path(args.replay_from) if args.replay_from else None
    timestamper = _wall_clock if cfg.respondent.kind == "llm" else None

    all_outputs: list[ChainOutput] = []
    for method in cfg.methods():
        sampler_cfg = dataclasses.replace(cfg.sampler, method=method)
        factory = _respondent_factory(cfg, method, replay_dir)

        def persist(output: ChainOutput) -> None:
            path = log_dir / log_filename(output.method, output.object, output.chain_id)
            write_chain_log(path, output, sampler_cfg.master_seed, digest)

        outputs = run_experiment(
            list(cfg.objects), sampler_cfg, factory,
            on_chain=persist, timestamper=timestamper,
        )
        all_outputs.extend(outputs)
        for out in outputs:
            status = "ok" if out.complete else f"FAILED ({out.failure})"
            extra = (
                f" accept={out.accept_count}/{sampler_cfg.iterations}"
                if out.accept_count is not None else ""
            )
            print(
                f"  {method}/{out.object} chain {out.chain_id}: "
                f"{len(out.samples)} samples{extra} {status}"
            )

    groups = _group_outputs(all_outputs)
    _emit_diagnostics(groups, out_dir, print)
    _emit_strips(groups, out_dir, print)

    references = _references_for(cfg, cfg.objects)
    if references is not None:
        report = build_alignment_report(
            all_outputs, references, hue_metric=cfg.hue_metric, burn_in=cfg.burn_in
        )
        if report.rows:
            export_report(report, out_dir / "report.csv", out_dir / "report.txt")
            _write_curves(report, out_dir)
            print(f"  report: {out_dir / 'report.csv'}")
    else:
        print("  report: skipped (no reference distribution available)")
    print(f"done: logs in {log_dir}")
    return 0


def _read_log_outputs(log_dir: Path) -> list[ChainOutput]:
    paths = sorted(log_dir.glob("*.jsonl"))
    if not paths:
        raise ColorElicitError(f"no chain logs (*.jsonl) found in {log_dir}")
    outputs = []
    for path in paths:
        header, records = read_chain_log(path)
        outputs.append(output_from_log(header, records))
    return outputs


def cmd_diagnose(args: argparse.Namespace) -> int:
    log_dir = Path(args.logs)
    outputs = _read_log_outputs(log_dir)
    groups = _group_outputs(outputs)
    out_dir = Path(args.out) if args.out else log_dir.parent
    traces, skipped = _rhat_traces(groups)
    if not traces and skipped:
        obj, method, reason = skipped[0]
        raise ColorElicitError(
            f"cannot diagnose {method}/{obj}: {reason}; the Gelman-Rubin "
            "diagnostic requires at least 2 chains"
        )
    _emit_diagnostics(groups, out_dir, print)
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    log_dir = Path(args.logs)
    outputs = _read_log_outputs(log_dir)
    objects = sorted({o.object for o in outputs})
    if args.reference is None:
        raise MissingReference(
            "report needs --reference (a histogram file or directory)"
        )
    references = _load_references(Path(args.reference), objects)
    report = build_alignment_report(
        outputs, references, hue_metric=args.hue_metric, burn_in=args.burn_in
    )
    if not report.rows:
        raise ColorElicitError("no complete chains with samples to report on")
    out_dir = Path(args.out) if args.out else log_dir.parent
    csv_path = export_report(report, out_dir / "report.csv", out_dir / "report.txt")
    _write_curves(report, out_dir)
    print(f"report written: {csv_path}")
    return 0


def cmd_render(args: argparse.Namespace) -> int:
    log_dir = Path(args.logs)
    outputs = _read_log_outputs(log_dir)
    groups = _group_outputs(outputs)
    out_dir = Path(args.out) if args.out else log_dir.parent
    _emit_strips(groups, out_dir, print)
    traces, _ = _rhat_traces(groups)
    for (obj, method), trace in traces.items():
        path = out_dir / "figures" / f"rhat_{method}_{object_slug(obj)}.png"
        render_rhat_trace({f"{obj} ({method})": trace}, path)
        print(f"  rhat figure {method}/{obj}: {path}")
    for (obj, method), chains in sorted(groups.items()):
        samples = [c for chain in chains for c in chain.samples]
        if not samples:
            continue
        path = out_dir / "figures" / f"scatter_{method}_{object_slug(obj)}.png"
        render_scatter_kde(samples, path, projection=tuple(args.projection))
        print(f"  scatter {method}/{obj}: {path}")
    return 0


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.sampler = dataclasses.replace(cfg.sampler, master_seed=args.seed)
    if args.method:
        cfg.method = args.method
    if args.object:
        cfg.objects = tuple(args.object)
    if args.reference:
        cfg.reference_path = Path(args.reference)
    if args.hue_metric:
        cfg.hue_metric = args.hue_metric
    if args.burn_in is not None:
        cfg.burn_in = args.burn_in
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="colorelicit",
        description=(
            "Recover color distributions from black-box respondents via "
            "direct prompting, direct sampling, pairwise-choice MCMC, and "
            "Gibbs sampling, with convergence and alignment diagnostics."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute an experiment from a config file")
    run.add_argument("--config", required=True, help="YAML run configuration")
    run.add_argument("--seed", type=int, default=None, help="override the master seed")
    run.add_argument("--out", default=None, help="output directory (overrides config)")
    run.add_argument(
        "--method", default=None,
        choices=["direct_prompting", "direct_sampling", "mcmc", "gibbs", "all"],
        help="override the configured method",
    )
    run.add_argument(
        "--object", action="append", default=None,
        help="override configured objects (repeatable)",
    )
    run.add_argument("--reference", default=None, help="reference histogram file or directory")
    run.add_argument("--hue-metric", dest="hue_metric", choices=["linear", "circular"], default=None)
    run.add_argument("--burn-in", dest="burn_in", type=int, default=None)
    run.add_argument(
        "--replay-from", default=None,
        help="replay respondent answers from existing logs in this directory",
    )
    run.set_defaults(func=cmd_run)

    diagnose = sub.add_parser("diagnose", help="compute convergence traces from logs")
    diagnose.add_argument("--logs", required=True, help="directory of chain logs")
    diagnose.add_argument("--out", default=None, help="output directory")
    diagnose.set_defaults(func=cmd_diagnose)

    report = sub.add_parser("report", help="compute alignment against a reference")
    report.add_argument("--logs", required=True, help="directory of chain logs")
    report.add_argument("--reference", default=None, help="reference histogram file or directory")
    report.add_argument("--out", default=None, help="output directory")
    report.add_argument("--hue-metric", dest="hue_metric", choices=["linear", "circular"], default="linear")
    report.add_argument("--burn-in", dest="burn_in", type=int, default=0)
    report.set_defaults(func=cmd_report)

    render = sub.add_parser("render", help="produce figures from logs")
    render.add_argument("--logs", required=True, help="directory of chain logs")
    render.add_argument("--out", default=None, help="output directory")
    render.add_argument(
        "--projection", nargs=2, default=("h", "s"), metavar=("DIM", "DIM"),
        help="scatter/KDE dimension pair (h s l)",
    )
    render.set_defaults(func=cmd_render)
    return parser


def cli_main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handler: Callable[[argparse.Namespace], int] = args.func
    try:
        return handler(args)
    except ColorElicitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
