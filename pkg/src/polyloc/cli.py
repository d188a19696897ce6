"""Command-line entry point: reproducible, scriptable runs of every study.

Every subcommand is a pure function of its flags plus the master seed; there
is no wall-clock or environment dependence in the outputs.  ``--canonical``
strips the timing field so reruns can be compared byte for byte.

Exit codes: 0 success, 1 configuration or precondition error, 2 partial
per-trial failures (or a failed switch detection), 3 invariant breach.
"""

from __future__ import annotations

import argparse
import csv
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict

import numpy as np

from .experiments import (
    TrialConfig,
    TrialRecord,
    endpoint_distribution_test,
    run_one_trial,
    summarize_localization,
    w_equals_z1_frequency,
)
from .fields import constant_field, modified_field_stats, order_statistics, sample_pareto_field, seed_token
from .lattice import CapacityError, ball
from .oracle import PATH_CAP, compare_dp_vs_oracle
from .paths import EventClassifier, sample_path_batch
from .polymer import WalkKernel, endpoint_law, forward_recursion, make_kernel, uniform_kernel
from .scenario import ScenarioError, SwitchNotFoundError, run_switch_study
from .serialize import canonical_json, csv_cell, float_repr


class CliError(Exception):
    """Configuration problem; rendered as one diagnostic line, exit code 1."""


def parse_kernel(spec: str, d: int) -> WalkKernel:
    if spec == "uniform":
        return uniform_kernel(d)
    parts = spec.split(",")
    steps = [tuple(r) for r in ball(d, 1).steps()]
    if len(parts) != len(steps):
        raise CliError(
            f"kernel for d={d} needs {len(steps)} comma-separated weights in the "
            f"step order {steps} (or 'uniform'), got {len(parts)}"
        )
    try:
        weights = {s: float(p) for s, p in zip(steps, parts)}
    except ValueError as err:
        raise CliError(f"bad kernel weight: {err}") from None
    try:
        return make_kernel(weights)
    except ValueError as err:
        raise CliError(f"invalid kernel: {err}") from None


def _out_stream(path: str | None):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w"), True


def _write_lines(path: str | None, lines: list[str]) -> None:
    stream, close = _out_stream(path)
    try:
        for line in lines:
            stream.write(line + "\n")
    finally:
        if close:
            stream.close()


def _records_to_csv_lines(dicts: list[dict]) -> list[str]:
    if not dicts:
        return []
    header = list(dicts[0].keys())
    lines = [",".join(header)]
    for row in dicts:
        lines.append(",".join(csv_cell(row[k]) for k in header))
    return lines


def write_histogram_csv(path: str, xs, bins: int = 50, lo: float = -1.0, hi: float = 1.0) -> None:
    counts, edges = np.histogram(np.asarray(xs, dtype=float), bins=bins, range=(lo, hi))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_left", "bin_right", "count"])
        for i in range(bins):
            writer.writerow([float_repr(edges[i]), float_repr(edges[i + 1]), int(counts[i])])


def _safe_trial(args) -> tuple[int, TrialRecord | None, str | None]:
    config, i = args
    try:
        return i, run_one_trial(config, i), None
    except Exception as err:  # per-trial isolation: batch must not abort
        return i, None, f"{type(err).__name__}: {err}"


def cmd_simulate(args) -> int:
    kernel = parse_kernel(args.kernel, args.d)
    try:
        config = TrialConfig(
            alpha=args.alpha,
            d=args.d,
            N=args.N,
            trials=args.trials,
            master_seed=args.seed,
            kernel=kernel,
            with_comparator=not args.no_comparator,
        )
        ball(args.d, args.N)  # capacity check up front
    except (ValueError, CapacityError) as err:
        raise CliError(str(err)) from None
    if args.histogram_out is not None and args.d != 1:
        raise CliError("histogram output is defined for d=1 (endpoint over [-1, 1])")
    if args.summary_out is not None and args.d != 1:
        raise CliError("summary output is defined for d=1")

    jobs = [(config, i) for i in range(config.trials)]
    if args.threads > 1:
        with ProcessPoolExecutor(max_workers=args.threads) as pool:
            results = list(pool.map(_safe_trial, jobs, chunksize=max(1, len(jobs) // (args.threads * 8))))
    else:
        results = [_safe_trial(j) for j in jobs]

    records = [r for _, r, _ in results if r is not None]
    failures = [(i, e) for i, _, e in results if e is not None]

    dicts: list[dict] = []
    for i, rec, err in results:
        if rec is not None:
            dicts.append(rec.to_dict(canonical=args.canonical))
        else:
            dicts.append({"trial": i, "error": err})
    if args.format == "json-lines":
        lines = [canonical_json(d) for d in dicts]
    else:
        lines = _records_to_csv_lines([d for d in dicts if "error" not in d])
    _write_lines(args.out, lines)

    if args.histogram_out is not None:
        write_histogram_csv(args.histogram_out, [r.w_over_N[0] for r in records])
    if args.summary_out is not None:
        summary = {}
        if len(records) >= 100:
            dist = endpoint_distribution_test(records, threshold=args.ks_threshold)
            freq = w_equals_z1_frequency(records)
            summary["endpoint_ks"] = {
                "ks_distance": dist.ks_distance,
                "n_used": dist.n_used,
                "n_excluded": dist.n_excluded,
                "threshold": dist.threshold,
                "passed": dist.passed,
            }
            summary["mode_frequency"] = {
                "fraction_z1": freq.fraction_z1,
                "ci_z1": list(freq.ci_z1),
                "fraction_top_two": freq.fraction_top_two,
                "ci_top_two": list(freq.ci_top_two),
                "n": freq.n,
            }
        loc = summarize_localization(records)
        summary["localization"] = asdict(loc)
        _write_lines(args.summary_out, [canonical_json(summary)])

    for i, err in failures:
        print(f"trial {i} failed: {err}", file=sys.stderr)
    return 2 if failures else 0


def cmd_oracle_check(args) -> int:
    kernel = parse_kernel(args.kernel, args.d)
    n_paths = (2 * args.d + 1) ** args.N
    if n_paths > PATH_CAP:
        raise CliError(
            f"(2d+1)^N = {n_paths} paths exceeds the enumeration cap {PATH_CAP}"
        )
    worst = 0.0
    lines = []
    for i in range(args.seeds):
        token = seed_token(args.seed, i)
        field = sample_pareto_field(token, args.alpha, ball(args.d, args.N))
        cmp = compare_dp_vs_oracle(field, kernel, args.N)
        worst = max(worst, cmp.worst)
        lines.append(
            canonical_json(
                {
                    "seed_index": i,
                    "seed": token,
                    "max_log_p_diff": cmp.max_log_p_diff,
                    "logU_diff": cmp.logU_diff,
                }
            )
        )
    lines.append(canonical_json({"worst": worst, "tolerance": args.tolerance, "seeds": args.seeds}))
    _write_lines(args.out, lines)
    return 0 if worst < args.tolerance else 3


def _path_stats_trial(args_tuple) -> dict:
    (alpha, d, N, samples, master_seed, kernel, zero_potential, index) = args_tuple
    token = seed_token(master_seed, index, 0)
    rng = np.random.default_rng(np.random.SeedSequence([master_seed, index, 1]))
    b = ball(d, N)
    if zero_potential:
        field = constant_field(d, N, 0.0, alpha=alpha)
    else:
        field = sample_pareto_field(token, alpha, b)
    fronts = forward_recursion(field, kernel, N)
    positions, _ = sample_path_batch(fronts, field, kernel, rng, samples)
    if zero_potential:
        hits = int(np.count_nonzero(positions[:, -1] == b.origin_index))
        nesting_ok = True
    else:
        law = endpoint_law(fronts)
        stats = order_statistics(field)
        modified = modified_field_stats(field)
        clf = EventClassifier(field, stats, modified, law)
        hits = 0
        nesting_ok = True
        for row in positions:
            flags = clf._classify_indices(row)
            if (
                (flags.in_tilde_w1 and not flags.in_w1)
                or (flags.in_tilde_w2 and not flags.in_w2)
                or (flags.in_w1 and not flags.in_a1)
                or (flags.in_w2 and not flags.in_a2)
            ):
                nesting_ok = False
            if flags.in_c:
                hits += 1
    from .stats import wilson_interval

    lo, hi = wilson_interval(hits, samples)
    return {
        "trial": index,
        "seed": token,
        "event": "endpoint_return" if zero_potential else "reach_and_stick",
        "estimate": hits / samples,
        "ci_low": lo,
        "ci_high": hi,
        "samples": samples,
        "nesting_ok": nesting_ok,
    }


def cmd_path_stats(args) -> int:
    kernel = parse_kernel(args.kernel, args.d)
    if args.samples < 100:
        raise CliError(f"samples must be >= 100, got {args.samples}")
    if args.trials < 1:
        raise CliError(f"trials must be >= 1, got {args.trials}")
    if args.N < 3 and not args.zero_potential:
        raise CliError("event classification needs N >= 3")
    jobs = [
        (args.alpha, args.d, args.N, args.samples, args.seed, kernel, args.zero_potential, i)
        for i in range(args.trials)
    ]
    if args.threads > 1:
        with ProcessPoolExecutor(max_workers=args.threads) as pool:
            rows = list(pool.map(_path_stats_trial, jobs))
    else:
        rows = [_path_stats_trial(j) for j in jobs]

    estimates = [r["estimate"] for r in rows]
    summary = {
        "summary": {
            "trials": args.trials,
            "samples": args.samples,
            "median_estimate": float(np.median(estimates)),
            "min_estimate": float(min(estimates)),
            "max_estimate": float(max(estimates)),
        }
    }
    _write_lines(args.out, [canonical_json(r) for r in rows] + [canonical_json(summary)])
    if not all(r["nesting_ok"] for r in rows):
        print("error: event nesting violated on a sampled path", file=sys.stderr)
        return 3
    return 0


def cmd_scenario(args) -> int:
    kernel = parse_kernel(args.kernel, 1)
    try:
        study = run_switch_study(
            n=args.n,
            epsilon=args.epsilon,
            eta=args.eta,
            kernel=kernel,
            alpha=args.alpha,
        )
    except ScenarioError as err:
        raise CliError(str(err)) from None
    except SwitchNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    result = study.result
    if args.scan_out is not None:
        with open(args.scan_out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["N", "psi_x", "psi_y", "psi_gap", "z1", "z2", "predicted_w", "dp_w"])
            for row in result.scan:
                writer.writerow(
                    [
                        row.N,
                        float_repr(row.psi_x),
                        float_repr(row.psi_y),
                        float_repr(row.psi_gap),
                        row.z1,
                        row.z2,
                        row.predicted_w,
                        "" if row.dp_w is None else row.dp_w,
                    ]
                )
    out = {
        "n": args.n,
        "alpha": args.alpha,
        "epsilon_used": study.epsilon_used,
        "eta": result.scenario.eta,
        "attempts": study.attempts,
        "N_star": result.N_star,
        "window": [11 * args.n / 2, 13 * args.n / 2],
        "w_at_N_star": list(result.w_at_N_star.coords),
        "z1_at_N_star": list(result.z1_at_N_star.coords),
        "z2_at_N_star": list(result.z2_at_N_star.coords),
        "w_is_z2": result.w_is_z2,
        "clauses": [{"name": c.name, "ok": c.ok} for c in result.scenario.clause_checks],
    }
    _write_lines(args.out, [canonical_json(out)])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polyloc",
        description="Quenched lattice polymer laboratory: exact endpoint laws, "
        "path sampling, and localization studies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_d=True, with_seed=True):
        p.add_argument("--alpha", type=float, default=2.0, help="Pareto shape parameter")
        if with_d:
            p.add_argument("--d", type=int, default=1, help="lattice dimension (1, 2, or 3)")
        if with_seed:
            p.add_argument("--seed", type=int, required=True, help="master seed (required; no wall-clock default)")
        p.add_argument("--kernel", default="uniform", help="'uniform' or comma-separated step weights in lexicographic step order (d=1: left,hold,right)")
        p.add_argument("--out", default=None, help="output path (default: stdout)")

    p = sub.add_parser("simulate", help="disorder Monte Carlo of the endpoint law")
    common(p)
    p.add_argument("--N", type=int, required=True, help="polymer length / horizon")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--format", choices=["json-lines", "csv"], default="json-lines")
    p.add_argument("--canonical", action="store_true", help="strip timing fields for byte-stable output")
    p.add_argument("--no-comparator", action="store_true", help="skip the d=1 reach-and-stick comparator")
    p.add_argument("--histogram-out", default=None, help="write the w/N histogram CSV here")
    p.add_argument("--summary-out", default=None, help="write the batch summary JSON here")
    p.add_argument("--ks-threshold", type=float, default=0.05)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("oracle-check", help="compare the DP against full path enumeration")
    common(p)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--seeds", type=int, default=20, help="number of seeded random fields")
    p.add_argument("--tolerance", type=float, default=1e-10)
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("path-stats", help="Monte Carlo path-event probabilities per field")
    common(p)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--trials", type=int, default=20, help="number of fields")
    p.add_argument("--samples", type=int, default=10000, help="paths per field (>= 100)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--zero-potential", action="store_true", help="debug: constant zero potential, event {S_N = 0}")
    p.set_defaults(func=cmd_path_stats)

    p = sub.add_parser("scenario", help="deterministic runner-up switch scenario (d=1)")
    common(p, with_d=False, with_seed=False)
    p.add_argument("--n", type=int, required=True, help="construction scale (spikes at n and 3n)")
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--eta", type=float, default=None, help="interior-sum margin (default: derived from alpha and the kernel)")
    p.add_argument("--scan-out", default=None, help="write the horizon scan table CSV here")
    p.set_defaults(func=cmd_scenario)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return 1 if err.code not in (0, None) else 0
    try:
        return args.func(args)
    except CliError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except (ValueError, CapacityError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
