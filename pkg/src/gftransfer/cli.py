"""Command-line front end: run experiments, pretty-print tables, dump recoveries.

Config files are plain `key = value` lines (# comments allowed); keys mirror
ExperimentConfig:

    graph = er            # er | rs
    perturb = edges       # edges | nodes
    change = 10           # e (edges) or v (nodes)
    n = 100
    p = 0.15
    k = 8
    p_v = 0.15
    k_h = 2000
    k_c = 1000
    missing_prob = 0.3
    noise_var = 0.1
    trials = 1000
    seed = 0
    arma_l = 5
    arma_m = 2
    mse_scope = all       # all | missing
"""

from __future__ import annotations

import argparse
import sys

from .errors import GFTransferError
from .harness import (
    ExperimentConfig,
    dump_recovery,
    read_results,
    run_experiment,
    summarize_rows,
    write_results,
)

_INT_KEYS = {"n", "k", "change", "k_h", "k_c", "trials", "seed", "arma_l", "arma_m"}
_FLOAT_KEYS = {"p", "p_v", "missing_prob", "noise_var", "reg_alpha", "reg_beta"}
_KEY_MAP = {"graph": "graph_kind", "perturb": "perturb_kind", "seed": "master_seed"}


def parse_config(text: str, overrides: dict = None) -> ExperimentConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected `key = value`")
        key, value = (t.strip() for t in line.split("=", 1))
        if key in _INT_KEYS:
            values[_KEY_MAP.get(key, key)] = int(value)
        elif key in _FLOAT_KEYS:
            values[_KEY_MAP.get(key, key)] = float(value)
        else:
            values[_KEY_MAP.get(key, key)] = value
    values.update(overrides or {})
    return ExperimentConfig(**values)


def _load_config(args) -> ExperimentConfig:
    with open(args.config) as fh:
        text = fh.read()
    overrides = {}
    if getattr(args, "trials", None) is not None:
        overrides["trials"] = args.trials
    if getattr(args, "seed", None) is not None:
        overrides["master_seed"] = args.seed
    return parse_config(text, overrides)


def _cmd_run(args) -> int:
    cfg = _load_config(args)
    result = run_experiment(cfg, workers=args.workers)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_results(fh, [result])
    else:
        write_results(sys.stdout, [result])
    summary = result.summary()
    print(
        f"{cfg.graph_kind} {cfg.perturb_kind}={cfg.change}: "
        f"noisy={summary['mse_noisy']:.4e} armae={summary['mse_armae']:.4e} "
        f"drw={summary['mse_drw']:.4e} "
        f"({summary['trials_ok']} ok, {summary['trials_failed']} failed)",
        file=sys.stderr,
    )
    return 0


def format_table(summaries) -> str:
    header = f"{'graph':>6} {'perturb':>8} {'change':>6} {'noisy':>12} {'ARMAE':>12} {'ARMAE-DRW':>12} {'ok':>6} {'failed':>6}"
    lines = [header, "-" * len(header)]
    for s in summaries:
        lines.append(
            f"{s['graph']:>6} {s['perturb']:>8} {s['change']:>6} "
            f"{s['mse_noisy']:>12.4e} {s['mse_armae']:>12.4e} {s['mse_drw']:>12.4e} "
            f"{s['trials_ok']:>6} {s['trials_failed']:>6}"
        )
    return "\n".join(lines)


def _cmd_table(args) -> int:
    with open(args.infile) as fh:
        rows = read_results(fh)
    print(format_table(summarize_rows(rows)))
    return 0


def _cmd_dump(args) -> int:
    cfg = _load_config(args)
    with open(args.out, "w", newline="") as fh:
        dump_recovery(cfg, args.seed if args.seed is not None else 0, args.sample, fh)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="gftransfer")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a Monte Carlo experiment")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--trials", type=int)
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--out")
    p_run.add_argument("--workers", type=int, default=1)
    p_run.set_defaults(func=_cmd_run)

    p_table = sub.add_parser("table", help="aggregate a results CSV")
    p_table.add_argument("--in", dest="infile", required=True)
    p_table.set_defaults(func=_cmd_table)

    p_dump = sub.add_parser("dump", help="dump one recovered sample per node")
    p_dump.add_argument("--config", required=True)
    p_dump.add_argument("--seed", type=int, help="trial index within the master stream")
    p_dump.add_argument("--sample", type=int, required=True)
    p_dump.add_argument("--out", required=True)
    p_dump.set_defaults(func=_cmd_dump)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GFTransferError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
