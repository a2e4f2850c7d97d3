"""Command-line entry point: ``nwise <subcommand> ...``.

Exit codes: 0 success, 1 validation failure, 2 numerical tolerance breach,
3 I/O failure.  Failures print one JSON object on stderr.
"""
from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import __version__
from .dynamics import PropagatorOptions
from .errors import NumericalError, NwiseError, UsageError
from .io import (TimeSeriesRecord, build_report, emit_timeseries, format_real, parse_scenario, report_path,
                 write_report, write_text)
from .protocols import CoolingScenario, GhzScenario, cooling_records, run_cooling, run_ghz
from .sampling import random_static_config
from .subspace import label_table, static_spectrum
from .transform import CLOSED_FORM_NOTE, ORDERS, chain_unitary

DEFAULT_TOL = {"compare": 1e-7, "verify-transform": 1e-10}


class ToleranceBreach(NumericalError):
    pass


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nwise", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, scenario=True):
        if scenario:
            sp.add_argument("--scenario", required=True, help="YAML scenario file")
        sp.add_argument("--out", help="output table; a <out>.report.json report is written next to it")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--tol", type=float, default=None)
        sp.add_argument("--steps-per-period", type=int, default=256)
        sp.add_argument("--method", choices=("midpoint-exponential", "rk4"), default="midpoint-exponential")
        sp.add_argument("--timing", action="store_true", help="include wall-clock time in the report")

    for name in ("run-ghz", "run-cooling"):
        sp = sub.add_parser(name)
        common(sp)
        sp.add_argument("--oracle", action="store_true", help="cross-check against the dense oracle")

    sp = sub.add_parser("spectrum")
    common(sp)
    sp.add_argument("--at", type=float, default=None, help="time at which to diagonalize (default t0)")

    sp = sub.add_parser("verify-transform")
    common(sp, scenario=False)
    sp.add_argument("--scenario", help="check this scenario on its time grid instead of random draws")
    sp.add_argument("--n", type=int)
    sp.add_argument("--draws", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--order", choices=ORDERS, default="forward")
    sp.add_argument("--at", type=float, default=0.0)

    sp = sub.add_parser("compare")
    common(sp)
    return p


def _options(args) -> PropagatorOptions:
    if args.steps_per_period < 1:
        raise UsageError("--steps-per-period must be >= 1")
    return PropagatorOptions(method=args.method, steps_per_period=args.steps_per_period)


def _engine(opts: PropagatorOptions) -> dict:
    return {"method": opts.method, "steps_per_period": opts.steps_per_period, "norm_tol": opts.norm_tol}


def _finish(args, command, echo, engine, results, records=None, table=None, started=None):
    if records is not None and args.out:
        results["display_clamps"] = emit_timeseries(records, args.format, args.out)
    if table is not None:
        text = _render_table(*table)
        if args.out:
            write_text(args.out, text)
        else:
            sys.stdout.write(text)
    if args.timing and started is not None:
        results["wall_clock_seconds"] = time.perf_counter() - started
    report = build_report(command, echo, engine, results)
    if args.out:
        write_report(report_path(args.out), report)
    return report


def _render_table(cols, rows, fmt):
    def cell(x):
        return format_real(x) if isinstance(x, float) else str(x)

    if fmt == "json":
        return json.dumps([dict(zip(cols, r)) for r in rows], indent=1) + "\n"
    return "\n".join([",".join(cols)] + [",".join(cell(x) for x in r) for r in rows]) + "\n"


def cmd_run_ghz(args) -> int:
    started = time.perf_counter()
    scenario = parse_scenario(args.scenario)
    if not isinstance(scenario.protocol, GhzScenario):
        raise UsageError("run-ghz needs a scenario with protocol kind 'ghz'")
    opts = _options(args)
    res = run_ghz(scenario.protocol, opts, oracle=args.oracle)
    results = res.summary()
    _finish(args, "run-ghz", scenario.echo(), _engine(opts), results, res.records(), started=started)
    _print_summary(results)
    tol = args.tol if args.tol is not None else DEFAULT_TOL["compare"]
    if res.oracle_gap is not None and res.oracle_gap > tol:
        raise ToleranceBreach(f"oracle gap {res.oracle_gap:.3e} exceeds --tol {tol:.1e}")
    return 0


def cmd_run_cooling(args) -> int:
    started = time.perf_counter()
    scenario = parse_scenario(args.scenario)
    if not isinstance(scenario.protocol, CoolingScenario):
        raise UsageError("run-cooling needs a scenario with protocol kind 'cooling'")
    opts = _options(args)
    rep = run_cooling(scenario.protocol, opts, oracle=args.oracle)
    results = rep.to_dict()
    breach = None
    if rep.oracle is not None:
        tol = args.tol if args.tol is not None else DEFAULT_TOL["compare"]
        gap = abs(rep.oracle["success_probability"] - rep.success_probability)
        if rep.conditional_fidelity is not None and rep.oracle["conditional_fidelity"] is not None:
            gap = max(gap, abs(rep.oracle["conditional_fidelity"] - rep.conditional_fidelity))
        results["oracle"]["max_gap"] = gap
        if gap > tol:
            breach = f"oracle gap {gap:.3e} exceeds --tol {tol:.1e}"
    records = cooling_records(scenario.protocol, opts) if args.out else None
    _finish(args, "run-cooling", scenario.echo(), _engine(opts), results, records, started=started)
    _print_summary({k: results[k] for k in ("success_probability", "conditional_fidelity",
                                            "resonant_labels", "resonance_mismatch", "max_leakage")})
    if breach:
        raise ToleranceBreach(breach)
    return 0


def cmd_spectrum(args) -> int:
    started = time.perf_counter()
    scenario = parse_scenario(args.scenario)
    cfg = scenario.config
    t = cfg.t0 if args.at is None else args.at
    pairs = static_spectrum(cfg, t)
    cols = ["label", "level", "energy", "state_a", "state_b", "re_a", "im_a", "re_b", "im_b"]
    rows = []
    n = cfg.n
    for j, e in enumerate(pairs):
        a, b = e.amplitudes
        rows.append([str(e.label), "upper" if j % 2 == 0 else "lower", e.value,
                     format(e.indices[0], f"0{n}b"), format(e.indices[1], f"0{n}b"),
                     a.real, a.imag, b.real, b.imag])
    results = {"t": t, "eigenvalue_sum": float(sum(e.value for e in pairs)),
               "eigenpairs": [dict(zip(cols, r)) for r in rows]}
    _finish(args, "spectrum", scenario.echo(), {"t": t}, results, table=(cols, rows, args.format), started=started)
    return 0


def _block_mismatch(cfg, t, ht) -> float:
    from .oracle import extract_blocks

    omega, bx, by, c = label_table(cfg.n).fields_at(cfg.fields, cfg.couplings, t)
    expect = np.empty((len(omega), 2, 2), dtype=complex)
    expect[:, 0, 0] = c + omega
    expect[:, 1, 1] = c - omega
    expect[:, 0, 1] = bx - 1j * by
    expect[:, 1, 0] = bx + 1j * by
    return float(np.abs(extract_blocks(ht) - expect).max())


def cmd_verify_transform(args) -> int:
    from .oracle import dense_hamiltonian, verify_block_structure

    started = time.perf_counter()
    tol = args.tol if args.tol is not None else DEFAULT_TOL["verify-transform"]
    if args.scenario:
        parsed = parse_scenario(args.scenario)
        cfg0 = parsed.config
        if args.n is not None and args.n != cfg0.n:
            raise UsageError(f"--n {args.n} disagrees with the scenario's n={cfg0.n}")
        cases = [(cfg0, float(t)) for t in cfg0.times]
        echo = parsed.echo()
    else:
        if args.n is None:
            raise UsageError("verify-transform needs --n or --scenario")
        if args.draws < 1:
            raise UsageError("--draws must be >= 1")
        rng = np.random.default_rng(args.seed)
        cases = [(random_static_config(args.n, rng), args.at) for _ in range(args.draws)]
        echo = {"n": args.n, "draws": args.draws, "seed": args.seed, "at": args.at}
    n = cases[0][0].n
    chain = chain_unitary(n, args.order)
    if chain.dense is None:
        raise UsageError(f"verify-transform builds dense matrices and needs n <= 12, got {n}")
    u = chain.dense
    cols = ["case", "t", "max_commutator", "off_block", "block_mismatch"]
    rows = []
    for i, (cfg, t) in enumerate(cases):
        rep = verify_block_structure(cfg, t, chain)
        ht = u.conj().T @ dense_hamiltonian(cfg, t) @ u
        rows.append([i, float(t), max(rep.commutator_residuals.values()), rep.off_block,
                     _block_mismatch(cfg, t, ht)])
    worst = max(max(r[2:]) for r in rows)
    results = {"order": args.order, "tol": tol, "max_residual": worst, "passed": worst < tol,
               "note": CLOSED_FORM_NOTE, "cases": [dict(zip(cols, r)) for r in rows]}
    _finish(args, "verify-transform", echo, {"order": args.order}, results,
            table=(cols, rows, args.format), started=started)
    if worst >= tol:
        raise ToleranceBreach(f"block-structure residual {worst:.3e} exceeds --tol {tol:.1e} "
                              f"with {args.order} chain ordering")
    return 0


def cmd_compare(args) -> int:
    from .oracle import compare

    started = time.perf_counter()
    scenario = parse_scenario(args.scenario)
    opts = _options(args)
    tol = args.tol if args.tol is not None else DEFAULT_TOL["compare"]
    rep = compare(scenario.config, opts=opts)
    records = [TimeSeriesRecord(t=float(t), observables={"infidelity_gap": float(g)})
               for t, g in zip(rep.times, rep.gaps)]
    results = {"max_gap": rep.max_gap, "tol": tol, "passed": rep.max_gap < tol, "refine": rep.refine,
               "sub_resolution": rep.sub_resolution, "components": rep.components}
    _finish(args, "compare", scenario.echo(), _engine(opts), results, records, started=started)
    _print_summary({k: results[k] for k in ("max_gap", "sub_resolution", "passed")})
    if rep.max_gap >= tol:
        raise ToleranceBreach(f"engine/oracle gap {rep.max_gap:.3e} exceeds --tol {tol:.1e}"
                              + (" (grid below resolution)" if rep.sub_resolution else ""))
    return 0


def _print_summary(d: dict):
    sys.stdout.write(json.dumps(d, sort_keys=True, default=float) + "\n")


COMMANDS = {
    "run-ghz": cmd_run_ghz,
    "run-cooling": cmd_run_cooling,
    "spectrum": cmd_spectrum,
    "verify-transform": cmd_verify_transform,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return COMMANDS[args.command](args)
    except NwiseError as exc:
        err = {"error": type(exc).__name__, "message": str(exc), "exit_code": exc.exit_code}
        sys.stderr.write(json.dumps(err) + "\n")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
