"""Command-line entry point: ``eapm {w2-curves,correlator-region,attacks,verify}``.

Every command writes a data file (CSV by default) whose bytes depend only on
the arguments, including ``--seed``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Callable, Sequence

import numpy as np

from . import classical, quantum, schemes, seesaw
from .attacks import ObservedStatistics, min_entropy_attack, vn_entropy_attack
from .errors import (
    EapmError,
    Infeasible,
    IncompleteChannel,
    InfeasibleObservation,
    NumericalFailure,
    OptimizationFailure,
    SamplingExhausted,
    VerificationFailed,
)

DEFAULT_SEED = 20240601
EXIT_OK, EXIT_VERIFY, EXIT_SOLVER, EXIT_IO = 0, 1, 2, 3
SOLVER_ERRORS = (NumericalFailure, Infeasible, InfeasibleObservation, OptimizationFailure, SamplingExhausted)

def omega_grid(start: float, stop: float, step: float) -> list[float]:
    if not step > 0:
        raise argparse.ArgumentTypeError("--omega-step must be positive")
    if stop < start:
        raise argparse.ArgumentTypeError("--omega-stop must not be below --omega-start")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(count)]


def point_seeds(seed: int, count: int) -> list[int]:
    """Independent per-grid-point seeds, fixed by the master seed alone."""
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(count)]


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return str(value)


def render(rows: list[dict], columns: Sequence[str], kind: str) -> str:
    if kind == "json":
        def value(v):
            return float(fmt(v)) if isinstance(v, (float, np.floating)) else v

        return json.dumps([{c: value(r.get(c)) for c in columns} for r in rows], indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def emit(text: str, path: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def run_grid(fn: Callable, items: Sequence, jobs: int) -> list:
    """Evaluate ``fn`` on every item; results keep the order of ``items``."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def seesaw_config(args, seed: int) -> seesaw.SeesawConfig:
    return seesaw.SeesawConfig(
        restarts=args.restarts, rng_seed=seed, trace=sys.stderr if args.verbose else None
    )


# ---------------------------------------------------------------------------


def _curve_row(item, args) -> dict:
    omega, seed = item
    row: dict = {"omega": omega}
    kinds = args.scheme or ["qc", "qubit", "qutrit"]
    if "qc" in kinds:
        row["qc"] = schemes.qc_optimal_w2(omega)
    for kind in ("qubit", "qutrit"):
        if kind in kinds:
            r, w = schemes.optimize_r(kind, omega)
            row[f"{kind}_r"], row[kind] = r, w
    if "seesaw" in kinds:
        row["seesaw"] = seesaw.seesaw_w2(omega, args.dim, seesaw_config(args, seed)).value
    return row


def cmd_w2_curves(args) -> int:
    grid = omega_grid(args.omega_start, args.omega_stop, args.omega_step)
    rows = run_grid(partial(_curve_row, args=args), list(zip(grid, point_seeds(args.seed, len(grid)))), args.jobs)
    kinds = args.scheme or ["qc", "qubit", "qutrit"]
    cols = ["omega"]
    for k in ("qc", "qubit", "qutrit", "seesaw"):
        if k in kinds:
            cols += [f"{k}_r", k] if k in ("qubit", "qutrit") else [k]
    emit(render(rows, cols, args.format), args.out)
    return EXIT_OK


def _e1_max(item, args) -> float:
    e0, seed = item
    return seesaw.seesaw_correlator_boundary(args.omega, e0, args.dim, seesaw_config(args, seed), "max")


def cmd_correlator_region(args) -> int:
    e0s = [round(v, 12) for v in np.linspace(-1.0, 1.0, args.points)]
    # min E1(e0) = -max E1(-e0), so only maxima are searched, over the grid and its mirror
    targets = sorted({e for e in e0s} | {round(-e, 12) for e in e0s})
    seeds = point_seeds(args.seed, len(targets))
    maxima = dict(zip(targets, run_grid(partial(_e1_max, args=args), list(zip(targets, seeds)), args.jobs)))
    rows = []
    for e0 in e0s:
        pm_max, pm_min = schemes.pm_ellipse_max_correlator(args.omega, e0)
        rows.append(
            {
                "e0": e0,
                "e1_pm_min": pm_min,
                "e1_pm_max": pm_max,
                "e1_eapm_min": -maxima[round(-e0, 12)],
                "e1_eapm_max": maxima[e0],
            }
        )
    cols = ["e0", "e1_pm_min", "e1_pm_max", "e1_eapm_min", "e1_eapm_max"]
    emit(render(rows, cols, args.format), args.out)
    return EXIT_OK


def _attack_row(item, args, reference: dict) -> dict:
    omega, seed = item
    cfg = seesaw_config(args, seed)
    obs = ObservedStatistics(schemes.qc_optimal_w2(omega), omega)
    h_min, model = min_entropy_attack(obs, cfg, local_dim=args.dim)
    h_vn, _ = vn_entropy_attack(obs, cfg, local_dim=args.dim, starts=[model])
    return {
        "omega": omega,
        "w2_obs": obs.w2_obs,
        "h_min_classical_ref": reference.get(round(omega, 12)),
        "h_min_attack": h_min,
        "h_vn_attack": h_vn,
        "pg": 2.0 ** (-h_min),
        "restarts_used": cfg.restarts,
    }


def read_reference(path: str | None) -> dict:
    """Optional externally computed classical-side-information bounds (omega,h)."""
    if not path:
        return {}
    out = {}
    with open(path, encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            out[round(float(row["omega"]), 12)] = float(row["h"])
    return out


def cmd_attacks(args) -> int:
    if args.omega_start is None:
        grid = omega_grid(0.01, 0.10, 0.005) + omega_grid(0.30, 0.50, 0.01)
    else:
        grid = omega_grid(args.omega_start, args.omega_stop, args.omega_step)
    reference = read_reference(args.classical_ref)
    fn = partial(_attack_row, args=args, reference=reference)
    rows = run_grid(fn, list(zip(grid, point_seeds(args.seed, len(grid)))), args.jobs)
    cols = ["omega", "w2_obs", "h_min_classical_ref", "h_min_attack", "h_vn_attack", "pg", "restarts_used"]
    emit(render(rows, cols, args.format), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------


def load_kraus(path: str) -> quantum.KrausChannel:
    """Channel from JSON ``{"in_dim", "out_dim", "ops": [{"re": [[...]], "im": [[...]]}]}``."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    ops = tuple(np.asarray(o["re"], dtype=float) + 1j * np.asarray(o.get("im", 0.0), dtype=float) for o in data["ops"])
    return quantum.KrausChannel(ops, int(data["in_dim"]), int(data["out_dim"]))


def _check(name: str, ok: bool, detail: str, report: list) -> None:
    report.append({"check": name, "passed": bool(ok), "detail": detail})
    if not ok:
        raise VerificationFailed(f"{name}: {detail}")


def verify_suite(args) -> list[dict]:
    report: list[dict] = []
    if args.kraus:
        try:
            ch = load_kraus(args.kraus)
        except IncompleteChannel as exc:
            _check("IncompleteChannel", False, str(exc), report)
        else:
            _check("kraus_completeness", True, f"{len(ch.kraus_ops)} operators", report)
    omegas = [round(0.01 * k, 2) for k in range(1, 50)]
    worst = 0.0
    for n in (2, 3, 4):
        f = classical.transmission_functional(n)
        for w in omegas:
            v = classical.evaluate_strategy(classical.transmission_strategy(n, w), f)
            worst = max(worst, abs(v - (1 / n + w)), abs(v - classical.result1_bound(f, w)))
    _check("transmission_saturation", worst <= 1e-12, f"max deviation {worst:.2e}", report)
    worst = -np.inf
    for m, d in ((2, 2), (3, 2), (2, 3)):
        f = classical.rac_functional(m, d)
        for w in np.linspace(0.0, d ** (-m), 6):
            s = classical.rac_strategy(m, d, w)
            v = classical.evaluate_strategy(s, f)
            worst = max(worst, abs(v - (1 / d + (1 - 1 / d) * w)))
            _check("rac_below_bound", v <= classical.result1_bound(f, w) + 1e-12, f"(m,d)=({m},{d}) w={w}", report)
            _check("rac_energy", classical.check_energy(s, w), f"(m,d)=({m},{d}) w={w}", report)
    _check("rac_value", worst <= 1e-12, f"max deviation {worst:.2e}", report)
    worst = 0.0
    rng = np.random.default_rng(args.seed)
    for _ in range(25):
        w = float(rng.uniform(0.01, 0.49))
        for kind in ("qubit", "qutrit"):
            lo, hi = schemes.r_interval(kind, w)
            r = float(rng.uniform(lo, hi))
            sc = schemes.build_scheme(kind, w, r)
            w2, _ = quantum.helstrom(*sc.post_states)
            worst = max(worst, abs(w2 - schemes.closed_form(kind, w, r)))
            for v in schemes.scheme_vacuum_weights(sc):
                _check("scheme_energy", abs(v - (1 - w)) <= 1e-9, f"{kind} w={w} r={r} vacuum {v}", report)
    _check("closed_form_vs_helstrom", worst <= 1e-8, f"max deviation {worst:.2e}", report)
    for i, w in enumerate((0.1, 0.2, 0.3)):
        for d in (2, 3):
            best = seesaw.unitary_nogo_check(w, d, args.trials, args.seed + 10 * i + d)
            _check("unitary_nogo", best <= schemes.qc_optimal_w2(w) + 1e-9, f"w={w} d={d} max {best:.12f}", report)
    for d, kind in ((2, "qubit"), (3, "qutrit")):
        w = 0.2
        res = seesaw.seesaw_w2(w, d, seesaw_config(args, args.seed))
        ref = schemes.optimize_r(kind, w)[1]
        _check("seesaw_vs_closed_form", abs(res.value - ref) <= 1e-4, f"d={d} seesaw {res.value:.10f} vs {ref:.10f}", report)
    return report


def cmd_verify(args) -> int:
    report: list[dict] = []
    code = EXIT_OK
    try:
        report = verify_suite(args)
    except VerificationFailed as exc:
        report.append({"check": "FAILED", "passed": False, "detail": str(exc)})
        print(f"verification failed: {exc}", file=sys.stderr)
        code = EXIT_VERIFY
    cols = ["check", "passed", "detail"]
    emit(render(report, cols, args.format), args.out)
    return code


# ---------------------------------------------------------------------------


def _common_options(restarts: int = 20) -> argparse.ArgumentParser:
    # a fresh parent per subcommand: argparse shares parent actions, so
    # per-command defaults on a shared parent would leak across commands
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--restarts", type=int, default=restarts)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default="-", help="output path ('-' for stdout)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for grid points")
    common.add_argument("--verbose", action="store_true", help="line-delimited JSON solver traces on stderr")
    return common


def _grid_options(start=None, stop=None, step=None) -> argparse.ArgumentParser:
    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--omega-start", type=float, default=start)
    grid.add_argument("--omega-stop", type=float, default=stop)
    grid.add_argument("--omega-step", type=float, default=step)
    return grid


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="eapm", description="Energy-restricted prepare-and-measure computations")
    sub = p.add_subparsers(dest="command", required=True)

    curves_grid = _grid_options(0.01, 0.50, 0.01)
    c = sub.add_parser("w2-curves", parents=[_common_options(), curves_grid], help="optimal W2 against energy")
    c.add_argument("--scheme", nargs="+", choices=("qc", "qubit", "qutrit", "seesaw"))
    c.add_argument("--dim", type=int, default=3, help="local dimension for the seesaw column")
    c.set_defaults(func=cmd_w2_curves)

    c = sub.add_parser("correlator-region", parents=[_common_options()], help="(E0, E1) region boundaries")
    c.add_argument("--omega", type=float, default=0.2)
    c.add_argument("--points", type=int, default=41)
    c.add_argument("--dim", type=int, default=2)
    c.set_defaults(func=cmd_correlator_region)

    c = sub.add_parser("attacks", parents=[_common_options(), _grid_options()], help="entropy upper bounds from attacks")
    c.add_argument("--dim", type=int, default=3)
    c.add_argument("--classical-ref", help="CSV with columns omega,h of external lower bounds")
    c.set_defaults(func=cmd_attacks)

    c = sub.add_parser("verify", parents=[_common_options(restarts=5)], help="run the invariant suite")
    c.add_argument("--trials", type=int, default=2000, help="unitary-encoding samples per (omega, dim)")
    c.add_argument("--kraus", help="JSON Kraus set to validate as part of the suite")
    c.set_defaults(func=cmd_verify)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    if hasattr(args, "omega_start"):
        given = (args.omega_start, args.omega_stop, args.omega_step)
        if any(v is None for v in given) and any(v is not None for v in given):
            parser.error("--omega-start, --omega-stop and --omega-step must be given together")
        if given[0] is not None:
            try:
                omega_grid(*given)
            except argparse.ArgumentTypeError as exc:
                parser.error(str(exc))
    if getattr(args, "restarts", 1) < 1:
        parser.error("--restarts must be at least 1")
    try:
        return args.func(args)
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    except SOLVER_ERRORS as exc:
        print(f"solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except EapmError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VERIFY if isinstance(exc, VerificationFailed) else EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
