"""Command line front end.

Subcommands: validate, eval, simulate, solve, sweep, gen. Machine output
(--format json) is byte-stable for fixed inputs; timing and other run-local
detail appear only in the human table format.

Exit codes: 0 success, 1 usage or unreadable input, 2 validation or
feasibility failure, 3 solver refusal (work ceiling exceeded).
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import acme as acme_mod
from . import reportio
from .evaluate import evaluate
from .griddp import DpRefusalError, GridError, dp_solve
from .model import (
    Assortment,
    EnumerationLimitError,
    FeasibilityError,
    ParseError,
    ValidationError,
    PROFILES,
    dump_assortment,
    dump_instance,
    feasible_profile_bound,
    generate_instance,
    load_assortment,
    load_instance,
    validate_assortment,
)
from .oracle import brute_force_patient_optimum, brute_force_revenue_optimum
from .simulate import estimate_probabilities
from .single_stage import solve_single_stage

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID = 2
EXIT_REFUSED = 3

METHODS = ("acme", "dp", "single-stage", "exact", "exact-patient", "exact-p1")


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; 2 is reserved for validation here
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _read(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _fmt(x: float) -> str:
    return format(float(x), ".6f")


def _placement_lines(placements) -> list[str]:
    if not placements:
        return ["  (empty assortment)"]
    rows = ["  product exposure stage"]
    for i, k, z in placements:
        rows.append(f"  {i + 1:7d} {k + 1:8d} {z + 1:5d}")
    return rows


def _finish(args, command: str, digest: str, results: dict, table_lines) -> int:
    if args.format == "json":
        text = reportio.dumps_report(reportio.make_report(command, digest, results))
    else:
        text = "\n".join(table_lines) + "\n"
    _emit(text, args.out)
    return EXIT_OK


def _add_common(p, assortment: bool) -> None:
    p.add_argument("instance", help="instance document (JSON file)")
    if assortment:
        p.add_argument("assortment", help="assortment document (JSON file)")
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.add_argument("-o", "--out", help="write output to this file instead of stdout")


def build_parser() -> _Parser:
    parser = _Parser(prog="cmnl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check documents and feasibility")
    p.add_argument("instance")
    p.add_argument("assortment", nargs="?", help="optional assortment to check")

    p = sub.add_parser("eval", help="closed-form evaluation of one assortment")
    _add_common(p, assortment=True)

    p = sub.add_parser("simulate", help="Monte Carlo check of purchase probabilities")
    _add_common(p, assortment=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)

    p = sub.add_parser("solve", help="optimize an assortment for the instance")
    _add_common(p, assortment=False)
    p.add_argument("--method", choices=METHODS, default="acme")
    p.add_argument("--rho", type=float, default=0.5, help="survival floor for the patient branch")
    p.add_argument("--epsilon", type=float, default=0.3, help="grid ratio minus one")
    p.add_argument("--ceiling", type=int, default=1_000_000,
                   help="profile-count refusal threshold for exact methods")
    p.add_argument("--max-cells", type=int, default=8_000_000)
    p.add_argument("--max-ops", type=float, default=2e10)
    p.add_argument("--save-assortment", help="also write the winner as a document")

    p = sub.add_parser("sweep", help="run the solver across several survival floors")
    _add_common(p, assortment=False)
    p.add_argument("--rhos", required=True, help="comma-separated floors, e.g. 0.25,0.5,0.75")
    p.add_argument("--epsilon", type=float, default=0.3)
    p.add_argument("--max-cells", type=int, default=8_000_000)
    p.add_argument("--max-ops", type=float, default=2e10)
    p.add_argument("--save-assortment", help="write the overall winner as a document")

    p = sub.add_parser("gen", help="deterministically generate a random instance")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n", type=int, required=True, help="number of products")
    p.add_argument("--m", type=int, required=True, help="number of stages")
    p.add_argument("--d", type=int, required=True, help="per-stage capacity")
    p.add_argument("--w", type=int, required=True, help="exposure cap per product")
    p.add_argument("--profile", choices=sorted(PROFILES), default="default")
    p.add_argument("-o", "--out", help="write the instance document here (default stdout)")
    return parser


def _cmd_validate(args) -> int:
    inst = load_instance(_read(args.instance))
    if args.assortment is None:
        print(f"instance ok: {inst.n} products, {inst.m} stages")
        return EXIT_OK
    a = load_assortment(_read(args.assortment))
    violations = validate_assortment(inst, a)
    if not violations:
        print(f"ok: {len(a)} placements, feasible")
        return EXIT_OK
    for v in violations:
        print(f"{v.kind}: {v.message}")
    return EXIT_INVALID


def _cmd_eval(args) -> int:
    inst_text = _read(args.instance)
    a_text = _read(args.assortment)
    inst = load_instance(inst_text)
    a = load_assortment(a_text)
    rep = evaluate(inst, a)

    lines = ["evaluation"]
    lines.append(f"  expected revenue       {_fmt(rep.expected_revenue)}")
    lines.append(f"  patience-free revenue  {_fmt(rep.patience_free_revenue)}")
    lines.append(f"  no-purchase prob       {_fmt(rep.no_purchase_prob)}")
    reach = " ".join(_fmt(x) for x in rep.per_stage_reachability)
    lines.append(f"  reachability by stage  {reach}")
    lines.append("  purchase probabilities (product x stage, nonzero rows)")
    for i in range(inst.n):
        row = rep.purchase_prob[i]
        if row.any():
            cells = " ".join(_fmt(x) for x in row)
            lines.append(f"    product {i + 1}: {cells}")
    digest = reportio.digest_inputs(inst_text, a_text)
    return _finish(args, "eval", digest, rep.to_results(), lines)


def _cmd_simulate(args) -> int:
    inst_text = _read(args.instance)
    a_text = _read(args.assortment)
    inst = load_instance(inst_text)
    a = load_assortment(a_text)
    if args.trials <= 0:
        print("trials must be positive", file=sys.stderr)
        return EXIT_USAGE
    est = estimate_probabilities(inst, a, trials=args.trials, seed=args.seed)
    closed = evaluate(inst, a)
    delta = est.purchase_freq - closed.purchase_prob

    results = est.to_results()
    results["closed_form_prob"] = closed.purchase_prob.tolist()
    results["delta"] = delta.tolist()

    lines = [f"simulation: {est.trials} trials, seed {est.seed}"]
    lines.append(
        f"  outcomes: purchased {est.purchased}, abandoned {est.abandoned}, "
        f"exhausted {est.exhausted}"
    )
    reach = " ".join(_fmt(x) for x in est.patience_reach_freq)
    lines.append(f"  reach frequency by stage  {reach}")
    lines.append("  purchase frequency minus closed form (nonzero rows)")
    for i in range(inst.n):
        if est.purchase_freq[i].any() or closed.purchase_prob[i].any():
            freq = " ".join(_fmt(x) for x in est.purchase_freq[i])
            dev = " ".join(f"{x:+.6f}" for x in delta[i])
            lines.append(f"    product {i + 1}: {freq}  ({dev})")
    lines.append(f"  max abs delta          {np.abs(delta).max():.6f}")
    digest = reportio.digest_inputs(inst_text, a_text, str(args.trials), str(args.seed))
    return _finish(args, "simulate", digest, results, lines)


def _describe_solution(inst, a: Assortment, extra: dict) -> tuple[dict, list[str]]:
    rep = evaluate(inst, a)
    results = {
        "expected_revenue": rep.expected_revenue,
        "patience_free_revenue": rep.patience_free_revenue,
        "per_stage_reachability": list(rep.per_stage_reachability),
        "placements": [
            {"product": i + 1, "exposure": k + 1, "stage": z + 1}
            for i, k, z in a.placements
        ],
    }
    results.update(extra)
    lines = [f"  expected revenue       {_fmt(rep.expected_revenue)}"]
    lines.append(f"  patience-free revenue  {_fmt(rep.patience_free_revenue)}")
    lines += _placement_lines(a.placements)
    return results, lines


def _cmd_solve(args) -> int:
    inst_text = _read(args.instance)
    inst = load_instance(inst_text)
    method = "exact-patient" if args.method == "exact-p1" else args.method
    started = time.perf_counter()

    if method == "acme":
        rep = acme_mod.solve_acme(
            inst, rho=args.rho, epsilon=args.epsilon,
            max_cells=args.max_cells, max_ops=args.max_ops,
        )
        chosen = rep.assortment
        results = rep.to_results(inst)
        lines = [f"solve: method acme, rho {args.rho:g}, epsilon {args.epsilon:g}"]
        lines.append(f"  winning branch         {rep.winning_branch}")
        lines.append(f"  certified ratio        {rep.certified_ratio:.6g}")
        if rep.degraded:
            lines.append(f"  degraded               yes ({rep.degraded_reason})")
        lines.append(f"  expected revenue       {_fmt(rep.expected_revenue)}")
        lines.append(f"  patience-free revenue  {_fmt(rep.patience_free_revenue)}")
        lines += _placement_lines(chosen.placements)
    elif method == "dp":
        dp = dp_solve(
            inst, rho=args.rho, epsilon=args.epsilon,
            max_cells=args.max_cells, max_ops=args.max_ops,
        )
        chosen = dp.assortment
        extra = {
            "method": "dp",
            "rho": args.rho,
            "epsilon": args.epsilon,
            "diagnostics": dp.diagnostics.to_results(),
        }
        results, body = _describe_solution(inst, chosen, extra)
        d = dp.diagnostics
        lines = [f"solve: method dp, rho {args.rho:g}, epsilon {args.epsilon:g}"]
        lines += body
        lines.append(
            f"  guesses {d.guesses_run}/{d.guesses_total} run, "
            f"{d.table_cells} cells, {d.fill_steps} fill steps ({d.kernel} kernel)"
        )
    elif method == "single-stage":
        res = solve_single_stage(inst)
        chosen = res.assortment
        extra = {
            "method": "single-stage",
            "selected": [i + 1 for i in res.selected],
            "single_display_revenue": res.revenue,
        }
        results, body = _describe_solution(inst, chosen, extra)
        lines = ["solve: method single-stage"] + body
    elif method == "exact":
        res = brute_force_revenue_optimum(inst, ceiling=args.ceiling)
        chosen = res.assortment
        extra = {"method": "exact", "profile_bound": feasible_profile_bound(inst)}
        results, body = _describe_solution(inst, chosen, extra)
        lines = ["solve: method exact (exhaustive)"] + body
    else:  # exact-patient
        res = brute_force_patient_optimum(inst, rho=args.rho, ceiling=args.ceiling)
        chosen = res.assortment
        extra = {
            "method": "exact-patient",
            "rho": args.rho,
            "profile_bound": feasible_profile_bound(inst),
        }
        results, body = _describe_solution(inst, chosen, extra)
        lines = [f"solve: method exact-patient, rho {args.rho:g}"] + body

    lines.append(f"  wall time              {time.perf_counter() - started:.3f}s")
    if args.save_assortment:
        _emit(dump_assortment(chosen), args.save_assortment)
    digest = reportio.digest_inputs(
        inst_text, method, repr(args.rho), repr(args.epsilon)
    )
    return _finish(args, "solve", digest, results, lines)


def _cmd_sweep(args) -> int:
    inst_text = _read(args.instance)
    inst = load_instance(inst_text)
    try:
        rhos = [float(tok) for tok in args.rhos.split(",") if tok.strip()]
    except ValueError:
        print(f"cannot parse --rhos {args.rhos!r}", file=sys.stderr)
        return EXIT_USAGE
    if not rhos:
        print("--rhos needs at least one value", file=sys.stderr)
        return EXIT_USAGE
    started = time.perf_counter()
    best, reports = acme_mod.sweep_rho(
        inst, rhos, epsilon=args.epsilon,
        max_cells=args.max_cells, max_ops=args.max_ops,
    )
    results = {
        "method": "sweep",
        "epsilon": args.epsilon,
        "rhos": sorted(rhos),
        "best": best.to_results(inst),
        "trajectory": [
            {
                "rho": r.rho,
                "expected_revenue": r.expected_revenue,
                "winning_branch": r.winning_branch,
                "degraded": r.degraded,
            }
            for r in reports
        ],
    }
    lines = [f"sweep: epsilon {args.epsilon:g}, {len(reports)} floors"]
    lines.append("  rho      expected  branch")
    for r in reports:
        mark = " *" if r.rho == best.rho else ""
        lines.append(
            f"  {r.rho:<8g} {_fmt(r.expected_revenue)}  {r.winning_branch}{mark}"
        )
    lines.append(f"  best floor {best.rho:g} with revenue {_fmt(best.expected_revenue)}")
    lines += _placement_lines(best.assortment.placements)
    lines.append(f"  wall time              {time.perf_counter() - started:.3f}s")
    if args.save_assortment:
        _emit(dump_assortment(best.assortment), args.save_assortment)
    digest = reportio.digest_inputs(
        inst_text, ",".join(repr(r) for r in sorted(rhos)), repr(args.epsilon)
    )
    return _finish(args, "sweep", digest, results, lines)


def _cmd_gen(args) -> int:
    for name in ("n", "m", "d", "w"):
        if getattr(args, name) < 1:
            print(f"--{name} must be at least 1", file=sys.stderr)
            return EXIT_USAGE
    inst = generate_instance(
        seed=args.seed, n=args.n, m=args.m, d=args.d, w=args.w, profile=args.profile
    )
    _emit(dump_instance(inst), args.out)
    return EXIT_OK


_COMMANDS = {
    "validate": _cmd_validate,
    "eval": _cmd_eval,
    "simulate": _cmd_simulate,
    "solve": _cmd_solve,
    "sweep": _cmd_sweep,
    "gen": _cmd_gen,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValidationError, FeasibilityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (DpRefusalError, GridError, EnumerationLimitError) as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
