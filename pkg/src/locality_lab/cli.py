"""Command-line surface: condition checks, inequality sweeps, protocol demos.

Subcommands:

  check      run locality-condition checkers over a behaviour/model JSON file
  chsh       CHSH tools: --optimize (quantum maximum search), --grid
             (correlator CSV for plotting), --classical (strategy enumeration)
  bell1964   original three-setting inequality slack at given angles
  everett    stage-by-stage branch tables and the definiteness matrix
  boxes      the one-particle two-box protocol and its condition reports
  signmodel  sampled sign-strategy ensemble and its correlators
  timeline   causal-structure validation of an event list from JSON

Angles are radians everywhere. Output is deterministic: identical invocations
(including seeds) produce byte-identical output. Exit codes: 0 all requested
checks pass, 1 a check failed, 2 usage or input error. The environment
variable LOCALITY_LAB_TOL overrides the default check tolerance.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Sequence

from . import behavior as bh
from . import causality as ca
from . import everett as ev
from . import inequalities as ineq
from . import spacetime as st
from .qstate import singlet

_FALLBACK_TOL = 1e-9


def _default_tol() -> float:
    raw = os.environ.get("LOCALITY_LAB_TOL")
    if raw is None:
        return _FALLBACK_TOL
    try:
        return float(raw)
    except ValueError as exc:
        raise ValueError(f"LOCALITY_LAB_TOL is not a number: {raw!r}") from exc


def _g(x: float) -> str:
    return format(float(x), ".12g")


def _load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _print_json(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


# -- check ----------------------------------------------------------------------

_CONDITION_NAMES = tuple(c.value for c in ca.Condition)


def _parse_conditions(raw: str | None, is_model: bool) -> list[str]:
    if raw is None or raw == "all":
        base = ["no-signalling"]
        if is_model:
            base += ["parameter-independence", "outcome-independence", "factorizability"]
        return base
    names = [part.strip() for part in raw.split(",") if part.strip()]
    for name in names:
        if name not in _CONDITION_NAMES:
            raise ValueError(f"unknown condition {name!r}; known: {', '.join(_CONDITION_NAMES)}")
    if not names:
        raise ValueError("empty --conditions list")
    return names


def _single_lambda(b: bh.Behavior) -> bh.HiddenVariableModel:
    return bh.HiddenVariableModel(b.scenario, [(1.0, b)])


def _run_condition(name: str, obj, tol: float) -> ca.CheckReport:
    is_model = isinstance(obj, bh.HiddenVariableModel)
    model = obj if is_model else _single_lambda(obj)
    observable = bh.average(model) if is_model else obj
    if name == "no-signalling":
        return ca.check_no_signalling(observable, tol)
    if name == "parameter-independence":
        return ca.check_parameter_independence(model, tol)
    if name == "outcome-independence":
        return ca.check_outcome_independence(model, tol)
    if name == "factorizability":
        return ca.check_factorizability(model, tol)
    if name == "determinism":
        return ca.suppes_zanotti_reduction(model, tol)
    raise ValueError(f"unknown condition {name!r}")


def _report_status(report: ca.CheckReport) -> str:
    if report.passed is None:
        return "N/A "
    return "PASS" if report.passed else "FAIL"


def _print_reports_table(reports: list[ca.CheckReport]) -> None:
    width = max(len(r.condition.value) for r in reports)
    for r in reports:
        line = (
            f"{r.condition.value:<{width}}  {_report_status(r)}  "
            f"max_violation={_g(r.max_violation)}  tol={_g(r.tol)}"
        )
        if r.skipped_cells:
            line += f"  skipped_cells={r.skipped_cells}"
        print(line)
        if r.witness is not None and r.passed is False:
            print(f"  witness: {json.dumps(r.witness, sort_keys=True)}")
        for note in r.notes:
            print(f"  note: {note}")


def cmd_check(args) -> int:
    obj = bh.from_dict(_load_json(args.file))
    is_model = isinstance(obj, bh.HiddenVariableModel)
    tol = args.tol if args.tol is not None else _default_tol()
    names = _parse_conditions(args.conditions, is_model)
    if not is_model and any(n not in ("no-signalling",) for n in names):
        print("input is a behaviour; lambda-level checks use the empty hidden variable")
    reports = [_run_condition(name, obj, tol) for name in names]
    if args.format == "json":
        _print_json(
            {
                "input": "model" if is_model else "behavior",
                "all_passed": all(r.passed is not False for r in reports),
                "reports": [r.to_dict() for r in reports],
            }
        )
    elif args.format == "csv":
        print("condition,passed,max_violation,skipped_cells,tol")
        for r in reports:
            passed = "" if r.passed is None else str(r.passed).lower()
            print(
                f"{r.condition.value},{passed},{format(r.max_violation, '.17g')},"
                f"{r.skipped_cells},{format(r.tol, '.17g')}"
            )
    else:
        _print_reports_table(reports)
    return 0 if all(r.passed is not False for r in reports) else 1


# -- chsh -------------------------------------------------------------------------


def _chsh_table(result: ineq.ChshResult) -> None:
    a, ap, b, bp = result.settings
    e_ab, e_abp, e_apb, e_apbp = result.terms
    print(f"S = {_g(result.value)}   |S| = {_g(result.magnitude)}")
    print(f"settings (radians): a={a} a'={ap} b={b} b'={bp}")
    print(
        f"correlators: E(a,b)={_g(e_ab)} E(a,b')={_g(e_abp)} "
        f"E(a',b)={_g(e_apb)} E(a',b')={_g(e_apbp)}"
    )


def cmd_chsh(args) -> int:
    state = singlet()
    if args.classical:
        scenario = bh.Scenario(("a", "a'"), ("b", "b'"))
        enum = ineq.classical_bound(scenario)
        print("A(a) A(a') B(b) B(b')     S   |S|")
        for row in enum.strategies:
            ra, rb = row.responses_a, row.responses_b
            print(f"{ra[0]:+4d} {ra[1]:+5d} {rb[0]:+4d} {rb[1]:+5d} {row.s:+6.1f} {abs(row.s):5.1f}")
        print(f"classical bound: max |S| = {_g(enum.bound)} over 16 deterministic strategies")
        return 0
    if args.grid:
        step = args.step
        if not math.isfinite(step) or step <= 0.0:
            raise ValueError(f"--step must be a positive angle, got {step!r}")
        n = int(math.ceil(2.0 * math.pi / step)) + 1
        angles = [i * step for i in range(n)]
        corr = ineq.CorrelatorSet.from_state(state, angles, angles)
        sys.stdout.write(ineq.correlators_to_csv(corr))
        return 0
    result = ineq.quantum_max(state)
    if args.format == "json":
        _print_json(result.to_dict())
    else:
        _chsh_table(result)
    return 0


# -- bell1964 ----------------------------------------------------------------------


def cmd_bell1964(args) -> int:
    corr = ineq.CorrelatorSet.from_state(singlet(), [args.a, args.b, args.c], [args.a, args.b, args.c])
    result = ineq.bell_1964(corr, 0, 1, 2)
    if args.format == "json":
        _print_json(result.to_dict())
        return 0
    print(f"slack = {_g(result.slack)}  ({'satisfied' if result.satisfied else 'VIOLATED'})")
    for key in ("E(b,c)", "E(a,b)", "E(a,c)"):
        print(f"{key} = {_g(result.terms[key])}")
    if not result.anticorrelation_ok:
        print(
            "warning: perfect anticorrelation at equal settings fails "
            f"(max deviation {_g(result.max_equal_setting_deviation)}); slack computed anyway"
        )
    return 0


# -- everett / boxes ----------------------------------------------------------------


def _branch_rows(trace: ev.ProtocolTrace) -> tuple[list[str], list[list[str]]]:
    subsystems: list[str] = []
    for stage in trace.stages:
        for label in stage.state.labels:
            if label not in subsystems:
                subsystems.append(label)
    rows = []
    for stage in trace.stages:
        for branch in stage.branches:
            rows.append(
                [stage.name]
                + [branch.labels.get(sub, "") for sub in subsystems]
                + [
                    format(branch.amplitude.real, ".17g"),
                    format(branch.amplitude.imag, ".17g"),
                    format(branch.weight, ".17g"),
                ]
            )
    return ["stage"] + subsystems + ["re", "im", "weight"], rows


def _definiteness_rows(trace: ev.ProtocolTrace) -> tuple[list[str], list[list[str]]]:
    regions = {"A-side": ("s1", "m_A"), "B-side": ("s2", "m_B")}
    conditionings = [("m_A", lab, "B-side") for lab in ("up", "down")]
    conditionings += [("m_B", lab, "A-side") for lab in ("up", "down")]
    if any("C" in stage.state.labels for stage in trace.stages):
        for lab in ("uu", "ud", "du", "dd"):
            conditionings += [("C", lab, "A-side"), ("C", lab, "B-side")]
    header = ["region", "conditioned-on"] + [stage.name for stage in trace.stages]
    rows = []
    for sub, lab, region_name in conditionings:
        row = [region_name, f"{sub}={lab}"]
        for stage in trace.stages:
            if sub not in stage.state.labels:
                row.append("-")
                continue
            try:
                definite = ev.is_definite_relative(
                    stage.state, regions[region_name], {sub: lab}, stage.pointer_bases
                )
            except ev.EmptyBranchError:
                row.append("-")
                continue
            row.append("yes" if definite else "no")
        rows.append(row)
    return header, rows


def _print_aligned(header: list[str], rows: list[list[str]]) -> None:
    widths = [max(len(header[i]), *(len(r[i]) for r in rows)) if rows else len(header[i]) for i in range(len(header))]
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip())
    for row in rows:
        print("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())


def _trace_json(trace: ev.ProtocolTrace) -> dict:
    return {
        "stages": [
            {
                "name": stage.name,
                "event": stage.event.to_dict(),
                "subsystems": list(stage.state.labels),
                "branches": [
                    {
                        "labels": dict(branch.labels),
                        "re": branch.amplitude.real,
                        "im": branch.amplitude.imag,
                        "weight": branch.weight,
                    }
                    for branch in stage.branches
                ],
            }
            for stage in trace.stages
        ]
    }


def cmd_everett(args) -> int:
    trace = ev.run_parallel_epr() if args.theta == 0.0 else ev.run_nonparallel(args.theta)
    header, rows = _branch_rows(trace)
    if args.format == "csv":
        print(",".join(header))
        for row in rows:
            print(",".join(row))
        return 0
    dheader, drows = _definiteness_rows(trace)
    if args.format == "json":
        payload = _trace_json(trace)
        payload["theta"] = args.theta
        payload["definiteness"] = {
            "header": dheader,
            "rows": drows,
        }
        _print_json(payload)
        return 0
    print(f"branch tables (theta = {_g(args.theta)} rad)")
    _print_aligned(header, rows)
    print()
    print("definiteness of the far region relative to a conditioning branch")
    _print_aligned(dheader, drows)
    return 0


def cmd_boxes(args) -> int:
    trace, induced, oi_report = ev.einstein_boxes()
    ns_report = ca.check_no_signalling(induced)
    if args.format == "json":
        _print_json(
            {
                "trace": _trace_json(trace),
                "behavior": bh.behavior_to_dict(induced),
                "reports": [ns_report.to_dict(), oi_report.to_dict()],
            }
        )
        return 0
    header, rows = _branch_rows(trace)
    _print_aligned(header, rows)
    print()
    sc = induced.scenario
    print("induced behaviour P(A,B|open,open):")
    for iA, a_out in enumerate(sc.outcomes_a):
        for iB, b_out in enumerate(sc.outcomes_b):
            print(f"  P({a_out},{b_out}) = {_g(induced.table[0, 0, iA, iB])}")
    print()
    _print_reports_table([ns_report, oi_report])
    return 0


# -- signmodel ----------------------------------------------------------------------


def _closed_form_sign_correlator(a: float, b: float) -> float:
    gamma = abs(a - b) % (2.0 * math.pi)
    gamma = min(gamma, 2.0 * math.pi - gamma)
    return -1.0 + 2.0 * gamma / math.pi


def cmd_signmodel(args) -> int:
    angles = [float(part) for part in args.settings.split(",") if part.strip()]
    if not angles:
        raise ValueError("--settings needs at least one angle")
    model, correlators = bh.sign_model(angles, angles, args.n, args.seed)
    if args.format == "json":
        _print_json(
            {
                "n_samples": args.n,
                "seed": args.seed,
                "settings": angles,
                "n_lambdas": len(model.lambdas),
                "correlators": [[float(x) for x in row] for row in correlators],
            }
        )
        return 0
    if args.format == "csv":
        print("a,b,E,expected")
        for ia, a in enumerate(angles):
            for ib, b in enumerate(angles):
                print(
                    f"{bh.angle_label(a)},{bh.angle_label(b)},"
                    f"{format(correlators[ia, ib], '.17g')},"
                    f"{format(_closed_form_sign_correlator(a, b), '.17g')}"
                )
        return 0
    print(f"sampled {args.n} hidden directions (seed {args.seed}); {len(model.lambdas)} distinct strategies")
    header = ["a", "b", "E", "expected", "|diff|"]
    rows = []
    for ia, a in enumerate(angles):
        for ib, b in enumerate(angles):
            expected = _closed_form_sign_correlator(a, b)
            rows.append(
                [
                    bh.angle_label(a),
                    bh.angle_label(b),
                    _g(correlators[ia, ib]),
                    _g(expected),
                    _g(abs(correlators[ia, ib] - expected)),
                ]
            )
    _print_aligned(header, rows)
    return 0


# -- timeline -----------------------------------------------------------------------

_ROLE_ALIASES = {
    "measurementa": st.Role.MEASUREMENT_A,
    "measurementb": st.Role.MEASUREMENT_B,
    "comparison": st.Role.COMPARISON,
    "preparation": st.Role.PREPARATION,
    "other": st.Role.OTHER,
}


def _parse_role(raw: str) -> st.Role:
    key = raw.replace("-", "").replace("_", "").lower()
    if key not in _ROLE_ALIASES:
        raise ValueError(f"unknown event role {raw!r}")
    return _ROLE_ALIASES[key]


def cmd_timeline(args) -> int:
    data = _load_json(args.file)
    if not isinstance(data, dict) or "timeline" not in data:
        raise ValueError("timeline file must be an object with a 'timeline' list")
    events = []
    for k, entry in enumerate(data["timeline"]):
        try:
            events.append(
                st.Event(
                    float(entry["t"]),
                    float(entry["x"]),
                    _parse_role(str(entry.get("role", "other"))),
                    str(entry.get("label", "")),
                )
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed timeline entry {k}: {exc}") from exc
    report = st.validate_protocol(events)
    if args.format == "json":
        _print_json(report.to_dict())
    else:
        for check in report.checks:
            print(f"{check.name:<32} {'PASS' if check.passed else 'FAIL'}  {check.detail}")
    return 0 if report.passed else 1


# -- parser -------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="locality-lab",
        description="Locality-condition checkers, Bell/CHSH inequality tools, and branch-level protocol demos.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="run condition checkers over a behaviour/model JSON file")
    p.add_argument("file")
    p.add_argument("--conditions", default=None, help="comma-separated condition names, or 'all'")
    p.add_argument("--tol", type=float, default=None, help="violation tolerance (default from LOCALITY_LAB_TOL or 1e-9)")
    p.add_argument("--format", choices=("table", "json", "csv"), default="table")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("chsh", help="CHSH optimisation, correlator grids, classical enumeration")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--optimize", action="store_true")
    mode.add_argument("--grid", action="store_true")
    mode.add_argument("--classical", action="store_true")
    p.add_argument("--step", type=float, default=0.1, help="grid step in radians (with --grid)")
    p.add_argument("--state", choices=("singlet",), default="singlet")
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(func=cmd_chsh)

    p = sub.add_parser("bell1964", help="original three-setting inequality slack on the singlet")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(func=cmd_bell1964)

    p = sub.add_parser("everett", help="branch tables and definiteness matrix of the two-wing protocol")
    p.add_argument("--theta", type=float, required=True, help="relative measurement angle in radians")
    p.add_argument("--format", choices=("table", "json", "csv"), default="table")
    p.set_defaults(func=cmd_everett)

    p = sub.add_parser("boxes", help="one-particle two-box protocol with condition reports")
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(func=cmd_boxes)

    p = sub.add_parser("signmodel", help="sampled sign-strategy ensemble and correlators")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--settings", required=True, help="comma-separated angles in radians")
    p.add_argument("--format", choices=("table", "json", "csv"), default="table")
    p.set_defaults(func=cmd_signmodel)

    p = sub.add_parser("timeline", help="validate the causal layout of an event list")
    p.add_argument("file")
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(func=cmd_timeline)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
