"""Command-line driver.

Subcommands: check, eval, machine, normalize, stdlib, pcf
{check,eval,compile}, difftest. Results go to stdout; every diagnostic
goes to stderr. Exit codes: 0 success, 1 input errors (parse,
linearity, typing) and difftest disagreement, 2 fuel exhaustion, 3
stuck terms.

Run reports are JSON lines with a fixed field order — command, input
digest, outcome, fuel used, wall time. difftest streams them to
stdout; the other commands append to --report PATH. Identical inputs
give byte-identical reports except the wall-time field.

The default fuel is 10^5 rule instances, overridable with LREC_FUEL.
difftest gives the compiled side of PCF comparisons 100x the fuel: the
encodings spend a recursor loop per source step, so equal budgets
would misreport slow-but-sound compilations as divergent.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import random
import sys
import time

from .evaluation import (Stuck, Val, eval_report, force_numeral)
from .gen import random_closed
from .machine import FuelExhausted as MachineFuel
from .machine import Halted, machine_force_numeral, run
from .machine import Stuck as MachineStuck
from .minext import mtype, normalize_m
from .parser import LinearityError, ParseError, parse_defs, parse_type
from .pcf import (NumConst, compile_pcf, parse_pcf_defs, pcf_check, pcf_eval,
                  pcf_fv, pcf_pretty, pcf_type_pretty, PNat)
from .reduction import FuelExhausted, normalize
from .stdlib import catalog_lookup, catalog_names
from .terms import (ContractViolation, Term, alpha_eq, is_value,
                    numeral_value, pretty)
from .types import (EnvDomainError, Lolli, MetaVar, Nat, Tensor, TypingError,
                    infer, type_pretty)


def _default_fuel() -> int:
    return int(os.environ.get("LREC_FUEL", 100_000))


def _fail(msg: str, code: int) -> int:
    print(msg, file=sys.stderr)
    return code


def _digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _record(command: str, digest: str, outcome: str,
            fuel_used: int | None, wall_ms: float) -> str:
    rec = {"command": command, "input": digest, "outcome": outcome,
           "fuel_used": fuel_used, "wall_ms": round(wall_ms, 3)}
    return json.dumps(rec)


def _report(args, outcome: str, fuel_used: int | None, wall_ms: float,
            digest: str):
    path = getattr(args, "report", None)
    if path:
        with open(path, "a") as fh:
            fh.write(_record(args.command, digest, outcome, fuel_used,
                             wall_ms) + "\n")


def _resolver(name: str, arg: str | None) -> Term | None:
    return catalog_lookup(name, parse_type(arg) if arg is not None else None)


def _load(path: str, calculus: str) -> tuple[Term, str]:
    with open(path, "rb") as fh:
        data = fh.read()
    _, prog = parse_defs(data.decode(), calculus, _resolver)
    return prog, _digest(data)


def _path_str(path: str) -> str:
    return path or "root"


# ------------------------------------------------------------- commands

def cmd_check(args) -> int:
    t, digest = _load(args.file, args.calculus)
    t0 = time.perf_counter()
    if args.calculus == "llcim":
        a = mtype(t, [])
    else:
        a = infer(t, [])
    wall = (time.perf_counter() - t0) * 1000
    out = type_pretty(a, ground=args.ground)
    print(out)
    _report(args, f"type {out}", None, wall, digest)
    return 0


def cmd_eval(args) -> int:
    t, digest = _load(args.file, "lrec")
    cbv = args.strategy == "cbv"
    t0 = time.perf_counter()
    if args.force_nat:
        got = force_numeral(t, args.fuel, cbv=cbv)
        wall = (time.perf_counter() - t0) * 1000
        if isinstance(got, FuelExhausted):
            _report(args, "fuel-exhausted", args.fuel, wall, digest)
            return _fail(f"fuel exhausted after {args.fuel}", 2)
        if got is None:
            _report(args, "stuck", None, wall, digest)
            return _fail("the value is not a number", 3)
        print(got)
        _report(args, f"value {got}", None, wall, digest)
        return 0
    outcome, used = eval_report(t, args.fuel, cbv=cbv,
                                literal_let=args.literal_let)
    wall = (time.perf_counter() - t0) * 1000
    if isinstance(outcome, FuelExhausted):
        _report(args, "fuel-exhausted", used, wall, digest)
        return _fail(f"fuel exhausted after {args.fuel}", 2)
    if isinstance(outcome, Stuck):
        _report(args, f"stuck: {outcome.reason}", used, wall, digest)
        return _fail(f"stuck: {outcome.reason}: {pretty(outcome.subterm)}", 3)
    out = pretty(outcome.value)
    print(out)
    _report(args, f"value {out}", used, wall, digest)
    return 0


def cmd_machine(args) -> int:
    t, digest = _load(args.file, "lrec")
    steps = 0

    def trace(i, rule, config):
        nonlocal steps
        steps = i
        if args.trace:
            print(f"{i} {rule} |stack|={len(config.stack)} "
                  f"{pretty(config.code)}")

    t0 = time.perf_counter()
    if args.force_nat:
        got = machine_force_numeral(t, args.fuel)
        wall = (time.perf_counter() - t0) * 1000
        if isinstance(got, MachineFuel):
            _report(args, "fuel-exhausted", args.fuel, wall, digest)
            return _fail(f"fuel exhausted after {args.fuel}", 2)
        if got is None:
            _report(args, "stuck", None, wall, digest)
            return _fail("the machine value is not a number", 3)
        print(got)
        _report(args, f"value {got}", None, wall, digest)
        return 0
    out = run(t, args.fuel, on_step=trace)
    wall = (time.perf_counter() - t0) * 1000
    if isinstance(out, MachineFuel):
        _report(args, "fuel-exhausted", args.fuel, wall, digest)
        return _fail(f"fuel exhausted after {args.fuel}", 2)
    if isinstance(out, MachineStuck):
        _report(args, "stuck", steps, wall, digest)
        return _fail(f"stuck at {pretty(out.config.code)} with "
                     f"|stack|={len(out.config.stack)}", 3)
    res = pretty(out.value)
    print(res)
    _report(args, f"halted {res}", steps, wall, digest)
    return 0


def cmd_normalize(args) -> int:
    t, digest = _load(args.file, args.calculus)
    steps = 0

    def trace(i, rule, path, term):
        nonlocal steps
        steps = i
        if args.trace:
            print(f"{i} {rule} {_path_str(path)} {pretty(term)}")

    t0 = time.perf_counter()
    if args.calculus == "llcim":
        out = normalize_m(t, args.fuel, on_step=trace)
    else:
        out = normalize(t, args.fuel, on_step=trace)
    wall = (time.perf_counter() - t0) * 1000
    if isinstance(out, FuelExhausted):
        _report(args, "fuel-exhausted", args.fuel, wall, digest)
        return _fail(f"fuel exhausted after {args.fuel}", 2)
    res = pretty(out)
    print(res)
    _report(args, f"normal-form {res}", steps, wall, digest)
    return 0


def cmd_stdlib(args) -> int:
    a = parse_type(args.type) if args.type else None
    t = catalog_lookup(args.name, a)
    if t is None:
        return _fail(
            f"unknown catalog entry {args.name!r}"
            + (" (this entry needs --type)" if a is None
               and catalog_lookup(args.name, Nat()) is not None else "")
            + f"; available: {', '.join(catalog_names())}", 1)
    print(pretty(t))
    return 0


def cmd_pcf_check(args) -> int:
    with open(args.file, "rb") as fh:
        data = fh.read()
    _, prog = parse_pcf_defs(data.decode())
    a = pcf_check(prog, {})
    print(pcf_type_pretty(a))
    return 0


def cmd_pcf_eval(args) -> int:
    with open(args.file, "rb") as fh:
        data = fh.read()
    _, prog = parse_pcf_defs(data.decode())
    pcf_check(prog, {})
    v = pcf_eval(prog, args.fuel)
    if isinstance(v, FuelExhausted):
        return _fail(f"fuel exhausted after {args.fuel}", 2)
    print(pcf_pretty(v))
    return 0


def cmd_pcf_compile(args) -> int:
    with open(args.file, "rb") as fh:
        data = fh.read()
    _, prog = parse_pcf_defs(data.decode())
    print(pretty(compile_pcf(prog, [])))
    return 0


# ------------------------------------------------------------- difftest

def _shape_ok(t: Term, a) -> bool:
    """Adequacy: a closed normal form has the shape its type dictates."""
    if isinstance(a, MetaVar):
        return True
    if isinstance(a, Nat):
        return numeral_value(t) is not None
    if isinstance(a, Lolli):
        from .terms import Lam
        return isinstance(t, Lam)
    if isinstance(a, Tensor):
        from .terms import Pair
        return (isinstance(t, Pair) and _shape_ok(t.left, a.left)
                and _shape_ok(t.right, a.right))
    return False


def _difftest_term(t: Term, a, fuel: int, digest: str,
                   emit) -> str | None:
    """Run the three engines; None when they agree, else a complaint."""
    steps = 0

    def count_norm(i, rule, path, term):
        nonlocal steps
        steps = i

    t0 = time.perf_counter()
    nf = normalize(t, fuel, on_step=count_norm)
    norm_wall = (time.perf_counter() - t0) * 1000
    if isinstance(nf, FuelExhausted):
        emit("difftest/normalize", digest, "fuel-exhausted", fuel, norm_wall)
    else:
        emit("difftest/normalize", digest, f"normal-form {pretty(nf)}",
             steps, norm_wall)

    t0 = time.perf_counter()
    ev, used = eval_report(t, fuel)
    ev_wall = (time.perf_counter() - t0) * 1000
    emit("difftest/eval", digest,
         "fuel-exhausted" if isinstance(ev, FuelExhausted)
         else f"stuck: {ev.reason}" if isinstance(ev, Stuck)
         else f"value {pretty(ev.value)}", used, ev_wall)

    msteps = 0

    def count_mach(i, rule, config):
        nonlocal msteps
        msteps = i

    t0 = time.perf_counter()
    mc = run(t, fuel, on_step=count_mach)
    m_wall = (time.perf_counter() - t0) * 1000
    emit("difftest/machine", digest,
         "fuel-exhausted" if isinstance(mc, MachineFuel)
         else "stuck" if isinstance(mc, MachineStuck)
         else f"halted {pretty(mc.value)}", msteps, m_wall)

    if isinstance(ev, Val) != isinstance(mc, Halted):
        return "machine and eval_cbn disagree on convergence"
    if isinstance(ev, Val) and not alpha_eq(ev.value, mc.value):
        return "machine and eval_cbn values differ"
    if not isinstance(nf, FuelExhausted):
        if not _shape_ok(nf, a):
            return (f"normal form {pretty(nf)} does not match the shape "
                    f"of type {type_pretty(a)}")
        if isinstance(ev, Val):
            joined = normalize(ev.value, fuel)
            if isinstance(joined, FuelExhausted) or not alpha_eq(joined, nf):
                return "eval_cbn value does not rejoin the normal form"
    return None


def cmd_difftest(args) -> int:
    def emit(command, digest, outcome, fuel_used, wall_ms):
        line = _record(command, digest, outcome, fuel_used, wall_ms)
        print(line)

    bad: list[str] = []
    skipped = 0
    entries = 0
    names = sorted(os.listdir(args.dir)) if os.path.isdir(args.dir) else None
    if names is None:
        return _fail(f"not a directory: {args.dir}", 1)

    for name in names:
        full = os.path.join(args.dir, name)
        if name.endswith(".lrec"):
            entries += 1
            try:
                t, digest = _load(full, "lrec")
                a = infer(t, [])
            except (ParseError, LinearityError, TypingError, OSError) as e:
                print(f"skipped {name}: {e}", file=sys.stderr)
                emit("difftest/skip", _digest(name.encode()),
                     f"skipped: {e}", None, 0.0)
                skipped += 1
                continue
            complaint = _difftest_term(t, a, args.fuel, digest, emit)
            if complaint:
                bad.append(f"{name}: {complaint}: {pretty(t)}")
        elif name.endswith(".pcf"):
            entries += 1
            try:
                with open(full, "rb") as fh:
                    data = fh.read()
                _, prog = parse_pcf_defs(data.decode())
                if pcf_fv(prog):
                    raise ParseError("program is open", 1, 1)
                pa = pcf_check(prog, {})
            except (ParseError, TypingError, OSError) as e:
                print(f"skipped {name}: {e}", file=sys.stderr)
                emit("difftest/skip", _digest(name.encode()),
                     f"skipped: {e}", None, 0.0)
                skipped += 1
                continue
            if not isinstance(pa, PNat):
                print(f"skipped {name}: not of ground type", file=sys.stderr)
                emit("difftest/skip", _digest(name.encode()),
                     "skipped: not of ground type", None, 0.0)
                skipped += 1
                continue
            digest = _digest(data)
            t0 = time.perf_counter()
            ref = pcf_eval(prog, args.fuel)
            ref_wall = (time.perf_counter() - t0) * 1000
            ref_n = ref.n if isinstance(ref, NumConst) else None
            emit("difftest/pcf-ref", digest,
                 "fuel-exhausted" if ref_n is None else f"value {ref_n}",
                 None, ref_wall)
            t0 = time.perf_counter()
            got = force_numeral(compile_pcf(prog, []), args.fuel * 100)
            comp_wall = (time.perf_counter() - t0) * 1000
            comp_n = None if isinstance(got, FuelExhausted) else got
            emit("difftest/pcf-compiled", digest,
                 "fuel-exhausted" if isinstance(got, FuelExhausted)
                 else "stuck" if got is None else f"value {got}",
                 None, comp_wall)
            if ref_n != comp_n:
                src = data.decode().strip()
                bad.append(f"{name}: reference {ref_n} vs compiled "
                           f"{comp_n}: {src}")

    rng = random.Random(args.seed)
    for i in range(args.n):
        t, a = random_closed(rng)
        digest = _digest(pretty(t).encode())
        complaint = _difftest_term(t, a, args.fuel, digest, emit)
        if complaint:
            bad.append(f"generated #{i} (seed {args.seed}): {complaint}: "
                       f"{pretty(t)}")

    for b in bad:
        print(f"disagreement: {b}", file=sys.stderr)
    print(f"difftest: {entries} corpus entries ({skipped} skipped), "
          f"{args.n} generated terms, {len(bad)} disagreements",
          file=sys.stderr)
    return 1 if bad else 0


# ----------------------------------------------------------------- main

def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="lrec",
        description="Linear λ-calculus with a recursor: typing, "
                    "reduction, evaluators, a stack machine, and a PCF "
                    "compiler.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, fuel=True, report=True):
        if fuel:
            p.add_argument("--fuel", type=int, default=_default_fuel(),
                           help="rule-instance budget (default 10^5, "
                                "env LREC_FUEL)")
        if report:
            p.add_argument("--report", metavar="PATH",
                           help="append a JSON run record to PATH")

    p = sub.add_parser("check", help="parse, linearity, typing; print type")
    p.add_argument("file")
    p.add_argument("--calculus", choices=["lrec", "llcim"], default="lrec")
    p.add_argument("--ground", action="store_true",
                   help="instantiate leftover type variables to Nat")
    common(p, fuel=False)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("eval", help="big-step evaluation to weak head "
                                    "normal form")
    p.add_argument("file")
    p.add_argument("--strategy", choices=["cbn", "cbv"], default="cbn")
    p.add_argument("--force-nat", action="store_true",
                   help="force the result hereditarily to a number")
    p.add_argument("--literal-let", action="store_true",
                   help="evaluate let by double application instead of "
                        "simultaneous substitution")
    common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("machine", help="run the stack machine")
    p.add_argument("file")
    p.add_argument("--trace", action="store_true",
                   help="print one line per transition")
    p.add_argument("--force-nat", action="store_true")
    common(p)
    p.set_defaults(func=cmd_machine)

    p = sub.add_parser("normalize", help="leftmost-outermost reduction "
                                         "to normal form")
    p.add_argument("file")
    p.add_argument("--calculus", choices=["lrec", "llcim"], default="lrec")
    p.add_argument("--trace", action="store_true",
                   help="print one line per step")
    common(p)
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("stdlib", help="print a catalog encoding")
    p.add_argument("name", help="entry name, e.g. add or Y")
    p.add_argument("--type", help="type argument for indexed entries, "
                                  "e.g. 'Nat -o Nat'")
    p.set_defaults(func=cmd_stdlib)

    pcfp = sub.add_parser("pcf", help="PCF frontend")
    pcfsub = pcfp.add_subparsers(dest="pcf_command", required=True)
    p = pcfsub.add_parser("check", help="type-check a PCF program")
    p.add_argument("file")
    p.set_defaults(func=cmd_pcf_check)
    p = pcfsub.add_parser("eval", help="reference CBN evaluation")
    p.add_argument("file")
    common(p, report=False)
    p.set_defaults(func=cmd_pcf_eval)
    p = pcfsub.add_parser("compile", help="compile into the linear "
                                          "calculus and print the term")
    p.add_argument("file")
    p.set_defaults(func=cmd_pcf_compile)

    p = sub.add_parser("difftest", help="run corpus and generated terms "
                                        "through every engine and compare")
    p.add_argument("dir", help="corpus directory (*.lrec, *.pcf)")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--n", type=int, default=300,
                   help="number of generated terms")
    common(p, report=False)
    p.set_defaults(func=cmd_difftest)

    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, LinearityError) as e:
        return _fail(f"syntax: {e}", 1)
    except EnvDomainError as e:
        return _fail(f"scope: {e}", 1)
    except TypingError as e:
        return _fail(f"typing: {e}", 1)
    except ContractViolation as e:
        return _fail(f"invalid input: {e}", 1)
    except OSError as e:
        return _fail(str(e), 1)


if __name__ == "__main__":
    sys.exit(main())
