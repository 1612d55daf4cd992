"""Command line front end: ``pdekit <command> FILE [options]``."""
from __future__ import annotations

import argparse
import os
import sys
import time

from . import __version__
from .ckdata import ck_data
from .dsl import parse_element, parse_system
from .errors import PdekitError
from .involution import complete_to_involution, hilbert_function, involution_test
from .inversesys import generating_sections, modular_render, parametric_jets, section_basis
from .jetspace import jets_up_to
from .modanalysis import (
    adjoint, codimension, element_codimension, purity_report, relative_localization,
    torsion_submodule,
)
from .pdesys import fi_step, solved_form
from .report import dumps, envelope, render_jet, render_row, render_scalar
from .sequences import fi_resolution, janet_sequence, spencer_form
from .symbolcalc import delta_cohomology, symbol_at

COMMANDS = ("complete", "characters", "symbol", "delta", "janet", "spencer-form", "ck",
            "sections", "adjoint", "torsion", "cd", "localize", "purity")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pdekit", description="Formal analysis of linear PDE systems.")
    p.add_argument("--version", action="version", version=f"pdekit {__version__}")
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit the JSON envelope")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--max-order", type=int, default=None)
    common.add_argument("--max-tries", type=int, default=50)
    common.add_argument("--timing", action="store_true", help="record wall time in the envelope")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("file")
        if name == "symbol":
            sp.add_argument("--r", type=int, default=0)
        elif name == "delta":
            sp.add_argument("--s", type=int, required=True)
            sp.add_argument("--level", type=int, required=True)
        elif name == "spencer-form":
            sp.add_argument("--lift", type=int, default=0)
            sp.add_argument("--drop-potentials", action="store_true")
        elif name == "sections":
            sp.add_argument("--order", type=int, required=True, help="truncation order")
            sp.add_argument("--generators", action="store_true")
        elif name == "ck":
            sp.add_argument("--spencer-form", action="store_true",
                            help="read the data off the Spencer form without potentials")
        elif name == "cd":
            sp.add_argument("--element", default=None)
        elif name == "localize":
            sp.add_argument("--codim", type=int, required=True)
    return p


# ---------------------------------------------------------------------------
# payloads

def _rows(sol) -> list[str]:
    s = sol.base
    return [render_row(r, s.unknowns, s.vars, s.field) for _, r in sol.rows()]


def _board(inv) -> list[dict]:
    u = inv.solved.base.unknowns
    return [{"jet": render_jet(r.jet, u), "class": r.cls, "multiplicative": list(r.multiplicative)}
            for r in inv.board.rows]


def _complete(s, a):
    return complete_to_involution(s, max_order=a.max_order, seed=a.seed, max_tries=a.max_tries)


def cmd_complete(s, a):
    inv = _complete(s, a)
    return {
        "order": inv.q, "change": [list(r) for r in inv.change],
        "rows": _rows(inv.solved), "board": _board(inv),
        "characters": inv.characters.as_dict(), "dim_R": inv.solved.dim_R(),
    }, inv.log


def cmd_characters(s, a):
    inv = _complete(s, a)
    return {
        "order": inv.q, "alpha": list(inv.characters.alpha), "beta": list(inv.characters.beta),
        "hilbert": [hilbert_function(inv, r) for r in range(4)], "codimension": codimension(inv),
    }, inv.log


def cmd_symbol(s, a):
    sol = solved_form(s)
    g = symbol_at(sol, sol.q + a.r)
    return {"level": g.level, "dim": g.dim,
            "parametric": [render_jet(j, s.unknowns) for j in g.parametric]}, []


def cmd_delta(s, a):
    return delta_cohomology(solved_form(s), a.s, a.level).as_dict(), []


def _op_rows(op, names):
    return [render_row(r, names, op.vars, op.field) for r in op.to_rows()]


def cmd_janet(s, a):
    sol = solved_form(s)
    homogeneous = all(len({sum(mu) for _, mu in r}) == 1 for r in s.rows)
    if (homogeneous and s.is_constant_coefficient() and not s.field.gens
            and fi_step(sol)[0] and not involution_test(sol, check_fi=False)[0]):
        rep = fi_resolution(s)
        log = [{"action": "graded-resolution", "order": sol.q}]
    else:
        inv = _complete(s, a)
        rep = janet_sequence(inv)
        log = inv.log
    out = rep.as_dict()
    ops = []
    prefixes = ["Phi", "Psi", "Omega"]
    for i, op in enumerate(rep.operators):
        cols = s.unknowns if i == 0 else tuple(f"{prefixes[min(i - 1, 2)]}{k + 1}" for k in range(op.ncols))
        ops.append(_op_rows(op, cols))
    out["operators"] = ops
    return out, log


def cmd_spencer_form(s, a):
    inv = _complete(s, a)
    sf = spencer_form(inv, lift=a.lift, drop_potentials=a.drop_potentials)
    ch = sf.characters()
    z = sf.system
    return {
        "rows": [render_row(r, z.unknowns, z.vars, z.field) for r in z.rows],
        "labels": {z.unknowns[i]: render_jet(j, s.unknowns) for i, j in enumerate(sf.labels)},
        "alpha": list(ch.alpha), "reduced": sf.reduced,
    }, inv.log


def cmd_ck(s, a):
    inv = _complete(s, a)
    if a.spencer_form:
        sf = spencer_form(inv, drop_potentials=True)
        out = ck_data(sf).as_dict()
        out["labels"] = {sf.system.unknowns[i]: render_jet(j, s.unknowns) for i, j in enumerate(sf.labels)}
        return out, inv.log
    return ck_data(inv).as_dict(), inv.log


def cmd_sections(s, a):
    inv = _complete(s, a)
    sol = inv.solved
    N = a.order
    if N < sol.q:
        raise UsageError(f"--order must be at least the system order {sol.q}")
    secs = section_basis(inv, N - sol.q)
    cols = jets_up_to(sol.n, sol.m, N)
    F = sol.field
    table = [{"jet": render_jet(f_par, s.unknowns),
              "values": [render_scalar(f.get(j), F) for j in cols],
              "modular": modular_render(f)}
             for f_par, f in zip(parametric_jets(sol, N), secs)]
    out = {"truncation": N, "columns": [render_jet(j, s.unknowns) for j in cols], "sections": table}
    if a.generators:
        gb = generating_sections(inv, r_max=max(N - sol.q, 1))
        out["generators"] = gb.as_dict()
    return out, inv.log


def cmd_adjoint(s, a):
    adj = adjoint(s)
    t = adj.system
    out = {"unknowns": list(t.unknowns), "rows": [render_row(r, t.unknowns, t.vars, t.field) for r in t.rows]}
    inv = complete_to_involution(t, max_order=a.max_order, seed=a.seed, max_tries=a.max_tries)
    out["alpha"] = list(inv.characters.alpha)
    out["order"] = inv.q
    return out, inv.log


def cmd_torsion(s, a):
    tr = torsion_submodule(s)
    return tr.as_dict(s.unknowns, s.vars), []


def cmd_cd(s, a):
    if a.element:
        z = parse_element(a.element, s)
        ec = element_codimension(s, z, seed=a.seed)
        rows = [render_row(r, ec.system.unknowns, s.vars, ec.system.field) for r in ec.system.rows] if ec.system else []
        return {"element": render_row(z, s.unknowns, s.vars, s.field), "cd": ec.cd,
                "annihilator": rows, "truncation": ec.truncation}, []
    inv = _complete(s, a)
    return {"cd": codimension(inv), "alpha": list(inv.characters.alpha)}, inv.log


def cmd_localize(s, a):
    loc = relative_localization(s, a.codim, seed=a.seed)
    return loc.as_dict(), (loc.inv.log if loc.inv else [])


def cmd_purity(s, a):
    rep = purity_report(s, seed=a.seed)
    return rep.as_dict(s.unknowns, s.vars), []


HANDLERS = {
    "complete": cmd_complete, "characters": cmd_characters, "symbol": cmd_symbol,
    "delta": cmd_delta, "janet": cmd_janet, "spencer-form": cmd_spencer_form, "ck": cmd_ck,
    "sections": cmd_sections, "adjoint": cmd_adjoint, "torsion": cmd_torsion, "cd": cmd_cd,
    "localize": cmd_localize, "purity": cmd_purity,
}


# ---------------------------------------------------------------------------
# text output

def _text(command: str, result: dict) -> str:
    if command == "janet":
        line = f"F: {result['m']} {' '.join(str(d) for d in result['F'])}, euler {result['euler']}"
        out = [line]
        for i, op in enumerate(result["operators"]):
            out.append(f"D{i}:")
            out.extend(f"  {r}" for r in op)
        return "\n".join(out)
    if command == "complete":
        out = [f"order {result['order']}, alpha {tuple(result['characters']['alpha'])}, dim R {result['dim_R']}"]
        for row, b in zip(result["rows"], result["board"]):
            cells = " ".join(str(i) if i in b["multiplicative"] else "." for i in range(1, len(result["change"]) + 1))
            out.append(f"  {row} = 0    [{cells}]")
        return "\n".join(out)
    if command == "sections":
        out = ["section | " + " ".join(result["columns"])]
        for sec in result["sections"]:
            out.append(f"{sec['jet']} | " + " ".join(sec["values"]))
        if "generators" in result:
            out.append("generators:")
            out.extend(f"  {g}" for g in result["generators"]["generators"])
        return "\n".join(out)
    if command == "purity":
        return f"cd {result['cd']}, pure {result['pure']}\n{result['filtration']}"
    lines = []
    for k in sorted(result):
        v = result[k]
        if isinstance(v, list) and v and isinstance(v[0], str):
            lines.append(f"{k}:")
            lines.extend(f"  {x}" for x in v)
        else:
            lines.append(f"{k}: {v}")
    return "\n".join(lines)


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        if not args.command:
            raise UsageError("missing command")
        env_seed = os.environ.get("PDEKIT_SEED")
        if env_seed is not None:
            try:
                args.seed = int(env_seed)
            except ValueError:
                raise UsageError("PDEKIT_SEED must be an integer")
        try:
            with open(args.file, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read {args.file}: {exc.strerror}")
    except UsageError as exc:
        print(f"pdekit: error: {exc}", file=sys.stderr)
        return 1
    t0 = time.perf_counter()
    try:
        system = parse_system(text)
        result, log = HANDLERS[args.command](system, args)
        error = None
        code = 0
    except UsageError as exc:
        print(f"pdekit: error: {exc}", file=sys.stderr)
        return 1
    except PdekitError as exc:
        result, log = None, []
        error = {"type": type(exc).__name__, "message": str(exc)}
        code = 2
    timing = {"seconds": round(time.perf_counter() - t0, 6)} if args.timing else None
    if args.json:
        env = envelope(args.command, result, text, log, timing, __version__)
        if error:
            env["error"] = error
        print(dumps(env), file=stdout)
    elif error:
        print(f"pdekit: {error['type']}: {error['message']}", file=sys.stderr)
    else:
        print(_text(args.command, result), file=stdout)
    return code


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
