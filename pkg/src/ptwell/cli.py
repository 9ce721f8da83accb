"""Command-line front end: spectra, critical couplings, hierarchies, checks.

Everything prints deterministic JSON (floats at 17 significant digits) to
stdout; CSV is available for potential samples.  Exit codes: 0 success,
1 usage, 2 solver failure, 3 verification failure.
"""
import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from .spectral_core import (ConvergenceError, classify_spectrum,
                            find_critical_coupling, kappa_condition_residual,
                            matching_residual, matching_residual_dt)
from .susy_hierarchy import (EliminationPlan, IllegalPlanError,
                             build_hierarchy, hierarchy_relations_check)
from .oracle_verifier import ShootingConfig, find_spectrum_numeric, mismatch
from .wavefunctions import chebyshev_grid, limit_form


@dataclass(frozen=True)
class RunConfig:
    command: str
    coupling: float = 0.0
    levels: int = 8
    depth: int = 2
    plan: str = ""
    samples: int = 101
    fmt: str = "json"
    out: str = None
    tol: float = 1e-6
    index: int = 0
    m: int = 1
    n: int = 0


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"non-finite value in output: {x}")
    return f"{x:.17g}"


def _render(obj, indent=0) -> str:
    """JSON text with floats at fixed significant digits, insertion-ordered."""
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}  {json.dumps(str(k))}: {_render(v, indent + 1)}'
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad}  {_render(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    if isinstance(obj, complex):
        return _render({"re": obj.real, "im": obj.imag}, indent)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return json.dumps(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    raise TypeError(f"cannot render {type(obj)!r}")


def _emit(cfg: RunConfig, text: str):
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _level_row(lv) -> dict:
    k = lv.kappa_right.value
    return {"n": lv.index, "re": lv.energy.real, "im": lv.energy.imag,
            "branch": lv.branch.value, "s": k.real, "t": -k.imag}


def cmd_spectrum(cfg: RunConfig) -> int:
    spec = classify_spectrum(cfg.coupling, cfg.levels)
    out = {
        "coupling": cfg.coupling,
        "levels": [_level_row(lv) for lv in spec.levels],
        "broken_pairs": [list(p) for p in spec.broken_pairs],
        "residuals": [abs(kappa_condition_residual(lv.energy, cfg.coupling))
                      for lv in spec.levels],
    }
    _emit(cfg, _render(out))
    return 0


def cmd_critical(cfg: RunConfig) -> int:
    crit = find_critical_coupling(cfg.index)
    out = {
        "nu": crit.nu,
        "z_crit": crit.z_crit,
        "t_merge": crit.t_merge,
        "e_merge": crit.e_merge,
        "residuals": {
            "matching": abs(matching_residual(crit.t_merge, crit.z_crit)),
            "tangency": abs(matching_residual_dt(crit.t_merge, crit.z_crit)),
        },
    }
    _emit(cfg, _render(out))
    return 0


def _parse_plan(cfg: RunConfig, needed: int) -> EliminationPlan:
    if needed == 0 and not cfg.plan:
        return EliminationPlan(())
    text = cfg.plan if cfg.plan else ",".join(["real"] * needed)
    return EliminationPlan.from_text(text)


def cmd_hierarchy(cfg: RunConfig) -> int:
    plan = _parse_plan(cfg, cfg.depth - 1)
    levels = max(cfg.levels, cfg.depth + 1)
    members = build_hierarchy(cfg.coupling, plan, cfg.depth, levels)
    xs = np.linspace(-0.999, 0.999, cfg.samples)
    if cfg.fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["member", "x", "re_v", "im_v"])
        for mem in members:
            for x in xs:
                v = mem.potential(float(x))
                writer.writerow([mem.depth, _fmt_float(float(x)),
                                 _fmt_float(v.real), _fmt_float(v.imag)])
        _emit(cfg, buf.getvalue().rstrip("\n"))
        return 0
    report = None
    c0 = find_critical_coupling(0)
    c1 = find_critical_coupling(1)
    if c0.z_crit < cfg.coupling < c1.z_crit:
        report = hierarchy_relations_check(cfg.coupling)
    out = {
        "coupling": cfg.coupling,
        "depth": cfg.depth,
        "plan": ",".join(c.value for c in plan.choices),
        "members": [{
            "depth": mem.depth,
            "pt_symmetric": mem.potential.pt_symmetric,
            "endpoint_exponent": mem.potential.endpoint_exponent,
            "spectrum": [_level_row(lv) for lv in mem.spectrum.levels],
            "samples": [{"x": float(x),
                         "re_v": mem.potential(float(x)).real,
                         "im_v": mem.potential(float(x)).imag} for x in xs],
        } for mem in members],
        "relations": report,
    }
    _emit(cfg, _render(out))
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    tol = cfg.tol * float(os.environ.get("PTWELL_TOL_OVERRIDE", "1"))
    plan = _parse_plan(cfg, cfg.depth - 1)
    members = build_hierarchy(cfg.coupling, plan, cfg.depth, cfg.levels + cfg.depth - 1)
    member = members[-1]
    closed = [lv.energy for lv in member.spectrum.levels[:cfg.levels]]
    sh = ShootingConfig(p=member.potential.endpoint_exponent)
    res = [abs(mismatch(member.potential, E, sh).normalized) for E in closed]
    lo_re = min(E.real for E in closed) - 2.0
    hi_re = max(E.real for E in closed) + 5.0
    lo_im = min(0.0, min(E.imag for E in closed)) - 1.0
    hi_im = max(0.0, max(E.imag for E in closed)) + 1.0
    seeds = [E * 1.05 for E in closed if abs(E.imag) > 1e-12]
    oracle = find_spectrum_numeric(member.potential, len(closed),
                                   (complex(lo_re, lo_im), complex(hi_re, hi_im)),
                                   sh, seeds=seeds or None)
    rows = []
    ok = True
    for n, (Ec, Eo, r) in enumerate(zip(closed, oracle, res)):
        dev = abs(Ec - Eo)
        good = dev < tol
        ok = ok and good
        rows.append({"n": n, "closed": Ec, "oracle": Eo,
                     "abs_dev": dev, "mismatch_residual": r, "pass": good})
    out = {"coupling": cfg.coupling, "member_depth": cfg.depth,
           "tolerance": tol, "levels": rows, "all_pass": ok}
    _emit(cfg, _render(out))
    return 0 if ok else 3


def _limit_stats(Z: float, m: int, n: int) -> dict:
    plan = EliminationPlan.from_text(",".join(["real"] * (m - 1))) if m > 1 else EliminationPlan(())
    members = build_hierarchy(Z, plan, m, n + m + 1)
    member = members[-1]
    psi = member.eigenfunctions(n)
    grid = [float(x) for x in np.linspace(-0.95, 0.95, 20)]
    ratios = [complex(psi(x)) / limit_form(m, n, x) for x in grid]
    mu = sum(ratios) / len(ratios)
    var = sum(abs(r - mu) ** 2 for r in ratios) / len(ratios) / abs(mu) ** 2
    out = {"ratio_variance": var, "ratio_mean": mu}
    if m > 1:
        strength = (math.pi ** 2 / 4.0) * m * (m - 1)
        dev = 0.0
        for x in chebyshev_grid(101):
            family = strength / math.cos(math.pi * x / 2.0) ** 2
            base = member.potential(x) - (-1j * Z if x >= 0 else 1j * Z)
            dev = max(dev, abs(base - family) / abs(family))
        out["family_rel_dev"] = dev
    return out


def cmd_limit(cfg: RunConfig) -> int:
    out = {"member_depth": cfg.m, "level": cfg.n,
           "at_zero": _limit_stats(0.0, cfg.m, cfg.n),
           "near_zero": _limit_stats(1e-6, cfg.m, cfg.n)}
    _emit(cfg, _render(out))
    return 0


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the contract here reserves 2 for solvers
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="ptwell", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("spectrum", help="eigenvalues at a coupling")
    sp.add_argument("--coupling", type=float, required=True)
    sp.add_argument("--levels", type=int, default=8)

    cr = sub.add_parser("critical", help="pair-merge coupling for one band")
    cr.add_argument("--index", type=int, default=0)

    hi = sub.add_parser("hierarchy", help="partner-chain potentials and spectra")
    hi.add_argument("--coupling", type=float, required=True)
    hi.add_argument("--depth", type=int, default=2)
    hi.add_argument("--plan", type=str, default="")
    hi.add_argument("--samples", type=int, default=101)
    hi.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")
    hi.add_argument("--out", type=str, default=None)

    ve = sub.add_parser("verify", help="closed forms against the shooting oracle")
    ve.add_argument("--coupling", type=float, required=True)
    ve.add_argument("--member", dest="depth", type=int, default=1)
    ve.add_argument("--levels", type=int, default=6)
    ve.add_argument("--plan", type=str, default="")
    ve.add_argument("--tol", type=float, default=1e-6)

    li = sub.add_parser("limit", help="zero-coupling closed-form checks")
    li.add_argument("--m", type=int, choices=(1, 2, 3), required=True)
    li.add_argument("--n", type=int, default=0)
    return parser


_DISPATCH = {
    "spectrum": cmd_spectrum,
    "critical": cmd_critical,
    "hierarchy": cmd_hierarchy,
    "verify": cmd_verify,
    "limit": cmd_limit,
}


def _validate(parser: _Parser, args) -> None:
    checks = {
        "coupling": lambda v: v >= 0.0,
        "levels": lambda v: v >= 1,
        "depth": lambda v: v >= 1,
        "samples": lambda v: v >= 2,
        "index": lambda v: v >= 0,
        "n": lambda v: v >= 0,
        "tol": lambda v: v > 0.0,
    }
    for name, good in checks.items():
        value = getattr(args, name, None)
        if value is not None and not good(value):
            parser.error(f"invalid --{name.replace('fmt', 'format')}: {value}")


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    _validate(parser, args)
    cfg = RunConfig(command=args.command,
                    coupling=getattr(args, "coupling", 0.0),
                    levels=getattr(args, "levels", 8),
                    depth=getattr(args, "depth", 2),
                    plan=getattr(args, "plan", ""),
                    samples=getattr(args, "samples", 101),
                    fmt=getattr(args, "fmt", "json"),
                    out=getattr(args, "out", None),
                    tol=getattr(args, "tol", 1e-6),
                    index=getattr(args, "index", 0),
                    m=getattr(args, "m", 1),
                    n=getattr(args, "n", 0))
    try:
        return _DISPATCH[cfg.command](cfg)
    except (ConvergenceError, IllegalPlanError, ZeroDivisionError) as exc:
        print(_render({"error": type(exc).__name__, "detail": str(exc)}),
              file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
