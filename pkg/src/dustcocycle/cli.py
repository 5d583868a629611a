"""Command-line front end: experiments in, CSV/JSON reports out.

Exit status: 0 success, 1 a numerical check failed, 2 usage error (unknown
names, malformed ranges, budget exceeded without the override flag).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import subprocess
import sys
from pathlib import Path
from time import perf_counter

import numpy as np

from . import __version__
from . import _kernels as K
from .cantor import cantor_dyadic, image_cell
from .cocycle import (
    BudgetError,
    CocycleReport,
    convergence_table,
    default_workers,
    estimate_lipschitz,
    lipschitz_bound,
    pairing_n,
    phi_n,
    pullback_projection,
    resolve_functions,
)
from .fredholm import VertexValues, check_constants, kernel_trace, kernel_trace_oracle
from .geometry import PRESETS, enumerate_squares, get_preset, similarity_dimension
from .oracle import (
    bott_projection,
    chern_pairing_oracle,
    closed_form_target,
    get_smooth_preset,
    wedge_quadrature,
)

CSV_COLUMNS = (
    "n",
    "squares",
    "phi_re",
    "phi_im",
    "target_re",
    "target_im",
    "abs_err",
    "err_ratio",
    "ms",
)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def build_id() -> str:
    try:
        rev = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"],
            capture_output=True, text=True, timeout=5,
        )
        if rev.returncode == 0:
            return f"{__version__}+g{rev.stdout.strip()}"
    except OSError:
        pass
    return __version__


def _provenance(args, extra=None):
    meta = {
        "build": build_id(),
        "backend": K.BACKEND,
        "workers": args.workers,
        "command": args.command,
    }
    if extra:
        meta.update(extra)
    return meta


def _emit(text: str, args) -> None:
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8", newline="")
    else:
        sys.stdout.write(text)


def _emit_table(columns, dicts, args, extra_meta=None) -> None:
    """Emit a table of records in the selected format to --out or stdout."""
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for d in dicts:
            writer.writerow([_fmt(d[c]) for c in columns])
        text = buf.getvalue()
    else:
        text = json.dumps(
            {"meta": _provenance(args, extra_meta), "records": dicts}, indent=2
        ) + "\n"
    _emit(text, args)


def write_rows(rows: list[CocycleReport], args, extra_meta=None, timing=True) -> None:
    """Emit a convergence report in the selected format to --out or stdout."""
    dicts = []
    for row in rows:
        d = row.as_dict()
        if not timing:
            d["ms"] = 0.0
        dicts.append(d)
    if args.format == "csv":
        _emit_table(CSV_COLUMNS, dicts, args, extra_meta)
    else:
        _emit_table(None, dicts, args, extra_meta)


def _parse_n_range(spec: str) -> list[int]:
    spec = spec.strip()
    if ".." in spec:
        lo_s, hi_s = spec.split("..", 1)
        lo, hi = int(lo_s), int(hi_s)
        if hi < lo:
            raise ValueError(f"empty level range {spec!r}")
        return list(range(lo, hi + 1))
    return [int(spec)]


def _add_common(p):
    p.add_argument("--workers", type=int, default=None, help="thread count (env DUSTCOCYCLE_WORKERS)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--override-budget", action="store_true", help="allow runs beyond the square budget")
    p.add_argument("--no-timing", action="store_true", help="zero the ms column for byte-reproducible output")


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="dustcocycle",
        description="Combinatorial integration on the Cantor dust and its torus oracles.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phi", help="single combinatorial integral at one level")
    p.add_argument("--preset", default="cantor-dust", help=f"IFS preset {sorted(PRESETS)}")
    p.add_argument("--functions", default="bott-flux", help="named function triple")
    p.add_argument("--n", required=True, help="level, e.g. 8")
    p.add_argument("--mode", choices=("pullback", "direct"), default=None,
                   help="must match the triple's mode when given")
    _add_common(p)

    p = sub.add_parser("converge", help="convergence table over a level range")
    p.add_argument("--preset", default="cantor-dust")
    p.add_argument("--functions", default="bott-flux")
    p.add_argument("--n", required=True, help="level range, e.g. 4..10")
    _add_common(p)

    p = sub.add_parser("lipschitz", help="decay table and bound check for direct triples")
    p.add_argument("--preset", default="cantor-dust")
    p.add_argument("--functions", default="const-xy")
    p.add_argument("--n", required=True, help="level range, e.g. 1..8")
    _add_common(p)

    p = sub.add_parser("pairing", help="projection pairing vs the quadrature oracle")
    p.add_argument("--preset", default="cantor-dust")
    p.add_argument("--degree", type=int, default=1)
    p.add_argument("--n", required=True, help="level or range, e.g. 6..10")
    p.add_argument("--grid", type=int, default=1024, help="oracle grid size")
    _add_common(p)

    p = sub.add_parser("cantor", help="staircase value at a triadic point p/3^n")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    _add_common(p)

    p = sub.add_parser("dimension", help="similarity dimension of a preset")
    p.add_argument("--preset", default="cantor-dust")
    _add_common(p)

    p = sub.add_parser("oracle", help="torus quadrature of a smooth triple")
    p.add_argument("--functions", default="bott-flux")
    p.add_argument("--grid", type=int, default=512)
    _add_common(p)

    p = sub.add_parser("selftest", help="constants and invariant suite")
    _add_common(p)

    return ap


def _cmd_phi(args) -> int:
    preset = get_preset(args.preset)
    f, g, h, target, mode = resolve_functions(args.functions)
    wanted_mode = getattr(args, "mode", None)
    if wanted_mode and wanted_mode != mode:
        print(f"error: triple {args.functions!r} is {mode}-mode, not {wanted_mode}", file=sys.stderr)
        return 2
    ns = _parse_n_range(args.n)
    rows = convergence_table(
        preset, ns, f, g, h, target=target,
        workers=args.workers, allow_large=args.override_budget,
    )
    write_rows(rows, args, {"functions": args.functions, "preset": preset.name},
               timing=not args.no_timing)
    return 0


def _cmd_converge(args) -> int:
    return _cmd_phi(args)


LIPSCHITZ_COLUMNS = ("n", "squares", "abs_phi", "bound", "within_bound", "ms")


def _cmd_lipschitz(args) -> int:
    preset = get_preset(args.preset)
    f, g, h, _, mode = resolve_functions(args.functions)
    if mode != "direct":
        print(f"error: lipschitz needs a direct-mode triple, got {args.functions!r}", file=sys.stderr)
        return 2
    ns = _parse_n_range(args.n)
    records = []
    violated = False
    for n in ns:
        t0 = perf_counter()
        val = phi_n(preset, n, f, g, h, workers=args.workers, allow_large=args.override_budget)
        sup_f, _ = estimate_lipschitz(preset, n, f)
        _, lip_g = estimate_lipschitz(preset, n, g)
        _, lip_h = estimate_lipschitz(preset, n, h)
        bound = lipschitz_bound(preset, n, sup_f, lip_g, lip_h)
        ok = abs(val) <= bound
        violated |= not ok
        records.append(
            {
                "n": n,
                "squares": preset.nmaps**n,
                "abs_phi": abs(val),
                "bound": bound,
                "within_bound": int(ok),
                "ms": 0.0 if args.no_timing else (perf_counter() - t0) * 1e3,
            }
        )
    _emit_table(LIPSCHITZ_COLUMNS, records, args, {"functions": args.functions})
    return 1 if violated else 0


def _cmd_pairing(args) -> int:
    preset = get_preset(args.preset)
    from .cocycle import pullback_projection

    field = bott_projection(args.degree)
    p = pullback_projection(field)
    oracle_val = chern_pairing_oracle(field, args.grid)
    rows = []
    for n in _parse_n_range(args.n):
        t0 = perf_counter()
        val = pairing_n(preset, n, p, workers=args.workers, allow_large=args.override_budget)
        rows.append(
            CocycleReport(
                preset=preset.name, n=n, squares=preset.nmaps**n, phi=val,
                target=oracle_val, abs_err=abs(val - oracle_val),
                wall_ms=(perf_counter() - t0) * 1e3,
                workers=args.workers or default_workers(),
            )
        )
    write_rows(rows, args, {"degree": args.degree, "grid": args.grid},
               timing=not args.no_timing)
    return 0


def _cmd_cantor(args) -> int:
    val = cantor_dyadic(args.p, args.n)
    frac = val.as_fraction()
    if args.format == "json":
        text = json.dumps(
            {"p": args.p, "n": args.n, "fraction": str(frac), "value": frac.numerator / frac.denominator}
        ) + "\n"
    else:
        text = f"{frac} {frac.numerator / frac.denominator}\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8", newline="")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_dimension(args) -> int:
    preset = get_preset(args.preset)
    d = similarity_dimension(preset)
    print(f"{d:.9f}")
    return 0


def _cmd_oracle(args) -> int:
    preset = get_smooth_preset(args.functions)
    q = wedge_quadrature(preset.f, preset.g, preset.h, args.grid)
    print(f"quadrature {q.real:.12g}{q.imag:+.12g}j")
    print(f"closed-form {closed_form_target(args.functions).real:.12g}")
    return 0


def _cmd_selftest(args) -> int:
    failures = []

    rep = check_constants()
    print(f"constants: {'ok' if rep.ok else 'FAIL'} ({rep.elapsed_ms:.3f} ms)")
    if not rep.ok:
        failures.append(f"constants: {rep.first_violation}")

    rng = np.random.default_rng(20240202)
    worst = 0.0
    for _ in range(200):
        f, g, h = (
            VertexValues(*(rng.standard_normal(4) + 1j * rng.standard_normal(4)))
            for _ in range(3)
        )
        worst = max(worst, abs(kernel_trace(f, g, h) - kernel_trace_oracle(f, g, h)))
    print(f"kernel vs matrix oracle: max |diff| = {worst:.2e}")
    if worst > 1e-12:
        failures.append("kernel oracle mismatch")

    bad = 0
    for sq in enumerate_squares(get_preset("cantor-dust"), 4):
        try:
            image_cell(sq)
        except Exception:
            bad += 1
    print(f"digit map order check (n=4): {bad} violations")
    if bad:
        failures.append("digit map violations")

    f, g, h, target, _ = resolve_functions("const-xy")
    preset = get_preset("cantor-dust")
    for n in (1, 2, 3):
        want = 2.0 * (4.0 / 9.0) ** n
        got = phi_n(preset, n, f, g, h, workers=1)
        if abs(got - want) > 1e-12 * want:
            failures.append(f"riemann closed form at n={n}")
    print("riemann closed form (n=1..3): ok" if not any("riemann" in x for x in failures) else "riemann closed form: FAIL")

    a = phi_n(preset, 6, f, g, h, workers=1)
    b = phi_n(preset, 6, f, g, h, workers=4)
    det = a == b
    print(f"worker determinism (n=6): {'ok' if det else 'FAIL'}")
    if not det:
        failures.append("worker determinism")

    if failures:
        for msg in failures:
            print(f"FAIL {msg}", file=sys.stderr)
        return 1
    print("selftest passed")
    return 0


_HANDLERS = {
    "phi": _cmd_phi,
    "converge": _cmd_converge,
    "lipschitz": _cmd_lipschitz,
    "pairing": _cmd_pairing,
    "cantor": _cmd_cantor,
    "dimension": _cmd_dimension,
    "oracle": _cmd_oracle,
    "selftest": _cmd_selftest,
}


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except BudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
