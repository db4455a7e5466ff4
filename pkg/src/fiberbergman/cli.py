"""Command-line entry point: ``fiberbergman <subcommand> [options]``.

Every table is CSV (or JSON with ``--json``) preceded by a ``# manifest:``
line recording the family hash and all numeric settings, so two runs with
the same manifest produce identical bytes.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .errors import FiberBergmanError, GridSpecError, UsageError
from .family import CENTRAL, builtin_families, builtin_family_path, read_family, t_label

SUBCOMMANDS = ("h0", "filtration", "gram", "rho", "continuity", "phi", "pairing", "rees", "volume")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ------------------------------------------------------------------ parsing
def t_grid_parse(spec: str) -> list:
    """``log:a..b:n``, ``lin:a..b:n`` or a comma list that may contain ``central``."""
    spec = spec.strip()
    if not spec:
        raise GridSpecError("empty t-grid")
    kind, sep, rest = spec.partition(":")
    if sep and kind in ("log", "lin"):
        try:
            bounds, npts = rest.rsplit(":", 1)
            lo, hi = bounds.split("..")
            a, b, n = float(lo), float(hi), int(npts)
        except ValueError as exc:
            raise GridSpecError(f"cannot parse grid {spec!r}") from exc
        if n < 2:
            raise GridSpecError("a range grid needs at least 2 points")
        if not a < b:
            raise GridSpecError(f"grid bounds must increase: {a} .. {b}")
        if kind == "log":
            if a <= 0:
                raise GridSpecError("log grid bounds must be positive")
            values = 10.0 ** np.linspace(math.log10(a), math.log10(b), n)
        else:
            values = np.linspace(a, b, n)
        if np.any(values == 0):
            raise GridSpecError("t = 0 must be requested as 'central'")
        return [float(v) for v in values]
    out = []
    for item in spec.split(","):
        item = item.strip()
        if item.lower() == "central":
            out.append(CENTRAL)
            continue
        try:
            value = complex(item.replace("i", "j")) if ("i" in item or "j" in item) else float(item)
        except ValueError as exc:
            raise GridSpecError(f"bad grid entry {item!r}") from exc
        if value == 0:
            raise GridSpecError("t = 0 must be requested as 'central'")
        out.append(value)
    return out


def m_spec_parse(spec: str) -> list[int]:
    spec = spec.strip()
    try:
        if ".." in spec:
            lo, hi = spec.split("..")
            values = list(range(int(lo), int(hi) + 1))
        else:
            values = [int(x) for x in spec.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad --m value {spec!r}") from exc
    if not values or min(values) < 1:
        raise UsageError(f"--m needs positive integers, got {spec!r}")
    return values


def point_parse(text: str) -> np.ndarray:
    try:
        return np.array([complex(x.strip().replace("i", "j")) for x in text.split(",")])
    except ValueError as exc:
        raise UsageError(f"bad --point {text!r}") from exc


def resolve_family(spec: str) -> tuple[Path, str]:
    path = Path(spec)
    if not path.exists():
        stem = path.name[:-5] if path.name.endswith(".json") else path.name
        if stem not in builtin_families():
            raise UsageError(f"no family file {spec!r} and no builtin named {stem!r}")
        path = builtin_family_path(stem)
    digest = hashlib.sha256(path.read_bytes()).hexdigest()
    return path, digest


# ------------------------------------------------------------------ output
def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _threads() -> int:
    raw = os.environ.get("THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError as exc:
            raise UsageError(f"THREADS must be an integer, got {raw!r}") from exc
    return os.cpu_count() or 1


def sweep(fn: Callable, cells: Sequence) -> list:
    """Apply ``fn`` to each cell, possibly in parallel; results keep cell order."""
    workers = min(_threads(), max(1, len(cells)))
    if workers == 1:
        return [fn(c) for c in cells]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, cells))


def emit(args, manifest: dict, columns: Sequence[str], rows: Sequence[Sequence],
         notes: Sequence[str] = ()) -> None:
    if args.json:
        payload = {"manifest": manifest, "columns": list(columns),
                   "rows": [[_jsonable(v) for v in r] for r in rows], "notes": list(notes)}
        text = json.dumps(payload, sort_keys=True, indent=1) + "\n"
    else:
        lines = ["# manifest: " + json.dumps(manifest, sort_keys=True)]
        lines += [f"# {n}" for n in notes]
        lines.append(",".join(columns))
        lines += [",".join(fmt(v) for v in r) for r in rows]
        text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _jsonable(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    return v


def t_fields(t) -> tuple[str, float, float]:
    if t is CENTRAL:
        return "central", 0.0, 0.0
    z = complex(t)
    return t_label(t), z.real, z.imag


# ------------------------------------------------------------- subcommands
def cmd_h0(args, fam):
    from .sections import h0

    grid = list(args.t_grid)
    if not any(t is CENTRAL for t in grid):
        grid.append(CENTRAL)
    cells = [(m, t) for m in args.m for t in grid]
    values = sweep(lambda c: h0(fam, c[0], c[1]), cells)
    rows = [(m, t_label(t), v) for (m, t), v in zip(cells, values)]
    return ("m", "t", "h0"), rows, []


def cmd_filtration(args, fam):
    from .sections import central_filtration, order_table

    rows = []
    for m in args.m:
        filt = central_filtration(fam, m, args.complement)
        for lam, block in zip(filt.jumps, filt.graded_bases):
            rows.append((m, str(lam), len(block), " ; ".join(str(s) for s in block)))
    notes = []
    for m in args.m:
        filt = central_filtration(fam, m, args.complement)
        table = order_table(fam, filt.space)
        notes.append(f"m={m} ord0: " + " ".join(f"{s}:{o}" for s, o in zip(table.sections, table.ord0)))
    return ("m", "lambda", "graded_dim", "basis"), rows, notes


def cmd_gram(args, fam):
    from .bergman import gram
    from .sections import central_filtration

    cells = [(m, t) for m in args.m for t in args.t_grid]

    def run(cell):
        m, t = cell
        return gram(fam, central_filtration(fam, m, args.complement), t, resolution=args.resolution).entries

    rows = []
    for (m, t), G in zip(cells, sweep(run, cells)):
        for i in range(G.shape[0]):
            for k in range(G.shape[1]):
                rows.append((m, t_label(t), i, k, G[i, k].real, G[i, k].imag))
    return ("m", "t", "i", "j", "re", "im"), rows, []


def _need_point(args):
    if args.point is None:
        raise UsageError("this subcommand needs --point")
    return point_parse(args.point)


def cmd_rho(args, fam):
    from .bergman import bergman_basis, rho

    x = _need_point(args)
    cells = [(m, t) for m in args.m for t in args.t_grid]
    values = sweep(lambda c: rho(bergman_basis(fam, c[0], c[1], args.resolution, args.method,
                                               args.complement), x), cells)
    return ("m", "t", "rho"), [(m, t_label(t), v) for (m, t), v in zip(cells, values)], []


def cmd_continuity(args, fam):
    from .bergman import continuity_probe

    x = _need_point(args)
    grid = [t for t in args.t_grid if t is not CENTRAL]
    results = sweep(lambda m: continuity_probe(fam, m, x, grid, args.resolution, args.method), args.m)
    rows = [(m, r.t.real, r.t.imag, r.rho_mean, r.rho_central, r.gap)
            for m, table in zip(args.m, results) for r in table]
    return ("m", "t_re", "t_im", "rho_mean", "rho_central", "gap"), rows, []


def cmd_phi(args, fam):
    from .bergman import phi

    cells = [(m, t) for m in args.m for t in args.t_grid]
    values = sweep(lambda c: phi(fam, c[0], c[1], args.resolution, args.method), cells)
    return ("m", "t", "phi"), [(m, t_label(t), v) for (m, t), v in zip(cells, values)], []


ALPHAS = {
    "one": lambda p: np.ones(len(p)),
    "x0": lambda p: np.abs(p[:, 0]) ** 2,
    "x1": lambda p: np.abs(p[:, 1]) ** 2,
    "x2": lambda p: np.abs(p[:, 2]) ** 2,
}


def cmd_pairing(args, fam):
    from .bergman import bergman_basis, current_pairing_by_parts, current_total_mass, fs_current_pairing
    from .fibergeom import fiber_grid

    alpha = ALPHAS[args.alpha]
    grid_t = [t for t in args.t_grid if t is not CENTRAL]
    if len(grid_t) != len(args.t_grid):
        raise UsageError("the current pairing is only defined on smooth fibers; drop 'central'")
    cells = [(m, t) for m in args.m for t in grid_t]

    def run(cell):
        m, t = cell
        grid = fiber_grid(fam, t, args.resolution)
        basis = bergman_basis(fam, m, t, args.resolution, args.method, grids=grid)
        value = fs_current_pairing(fam, m, t, alpha, basis=basis, grid=grid)
        if not args.tolerance_report:
            return (value,)
        return (value, current_pairing_by_parts(fam, m, t, alpha, basis=basis, grid=grid),
                current_total_mass(fam, m, t, basis=basis, grid=grid))

    cols = ("m", "t", "value") + (("by_parts", "total_mass") if args.tolerance_report else ())
    rows = [(m, t_label(t)) + v for (m, t), v in zip(cells, sweep(run, cells))]
    return cols, rows, []


def cmd_rees(args, fam):
    from .rees import rees_gr_dims

    results = sweep(lambda m: rees_gr_dims(fam, m, with_lambda=False), args.m)
    rows, notes = [], []
    for m, r in zip(args.m, results):
        gr = r.gr_dims
        for lam in sorted(r.dims):
            rows.append((m, lam, r.dims[lam], gr.get(lam, 0)))
        notes.append(f"m={m} total_gr={r.total} h0_central={r.central_dim} match={str(r.total == r.central_dim).lower()}")
    return ("m", "lambda", "dim_F", "dim_gr"), rows, notes


def cmd_volume(args, fam):
    from .fibergeom import central_grids, fiber_grid

    rows = []
    dumps = []
    for t in args.t_grid:
        if t is CENTRAL:
            grids = central_grids(fam, args.resolution)
            for j, (comp, g) in enumerate(zip(fam.components, grids)):
                rows.append((t_label(t), j, comp.multiplicity, g.volume, comp.multiplicity * g.volume))
                dumps.append((t_label(t), j, g))
        else:
            g = fiber_grid(fam, t, args.resolution)
            rows.append((t_label(t), -1, 1, g.volume, g.volume))
            dumps.append((t_label(t), -1, g))
    if args.dump_grid:
        lines = ["t,component,chart,u_re,u_im,branch,weight"]
        for label, j, g in dumps:
            lines += [",".join([label, str(j)] + [fmt(v) for v in r]) for r in g.to_rows()]
        Path(args.dump_grid).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return ("t", "component", "multiplicity", "volume", "weighted_volume"), rows, []


COMMANDS = {
    "h0": cmd_h0, "filtration": cmd_filtration, "gram": cmd_gram, "rho": cmd_rho,
    "continuity": cmd_continuity, "phi": cmd_phi, "pairing": cmd_pairing, "rees": cmd_rees,
    "volume": cmd_volume,
}

DEFAULT_T = {"h0": "central", "filtration": "central", "gram": "central", "rho": "central",
             "continuity": "log:1e-4..1e-1:4", "phi": "central,1", "pairing": "1", "rees": "1",
             "volume": "central,1"}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fiberbergman", description="Bergman kernels on degenerating plane curves")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--family", required=True, help="family JSON path or builtin name")
        p.add_argument("--m", default="1", help="'1..6' or '2,4,8'")
        p.add_argument("--t-grid", "--t", dest="t_grid", default=None)
        p.add_argument("--point", default=None, help="'a,b,c' homogeneous coordinates")
        p.add_argument("--resolution", type=int, default=64)
        p.add_argument("--method", choices=("eigen", "triangular"), default="eigen")
        p.add_argument("--complement", choices=("greedy", "reverse", "mixed"), default="greedy")
        p.add_argument("--out", default=None)
        p.add_argument("--json", action="store_true")
        if name == "pairing":
            p.add_argument("--alpha", choices=sorted(ALPHAS), default="x0")
            p.add_argument("--tolerance-report", action="store_true")
        if name == "volume":
            p.add_argument("--dump-grid", default=None)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError(f"a subcommand is required: {', '.join(SUBCOMMANDS)}")
        args.m = m_spec_parse(args.m)
        t_spec = args.t_grid if args.t_grid is not None else DEFAULT_T[args.command]
        args.t_grid = t_grid_parse(t_spec)
        path, digest = resolve_family(args.family)
        fam = read_family(path)
        manifest = {
            "tool": "fiberbergman", "version": __version__, "subcommand": args.command,
            "family": args.family, "family_sha256": digest, "m": args.m, "t_grid": t_spec,
            "point": args.point, "resolution": args.resolution, "method": args.method,
            "complement": args.complement,
        }
        for extra in ("alpha", "tolerance_report"):
            if hasattr(args, extra):
                manifest[extra] = getattr(args, extra)
        columns, rows, notes = COMMANDS[args.command](args, fam)
        emit(args, manifest, columns, rows, notes)
        return 0
    except FiberBergmanError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
