"""Command-line front end.

Subcommands:

* ``catalog``   -- list the built-in potentials and their ladders
* ``deform``    -- build a family member, write x / V / V~ curves
* ``spectrum``  -- finite-difference verification of a family member
* ``state``     -- emit a deformed bound state
* ``ladder``    -- apply native or conjugated ladder operators
* ``sweep``     -- evaluate many family parameters concurrently
* ``verify``    -- run the full property suite

Exit codes: 0 success, 1 bad flags or invalid request, 2 singular family
parameter, 3 eigensolver failure, 4 verification failure.

CSV output uses a header row, comma separators, shortest round-trip float
formatting and LF line endings; JSON output has sorted keys.  Both are
byte-deterministic for a fixed configuration.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .catalog import (
    CATALOG,
    BasePotential,
    GroundStateAnnihilatedError,
    NoSuchBoundStateError,
    apply_ladder,
    make_potential,
)
from .factorize import (
    Deformation,
    SingularCError,
    composite_ladder,
    deform_chain,
    paper_c_map,
)
from .grid import Grid, GridFunction, count_nodes, inner_product
from .spectral import SolverError, assemble, compare_spectra, eigenvector_overlap, lowest_eigenpairs
from .verify import available_checks, run_suite

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SINGULAR = 2
EXIT_SOLVER = 3
EXIT_VERIFY = 4


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems with exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class _CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_USAGE):
        super().__init__(message)
        self.code = code


def _fmt(value: float) -> str:
    return repr(float(value))


def _write_text(out: str | None, text: str):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="")


def _csv(header: list[str], columns: list[np.ndarray]) -> str:
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _json_text(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


# -- configuration ----------------------------------------------------------

_CONFIG_KEYS = ("potential", "A", "B", "alpha", "L", "n", "C", "chain",
                "c_scale", "grid", "out", "format", "states", "levels",
                "threshold", "tol", "k", "direction")


def _merge_config(args):
    """Flags first, then the optional JSON config file (no env vars)."""
    cfg = {}
    path = getattr(args, "config", None)
    if path:
        try:
            cfg = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as err:
            raise _CliError(f"cannot read config {path}: {err}")
        unknown = set(cfg) - set(_CONFIG_KEYS)
        if unknown:
            raise _CliError(f"unknown config keys: {sorted(unknown)}")
    merged = dict(cfg)
    for key in _CONFIG_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            merged[key] = v
    return merged


def _resolve_potential(cfg) -> BasePotential:
    name = cfg.get("potential")
    if not name:
        raise _CliError("--potential is required")
    if name not in CATALOG:
        raise _CliError(f"unknown potential {name!r}; choose from {sorted(CATALOG)}")
    params = {}
    for key, target in (("A", "A"), ("B", "B"), ("alpha", "alpha"), ("L", "L")):
        if cfg.get(key) is not None:
            params[target] = float(cfg[key])
    try:
        return make_potential(name, **params)
    except (TypeError, ValueError) as err:
        raise _CliError(f"bad parameters for {name}: {err}")


def _resolve_grid(cfg, pot: BasePotential) -> Grid:
    spec = cfg.get("grid")
    if spec is None:
        return pot.default_grid()
    try:
        lo, hi, n = str(spec).split(":")
        return Grid(float(lo), float(hi), int(n))
    except ValueError as err:
        raise _CliError(f"bad --grid {spec!r} (want MIN:MAX:N): {err}")


def _parse_chain(spec: str) -> list[tuple[int, float]]:
    steps = []
    try:
        for part in str(spec).split(","):
            lvl, c = part.split(":")
            steps.append((int(lvl), float(c)))
    except ValueError:
        raise _CliError(f"bad --chain {spec!r} (want N:C[,N:C...])")
    if not steps:
        raise _CliError("--chain needs at least one step")
    return steps


def _parse_states(spec) -> list[int]:
    if spec is None:
        return []
    try:
        return [int(s) for s in str(spec).split(",") if s != ""]
    except ValueError:
        raise _CliError(f"bad --states {spec!r} (want comma-separated levels)")


class _Family:
    """A resolved single- or multi-step family on a concrete grid."""

    def __init__(self, cfg):
        self.pot = _resolve_potential(cfg)
        self.grid = _resolve_grid(cfg, self.pot)
        self.c_scale = cfg.get("c_scale", "normalized")
        if self.c_scale not in ("normalized", "paper"):
            raise _CliError(f"bad --c-scale {self.c_scale!r}")
        chain_spec = cfg.get("chain")
        c = cfg.get("C")
        n = cfg.get("n")
        if chain_spec is not None and (c is not None or n is not None):
            raise _CliError("--chain excludes --n/--C")
        if chain_spec is not None:
            self.steps = _parse_chain(chain_spec)
        else:
            if c is None or n is None:
                raise _CliError("need either --chain or both --n and --C")
            self.steps = [(int(n), float(c))]
        self.is_chain = chain_spec is not None
        track = max(lvl for lvl, _ in self.steps) + 1
        track = max(track, int(cfg.get("levels", 5)) + 2, 6)
        try:
            self.result = deform_chain(self.pot, self.steps, grid=self.grid,
                                       c_scale=self.c_scale, n_track=track)
        except NoSuchBoundStateError as err:
            raise _CliError(str(err))
        except ValueError as err:
            if isinstance(err, SingularCError):
                raise
            raise _CliError(str(err))
        self.shift = sum(d.energy for d in self.result.deformations)

    @property
    def deformed(self) -> GridFunction:
        return self.result.potential

    @property
    def base_shifted(self) -> np.ndarray:
        return self.pot.potential(self.grid).values - self.shift

    def state(self, k: int):
        for s in self.result.states:
            if s.level == k:
                return s
        raise _CliError(f"level {k} is not tracked (have "
                        f"{[s.level for s in self.result.states]})")

    def predicted_levels(self, m: int) -> list[float]:
        energies = sorted(s.energy for s in self.result.states)
        if m > len(energies):
            raise _CliError(f"only {len(energies)} levels tracked")
        return energies[:m]

    def default_threshold(self, m: int) -> float:
        if self.pot.continuum_threshold is not None:
            return self.pot.continuum_threshold - self.shift
        energies = sorted(s.energy for s in self.result.states)
        if m < len(energies):
            return 0.5 * (energies[m - 1] + energies[m])
        return energies[-1] + 1.0


def _singular_message(err: SingularCError, cfg=None) -> str:
    msg = f"singular family parameter: {err}"
    if err.scale_map is None and cfg is not None:
        # normalized-scale run: still show the paper interval when defined
        try:
            pot = _resolve_potential(cfg)
            lvl = int(cfg.get("n", 0))
            m = paper_c_map(pot, lvl)
            lo, hi = m.interval(err.forbidden)
            msg += f"; paper-scale forbidden interval [{lo:g}, {hi:g}]"
        except (ValueError, _CliError):
            pass
    return msg + "\n"


# -- subcommands --------------------------------------------------------------


def cmd_catalog(args) -> int:
    entries = []
    for name, cls in sorted(CATALOG.items()):
        pot = cls()
        g = pot.default_grid()
        formula = {
            "oscillator": "E_k = 2k",
            "morse": "E_k = k*alpha*(2A - k*alpha), k*alpha < A",
            "well": "E_k = k(k+2) pi^2 / L^2",
            "cprs": "E_0 = 0, E_k = 2k + 4 (k >= 1)",
        }[name]
        entries.append({
            "name": name,
            "parameters": pot.parameters,
            "bound_count": pot.bound_count,
            "energies": formula,
            "ladder": {"kind": pot.ladder.kind, **pot.ladder.metadata},
            "default_grid": [g.x_min, g.x_max, g.n_points],
        })
    if args.potential:
        if args.potential not in CATALOG:
            raise _CliError(f"unknown potential {args.potential!r}")
        entries = [e for e in entries if e["name"] == args.potential]
    if args.json:
        _write_text(args.out, _json_text(entries))
        return EXIT_OK
    lines = []
    for e in entries:
        count = "unbounded" if e["bound_count"] is None else str(e["bound_count"])
        lines.append(f"{e['name']}")
        lines.append(f"  parameters : {e['parameters'] or 'none'}")
        lines.append(f"  bound count: {count}")
        lines.append(f"  energies   : {e['energies']}")
        lines.append(f"  ladder     : {e['ladder']['kind']}")
        g = e["default_grid"]
        lines.append(f"  grid       : [{g[0]}, {g[1]}] x {g[2]}")
    _write_text(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def _family_columns(fam: _Family, cfg, include_f: bool):
    header = ["x", "V", "Vtilde"]
    cols = [fam.grid.points, fam.base_shifted, fam.deformed.values]
    if include_f:
        header.append("f")
        cols.append(fam.result.deformations[-1].deformation_function().values)
    for k in _parse_states(cfg.get("states")):
        header.append(f"psi_{k}")
        cols.append(fam.state(k).wavefunction.values)
    return header, cols


def cmd_deform(args) -> int:
    cfg = _merge_config(args)
    try:
        fam = _Family(cfg)
    except SingularCError as err:
        sys.stderr.write(_singular_message(err, cfg))
        return EXIT_SINGULAR
    header, cols = _family_columns(fam, cfg, args.include_f)
    fmt = cfg.get("format", "csv")
    if fmt == "json":
        payload = {name: [float(v) for v in col] for name, col in zip(header, cols)}
        _write_text(cfg.get("out"), _json_text(payload))
    elif fmt == "csv":
        _write_text(cfg.get("out"), _csv(header, cols))
    else:
        raise _CliError(f"bad --format {fmt!r}")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    cfg = _merge_config(args)
    try:
        fam = _Family(cfg)
    except SingularCError as err:
        sys.stderr.write(_singular_message(err, cfg))
        return EXIT_SINGULAR
    m = int(cfg.get("levels", 5))
    if fam.pot.bound_count is not None:
        m = min(m, fam.pot.bound_count)
    predicted = fam.predicted_levels(m)
    threshold = float(cfg["threshold"]) if cfg.get("threshold") is not None \
        else fam.default_threshold(m)
    tol = float(cfg.get("tol", 1e-2))
    predicted = [e for e in predicted if e < threshold]
    try:
        report = compare_spectra(predicted, assemble(fam.deformed), threshold,
                                 tol, label=fam.pot.name,
                                 parameters={**fam.pot.parameters,
                                             "steps": fam.steps,
                                             "c_scale": fam.c_scale})
    except SolverError as err:
        sys.stderr.write(f"eigensolver failure: {err}\n")
        return EXIT_SOLVER
    _write_text(cfg.get("out"), _json_text(report.to_dict()))
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_state(args) -> int:
    cfg = _merge_config(args)
    if cfg.get("k") is None:
        raise _CliError("--k is required")
    try:
        fam = _Family(cfg)
    except SingularCError as err:
        sys.stderr.write(_singular_message(err, cfg))
        return EXIT_SINGULAR
    st = fam.state(int(cfg["k"]))
    meta = {
        "level": st.level,
        "energy": st.energy,
        "nodes": count_nodes(st.wavefunction),
        "norm": inner_product(st.wavefunction, st.wavefunction),
        "provenance": {k: v for k, v in st.provenance.items()
                       if isinstance(v, (int, float, str))},
    }
    if args.check:
        idx = sorted(s.energy for s in fam.result.states).index(st.energy)
        pairs = lowest_eigenpairs(assemble(fam.deformed), idx + 1)
        meta["fd_energy"] = pairs[idx][0]
        meta["fd_overlap"] = eigenvector_overlap(pairs[idx][1], st.wavefunction)
    sys.stderr.write(_json_text(meta))
    _write_text(cfg.get("out"),
                _csv(["x", f"psi_{st.level}"],
                     [fam.grid.points, st.wavefunction.values]))
    return EXIT_OK


def cmd_ladder(args) -> int:
    cfg = _merge_config(args)
    if cfg.get("k") is None or cfg.get("direction") is None:
        raise _CliError("--k and --direction are required")
    k = int(cfg["k"])
    direction = str(cfg["direction"])
    if direction not in ("up", "down"):
        raise _CliError("--direction must be up or down")
    pot = _resolve_potential(cfg)
    grid = _resolve_grid(cfg, pot)
    target_level = k + 1 if direction == "up" else k - 1
    try:
        if cfg.get("C") is None:
            state = pot.eigenstate(k, grid)
            image = apply_ladder(state, direction)
            target = pot.eigenstate(target_level, grid).wavefunction
        else:
            n = int(cfg.get("n", 0))
            d = Deformation.from_eigenstate(
                pot.eigenstate(n, grid), float(cfg["C"]),
                c_scale=cfg.get("c_scale", "normalized"))
            image = composite_ladder(d, pot, d.map_state(pot.eigenstate(k, grid)),
                                     direction)
            target = d.map_state(pot.eigenstate(target_level, grid)).wavefunction
    except SingularCError as err:
        sys.stderr.write(_singular_message(err, cfg))
        return EXIT_SINGULAR
    except (GroundStateAnnihilatedError, NoSuchBoundStateError, ValueError) as err:
        raise _CliError(str(err))
    cos = eigenvector_overlap(image, target)
    scale = inner_product(image, target) / inner_product(target, target)
    sys.stderr.write(_json_text({
        "level": k, "direction": direction, "cosine": cos,
        "proportionality": scale,
    }))
    _write_text(cfg.get("out"),
                _csv(["x", "image", "target"],
                     [grid.points, image.values, target.values]))
    return EXIT_OK


def _sweep_values(args) -> list[float]:
    if args.C_list:
        try:
            return [float(v) for v in args.C_list.split(",")]
        except ValueError:
            raise _CliError(f"bad --C-list {args.C_list!r}")
    if args.C_range:
        try:
            lo, hi, n = args.C_range.split(":")
            return [float(v) for v in np.linspace(float(lo), float(hi), int(n))]
        except ValueError:
            raise _CliError(f"bad --C-range {args.C_range!r} (want LO:HI:N)")
    raise _CliError("sweep needs --C-list or --C-range")


def cmd_sweep(args) -> int:
    cfg = _merge_config(args)
    values = _sweep_values(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def one(item):
        idx, c = item
        entry = {"index": idx, "C": c, "c_scale": cfg.get("c_scale", "normalized")}
        local = dict(cfg)
        local["C"] = c
        local.pop("chain", None)
        try:
            fam = _Family(local)
        except SingularCError as err:
            entry["status"] = "singular"
            entry["forbidden_normalized"] = list(err.forbidden)
            if err.scale_map is not None:
                entry["forbidden_paper"] = list(err.scale_map.interval(err.forbidden))
            return entry
        header, cols = _family_columns(fam, local, args.include_f)
        fname = f"member_{idx:03d}.csv"
        (out_dir / fname).write_text(_csv(header, cols), encoding="utf-8",
                                     newline="")
        entry["status"] = "ok"
        entry["file"] = fname
        entry["max_dev_from_base"] = float(
            np.max(np.abs(fam.deformed.values - fam.base_shifted)))
        return entry

    workers = args.workers or min(8, len(values))
    if workers <= 1:
        entries = [one(it) for it in enumerate(values)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            entries = list(pool.map(one, enumerate(values)))
    (out_dir / "index.json").write_text(_json_text(entries), encoding="utf-8",
                                        newline="")
    sys.stderr.write(f"wrote {sum(e['status'] == 'ok' for e in entries)} member "
                     f"curves to {out_dir}\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    only = None
    if args.only:
        only = [s for sel in args.only for s in sel.split(",") if s]
        known = available_checks()
        for sel in only:
            if not any(sel in name for name in known):
                raise _CliError(f"--only {sel!r} matches no check; "
                                f"available: {', '.join(known)}")
    results = run_suite(only=only, grid_refine=args.grid_refine)
    for r in results:
        mark = "PASS" if r.passed else "FAIL"
        print(f"{mark} {r.name}: measured {r.measured:.6g} "
              f"(tolerance {r.tolerance:.6g}, {r.seconds:.2f}s) -- {r.detail}")
    if args.json:
        _write_text(args.json, _json_text([r.to_dict() for r in results]))
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"FAILED: {', '.join(failed)}")
        return EXIT_VERIFY
    print(f"all {len(results)} checks passed")
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def _add_family_flags(p: argparse.ArgumentParser):
    p.add_argument("--potential", choices=sorted(CATALOG), help="base potential")
    p.add_argument("--A", type=float, help="Morse depth parameter")
    p.add_argument("--B", type=float, help="Morse range prefactor")
    p.add_argument("--alpha", type=float, help="Morse decay rate")
    p.add_argument("--L", type=float, help="well width")
    p.add_argument("--n", type=int, help="factorization level")
    p.add_argument("--C", type=float, help="family parameter")
    p.add_argument("--chain", help="multi-step spec, e.g. 0:1e6,1:2.5")
    p.add_argument("--c-scale", dest="c_scale", choices=["normalized", "paper"],
                   help="parameter convention (default normalized)")
    p.add_argument("--grid", help="override grid as MIN:MAX:N")
    p.add_argument("--config", help="JSON config file; flags take precedence")
    p.add_argument("--out", help="output path (default stdout)")


def build_parser() -> _Parser:
    parser = _Parser(prog="isospec",
                     description="isospectral potential families with "
                                 "finite-difference verification")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("catalog", help="list built-in potentials")
    p.add_argument("--json", action="store_true")
    p.add_argument("--potential", help="show a single entry")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_catalog)

    p = sub.add_parser("deform", help="emit x, V, V~ curves for one member")
    _add_family_flags(p)
    p.add_argument("--states", help="comma-separated levels to add as columns")
    p.add_argument("--include-f", action="store_true",
                   help="add the deformation profile column")
    p.add_argument("--format", choices=["csv", "json"])
    p.set_defaults(fn=cmd_deform)

    p = sub.add_parser("spectrum", help="verify a member with the FD solver")
    _add_family_flags(p)
    p.add_argument("--levels", type=int, help="number of levels (default 5)")
    p.add_argument("--threshold", type=float,
                   help="count levels below this energy")
    p.add_argument("--tol", type=float, help="per-level tolerance (default 1e-2)")
    p.set_defaults(fn=cmd_spectrum)

    p = sub.add_parser("state", help="emit one deformed bound state")
    _add_family_flags(p)
    p.add_argument("--k", type=int, help="state level")
    p.add_argument("--check", action="store_true",
                   help="also report FD eigenvector overlap")
    p.set_defaults(fn=cmd_state)

    p = sub.add_parser("ladder", help="apply ladder operators")
    _add_family_flags(p)
    p.add_argument("--k", type=int, help="input state level")
    p.add_argument("--direction", choices=["up", "down"])
    p.set_defaults(fn=cmd_ladder)

    p = sub.add_parser("sweep", help="evaluate many family parameters")
    _add_family_flags(p)
    p.add_argument("--C-list", dest="C_list", help="comma-separated C values")
    p.add_argument("--C-range", dest="C_range", help="LO:HI:N linear range")
    p.add_argument("--states", help="state columns per member")
    p.add_argument("--include-f", action="store_true")
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.add_argument("--workers", type=int, help="thread count (1 = serial)")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("verify", help="run the property suite")
    p.add_argument("--only", action="append",
                   help="substring filter, repeatable or comma-separated")
    p.add_argument("--grid-refine", dest="grid_refine", type=int, default=1,
                   help="refine default grids by this factor")
    p.add_argument("--json", help="also write results as JSON to this path")
    p.set_defaults(fn=cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return err.code if isinstance(err.code, int) else EXIT_USAGE
    try:
        return args.fn(args)
    except _CliError as err:
        sys.stderr.write(f"error: {err}\n")
        return err.code
    except SingularCError as err:
        sys.stderr.write(_singular_message(err))
        return EXIT_SINGULAR
    except SolverError as err:
        sys.stderr.write(f"eigensolver failure: {err}\n")
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
