"""``qgband`` command line: validate, spectrum, sweep, gap, curve, polygon, perturb, oracle.

Exit codes: 0 success, 2 configuration error, 3 solver error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

from . import band_edge, config, dispersion, fd_oracle, polygon, secular
from .errors import ConfigError, SolverError
from .graph_model import apply_floquet, dirichlet_perturbation

log = logging.getLogger("qgband")


def _r(x):
    return float(f"{x:.12g}")


def _dump(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def cache_dir() -> Path:
    return Path(os.environ.get("QGBAND_CACHE_DIR") or Path.home() / ".cache" / "qgband")


def _write(out: Path | None, name: str, text: str) -> None:
    if out is None:
        return
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text)


def _source(args) -> dict:
    """Config document from ``--config``, ``--preset`` or the positional target."""
    if args.config and args.preset:
        raise ConfigError("give either --config or --preset, not both")
    if args.config:
        return config.load_config(args.config)
    name = args.preset or getattr(args, "target", None)
    if name is None:
        raise ConfigError("no graph given: use --config PATH or --preset NAME")
    if not args.preset and Path(name).is_file():
        return config.load_config(name)
    return config.preset_config(name)


def _graph(args):
    doc = _source(args)
    return doc, config.graph_from_config(doc)


def _floquet_vertex(doc, g):
    b = doc.get("floquet_vertex", "B")
    if b not in g.adjacency:
        raise ConfigError(f"floquet vertex {b!r} is not in the graph")
    return b


# --------------------------------------------------------------------------
# commands

def cmd_validate(args) -> int:
    doc, g = _graph(args)
    print(f"ok {doc.get('name', '')} vertices={len(g.vertices)} edges={len(g.edges)} "
          f"hash={config.config_hash(doc)}")
    return 0


def cmd_spectrum(args) -> int:
    doc, g = _graph(args)
    if args.k is not None:
        g = apply_floquet(g, _floquet_vertex(doc, g), args.k)
    for v in args.dirichlet_at or ():
        g = dirichlet_perturbation(g, v)
    lo, hi = args.range if args.range else (secular.default_lower_bound(g), 50.0)
    found = secular.eigenvalues_in(g, lo, hi)
    rows = []
    index = 1
    for lam, mult in found:
        print(f"lambda_{index} = {lam:.12g}  multiplicity {mult}")
        rows.append({"index": index, "lambda": _r(lam), "multiplicity": mult})
        index += mult
    if not found:
        print(f"no eigenvalues in [{lo:.12g}, {hi:.12g})")
    report = {"config_hash": config.config_hash(doc), "range": [_r(lo), _r(hi)],
              "dirichlet_at": list(args.dirichlet_at or ()), "k": args.k, "eigenvalues": rows}
    _write(args.out, "spectrum.json", _dump(report))
    return 0


def _sweep_outputs(doc, g, grid, J, jobs):
    b = _floquet_vertex(doc, g)
    gamma_b = g.condition(b).gamma
    h = config.config_hash(doc)
    table = dispersion.band_sweep(g, b, gamma_b, grid, J, jobs=jobs, config_hash=h)
    report = dispersion.spectrum_report(table)
    extra = {"grid": list(table.shape), "bands_requested": J, "floquet_vertex": b,
             "max_band1": _r(float(table.values[:, 0].max()))}
    if J >= 2:
        gap = report.gap_after(1)
        extra["min_band2"] = _r(float(table.values[:, 1].min()))
        extra["gap_1_2"] = {"open": gap is not None,
                            "interval": [_r(gap[0]), _r(gap[1])] if gap else None}
    doc_out = report.to_dict()
    doc_out.update(extra)
    return table.to_csv(), _dump(doc_out)


def cmd_sweep(args) -> int:
    doc, g = _graph(args)
    grid = tuple(args.grid)
    key_src = f"{config.config_hash(doc)}|{','.join(map(str, grid))}|{args.bands}"
    key = hashlib.sha256(key_src.encode()).hexdigest()
    cdir = cache_dir()
    csv_path, json_path = cdir / f"{key}.csv", cdir / f"{key}.json"
    if not args.no_cache and csv_path.is_file() and json_path.is_file():
        csv_text, json_text = csv_path.read_text(), json_path.read_text()
        source = "cache"
    else:
        csv_text, json_text = _sweep_outputs(doc, g, grid, args.bands, args.jobs)
        source = "computed"
        if not args.no_cache:
            try:
                cdir.mkdir(parents=True, exist_ok=True)
                csv_path.write_text(csv_text)
                json_path.write_text(json_text)
            except OSError as err:
                log.warning("could not write cache: %s", err)
    _write(args.out, "bands.csv", csv_text)
    _write(args.out, "spectrum_report.json", json_text)
    summary = json.loads(json_text)
    print(f"{source}: {csv_text.count(chr(10)) - 1} rows, bands {summary['bands']}")
    if "gap_1_2" in summary:
        gap = summary["gap_1_2"]
        print(f"gap between bands 1 and 2: {'open ' + str(gap['interval']) if gap['open'] else 'closed'}")
    return 0


def cmd_gap(args) -> int:
    doc, g = _graph(args)
    b = _floquet_vertex(doc, g)
    a = doc.get("reference_vertex", "A")
    rep = band_edge.check_gap(g, b, None, tuple(args.grid), a=a, jobs=args.jobs)
    text = _dump({"config_hash": config.config_hash(doc), **rep.to_dict()})
    _write(args.out, "gap.json", text)
    sys.stdout.write(text)
    return 0


def cmd_curve(args) -> int:
    doc, g = _graph(args)
    b = _floquet_vertex(doc, g)
    rep = band_edge.degenerate_curve(g, b, None, samples=args.points, seed=args.seed)
    text = _dump({"config_hash": config.config_hash(doc), **rep.to_dict()})
    _write(args.out, "degeneracy.json", text)
    _write(args.out, "curve.csv", rep.curve_csv())
    sys.stdout.write(text)
    return 0


def cmd_polygon(args) -> int:
    if args.preset:
        name = config.resolve_preset(args.preset)
        if name not in config.POLYGON_PRESETS:
            raise ConfigError(f"preset {name!r} is a graph, not a polygon")
        sides = config.POLYGON_PRESETS[name]
    elif args.sides:
        sides = tuple(args.sides)
    else:
        raise ConfigError("give four side lengths or --preset smooth-quadrangle")
    if len(sides) != 4:
        raise ConfigError(f"expected four side lengths, got {len(sides)}")
    if not all(s > 0 for s in sides):
        raise ConfigError("side lengths must be positive")
    cls = polygon.classify(sides)
    print(f"classification: {cls.value}")
    report = {"sides": [_r(s) for s in sides], "classification": cls.value}
    if cls is polygon.Classification.POINT:
        loc = polygon.point_location(sides)
        print(f"point: ({', '.join(f'{x:.12g}' for x in loc)})")
        report["point"] = [_r(x) for x in loc]
    elif cls is polygon.Classification.CURVE:
        curve = polygon.curve_samples(sides, args.points)
        topo = polygon.topology(sides)
        print(f"smooth: {str(curve.smooth).lower()}")
        print(f"topology: {topo.value}")
        print(f"samples: {len(curve.points())} max residual {curve.residuals().max():.3g}")
        report.update(smooth=curve.smooth, topology=topo.value, samples=int(len(curve.points())),
                      max_residual=float(f"{curve.residuals().max():.3g}"))
        _write(args.out, "polygon_branches.csv", curve.to_csv())
    _write(args.out, "polygon.json", _dump(report))
    return 0


def cmd_perturb(args) -> int:
    doc, g = _graph(args)
    b = _floquet_vertex(doc, g)
    spec = band_edge.PerturbSpec(args.length_jitter, args.coupling_jitter, args.potential_amplitude)
    rep = band_edge.perturb_and_verify(g, spec, args.seed, b=b, a=doc.get("reference_vertex", "A"),
                                       grid=tuple(args.grid), jobs=args.jobs)
    text = _dump({"config_hash": config.config_hash(doc), **rep.to_dict()})
    _write(args.out, f"robustness_seed{args.seed}.json", text)
    sys.stdout.write(text)
    if rep.error:
        print(rep.error, file=sys.stderr)
        return 3
    return 0


def cmd_oracle(args) -> int:
    doc, g = _graph(args)
    exact = secular.lowest_eigenvalues(g, args.bands)
    coarse = fd_oracle.oracle_eigenvalues(g, args.N / 2, args.bands)
    fine = fd_oracle.oracle_eigenvalues(g, args.N, args.bands)
    rows = []
    print(f"{'j':>3} {'secular':>16} {'oracle':>16} {'diff':>10} {'ratio':>8}")
    for j, (x, c, f) in enumerate(zip(exact, coarse, fine), start=1):
        err_c, err_f = abs(c - x), abs(f - x)
        ratio = err_c / err_f if err_c > 1e-9 and err_f > 0 else None
        print(f"{j:>3} {x:16.12g} {f:16.12g} {f - x:10.3g} {'-' if ratio is None else f'{ratio:8.4f}':>8}")
        rows.append({"index": j, "secular": _r(x), "oracle": _r(f), "difference": _r(f - x),
                     "richardson_ratio": None if ratio is None else _r(ratio)})
    _write(args.out, "oracle.json", _dump({"config_hash": config.config_hash(doc), "N": args.N,
                                           "eigenvalues": rows}))
    return 0


# --------------------------------------------------------------------------
# parser

def _graph_args(p, grid_default=None):
    p.add_argument("target", nargs="?", help="preset name or config path")
    p.add_argument("--config", type=Path, help="JSON graph config (schema qgband-config-1)")
    p.add_argument("--preset", help=f"builtin preset ({', '.join(config.preset_names())})")
    p.add_argument("--out", type=Path, help="directory for JSON/CSV artifacts")
    p.add_argument("--jobs", type=int, default=1, help="worker threads")
    if grid_default:
        p.add_argument("--grid", type=int, nargs=3, metavar=("N1", "N2", "N3"), default=grid_default)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qgband", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a graph config")
    _graph_args(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("spectrum", help="eigenvalues of the compact graph in a range")
    _graph_args(p)
    p.add_argument("--range", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--dirichlet-at", action="append", metavar="V", help="cut vertex V with Dirichlet")
    p.add_argument("--k", type=float, nargs="+", help="quasimomentum applied at the Floquet vertex")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("sweep", help="band table over the quasimomentum torus")
    _graph_args(p)
    p.add_argument("--grid", type=int, nargs="+", metavar="N", default=[16, 16, 16])
    p.add_argument("--bands", type=int, default=2, metavar="J")
    p.add_argument("--no-cache", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gap", help="verify the gap chain on a grid")
    _graph_args(p, [16, 16, 16])
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("curve", help="predict and verify the degeneracy curve")
    _graph_args(p)
    p.add_argument("--points", type=int, default=100, help="on-curve samples")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("polygon", help="quadrangle closure classification and branches")
    p.add_argument("sides", type=float, nargs="*")
    p.add_argument("--preset")
    p.add_argument("--points", type=int, default=400)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_polygon)

    p = sub.add_parser("perturb", help="seeded robustness run")
    _graph_args(p, [12, 12, 12])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--length-jitter", type=float, default=0.02)
    p.add_argument("--coupling-jitter", type=float, default=0.1)
    p.add_argument("--potential-amplitude", type=float, default=0.1)
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("oracle", help="compare with the finite-difference oracle")
    _graph_args(p)
    p.add_argument("--N", type=float, default=400, help="grid points per unit length")
    p.add_argument("--bands", type=int, default=6)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except SolverError as err:
        k = getattr(err, "k", None)
        print(f"solver error: {err}" + (f" [k={k}]" if k is not None else ""), file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
