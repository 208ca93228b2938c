"""
Command-line front end.

    ballspectra roots psi 1 1
    ballspectra eval --mode 1,1,0,+ --dims 16x16x32 --out mode.vtk
    ballspectra project --field grid.csv --n-modes 30 --out coeffs.json
    ballspectra solve --problem 1 --lambda 1 --rhs f.json
    ballspectra verify --suite orthonormality --n-modes 30
    ballspectra streamlines --mode 1,1,0,+ --seed 0,0,-0.5 --out line.csv

Exit codes: 0 success, 1 verification failure or unsolvable system,
2 usage error, 3 I/O error. Global options may also come from a
``key = value`` file given with ``--config``; command-line flags win.
When ``--out`` is absent and BALLSPECTRA_OUT_DIR is set, files go there
under a per-command default name; otherwise results are written to stdout.
"""
import argparse
import json
import os
import sys

from . import fieldio, roots, verify
from .modes import ALL_FAMILIES, enumerate_modes, make_mode, parse_mode
from .quad import build_quadrature, default_orders, load_spectral_field, project
from .solve import NotSolvable, solve_problem1, solve_problem2, solve_problem3

OUT_DIR_ENV = "BALLSPECTRA_OUT_DIR"

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

_CONFIG_KEYS = {"radius", "n_modes", "lambda_max", "quad", "eps_spec", "seed", "out"}


class UsageError(Exception):
    pass


def _parse_dims(text, what="--quad"):
    try:
        dims = tuple(int(p) for p in text.lower().split("x"))
    except ValueError:
        raise UsageError(f"{what} expects NrxNtxNp, got {text!r}") from None
    if len(dims) != 3 or min(dims) < 2:
        raise UsageError(f"{what} expects three integers >= 2, got {text!r}")
    return dims


def _parse_point(text):
    try:
        p = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"expected x,y,z, got {text!r}") from None
    if len(p) != 3:
        raise UsageError(f"expected x,y,z, got {text!r}")
    return p


def read_config(path):
    """Parse a flat ``key = value`` file (comments with #, optional quotes)."""
    cfg = {}
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise OSError(exc.errno, f"cannot read config {path}: {exc.strerror}") from exc
    for num, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line or line.startswith("["):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{num}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONFIG_KEYS:
            raise UsageError(f"{path}:{num}: unknown key {key!r}")
        cfg[key] = value.strip("\"'")
    return cfg


def _global_options(p):
    p.add_argument("--config", help="key = value file with defaults for the options below")
    p.add_argument("--radius", type=float, help="ball radius R (default 1)")
    p.add_argument("--n-modes", type=int, help="truncate to the first N modes")
    p.add_argument("--lambda-max", type=float, help="truncate to |eigenvalue| <= L")
    p.add_argument("--quad", help="quadrature orders NrxNtxNp")
    p.add_argument("--eps-spec", type=float, help="resonance band half-width")
    p.add_argument("--seed", type=int, help="seed for randomised checks (default 0)")
    p.add_argument("--out", help="output file")


def build_parser():
    parser = argparse.ArgumentParser(prog="ballspectra", description=__doc__.split("\n\n")[0].strip())
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("roots", help="tables of rho_{n,m} (psi) or alpha_{n,m} (psi-prime)")
    p.add_argument("kind", choices=["psi", "psi-prime"])
    p.add_argument("n_max", type=int)
    p.add_argument("m_max", type=int)
    p.add_argument("--json", dest="json_out", help="also write the table as JSON")
    _global_options(p)

    p = sub.add_parser("eval", help="sample a mode or spectral field on a grid")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--mode", help="mode n,m,k,{+|-|g}")
    src.add_argument("--field", help="SpectralField JSON")
    p.add_argument("--dims", default="16x16x32", help="grid NrxNtxNp")
    p.add_argument("--format", choices=["csv", "vtk"], help="default: from --out extension, else csv")
    _global_options(p)

    p = sub.add_parser("project", help="project a sampled field onto the eigenbasis")
    p.add_argument("--field", required=True, help="grid field (.csv or .vtk)")
    _global_options(p)

    p = sub.add_parser("solve", help="solve model problem 1, 2 or 3")
    p.add_argument("--problem", type=int, choices=[1, 2, 3], required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--rhs", required=True, help="right side as SpectralField JSON")
    p.add_argument("--orth-tol", type=float)
    _global_options(p)

    p = sub.add_parser("verify", help="run self-checks and print a JSON report")
    p.add_argument("--suite", default="all", choices=["all"] + list(verify.SUITES))
    _global_options(p)

    p = sub.add_parser("streamlines", help="trace a streamline of a mode or field")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--mode", help="mode n,m,k,{+|-|g}")
    src.add_argument("--field", help="SpectralField JSON")
    p.add_argument("--seed-point", "--seed", dest="seed_point", required=True, help="start x,y,z")
    p.add_argument("--step", type=float, help="RK4 time step (default 1e-3 R)")
    p.add_argument("--max-steps", type=int, default=100000)
    p.add_argument("--backward", action="store_true")
    p.add_argument("--format", choices=["csv", "vtk"])
    p.add_argument("--config")
    p.add_argument("--radius", type=float)
    p.add_argument("--out")
    return parser


def resolve_config(args):
    """Merge config file values under explicit flags; returns a plain dict."""
    file_cfg = read_config(args.config) if getattr(args, "config", None) else {}
    cfg = {}

    def pick(key, conv, default=None):
        val = getattr(args, key, None)
        if val is None and key in file_cfg:
            try:
                val = conv(file_cfg[key])
            except ValueError:
                raise UsageError(f"config value {key} = {file_cfg[key]!r} is invalid") from None
        cfg[key] = default if val is None else val

    pick("radius", float, 1.0)
    pick("n_modes", int)
    pick("lambda_max", float)
    pick("quad", str)
    pick("eps_spec", float)
    pick("seed", int, 0)
    pick("out", str)
    if cfg["radius"] <= 0:
        raise UsageError("--radius must be positive")
    if cfg["n_modes"] is not None and cfg["n_modes"] < 1:
        raise UsageError("--n-modes must be >= 1")
    if cfg["lambda_max"] is not None and cfg["lambda_max"] <= 0:
        raise UsageError("--lambda-max must be positive")
    if cfg["quad"] is not None:
        cfg["quad"] = _parse_dims(cfg["quad"])
    return cfg


def _destination(cfg, default_name):
    if cfg.get("out"):
        return cfg["out"]
    out_dir = os.environ.get(OUT_DIR_ENV)
    if out_dir:
        return os.path.join(out_dir, default_name)
    return None


def _emit_text(text, dest):
    if dest is None:
        sys.stdout.write(text)
    else:
        with open(dest, "w", newline="\n") as fh:
            fh.write(text)


def _emit_json(obj, dest):
    _emit_text(json.dumps(obj, indent=1) + "\n", dest)


def _truncation(cfg, families=ALL_FAMILIES):
    if cfg["n_modes"] is not None and cfg["lambda_max"] is not None:
        raise UsageError("give at most one of --n-modes and --lambda-max")
    if cfg["lambda_max"] is not None:
        return enumerate_modes(families, max_abs=cfg["lambda_max"], R=cfg["radius"])
    return enumerate_modes(families, count=cfg["n_modes"] or 30, R=cfg["radius"])


def _source(args, cfg):
    if args.mode:
        try:
            return make_mode(parse_mode(args.mode), cfg["radius"])
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    sf = load_spectral_field(args.field)
    if args.radius is not None and sf.R != cfg["radius"]:
        raise UsageError(f"--radius {cfg['radius']} differs from the field's R = {sf.R}")
    return sf


def cmd_roots(args, cfg):
    if args.n_max < 0 or args.n_max > roots.MAX_DEGREE or args.m_max < 1 or args.m_max > roots.MAX_ROOT_INDEX:
        raise UsageError(f"need 0 <= n_max <= {roots.MAX_DEGREE} and 1 <= m_max <= {roots.MAX_ROOT_INDEX}")
    table = roots.PSI_ZEROS if args.kind == "psi" else roots.PSI_PRIME_ZEROS
    rows = [(n, m, table.get(n, m)) for n in range(args.n_max + 1) for m in range(1, args.m_max + 1)]
    text = "n m z\n" + "".join(f"{n} {m} {z:.16g}\n" for n, m, z in rows)
    _emit_text(text, cfg["out"])
    if args.json_out:
        R = cfg["radius"]
        _emit_json({"kind": table.kind, "R": R,
                    "entries": [{"n": n, "m": m, "z": z, "eigenvalue": z / R} for n, m, z in rows]},
                   args.json_out)
    return EXIT_OK


def _grid_format(args, dest):
    if args.format:
        return args.format
    if dest and dest.lower().endswith(".vtk"):
        return "vtk"
    return "csv"


def _export(obj, dest, fmt):
    fieldio.export(obj, sys.stdout if dest is None else dest, fmt)


def cmd_eval(args, cfg):
    src = _source(args, cfg)
    dims = _parse_dims(args.dims, "--dims")
    gf = fieldio.sample(src, dims, cfg["radius"] if args.mode else src.R)
    dest = _destination(cfg, "field." + (args.format or "csv"))
    _export(gf, dest, _grid_format(args, dest))
    return EXIT_OK


def cmd_project(args, cfg):
    gf = fieldio.load_grid(args.field)
    if args.radius is not None and gf.R != cfg["radius"]:
        raise UsageError(f"--radius {cfg['radius']} differs from the grid's R = {gf.R}")
    cfg = dict(cfg, radius=gf.R)
    modes = _truncation(cfg)
    n_max = max(md.index.n for md in modes)
    m_max = max(md.index.m for md in modes)
    orders = cfg["quad"] or default_orders(n_max, m_max)
    sf = project(gf, modes, build_quadrature(*orders, R=gf.R))
    _emit_json(sf.to_json(), _destination(cfg, "projection.json"))
    return EXIT_OK


def cmd_solve(args, cfg):
    f = load_spectral_field(args.rhs)
    solver = {1: solve_problem1, 2: solve_problem2, 3: solve_problem3}[args.problem]
    dest = _destination(cfg, "solution.json")
    try:
        rep = solver(f, args.lam, eps_spec=cfg["eps_spec"], orth_tol=args.orth_tol)
    except NotSolvable as exc:
        _emit_json(exc.report.to_json(), dest)
        print(f"ballspectra: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ZeroDivisionError as exc:
        raise UsageError(str(exc)) from None
    _emit_json(rep.to_json(), dest)
    return EXIT_OK


def cmd_verify(args, cfg):
    names = None if args.suite == "all" else [args.suite]
    report = verify.run_all(cfg, names)
    _emit_json(report, _destination(cfg, "verify.json"))
    return EXIT_OK if report["passed"] else EXIT_FAIL


def cmd_streamlines(args, cfg):
    src = _source(args, cfg)
    R = cfg["radius"] if args.mode else src.R
    sl = fieldio.trace_streamline(src, _parse_point(args.seed_point), step=args.step,
                                  max_steps=args.max_steps, R=R,
                                  direction=-1 if args.backward else 1)
    dest = _destination(cfg, "streamline." + (args.format or "csv"))
    fmt = _grid_format(args, dest)
    _export(sl, dest, fmt)
    print(f"ballspectra: {len(sl.points)} points, termination={sl.termination}", file=sys.stderr)
    return EXIT_OK


COMMANDS = {
    "roots": cmd_roots,
    "eval": cmd_eval,
    "project": cmd_project,
    "solve": cmd_solve,
    "verify": cmd_verify,
    "streamlines": cmd_streamlines,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(f"ballspectra: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"ballspectra: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"ballspectra: invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
