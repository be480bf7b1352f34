"""swme command line: simulate, certify, build-closure, eigen-table."""
import argparse
import dataclasses
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, DegreeMismatch, SingularMatch, SwmeError
from .io import CUTS, ConservationMonitor, RunConfig, report_header, write_cut_line, write_snapshot
from .models import CLOSED_FORM_VARIANTS, ModelVariant, coefficient_matrices
from .spectral import analytic_eigenvalues, report_from_matrix
from .state import PrimitiveState, SourceParams

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _common(p):
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--variant", default=None, help="SWME, HSWME, beta, global or example")
    p.add_argument("--order", type=int, default=None, help="number of moments N")
    p.add_argument("--seed", type=int, default=None)


def build_parser():
    ap = _Parser(prog="swme", description=__doc__)
    ap.add_argument("--version", action="version", version=f"swme {__version__}")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="run a scenario and write snapshots and cut-lines")
    p.add_argument("--config", default=None, help="INI file with scenario/model/solver/output sections")
    p.add_argument("--resolution", type=int, default=None)
    p.add_argument("--cfl", type=float, default=None)
    _common(p)

    p = sub.add_parser("certify", help="invariance and hyperbolicity sweep")
    p.add_argument("--orders", default=None, help="e.g. 1-5 or 2,5,10 (overrides --order)")
    p.add_argument("--samples", type=int, default=20, help="random states per (variant, N)")
    p.add_argument("--far-samples", type=int, default=100, help="states far from equilibrium")
    p.add_argument("--angles", type=int, default=16)
    _common(p)

    p = sub.add_parser("build-closure", help="construct a last-row closure for a target polynomial")
    p.add_argument("--target", default="default",
                   help="default | lobatto | shift:C | legendre:c0,c1,... (Legendre coefficients in xi)")
    _common(p)

    p = sub.add_parser("eigen-table", help="analytic vs numeric eigenvalues")
    p.add_argument("--state", default="h=1,um=0,alpha1=1",
                   help="comma-separated key=value: h, um, vm, g, alphaK, betaK, theta")
    _common(p)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    handler = {"simulate": cmd_simulate, "certify": cmd_certify,
               "build-closure": cmd_build_closure, "eigen-table": cmd_eigen_table}[args.cmd]
    try:
        return handler(args)
    except (ConfigError, DegreeMismatch, SingularMatch) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SwmeError as e:
        print(f"numerical failure: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERIC


def _out_dir(args, default):
    d = Path(args.out or default)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _emit(path, text):
    path.write_text(text)
    sys.stdout.write(text)


# -- simulate ----------------------------------------------------------------

def load_run_config(args):
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    over = {"resolution": args.resolution, "variant": args.variant, "order": args.order,
            "cfl": args.cfl, "seed": args.seed, "out_dir": args.out}
    over = {k: v for k, v in over.items() if v is not None}
    try:
        return dataclasses.replace(cfg, **over)
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e)) from e


def simulate(cfg):
    """Run one configured scenario; returns (final state, monitor, output paths)."""
    from .scenarios import make_scenario
    from .solver import BC, SolverConfig, run

    sc = make_scenario(cfg.scenario, cfg.resolution, cfg.t_out)
    bc = (BC.parse(cfg.bc_x) if cfg.bc_x else sc.bc[0], BC.parse(cfg.bc_y) if cfg.bc_y else sc.bc[1])
    source = SourceParams(nu=cfg.nu, lam=cfg.lam, g=cfg.g)
    variant = ModelVariant.parse(cfg.variant)
    scfg = SolverConfig(cfg.t_end, variant, cfg.cfl, bc, source)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.ini").write_text(cfg.to_ini())
    monitor = ConservationMonitor()
    written = []

    def writer(state):
        tag = f"t{state.time:.4f}"
        if cfg.snapshots:
            p = out / f"snapshot_{tag}.csv"
            write_snapshot(p, state, variant.name)
            written.append(p)
        for which in CUTS:
            p = out / f"cut_{which}_{tag}.csv"
            write_cut_line(p, state, which)
            written.append(p)

    init = sc.initial_state(cfg.order)
    monitor(init)
    final, log = run(init, scfg, observers=(monitor, writer), out_times=cfg.t_out)
    monitor.write(out / "conservation.csv")
    return final, monitor, log, written


def cmd_simulate(args):
    cfg = load_run_config(args)
    final, monitor, log, _ = simulate(cfg)
    h = final.U[..., 0]
    text = report_header(cfg, cfg.seed, scenario=cfg.scenario, variant=cfg.variant, N=cfg.order,
                         resolution=cfg.resolution)
    text += (f"steps {log[-1].steps}\nt_end {final.time!r}\n"
             f"h_min {float(h.min())!r}\nh_max {float(h.max())!r}\nmass_drift {monitor.drift():.3e}\n")
    _emit(Path(cfg.out_dir) / "report.txt", text)
    return EXIT_OK


# -- certify -----------------------------------------------------------------

def parse_orders(text):
    out = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            a, b = part.split("-")
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    if not out or min(out) < 1:
        raise ConfigError(f"bad order list {text!r}")
    return out


def cmd_certify(args):
    from .certify import certify

    seed = 0 if args.seed is None else args.seed
    rng = np.random.default_rng(seed)
    if args.variant in (None, "all"):
        variants = [ModelVariant(t) for t in CLOSED_FORM_VARIANTS]
    else:
        variants = [ModelVariant.parse(v) for v in args.variant.split(",")]
    orders = parse_orders(args.orders) if args.orders else [args.order or 2]
    blocks, bad = [], 0
    for v in variants:
        for N in orders:
            r = certify(v, N, args.samples, args.angles, rng, n_far=args.far_samples)
            blocks.append(r.to_text())
            bad += len(r.contradictions)
    text = report_header(seed=seed, command="certify") + "\n".join(blocks) + f"\ncontradictions {bad}\n"
    _emit(_out_dir(args, ".") / "certify_report.txt", text)
    return EXIT_NUMERIC if bad else EXIT_OK


# -- build-closure -----------------------------------------------------------

def parse_target(spec, N):
    """Legendre series (in xi) of the requested target polynomial, or None for the default."""
    from .closures import _add, legendre_derivative_series, legendre_unit, xi_times

    spec = spec.strip().lower()
    if spec == "default":
        return None
    if spec == "lobatto":
        return legendre_derivative_series(N + 2)
    if spec.startswith("shift:"):
        c = Fraction(spec.split(":", 1)[1])
        return _add(xi_times(legendre_unit(N)), legendre_unit(N), -c)
    if spec.startswith("legendre:"):
        return [Fraction(x) for x in spec.split(":", 1)[1].split(",")]
    raise ConfigError(f"unknown target {spec!r}")


def _b_rows(cs):
    """Last block rows of the y-direction matrix, from the block rule."""
    from .closures import _entry_str

    def sym(e, u, a):
        return _entry_str(e).replace("u_m", u).replace("alpha1", a)

    rows = []
    for J, (e11, e22) in enumerate(zip(cs.last_row_A11, cs.last_row_A22)):
        diff = (e11[0] - e22[0], e11[1] - e22[1])
        rows.append(f"  col {J}: B[x,x]={sym(e22, 'v_m', 'beta1')}  B[x,y]={sym(diff, 'u_m', 'alpha1')}  "
                    f"B[y,y]={sym(e11, 'v_m', 'beta1')}")
    return rows


def cmd_build_closure(args):
    from .certify import random_state
    from .closures import _entry_str, closure_from_target, legendre_unit, spec_to_json
    from .spectral import invariance_residual

    N = args.order or 2
    target = parse_target(args.target, N)
    # the default target is the hyperbolic closure's own polynomial (a fixed point)
    gc = closure_from_target(N, legendre_unit(N + 1) if target is None else target)
    out = _out_dir(args, ".")
    (out / f"closure_N{N}.json").write_text(spec_to_json(gc.spec) + "\n")
    rng = np.random.default_rng(0 if args.seed is None else args.seed)
    V = random_state(N, rng)
    res = max(invariance_residual(V, gc.variant, th) for th in rng.uniform(0, 2 * np.pi, 16))
    A = coefficient_matrices(V, gc.variant)[0]
    rep = report_from_matrix(A)
    lines = [report_header(seed=args.seed, command="build-closure", N=N, target=args.target).rstrip()]
    lines.append("last row A22 (x-direction, y-components): " +
                 ", ".join(_entry_str(e) for e in gc.spec.last_row_A22))
    lines.append("paired y-direction last rows:")
    lines += _b_rows(gc.spec)
    lines.append(f"invariance_residual {res:.3e}")
    lines.append(f"sample state h={V.h:.4f} u_m={V.um:.4f} alpha1={V.alpha[0]:.4f}")
    lines.append(rep.to_text())
    for b, c in gc.spec.certification:
        lines.append(f"certification alpha1=0 beta1={b}: {c}")
    _emit(out / f"closure_N{N}.txt", "\n".join(lines) + "\n")
    return EXIT_OK


# -- eigen-table -------------------------------------------------------------

def parse_state(text, N, g_default=1.0):
    kv = {}
    for part in text.split(","):
        if not part.strip():
            continue
        if "=" not in part:
            raise ConfigError(f"bad state entry {part!r}")
        k, v = part.split("=", 1)
        kv[k.strip().lower()] = float(v)
    alpha = [kv.pop(f"alpha{i}", 0.0) for i in range(1, N + 1)]
    beta = [kv.pop(f"beta{i}", 0.0) for i in range(1, N + 1)]
    h = kv.pop("h", 1.0)
    g = kv.pop("g", g_default)
    if "gh" in kv:
        g = kv.pop("gh") / h
    theta = kv.pop("theta", 0.0)
    um, vm = kv.pop("um", 0.0), kv.pop("vm", 0.0)
    if kv:
        raise ConfigError(f"unknown state keys {sorted(kv)}")
    return PrimitiveState(h, um, vm, alpha, beta, g), theta


def eigen_table(variant, V, theta=0.0):
    """Rows (analytic or None, numeric) sorted, and the max deviation."""
    A, B = coefficient_matrices(V, variant)
    M = np.cos(theta) * A + np.sin(theta) * B
    num = np.linalg.eigvals(M)
    num = num[np.lexsort((num.imag, num.real))]
    ana = analytic_eigenvalues(variant, V, theta)
    dev = None if ana is None else float(np.abs(np.sort(num.real) - ana).max() + np.abs(num.imag).max())
    return ana, num, dev


def cmd_eigen_table(args):
    variant = ModelVariant.parse(args.variant or "HSWME")
    N = args.order or 1
    V, theta = parse_state(args.state, N)
    ana, num, dev = eigen_table(variant, V, theta)
    lines = [report_header(seed=args.seed, command="eigen-table", variant=variant.name, N=N,
                           theta=theta).rstrip(), "k,analytic,numeric_real,numeric_imag"]
    for k, z in enumerate(num):
        a = "" if ana is None else repr(float(ana[k]))
        lines.append(f"{k},{a},{float(z.real)!r},{float(z.imag)!r}")
    lines.append("max_deviation " + ("n/a (no closed form)" if dev is None else f"{dev:.3e}"))
    _emit(_out_dir(args, ".") / f"eigen_{variant.name}_N{N}.csv", "\n".join(lines) + "\n")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
