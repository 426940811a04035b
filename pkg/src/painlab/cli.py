"""Command-line entry point: ``painlab <subcommand> [options]``.

Every command writes its CSV plus a ``.meta.json`` sidecar next to it.
Options may also come from ``--config FILE`` (``key = value`` lines using
the long option names); explicit flags win.  ``PAINLAB_PREC`` sets the
default working precision.
"""

import argparse
import csv
import io
import json
import os
import sys
import time
from pathlib import Path

import mpmath as mp
import numpy as np

from . import __version__
from .specfun import DomainError, PrecisionError

EXIT_OK, EXIT_USAGE, EXIT_PRECISION, EXIT_FAILURE = 0, 2, 3, 4


class UsageError(ValueError):
    pass


def _floats(text):
    return [float(v) for v in str(text).split(",") if v.strip()]


def _ints(text):
    return [int(v) for v in str(text).split(",") if v.strip()]


def _env_prec():
    val = os.environ.get("PAINLAB_PREC")
    return int(val) if val else None


# ---------------------------------------------------------------------------
# output

def write_csv(path, rows):
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    text = buf.getvalue()
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)
    return text


def write_meta(path, args, constants, started):
    if path in (None, "-"):
        return None
    meta = {
        "command": args.command,
        "parameters": {k: v for k, v in sorted(vars(args).items())
                       if k not in ("func", "command") and _jsonable(v)},
        "constants": {k: str(v) for k, v in constants.items()},
        "version": __version__,
        "mpmath": mp.__version__,
        "numpy": np.__version__,
        "wall_time_s": round(time.time() - started, 3),
    }
    side = Path(str(path) + ".meta.json")
    side.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return side


def _jsonable(v):
    try:
        json.dumps(v)
        return True
    except TypeError:
        return False


# ---------------------------------------------------------------------------
# SVG plotting

def _read_table(csv_path):
    text = Path(csv_path).read_text() if Path(csv_path).exists() else None
    if text is None:
        raise UsageError(f"no such file: {csv_path}")
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    if len(rows) < 2:
        raise UsageError("CSV has no data rows")
    head, body = rows[0], rows[1:]
    if any(len(r) != len(head) for r in body):
        raise UsageError("malformed CSV: ragged rows")
    return head, body


def _num(v):
    try:
        return float(v)
    except ValueError:
        return float("nan")


def _svg_polyline(xs, ys, x_map, y_map, colour):
    pts = " ".join(f"{x_map(x):.2f},{y_map(y):.2f}"
                   for x, y in zip(xs, ys) if np.isfinite(x) and np.isfinite(y))
    return f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{pts}"/>'


def emit_plot(csv_path, kind="line", out=None, x_col=None, y_cols=None):
    """Render a CSV from this tool as a static SVG; returns the SVG path."""
    head, body = _read_table(csv_path)
    data = np.array([[_num(v) for v in r] for r in body])
    W, H, pad = 640, 420, 50
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}">',
             f'<rect width="{W}" height="{H}" fill="white"/>']
    if kind == "line":
        xi = head.index(x_col) if x_col else 0
        cols = [head.index(c) for c in y_cols] if y_cols else [
            j for j in range(len(head)) if j != xi and np.isfinite(data[:, j]).any()]
        x = data[:, xi]
        logx = np.all(x > 0) and x.max() / x.min() > 100
        xv = np.log10(x) if logx else x
        ys = data[:, cols]
        fin = ys[np.isfinite(ys)]
        if fin.size == 0:
            raise UsageError("no numeric columns to plot")
        x0, x1 = np.nanmin(xv), np.nanmax(xv)
        y0, y1 = fin.min(), fin.max()
        x1 = x1 if x1 > x0 else x0 + 1
        y1 = y1 if y1 > y0 else y0 + 1
        x_map = lambda v: pad + (v - x0) / (x1 - x0) * (W - 2 * pad)
        y_map = lambda v: H - pad - (v - y0) / (y1 - y0) * (H - 2 * pad)
        palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"]
        for n, j in enumerate(cols):
            parts.append(_svg_polyline(xv, data[:, j], x_map, y_map, palette[n % len(palette)]))
            parts.append(f'<text x="{W - pad + 4}" y="{pad + 14 * n}" font-size="10">{head[j]}</text>')
        parts.append(f'<text x="{W / 2}" y="{H - 10}" font-size="12">'
                     f'{"log10 " if logx else ""}{head[xi]}</text>')
        parts.append(f'<text x="5" y="{pad - 10}" font-size="10">[{y0:.4g}, {y1:.4g}]</text>')
    elif kind == "heatmap":
        try:
            iu, iv, ival = head.index("u"), head.index("v"), head.index("value")
        except ValueError:
            raise UsageError("heatmap needs u, v, value columns")
        us, vs = sorted(set(data[:, iu])), sorted(set(data[:, iv]))
        grid = np.full((len(us), len(vs)), np.nan)
        for row in data:
            grid[us.index(row[iu]), vs.index(row[iv])] = row[ival]
        lo, hi = np.nanmin(grid), np.nanmax(grid)
        span = hi - lo if hi > lo else 1.0
        cw, ch = (W - 2 * pad) / len(vs), (H - 2 * pad) / len(us)
        for i in range(len(us)):
            for j in range(len(vs)):
                level = int(255 * (1 - (grid[i, j] - lo) / span)) if np.isfinite(grid[i, j]) else 255
                parts.append(f'<rect x="{pad + j * cw:.2f}" y="{pad + i * ch:.2f}" '
                             f'width="{cw:.2f}" height="{ch:.2f}" fill="rgb(255,{level},{level})"/>')
        parts.append(f'<text x="5" y="{pad - 10}" font-size="10">[{lo:.4g}, {hi:.4g}]</text>')
    else:
        raise UsageError("kind must be 'line' or 'heatmap'")
    parts.append("</svg>")
    out = Path(out) if out else Path(csv_path).with_suffix(".svg")
    out.write_text("\n".join(parts) + "\n")
    return out


# ---------------------------------------------------------------------------
# subcommands

def cmd_moments(args):
    from .orthopoly import PerturbedWeight, moments
    w = PerturbedWeight(args.ensemble, args.n, args.k, args.alpha, args.t, prec=args.prec)
    prec = args.prec or 60
    with mp.workdps(prec):
        mu = moments(w, args.count)
        rows = [["j", "mu_j"]] + [[j, mp.nstr(m, prec)] for j, m in enumerate(mu)]
    return rows, {}


def cmd_partition(args):
    from .orthopoly import PerturbedWeight, build_op_system
    w = PerturbedWeight(args.ensemble, args.n, args.k, args.alpha, args.t, prec=args.prec)
    sys_ = build_op_system(w, args.n - 1)
    p = sys_.prec
    rows = [["j", "h_j", "a_j", "b_j"]]
    for j in range(args.n):
        rows.append([j, mp.nstr(sys_.norms[j], p), mp.nstr(sys_.a[j], p), mp.nstr(sys_.b[j], p)])
    return rows, {"log_Z": mp.nstr(sys_.log_partition(args.n), p), "prec": p}


def cmd_kernel(args):
    from . import kernel_limits as kl
    grid = _floats(args.grid)
    if args.mode == "finite-n":
        sample = kl.finite_n_sample(args.n, args.k, args.alpha, args.s, grid,
                                    args.scaling_mode, args.prec)
    elif args.mode == "bessel":
        sample = kl.bessel_sample(args.alpha, grid)
    else:
        sample = kl.airy_sample(grid)
    return list(sample.rows()), {k: v for k, v in sample.constants.items()}


def cmd_extract_r(args):
    from . import painleve_extract as pe
    grid = pe.log_grid(args.s_min, args.s_max, args.points_per_decade)
    tab = pe.build_table(args.k, args.alpha, grid, _ints(args.n_list), args.scaling_mode,
                         args.prec, args.drift_correction,
                         derivatives=len(grid) >= 8)
    consts = {"scaling_mode": args.scaling_mode, "r0": pe.r0(args.alpha)}
    if args.scaling_mode == "with_c1":
        from .equilibrium import hard_edge_constant
        consts["c1"] = hard_edge_constant("with_c1")
    return list(tab.rows()), consts


def cmd_sample(args):
    from . import ensemble_mc as mc
    p = mc.Params(args.n, args.k, args.alpha, args.t)
    res = mc.mh_chain(p, args.steps, args.seed, args.proposal_scale, args.chains)
    rows = [["chain", "sweep"] + [f"x{i}" for i in range(p.n)]]
    for c in range(res.samples.shape[0]):
        for s in range(0, res.samples.shape[1], args.thin):
            rows.append([c, s] + [repr(float(v)) for v in res.samples[c, s]])
    if args.hist and args.out not in (None, "-"):
        edges = np.concatenate([np.linspace(0, 4.5, 46), [np.inf]])
        write_csv(Path(str(args.out) + ".hist.csv"), mc.histogram_rows(res, edges))
    return rows, {"acceptance": res.acceptance, "proposal_scale": res.proposal_scale}


def cmd_hierarchy_check(args):
    from . import hierarchy as hy
    c = hy.hierarchy_constants(args.k, args.alpha)
    rows = [["quantity", "value"]]
    rows += [[f"tau_{j}", repr(v)] for j, v in enumerate(c.tau)]
    rows += [["z0", repr(c.z0)]] + [[f"beta_{j}", repr(v)] for j, v in enumerate(c.beta)]
    rows += [["g1", repr(c.g1)], ["g2", repr(c.g2)], ["eta", repr(c.eta)], ["c2", repr(c.c2)]]
    if args.k == 1:
        study = hy.refinement_study(args.alpha)
        for key, vals in study.items():
            rows.append([f"{key}_residuals_N20_40_80_160", " ".join(f"{v:.3e}" for v in vals)])
    return rows, {}


def _suite_identities(prec):
    from .orthopoly import PerturbedWeight, diff_identity_residual, pgue_plue_residual
    out = []
    for n in (2, 3, 4):
        for k in (1, 2):
            for t in (0.02, 0.05):
                e, o = pgue_plue_residual(n, k, 0.3, t, prec)
                out.append((f"pGUE-pLUE n={n} k={k} t={t}", max(abs(e), abs(o)), mp.mpf(10) ** -45))
    kf, rf = diff_identity_residual(PerturbedWeight("pLUE", 5, 1, 0.3, 0.1, prec=prec), 5)
    out.append(("t-derivative identity, kernel form", kf, 1e-10))
    out.append(("t-derivative identity, residue form", rf, 1e-10))
    return out


def _suite_models(prec):
    from . import specfun as sf
    out = []
    for z in (0.7 + 0.4j, -1.1 + 0.3j, -0.8 - 0.9j):
        out.append((f"det Bessel model at {z}", abs(sf.det2(sf.bessel_model_matrix(z, alpha=0.3)) - 1), 1e-12))
        out.append((f"det Airy model at {z}", abs(sf.det2(sf.airy_model_matrix(z)) - 1), 1e-12))
    return out


def _suite_hierarchy(prec):
    from . import hierarchy as hy
    ref = {1: (64.0, -1.0, 1.5), 2: (4096.0, -1.1760790, 0.98007)}
    out = []
    for k, (tau0, z0, g1) in ref.items():
        c = hy.hierarchy_constants(k, 0.3)
        out.append((f"tau_0 k={k}", abs(c.tau[0] - tau0), 1e-12))
        out.append((f"z0 k={k}", abs(c.z0 - z0), 1e-6))
        out.append((f"g1 k={k}", abs(c.g1 - g1), 1e-4))
    study = hy.refinement_study(0.3, sizes=(20, 40, 80))
    for key, vals in study.items():
        out.append((f"{key} residual N=80", vals[-1], 1e-4))
    return out


SUITES = {"identities": _suite_identities, "models": _suite_models, "hierarchy": _suite_hierarchy}


def cmd_check(args):
    names = list(SUITES) if args.suite == "all" else [args.suite]
    rows = [["suite", "check", "residual", "tolerance", "status"]]
    failed = 0
    for name in names:
        for label, res, tol in SUITES[name](args.prec or 60):
            ok = res < tol
            failed += not ok
            rows.append([name, label, mp.nstr(res, 5), mp.nstr(tol, 3), "PASS" if ok else "FAIL"])
    for r in rows[1:]:
        print(f"{r[4]}  {r[0]:<10} {r[1]:<45} {r[2]:>12} < {r[3]}", file=sys.stderr)
    return rows, {"failed": failed}


def cmd_plot(args):
    path = emit_plot(args.csv, args.kind, args.out)
    print(path)
    return None, {}


# ---------------------------------------------------------------------------
# parser

def _add_weight(p, t_default=0.05):
    p.add_argument("--ensemble", choices=("pLUE", "pGUE"), default="pLUE")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--t", type=float, default=t_default)


def build_parser():
    ap = argparse.ArgumentParser(prog="painlab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--prec", type=int, default=_env_prec(), help="working decimal digits")
        p.add_argument("--out", default="-", help="output CSV path ('-' for stdout)")
        p.add_argument("--svg", action="store_true", help="also emit an SVG plot")
        p.add_argument("--config", help="key = value file mirroring the long options")

    p = sub.add_parser("moments", help="weight moments mu_j")
    _add_weight(p)
    p.add_argument("--count", type=int, default=8)
    common(p)
    p.set_defaults(func=cmd_moments, plot_kind=None)

    p = sub.add_parser("partition", help="norms and recurrence coefficients")
    _add_weight(p)
    common(p)
    p.set_defaults(func=cmd_partition, plot_kind=None)

    p = sub.add_parser("kernel", help="rescaled or limiting kernels on a grid")
    p.add_argument("--mode", choices=("finite-n", "bessel", "airy"), default="finite-n")
    p.add_argument("--n", type=int, default=32)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--grid", default="-5,-2,-1,-0.5,-0.1")
    p.add_argument("--scaling-mode", choices=("with_c1", "without_c1"), default="with_c1")
    common(p)
    p.set_defaults(func=cmd_kernel, plot_kind="heatmap")

    p = sub.add_parser("extract-r", help="transcendent table from partition data")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--n-list", default="32,64")
    p.add_argument("--s-min", type=float, default=0.1)
    p.add_argument("--s-max", type=float, default=10.0)
    p.add_argument("--points-per-decade", type=int, default=12)
    p.add_argument("--scaling-mode", choices=("with_c1", "without_c1"), default="with_c1")
    p.add_argument("--drift-correction", action="store_true")
    common(p)
    p.set_defaults(func=cmd_extract_r, plot_kind="line")

    p = sub.add_parser("sample", help="Metropolis samples of the eigenvalue law")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--t", type=float, default=0.01)
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--chains", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--proposal-scale", type=float, default=None)
    p.add_argument("--thin", type=int, default=1)
    p.add_argument("--hist", action="store_true", help="also write OUT.hist.csv")
    common(p)
    p.set_defaults(func=cmd_sample, plot_kind=None)

    p = sub.add_parser("hierarchy-check", help="constants and residual study")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--alpha", type=float, default=0.3)
    common(p)
    p.set_defaults(func=cmd_hierarchy_check, plot_kind=None)

    p = sub.add_parser("check", help="PASS/FAIL residual suites")
    p.add_argument("--suite", choices=tuple(SUITES) + ("all",), default="identities")
    common(p)
    p.set_defaults(func=cmd_check, plot_kind=None)

    p = sub.add_parser("plot", help="SVG from a CSV written by this tool")
    p.add_argument("csv")
    p.add_argument("--kind", choices=("line", "heatmap"), default="line")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_plot, plot_kind=None, config=None)
    return ap


def read_config(path):
    """Parse ``key = value`` lines into argv tokens (``#`` starts a comment)."""
    tokens = []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"bad config line: {raw!r}")
        key, val = (x.strip() for x in line.split("=", 1))
        key = key.replace("_", "-")
        if val.lower() in ("true", "yes", "on"):
            tokens.append(f"--{key}")
        elif val.lower() in ("false", "no", "off"):
            continue
        else:
            tokens += [f"--{key}", val]
    return tokens


def _expand_config(argv):
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise UsageError("--config needs a path")
    cfg = read_config(argv[i + 1])
    rest = argv[:i] + argv[i + 2:]
    # the subcommand is the first positional token; config goes right after it
    return rest[:1] + cfg + rest[1:]


def _join_negative_values(argv):
    # "--grid -1,-0.5" would otherwise be read as an unknown option
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok.startswith("--") and "=" not in tok and i + 1 < len(argv) \
                and argv[i + 1].startswith("-") and argv[i + 1][1:2] in set("0123456789."):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def _error(kind, exc, code):
    print(json.dumps({"error": kind, "message": str(exc), "exit_code": code}), file=sys.stderr)
    return code


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_join_negative_values(_expand_config(argv)))
    except UsageError as exc:
        return _error("usage", exc, EXIT_USAGE)
    except SystemExit as exc:
        return int(exc.code or 0)
    started = time.time()
    try:
        rows, consts = args.func(args)
    except PrecisionError as exc:
        return _error("precision", exc, EXIT_PRECISION)
    except (UsageError, DomainError, ValueError) as exc:
        return _error("usage", exc, EXIT_USAGE)
    except Exception as exc:  # noqa: BLE001 - reported as a machine-readable record
        return _error(type(exc).__name__, exc, EXIT_FAILURE)
    if rows is None:
        return EXIT_OK
    write_csv(args.out, rows)
    write_meta(args.out, args, consts, started)
    if args.svg and args.plot_kind and args.out not in (None, "-"):
        emit_plot(args.out, args.plot_kind)
    if args.command == "check" and consts.get("failed"):
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
