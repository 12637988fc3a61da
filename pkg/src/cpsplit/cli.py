"""Batch front end: scans, fits, and plot-data emission.

Jobs are described by a flat key=value config file (INI style; a bare file
without a section header is treated as one [job] section) plus a handful of
command-line flags.  Results land in the output directory as one CSV per
sample kind; scans are resumable, keyed by (kind, K, a, m).  Exit codes:
0 success, 2 configuration error, 3 scan finished with partial failures.
"""

from __future__ import annotations

import argparse
import configparser
import io
import logging
import os
import sys

import gmpy2

from cpsplit.asymptotics import fit_scan, pairwise_slopes, reduce as reduce_samples
from cpsplit.context import PrecisionContext
from cpsplit.errors import ConfigInvalid, CpsplitError
from cpsplit.manifold import choose_domain, expand
from cpsplit.models import Model, equilibria
from cpsplit.singularity import delta_fit, s_star
from cpsplit.splitting import (
    ResultStore,
    cp_split_both,
    geometric_grid,
    melnikov_sample,
    precision_policy,
    resume_key,
    toy_split,
)

log = logging.getLogger("cpsplit")

_DEFAULT_C = {"dx_dot": "1", "dp_resonant": "1", "z0_melnikov": "0"}
_DEFAULT_R_GUESS = {"dx_dot": "29/18", "dp_resonant": "19/9",
                    "z0_melnikov": "19/9"}


def load_config(path):
    """Flat key=value config -> dict; a missing section header is tolerated."""
    if path is None:
        return {}
    if not os.path.exists(path):
        raise ConfigInvalid("config file {} does not exist".format(path))
    with open(path) as fh:
        text = fh.read()
    if not text.lstrip().startswith("["):
        text = "[job]\n" + text
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keys like K are case-sensitive
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigInvalid("cannot parse {}: {}".format(path, exc))
    out = {}
    for section in parser.sections():
        out.update(parser[section])
    return out


def _get(cfg, key, default=None, cast=None):
    raw = cfg.get(key, default)
    if raw is None:
        return None
    if cast is None:
        return raw
    try:
        return cast(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid("bad value for {}: {} ({})".format(key, raw, exc))


def _require(cfg, key, cast=None):
    if key not in cfg:
        raise ConfigInvalid("missing required config key {!r}".format(key))
    return _get(cfg, key, cast=cast)


def _build_model(cfg, ctx):
    family = _require(cfg, "family")
    if family == "cp_synodic":
        return Model.cp_synodic(ctx, _require(cfg, "K"))
    if family == "cp_levi_civita":
        K = _require(cfg, "K")
        C = cfg.get("C")
        if C is None:
            syn = Model.cp_synodic(ctx, K)
            L1 = next(e for e in equilibria(syn) if e.label == "L1")
            with ctx.activate():
                C = -2 * L1.energy
        return Model.cp_levi_civita(ctx, K, C)
    if family == "toy":
        return Model.toy(ctx, _require(cfg, "a", int), _require(cfg, "m", int),
                         K=_require(cfg, "K"))
    if family == "pendulum":
        return Model.pendulum(ctx, a=_get(cfg, "a", "0", int),
                              eps=_get(cfg, "eps", "0"))
    raise ConfigInvalid("unknown family {!r}".format(family))


def _fit_context(cfg, digits_override=None):
    digits = digits_override or _get(cfg, "digits", "60", int)
    return PrecisionContext(digits=max(int(digits), 30))


def _grid(cfg, default_lo):
    try:
        return geometric_grid(_get(cfg, "k_hi", "1e-3"),
                              _get(cfg, "k_lo", default_lo),
                              _get(cfg, "per_decade", "12", int))
    except ValueError as exc:
        raise ConfigInvalid("bad K grid: {}".format(exc))


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_equilibria(cfg, args):
    ctx = _fit_context(cfg, args.digits_override)
    model = _build_model(cfg, ctx)
    lines = ["family {}".format(model.family)]
    for eq in equilibria(model):
        lines.append("label {}".format(eq.label))
        lines.append("location " + " ".join(ctx.to_decimal(c)
                                            for c in eq.location.coords))
        lines.append("energy " + ctx.to_decimal(eq.energy))
        for re, im in eq.eigenvalues:
            lines.append("eigenvalue {} {}".format(ctx.to_decimal(re),
                                                   ctx.to_decimal(im)))
        if eq.real_eigenpair is not None:
            lam, v = eq.real_eigenpair
            lines.append("lambda " + ctx.to_decimal(lam))
            lines.append("eigvec " + " ".join(ctx.to_decimal(c) for c in v))
    path = os.path.join(args.out, "equilibria_{}.txt".format(model.family))
    _write_text(path, "\n".join(lines) + "\n")
    print("\n".join(lines))
    return 0


def cmd_manifold(cfg, args):
    ctx = _fit_context(cfg, args.digits_override)
    model = _build_model(cfg, ctx)
    eq = next(e for e in equilibria(model) if e.real_eigenpair is not None)
    lam, v = eq.real_eigenpair
    N = _get(cfg, "order", str(max(100, int(1.2 * ctx.digits) + 1)), int)
    sigma = _get(cfg, "sigma", "1", int)
    with ctx.activate():
        tol_raw = _get(cfg, "tol", None)
        tol = (ctx.mpf(tol_raw) if tol_raw is not None
               else gmpy2.mpfr(10) ** (-(ctx.digits + ctx.guard // 2)))
    W = expand(model, eq, lam, v, N, sigma=sigma)
    s_hat = choose_domain(W, tol)
    path = os.path.join(args.out, "manifold_{}.csv".format(model.family))
    buf = io.StringIO()
    buf.write("# s_hat = {}\n".format(ctx.to_decimal(s_hat)))
    buf.write("# residual_at_s_hat = {}\n".format(
        ctx.to_decimal(W.residual_at_s_hat)))
    buf.write("order,component,coefficient\n")
    for k, wk in enumerate(W.coeffs):
        for j, c in enumerate(wk):
            buf.write("{},{},{}\n".format(k, j, ctx.to_decimal(c)))
    _write_text(path, buf.getvalue())
    log.info("manifold order %d written to %s", N, path)
    return 0


def _scan(args, jobs, runner):
    """Shared scan loop: per-key jobs, per-kind stores, partial failures."""
    stores = {}
    failures = []
    done = 0
    for job in jobs:
        kind_paths = job["kinds"]
        for kind, _a, _m in kind_paths:
            if kind not in stores:
                stores[kind] = ResultStore(os.path.join(args.out, kind + ".csv"))
        if args.resume and all(
                resume_key(kind, job["K"], a, m) in stores[kind]
                for kind, a, m in kind_paths):
            log.info("skip (stored): K = %s", job["K"])
            continue
        try:
            samples = runner(job)
        except CpsplitError as exc:
            log.error("K = %s failed: %s: %s", job["K"],
                      type(exc).__name__, exc)
            failures.append((job["K"], "{}: {}".format(type(exc).__name__, exc)))
            continue
        for sample in samples:
            ctx = PrecisionContext(digits=sample.digits)
            stores[sample.kind].append(sample, ctx)
        done += 1
        log.info("K = %s done (%.1fs)", job["K"], samples[0].wall_seconds)
    if failures:
        report = os.path.join(args.out, "scan_failures.txt")
        _write_text(report, "".join("K={} {}\n".format(K, msg)
                                    for K, msg in failures))
        log.warning("%d of %d jobs failed; see %s",
                    len(failures), len(failures) + done, report)
        return 3
    return 0


def cmd_cp_scan(args_cfg, args):
    cfg = args_cfg
    jobs = [{"K": K, "kinds": [("dx_dot", None, None),
                               ("dp_resonant", None, None)]}
            for K in _grid(cfg, "1e-5")]
    kw = _policy_kwargs(cfg, args)

    def run(job):
        return list(cp_split_both(job["K"], **kw))

    return _scan(args, jobs, run)


def cmd_toy_scan(cfg, args):
    a = _get(cfg, "a", "0", int)
    m_list = [int(tok) for tok in _get(cfg, "m_list",
                                       _get(cfg, "m", "2")).split(",")]
    default_lo = "1e-6" if a == 1 else "1e-5"
    jobs = [{"K": K, "a": a, "m": m, "kinds": [("dp_toy", a, m)]}
            for m in m_list for K in _grid(cfg, default_lo)]
    kw = _policy_kwargs(cfg, args)

    def run(job):
        return [toy_split(job["K"], job["a"], job["m"], **kw)]

    return _scan(args, jobs, run)


def cmd_melnikov(cfg, args):
    jobs = [{"K": K, "kinds": [("z0_melnikov", 1, None)]}
            for K in _grid(cfg, "1e-6")]
    kw = _policy_kwargs(cfg, args)

    def run(job):
        return [melnikov_sample(job["K"], **kw)]

    return _scan(args, jobs, run)


def _policy_kwargs(cfg, args):
    kw = {}
    if args.force_desk_floor_override:
        kw["override"] = True
    if args.digits_override:
        kw["digits_override"] = args.digits_override
    floor = _get(cfg, "desk_floor", None)
    if floor is not None:
        kw["floor"] = float(floor)
    return kw


def cmd_singularity(cfg, args):
    ctx = _fit_context(cfg, args.digits_override)
    with ctx.activate():
        tol = ctx.mpf(_get(cfg, "tol", "1e-{}".format(ctx.digits - 10)))
    eps_list = _get(cfg, "eps_list", None)
    rows = ["eps,K,y0,y1,y2,re_s,im_s,delta,route_gap"]
    if eps_list:
        results = []
        for tok in eps_list.split(","):
            results.append(s_star(ctx, tok.strip(), tol))
        fit_lines = []
    else:
        Ks = _grid(cfg, "1e-6")
        rho, lnA, results, normalized = delta_fit(ctx, Ks, tol)
        fit_lines = ["rho " + ctx.to_decimal(rho),
                     "lnA " + ctx.to_decimal(lnA)]
        fit_lines += ["normalized " + ctx.to_decimal(z) for z in normalized]
    for res in results:
        with ctx.activate():
            K = 3 * res.eps ** 4
        rows.append(",".join([ctx.to_decimal(res.eps), ctx.to_decimal(K),
                              ctx.to_decimal(res.y0), ctx.to_decimal(res.y1),
                              ctx.to_decimal(res.y2),
                              ctx.to_decimal(res.s_star[0]),
                              ctx.to_decimal(res.s_star[1]),
                              ctx.to_decimal(res.delta),
                              ctx.to_decimal(res.route_gap)]))
    _write_text(os.path.join(args.out, "singularity.csv"), "\n".join(rows) + "\n")
    if fit_lines:
        _write_text(os.path.join(args.out, "singularity_fit.txt"),
                    "\n".join(fit_lines) + "\n")
    return 0


def _load_fit_inputs(cfg, args, suffix=""):
    kind = _require(cfg, "kind" + suffix)
    csv_path = _get(cfg, "csv" + suffix,
                    os.path.join(args.out, kind + ".csv"))
    if not os.path.exists(csv_path):
        raise ConfigInvalid("no sample CSV at {}".format(csv_path))
    store = ResultStore(csv_path)
    a = _get(cfg, "a" + suffix, None, int)
    m = _get(cfg, "m" + suffix, None, int)
    rows = store.rows(kind, a, m)
    if not rows:
        raise ConfigInvalid("no {} rows in {}".format(kind, csv_path))
    digits = max(int(r["digits"]) for r in rows)
    ctx = PrecisionContext(digits=digits)
    samples = store.samples(ctx, kind, a, m)
    if kind == "dp_toy":
        default_c = str(m if m is not None else int(rows[0]["m"]))
        toy_a = a if a is not None else int(rows[0]["a"])
        default_rg = "19/9" if toy_a == 1 else "3"
    else:
        default_c = _DEFAULT_C[kind]
        default_rg = _DEFAULT_R_GUESS[kind]
    c = _get(cfg, "c" + suffix, default_c)
    r_guess = _get(cfg, "r_guess" + suffix, default_rg)
    return kind, ctx, samples, c, r_guess


def cmd_fit(cfg, args):
    kind, ctx, samples, c, r_guess = _load_fit_inputs(cfg, args)
    window = _get(cfg, "window", "50", int)
    res = fit_scan(ctx, kind, samples, c, r_guess, window=window)
    lines = ["kind " + kind,
             "samples {}".format(len(samples)),
             "window {}".format(window),
             "c " + str(c),
             "r_free " + ctx.to_decimal(res.r),
             "lnA_free " + ctx.to_decimal(res.lnA),
             "A_free " + ctx.to_decimal(res.A),
             "r_guess " + str(r_guess)]
    if res.A_extrapolated is not None:
        lines.append("A_extrapolated " + ctx.to_decimal(res.A_extrapolated))
        lines.append("sensitivity_per_1e-3 " + ctx.to_decimal(res.sensitivity))
    lines.append("max_residual " + ctx.to_decimal(res.residual))
    lines.append("pairwise ln|omega| r_i lnA_i")
    for x, ri, ai in res.pairwise:
        lines.append("  ".join([ctx.to_decimal(x), ctx.to_decimal(ri),
                                ctx.to_decimal(ai)]))
    _write_text(os.path.join(args.out, "fit_{}.txt".format(kind)),
                "\n".join(lines) + "\n")
    if res.tableau:
        buf = io.StringIO()
        for t, col in enumerate(res.tableau):
            for i, z in enumerate(col):
                buf.write("{},{},{}\n".format(t, i, ctx.to_decimal(z)))
        _write_text(os.path.join(args.out, "fit_{}_tableau.csv".format(kind)),
                    buf.getvalue())
    print("\n".join(lines[:12]))
    return 0


def cmd_plotdata(cfg, args):
    if "kind_b" in cfg:
        return _plotdata_diff(cfg, args)
    kind, ctx, samples, c, _rg = _load_fit_inputs(cfg, args)
    pts = reduce_samples(ctx, samples, c)
    pts.sort(key=lambda p: p[0])
    _write_text(os.path.join(args.out, "plot_{}_Y.dat".format(kind)),
                _two_col(ctx, pts))
    pw = pairwise_slopes(ctx, pts)
    _write_text(os.path.join(args.out, "plot_{}_ri.dat".format(kind)),
                _two_col(ctx, [(x, r) for x, r, _ in pw]))
    _write_text(os.path.join(args.out, "plot_{}_lnAi.dat".format(kind)),
                _two_col(ctx, [(x, a) for x, _, a in pw]))
    return 0


def _plotdata_diff(cfg, args):
    """|r_i(A) - r_i(B)| at matched abscissae (the tendency-agreement curves)."""
    kind_a, ctx_a, samples_a, c_a, _ = _load_fit_inputs(cfg, args)
    kind_b, ctx_b, samples_b, c_b, _ = _load_fit_inputs(cfg, args, suffix="_b")
    ctx = ctx_a if ctx_a.digits >= ctx_b.digits else ctx_b
    pw_a = _pairwise_map(ctx, samples_a, c_a)
    pw_b = _pairwise_map(ctx, samples_b, c_b)
    with ctx.activate():
        pts = [(x, abs(pw_a[x] - pw_b[x]))
               for x in sorted(set(pw_a) & set(pw_b))]
    if not pts:
        raise ConfigInvalid("no matched abscissae between the two scans")
    name = "plot_diff_{}_{}.dat".format(kind_a, kind_b)
    _write_text(os.path.join(args.out, name), _two_col(ctx, pts))
    return 0


def _pairwise_map(ctx, samples, c):
    pts = reduce_samples(ctx, samples, c)
    pts.sort(key=lambda p: p[0])
    # key by the abscissa rounded to double: matched grids agree exactly there
    return {float(x): r for x, r, _ in pairwise_slopes(ctx, pts)}


def _two_col(ctx, pts):
    return "".join("{} {}\n".format(ctx.to_decimal(x), ctx.to_decimal(y))
                   for x, y in pts)


def _write_text(path, text):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        fh.write(text)


_COMMANDS = {
    "equilibria": cmd_equilibria,
    "manifold": cmd_manifold,
    "cp-scan": cmd_cp_scan,
    "toy-scan": cmd_toy_scan,
    "melnikov": cmd_melnikov,
    "singularity": cmd_singularity,
    "fit": cmd_fit,
    "plotdata": cmd_plotdata,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cpsplit",
        description="High-precision manifold-splitting scans and fits.")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", help="flat key=value job config file")
    parser.add_argument("--out", default="results", help="output directory")
    parser.add_argument("--resume", action="store_true",
                        help="skip samples already in the result store")
    parser.add_argument("--force-desk-floor-override", action="store_true",
                        help="allow K below the desk floor")
    parser.add_argument("--digits-override", type=int, default=None,
                        help="force the working precision in decimal digits")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        os.makedirs(args.out, exist_ok=True)
        return _COMMANDS[args.command](cfg, args)
    except ConfigInvalid as exc:
        log.error("config error: %s", exc)
        return 2
    except CpsplitError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
