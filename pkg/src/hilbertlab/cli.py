"""Command-line front end: file-based, deterministic, audit exit codes.

Exit status: 0 success, 1 operational failure (bad input, solver failure),
2 audit failure (a checked inequality was violated). All randomness flows
through --seed; outputs echo it and never overwrite without --force.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import chords, entropy, reports, spectrum, svgplot
from .blaschke import BlaschkeField, blaschke_from_embedding
from .errors import HilbertLabError
from .grids import SolverGrid
from .hilbert import metric_field_rows
from .monge_ampere import MongeAmpereSolution, solve_monge_ampere
from .projective import ConvexDomain

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_AUDIT = 2
DYN_TOL = 5e-3


def _out(args, name):
    return os.path.join(args.out, name)


def _load_domain(args):
    return ConvexDomain.from_json(args.domain, normalize=not args.no_normalize)


def _solve(args, domain):
    return solve_monge_ampere(domain, args.h, tol=args.tol,
                              max_iter=args.max_iter)


def _seed_comments(args, extra=()):
    base = [f"seed={getattr(args, 'seed', 0)}",
            f"command={args.command}"]
    return base + list(extra)


def cmd_solve(args):
    domain = _load_domain(args)
    sol = _solve(args, domain)
    fld = blaschke_from_embedding(sol)
    reports.write_solution_dump(_out(args, "solution.csv"), sol, fld,
                                force=args.force)
    reports.write_csv(_out(args, "residual_log.csv"), ["iteration", "residual"],
                      list(enumerate(sol.residual_history)),
                      comments=_seed_comments(args, [f"h={args.h}"]),
                      force=args.force)
    print(f"solved: {sol.iterations} iterations, residual {sol.residual_sup:.3e}")
    return EXIT_OK


def cmd_metrics(args):
    domain = _load_domain(args)
    rows = metric_field_rows(domain, args.grid_n)
    reports.write_report(_out(args, "metric_field." + args.format),
                         ["x", "y", "F_e1", "F_e2", "F_diag"], rows,
                         comments=_seed_comments(args), fmt_kind=args.format,
                         force=args.force)
    print(f"wrote {len(rows)} metric samples")
    return EXIT_OK


def cmd_chord(args):
    domain = _load_domain(args)
    sol = _solve(args, domain)
    fld = blaschke_from_embedding(sol)
    chord = domain.chord_through((args.x1, args.y1), (args.x2, args.y2))
    if args.tmin is not None and args.tmax is not None:
        lo, hi = args.tmin, args.tmax
    else:
        lo, hi = chords.reliable_t_window(sol, fld, chord)
    prof = chords.alpha_profile(sol, fld, chord, lo, hi, args.samples)
    resid = chords.chord_identity_check(prof)
    c_est = chords.estimate_comparison_constant(domain, sol, fld)
    mx, bound, ok = chords.slope_bound_check(prof, c_est)
    rows = list(zip(range(len(prof.ts)), prof.ts, prof.alpha, prof.alpha_p,
                    prof.alpha_pp, prof.hb_chord, prof.identity_residual()))
    reports.write_report(
        _out(args, "chord_profile." + args.format),
        ["k", "t", "alpha", "alpha_p", "alpha_pp", "hb_chord", "identity_residual"],
        rows, comments=_seed_comments(args, [
            f"identity_sup={reports.fmt(resid)}",
            f"C_est={reports.fmt(c_est)}",
            f"max_slope={reports.fmt(mx)} bound={reports.fmt(bound)}"]),
        fmt_kind=args.format, force=args.force)
    svgplot.profile_plot(_out(args, "chord_profile.svg"), prof, force=args.force)
    print(f"identity sup residual {resid:.3e}; slope {mx:.4f} "
          f"vs bound {bound:.4f} ({'ok' if ok else 'VIOLATED'})")
    return EXIT_OK if ok else EXIT_AUDIT


def cmd_compare(args):
    domain = _load_domain(args)
    sol = _solve(args, domain)
    fld = blaschke_from_embedding(sol)
    rep = chords.comparison_audit(domain, sol, fld, args.pairs, args.seed)
    rows = [(pid, f"{x[0]:.12g} {x[1]:.12g}", f"{y[0]:.12g} {y[1]:.12g}",
             dh, db, b1, b2, ok)
            for pid, x, y, dh, db, b1, b2, ok in rep.rows]
    reports.write_report(
        _out(args, "comparison_audit." + args.format),
        ["pair_id", "xh", "yh", "dH", "dB_upper", "bound_sharp",
         "bound_lemma1", "ok"],
        rows, comments=_seed_comments(args, [
            f"C_est={reports.fmt(rep.comparison_constant)}",
            f"violations={rep.violations}",
            f"max_slack={reports.fmt(rep.max_slack_consumed)}"]),
        fmt_kind=args.format, force=args.force)
    print(f"{rep.n_pairs} pairs, C_est {rep.comparison_constant:.4f}, "
          f"violations {rep.violations}, max slack {rep.max_slack_consumed:.4f}")
    return EXIT_OK if rep.ok else EXIT_AUDIT


def cmd_entropy(args):
    domain = _load_domain(args)
    sol = _solve(args, domain)
    fld = blaschke_from_embedding(sol)
    form = entropy.make_volume_form(domain, sol, fld, args.form)
    o = tuple(float(v) for v in args.origin.split(","))
    radii = [float(r) for r in args.radii.split(",")]
    est = entropy.entropy_estimate(domain, form, o, radii)
    rows = []
    for r, v in zip(est.radii, est.volumes):
        inwin = est.window[0] <= r <= est.window[-1]
        rows.append((r, v, np.log(v), est.slope if inwin else None))
    reports.write_report(
        _out(args, "entropy." + args.format),
        ["R", "volume", "log_volume", "slope_window"], rows,
        comments=_seed_comments(args, [
            f"form={args.form}", f"slope={reports.fmt(est.slope)}",
            f"window={'/'.join(reports.fmt(r) for r in est.window)}",
            f"r_max={reports.fmt(est.r_max)}"]),
        fmt_kind=args.format, force=args.force)
    svgplot.line_plot(_out(args, "log_volume.svg"),
                      {"log V(R)": (est.radii, np.log(est.volumes))},
                      title=f"entropy slope {est.slope:.3f}", force=args.force)
    status = EXIT_OK
    if args.inclusion_radius is not None:
        viol = entropy.ball_inclusion_check(domain, sol, fld, o,
                                            args.inclusion_radius,
                                            args.inclusion_samples,
                                            seed=args.seed)
        print(f"inclusion check: {viol} violation(s)")
        if viol:
            status = EXIT_AUDIT
    print(f"entropy slope {est.slope:.4f} over window {est.window}")
    return status


def cmd_spectrum(args):
    gens = spectrum.load_generators(args.generators)
    if args.domain:
        domain = _load_domain(args)
        conj = domain.chart_transform
        gens_dom = {lab: conj @ m @ np.linalg.inv(conj)
                    for lab, m in gens.items()}
    else:
        result = spectrum.limit_set_domain(gens, depth=args.depth)
        domain = result.domain
        gens_dom = gens
        reports.prepare_output(_out(args, "limit_set.json"), force=args.force)
        with open(_out(args, "limit_set.json"), "w", encoding="utf-8") as fh:
            json.dump(domain.to_spec(), fh, indent=1)
    sol = fld = None
    if args.blaschke_n:
        dom_n = ConvexDomain.from_spec(domain.to_spec(), normalize=True)
        conj2 = dom_n.chart_transform
        sol = solve_monge_ampere(dom_n, args.h, tol=args.tol,
                                 max_iter=args.max_iter)
        fld = blaschke_from_embedding(sol)
    rows = []
    failed = False
    for word in spectrum._reduced_words(sorted(gens), args.depth):
        label = spectrum._word_label(word)
        m = np.eye(3)
        for lab, s in word:
            g = gens_dom[lab]
            m = m @ (g if s > 0 else np.linalg.inv(g))
        ge = spectrum.GroupElement.from_matrix(m)
        if not ge.proximal:
            rows.append((label, None, None, None, None))
            continue
        l_eig = spectrum.translation_length_eig(ge)
        l_dyn = l_b = okv = None
        if len(word) == 1:
            try:
                l_dyn = spectrum.translation_length_dyn(
                    domain, ge, n_max=args.dyn_n).value
                okv = abs(l_dyn - l_eig) <= DYN_TOL
            except HilbertLabError:
                okv = None
            if fld is not None:
                mb = conj2 @ m @ np.linalg.inv(conj2)
                try:
                    l_b = spectrum.blaschke_length_upper(
                        dom_n, sol, fld, mb, dom_n.centroid, args.blaschke_n)
                    okb = l_b <= l_eig + 1.0 / args.blaschke_n + 0.05
                    okv = okb if okv is None else (okv and okb)
                except HilbertLabError:
                    pass
            if okv is False:
                failed = True
        rows.append((label, l_eig, l_dyn, l_b, okv))
    reports.write_report(
        _out(args, "spectrum." + args.format),
        ["word", "l_H_eig", "l_H_dyn", "l_B_upper", "pass"], rows,
        comments=_seed_comments(args, [f"depth={args.depth}"]),
        fmt_kind=args.format, force=args.force)
    print(f"wrote {len(rows)} words")
    return EXIT_AUDIT if failed else EXIT_OK


def cmd_plot(args):
    dump = reports.read_solution_dump(args.solution)
    domain = ConvexDomain.from_spec(dump["header"]["domain"], normalize=False)
    grid = SolverGrid(domain, dump["header"]["spacing"])
    data = dump["data"]
    u = np.zeros(grid.X.shape)
    hb = np.full(grid.X.shape + (3,), np.nan)
    kappa = np.full(grid.X.shape, np.nan)
    ii = data[:, 0].astype(int)
    jj = data[:, 1].astype(int)
    u[ii, jj] = data[:, 4]
    hb[ii, jj, 0] = data[:, 5]
    hb[ii, jj, 1] = data[:, 6]
    hb[ii, jj, 2] = data[:, 7]
    kappa[ii, jj] = data[:, 8]
    sol = MongeAmpereSolution(grid=grid, u=u,
                              residual_sup=dump["header"]["residual_sup"],
                              residual_sup_full=np.nan,
                              iterations=dump["header"]["iterations"],
                              tol=np.nan,
                              band_width=dump["header"]["band_width"])
    mask = np.isfinite(hb[..., 0])
    fld = BlaschkeField(grid=grid, hb=hb, kappa=kappa, mask=mask,
                        kappa_mask=np.isfinite(kappa))
    svgplot.glyph_field(_out(args, "unit_balls.svg"), domain, sol, fld,
                        stride=args.stride, force=args.force)
    print("wrote unit_balls.svg")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(
        prog="hilbertlab",
        description="Hilbert/Blaschke geometry laboratory on convex domains")
    sub = p.add_subparsers(dest="command", required=True)

    def common(q, domain=True):
        q.add_argument("--out", default="out", help="output directory")
        q.add_argument("--force", action="store_true",
                       help="overwrite existing outputs")
        q.add_argument("--format", choices=["csv", "json"], default="csv")
        q.add_argument("--seed", type=int, default=0)
        if domain:
            q.add_argument("--domain", required=True,
                           help="domain spec JSON file")
            q.add_argument("--no-normalize", action="store_true",
                           help="skip the load-time projective normalization")
        q.add_argument("--h", type=float, default=1 / 64,
                       help="grid spacing (must divide 2)")
        q.add_argument("--tol", type=float, default=1e-8)
        q.add_argument("--max-iter", type=int, default=200)

    q = sub.add_parser("solve", help="solve the affine-sphere equation")
    common(q)
    q.set_defaults(func=cmd_solve)

    q = sub.add_parser("metrics", help="sample the Finsler norm on a grid")
    common(q)
    q.add_argument("--grid-n", type=int, default=48)
    q.set_defaults(func=cmd_metrics)

    q = sub.add_parser("chord", help="alpha profile along a chord")
    common(q)
    for f in ("x1", "y1", "x2", "y2"):
        q.add_argument(f"--{f}", type=float, required=True)
    q.add_argument("--samples", type=int, default=41)
    q.add_argument("--tmin", type=float)
    q.add_argument("--tmax", type=float)
    q.set_defaults(func=cmd_chord)

    q = sub.add_parser("compare", help="distance comparison audit")
    common(q)
    q.add_argument("--pairs", type=int, default=200)
    q.set_defaults(func=cmd_compare)

    q = sub.add_parser("entropy", help="ball volumes and entropy slope")
    common(q)
    q.add_argument("--radii", default="1.0,1.25,1.5")
    q.add_argument("--form", choices=["blaschke", "busemann"],
                   default="busemann")
    q.add_argument("--origin", default="0,0")
    q.add_argument("--inclusion-radius", type=float, default=None)
    q.add_argument("--inclusion-samples", type=int, default=100)
    q.set_defaults(func=cmd_entropy)

    q = sub.add_parser("spectrum", help="translation length report")
    common(q, domain=False)
    q.add_argument("--generators", required=True)
    q.add_argument("--domain", help="invariant domain spec (optional; "
                                    "default: limit-set hull)")
    q.add_argument("--no-normalize", action="store_true")
    q.add_argument("--depth", type=int, default=4)
    q.add_argument("--dyn-n", type=int, default=200)
    q.add_argument("--blaschke-n", type=int, default=0,
                   help="if > 0, also compute the Blaschke length bound")
    q.set_defaults(func=cmd_spectrum)

    q = sub.add_parser("plot", help="unit-ball glyph field from a dump")
    q.add_argument("--solution", required=True)
    q.add_argument("--stride", type=int, default=8)
    q.add_argument("--out", default="out")
    q.add_argument("--force", action="store_true")
    q.set_defaults(func=cmd_plot)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileExistsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except HilbertLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
