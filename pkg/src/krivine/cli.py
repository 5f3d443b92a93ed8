"""Command line interface.

Exit codes: 0 pass, 1 a check failed, 2 usage or input error, 3 numerical failure.
"""

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import hermite, kernel, partitions, rounding, sdp, series
from .config import defaults, kernel_config, shipped_scheme_path
from .errors import InvalidArgument, NumericError

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


def _check(name, got, want, tol, relative=False):
    """One verification record; want None means got must be <= tol."""
    if want is None:
        ok = got <= tol
    else:
        err = abs(got - want) / (abs(want) if relative else 1.0)
        ok = err <= tol
    ok = bool(ok) and math.isfinite(got)
    return {"name": name, "got": float(got), "want": None if want is None else float(want),
            "tol": float(tol), "pass": ok}


def _gt(name, got, bound):
    return {"name": name, "got": float(got), "want": float(bound), "tol": 0.0,
            "pass": bool(got > bound)}


def verify_checks(nodes=None):
    """The identity suite. nodes overrides every quadrature order (to test detection)."""
    n_gh = nodes or 64
    cfg = kernel_config() if nodes is None else kernel.KernelConfig(
        max(16, nodes), max(16, nodes), max(16, nodes))
    checks = []

    def run(name, fn):
        try:
            checks.extend(fn())
        except NumericError as e:
            checks.append({"name": name, "got": float("nan"), "want": None, "tol": 0.0,
                           "pass": False, "error": str(e)})

    run("orthonormality", lambda: [_check("orthonormality(10)",
                                          hermite.verify_orthonormality(10, n=n_gh), None, 1e-8)])
    run("h5_fourth_power", lambda: [_check("h5 fourth power integral",
                                           hermite.h5_quartic_integral(nodes or 32),
                                           4653 / math.sqrt(math.pi), 1e-6, True)])
    run("h5_mixed", lambda: [_check("h5 mixed cos integral", hermite.h5_mixed_integral(nodes or 200),
                                    49 * math.sqrt(2), 1e-4, True)])
    run("sine_eigenfunction", lambda: [_check(f"h5 sine eigenfunction at {x}",
                                              hermite.verify_sine_eigenfunction(x, nodes or 200),
                                              None, 1e-8) for x in (0.5, 1.5, 3.0)])
    run("fourier_gaussian", lambda: [_check(f"Gaussian Fourier transform at {x}",
                                            hermite.fourier_gaussian_error(x, nodes or 200),
                                            None, 1e-10) for x in (0.0, 1.0, 2.5)])
    run("ab_identity", lambda: [_check(f"exp/cos Gaussian identity at ({a}, {b})",
                                       hermite.ab2_error(a, b, nodes or 200), None, 1e-8)
                                for a, b in ((0.3, -0.2), (1.0, 0.5))])

    def h0():
        hp = partitions.Halfplane()
        ts = np.linspace(-0.9, 0.9, 10)
        err = max(abs(kernel.transfer(hp, hp, t, cfg).real - math.asin(t)) for t in ts)
        v = kernel.transfer(hp, hp, 1j, cfg).imag
        return [_check("H0 = arcsin on [-0.9, 0.9]", err, None, 1e-6),
                _check("H0(i)/i = log(1+sqrt2)", v, kernel.LOG1P2, 1e-5)]
    run("H0", h0)

    def phis():
        d2, d4 = kernel.phi_derivative_check(cfg, defaults()["phi_step"])
        c2, c4 = kernel.phi_derivative_check(cfg.coarser(), defaults()["phi_step"])
        noise = abs(d2 - c2) + abs(d4 - c4) * defaults()["phi_step"] ** 2
        return [_check("phi''(0) = 0 within noise", abs(d2), None, max(1e-6, 10 * noise)),
                _check("phi''''(0) = 38400 sqrt2", d4, 38400 * math.sqrt(2), 0.02, True)]
    run("phi_derivatives", phis)

    def improvement():
        eta = defaults()["report_eta"]
        f = partitions.OddGraph(eta)
        d, dis = kernel.transfer_refined(f, f, 1j, cfg, delta=True)
        return [_gt(f"H_eta(i)/i - log(1+sqrt2) > 10x disagreement at eta={eta}",
                    d.imag, 10 * dis)]
    run("H_eta_improvement", improvement)

    def constants():
        k = kernel.one_dim_constant_checks()
        out = [_check("M0", k["M0"], 0.6232, 1e-4),
               _check("M0 closed form", k["M0"], k["M0_closed"], 1e-10),
               _gt("M1 > M0", k["M1_direct"], k["M0"]),
               _check("M1 < 0.671", k["M1_direct"], None, 0.671),
               _check("M1 Taylor bound < 0.671", k["M1_taylor_bound"], None, 0.671),
               _gt("G(4/3) > 0.153", k["G_4_3"], 0.153),
               _check("G(4/3) closed form", k["G_4_3"], k["G_4_3_closed"], 1e-12)]
        for a, (t, b) in k["tail"].items():
            out.append(_check(f"Gaussian tail bound at a={a:g}", t - b, None, 0.0))
        return out
    run("constants", constants)
    return checks


def cmd_verify(args):
    checks = verify_checks(args.nodes)
    failed = [c for c in checks if not c["pass"]]
    rep = {"command": "verify", "defaults": defaults(), "checks": checks,
           "passed": not failed, "first_failure": failed[0]["name"] if failed else None}
    if args.json:
        _emit(rep)
    else:
        for c in checks:
            want = "" if c["want"] is None else f" want {c['want']:.12g}"
            print(f"{'PASS' if c['pass'] else 'FAIL'}  {c['name']}: got {c['got']:.12g}{want}"
                  f" tol {c['tol']:.3g}")
        if failed:
            print(f"first failing check: {failed[0]['name']}")
    return EXIT_FAIL if failed else EXIT_OK


def _shipped_gamma(args):
    d = defaults()
    if args.cached:
        s = series.KrivineScheme.load(str(shipped_scheme_path()))
        return s.gamma, s
    return series.gamma_p(d["eta"], d["p"], d["sample_radius"], d["order"], kernel_config(),
                          tuple(d["alpha"]), workers=args.threads)


def cmd_constants(args):
    g, s = _shipped_gamma(args)
    d = s.diagnostics
    rep = {"command": "constants", "defaults": defaults(),
           "krivine_bound": kernel.KRIVINE_BOUND, "log1p_sqrt2": kernel.LOG1P2,
           "eta": s.eta, "p": s.p, "gamma_p": g, "new_bound": math.pi / (2 * g),
           "margin": g - kernel.LOG1P2, "uncertainty": d.get("uncertainty"),
           "diagnostics": d}
    if args.json:
        _emit(rep)
    else:
        print(f"Krivine bound pi/(2 log(1+sqrt2)) = {kernel.KRIVINE_BOUND:.12f}")
        print(f"log(1+sqrt2)                       = {kernel.LOG1P2:.12f}")
        print(f"gamma_p at eta={s.eta:g}, p={s.p:g}        = {g:.15f}")
        print(f"margin gamma_p - log(1+sqrt2)       = {g - kernel.LOG1P2:.3e}"
              f" (uncertainty {d.get('uncertainty', float('nan')):.1e})")
        print(f"implied bound pi/(2 gamma_p)        = {math.pi / (2 * g):.15f}")
    return EXIT_OK


def _tiger_start(args):
    if args.start == "halfplane":
        return partitions.Halfplane()
    if args.start == "curve":
        return partitions.OddGraph(args.eta)
    return partitions.random_grid(args.extent, args.res, args.seed, odd=True)


def cmd_tiger(args):
    os.makedirs(args.out, exist_ok=True)
    f0 = partitions.sample(_tiger_start(args), args.extent, args.res)
    iterates, values = partitions.tiger_iterate(f0, args.steps, args.extent, args.res)
    paths = [partitions.render_pgm(f0, os.path.join(args.out, "iter_000.pgm"))]
    for j, g in enumerate(iterates, 1):
        paths.append(partitions.render_pgm(g, os.path.join(args.out, f"iter_{j:03d}.pgm")))
    with open(os.path.join(args.out, "values.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "value", "value_minus_log1p_sqrt2"])
        for j, v in enumerate(values, 1):
            w.writerow([j, repr(v), repr(v - kernel.LOG1P2)])
    rep = {"command": "tiger", "defaults": defaults(), "start": args.start, "seed": args.seed,
           "steps": args.steps, "extent": args.extent, "resolution": args.res,
           "values": values, "images": [os.path.basename(p) for p in paths]}
    if args.json:
        _emit(rep)
    else:
        for j, v in enumerate(values, 1):
            print(f"step {j:3d}  v = {v:.12f}  v - log(1+sqrt2) = {v - kernel.LOG1P2:+.3e}")
        print(f"wrote {len(paths)} images to {args.out}")
    return EXIT_OK


def _load_scheme(name, args):
    if name == "hyperplane":
        return None
    if name == "krivine":
        return series.krivine_scheme()
    if name == "mixed":
        return series.KrivineScheme.load(str(shipped_scheme_path()))
    return series.KrivineScheme.load(name)


def _round_one(prob, scheme, sol, args):
    res = rounding.round_matrix(prob, scheme, trials=args.trials, seed=args.seed, sol=sol,
                                workers=args.threads, check=scheme is not None)
    return res.to_json()


def cmd_round(args):
    prob = sdp.load_matrix(args.matrix)
    scheme = _load_scheme(args.scheme, args)
    sol = sdp.solve_sdp(prob, seed=args.seed, workers=args.threads)
    rep = {"command": "round", "defaults": defaults(), "scheme": args.scheme,
           **_round_one(prob, scheme, sol, args)}
    if args.out:
        sdp.save_report(args.out, rep)
    if args.json:
        _emit(rep)
    else:
        print(f"SDP {rep['sdp']:.10g}  best {rep['best_value']:.10g}  mean {rep['mean']:.10g}"
              f" +- {rep['stderr']:.3g}  guarantee {rep['guarantee_c'] * rep['sdp']:.10g}")
        if "opt" in rep:
            print(f"OPT {rep['opt']:.10g}")
    return EXIT_OK


def cmd_compare(args):
    prob = sdp.load_matrix(args.matrix)
    sol = sdp.solve_sdp(prob, seed=args.seed, workers=args.threads)
    opt = sdp.brute_force_opt(prob)[0] if prob.m + prob.n <= sdp.MAX_BRUTE else None
    rows = []
    for name in ("hyperplane", "krivine", "mixed"):
        r = _round_one(prob, _load_scheme(name, args), sol, args)
        rows.append({"scheme": name, "best": r["best_value"], "mean": r["mean"],
                     "stderr": r["stderr"], "guarantee_c": r["guarantee_c"],
                     "best_over_sdp": r["best_value"] / sol.objective if sol.objective else None,
                     "mean_over_sdp": r["mean"] / sol.objective if sol.objective else None,
                     "best_over_opt": r["best_value"] / opt if opt else None})
    rep = {"command": "compare", "defaults": defaults(), "sdp": sol.objective, "opt": opt,
           "seed": args.seed, "trials": args.trials, "rows": rows}
    if args.json:
        _emit(rep)
    else:
        print(f"SDP {sol.objective:.10g}" + ("" if opt is None else f"  OPT {opt:.10g}"))
        print(f"{'scheme':<11}{'best':>14}{'mean':>14}{'stderr':>11}{'mean/SDP':>11}")
        for r in rows:
            ms = "" if r["mean_over_sdp"] is None else f"{r['mean_over_sdp']:.6f}"
            print(f"{r['scheme']:<11}{r['best']:>14.8g}{r['mean']:>14.8g}{r['stderr']:>11.3g}{ms:>11}")
    return EXIT_OK


def cmd_scheme(args):
    d = defaults()
    eta = d["eta"] if args.eta is None else args.eta
    p = d["p"] if args.p is None else args.p
    g, s = series.gamma_p(eta, p, d["sample_radius"], args.order or d["order"], kernel_config(),
                          tuple(d["alpha"]), workers=args.threads)
    if args.out:
        s.save(args.out)
    rep = {"command": "scheme", "defaults": d, **s.to_json()}
    if args.json:
        _emit(rep)
    else:
        print(f"gamma = {g:.15f}  margin {g - kernel.LOG1P2:.3e}"
              f"  uncertainty {s.diagnostics['uncertainty']:.1e}")
    return EXIT_OK


def _emit(rep):
    json.dump(rep, sys.stdout, indent=2, sort_keys=True, default=sdp._jsonable)
    sys.stdout.write("\n")


def build_parser():
    ap = argparse.ArgumentParser(prog="krivine", description="Generalized Krivine rounding schemes "
                                 "for the Grothendieck inequality and checks of their constants.")
    ap.add_argument("--threads", type=int, default=1, help="worker cap; results do not depend on it")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--json", action="store_true", help="machine-readable report")
        p.set_defaults(fn=fn)
        return p

    p = add("verify", cmd_verify, "run the identity suite")
    p.add_argument("--nodes", type=int, default=None, help="override every quadrature order")
    p = add("constants", cmd_constants, "Krivine's bound, gamma_p and the implied bound")
    p.add_argument("--cached", action="store_true", help="read the shipped scheme instead of recomputing")
    p = add("tiger", cmd_tiger, "iterate sigma and write PGM images and values.csv")
    p.add_argument("--eta", type=float, default=0.3)
    p.add_argument("--steps", type=int, default=40)
    p.add_argument("--extent", type=float, default=7.0)
    p.add_argument("--res", type=int, default=512)
    p.add_argument("--start", choices=("random", "halfplane", "curve"), default="random")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p = add("round", cmd_round, "round one matrix with a scheme")
    p.add_argument("--matrix", required=True)
    p.add_argument("--scheme", default="mixed", help="krivine, mixed, hyperplane or a scheme JSON file")
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="write the JSON report here")
    p = add("compare", cmd_compare, "hyperplane vs Krivine vs mixed rounding")
    p.add_argument("--matrix", required=True)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p = add("scheme", cmd_scheme, "compute a mixed scheme and write its JSON")
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--order", type=int, default=None)
    p.add_argument("--out", default=None)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.fn(args)
    except (InvalidArgument, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as e:
        print(f"numeric error: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
