"""Command line front end.

Subcommands: exact tables (pmf / moments / roots / quasi), the 8-state chain
report, Monte Carlo sampling, scaled partial-sum paths, block merge
experiments, tree rendering, and the self-verification suites.

Output conventions: CSV payloads written to stdout start with one `# config:`
comment line carrying the resolved run configuration; with --out the payload
file is written unannotated and the configuration goes to a `.meta.json`
sidecar instead, so payload bytes depend only on the configuration (never on
thread count or destination). Exit status: 0 success, 1 verification failure,
2 usage error. The environment variable BFT_SEED, when set, overrides --seed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction

import numpy as np
from mpmath import mp

from . import __version__
from .core_tree import (
    all_shapes,
    bst_from_permutation,
    edge_csv,
    glue_plus,
    hs,
    hs_labeling,
    max_hs_for_size,
    tree_from_shape,
)
from .exact_dist import (
    check_interlacing,
    h_poly,
    mean_closed,
    moment,
    pmf,
    quasi_power_eval,
    tau_star,
    u_derivatives_at_zero,
    variance_closed,
)
from .hs_fast import (
    hs_nonsimple,
    hs_nonsimple_reference,
    hs_simple,
    hs_simple_batch,
    hs_support_bound,
)
from .markov import (
    argmax_sigma2,
    build_chain,
    char_poly_check,
    mu as chain_mu,
    poisson_closed_form,
    poisson_h,
    sigma2 as chain_sigma2,
    sigma2_via_poisson,
    solve_poisson,
    stationary,
)
from .montecarlo import (
    MODELS,
    NONSIMPLE_GUARD_N,
    RngStream,
    block_experiment,
    chi_square_gof,
    clt_standardize,
    fclt_paths,
    run_hs_experiment,
    sample_uniform_ebt,
)
from .permutations import tree_from_butterfly_code, tree_from_simple_code

PMF_N_CAP = 400
ROOTS_N_CAP = 80
VERIFY_SUITES = ("oracle", "exact", "markov", "stat", "all")


class UsageError(Exception):
    """Arguments that parse but make no sense together (exit status 2)."""


# ---------------------------------------------------------------------------
# plumbing


def _resolve_seed(args):
    env = os.environ.get("BFT_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError("BFT_SEED must be an integer, got %r" % env) from None
    return getattr(args, "seed", 0)


def _emit(payload, config, args, kind="csv", extra_meta=None):
    """Write a payload per the conventions in the module docstring."""
    out = getattr(args, "out", None)
    if not payload.endswith("\n"):
        payload += "\n"
    if out:
        meta = {"tool": "bft", "version": __version__, "config": config}
        if extra_meta:
            meta.update(extra_meta)
        with open(out, "w") as fh:
            fh.write(payload)
        with open(out + ".meta.json", "w") as fh:
            json.dump(meta, fh, indent=1, sort_keys=True)
            fh.write("\n")
    else:
        if kind == "csv":
            sys.stdout.write("# config: %s\n" % json.dumps(config, sort_keys=True))
        sys.stdout.write(payload)


def _parse_p(text):
    """Accept '1/3', '0.25', '3e-1' style probabilities; require 0 < p < 1."""
    try:
        p = Fraction(text)
    except ValueError:
        raise UsageError("cannot parse probability %r" % text) from None
    if not 0 < p < 1:
        raise UsageError("probability must lie strictly between 0 and 1, got %s" % text)
    return p


def _fmt(value, exact):
    if exact:
        return str(value)
    return float(value)


# ---------------------------------------------------------------------------
# exact tables


def _cmd_exact_pmf(args):
    n = args.n
    if n < 0:
        raise UsageError("--n must be nonnegative")
    if n > PMF_N_CAP and not args.force:
        raise UsageError(
            "--n %d exceeds the cap %d; pass --force if you mean it" % (n, PMF_N_CAP)
        )
    ks = [args.k] if args.k is not None else range(hs_support_bound(n) + 1)
    lines = ["n,k,numerator,denominator,float_value"]
    for k in ks:
        q = pmf(n, k)
        lines.append(
            "%d,%d,%d,%d,%s"
            % (n, k, q.numerator, q.denominator, repr(q.numerator / q.denominator))
        )
    config = {"command": "exact pmf", "n": n, "k": args.k}
    _emit("\n".join(lines), config, args)
    return 0


def _cmd_exact_moments(args):
    ns = range(args.max_n + 1) if args.max_n is not None else [args.n]
    lines = [
        "n,mean_numerator,mean_denominator,mean_float,"
        "variance_numerator,variance_denominator,variance_float"
    ]
    for n in ns:
        if n < 0:
            raise UsageError("--n must be nonnegative")
        m1 = mean_closed(n)
        var = variance_closed(n)
        lines.append(
            "%d,%d,%d,%s,%d,%d,%s"
            % (
                n,
                m1.numerator,
                m1.denominator,
                repr(m1.numerator / m1.denominator),
                var.numerator,
                var.denominator,
                repr(var.numerator / var.denominator),
            )
        )
    config = {"command": "exact moments", "n": args.n, "max_n": args.max_n}
    _emit("\n".join(lines), config, args)
    return 0


def _cmd_exact_roots(args):
    m = args.max_n
    if m < 3:
        raise UsageError("--max-n must be at least 3")
    if m > ROOTS_N_CAP and not args.force:
        raise UsageError(
            "--max-n %d exceeds the cap %d; pass --force if you mean it"
            % (m, ROOTS_N_CAP)
        )
    report = check_interlacing(m)
    lines = ["n,root_lo,root_hi"]
    for entry in report.entries:
        for lo, hi in entry.roots_n:
            lines.append("%d,%s,%s" % (entry.n, lo, hi))
    config = {"command": "exact roots", "max_n": m}
    _emit("\n".join(lines), config, args, extra_meta={"all_pass": report.all_pass})
    if report.all_pass:
        print("interlacing 2..%d: pass" % m, file=sys.stderr)
        return 0
    bad = ",".join(str(e.n) for e in report.failures())
    print("interlacing 2..%d: FAIL at n in {%s}" % (m, bad), file=sys.stderr)
    return 1


def _cmd_exact_quasi(args):
    dps = args.dps
    with mp.workdps(dps):
        if args.x == "e":
            x = +mp.e
        else:
            xf = Fraction(args.x)
            x = mp.mpf(xf.numerator) / xf.denominator
    cst = quasi_power_eval(x, dps)
    derivs = u_derivatives_at_zero(3, dps)
    lines = ["quantity,value"]
    with mp.workdps(dps):
        rows = [
            ("x", cst.x),
            ("a", cst.a),
            ("b", cst.b),
            ("f", cst.f),
            ("abs_f", abs(cst.f)),
            ("r_plus", cst.r_plus),
            ("r_minus", cst.r_minus),
            ("u0", derivs[0]),
            ("u1", derivs[1]),
            ("u2", derivs[2]),
            ("u3", derivs[3]),
            ("tau_star", tau_star(dps)),
        ]
        for name, value in rows:
            lines.append("%s,%s" % (name, mp.nstr(value, dps)))
    config = {"command": "exact quasi", "x": args.x, "dps": dps}
    _emit("\n".join(lines), config, args)
    return 0


# ---------------------------------------------------------------------------
# chain report


def _cmd_markov(args):
    if args.sweep:
        try:
            lo_s, hi_s, step_s = args.sweep.split(":")
            lo, hi, step = float(lo_s), float(hi_s), float(step_s)
        except ValueError:
            raise UsageError("--sweep wants a:b:step, got %r" % args.sweep) from None
        if step <= 0 or not (0 < lo <= hi < 1):
            raise UsageError("--sweep needs 0 < a <= b < 1 and step > 0")
        lines = ["p,mu,sigma2,ratio"]
        count = int(math.floor((hi - lo) / step + 1e-9)) + 1
        for i in range(count):
            p = lo + i * step
            m = chain_mu(p, exact=False)
            s2 = chain_sigma2(p, exact=False)
            lines.append("%s,%s,%s,%s" % (repr(p), repr(m), repr(s2), repr(s2 / m)))
        config = {"command": "markov", "sweep": args.sweep}
        _emit("\n".join(lines), config, args)
        return 0

    if args.p is None:
        raise UsageError("need --p or --sweep")
    p = _parse_p(args.p)
    exact = not args.float
    if not exact:
        p = float(p)
    P = build_chain(p, exact)
    pi = stationary(p, exact)
    m = chain_mu(p, exact)
    s2 = chain_sigma2(p, exact)
    g_closed = poisson_closed_form(p, exact)
    g_centered = solve_poisson(p, exact)
    h = poisson_h(p, exact)

    def _residual_zero(g):
        # h is already centered, so the Poisson equation reads (I - P) g = h
        tol = 0 if exact else 1e-12
        for i in range(8):
            lhs = g[i] - sum(P[i][j] * g[j] for j in range(8))
            if abs(lhs - h[i]) > tol:
                return False
        return True

    checks = {
        "stationary": all(
            abs(sum(pi[i] * P[i][j] for i in range(8)) - pi[j]) <= (0 if exact else 1e-12)
            for j in range(8)
        ),
        "char_poly_matches": char_poly_check(p if exact else Fraction(args.p)),
        "sigma2_routes_match": (
            s2 == sigma2_via_poisson(p, exact)
            if exact
            else abs(s2 - sigma2_via_poisson(p, exact)) < 1e-12
        ),
        "poisson_closed_form_solves": _residual_zero(g_closed),
        "poisson_centered_solves": _residual_zero(g_centered),
    }
    doc = {
        "p": _fmt(p, exact),
        "exact": exact,
        "mu": _fmt(m, exact),
        "sigma2": _fmt(s2, exact),
        "ratio": _fmt(s2 / m, exact),
        "pi": [_fmt(v, exact) for v in pi],
        "g_centered": [_fmt(v, exact) for v in g_centered],
        "g_closed_form": [_fmt(v, exact) for v in g_closed],
        "P": [[_fmt(v, exact) for v in row] for row in P],
        "checks": checks,
        "pass": all(checks.values()),
    }
    config = {"command": "markov", "p": args.p, "exact": exact}
    _emit(json.dumps(doc, indent=1, sort_keys=True), config, args, kind="json")
    return 0 if doc["pass"] else 1


# ---------------------------------------------------------------------------
# sampling


def _cmd_sample(args):
    seed = _resolve_seed(args)
    model = args.model
    p = None
    if model == "simple":
        p = float(_parse_p(args.p)) if args.p is not None else 0.5
    elif args.p is not None:
        raise UsageError("--p only applies to the simple model")
    if model == "block":
        res = block_experiment(args.size, args.trials, seed, threads=args.threads)
    else:
        res = run_hs_experiment(
            model,
            args.size,
            args.trials,
            seed,
            p=p,
            threads=args.threads,
            test_mode=args.test_mode,
            allow_large=args.force,
        )
    if args.json:
        payload, kind = res.to_json(), "json"
    elif model == "block":
        payload, kind = res.trials_csv(), "csv"
    else:
        payload, kind = res.histogram_csv(), "csv"
    config = {
        "command": "sample",
        "model": model,
        "size": args.size,
        "trials": args.trials,
        "seed": seed,
        "p": p,
        "test_mode": args.test_mode,
    }
    _emit(payload, config, args, kind=kind, extra_meta={"summary": res.summary})
    return 0


def _cmd_fclt(args):
    seed = _resolve_seed(args)
    p = float(_parse_p(args.p))
    res = fclt_paths(args.n, p, args.trials, args.grid, seed, threads=args.threads)
    if args.json:
        payload, kind = res.to_json(), "json"
    else:
        payload, kind = res.paths_csv(), "csv"
    config = {
        "command": "fclt",
        "n": args.n,
        "p": p,
        "trials": args.trials,
        "grid": args.grid,
        "seed": seed,
    }
    _emit(payload, config, args, kind=kind, extra_meta={"summary": res.summary})
    return 0


def _cmd_block(args):
    seed = _resolve_seed(args)
    res = block_experiment(args.m, args.trials, seed, threads=args.threads)
    denom = math.log(2 * args.m) / math.log(4)
    ratio = res.summary["mean"] / denom if denom else float("nan")
    if args.json:
        payload, kind = res.to_json(), "json"
    elif args.per_trial:
        payload, kind = res.trials_csv(), "csv"
    else:
        payload, kind = res.histogram_csv(), "csv"
    config = {
        "command": "block",
        "m": args.m,
        "trials": args.trials,
        "seed": seed,
    }
    _emit(
        payload,
        config,
        args,
        kind=kind,
        extra_meta={"summary": res.summary, "wlln_ratio": ratio},
    )
    print(
        "mean_hs = %.4f, log4(2m) = %.4f, ratio = %.4f"
        % (res.summary["mean"], denom, ratio),
        file=sys.stderr,
    )
    return 0


# ---------------------------------------------------------------------------
# tree rendering


def _cmd_tree(args):
    if args.perm is not None:
        try:
            perm = tuple(int(tok) for tok in args.perm.split(",") if tok.strip())
        except ValueError:
            raise UsageError("--perm wants comma-separated integers") from None
        tree = bst_from_permutation(perm)
        source = {"perm": args.perm}
    elif args.simple_code is not None:
        tree = tree_from_simple_code(args.simple_code)
        source = {"simple_code": args.simple_code}
    else:
        tree = tree_from_butterfly_code(args.butterfly_code)
        source = {"butterfly_code": args.butterfly_code}
    labels = hs_labeling(tree)
    payload = edge_csv(tree, labels)
    config = {"command": "tree", **source}
    _emit(
        payload,
        config,
        args,
        extra_meta={"size": tree.size, "hs": int(labels[tree.root])},
    )
    print("size = %d, hs = %d" % (tree.size, int(labels[tree.root])), file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# verification suites


def _all_codes(n):
    return (np.arange(1 << n, dtype=np.int64)[:, None] >> np.arange(n)) & 1


def _verify_oracle(checks, quick, max_n, seed):
    tree_cap = 8 if quick else 10
    cap = min(max_n, 12)

    def simple_vs_tree():
        for n in range(cap + 1):
            codes = _all_codes(n)
            fast = hs_simple_batch(codes)
            for i in range(len(codes)):
                if hs_simple(codes[i]) != fast[i]:
                    return False, "batch/scalar mismatch at n=%d i=%d" % (n, i)
            if n <= tree_cap:
                for i in range(len(codes)):
                    if hs(tree_from_simple_code(codes[i], shape_only=True)) != fast[i]:
                        return False, "tree mismatch at n=%d i=%d" % (n, i)
        return True, "codes up to n=%d (trees up to n=%d)" % (cap, tree_cap)

    def nonsimple_vs_reference():
        for n in range(4):
            for idx in range(1 << ((1 << n) - 1)):
                bits = [(idx >> j) & 1 for j in range((1 << n) - 1)]
                a = hs_nonsimple(bits)
                if a != hs_nonsimple_reference(bits):
                    return False, "profile/reference mismatch n=%d idx=%d" % (n, idx)
                if a != hs(tree_from_butterfly_code(bits, shape_only=True)):
                    return False, "profile/tree mismatch n=%d idx=%d" % (n, idx)
        gen = RngStream(seed).gen
        trials = 50 if quick else 200
        for _ in range(trials):
            bits = gen.integers(0, 2, size=(1 << 8) - 1)
            if hs_nonsimple(bits) != hs_nonsimple_reference(bits):
                return False, "profile/reference mismatch at n=8"
        return True, "exhaustive n<=3 vs tree, %d random n=8 codes" % trials

    def symmetry():
        for n in range(cap + 1):
            codes = _all_codes(n)
            base = hs_simple_batch(codes)
            if not np.array_equal(base, hs_simple_batch(1 - codes)):
                return False, "complement changed HS at n=%d" % n
            if not np.array_equal(base, hs_simple_batch(codes[:, ::-1])):
                return False, "reversal changed HS at n=%d" % n
        return True, "complement and reversal up to n=%d" % cap

    def merge_inequality():
        m_cap = 4 if quick else 5
        for m in range(1, m_cap + 1):
            trees = [tree_from_shape(s) for s in all_shapes(m)]
            seen = 0
            for t1 in trees:
                h1 = hs(t1)
                for t2 in trees:
                    h2 = hs(t2)
                    hg = hs(glue_plus(t1, t2, shape_only=True))
                    base = max(h1, h2)
                    if not base <= hg <= base + 1:
                        return False, "merge inequality broken at m=%d" % m
                    seen = max(seen, hg)
            if seen != max_hs_for_size(2 * m):
                return False, "glued maximum wrong at m=%d" % m
        return True, "all shape pairs up to m=%d" % m_cap

    checks.append(("simple_code_vs_tree", simple_vs_tree))
    checks.append(("nonsimple_vs_reference", nonsimple_vs_reference))
    checks.append(("code_symmetries", symmetry))
    checks.append(("merge_inequality", merge_inequality))


def _verify_exact(checks, quick, max_n):
    count_cap = min(max_n, 14 if quick else 16)
    moment_cap = 24 if quick else 40
    norm_cap = 60 if quick else 200
    inter_cap = 12 if quick else 24

    def pmf_matches_counts():
        for n in range(1, count_cap + 1):
            counts = np.bincount(
                hs_simple_batch(_all_codes(n)), minlength=n // 2 + 1
            )
            coeffs = h_poly(n).coeffs
            coeffs = coeffs + (0,) * (n // 2 + 1 - len(coeffs))
            if tuple(int(c) for c in counts) != tuple(int(c) for c in coeffs):
                return False, "count/polynomial mismatch at n=%d" % n
        return True, "exhaustive counts match up to n=%d" % count_cap

    def moment_identities():
        for n in range(moment_cap + 1):
            if moment(n, 1) != mean_closed(n):
                return False, "mean mismatch at n=%d" % n
            if moment(n, 2) - moment(n, 1) ** 2 != variance_closed(n):
                return False, "variance mismatch at n=%d" % n
        return True, "exact mean/variance up to n=%d" % moment_cap

    def normalization():
        for n in range(norm_cap + 1):
            if sum(h_poly(n).coeffs) != 1 << n:
                return False, "counts do not sum to 2^n at n=%d" % n
        return True, "sum of counts = 2^n up to n=%d" % norm_cap

    def interlacing():
        report = check_interlacing(inter_cap)
        if report.all_pass:
            return True, "real, negative, interlacing roots for 2..%d" % inter_cap
        return False, "failures at n in %s" % [e.n for e in report.failures()]

    def quasi_constants():
        cst = quasi_power_eval(float(mp.e))
        if abs(abs(cst.f) - 0.6533376957) > 1e-8:
            return False, "|f(e)| off: %s" % mp.nstr(abs(cst.f), 12)
        d = u_derivatives_at_zero(2)
        if abs(d[1] - mp.mpf(1) / 3) > 1e-10 or abs(d[2] - mp.mpf(2) / 27) > 1e-10:
            return False, "u derivative drift at 0"
        if abs(tau_star() - 3.7674502695) > 1e-8:
            return False, "singularity radius drifted"
        return True, "|f(e)|, u'(0)=1/3, u''(0)=2/27, tau* all verified"

    checks.append(("pmf_matches_counts", pmf_matches_counts))
    checks.append(("moment_identities", moment_identities))
    checks.append(("normalization", normalization))
    checks.append(("interlacing", interlacing))
    checks.append(("quasi_constants", quasi_constants))


def _verify_markov(checks):
    ps = (
        Fraction(1, 7),
        Fraction(1, 3),
        Fraction(1, 2),
        Fraction(2, 3),
        Fraction(9, 10),
    )

    def exact_identities():
        for p in ps:
            P = build_chain(p)
            pi = stationary(p)
            if any(
                sum(pi[i] * P[i][j] for i in range(8)) != pi[j] for j in range(8)
            ):
                return False, "stationarity fails at p=%s" % p
            if sum(pi) != 1:
                return False, "pi does not normalize at p=%s" % p
            if not char_poly_check(p):
                return False, "characteristic polynomial off at p=%s" % p
            if chain_sigma2(p) != sigma2_via_poisson(p):
                return False, "variance routes disagree at p=%s" % p
            h = poisson_h(p)
            for g in (poisson_closed_form(p), solve_poisson(p)):
                for i in range(8):
                    lhs = g[i] - sum(P[i][j] * g[j] for j in range(8))
                    if lhs != h[i]:
                        return False, "Poisson equation fails at p=%s" % p
        return True, "exact identities at p in {1/7,1/3,1/2,2/3,9/10}"

    def special_values():
        if chain_mu(Fraction(1, 2)) != Fraction(1, 3):
            return False, "mu(1/2) != 1/3"
        if chain_sigma2(Fraction(1, 2)) != Fraction(2, 27):
            return False, "sigma2(1/2) != 2/27"
        root = (1 + math.sqrt(13)) / 6
        if abs(argmax_sigma2() - root) > 1e-6:
            return False, "variance maximizer drifted"
        return True, "mu(1/2)=1/3, sigma2(1/2)=2/27, argmax near (1+sqrt(13))/6"

    checks.append(("chain_exact_identities", exact_identities))
    checks.append(("chain_special_values", special_values))


def _verify_stat(checks, quick, seed, threads):
    def clt_gof():
        n = 120
        trials = 20_000 if quick else 50_000
        res = run_hs_experiment("simple", n, trials, seed, threads=threads)
        table = {k: float(pmf(n, k)) for k in range(hs_support_bound(n) + 1)}
        gof = chi_square_gof(res.histogram, table)
        ok = gof.p_value > 0.001
        return ok, "n=%d trials=%d p_value=%.5f" % (n, trials, gof.p_value)

    def clt_standardized():
        n = 500 if quick else 1000
        trials = 20_000 if quick else 50_000
        res = run_hs_experiment("simple", n, trials, seed + 1, threads=threads)
        z = clt_standardize(res, n)
        ok = abs(z.mean()) < 0.05 and abs(z.var(ddof=1) - 1) < 0.08
        return ok, "z mean %.4f var %.4f" % (z.mean(), z.var(ddof=1))

    def nonsimple_histogram():
        trials = 2000 if quick else 5000
        res = run_hs_experiment("nonsimple", 10, trials, seed, threads=threads)
        frac4 = res.histogram.get(4, 0) / trials
        ok = res.summary["min"] >= 2 and res.summary["max"] <= 5 and frac4 >= 0.85
        return ok, "mass at 4 = %.4f, support [%d,%d]" % (
            frac4,
            res.summary["min"],
            res.summary["max"],
        )

    def fclt_endpoint():
        n = 2000 if quick else 10_000
        trials = 300 if quick else 500
        res = fclt_paths(n, 0.5, trials, 50, seed, threads=threads)
        var = res.summary["endpoint_variance"]
        target = 2 / 27
        tol = 0.30 if quick else 0.20
        ok = abs(var - target) <= tol * target
        return ok, "endpoint variance %.5f vs %.5f" % (var, target)

    def block_wlln():
        m = 512 if quick else 4096
        trials = 200
        res = block_experiment(m, trials, seed, threads=threads)
        ratio = res.summary["mean"] / (math.log(2 * m) / math.log(4))
        ok = 0.8 <= ratio <= 1.15
        return ok, "mean HS / log4(2m) = %.4f at m=%d" % (ratio, m)

    def ebt_uniformity():
        trials = 3000
        gen_stream = RngStream(seed + 2)
        from .core_tree import shape_string

        counts = {}
        for _ in range(trials):
            s = shape_string(sample_uniform_ebt(4, gen_stream))
            counts[s] = counts.get(s, 0) + 1
        expect = trials / 14
        ok = len(counts) == 14 and all(
            abs(c - expect) < 0.4 * expect for c in counts.values()
        )
        return ok, "%d shapes, count range [%d,%d], expect %.1f" % (
            len(counts),
            min(counts.values()),
            max(counts.values()),
            expect,
        )

    checks.append(("clt_chi_square", clt_gof))
    checks.append(("clt_standardized_moments", clt_standardized))
    checks.append(("nonsimple_histogram", nonsimple_histogram))
    checks.append(("fclt_endpoint_variance", fclt_endpoint))
    checks.append(("block_wlln_ratio", block_wlln))
    checks.append(("ebt_uniformity", ebt_uniformity))


def _cmd_verify(args):
    seed = _resolve_seed(args)
    suite = args.suite
    checks = []
    if suite in ("oracle", "all"):
        _verify_oracle(checks, args.quick, args.max_n, seed)
    if suite in ("exact", "all"):
        _verify_exact(checks, args.quick, args.max_n)
    if suite in ("markov", "all"):
        _verify_markov(checks)
    if suite in ("stat", "all"):
        _verify_stat(checks, args.quick, seed, args.threads)
    if args.inject_failure:
        checks.append(("injected_failure", lambda: (False, "requested by flag")))

    results = []
    for name, fn in checks:
        ok, detail = fn()
        results.append({"name": name, "pass": bool(ok), "detail": detail})
    doc = {
        "suite": suite,
        "quick": args.quick,
        "max_n": args.max_n,
        "seed": seed,
        "checks": results,
        "pass": all(r["pass"] for r in results),
    }
    _emit(json.dumps(doc, indent=1, sort_keys=True), {"command": "verify"}, args, kind="json")
    return 0 if doc["pass"] else 1


# ---------------------------------------------------------------------------
# parser


def _add_common(p, seed=True, threads=True):
    p.add_argument("--out", help="write payload here plus a .meta.json sidecar")
    if seed:
        p.add_argument("--seed", type=int, default=0, help="RNG seed (BFT_SEED wins)")
    if threads:
        p.add_argument(
            "--threads",
            type=int,
            default=os.cpu_count() or 1,
            help="worker threads (default: all cores); never changes output bytes",
        )


def build_parser():
    ap = argparse.ArgumentParser(
        prog="bft",
        description="Butterfly trees: exact Horton-Strahler laws and samplers.",
    )
    ap.add_argument("--version", action="version", version="bft %s" % __version__)
    sub = ap.add_subparsers(dest="command", required=True)

    ex = sub.add_parser("exact", help="exact distribution tables")
    exsub = ex.add_subparsers(dest="exact_command", required=True)

    p = exsub.add_parser("pmf", help="exact HS law of a uniform simple code")
    p.add_argument("--n", type=int, required=True, help="code length")
    p.add_argument("--k", type=int, help="single HS value (default: whole support)")
    p.add_argument("--force", action="store_true", help="lift the --n cap of %d" % PMF_N_CAP)
    _add_common(p, seed=False, threads=False)
    p.set_defaults(func=_cmd_exact_pmf)

    p = exsub.add_parser("moments", help="closed-form mean and variance")
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--max-n", type=int, help="emit a table for 0..max-n instead")
    _add_common(p, seed=False, threads=False)
    p.set_defaults(func=_cmd_exact_moments)

    p = exsub.add_parser(
        "roots", help="certified root intervals of the generating polynomials"
    )
    p.add_argument("--max-n", type=int, required=True)
    p.add_argument(
        "--force", action="store_true", help="lift the --max-n cap of %d" % ROOTS_N_CAP
    )
    _add_common(p, seed=False, threads=False)
    p.set_defaults(func=_cmd_exact_roots)

    p = exsub.add_parser("quasi", help="quasi-power constants A, B, f and u-series")
    p.add_argument("--x", default="e", help="evaluation point (number or 'e')")
    p.add_argument("--dps", type=int, default=30, help="decimal digits")
    _add_common(p, seed=False, threads=False)
    p.set_defaults(func=_cmd_exact_quasi)

    p = sub.add_parser("markov", help="8-state increment chain report")
    p.add_argument("--p", help="one-bit bias, e.g. 1/3 or 0.25")
    p.add_argument("--float", action="store_true", help="float arithmetic instead of exact")
    p.add_argument("--sweep", help="a:b:step grid of p values, CSV output")
    _add_common(p, seed=False, threads=False)
    p.set_defaults(func=_cmd_markov)

    p = sub.add_parser("sample", help="Monte Carlo HS sampling")
    p.add_argument("--model", choices=MODELS, required=True)
    p.add_argument(
        "--n", "--m", dest="size", type=int, required=True,
        help="code length (simple), level (nonsimple), or node count (ebt/block)",
    )
    p.add_argument("--p", help="bit bias for the simple model (default 1/2)")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--test-mode", action="store_true", help="cross-check each trial against the tree oracle")
    p.add_argument(
        "--force",
        action="store_true",
        help="allow nonsimple levels above %d (cost grows like 2^n)" % NONSIMPLE_GUARD_N,
    )
    p.add_argument("--json", action="store_true", help="full JSON document instead of CSV")
    _add_common(p)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("fclt", help="scaled partial-sum paths of HS increments")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", default="1/2")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--grid", type=int, default=50, help="time grid points")
    p.add_argument("--json", action="store_true")
    _add_common(p)
    p.set_defaults(func=_cmd_fclt)

    p = sub.add_parser("block", help="merge two uniform m-node trees, track HS")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--per-trial", action="store_true", help="per-trial rows instead of histogram")
    p.add_argument("--json", action="store_true")
    _add_common(p)
    p.set_defaults(func=_cmd_block)

    p = sub.add_parser("tree", help="render one tree as an edge-list CSV")
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--simple-code", help="0/1 string, may be empty")
    grp.add_argument("--butterfly-code", help="0/1 string of length 2^n - 1")
    grp.add_argument("--perm", help="comma-separated permutation, e.g. 5,4,7,2,8,1,3,6")
    _add_common(p, seed=False, threads=False)
    p.set_defaults(func=_cmd_tree)

    p = sub.add_parser("verify", help="run the self-verification suites")
    p.add_argument("--suite", choices=VERIFY_SUITES, default="all")
    p.add_argument("--quick", action="store_true", help="reduced sizes, < 5 minutes")
    p.add_argument("--max-n", type=int, default=10, help="exhaustive code length cap")
    p.add_argument(
        "--inject-failure",
        action="store_true",
        help="append an intentionally failing check (exercises the exit path)",
    )
    _add_common(p)
    p.set_defaults(func=_cmd_verify)

    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except ValueError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
