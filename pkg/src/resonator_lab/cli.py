"""``resonator-lab``: run an experiment and write a JSON or CSV report.

Exit statuses: 0 success, 2 a property check failed, 3 quadrature accuracy
error, 4 invalid configuration. Parameters are validated before any sieve is
built.
"""

from __future__ import annotations

import argparse
import math
import sys
from fractions import Fraction
from pathlib import Path

from . import arith, lattice
from .errors import ConfigError, DomainError, ResonatorLabError
from .experiments import gaps, mconv, moments, visible
from .experiments.report import Report
from .quad import QuadraturePolicy
from .resonator import GapProfile, GSigmaSpec, MollifierPhi, WeightMeasure, csc_bound_check


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _complexes(text: str) -> list[complex]:
    try:
        return [complex(x.replace(" ", "")) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated complex numbers, got {text!r}")


def _int_like(text: str) -> int:
    return int(float(text))


def _tables(args, needed: int):
    needed = max(int(needed), 100)
    limit = args.sieve_limit or needed
    if limit < needed:
        raise ConfigError(f"--sieve-limit {limit} is below the {needed} this experiment needs")
    return arith.cached_tables(limit, args.sieve_dir)


def _policy(args) -> QuadraturePolicy:
    return QuadraturePolicy(threads=args.threads)


def _check_sigma_k(sigma: float, k: int) -> None:
    limit = visible.sigma_limit(k)
    if not 0 < sigma < limit:
        raise DomainError(
            f"sigma={sigma} violates sigma < 2/(2^(2k-1)-1) = {limit:.6g} for k={k}"
        )


def _check_ladder(R: list[float], low: float = 1.0) -> None:
    if not R:
        raise DomainError("empty R ladder")
    if min(R) <= low:
        raise DomainError(f"every R must exceed {low}, got {min(R)}")


# ----------------------------------------------------------------- handlers


def run_constants(args) -> Report:
    if args.prime_limit < 3 or args.d_limit < 2:
        raise DomainError("need --prime-limit >= 3 and --d-limit >= 2")
    tables = _tables(args, max(args.prime_limit, args.d_limit))
    c = arith.constants_report(tables, args.prime_limit, args.d_limit, zeta_terms=args.zeta_terms)
    rep = Report("constants", vars_of(args, "prime_limit", "d_limit", "zeta_terms"))
    rep.constants = {k: getattr(c, k) for k in c.__dataclass_fields__}
    rep.constants["relative_gap_to_7_over_pi2"] = c.relative_gap_to_seven_over_pi2
    rep.constants["display_form_relative_gap"] = abs(c.C0_display - c.C0) / c.C0
    rep.constants["prediction"] = "7/pi^2"
    rep.add_point(args.prime_limit, c.C0, c.C0 / c.seven_over_pi2, c.C0_tail_bound)
    rep.check(
        "euler product and series agree within tail bounds",
        c.consistent,
        f"|{c.C0:.12g} - {c.C0_alt:.12g}| <= {c.C0_tail_bound:.3g} + {c.C0_alt_tail_bound:.3g}",
    )
    rep.check(
        "C0 within 4% of 7/pi^2",
        c.relative_gap_to_seven_over_pi2 < 0.04,
        f"relative gap {c.relative_gap_to_seven_over_pi2:.5f}",
    )
    return rep


def run_v_eval(args) -> Report:
    ds = args.d
    if min(ds) < 1:
        raise DomainError("d must be positive")
    tables = _tables(args, 2 * max(ds) + 1)
    rep = Report("v-eval", vars_of(args, "d", "brute_max"), {"prediction": "d^4"})
    brute_ok, gauss_ok, double_ok = [], [], []
    for d in ds:
        v = arith.v_formula(d, tables)
        rep.add_point(d, v, v / d**4, 0.0)
        if d <= args.brute_max:
            brute_ok.append(arith.v_bruteforce(d, args.brute_max) == v)
        if d > 2 and d <= 31 and tables.spf[d] == d:
            g = arith.gauss_sum_v(d)
            gauss_ok.append(abs(g - v) <= 1e-6 * v)
        if d % 2 and 2 * d <= tables.limit:
            double_ok.append(arith.v_formula(2 * d, tables) == 8 * v)
    rep.check("formula equals brute force", all(brute_ok), f"{len(brute_ok)} values compared")
    rep.check("formula equals Gauss-sum route", all(gauss_ok), f"{len(gauss_ok)} primes compared")
    rep.check("v(2d) = 8 v(d) for odd d", all(double_ok), f"{len(double_ok)} values compared")
    return rep


def _radii(args) -> list[float]:
    if args.radii:
        radii = args.radii
    else:
        n = int(round((args.r_max - args.r_min) / args.step))
        radii = [args.r_min + i * args.step for i in range(n + 1)]
    if not radii or min(radii) < 0:
        raise DomainError("radii must be non-negative")
    return radii


def run_count(args) -> Report:
    radii = _radii(args)
    tables = _tables(args, lattice.norm_bound(max(radii)))
    coef = lattice.volume_coefficient(lattice.default_zeta3())
    rep = Report("count", vars_of(args, "method") | {"radii": radii},
                 {"prediction": "4 pi R^3 / (3 zeta(3))"})
    methods = ("moebius", "direct") if args.method == "both" else (args.method,)
    counts = {m: lattice.visible_counts(radii, tables, m) for m in methods}
    main = counts[methods[0]]
    for R, n in zip(radii, main):
        rep.add_point(R, int(n), n / (coef * R**3) if R > 0 else None, 0.0)
    if len(methods) == 2:
        bad = [R for R, a, b in zip(radii, *counts.values()) if a != b]
        rep.check("moebius count equals direct count", not bad, f"mismatch at {bad[:5]}" if bad else
                  f"{len(radii)} radii agree")
    return rep


def run_error_term(args) -> Report:
    radii = _radii(args)
    need = lattice.norm_bound(max(radii))
    if args.voronoi:
        if min(radii) <= math.e:
            raise DomainError("Voronoi comparison needs R > e")
        mol = MollifierPhi()
        spec = lattice.VoronoiSpec(max(radii), mol, args.voronoi_threshold)
        need = max(need, spec.n_max, lattice.norm_bound(2 * max(radii)))
    tables = _tables(args, need)
    rep = Report("error-term", vars_of(args, "voronoi", "voronoi_threshold") | {"radii": radii},
                 {"prediction": "R sqrt(log R)"})
    for R in radii:
        E = lattice.error_term_star(R, tables)
        comp = E / (R * math.sqrt(math.log(R))) if R > 1 else None
        rep.add_point(R, E, comp, 0.0)
    if args.voronoi:
        fits = {}
        for R in radii:
            res = lattice.voronoi_comparison(R, tables, mol, args.voronoi_threshold)
            fits[str(R)] = {f.prefactor: {"correlation": f.correlation, "relative_rms": f.relative_rms}
                            for f in res}
            fits[str(R)]["better"] = res[0].prefactor
        rep.constants["voronoi"] = fits
    return rep


def run_correlate_I(args) -> Report:
    _check_ladder(args.R)
    for R in args.R:
        GSigmaSpec(R, args.sigma)
    w = WeightMeasure()
    tables = _tables(args, lattice.norm_bound(w.v * max(args.R)) + 1)
    c = arith.constants_report(tables, min(tables.limit, 10**6), min(tables.limit, 10**5))
    rep = Report("correlate-I", vars_of(args, "R", "sigma", "r0"),
                 {"C0": c.C0, "C": c.C, "prediction": "-sigma C R log R"})
    pol = _policy(args)
    negative = True
    for R in args.R:
        res = visible.correlation_I(R, args.sigma, tables, w, pol)
        val = float(res)
        rep.add_point(R, val, val / visible.predicted_I(R, args.sigma, c.C), res.error_estimate)
        if R >= args.r0:
            negative &= val < 0
    rep.check(f"I(R) < 0 for R >= {args.r0}", negative, "")
    return rep


def run_m_sigma(args) -> Report:
    _check_ladder(args.R, math.e)
    for R in args.R:
        GSigmaSpec(R, args.sigma)
    top = max(args.R)
    need = max(math.ceil(2 * top), math.floor(top**args.sigma) + 1, 10**5)
    tables = _tables(args, need)
    c = arith.constants_report(tables, min(tables.limit, 10**6), 10**5)
    mol = MollifierPhi()
    rep = Report("m-sigma", vars_of(args, "R", "sigma", "method"),
                 {"C0": c.C0, "prediction": "2 pi C0 sigma log R"})
    ratios = []
    for R in args.R:
        M = visible.compute_M_sigma(R, args.sigma, tables, mol, args.method)
        ratios.append(M / visible.predicted_M(R, args.sigma, c.C0))
        rep.add_point(R, M, ratios[-1], 0.0)
    drift = all(abs(b - 1) < abs(a - 1) for a, b in zip(ratios, ratios[1:]))
    rep.check("compensated ratio drifts toward 1", drift, ", ".join(f"{r:.5f}" for r in ratios))
    return rep


def run_moments_estar(args) -> Report:
    _check_ladder(args.R)
    if args.p <= 1:
        raise DomainError(f"p must exceed 1, got {args.p}")
    w = WeightMeasure()
    tables = _tables(args, lattice.norm_bound(w.v * max(args.R)) + 1)
    rep = Report("moments-estar", vars_of(args, "R", "p"), {"prediction": "R^p (log R)^(p/2)"})
    pol = _policy(args)
    for R in args.R:
        res = visible.moment_Estar(R, args.p, tables, w, pol)
        rep.add_point(R, float(res), float(res) / (R**args.p * math.log(R) ** (args.p / 2)),
                      res.error_estimate)
    return rep


def run_moments_g(args) -> Report:
    _check_ladder(args.R)
    _check_sigma_k(args.sigma, args.k)
    rep = Report("moments-g", vars_of(args, "R", "sigma", "k"), {"prediction": "diagonal sum"})
    pol = _policy(args)
    for R in args.R:
        num, diag = moments.moment_g_sigma(R, args.sigma, args.k, policy=pol)
        rep.add_point(R, num, num / diag, abs(num - diag) / diag)
    gaps_ = [row[3] for row in rep.series]
    rep.check("diagonal gap below 5%", max(gaps_) < 0.05, f"max relative gap {max(gaps_):.3g}")
    return rep


def run_gaps(args) -> Report:
    if len(args.nu) != len(args.a):
        raise DomainError("--nu and --a must have equal length")
    prof = GapProfile(tuple(args.nu), tuple(args.a), args.n)
    prof.require_interior()
    for a in args.alpha:
        if not 0 <= a <= 1:
            raise DomainError(f"alpha must lie in [0, 1], got {a}")
    pol = _policy(args)
    corr = gaps.gaps_correlation(prof, pol)
    rep = Report("gaps-verify", vars_of(args, "nu", "a", "n", "alpha", "grid"),
                 {"gap": prof.gap, "a_n": prof.a_n, "correlation": corr,
                  "raw_correlation": gaps.fejer_correlation_raw(prof, pol),
                  "prediction": "B |a_n| |x|^alpha / 4 at the witness"})
    dev = abs(corr - prof.a_n / 2)
    rep.check("Fejer correlation equals a_n/2", dev <= 1e-9, f"deviation {dev:.3g}")
    wit = {}
    for a in args.alpha:
        B = gaps.gaps_bound(prof, a)
        w = gaps.gaps_witness(prof, a, args.grid)
        thresh = B * abs(prof.a_n) * abs(w.x) ** a / 4
        rep.add_point(a, w.margin + thresh, (w.margin + thresh) / thresh if thresh else None, 0.0)
        wit[str(a)] = {"B": B, "x": w.x, "margin": w.margin, "positive_fraction": w.positive_fraction}
        rep.check(f"witness with positive margin at alpha={a}", w.margin > 0, f"x={w.x:.9f}")
    rep.constants["witnesses"] = wit
    if args.property_checks:
        ok, slack = csc_bound_check(args.grid)
        rep.check("csc^2 bound on the grid", ok, f"min slack {slack:.5g}")
        mono = gaps.f_alpha_monotonicity(args.grid)
        rep.check("f(alpha) decreasing on [0,1]", mono.decreasing, f"min step {mono.min_decrease:.3g}")
    return rep


def run_mconv(args) -> Report:
    a = tuple(args.a) if args.a else (1,) * args.N
    inst = mconv.MconvInstance(a, args.f, args.K)
    _check_ladder(args.R)
    for R in args.R:
        if R < 4 * inst.N:
            raise DomainError(f"need R >= 4N = {4 * inst.N}, got R={R}")
    if any(V <= 1 / 6 for V in args.V):
        raise DomainError("every V must exceed 1/6")
    rep = Report("mconv-verify", vars_of(args, "f", "K", "R", "V") | {"a": list(a)},
                 {"scriptB": inst.scriptB, "b": list(inst.b), "prediction": "scriptB"})
    pol = _policy(args)
    hyp = {}
    for R in args.R:
        res = mconv.mconv_correlation(inst, R, policy=pol)
        rep.add_point(R, res.value.real, res.value.real / res.scriptB, res.error_estimate)
        hyp[str(R)] = [{"V": h.V, "triple_sum": h.triple_sum, "ratio": h.ratio}
                       for h in mconv.mconv_hypothesis(inst, R, args.V)]
    rep.constants["hypothesis"] = hyp
    gaps_ = [abs(r[2] - 1) for r in rep.series]
    rep.check("relative gap to scriptB decreases with R",
              all(b < a_ for a_, b in zip(gaps_, gaps_[1:])), ", ".join(f"{g:.3g}" for g in gaps_))
    return rep


def run_hoelder(args) -> Report:
    _check_ladder(args.R)
    if args.p <= 1:
        raise DomainError(f"p must exceed 1, got {args.p}")
    _check_sigma_k(args.sigma, visible.hoelder_k(args.p))
    w = WeightMeasure()
    tables = _tables(args, lattice.norm_bound(w.v * max(args.R)) + 1)
    rep = Report("hoelder", vars_of(args, "R", "p", "sigma"),
                 {"k": visible.hoelder_k(args.p), "prediction": "Hoelder right-hand side"})
    pol = _policy(args)
    chains = {}
    for R in args.R:
        ch = visible.hoelder_chain(R, args.p, args.sigma, tables, w, pol, strict=False)
        rep.add_point(R, ch.correlation_power, ch.correlation_power / ch.rhs, ch.error)
        chains[str(R)] = {k: getattr(ch, k) for k in ch.__dataclass_fields__}
        rep.check(f"Hoelder chain at R={R}", ch.holds,
                  f"slack {ch.slack:.6g}, Lyapunov slack {ch.lyapunov_slack:.6g}, error {ch.error:.3g}")
    rep.constants["chains"] = chains
    return rep


def run_diagonal(args) -> Report:
    if args.k < 1 or args.cutoff < 1:
        raise DomainError("need k >= 1 and cutoff >= 1")
    exact = moments.diagonal_moment(args.cutoff, args.k)
    rep = Report("diagonal", vars_of(args, "cutoff", "k"), {"exact": exact, "prediction": "exact"})
    rep.add_point(args.cutoff, float(exact), 1.0, 0.0)
    if args.cutoff ** (2 * args.k) <= 10**6:
        enum = moments.diagonal_enumeration(args.cutoff, args.k)
        rep.check("combinatorial formula equals enumeration", enum == exact, f"{exact} vs {enum}")
    if args.k == 1:
        h = sum(Fraction(1, n) for n in range(1, args.cutoff + 1))
        rep.check("k=1 gives the harmonic sum", h == exact, str(h))
    return rep


def run_defaults(args) -> Report:
    parser = build_parser()
    rep = Report("defaults")
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for name, p in sub.choices.items():
        rep.params[name] = {
            a.dest: a.default
            for a in p._actions
            if a.dest not in ("help",) and a.default is not argparse.SUPPRESS
        }
    return rep


def vars_of(args, *names) -> dict:
    return {n: getattr(args, n) for n in names}


# ------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--threads", type=int, default=1, help="quadrature worker threads (default 1)")
    common.add_argument("--format", choices=("json", "csv"), default="json", help="report format")
    common.add_argument("--output", type=Path, default=None, help="report file (default stdout)")
    common.add_argument("--sieve-limit", type=_int_like, default=None,
                        help="sieve size; default is the smallest the experiment needs")
    common.add_argument("--sieve-dir", default=None,
                        help="sieve cache directory (default $RESONATOR_LAB_SIEVE_DIR)")
    common.add_argument("--no-timestamp", action="store_true", help="omit the timestamp field")

    parser = _Parser(prog="resonator-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_,
                           formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        p.set_defaults(func=func)
        return p

    p = add("constants", run_constants, "zeta(3), C0 by two routes, and C")
    p.add_argument("--prime-limit", type=_int_like, default=10**6)
    p.add_argument("--d-limit", type=_int_like, default=10**5)
    p.add_argument("--zeta-terms", type=_int_like, default=10**6)

    p = add("v-eval", run_v_eval, "the local density v(d) by formula, brute force and Gauss sums")
    p.add_argument("--d", type=_ints, default=[1, 2, 3, 5, 6, 7, 10, 11, 13, 14, 15])
    p.add_argument("--brute-max", type=int, default=15)

    for name, func, help_ in (
        ("count", run_count, "visible lattice points in balls"),
        ("error-term", run_error_term, "the error term E*(R)"),
    ):
        p = add(name, func, help_)
        p.add_argument("--radii", type=_floats, default=None, help="explicit radii; overrides the range")
        p.add_argument("--r-min", type=float, default=1.0)
        p.add_argument("--r-max", type=float, default=200.0)
        p.add_argument("--step", type=float, default=0.25)
        if name == "count":
            p.add_argument("--method", choices=("moebius", "direct", "both"), default="both")
        else:
            p.add_argument("--voronoi", action="store_true", help="compare both Voronoi prefactors")
            p.add_argument("--voronoi-threshold", type=float, default=1e-3)

    p = add("correlate-I", run_correlate_I, "correlation of E* with the short resonator")
    p.add_argument("--R", type=_floats, default=[25, 50, 100, 200, 400])
    p.add_argument("--sigma", type=float, default=0.5)
    p.add_argument("--r0", type=float, default=25.0, help="ladder start for the negativity check")

    p = add("m-sigma", run_m_sigma, "the arithmetic main term M_sigma(R)")
    p.add_argument("--R", type=_floats, default=[125, 250, 500, 1000, 2000, 4000])
    p.add_argument("--sigma", type=float, default=0.8)
    p.add_argument("--method", choices=("auto", "table", "hecke"), default="auto")

    p = add("moments-estar", run_moments_estar, "int |E*|^p dnu")
    p.add_argument("--R", type=_floats, default=[100, 200, 400])
    p.add_argument("--p", type=float, default=1.5)

    p = add("moments-g", run_moments_g, "2k-th moment of the short resonator against its diagonal")
    p.add_argument("--R", type=_floats, default=[40, 80, 160, 320])
    p.add_argument("--sigma", type=float, default=0.4)
    p.add_argument("--k", type=int, default=1)

    p = add("gaps-verify", run_gaps, "Fejer correlation and oscillation witnesses")
    p.add_argument("--nu", type=_ints, default=[1, 10, 25])
    p.add_argument("--a", type=_complexes, default=[1, 1, 1])
    p.add_argument("--n", type=int, default=2, help="1-based interior index")
    p.add_argument("--alpha", type=_floats, default=[0.0, 0.5, 1.0])
    p.add_argument("--grid", type=int, default=10_000)
    p.add_argument("--property-checks", action="store_true", help="also run the csc^2 and f(alpha) grids")

    p = add("mconv-verify", run_mconv, "Dirichlet-resonator correlation of G and the hypothesis sum")
    p.add_argument("--N", type=int, default=8)
    p.add_argument("--a", type=_complexes, default=None, help="coefficients (default all ones)")
    p.add_argument("--f", choices=sorted(mconv.ARITHMETIC_FUNCTIONS), default="chi4")
    p.add_argument("--K", type=float, default=2.0)
    p.add_argument("--R", type=_floats, default=[32, 64, 128])
    p.add_argument("--V", type=_floats, default=[0.25, 0.5, 1, 2, 4, 8])

    p = add("hoelder", run_hoelder, "every factor of the Hoelder lower-bound chain")
    p.add_argument("--R", type=_floats, default=[100, 200, 400])
    p.add_argument("--p", type=float, default=1.5)
    p.add_argument("--sigma", type=float, default=0.25)

    p = add("diagonal", run_diagonal, "exact diagonal moment sums")
    p.add_argument("--cutoff", type=int, default=3)
    p.add_argument("--k", type=int, default=2)

    add("defaults", run_defaults, "report every default value")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.threads < 1:
            raise DomainError(f"--threads must be positive, got {args.threads}")
        rep = args.func(args)
    except ResonatorLabError as exc:
        print(f"resonator-lab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_status
    text = rep.to_csv() if args.format == "csv" else rep.to_json(not args.no_timestamp)
    if args.output is None:
        sys.stdout.write(text)
    else:
        args.output.write_text(text)
    for c in rep.failed_checks():
        print(f"resonator-lab: check failed: {c['name']}: {c['detail']}", file=sys.stderr)
    return 0 if rep.passed else 2


if __name__ == "__main__":
    sys.exit(main())
