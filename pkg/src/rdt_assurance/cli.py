"""Command-line front end: ``rdt-assure <mode> <command> [flags]``.

Results go to standard output as TSV; a short human-readable summary goes
to standard error. Exit status: 0 success, 2 incoherent input, 3 infeasible
or unreachable target, 1 internal error.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from typing import Sequence

import numpy as np

from . import binomial as bn
from . import elicitation as el
from . import io, risk, stats
from . import weibull as wb
from .errors import DomainError, IdentifiabilityError, IncoherenceError, InfeasibleError, RDTError
from .stats import RandomStream

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INCOHERENT = 2
EXIT_INFEASIBLE = 3

PROG = "rdt-assure"


class Unreachable(Exception):
    """A design target that no candidate meets."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise IncoherenceError(f"{self.prog}: {message}")


def _num(parser, flag, type_, default, unit, text, **kw):
    shown = default
    if default is None:
        shown = "required" if kw.get("required") else "none"
    kw.setdefault("metavar", flag.lstrip("-").upper().replace("-", "_"))
    parser.add_argument(flag, type=type_, default=default, help=f"{text} [{unit}; default: {shown}]", **kw)


def _global_flags(parser, suppress: bool):
    d = argparse.SUPPRESS
    parser.add_argument(
        "--seed", type=int, default=d if suppress else 1, help="random seed [integer; default: 1]"
    )
    parser.add_argument(
        "--workers", type=int, default=d if suppress else 1, help="worker processes [count; default: 1]"
    )
    parser.add_argument(
        "--precision",
        type=int,
        default=d if suppress else 6,
        help="significant digits in TSV output [digits; default: 6]",
    )
    parser.add_argument(
        "--config", default=d if suppress else None, help="file of flags, one per line; flags given here win"
    )


# ---------------------------------------------------------------------------
# Parser construction
# ---------------------------------------------------------------------------


def _rule_flags(p):
    p.add_argument(
        "--rule",
        choices=("exact", "normal", "bayes"),
        default="exact",
        help="cut-off rule: exact binomial test, normal approximation or Bayesian posterior [default: exact]",
    )
    _num(p, "--pi-t", float, 0.96, "probability", "target reliability pi_T")
    _num(p, "--alpha", float, 0.05, "probability", "significance level of the exact / normal test")
    p.add_argument(
        "--normal-statistic",
        choices=("literal", "failures"),
        default="literal",
        help="normal rule: y/n against pi_T as written, or failure proportion against 1 - pi_T [default: literal]",
    )
    _num(p, "--delta", float, 0.05, "probability", "Bayes rule passes when Pr_A(pi <= pi_T | y) <= delta")
    p.add_argument(
        "--analysis-prior",
        nargs="+",
        default=["beta:6.45,2"],
        metavar="SPEC",
        help="Bayes analysis prior: beta:a,b or w:beta:a,b ... for a mixture [default: beta:6.45,2]",
    )
    p.add_argument(
        "--weight-count",
        choices=("survivals", "failures"),
        default="survivals",
        help="count entering a mixture's weight update (a + count, b + n - count) [default: survivals]",
    )


def _design_flags(p, with_draws=True):
    p.add_argument(
        "--design",
        nargs="+",
        default=["p:beta:78,2", "m:gamma:200,1"],
        metavar="SPEC",
        help="design prior: p:beta:a,b m:gamma:shape,rate, or pi:beta:a,b [default: p:beta:78,2 m:gamma:200,1]",
    )
    p.add_argument("--data", help="historical pass/fail CSV with header n,x (x failures out of n demands)")
    if with_draws:
        _num(p, "--draws", int, 100_000, "count", "Monte Carlo draws of pi (prior design)")
    _num(p, "--mcmc-iterations", int, 11_000, "iterations", "design-posterior chain length")
    _num(p, "--mcmc-burn-in", int, 1_000, "iterations", "design-posterior burn-in")


def _weibull_common(p, *, design=True):
    p.add_argument(
        "--target",
        required=True,
        help="reliable-life target q=..,tau=..,s=..[,delta=..] (tau in hours, s in stress units) [required]",
    )
    p.add_argument(
        "--analysis-prior",
        nargs="+",
        required=True,
        metavar="KEY=VALUE",
        help="analysis prior mu0=..,mu1=..,s00=..,s11=..,s01=..,a_beta=..,b_beta=.. plus v_eps or a_eps,b_eps",
    )
    p.add_argument(
        "--sceptical-prob",
        type=float,
        default=None,
        metavar="PROB",
        help="shift the analysis prior's mu0 so Pr(tau_q >= tau) equals this [probability; default: none]",
    )
    _num(p, "--k", float, 1.0, "exponent", "link exponent k in log rho = alpha0 + alpha1 s^k")
    _num(p, "--stress-offset", float, 0.0, "stress units", "subtracted from every stress (data, tests, target)")
    _num(p, "--iterations", int, 2_500, "iterations", "inner chain length per analysis")
    _num(p, "--burn-in", int, 500, "iterations", "inner chain burn-in")
    if design:
        p.add_argument(
            "--design-prior",
            nargs="+",
            metavar="KEY=VALUE",
            help="design prior (same keys as --analysis-prior); ignored with --history",
        )
        p.add_argument("--history", help="historical lifetime CSV (location,stress,time,censored)")
        p.add_argument(
            "--history-prior",
            nargs="+",
            metavar="KEY=VALUE",
            help="prior updated by --history [default: the design prior]",
        )
        _num(p, "--history-iterations", int, 20_000, "iterations", "design-posterior chain length")
        _num(p, "--history-burn-in", int, 5_000, "iterations", "design-posterior burn-in")
        _num(p, "--censor-time", float, None, "hours", "censor every test item at this time")
        _num(p, "--reps", int, 20, "count", "simulated tests per grid cell")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog=PROG, description="Bayesian assurance for reliability demonstration tests.")
    _global_flags(top, suppress=False)
    modes = top.add_subparsers(dest="mode", metavar="MODE", parser_class=_Parser)
    modes.required = True

    def leaf(sub, name, help_):
        p = sub.add_parser(name, help=help_, description=help_)
        _global_flags(p, suppress=True)
        return p

    # binomial
    b = modes.add_parser("binomial", help="failure-on-demand tests").add_subparsers(
        dest="command", metavar="COMMAND", parser_class=_Parser
    )
    b.required = True
    p = leaf(b, "cutoff", "largest allowed failure count c for each n")
    p.add_argument("--n", type=int, nargs="+", required=True, metavar="N", help="items on test [count; required]")
    _rule_flags(p)
    p = leaf(b, "assurance", "probability that a test of n items passes")
    p.add_argument("--n", type=int, nargs="+", required=True, metavar="N", help="items on test [count; required]")
    _rule_flags(p)
    _design_flags(p)
    p = leaf(b, "find-n", "smallest n reaching a target assurance")
    _rule_flags(p)
    _design_flags(p)
    _num(p, "--gamma", float, 0.5, "probability", "target assurance")
    _num(p, "--n-max", int, 1000, "count", "largest n searched")
    p = leaf(b, "mixture-scenarios", "assurance averaged over possible consumer priors")
    _num(p, "--n", int, None, "count", "items on test", required=True)
    p.add_argument(
        "--scenarios",
        nargs="+",
        default=["0.6:beta:106,2", "0.4:beta:38,2"],
        metavar="SPEC",
        help="weighted consumer priors w:beta:a,b ... [default: 0.6:beta:106,2 0.4:beta:38,2]",
    )
    _num(p, "--pi-t", float, 0.96, "probability", "target reliability pi_T")
    _num(p, "--delta", float, 0.05, "probability", "each consumer passes when Pr(pi <= pi_T | y) <= delta")
    p.add_argument(
        "--weight-count", choices=("survivals", "failures"), default="survivals", help=argparse.SUPPRESS
    )
    _design_flags(p)

    # risk
    r = modes.add_parser("risk", help="producer's and consumer's risks").add_subparsers(
        dest="command", metavar="COMMAND", parser_class=_Parser
    )
    r.required = True
    for name, help_ in (
        ("classical", "risks at the acceptable and rejectable reliabilities"),
        ("average", "risks averaged over pi >= pi_0 and pi <= pi_1"),
        ("posterior", "Pr(pi >= pi_0 | fail) and Pr(pi <= pi_1 | pass)"),
        ("find-plan", "smallest plan whose posterior risks meet the bounds"),
    ):
        p = leaf(r, name, help_)
        if name != "find-plan":
            _num(p, "--n", int, None, "count", "items on test", required=True)
            _num(p, "--c", int, None, "count", "largest allowed number of failures (-1: never pass)", required=True)
        _num(p, "--pi0", float, 0.98, "probability", "acceptable reliability pi_0")
        _num(p, "--pi1", float, 0.9, "probability", "rejectable reliability pi_1")
        _num(p, "--alpha-max", float, 0.05, "probability", "largest acceptable producer's risk")
        _num(p, "--beta-max", float, 0.05, "probability", "largest acceptable consumer's risk")
        if name != "classical":
            _design_flags(p)
        if name == "find-plan":
            _num(p, "--n-max", int, 300, "count", "largest n searched")

    # weibull
    w = modes.add_parser("weibull", help="time-to-failure tests").add_subparsers(
        dest="command", metavar="COMMAND", parser_class=_Parser
    )
    w.required = True
    p = leaf(w, "analyze", "posterior probability that the reliable-life target is met")
    p.add_argument("--data", required=True, help="test lifetime CSV (location,stress,time,censored) [required]")
    _weibull_common(p, design=False)
    for name, help_ in (
        ("assurance", "assurance curve over a grid of sample sizes"),
        ("find-n", "smallest n whose fitted assurance reaches gamma"),
    ):
        p = leaf(w, name, help_)
        _weibull_common(p)
        p.add_argument(
            "--stresses",
            type=float,
            nargs="+",
            required=True,
            metavar="S",
            help="test stresses, cycled over the items [stress units; required]",
        )
        _num(p, "--n-max", int, 60, "count", "largest sample size on the grid")
        _num(p, "--grid-points", int, 60, "count", "number of grid sizes")
        if name == "find-n":
            _num(p, "--gamma", float, 0.8, "probability", "target assurance")
    p = leaf(w, "surface", "assurance over (n_a, n_b) items at two stresses")
    _weibull_common(p)
    _num(p, "--stress-a", float, None, "stress units", "stress of group a", required=True)
    _num(p, "--stress-b", float, None, "stress units", "stress of group b", required=True)
    _num(p, "--na-max", int, 20, "count", "largest n_a")
    _num(p, "--nb-max", int, 20, "count", "largest n_b")
    _num(p, "--gamma", float, 0.8, "probability", "threshold for the ranked design list")
    p.add_argument("--ranked", action="store_true", help="print the ranked designs instead of the surface")

    # elicit
    e = modes.add_parser("elicit", help="prior hyper-parameters from expert judgements").add_subparsers(
        dest="command", metavar="COMMAND", parser_class=_Parser
    )
    e.required = True
    p = leaf(e, "binomial", "design prior (a_p, b_p, a_m, b_m) from means and quartiles")
    _num(p, "--mean-p", float, None, "probability", "judged mean of p", required=True)
    p.add_argument(
        "--p-quartiles", type=float, nargs=2, required=True, metavar="Q", help="quartiles of p [probability; required]"
    )
    _num(p, "--mean-m", float, None, "prior items", "judged mean of m", required=True)
    p.add_argument(
        "--m-quartiles", type=float, nargs=2, required=True, metavar="Q", help="quartiles of m [prior items; required]"
    )
    p = leaf(e, "weibull", "Weibull prior from a judgement file")
    p.add_argument(
        "--input",
        required=True,
        help="INI file with [shape], [location] and [stress S] sections (see README) [required]",
    )
    p = leaf(e, "sceptical", "beta(a, b) with Pr(pi > pi_T) = delta")
    _num(p, "--pi-t", float, 0.96, "probability", "target reliability pi_T")
    _num(p, "--delta", float, 0.05, "probability", "prior probability that the target is already met")
    _num(p, "--b", float, 2.0, "shape", "fixed second beta parameter")
    return top


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


class _Out:
    def __init__(self, args):
        self.precision = args.precision

    def table(self, header, rows):
        io.write_tsv(sys.stdout, header, rows, self.precision)

    @staticmethod
    def note(text):
        print(text, file=sys.stderr)


def _check_positive_n(ns):
    for n in ns:
        if n < 1:
            raise IncoherenceError(f"a test needs at least one item, got n={n}")


def _rule(args):
    if args.rule == "exact":
        return bn.ExactTest(args.pi_t, args.alpha)
    if args.rule == "normal":
        return bn.NormalApprox(args.pi_t, args.alpha, args.normal_statistic)
    return bn.BayesThreshold(io.parse_analysis_prior(args.analysis_prior), args.pi_t, args.delta, args.weight_count)


def _pi_draws(args, stream: RandomStream, out: _Out) -> np.ndarray:
    design = io.parse_binomial_design(args.design)
    if args.data:
        if not isinstance(design, bn.DesignPrior):
            raise IncoherenceError("--data needs a hierarchical design prior p:beta m:gamma")
        data = bn.HistoricalData.from_csv(args.data)
        settings = bn.MCMCSettings(iterations=args.mcmc_iterations, burn_in=args.mcmc_burn_in)
        post = bn.design_posterior_draws(design, data, settings, stream.child(1))
        out.note(f"design posterior: {post.pi.size} draws, acceptance {post.acceptance_rate:.3f}")
        return post.pi
    n_draws = getattr(args, "draws", 100_000)
    if n_draws < 1:
        raise IncoherenceError("--draws must be at least 1")
    if isinstance(design, bn.BetaPrior):
        return stats.sample_beta(stream.child(0), design.a, design.b, n_draws)
    return design.sample_pi(stream.child(0), n_draws)


def _levels(args):
    return risk.RiskLevels(args.pi0, args.pi1, args.alpha_max, args.beta_max)


def _weibull_setup(args, need_design: bool):
    offset = args.stress_offset
    t = io.parse_target(args.target)
    target = wb.ReliableLifeTarget(t.q, t.tau_star, t.s_star - offset, t.delta)
    analysis = io.parse_weibull_prior(args.analysis_prior)
    if args.sceptical_prob is not None:
        analysis = wb.calibrate_sceptical_prior(analysis, target, args.sceptical_prob, args.k, seed=args.seed)
    mcmc = wb.WeibullMCMCSettings(iterations=args.iterations, burn_in=args.burn_in)
    sampler = None
    if need_design:
        if args.history:
            base = args.history_prior or args.design_prior
            if not base:
                raise IncoherenceError("--history needs --history-prior or --design-prior")
            hist = wb.LifetimeData.from_csv(args.history, stress_offset=offset)
            settings = wb.WeibullMCMCSettings(iterations=args.history_iterations, burn_in=args.history_burn_in)
            sampler = wb.design_posterior(
                hist, io.parse_weibull_prior(base), settings, RandomStream(args.seed).child(1), args.k
            )
        elif args.design_prior:
            sampler = wb.PriorSampler(io.parse_weibull_prior(args.design_prior))
        else:
            raise IncoherenceError("give --design-prior or --history")
    return target, analysis, mcmc, sampler


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_binomial(args, out: _Out) -> int:
    stream = RandomStream(args.seed)
    if args.command == "cutoff":
        _check_positive_n(args.n)
        rule = _rule(args)
        out.table(["n", "c"], [(n, rule.cutoff(n)) for n in args.n])
        return EXIT_OK
    if args.command == "assurance":
        _check_positive_n(args.n)
        rule = _rule(args)
        pi = _pi_draws(args, stream, out)
        rows = [(n, c, e.value, e.mc_std_error) for n, c, e in bn.assurance_curve(rule, args.n, pi)]
        out.table(["n", "c", "assurance", "se"], rows)
        return EXIT_OK
    if args.command == "find-n":
        if args.n_max < 1:
            raise IncoherenceError("--n-max must be at least 1")
        rule = _rule(args)
        pi = _pi_draws(args, stream, out)
        res = bn.find_min_n(rule, pi, args.gamma, args.n_max)
        if not res.reached:
            out.note(
                f"assurance {args.gamma} not reached for n <= {args.n_max}; "
                f"best {res.best.value:.4f} at n={res.best_n} (c={res.best_c})"
            )
            out.table(["n", "c", "assurance", "se"], [(res.best_n, res.best_c, res.best.value, res.best.mc_std_error)])
            raise Unreachable
        out.table(["n", "c", "assurance", "se"], [(res.n, res.c, res.estimate.value, res.estimate.mc_std_error)])
        out.note(f"smallest n with assurance >= {args.gamma}: n={res.n}, c={res.c}")
        return EXIT_OK
    # mixture-scenarios
    _check_positive_n([args.n])
    prior = io.parse_analysis_prior(args.scenarios)
    mix = prior.as_mixture() if isinstance(prior, bn.BetaPrior) else prior
    scen = list(zip(mix.weights, mix.components))
    pi = _pi_draws(args, stream, out)
    res = bn.assurance_cutoff_distribution(args.n, scen, args.pi_t, args.delta, pi, args.weight_count)
    rows = []
    for i, ((q, comp), c) in enumerate(zip(scen, res.cutoffs), start=1):
        rows.append((str(i), q, comp.a, comp.b, c, bn.assurance_from_cutoff(args.n, c, pi).value))
    rows.append(("all", 1.0, None, None, None, res.estimate.value))
    out.table(["scenario", "weight", "a", "b", "c", "assurance"], rows)
    out.note(f"assurance {res.estimate.value:.6g} (se {res.estimate.mc_std_error:.2g})")
    return EXIT_OK


def cmd_risk(args, out: _Out) -> int:
    levels = _levels(args)
    if args.command == "find-plan":
        pi = _pi_draws(args, RandomStream(args.seed), out)
        res = risk.find_min_plan(levels, pi, n_max=args.n_max)
        if not res.feasible:
            out.note(f"no plan with n <= {args.n_max} meets both bounds")
            if res.best_plan is not None:
                out.note(
                    f"closest: n={res.best_plan.n}, c={res.best_plan.c}, "
                    f"producer {res.best_risks.producer:.4f}, consumer {res.best_risks.consumer:.4f}"
                )
            raise Unreachable
        out.table(
            ["n", "c", "producer", "consumer"],
            [(res.plan.n, res.plan.c, res.risks.producer, res.risks.consumer)],
        )
        return EXIT_OK
    if args.n < 1:
        raise IncoherenceError(f"a test needs at least one item, got n={args.n}")
    plan = bn.TestPlan(args.n, args.c)
    if args.command == "classical":
        rk = risk.classical_risks(plan, levels)
    else:
        pi = _pi_draws(args, RandomStream(args.seed), out)
        if args.command == "average":
            rk = risk.average_risks_from_draws(plan, levels, pi)
        else:
            rk = risk.posterior_risks(plan, levels, pi)
    out.table(
        ["n", "c", "producer", "consumer", "producer_se", "consumer_se"],
        [(plan.n, plan.c, rk.producer, rk.consumer, rk.producer_se, rk.consumer_se)],
    )
    ok = rk.producer <= levels.alpha_max and rk.consumer <= levels.beta_max
    out.note(f"{args.command} risks {'within' if ok else 'outside'} the bounds")
    return EXIT_OK


def cmd_weibull(args, out: _Out) -> int:
    stream = RandomStream(args.seed)
    if args.command == "analyze":
        target, analysis, mcmc, _ = _weibull_setup(args, need_design=False)
        data = wb.LifetimeData.from_csv(args.data, stress_offset=args.stress_offset)
        cfg = wb.TestConfig(tuple(data.stress) or (0.0,), analysis, None, mcmc, args.k)
        res = wb.pass_test(data, cfg, target, stream.child(2))
        out.table(["r_q", "threshold", "pass"], [(res.r_q, 1.0 - target.delta, int(res.passed))])
        out.note(f"{'PASS' if res.passed else 'FAIL'}: r_q = {res.r_q:.4f} vs {1 - target.delta:.4f}")
        return EXIT_OK
    if args.reps < 1:
        raise IncoherenceError("--reps must be at least 1")
    target, analysis, mcmc, sampler = _weibull_setup(args, need_design=True)
    off = args.stress_offset
    if args.command == "surface":
        if args.na_max < 1 or args.nb_max < 1:
            raise IncoherenceError("--na-max and --nb-max must be at least 1")
        cfg = wb.TestConfig((args.stress_a - off,), analysis, args.censor_time, mcmc, args.k)
        surf = wb.assurance_surface(
            cfg,
            target,
            sampler,
            args.stress_a - off,
            args.stress_b - off,
            range(1, args.na_max + 1),
            range(1, args.nb_max + 1),
            args.reps,
            args.gamma,
            stream.child(3),
            args.workers,
        )
        if args.ranked:
            out.table(
                ["n_a", "n_b", "total", "assurance"],
                [(d.n_a, d.n_b, d.total, d.assurance) for d in surf.ranked],
            )
        else:
            out.table(["n_a", "n_b", "raw", "fitted"], surf.rows())
        if surf.ranked:
            best = surf.ranked[0]
            out.note(f"smallest design >= {args.gamma}: ({best.n_a}, {best.n_b}), assurance {best.assurance:.3f}")
            return EXIT_OK
        out.note(f"no design on the grid reaches {args.gamma}")
        if args.ranked:
            raise Unreachable
        return EXIT_OK
    if args.n_max < 1 or args.grid_points < 1:
        raise IncoherenceError("--n-max and --grid-points must be at least 1")
    cfg = wb.TestConfig(tuple(s - off for s in args.stresses), analysis, args.censor_time, mcmc, args.k)
    grid = wb.make_grid(args.n_max, args.grid_points)
    curve = wb.assurance_curve(cfg, target, sampler, grid, args.reps, stream.child(3), args.workers)
    if args.command == "assurance":
        out.table(["n", "raw", "fitted"], curve.rows())
        return EXIT_OK
    res = wb.find_min_n_weibull(curve, args.gamma)
    if not res.reached:
        out.note(f"assurance {args.gamma} not reached for n <= {args.n_max}; max fitted {res.max_fitted:.3f}")
        out.table(["n", "assurance"], [(None, res.max_fitted)])
        raise Unreachable
    out.table(["n", "assurance"], [(res.n, res.assurance)])
    out.note(f"smallest n with fitted assurance >= {args.gamma}: {res.n}")
    return EXIT_OK


def _read_weibull_judgements(path):
    cp = configparser.ConfigParser()
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise IncoherenceError(f"cannot read {path}: {exc}") from exc
    except configparser.Error as exc:
        raise IncoherenceError(f"{path}: {exc}") from exc

    def trio(sec):
        try:
            return el.QuartileJudgement(sec.getfloat("lower"), sec.getfloat("median"), sec.getfloat("upper"))
        except (TypeError, ValueError) as exc:
            raise IncoherenceError(f"[{sec.name}] needs numeric lower, median and upper") from exc

    if "shape" not in cp or "location" not in cp:
        raise IncoherenceError(f"{path}: need [shape] and [location] sections")
    stresses = {}
    for name in cp.sections():
        if name.startswith("stress "):
            try:
                s = float(name.split(None, 1)[1])
            except ValueError as exc:
                raise IncoherenceError(f"bad section name [{name}]") from exc
            stresses[s] = trio(cp[name])
    return trio(cp["shape"]), cp["location"], stresses


def cmd_elicit(args, out: _Out) -> int:
    if args.command == "sceptical":
        pr = el.sceptical_beta(args.pi_t, args.delta, args.b)
        out.table(["name", "value"], [("a", pr.a), ("b", pr.b)])
        return EXIT_OK
    if args.command == "binomial":
        fit = el.binomial_design_hypers(args.mean_p, tuple(args.p_quartiles), args.mean_m, tuple(args.m_quartiles))
        d = fit.prior
        out.table(["name", "value"], [("a_p", d.a_p), ("b_p", d.b_p), ("a_m", d.a_m), ("b_m", d.b_m)])
        for msg in fit.diagnostics:
            out.note(msg)
        return EXIT_OK
    shape_j, loc, stresses = _read_weibull_judgements(args.input)
    gfit = el.beta_shape_prior_from_ratio(shape_j)
    rows = [("a_beta", gfit.shape), ("b_beta", gfit.rate)]
    notes = list(gfit.diagnostics)
    if "upper_quartile" in loc:
        vfit = el.v_eps_from_ratio(loc.getfloat("upper_quartile"), loc.getfloat("median", 1.0))
        v_eps = vfit.v_eps
        rows.append(("v_eps", v_eps))
        notes += vfit.diagnostics
    elif "q1_value" in loc and "q2_value" in loc:
        tfit = el.t_hypers_from_quantiles(
            loc.getfloat("q1_prob", 0.6), loc.getfloat("q1_value"), loc.getfloat("q2_prob", 0.8), loc.getfloat("q2_value")
        )
        rows += [("a_eps", tfit.a_eps), ("b_eps", tfit.b_eps)]
        notes += tfit.diagnostics
        # prior mean of v_eps feeds the regression variance equations
        v_eps = tfit.b_eps / (tfit.a_eps - 1.0) if tfit.a_eps > 1 else tfit.b_eps / tfit.a_eps
    else:
        raise IncoherenceError("[location] needs upper_quartile, or q1_value and q2_value")
    if stresses:
        rfit = el.regression_hypers(stresses, v_eps)
        rows += [("mu0", rfit.mu0), ("mu1", rfit.mu1), ("s00", rfit.s00), ("s11", rfit.s11), ("s01", rfit.s01)]
        notes += rfit.diagnostics
    out.table(["name", "value"], rows)
    for msg in notes:
        out.note(msg)
    return EXIT_OK


_COMMANDS = {"binomial": cmd_binomial, "risk": cmd_risk, "weibull": cmd_weibull, "elicit": cmd_elicit}


def _expand_config(argv: list[str]) -> list[str]:
    """Insert the tokens of ``--config FILE`` after the subcommand words."""
    path = None
    rest = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok == "--config":
            if i + 1 >= len(argv):
                raise IncoherenceError("--config needs a file name")
            path = argv[i + 1]
            i += 2
            continue
        if tok.startswith("--config="):
            path = tok.split("=", 1)[1]
            i += 1
            continue
        rest.append(tok)
        i += 1
    if path is None:
        return rest
    extra = io.read_flag_file(path)
    # mode and command are the first two bare words
    words = [j for j, t in enumerate(rest) if not t.startswith("-")][:2]
    cut = words[-1] + 1 if len(words) == 2 else len(rest)
    return rest[:cut] + extra + rest[cut:]


def run(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _expand_config(argv)
        args = build_parser().parse_args(argv)
        if args.precision < 1:
            raise IncoherenceError("--precision must be at least 1")
        if args.workers < 1:
            raise IncoherenceError("--workers must be at least 1")
        if not 0 <= args.seed < 2**64:
            raise IncoherenceError("--seed must be a 64-bit unsigned integer")
        return _COMMANDS[args.mode](args, _Out(args))
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except Unreachable:
        return EXIT_INFEASIBLE
    except InfeasibleError as exc:
        print(f"{PROG}: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (DomainError, IncoherenceError, IdentifiabilityError) as exc:
        print(f"{PROG}: {exc}", file=sys.stderr)
        return EXIT_INCOHERENT
    except (RDTError, FileNotFoundError) as exc:
        code = EXIT_INCOHERENT if isinstance(exc, FileNotFoundError) else EXIT_INTERNAL
        print(f"{PROG}: {exc}", file=sys.stderr)
        return code
    except Exception as exc:  # pragma: no cover - last resort
        print(f"{PROG}: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
