"""Experiment harness: every module behind one reproducible command line.

Exit codes: 0 all pass, 1 any failure, 2 inconclusive results only,
3 usage/config error. Outputs land in --out, DECAYLAB_OUT, or the cwd.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import acceptance, construct, curves, experiments, flows, io
from . import majorize, sqrtcompare, verify

SCHEMA_VERSION = 1

USAGE_ERROR = 3


class ConfigError(ValueError):
    pass


def _load_config(path: str | None, command: str) -> dict:
    if not path:
        return {}
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"config {path}: {e}")
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path}: top level must be an object")
    ver = doc.get("schema_version")
    if ver != SCHEMA_VERSION:
        raise ConfigError(f"config {path}: field 'schema_version' must be "
                          f"{SCHEMA_VERSION}, got {ver!r}")
    cmd = doc.get("command")
    if cmd is not None and cmd != command:
        raise ConfigError(f"config {path}: field 'command' is {cmd!r} but the "
                          f"invoked subcommand is {command!r}")
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError(f"config {path}: field 'params' must be an object")
    return params


def _apply_config(args, params: dict, allowed: set[str]) -> None:
    for key, val in params.items():
        if key not in allowed:
            raise ConfigError(f"config field 'params.{key}' is not a "
                              f"parameter of this subcommand "
                              f"(allowed: {sorted(allowed)})")
        setattr(args, key, val)


def _parse_curve_spec(spec: str) -> curves.DecayCurve:
    """Family spec like 'exponential' or 'power_log:alpha=1.5'."""
    if ":" in spec:
        family, rest = spec.split(":", 1)
        params = {}
        for item in rest.split(","):
            k, v = item.split("=", 1)
            params[k.strip()] = float(v)
    else:
        family, params = spec, {}
    return curves.make_named_curve(family.strip(), **params)


def _common(sub):
    sub.add_argument("--config", help="JSON config file")
    sub.add_argument("--out", help="output directory (default: DECAYLAB_OUT "
                                   "or the cwd)")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--threads", type=int, default=0,
                     help="numba thread cap; results never depend on it")
    sub.add_argument("--tolerance-profile", choices=("default", "strict"),
                     default="default", dest="profile")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="decaylab", description=__doc__)
    sp = p.add_subparsers(dest="command", required=True)

    s = sp.add_parser("construct", help="realize a decay curve as a convex "
                                        "objective (knot table + CSV)")
    _common(s)
    s.add_argument("--curve", default="exponential",
                   help="family spec, e.g. power_log:alpha=1.5")
    s.add_argument("--t-end", type=float, default=60.0)
    s.add_argument("--no-minimizer", action="store_true",
                   help="build the no-minimizer variant instead")
    s.add_argument("--variant", choices=("gradient_flow", "heavy_ball"),
                   default="gradient_flow")

    s = sp.add_parser("flow", help="integrate the gradient flow of a "
                                   "constructed objective")
    _common(s)
    s.add_argument("--curve", default="exponential")
    s.add_argument("--t-end", type=float, default=20.0)
    s.add_argument("--rtol", type=float, default=1e-9)

    s = sp.add_parser("gd", help="gradient descent on the quadratic testbed")
    _common(s)
    s.add_argument("--mu", type=float, default=1.0)
    s.add_argument("--eta", type=float, default=0.5)
    s.add_argument("--x0", type=float, default=1.0)
    s.add_argument("--n", type=int, default=60)

    s = sp.add_parser("sgd", help="multiplicative-noise SGD replicas")
    _common(s)
    s.add_argument("--mu", type=float, default=1.0)
    s.add_argument("--eta", type=float, default=0.5)
    s.add_argument("--sigma", type=float, default=1.0)
    s.add_argument("--x0", type=float, default=1.0)
    s.add_argument("--n", type=int, default=100)
    s.add_argument("--replicas", type=int, default=1000)
    s.add_argument("--noise-model", choices=("rademacher", "gaussian"),
                   default="rademacher")

    s = sp.add_parser("heavyball", help="heavy-ball ODE and momentum scheme")
    _common(s)
    s.add_argument("--mu", type=float, default=1.0)
    s.add_argument("--alpha", type=float, default=5.0)
    s.add_argument("--x0", type=float, default=1.0)
    s.add_argument("--t-end", type=float, default=1000.0)
    s.add_argument("--h", type=float, default=0.003)

    s = sp.add_parser("oscillator", help="constant-friction oscillator: "
                                         "closed form vs integrator")
    _common(s)
    s.add_argument("--mu", type=float, default=1.0)
    s.add_argument("--beta", type=float, default=2.0)
    s.add_argument("--x0", type=float, default=1.0)
    s.add_argument("--t-end", type=float, default=10.0)

    s = sp.add_parser("hilbert", help="slow-decay counterexample sweep")
    _common(s)
    s.add_argument("--p", type=float, default=1.5,
                   help="target decay exponent g = t^-p")
    s.add_argument("--s-max", type=float, default=1e4)
    s.add_argument("--t-max", type=float, default=100.0)

    s = sp.add_parser("majorize", help="exact averaging-map certificate")
    _common(s)
    s.add_argument("--a", default="3,1,0", help="comma-separated decreasing "
                                                "non-negative rationals")
    s.add_argument("--b", default="2,2,0")

    s = sp.add_parser("sqrtcmp", help="sqrt-derivative integral comparison")
    _common(s)
    s.add_argument("--lower", default="exponential",
                   help="family spec of the dominated curve g")
    s.add_argument("--upper", default="exponential",
                   help="family spec of the dominating curve G")
    s.add_argument("--T", type=float, default=5.0)
    s.add_argument("--N", type=int, default=100)

    s = sp.add_parser("reproduce-fig1", help="the four-panel oscillator "
                                             "figure dataset")
    _common(s)
    s.add_argument("--h", type=float, default=experiments.FIG1_H)
    s.add_argument("--mus", default=",".join(str(m) for m in
                                             experiments.FIG1_MUS),
                   help="comma-separated list; empty runs nothing")
    s.add_argument("--alphas", default=",".join(str(a) for a in
                                                experiments.FIG1_ALPHAS))
    s.add_argument("--max-rows", type=int, default=4000)

    s = sp.add_parser("verify-all", help="run the acceptance suite")
    _common(s)
    s.add_argument("--only", default=None,
                   help="comma-separated criterion names; empty string "
                        "runs nothing")
    return p


ALLOWED_CONFIG_KEYS = {
    "construct": {"curve", "t_end", "no_minimizer", "variant"},
    "flow": {"curve", "t_end", "rtol"},
    "gd": {"mu", "eta", "x0", "n"},
    "sgd": {"mu", "eta", "sigma", "x0", "n", "replicas", "noise_model"},
    "heavyball": {"mu", "alpha", "x0", "t_end", "h"},
    "oscillator": {"mu", "beta", "x0", "t_end"},
    "hilbert": {"p", "s_max", "t_max"},
    "majorize": {"a", "b"},
    "sqrtcmp": {"lower", "upper", "T", "N"},
    "reproduce-fig1": {"h", "mus", "alphas", "max_rows"},
    "verify-all": {"only"},
}


def _cmd_construct(args, out):
    curve = _parse_curve_spec(args.curve)
    if args.no_minimizer:
        obj = construct.build_no_minimizer_objective(curve, t_end=args.t_end,
                                                     variant=args.variant)
    else:
        obj = construct.build_objective(curve, t_end=args.t_end)
    io.write_knot_table_csv(obj, os.path.join(out, "objective_knots.csv"))
    io.write_objective_json(obj, os.path.join(out, "objective.json"))
    io.write_json(curve.to_document(), os.path.join(out, "curve.json"))
    print(f"objective with {len(obj.xs)} knots, X = {obj.X:.6g} -> {out}")
    return 0


def _cmd_flow(args, out):
    curve = _parse_curve_spec(args.curve)
    obj = construct.build_objective(curve, t_end=3.0 * args.t_end)
    traj = flows.integrate_gradient_flow(obj, obj.X, t_end=args.t_end,
                                         rtol=args.rtol)
    io.write_trajectory_csv(traj, os.path.join(out, "flow.csv"))
    io.write_trajectory_meta(traj, os.path.join(out, "flow_meta.json"))
    reports = [verify.lyapunov_gf(traj, 0.0),
               verify.excess_integral(traj, weight="one", xstar=0.0),
               verify.self_contracting_check(traj)]
    io.write_report_summary(reports, os.path.join(out, "flow_reports.json"))
    bad = [r for r in reports if not r.passed]
    print(f"flow: {len(traj)} samples, reports "
          f"{'all pass' if not bad else 'FAIL: ' + bad[0].name} -> {out}")
    return 0 if not bad else 1


def _cmd_gd(args, out):
    obj = flows.Quadratic(args.mu)
    traj = flows.run_gd(obj, args.x0, eta=args.eta, n_iter=args.n,
                        lipschitz=args.mu)
    io.write_trajectory_csv(traj, os.path.join(out, "gd.csv"))
    rep = verify.gd_sum_bound(traj, xstar=0.0)
    io.write_report_csv(rep, os.path.join(out, "gd_bound.csv"))
    io.write_report_summary([rep], os.path.join(out, "gd_reports.json"))
    print(f"gd: sum bound {rep.verdict} (sum {rep.details['sum']:.6g} <= "
          f"{rep.details['bound']:.6g}) -> {out}")
    return 0 if rep.passed else 1


def _cmd_sgd(args, out):
    obj = flows.Quadratic(args.mu)
    reps = flows.run_sgd(obj, args.x0, eta=args.eta, sigma=args.sigma,
                         n_iter=args.n, seed=args.seed,
                         noise_model=args.noise_model,
                         replicas=args.replicas, lipschitz=args.mu)
    rep = verify.sgd_bounds(reps, xstar=0.0)
    io.write_trajectory_csv(reps[0], os.path.join(out, "sgd_replica0.csv"))
    mean_f = np.mean(np.stack([r.f for r in reps]), axis=0)
    mean_traj = flows.Trajectory(t=reps[0].t, x=np.zeros_like(mean_f),
                                 f=mean_f, gnorm=np.zeros_like(mean_f),
                                 meta={"dynamics": "sgd_mean",
                                       **reps[0].meta})
    io.write_trajectory_csv(mean_traj, os.path.join(out, "sgd_mean.csv"))
    io.write_report_summary([rep], os.path.join(out, "sgd_reports.json"))
    print(f"sgd: {rep.verdict} (mean sum {rep.details['mean_sum']:.6g} <= "
          f"{rep.details['bound']:.6g}) -> {out}")
    return 0 if rep.passed else 1


def _cmd_heavyball(args, out):
    obj = flows.Quadratic(args.mu)
    traj = flows.integrate_heavy_ball_ode(obj, args.x0, args.alpha,
                                          t_end=args.t_end)
    io.write_trajectory_csv(traj, os.path.join(out, "heavyball_ode.csv"))
    n = int(math.ceil(min(args.t_end, 50.0) / math.sqrt(args.h)))
    sch = flows.run_heavy_ball_scheme(obj, args.x0, args.alpha, args.h, n)
    io.write_trajectory_csv(sch, os.path.join(out, "heavyball_scheme.csv"))
    reports = [verify.hb_lyapunov(traj, 0.0)]
    if args.alpha > 3:
        reports.append(verify.excess_integral(traj, weight="t", xstar=0.0))
    io.write_report_summary(reports, os.path.join(out,
                                                  "heavyball_reports.json"))
    bad = [r for r in reports if not r.passed]
    print(f"heavyball: {'all pass' if not bad else 'FAIL: ' + bad[0].name}"
          f" -> {out}")
    return 0 if not bad else 1


def _cmd_oscillator(args, out):
    spec = flows.OscillatorSpec(mu=args.mu, alpha=3.0, x0=args.x0)
    ts = np.linspace(0.0, args.t_end, 401)
    x, v = flows.classical_oscillator_solution(args.beta, args.mu, args.x0, ts)
    import csv as _csv

    with open(os.path.join(out, "oscillator_closed_form.csv"), "w",
              newline="") as fh:
        w = _csv.writer(fh)
        w.writerow(["t", "x", "v"])
        for row in zip(ts, x, v):
            w.writerow([io.fmt(val) for val in row])
    print(f"oscillator: t_transition(alpha=3) = {spec.t_transition:.6g}, "
          f"closed form written -> {out}")
    return 0


def _cmd_hilbert(args, out):
    curve = curves.make_named_curve("power", p=args.p)
    profile, rows = experiments.hilbert_experiment(curve, s_max=args.s_max,
                                                   t_max=args.t_max)
    experiments.write_hilbert_csv(rows, os.path.join(out, "hilbert.csv"))
    ok = all(fnum >= lower for _, fnum, lower, _, _ in rows)
    print(f"hilbert: bias {profile.bias:.3g}, dominance "
          f"{'holds' if ok else 'FAILS'} -> {out}")
    return 0 if ok else 1


def _cmd_majorize(args, out):
    a = [x for x in args.a.split(",") if x]
    b = [x for x in args.b.split(",") if x]
    from fractions import Fraction

    pair = majorize.SequencePair.make([Fraction(x) for x in a],
                                      [Fraction(x) for x in b])
    amap = majorize.build_averaging_map(pair)
    chain = majorize.jensen_sqrt_certificate(pair, amap)
    path = os.path.join(out, "averaging_map.txt")
    with open(path, "w") as fh:
        fh.write(amap.to_text() + "\n")
        fh.write(f"sqrt chain: {chain[0]:.12g} >= {chain[1]:.12g} >= "
                 f"{chain[2]:.12g}\n")
    print(f"majorize: {len(amap)} permutations, chain ok -> {path}")
    return 0


def _cmd_sqrtcmp(args, out):
    g = _parse_curve_spec(args.lower)
    G = _parse_curve_spec(args.upper)
    cmp = sqrtcompare.compare_sqrt_integrals(g, G, args.T, args.N)
    import csv as _csv

    with open(os.path.join(out, "sqrtcmp.csv"), "w", newline="") as fh:
        w = _csv.writer(fh)
        w.writerow(["i", "a_i", "b_i", "sqrt_a_i", "sqrt_b_i"])
        for i, (ai, bi) in enumerate(zip(cmp.a, cmp.b), start=1):
            w.writerow([i, io.fmt(ai), io.fmt(bi), io.fmt(math.sqrt(ai)),
                        io.fmt(math.sqrt(bi))])
    io.write_json({"T": cmp.T, "N": cmp.N, "split_m": cmp.split_m,
                   "sqrt_sum_a": cmp.sqrt_sum_a, "sqrt_sum_b": cmp.sqrt_sum_b,
                   "riemann_a": cmp.riemann_a, "riemann_b": cmp.riemann_b,
                   "error_bound_a": cmp.error_bound_a,
                   "error_bound_b": cmp.error_bound_b,
                   "certified": cmp.certified,
                   "ok": cmp.sqrt_sum_ok},
                  os.path.join(out, "sqrtcmp_summary.json"))
    print(f"sqrtcmp: sum sqrt(b) {'≥' if cmp.sqrt_sum_ok else '<'} "
          f"sum sqrt(a) ({cmp.sqrt_sum_b:.6g} vs {cmp.sqrt_sum_a:.6g}), "
          f"certified={cmp.certified} -> {out}")
    return 0 if cmp.sqrt_sum_ok else 1


def _cmd_fig1(args, out):
    mus = [float(v) for v in args.mus.split(",") if v]
    alphas = [float(v) for v in args.alphas.split(",") if v]
    if not mus or not alphas:
        print("reproduce-fig1: empty experiment list, nothing to do")
        return 0
    runs = experiments.run_fig1_panels(h=args.h, mus=tuple(mus),
                                       alphas=tuple(alphas))
    written = experiments.write_fig1_outputs(runs, out,
                                             max_rows=args.max_rows)
    print(f"reproduce-fig1: wrote {len(written)} files -> {out}")
    return 0


def _cmd_verify_all(args, out):
    names = None
    if args.only is not None:
        names = {n for n in args.only.split(",") if n}
        if not names:
            print("verify-all: empty criterion list, nothing to run")
            return 0
    acceptance.warmup_kernels()
    results = acceptance.run_all(names=names, profile=args.profile)
    rows = []
    width = max((len(r.name) for r in results), default=10)
    for r in results:
        print(f"{r.verdict.upper():12s} {r.name:{width}s} "
              f"{r.runtime_s:8.2f}s")
        rows.append({"name": r.name, "verdict": r.verdict,
                     "runtime_s": r.runtime_s, "details": r.details})
    io.write_json({"schema_version": SCHEMA_VERSION, "results": rows},
                  os.path.join(out, "verify_all.json"))
    if any(not r.passed and not r.inconclusive for r in results):
        return 1
    if any(r.inconclusive for r in results):
        return 2
    return 0


COMMANDS = {
    "construct": _cmd_construct,
    "flow": _cmd_flow,
    "gd": _cmd_gd,
    "sgd": _cmd_sgd,
    "heavyball": _cmd_heavyball,
    "oscillator": _cmd_oscillator,
    "hilbert": _cmd_hilbert,
    "majorize": _cmd_majorize,
    "sqrtcmp": _cmd_sqrtcmp,
    "reproduce-fig1": _cmd_fig1,
    "verify-all": _cmd_verify_all,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors; the documented code is 3
        return USAGE_ERROR if e.code not in (0, None) else 0
    try:
        params = _load_config(args.config, args.command)
        _apply_config(args, params, ALLOWED_CONFIG_KEYS[args.command])
        if args.threads and int(args.threads) > 0:
            try:
                import numba

                numba.set_num_threads(int(args.threads))
            except ImportError:
                pass
        out = io.out_dir(args.out)
        return COMMANDS[args.command](args, out)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE_ERROR
    except (curves.CurveError, construct.ConstructError,
            flows.PreconditionError, majorize.MajorizeError,
            sqrtcompare.CompareError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
