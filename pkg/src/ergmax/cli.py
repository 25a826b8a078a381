"""Command line front end.

One subcommand per pipeline; every run writes a machine-readable artifact
(JSON, or CSV where the data is tabular) to --output, stdout by default.
Artifacts are deterministic: the same arguments and seed produce byte
identical output.

Exit codes: 0 success, 1 computation error (no convergence, unreachable
smoothing target, oversized defect, unpopulated cells), 2 usage or parse
error.  Infinite values (untied runner-up gaps, zero-defect ratios) are
emitted as null in JSON and as 'inf' in CSV.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction

import numpy as np

from .circle import min_pairwise_dist
from .dynamics import (ExpandingMap, PeriodicOrbit, forward_orbit,
                       parse_map_spec)
from .entropy import partition_entropy, periodic_approximation, return_times
from .errors import ErgmaxError, NonExpanding, ParseError, UnsupportedMap
from .lax import (effective_observable, solve_subaction, verify_subaction,
                  write_grid_csv)
from .locking import (compute_constants, far_point_check, locking_perturbation,
                      preimage_separation, verify_locking)
from .maxsearch import maximize_over_orbits, rotation_number, theta_sweep
from .observables import parse_observable
from .shadowing import (mine_recurrences, read_pseudo_orbit_csv, shadow,
                        validate_pseudo_orbit)

DEFAULT_N = 1 << 14
DEFAULT_MAX_PERIOD = 12
DEFAULT_TIE_TOL = 1e-9
DEFAULT_SUB_TOL = 1e-10
DEFAULT_MAX_ITER = 100_000


# ---------------------------------------------------------------------------
# output helpers


def _emit_text(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _emit_json(path, payload: dict) -> None:
    _emit_text(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _finite_or_none(v):
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else None


def _orbit_payload(orbit: PeriodicOrbit) -> dict:
    out = {"period": orbit.period,
           "points": [float(v) for v in orbit.float_points()]}
    if all(isinstance(p, Fraction) for p in orbit.points):
        out["points_exact"] = [str(p) for p in orbit.points]
    return out


def _parse_points(text: str, exact: bool) -> list:
    vals = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        frac = Fraction(item)
        vals.append(frac if exact else float(frac))
    if not vals:
        raise ValueError("no points given")
    return vals


def _parse_range(text: str) -> list:
    # "start:stop:count", endpoints included
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"range must be start:stop:count, got {text!r}")
    start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    if count < 1:
        raise ValueError("range count must be >= 1")
    return [float(v) for v in np.linspace(start, stop, count)]


def _target_orbit(m: ExpandingMap, text: str) -> PeriodicOrbit:
    pts = _parse_points(text, exact=m.kind == "linear")
    return PeriodicOrbit.from_cycle(m, pts)


def _solve_effective(m, obs, args):
    sub = solve_subaction(m, obs, args.n, args.tol, args.max_iter)
    return sub, effective_observable(m, obs, sub)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_maximize(args) -> int:
    m = parse_map_spec(args.map)
    obs = parse_observable(args.obs)
    res = maximize_over_orbits(m, obs, args.max_period, args.tie_tol)
    try:
        rot = str(rotation_number(res.argmax[0]))
    except UnsupportedMap:
        rot = None
    _emit_json(args.output, {
        "command": "maximize", "map": m.spec(), "obs": obs.text,
        "max_period": args.max_period, "tie_tol": args.tie_tol,
        "alpha": res.alpha, "best_average": res.best_average,
        "runner_up_gap": _finite_or_none(res.runner_up_gap),
        "searched": res.searched, "rotation": rot,
        "argmax": [_orbit_payload(o) for o in res.argmax]})
    return 0


def _cmd_subaction(args) -> int:
    m = parse_map_spec(args.map)
    obs = parse_observable(args.obs)
    sub = solve_subaction(m, obs, args.n, args.tol, args.max_iter)
    if args.grid_csv:
        write_grid_csv(args.grid_csv, sub.u,
                       {"n": sub.n, "map": m.spec(), "obs": obs.text,
                        "alpha_est": repr(sub.alpha_est),
                        "residual": repr(sub.residual)})
    _emit_json(args.output, {
        "command": "subaction", "map": m.spec(), "obs": obs.text,
        "n": sub.n, "tol": args.tol, "alpha_est": sub.alpha_est,
        "residual": sub.residual, "iterations": sub.iterations,
        "converged": sub.converged, "lip_u": sub.lip_u})
    return 0 if sub.converged else 1


def _cmd_verify(args) -> int:
    m = parse_map_spec(args.map)
    obs = parse_observable(args.obs)
    _, eff = _solve_effective(m, obs, args)
    res = maximize_over_orbits(m, obs, args.max_period, args.tie_tol)
    report = verify_subaction(eff, res, args.verify_tol)
    _emit_json(args.output, {
        "command": "verify", "map": m.spec(), "obs": obs.text,
        "tol": args.verify_tol, "passed": report.passed,
        "alpha_est": eff.alpha, "alpha_bruteforce": res.alpha,
        "items": [{"name": i.name, "passed": i.passed,
                   "measured": i.measured, "tol": i.tol}
                  for i in report.items]})
    return 0


def _cmd_lock(args) -> int:
    m = parse_map_spec(args.map)
    obs = parse_observable(args.obs)
    _, eff = _solve_effective(m, obs, args)
    orbit = _target_orbit(m, args.target)
    gamma_delta = args.gamma_delta
    if gamma_delta is None:
        sep = min_pairwise_dist(orbit.points)
        gamma_delta = sep if math.isfinite(sep) else 2.0 * m.e0
    consts = compute_constants(args.jumps, orbit.period, args.delta,
                               eff.lip_bound, m.lam, m.lip_t, gamma_delta,
                               m.e0)
    payload = {"command": "lock", "map": m.spec(), "obs": obs.text,
               "target": _orbit_payload(orbit),
               "constants": {
                   "jumps": consts.jumps, "period": consts.period,
                   "delta": consts.delta, "epsilon": consts.epsilon,
                   "lip_fbar": consts.lip_fbar, "lam": consts.lam,
                   "lip_t": consts.lip_t, "gamma_delta": consts.gamma_delta,
                   "e0": consts.e0, "K": consts.K, "rho": consts.rho,
                   "gamma2": consts.gamma2, "gamma3": consts.gamma3,
                   "Gamma1": consts.Gamma1, "Gamma2": consts.Gamma2,
                   "a": consts.a, "b": consts.b},
               "feasible": consts.feasible, "reasons": list(consts.reasons)}
    if not consts.feasible and not args.override_infeasible:
        payload["locked"] = None
        _emit_json(args.output, payload)
        sys.stderr.write("constant schedule infeasible: "
                         + ", ".join(consts.reasons) + "\n")
        return 1
    h = parse_observable(args.h_obs) if args.h_obs else None
    pert = locking_perturbation(eff, orbit, consts, h,
                                max_period=args.max_period,
                                tie_tol=args.tie_tol,
                                override_infeasible=args.override_infeasible)
    locked, margin = verify_locking(m, pert, args.max_period, args.tie_tol)
    far = far_point_check(pert)
    sep_report = preimage_separation(m, orbit, consts, seed=args.seed)
    payload.update({
        "locked": locked, "margin": _finite_or_none(margin),
        "beta": pert.beta,
        "override_infeasible": pert.infeasible_override,
        "g_certificate": {"eta": pert.g.eta,
                          "sup_error": pert.g.achieved_sup_error,
                          "lip": pert.g.achieved_lip,
                          "lip_flagged": pert.g.lip_flagged},
        "h": None if h is None else {"text": h.text,
                                     "sup_bound": h.sup_bound,
                                     "lip_bound": h.lip_bound},
        "far_check": {"far_count": far.far_count, "far_max": far.far_max,
                      "far_bound": far.far_bound, "far_ok": far.far_ok,
                      "sup_max": far.sup_max, "sup_bound": far.sup_bound,
                      "sup_ok": far.sup_ok, "slack": far.slack},
        "separation": {"min_separation": sep_report.min_separation,
                       "threshold": sep_report.threshold,
                       "isolated": sep_report.isolated}})
    _emit_json(args.output, payload)
    return 0


def _cmd_shadow(args) -> int:
    m = parse_map_spec(args.map)
    if args.input:
        po = read_pseudo_orbit_csv(args.input, m)
    elif args.points:
        pts = _parse_points(args.points,
                            exact=m.kind == "linear" and not args.use_float)
        po = validate_pseudo_orbit(m, pts, args.periodic)
    else:
        raise ValueError("need --points or --input")
    res = shadow(m, po)
    _emit_json(args.output, {
        "command": "shadow", "map": m.spec(), "periodic": po.periodic,
        "delta": po.delta, "gamma": _finite_or_none(po.gamma),
        "jumps": list(po.jumps), "eps_bound": res.eps_bound,
        "achieved_bound": res.achieved_bound,
        "y": float(res.y if not isinstance(res.y, Fraction) else res.y % 1),
        "y_exact": str(res.y) if isinstance(res.y, Fraction) else None,
        "digits": list(res.digits) if res.digits is not None else None,
        "tracked": [float(t) for t in res.tracked],
        "orbit": _orbit_payload(res.orbit) if res.orbit else None})
    return 0


def _cmd_mine(args) -> int:
    m = parse_map_spec(args.map)
    eff = None
    if args.obs:
        _, eff = _solve_effective(m, parse_observable(args.obs), args)
    results = mine_recurrences(m, args.seed, args.length, args.delta,
                               args.max_jumps, eff=eff,
                               filter_tol=args.filter_tol,
                               max_results=args.max_results)
    _emit_json(args.output, {
        "command": "mine", "map": m.spec(), "seed": args.seed,
        "length": args.length, "delta": args.delta,
        "max_jumps": args.max_jumps, "filtered": args.obs is not None,
        "count": len(results),
        "results": [{"points": [float(p) for p in po.points],
                     "delta": po.delta,
                     "gamma": _finite_or_none(po.gamma),
                     "jumps": list(po.jumps),
                     "ratio": _finite_or_none(po.gamma_delta_ratio)}
                    for po in results]})
    return 0


def _cmd_sweep(args) -> int:
    m = parse_map_spec(args.map)
    thetas = _parse_range(args.thetas)
    rows = theta_sweep(m, thetas, args.max_period, args.tie_tol)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["theta", "period", "rotation_num", "rotation_den",
                     "alpha", "runner_up_gap"])
    for r in rows:
        writer.writerow([repr(r.theta), r.period, r.rotation.numerator,
                         r.rotation.denominator, repr(r.alpha),
                         repr(r.runner_up_gap)])
    _emit_text(args.output, buf.getvalue())
    return 0


def _make_samples(m: ExpandingMap, spec: str, seed: int) -> np.ndarray:
    kind, _, rest = spec.partition(":")
    if kind == "uniform":
        return np.random.default_rng(seed).random(int(rest))
    if kind == "orbit":
        start, _, length = rest.partition(":")
        return forward_orbit(m, start, int(length))
    if kind == "const":
        val, _, count = rest.partition(":")
        return np.full(int(count), float(Fraction(val)))
    if kind == "file":
        return np.loadtxt(rest, ndmin=1)
    raise ValueError(f"unknown sample source {spec!r}; use uniform:N, "
                     "orbit:SEED:N, const:X:N or file:PATH")


def _cmd_entropy(args) -> int:
    m = parse_map_spec(args.map)
    samples = _make_samples(m, args.samples, args.seed)
    est = partition_entropy(m, samples, args.max_depth)
    if args.csv:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["depth", "entropy_over_depth"])
        for d, h in est.per_depth:
            writer.writerow([d, repr(h)])
        _emit_text(args.csv, buf.getvalue())
    _emit_json(args.output, {
        "command": "entropy", "map": m.spec(), "samples": args.samples,
        "seed": args.seed, "max_depth": args.max_depth,
        "value": est.value, "sample_size": est.sample_size,
        "per_depth": [[d, h] for d, h in est.per_depth]})
    return 0


def _cmd_returns(args) -> int:
    m = parse_map_spec(args.map)
    w = float(Fraction(args.w))
    stats = return_times(m, args.q, w, args.base, args.N, args.N0,
                         args.length)
    if args.csv:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["t"])
        for t in stats.return_times:
            writer.writerow([t])
        _emit_text(args.csv, buf.getvalue())
    _emit_json(args.output, {
        "command": "returns", "map": m.spec(), "q": args.q, "w": stats.w,
        "Q": stats.Q, "N": stats.N, "N0": stats.N0,
        "length": args.length, "radius": stats.radius,
        "count": len(stats.return_times), "min_gap": stats.min_gap,
        "gap_bound": stats.gap_bound, "entropy_bound": stats.entropy_bound,
        "first_returns": list(stats.return_times[:100])})
    return 0


def _make_target(m: ExpandingMap, spec: str):
    kind, _, rest = spec.partition(":")
    if kind == "points":
        return _parse_points(rest, exact=False)
    if kind == "orbit":
        start, _, count = rest.partition(":")
        return forward_orbit(m, start, int(count))
    if kind == "file":
        return np.loadtxt(rest, ndmin=1)
    raise ValueError(f"unknown target {spec!r}; use points:a,b,..., "
                     "orbit:SEED:N or file:PATH")


def _cmd_approx(args) -> int:
    m = parse_map_spec(args.map)
    target = _make_target(m, args.target)
    f = parse_observable(args.obs) if args.obs else None
    sched = periodic_approximation(m, target, args.max_period, args.theta,
                                   f, args.tie_tol)
    _emit_json(args.output, {
        "command": "approx", "map": m.spec(), "target": args.target,
        "theta": sched.theta, "theta_within_bound": sched.theta_within_bound,
        "C": sched.C,
        "rows": [{"n": r.n, "period": r.orbit.period, "dist": r.dist,
                  "rate": _finite_or_none(r.rate),
                  "half_rate": _finite_or_none(r.half_rate)}
                 for r in sched.per_n]})
    return 0


# ---------------------------------------------------------------------------
# parser


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--map", default="linear:k=2",
                        help="map spec: linear:k=2 or perturbed:k=2,a=0.05")
    common.add_argument("--output", default="-",
                        help="artifact path, '-' for stdout")
    common.add_argument("--threads", type=int, default=1,
                        help="parallelism cap (reserved; runs are serial)")

    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--n", type=int, default=DEFAULT_N,
                        help="grid size (power of two)")
    solver.add_argument("--tol", type=float, default=DEFAULT_SUB_TOL,
                        help="sub-action iteration tolerance")
    solver.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)

    search = argparse.ArgumentParser(add_help=False)
    search.add_argument("--max-period", type=int, default=DEFAULT_MAX_PERIOD)
    search.add_argument("--tie-tol", type=float, default=DEFAULT_TIE_TOL)

    parser = argparse.ArgumentParser(
        prog="ergmax",
        description="Ergodic maximization toolkit for expanding circle maps")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("maximize", parents=[common, search],
                        help="brute-force maximizing orbits")
    p.add_argument("--obs", required=True, help="observable expression")
    p.set_defaults(handler=_cmd_maximize)

    p = subs.add_parser("subaction", parents=[common, solver],
                        help="solve for a calibrated sub-action")
    p.add_argument("--obs", required=True)
    p.add_argument("--grid-csv", help="also write the sub-action grid as CSV")
    p.set_defaults(handler=_cmd_subaction)

    p = subs.add_parser("verify", parents=[common, solver, search],
                        help="cross-check sub-action against brute force")
    p.add_argument("--obs", required=True)
    p.add_argument("--verify-tol", type=float, default=1e-5)
    p.set_defaults(handler=_cmd_verify)

    p = subs.add_parser("lock", parents=[common, solver, search],
                        help="lock the maximum onto a target orbit")
    p.add_argument("--obs", required=True)
    p.add_argument("--target", required=True,
                   help="orbit points, comma separated (e.g. 1/3,2/3)")
    p.add_argument("--delta", type=float, default=1e-6,
                   help="defect scale; epsilon = sqrt(delta)")
    p.add_argument("--gamma-delta", type=float, default=None,
                   help="pseudo-orbit separation (default: orbit separation)")
    p.add_argument("--jumps", type=int, default=2, help="jump budget")
    p.add_argument("--h-obs", default=None, help="optional noise expression")
    p.add_argument("--override-infeasible", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=_cmd_lock)

    p = subs.add_parser("shadow", parents=[common],
                        help="shadow a pseudo-orbit by a true orbit")
    p.add_argument("--points", help="pseudo-orbit points, comma separated")
    p.add_argument("--input", help="pseudo-orbit CSV file")
    p.add_argument("--periodic", action="store_true")
    p.add_argument("--float", dest="use_float", action="store_true",
                   help="parse points as floats even on linear maps")
    p.set_defaults(handler=_cmd_shadow)

    p = subs.add_parser("mine", parents=[common, solver],
                        help="mine near-recurrences into pseudo-orbits")
    p.add_argument("--seed", required=True,
                   help="orbit seed (decimal string, read exactly)")
    p.add_argument("--length", type=int, default=10_000)
    p.add_argument("--delta", type=float, default=1e-3)
    p.add_argument("--max-jumps", type=int, default=1, choices=(1, 2))
    p.add_argument("--max-results", type=int, default=64)
    p.add_argument("--obs", default=None,
                   help="filter segments by |effective observable| "
                        "<= filter-tol")
    p.add_argument("--filter-tol", type=float, default=1e-4)
    p.set_defaults(handler=_cmd_mine)

    p = subs.add_parser("sweep", parents=[common, search],
                        help="theta sweep of the rotated cosine family")
    p.add_argument("--thetas", default="0:0.5:101",
                   help="theta grid start:stop:count")
    p.set_defaults(handler=_cmd_sweep)

    p = subs.add_parser("entropy", parents=[common],
                        help="partition entropy of an empirical measure")
    p.add_argument("--samples", required=True,
                   help="uniform:N | orbit:SEED:N | const:X:N | file:PATH")
    p.add_argument("--max-depth", type=int, default=12)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", help="also write per-depth rows as CSV")
    p.set_defaults(handler=_cmd_entropy)

    p = subs.add_parser("returns", parents=[common],
                        help="return times to a small ball")
    p.add_argument("--q", required=True, help="orbit seed")
    p.add_argument("--w", required=True, help="center point")
    p.add_argument("--base", type=float, default=2.0, metavar="Q",
                   help="radius base; ball radius is half Q^-N")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--N0", type=int, default=0)
    p.add_argument("--length", type=int, default=1_000_000)
    p.add_argument("--csv", help="also write return times as CSV")
    p.set_defaults(handler=_cmd_returns)

    p = subs.add_parser("approx", parents=[common, search],
                        help="periodic approximation schedule of a set")
    p.add_argument("--target", required=True,
                   help="points:a,b,... | orbit:SEED:N | file:PATH")
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--obs", default=None,
                   help="maximizing observable for the slope fit")
    p.set_defaults(handler=_cmd_approx)

    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:      # argparse exits directly on usage errors
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except (ParseError, NonExpanding, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ErgmaxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
