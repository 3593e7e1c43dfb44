"""Command-line front end.

Commands
--------
simulate   strategies and stock paths per coalition structure
stability  non-emptiness report and per-subgame bounds of the principle
allocate   allocation and payment schedules, time-consistency residuals
sweep      stability condition over a parameter grid
verify     closed forms against the brute-force oracle

Exit codes: 0 success, 1 domain outcome (not sustainable, empty principle,
failed verification), 2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .adjoint import NotSustainable, check_sustainable, shadow_cycle
from .allocation import AllocationWeights, EmptyPrinciple, idp, strong_tc_counterexample, verify_time_consistency, zeta
from .model import PARAM_KEYS, GameParams, ParameterError, Structure, load_config, reference_params, validate

EXIT_OK, EXIT_DOMAIN, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, str):
        return x
    return "%.17g" % x


def write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=float) + "\n")


# ---------------------------------------------------------------------------
# argument handling

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--params", metavar="FILE", help="flat key=value parameter file")
    for key in PARAM_KEYS:
        p.add_argument(f"--{key}", type=float, default=None, metavar="X", help=argparse.SUPPRESS)
    p.add_argument("--out", default=".", metavar="PATH", help="output directory (default: .)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--oracle", action="store_true", help="add brute-force cross-checks")


def _add_grid(p: argparse.ArgumentParser, tmax: float, samples: int) -> None:
    p.add_argument("--tmax", type=float, default=tmax)
    p.add_argument("--samples", type=int, default=samples)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hybridgame", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="strategy and stock paths")
    _add_common(p)
    _add_grid(p, 10.0, 1001)
    p.add_argument("--structure", default="all", choices=[s.value for s in Structure] + ["all"])

    p = sub.add_parser("stability", help="non-emptiness report")
    _add_common(p)
    _add_grid(p, 2.0, 33)
    p.add_argument("--alpha", default="1/3,1/3,1/3")

    p = sub.add_parser("allocate", help="allocation and payment schedules")
    _add_common(p)
    _add_grid(p, 5.0, 501)
    p.add_argument("--alpha", default="1/3,1/3,1/3")
    p.add_argument("--strong-tc", action="store_true", help="search a strong time-consistency violation")
    p.add_argument("--alpha-prime", default="0,1,0")

    p = sub.add_parser("sweep", help="stability condition over a grid")
    _add_common(p)
    p.add_argument("--sweep", action="append", default=[], metavar="KEY=lo:hi:n", required=True)
    p.add_argument("--seed", type=int, default=None, help="sample points uniformly instead of a grid")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("verify", help="oracle cross-checks")
    _add_common(p)
    p.add_argument("--tol", type=float, default=1e-6)
    return parser


def resolve_params(args) -> GameParams:
    values = reference_params().to_mapping()
    if args.params:
        try:
            values.update(load_config(args.params))
        except OSError as exc:
            raise InputError(f"cannot read {args.params}: {exc.strerror}") from None
    for key in PARAM_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    return validate(GameParams.from_mapping(values))


def _grid(args) -> np.ndarray:
    if not args.tmax > 0:
        raise InputError("tmax must be > 0")
    if args.samples < 2:
        raise InputError("samples must be >= 2")
    return np.linspace(0.0, args.tmax, args.samples)


def _alpha(text: str) -> AllocationWeights:
    try:
        return AllocationWeights.parse(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"invalid alpha {text!r}: {exc}") from None


# ---------------------------------------------------------------------------
# commands

def cmd_simulate(args, params: GameParams) -> int:
    from .dynamics import limit_cycle_state, steady_state_cycle, trajectory
    from .strategies import build_profile

    t = _grid(args)
    out = Path(args.out)
    structures = list(Structure) if args.structure == "all" else [Structure(args.structure)]
    for s in structures:
        prof = build_profile(params, s)
        z = trajectory(params, s)(t)
        zbar, zhlc = limit_cycle_state(params, s)
        cols = {"t": t}
        v = prof.sample(t)
        for i in range(3):
            cols[f"v{i + 1}"] = v[:, i]
        cols["z"] = z
        cols["zbar"] = zbar(t)
        cols["zstar"] = steady_state_cycle(params, s)(t)
        if args.oracle:
            cols["z_ode"] = _oracle_state(params, prof, t)
        if args.format == "csv":
            write_csv(out / f"simulate_{s.value}.csv", list(cols), zip(*cols.values()))
        else:
            write_json(out / f"simulate_{s.value}.json", {
                "structure": s.value,
                "zbar_hlc": zhlc,
                "zbar": zbar.to_dict(),
                "columns": {k: np.asarray(v).tolist() for k, v in cols.items()},
            })
    return EXIT_OK


def _oracle_state(params, prof, t):
    from .oracle import OracleConfig, integrate_ode, state_field

    cfg = OracleConfig(ode_steps_per_period=20000)
    out = np.empty_like(t)
    out[0] = params.z0
    field = state_field(params, prof.inflow)
    z = params.z0
    for j in range(1, t.size):
        z = integrate_ode(field, z, t[j - 1], t[j], cfg).end
        out[j] = z
    return out


def cmd_stability(args, params: GameParams) -> int:
    from .stability import prop1_check, zset_bounds

    rep = prop1_check(params)
    out = Path(args.out)
    write_json(out / "stability.json", rep.to_dict())
    alpha = _alpha(args.alpha)
    rows = []
    for e in _grid(args):
        zb = zset_bounds(params, e)
        z = np.array(zb.lower) + np.asarray(alpha.alpha) * zb.surplus if zb.nonempty else [math.nan] * 3
        rows.append([e, zb.z_eps, *zb.lower, zb.total, *z, *zb.singleton, zb.surplus, zb.nonempty])
    header = ["eps", "z_eps", "lower1", "lower2", "lower3", "vN", "zeta1", "zeta2", "zeta3",
              "v1", "v2", "v3", "surplus", "nonempty"]
    if args.format == "csv":
        write_csv(out / "zset.csv", header, rows)
    else:
        write_json(out / "zset.json", [dict(zip(header, r)) for r in rows])
    print(f"Y={rep.Y:.12g} rhs={rep.rhs:.12g} branch={rep.branch} satisfied={_fmt(rep.satisfied)}")
    return EXIT_OK if rep.satisfied else EXIT_DOMAIN


def cmd_allocate(args, params: GameParams) -> int:
    from .payoffs import SubgameContext, coalition_payoff, deviation_payoff

    alpha = _alpha(args.alpha)
    t = _grid(args)
    out = Path(args.out)
    w = idp(params, alpha, t)
    rows = []
    for j, e in enumerate(t):
        z = zeta(params, alpha, e)
        ctx = SubgameContext.on_cooperative_path(params, e)
        lower = [deviation_payoff(params, i, ctx) for i in range(3)]
        rows.append([e, *z, *lower, coalition_payoff(params, Structure.PI1, ctx), *w[j]])
    header = ["eps", "zeta1", "zeta2", "zeta3", "lower1", "lower2", "lower3", "vN", "w1", "w2", "w3"]
    T = params.T
    check = [0.0, T / 4, T / 2, T, 2.5 * T]
    rep = verify_time_consistency(params, alpha, check)
    summary = {
        "alpha": list(alpha.alpha),
        "grid": list(rep.grid),
        "residuals": rep.residuals.tolist(),
        "max_abs_residual": rep.max_abs,
    }
    if args.strong_tc:
        alpha_p = _alpha(args.alpha_prime)
        res = strong_tc_counterexample(params, alpha, alpha_p)
        if res is None:
            summary["strong_tc"] = None
            print("strong-tc: no t' in (0, T] with SC(0) < exp(-rho t') SC(t')")
        else:
            summary["strong_tc"] = {"t_prime": res.t_prime, "gap": res.gap, "margins": list(res.margins),
                                    "alpha": list(alpha.alpha), "alpha_prime": list(alpha_p.alpha)}
            print(f"strong-tc: t'={res.t_prime:.12g} gap={res.gap:.6g} violated={list(res.violated)}")
    if args.format == "csv":
        write_csv(out / "allocation.csv", header, rows)
    else:
        write_json(out / "allocation.json", [dict(zip(header, r)) for r in rows])
    write_json(out / "time_consistency.json", summary)
    print(f"max time-consistency residual {rep.max_abs:.3e}")
    return EXIT_OK


def parse_sweep(specs, seed=None) -> tuple[list[str], list[tuple[float, ...]]]:
    keys, axes = [], []
    rng = np.random.default_rng(seed) if seed is not None else None
    for spec in specs:
        try:
            key, rng_txt = spec.split("=", 1)
            lo, hi, n = rng_txt.split(":")
            lo, hi, n = float(lo), float(hi), int(n)
        except ValueError:
            raise InputError(f"bad sweep spec {spec!r}; expected KEY=lo:hi:n") from None
        if key not in PARAM_KEYS:
            raise InputError(f"unknown sweep key {key!r}")
        if n < 1:
            raise InputError("sweep needs n >= 1")
        keys.append(key)
        axes.append(rng.uniform(lo, hi, n) if rng is not None else np.linspace(lo, hi, n))
    if rng is not None:
        # sampled points are paired, not crossed
        n = min(len(a) for a in axes)
        return keys, [tuple(float(a[j]) for a in axes) for j in range(n)]
    return keys, [tuple(float(x) for x in p) for p in itertools.product(*axes)]


def _sweep_point(task):
    from .stability import prop1_check

    base, changes = task
    try:
        params = validate(GameParams.from_mapping({**base, **changes}))
        rep = prop1_check(params)
        return rep.Y, rep.rhs, rep.satisfied, "ok"
    except NotSustainable as exc:
        return math.nan, math.nan, False, f"not_sustainable:player{exc.player + 1}"
    except ParameterError as exc:
        return math.nan, math.nan, False, f"invalid:{exc}"


def cmd_sweep(args, params: GameParams) -> int:
    keys, points = parse_sweep(args.sweep, args.seed)
    base = params.to_mapping()
    tasks = [(base, dict(zip(keys, p))) for p in points]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            results = list(ex.map(_sweep_point, tasks, chunksize=max(1, len(tasks) // (4 * args.jobs))))
    else:
        results = [_sweep_point(t) for t in tasks]
    header = [*keys, "Y", "rhs", "satisfied", "status"]
    rows = [[*p, *r] for p, r in zip(points, results)]
    out = Path(args.out)
    if args.format == "csv":
        write_csv(out / "sweep.csv", header, rows)
    else:
        write_json(out / "sweep.json", [dict(zip(header, r)) for r in rows])
    n_ok = sum(r[2] for r in results)
    print(f"{n_ok}/{len(results)} points satisfy the condition")
    return EXIT_OK


def run_verification(params: GameParams, tol: float = 1e-6) -> list[tuple[str, float, bool]]:
    """Closed form vs oracle; returns ``(name, relative error, passed)`` rows."""
    from . import oracle as O
    from .dynamics import limit_cycle_state
    from .payoffs import SubgameContext, discount_kernel_h, payoff
    from .stability import mbar_cycle
    from .strategies import build_profile

    cfg = O.OracleConfig(ode_steps_per_period=20000, quad_nodes_per_subperiod=2000)
    rows = []

    def add(name, closed, ref):
        err = abs(closed - ref) / max(1.0, abs(ref))
        rows.append((name, err, err <= tol))

    adj = shadow_cycle(params)
    lam = adj.L(0.0)
    add("adjoint period return", lam, O.period_map(params, O.adjoint_field(params, 1.0), cfg)(lam))
    add("kernel h(0)", discount_kernel_h(params, 0.0), O.oracle_h(params, 0.0, cfg))
    ctx = SubgameContext(0.0, params.z0)
    for s in Structure:
        if not check_sustainable(params, s).sustainable:
            continue
        _, zh = limit_cycle_state(params, s)
        add(f"zbar_hlc {s.value}", zh, O.state_fixed_point(params, s, config=cfg))
        ref = O.oracle_payoffs(params, build_profile(params, s), 0.0, params.z0, cfg)
        for i in range(3):
            add(f"payoff {s.value} player{i + 1}", payoff(params, s, i, ctx), ref[i])
    try:
        mb = mbar_cycle(params)
        step = O.period_map(params, O.mbar_field(params, mb.om), cfg)
        add("Mbar(0)", mb.M0, O.fixed_point_cycle(step, 0.0))
    except NotSustainable:
        pass
    return rows


def cmd_verify(args, params: GameParams) -> int:
    rows = run_verification(params, args.tol)
    for name, err, ok in rows:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<28s} rel.err {err:.2e}")
    out = Path(args.out)
    if args.format == "json":
        write_json(out / "verify.json", [{"check": n, "rel_err": e, "passed": ok} for n, e, ok in rows])
    else:
        write_csv(out / "verify.csv", ["check", "rel_err", "passed"], rows)
    return EXIT_OK if all(ok for _, _, ok in rows) else EXIT_DOMAIN


COMMANDS = {
    "simulate": cmd_simulate,
    "stability": cmd_stability,
    "allocate": cmd_allocate,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        params = resolve_params(args)
        return COMMANDS[args.command](args, params)
    except (ParameterError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NotSustainable as exc:
        print(f"not sustainable: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except EmptyPrinciple as exc:
        print(f"empty principle: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
