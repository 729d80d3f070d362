"""Command-line front end.

Subcommands emit CSV/JSON only (plotting is out of scope):

  curves        tradeoff curve family sampled on a grid
  outage        Monte Carlo outage sweep + slope summary
  error         Monte Carlo ML block-error sweep + slope summary
  lemma2-verify closed form vs brute-force oracle sweep
  lattice-audit shell enumeration and determinant audit of an order
  wishart-check sample-moment and pairing checks of the spectrum samplers

SNR is accepted in dB everywhere (rho = 10^(dB/10)).  Exit codes: 0 success,
2 validation error (diagnostic names the violated precondition), 3
unwritable output.  Stochastic outputs echo their seed in the header.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import dmt, lattice, sim
from .channel import SystemConfig


class OutputError(RuntimeError):
    """The requested output path cannot be written."""


@dataclass
class RunConfig:
    """Parameters of one stochastic run, merged from flags and --config."""

    mode: str
    n: int
    m: int
    r: float
    snr_db: list
    trials: list
    seed: int
    lattice: str | None = None
    out: str | None = None
    summary: str | None = None
    extra: dict = field(default_factory=dict)


def _parse_float_list(text):
    vals = [float(v) for v in str(text).split(",") if v.strip()]
    if not vals:
        raise ValueError("empty numeric list")
    return vals


def _parse_trials(text, n_points):
    vals = [int(float(v)) for v in str(text).split(",") if v.strip()]
    if len(vals) == 1:
        vals = vals * n_points
    if len(vals) != n_points:
        raise ValueError("trials list must have one entry or one per SNR point")
    if min(vals) < 1:
        raise ValueError("trials must be >= 1")
    return vals


def _write_text(path, text):
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


def _fmt(v):
    return f"{v:.12g}"


# ---------------------------------------------------------------------------
# curves

def _cmd_curves(args):
    if args.n % 2:
        raise ValueError("curves needs even n (the quaternionic bound is "
                         "undefined for odd n)")
    if args.step <= 0:
        raise ValueError("step must be positive")
    rows = dmt.sample_curves(args.n, args.m, step=args.step)
    lines = ["r,d_star,d1,d2"]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    _write_text(args.out, "\n".join(lines) + "\n")
    if args.anchors_out:
        fam = dmt.curve_family(args.n, args.m)
        payload = [fam[name].to_json(name) for name in ("d_star", "d1", "d2")]
        _write_text(args.anchors_out, json.dumps(payload, indent=2) + "\n")
    return 0


# ---------------------------------------------------------------------------
# outage / error

def _load_config(args, keys):
    merged = {}
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            merged.update(json.load(fh))
    for key in keys:
        val = getattr(args, key.replace("-", "_"), None)
        if val is not None:
            merged[key] = val
    missing = [k for k in keys if merged.get(k) is None]
    if missing:
        raise ValueError(f"missing required parameter(s): {', '.join(missing)}"
                         " (seed is mandatory for stochastic commands)")
    return merged


def _run_config(args, need_lattice=False):
    keys = ["mode", "n", "m", "r", "snr-db", "trials", "seed"]
    if need_lattice:
        keys.append("lattice")
    merged = _load_config(args, keys)
    snr_db = (_parse_float_list(merged["snr-db"])
              if not isinstance(merged["snr-db"], list) else
              [float(v) for v in merged["snr-db"]])
    trials = merged["trials"]
    trials = (_parse_trials(trials, len(snr_db)) if not isinstance(trials, list)
              else [int(v) for v in trials])
    if len(trials) != len(snr_db):
        raise ValueError("trials list must match the SNR grid")
    return RunConfig(mode=str(merged["mode"]), n=int(merged["n"]),
                     m=int(merged["m"]), r=float(merged["r"]),
                     snr_db=snr_db, trials=trials, seed=int(merged["seed"]),
                     lattice=merged.get("lattice"),
                     out=getattr(args, "out", None),
                     summary=getattr(args, "summary", None))


def _sweep_csv(command, run, est):
    lines = [f"# seed={run.seed} command={command} mode={run.mode} "
             f"n={run.n} m={run.m} r={_fmt(run.r)}",
             "snr_db,rate_bits,trials,events,prob,stderr"]
    for db, prob, trials, events in zip(est.snr_db, est.probs, est.trials, est.events):
        rho = 10.0 ** (db / 10.0)
        rate = run.r * math.log2(rho)
        se = math.sqrt(max(prob * (1.0 - prob), 0.0) / trials)
        lines.append(",".join([_fmt(db), _fmt(rate), str(trials), str(events),
                               _fmt(prob), _fmt(se)]))
    return "\n".join(lines) + "\n"


def _theory_values(run):
    d1 = d2 = None
    try:
        d1 = dmt.d1_curve(run.n, run.m)(run.r)
    except ValueError:
        pass
    if run.n % 2 == 0:
        try:
            d2 = dmt.d2_curve(run.n, run.m)(run.r)
        except ValueError:
            pass
    return d1, d2


def _summary_json(run, est):
    d1, d2 = _theory_values(run)
    out = {"mode": run.mode, "n": run.n, "m": run.m, "r": run.r,
           "seed": run.seed,
           "slope": None if math.isnan(est.slope) else est.slope,
           "stderr": None if math.isnan(est.stderr) else est.stderr,
           "theory_d1": d1, "theory_d2": d2}
    return json.dumps(out, sort_keys=True) + "\n"


def _cmd_outage(args):
    run = _run_config(args)
    cfg = SystemConfig(n=run.n, m=run.m, rho=1.0, r=run.r)
    if len(set(run.trials)) != 1:
        raise ValueError("outage uses a single trial count for all SNR points")
    est = sim.estimate_outage(run.mode, cfg, run.snr_db, run.trials[0],
                              np.random.default_rng(run.seed),
                              weighting=getattr(args, "weighting", "events"))
    _write_text(run.out, _sweep_csv("outage", run, est))
    _write_text(run.summary, _summary_json(run, est))
    return 0


def _cmd_error(args):
    run = _run_config(args, need_lattice=True)
    lat = lattice.load_lattice(run.lattice)
    cfg = SystemConfig(n=run.n, m=run.m, rho=1.0, r=run.r)
    est = sim.estimate_error_prob(run.mode, lat, cfg, run.snr_db, run.trials,
                                  np.random.default_rng(run.seed),
                                  weighting=getattr(args, "weighting", "events"))
    _write_text(run.out, _sweep_csv("error", run, est))
    _write_text(run.summary, _summary_json(run, est))
    return 0


# ---------------------------------------------------------------------------
# lemma2-verify

def _cmd_lemma2(args):
    if args.sstep <= 0 or args.gridstep <= 0:
        raise ValueError("sstep and gridstep must be positive")
    checked = 0
    failures = []
    for l in range(1, args.lmax + 1):
        for q in range(max(l, 1), args.qmax + 1):
            s = 0.0
            while s <= l + 1e-12:
                prob = dmt.Lemma2Problem(q=float(q), l=l, s=min(s, float(l)))
                value, alpha = dmt.lemma2_closed_form(prob)
                brute = dmt.lemma2_bruteforce(prob, args.gridstep)
                tol = l * (q + l) * args.gridstep
                feasible = dmt.a0_membership(alpha, prob.s, tol=1e-12)
                attained = abs(float(prob.coefficients() @ alpha) - value) <= 1e-12
                if abs(value - brute) > tol or not feasible or not attained:
                    failures.append((q, l, prob.s, value, brute, tol, feasible, attained))
                checked += 1
                s += args.sstep
    if failures:
        for f in failures:
            print(f"VIOLATION q={f[0]} l={f[1]} s={f[2]}: closed={f[3]:.6g} "
                  f"brute={f[4]:.6g} tol={f[5]:.3g} feasible={f[6]} attained={f[7]}")
        print(f"{len(failures)} of {checked} cases failed")
        return 1
    print(f"all {checked} cases within tolerance "
          f"(q in 1..{args.qmax}, l in 1..{args.lmax}, q >= l)")
    return 0


# ---------------------------------------------------------------------------
# lattice-audit

def _cmd_lattice_audit(args):
    if args.radius < 0:
        raise ValueError("radius must be nonnegative")
    lat = lattice.load_lattice(args.lattice)
    coords = lattice.shell_coordinates(lat, args.radius)
    dets = []
    for c in coords:
        if np.any(c):
            dets.append(abs(lattice.linalg.determinant(
                lattice.point_from_coordinates(lat, c))))
    nvd = bool(dets) and all(abs(d - round(d)) <= 1e-9 and round(d) >= 1 for d in dets)
    report = {"points": int(len(coords)),
              "min_det": float(min(dets)) if dets else None,
              "nvd": nvd}
    _write_text(args.out, json.dumps(report, sort_keys=True) + "\n")
    return 0


# ---------------------------------------------------------------------------
# wishart-check

def _cmd_wishart(args):
    if args.samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(args.seed)
    if args.mode == "real":
        lam = sim.sample_wishart_real_batch(args.n, args.m, args.samples, rng)
        expected = float(args.m * args.n)
        observed = float(lam.sum(axis=1).mean())
        count_ok = lam.shape[1] == min(2 * args.m, args.n)
        extra = {}
    elif args.mode == "quaternion":
        if args.n % 2:
            raise ValueError("quaternion mode needs even n")
        p = args.n // 2
        lam = sim.sample_wishart_quaternion_batch(p, args.m, args.samples, rng)
        expected = float(2 * args.m * args.n)  # E tr H^dag H of the 2m x 2p lift
        observed = float(2.0 * lam.sum(axis=1).mean())
        count_ok = lam.shape[1] == min(args.m, p)
        extra = {"pairing_checked": True}
    else:
        raise ValueError(f"mode must be 'real' or 'quaternion', got {args.mode!r}")
    rel_err = abs(observed - expected) / expected
    report = {"mode": args.mode, "n": args.n, "m": args.m,
              "samples": args.samples, "seed": args.seed,
              "mean_trace": observed, "expected_trace": expected,
              "rel_err": rel_err, "count_ok": count_ok,
              "pass": bool(count_ok and rel_err <= 0.02), **extra}
    _write_text(args.out, json.dumps(report, sort_keys=True) + "\n")
    return 0


# ---------------------------------------------------------------------------
# parser / dispatch

def _build_parser():
    parser = argparse.ArgumentParser(
        prog="dmtlab",
        description="Tradeoff curves, lattice audits and Monte Carlo sweeps "
                    "for real and quaternionic space-time codes")
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("curves", help="emit the d_star/d1/d2 curve family as CSV")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--m", type=int, required=True)
    c.add_argument("--step", type=float, default=0.01)
    c.add_argument("--out")
    c.add_argument("--anchors-out")
    c.set_defaults(fn=_cmd_curves)

    for name, fn, with_lattice in (("outage", _cmd_outage, False),
                                   ("error", _cmd_error, True)):
        s = sub.add_parser(name, help=f"Monte Carlo {name} sweep")
        s.add_argument("--mode", choices=["real", "quaternion"])
        s.add_argument("--n", type=int)
        s.add_argument("--m", type=int)
        s.add_argument("--r", type=float)
        s.add_argument("--snr-db", help="comma-separated dB values")
        s.add_argument("--trials", help="single count or one per SNR point")
        s.add_argument("--seed", type=int)
        if with_lattice:
            s.add_argument("--lattice", help="built-in name (hamilton, split) or JSON path")
        s.add_argument("--weighting", choices=["events", "uniform"],
                       default="events", help="slope-fit weighting")
        s.add_argument("--config", help="JSON file with the same keys; flags override")
        s.add_argument("--out", help="CSV path (default: stdout)")
        s.add_argument("--summary", help="JSON summary path (default: stdout)")
        s.set_defaults(fn=fn)

    v = sub.add_parser("lemma2-verify", help="closed form vs brute-force sweep")
    v.add_argument("--qmax", type=int, required=True)
    v.add_argument("--lmax", type=int, required=True)
    v.add_argument("--sstep", type=float, required=True)
    v.add_argument("--gridstep", type=float, required=True)
    v.set_defaults(fn=_cmd_lemma2)

    a = sub.add_parser("lattice-audit", help="enumerate a shell and audit determinants")
    a.add_argument("--lattice", required=True)
    a.add_argument("--radius", type=float, required=True)
    a.add_argument("--out")
    a.set_defaults(fn=_cmd_lattice_audit)

    w = sub.add_parser("wishart-check", help="moment/pairing checks of spectrum samplers")
    w.add_argument("--mode", choices=["real", "quaternion"], required=True)
    w.add_argument("--n", type=int, required=True)
    w.add_argument("--m", type=int, required=True)
    w.add_argument("--samples", type=int, required=True)
    w.add_argument("--seed", type=int, required=True)
    w.add_argument("--out")
    w.set_defaults(fn=_cmd_wishart)

    return parser


def run(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except OutputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, lattice.ResourceLimitError, FileNotFoundError,
            json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
