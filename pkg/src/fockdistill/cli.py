"""Batch command-line front-end.

Subcommands: plan, distill, explore, delete-prime, detuning-table,
source-stats, pulse-fidelity.  Output is deterministic for fixed inputs and
seed; angles are accepted and printed as rational multiples of pi.
"""
from __future__ import annotations

import os

# honor the thread cap before any numerics are imported
_threads = os.environ.get("FOCK_DISTILLER_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

import argparse
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import cavity, distill, fock, pulse
from .errors import FockDistillError


def parse_angle(text: str) -> float:
    """Parse 'pi', 'pi/8', '3pi/4', '2pi', or a decimal, into radians."""
    s = text.strip().lower().replace(" ", "")
    if "pi" in s:
        head, _, tail = s.partition("pi")
        if head in ("", "+"):
            num = 1.0
        elif head == "-":
            num = -1.0
        else:
            num = float(head)
        den = 1.0
        if tail:
            if not tail.startswith("/"):
                raise ValueError(f"cannot parse angle {text!r}")
            den = float(tail[1:])
        return num * math.pi / den
    return float(s)


def format_angle(x: float, max_den: int = 64) -> str:
    """Render x as a multiple of pi when it is one (to 1e-12), else decimal."""
    frac = Fraction(x / math.pi).limit_denominator(max_den)
    if abs(x - float(frac) * math.pi) < 1e-12:
        if frac == 0:
            return "0"
        num, den = frac.numerator, frac.denominator
        head = "" if num == 1 else ("-" if num == -1 else str(num))
        tail = "" if den == 1 else f"/{den}"
        return f"{head}pi{tail}"
    return f"{x:.6f}"


def _render_table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(headers)]
    def fmt(cells):
        return "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
    lines = [fmt(headers), fmt(["-" * w for w in widths])]
    lines.extend(fmt(r) for r in rows)
    return "\n".join(lines) + "\n"


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump_json(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _survivor_text(ns: list[int]) -> str:
    if len(ns) <= 6:
        return ",".join(str(n) for n in ns)
    step = ns[1] - ns[0]
    return f"{ns[0]},{ns[1]}..{ns[-2]},{ns[-1]} ({len(ns)} values, step {step})"


def _source_from_args(args) -> fock.FockVector:
    spec = fock.SourceSpec(alpha=args.alpha, squeeze_r=args.squeeze,
                           window_sigmas=args.window_sigmas)
    if args.squeeze > 0:
        return fock.squeezed_coherent_state(spec)
    return fock.coherent_state(spec)


# ---------------------------------------------------------------- commands

def cmd_plan(args) -> dict:
    p = distill.plan(args.target, args.steps)
    return {
        "command": "plan",
        "plan": p.to_json(),
        "_table": (
            ["m", "phi", "theta", "M"],
            [[str(s.iteration_index), format_angle(s.phi),
              format_angle(s.theta), s.keep_outcome] for s in p.steps],
        ),
    }


def cmd_distill(args) -> dict:
    light = _source_from_args(args)
    stats = fock.photon_stats(light)
    steps = args.steps if args.steps is not None \
        else distill.iteration_count(stats.std_dev)
    p = distill.plan(args.target, steps,
                     source_window=(light.window_lo, light.window_hi))
    traj = distill.execute(p, light, cooperativity=args.cooperativity)
    rows = []
    for s, rec in zip(p.steps, traj.steps):
        rows.append([str(s.iteration_index), format_angle(s.phi),
                     format_angle(s.theta), rec.outcome,
                     f"{rec.probability:.4f}", _survivor_text(rec.survivors)])
    return {
        "command": "distill",
        "plan": p.to_json(),
        "trajectory": traj.to_json(),
        "source": {"alpha": args.alpha, "squeeze_r": args.squeeze,
                   "window": [light.window_lo, light.window_hi]},
        "_table": (["m", "phi", "theta", "M", "P", "survivors"], rows),
    }


def cmd_explore(args) -> dict:
    light = _source_from_args(args)
    leaves = distill.explore_tree(light, args.depth)
    rows = []
    for leaf in leaves:
        surv = distill._survivors(leaf.final_state) \
            if leaf.cumulative_probability > 0 else []
        rows.append([leaf.outcomes, f"{leaf.cumulative_probability:.4f}",
                     _survivor_text(surv) if surv else "-"])
    return {
        "command": "explore",
        "leaves": [leaf.to_json() for leaf in leaves],
        "_table": (["outcomes", "P", "survivors"], rows),
    }


def cmd_delete_prime(args) -> dict:
    light = _source_from_args(args)
    rec = distill.delete_fock(light, args.prime)
    ideal = distill.idealized_delete(light, args.prime)
    exact = rec.post_state
    lo, hi = exact.window_lo, exact.window_hi
    rows = []
    for n in range(lo, hi + 1):
        ae, ai = abs(exact.amplitude(n)), abs(ideal.amplitude(n))
        rows.append([str(n), f"{ae:.6f}", f"{ai:.6f}", f"{ae - ai:+.6f}"])
    return {
        "command": "delete-prime",
        "prime": args.prime,
        "probability": rec.probability,
        "exact_state": exact.to_json(),
        "idealized_state": ideal.to_json(),
        "_table": (["n", "|amp| exact", "|amp| idealized", "diff"], rows),
    }


def cmd_detuning_table(args) -> dict:
    rows, entries = [], []
    for text in args.phases.split(","):
        phi = parse_angle(text)
        delta = cavity.solve_detuning(phi)
        pair = cavity.reflection_from_cooperativity(args.cooperativity, delta)
        entries.append({"phi": phi, "delta": delta,
                        "r1": [pair.r1.real, pair.r1.imag],
                        "r0": [pair.r0.real, pair.r0.imag]})
        rows.append([f"{delta:.5f}", f"e^(i {format_angle(phi)})",
                     f"{pair.r1.real:.3f}{pair.r1.imag:+.3g}i"])
    return {
        "command": "detuning-table",
        "cooperativity": args.cooperativity,
        "entries": entries,
        "_table": (["Delta", "e^(i phi)", "r1"], rows),
    }


def cmd_source_stats(args) -> dict:
    light = _source_from_args(args)
    stats = fock.photon_stats(light)
    mean, var = fock.source_moments(
        fock.SourceSpec(alpha=args.alpha, squeeze_r=args.squeeze))
    q = distill.iteration_count(math.sqrt(var))
    payload = {
        "command": "source-stats",
        "window": [light.window_lo, light.window_hi],
        "captured_mass": 1.0 - light.discarded_mass,
        "windowed": {"mean": stats.mean, "variance": stats.variance,
                     "std_dev": stats.std_dev, "mandel_q": stats.mandel_q},
        "exact": {"mean": mean, "variance": var},
        "iterations_required": q,
    }
    rows = [["window", f"[{light.window_lo}, {light.window_hi}]"],
            ["captured mass", f"{1.0 - light.discarded_mass:.6f}"],
            ["mean (windowed)", f"{stats.mean:.4f}"],
            ["variance (windowed)", f"{stats.variance:.4f}"],
            ["mandel Q", f"{stats.mandel_q:.4f}"],
            ["iterations required", str(q)]]
    payload["_table"] = (["quantity", "value"], rows)
    return payload


def cmd_pulse_fidelity(args) -> dict:
    cfg = pulse.PulseConfig(
        g=args.g, kappa=args.kappa, gamma=args.gamma,
        phi_target=parse_angle(args.phi), alpha_in=args.alpha,
        t0=args.t0, tau=args.tau, t_max=args.t_max, dt=args.dt,
        trunc_u=args.trunc, trunc_c=args.trunc, trunc_v=args.trunc,
        output_mode=args.output_mode, sample_every=args.sample_every)
    traj = pulse.evolve(cfg)
    fid = pulse.reflection_fidelity(traj)
    if args.csv:
        pulse.export_csv(traj, args.csv)
    rows = [[f"{t:.2f}", f"{f:.6f}", f"{tr:.9f}", f"{e:.3e}",
             f"{nu:.4f}", f"{nc:.4f}", f"{nv:.4f}"]
            for t, f, tr, e, nu, nc, nv in zip(
                traj.times, fid, traj.traces, traj.e_populations,
                traj.input_mode_n, traj.cavity_n, traj.output_mode_n)]
    return {
        "command": "pulse-fidelity",
        "phi": cfg.phi_target,
        "delta": cfg.delta,
        "final_fidelity": float(fid[-1]),
        "times": [float(t) for t in traj.times],
        "fidelity": [float(f) for f in fid],
        "_table": (["t", "F", "trace", "e_pop", "n_in", "n_cav", "n_out"],
                   rows),
    }


# ------------------------------------------------------------------ driver

def _add_source_args(sp):
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--squeeze", type=float, default=0.0)
    sp.add_argument("--window-sigmas", type=float, default=3.0,
                    dest="window_sigmas")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fockdistill",
        description="Fock-state distillation protocol toolkit")
    ap.add_argument("--config", help="JSON or TOML file with argument defaults")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(sp):
        sp.add_argument("--format", choices=["table", "json", "csv"],
                        default="table")
        sp.add_argument("--output", help="write to file instead of stdout")
        sp.add_argument("--seed", type=int, default=None)

    sp = sub.add_parser("plan", help="derive a distillation schedule")
    sp.add_argument("--target", type=int, required=True)
    sp.add_argument("--steps", type=int, required=True)
    common(sp); sp.set_defaults(func=cmd_plan)

    sp = sub.add_parser("distill", help="run the distillation protocol")
    sp.add_argument("--target", type=int, required=True)
    _add_source_args(sp)
    sp.add_argument("--steps", type=int, default=None,
                    help="override the iteration-count formula")
    sp.add_argument("--cooperativity", type=float, default=None,
                    help="finite cooperativity (exact reflection model)")
    common(sp); sp.set_defaults(func=cmd_distill)

    sp = sub.add_parser("explore", help="enumerate all outcome branches")
    _add_source_args(sp)
    sp.add_argument("--depth", type=int, required=True)
    common(sp); sp.set_defaults(func=cmd_explore)

    sp = sub.add_parser("delete-prime", help="delete a prime Fock component")
    _add_source_args(sp)
    sp.add_argument("--prime", type=int, required=True)
    common(sp); sp.set_defaults(func=cmd_delete_prime)

    sp = sub.add_parser("detuning-table",
                        help="detunings and reflection coefficients per phase")
    sp.add_argument("--phases", required=True,
                    help="comma list, e.g. pi/2,pi/4,pi/8")
    sp.add_argument("--cooperativity", type=float, default=250.0)
    common(sp); sp.set_defaults(func=cmd_detuning_table)

    sp = sub.add_parser("source-stats", help="photon statistics of a source")
    _add_source_args(sp)
    common(sp); sp.set_defaults(func=cmd_source_stats)

    sp = sub.add_parser("pulse-fidelity",
                        help="master-equation verification of the phase gate")
    sp.add_argument("--phi", default="pi")
    sp.add_argument("--alpha", type=float, default=1.0)
    sp.add_argument("--g", type=float, default=2 * math.pi * 16)
    sp.add_argument("--kappa", type=float, default=2 * math.pi * 5)
    sp.add_argument("--gamma", type=float, default=2 * math.pi * 0.05)
    sp.add_argument("--tau", type=float, default=20.0)
    sp.add_argument("--t0", type=float, default=70.0)
    sp.add_argument("--t-max", type=float, default=140.0, dest="t_max")
    sp.add_argument("--dt", type=float, default=0.05)
    sp.add_argument("--trunc", type=int, default=4)
    sp.add_argument("--output-mode", choices=["input", "filtered"],
                    default="input", dest="output_mode")
    sp.add_argument("--sample-every", type=int, default=50,
                    dest="sample_every")
    sp.add_argument("--csv", help="write the trajectory CSV here")
    common(sp); sp.set_defaults(func=cmd_pulse_fidelity)
    return ap


def _load_config_defaults(path: str) -> dict:
    if path.endswith(".toml"):
        try:
            import tomllib
        except ModuleNotFoundError:  # Python < 3.11
            import tomli as tomllib
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    with open(path) as fh:
        return json.load(fh)


def _to_csv(payload: dict) -> str:
    headers, rows = payload["_table"]
    lines = [",".join(headers)]
    lines += [",".join(cell.replace(",", ";") for cell in row) for row in rows]
    return "\n".join(lines) + "\n"


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args, remaining = ap.parse_known_args(argv)
    if remaining:
        ap.error(f"unrecognized arguments: {' '.join(remaining)}")
    if args.config:
        defaults = _load_config_defaults(args.config)
        for key, value in defaults.items():
            attr = key.replace("-", "_")
            if hasattr(args, attr):
                setattr(args, attr, value)
    try:
        payload = args.func(args)
    except FockDistillError as exc:
        sys.stderr.write(_dump_json({
            "error": type(exc).__name__, "message": str(exc)}))
        return 1
    fmt = getattr(args, "format", "table")
    if fmt == "table":
        headers, rows = payload["_table"]
        _emit(_render_table(headers, rows), args.output)
    elif fmt == "csv":
        _emit(_to_csv(payload), args.output)
    else:
        payload = {k: v for k, v in payload.items() if not k.startswith("_")}
        _emit(_dump_json(payload), args.output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
