"""Command-line interface.

Exit codes: 0 success, 2 validation error, 3 no crossing found, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .decoder import get_decoder
from .experiments import (
    DEFAULT_POINTS,
    DEFAULT_TRIALS,
    KAPPA_MAX,
    KAPPA_MIN,
    TABLE_CODES,
    THRESHOLD_KAPPA_MAX,
    THRESHOLD_KAPPA_MIN,
    ChannelSpec,
    NoCrossingError,
    crossover_scan,
    default_kappa_grid,
    pseudo_threshold,
    sweep_curve,
    threshold,
)
from .io import report_to_json, sweeps_to_csv, sweep_to_json, write_text
from .lattice import CodeError, Distances, build_code, correctable_weights, qubit_savings_percent
from .noise import ChannelError, format_delta, parse_delta
from .pauli import PauliError, compose, logical_failure, measure_syndrome

EXIT_VALIDATION = 2
EXIT_NO_CROSSING = 3
EXIT_IO = 4


class ValidationError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    d_x: int = 3
    d_z: int = 3
    d_z_list: list[int] = field(default_factory=list)
    delta: float = 1.0
    channel: str = "biased"
    kappa_min: float = KAPPA_MIN
    kappa_max: float = KAPPA_MAX
    points: int = DEFAULT_POINTS
    trials: int = DEFAULT_TRIALS
    master_seed: int = 1
    workers: int = 1
    out: str | None = None
    format: str = "csv"

    def validate(self) -> None:
        try:
            Distances(self.d_x, self.d_z)
            for dz in self.d_z_list:
                Distances(self.d_x, dz)
            self.channel_spec()
            default_kappa_grid(self.kappa_min, self.kappa_max, self.points)
        except (CodeError, ChannelError, ValueError) as exc:
            raise ValidationError(str(exc)) from exc
        if self.command == "threshold" and len(self.d_z_list) < 2:
            raise ValidationError("--dz-list needs at least two distances")
        if self.trials < 1:
            raise ValidationError("--trials must be >= 1")
        if self.workers < 0:
            raise ValidationError("--workers must be >= 0")
        if not 0 <= self.master_seed < 2**64:
            raise ValidationError("--seed must fit in 64 bits")
        if self.format not in ("csv", "json"):
            raise ValidationError("--format must be csv or json")

    def channel_spec(self) -> ChannelSpec:
        if self.channel == "x_only":
            return ChannelSpec(0.0, "x_only")
        if self.channel == "z_only":
            return ChannelSpec(math.inf, "z_only")
        if self.channel != "biased":
            raise ValidationError(f"unknown channel {self.channel!r}")
        if self.delta < 1:
            raise ChannelError(f"bias must be >= 1, got {self.delta}")
        return ChannelSpec(self.delta, "biased")

    def grid(self) -> np.ndarray:
        return default_kappa_grid(self.kappa_min, self.kappa_max, self.points)

    @property
    def n_workers(self) -> int:
        return self.workers or (os.cpu_count() or 1)


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _delta(text: str) -> float:
    try:
        return parse_delta(text)
    except (ValueError, ChannelError):
        raise argparse.ArgumentTypeError(f"bias must be a number or 'inf', got {text!r}")


def _add_code_args(p: argparse.ArgumentParser, dz: bool = True) -> None:
    p.add_argument("--dx", type=int, default=3, help="bit-flip distance (odd, >= 3)")
    if dz:
        p.add_argument("--dz", type=int, default=3, help="phase-flip distance (odd, >= 3)")


def _add_run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--delta", type=_delta, default=1.0, help="bias p_z/p_x (number or 'inf')")
    p.add_argument("--channel", choices=("biased", "x_only", "z_only"), default="biased")
    p.add_argument("--kappa-min", type=float, default=KAPPA_MIN)
    p.add_argument("--kappa-max", type=float, default=KAPPA_MAX)
    p.add_argument("--points", type=int, default=DEFAULT_POINTS)
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--workers", type=int, default=1, help="worker processes (0 = all cores)")
    p.add_argument("--out", help="write results to this file")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rectsurf", description="Rectangular surface codes under biased Pauli noise.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    code = sub.add_parser("code", help="code construction")
    code_sub = code.add_subparsers(dest="code_command", required=True)
    info = code_sub.add_parser("info", help="print stabilizers and logical operators")
    _add_code_args(info)

    sweep = sub.add_parser("sweep", help="logical error rate over a kappa grid")
    _add_code_args(sweep)
    _add_run_args(sweep)

    pt = sub.add_parser("pseudo-threshold", help="crossing of P_L(p) with P_L = p")
    _add_code_args(pt)
    _add_run_args(pt)
    pt.add_argument("--refine", action="store_true", help="re-sample near the crossing")
    pt.add_argument("--tol", type=float, default=0.002, help="refinement bracket width")

    th = sub.add_parser("threshold", help="crossing of curves with fixed d_x and growing d_z")
    _add_code_args(th, dz=False)
    th.add_argument("--dz-list", type=_int_list, required=True)
    _add_run_args(th)
    th.set_defaults(kappa_min=THRESHOLD_KAPPA_MIN, kappa_max=THRESHOLD_KAPPA_MAX)

    scan = sub.add_parser("crossover-scan", help="pseudo-threshold table over biases and codes")
    scan.add_argument("--deltas", type=lambda s: [parse_delta(t) for t in s.split(",")], default=list(range(1, 11)))
    scan.add_argument("--codes", default=",".join(f"{a}x{b}" for a, b in TABLE_CODES), help="e.g. 3x3,3x5")
    _add_run_args(scan)

    one = sub.add_parser("decode-one", help="decode a single given error and print a trace")
    _add_code_args(one)
    one.add_argument("--error", required=True, help='e.g. "Y6,Z3"')
    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command)
    for attr, name in (
        ("d_x", "dx"),
        ("d_z", "dz"),
        ("d_z_list", "dz_list"),
        ("delta", "delta"),
        ("channel", "channel"),
        ("kappa_min", "kappa_min"),
        ("kappa_max", "kappa_max"),
        ("points", "points"),
        ("trials", "trials"),
        ("master_seed", "seed"),
        ("workers", "workers"),
        ("out", "out"),
        ("format", "format"),
    ):
        if getattr(args, name, None) is not None:
            setattr(cfg, attr, getattr(args, name))
    if cfg.d_z_list:
        cfg.d_z = cfg.d_z_list[0]
    cfg.validate()
    return cfg


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        write_text(cfg.out, text)
    else:
        sys.stdout.write(text)


def cmd_code_info(cfg: RunConfig) -> int:
    code = build_code(cfg.d_x, cfg.d_z)
    t_x, t_z = correctable_weights(code)
    out = [
        f"code {code.distances}: {code.n_data} data qubits, "
        f"{len(code.x_stabilizers)} X-stabilizers, {len(code.z_stabilizers)} Z-stabilizers",
        f"correctable weights: t_x={t_x} t_z={t_z}",
    ]
    if code.d_z >= code.d_x:
        out.append(f"qubit savings vs [{code.d_z},{code.d_z}]: {qubit_savings_percent(code.distances):.2f}%")
    for kind in ("X", "Z"):
        for i, s in enumerate(code.stabilizers(kind)):
            out.append(f"{kind}{i}: {' '.join(map(str, s.support))}")
    for i, rep in enumerate(code.logical_x_reps):
        out.append(f"X_L[{i}]: {' '.join(map(str, rep))}")
    for i, rep in enumerate(code.logical_z_reps):
        out.append(f"Z_L[{i}]: {' '.join(map(str, rep))}")
    print("\n".join(out))
    return 0


def _sweep(cfg: RunConfig, d_z: int):
    return sweep_curve(build_code(cfg.d_x, d_z), cfg.channel_spec(), cfg.grid(), cfg.trials, cfg.master_seed, cfg.n_workers)


def cmd_sweep(cfg: RunConfig) -> int:
    result = _sweep(cfg, cfg.d_z)
    _emit(cfg, sweep_to_json(result) if cfg.format == "json" else sweeps_to_csv([result]))
    return 0


def _report(cfg: RunConfig, name: str, est, curves) -> None:
    print(f"{name} = {est.value:.4f} +/- {est.stderr:.4f}  bracket [{est.bracket[0]:.4f}, {est.bracket[1]:.4f}]  ({est.method})")
    for c in est.pairwise if len(est.pairwise) > 1 else ():
        print(f"  pair crossing {c.value:.4f} +/- {c.stderr:.4f}  bracket [{c.bracket[0]:.4f}, {c.bracket[1]:.4f}]")
    if cfg.out:
        text = sweeps_to_csv(curves) if cfg.format == "csv" else report_to_json(est, curves)
        write_text(cfg.out, text)


def cmd_pseudo_threshold(cfg: RunConfig, refine: bool = False, tol: float = 0.002) -> int:
    curve = _sweep(cfg, cfg.d_z)
    est = pseudo_threshold(curve, refine=refine, tol=tol, workers=cfg.n_workers)
    _report(cfg, f"gamma[{cfg.d_x},{cfg.d_z}]", est, [curve])
    return 0


def cmd_threshold(cfg: RunConfig) -> int:
    curves = [_sweep(cfg, dz) for dz in cfg.d_z_list]
    est = threshold(curves)
    _report(cfg, f"gamma* (d_x={cfg.d_x}, d_z={','.join(map(str, cfg.d_z_list))})", est, curves)
    return 0


def cmd_crossover_scan(cfg: RunConfig, deltas, codes) -> int:
    scan = crossover_scan(deltas, codes, cfg.trials, cfg.master_seed, cfg.grid(), cfg.n_workers)
    header = ["delta"] + [f"gamma_{a},{b}" for a, b in codes]
    lines = [",".join(header)]
    for delta in deltas:
        vals = [scan.gamma(a, b, delta) for a, b in codes]
        lines.append(",".join([str(format_delta(delta))] + ["nan" if v is None else f"{v:.4f}" for v in vals]))
    table = "\n".join(lines) + "\n"
    print(table, end="")
    print(f"crossover delta: {'none' if scan.crossover is None else format_delta(scan.crossover)}")
    if cfg.out:
        if cfg.format == "json":
            doc = {
                "deltas": [format_delta(d) for d in deltas],
                "codes": [list(c) for c in codes],
                "estimates": [
                    {"dx": a, "dz": b, "delta": format_delta(d), "estimate": None if e is None else e.to_dict()}
                    for (a, b, d), e in scan.estimates.items()
                ],
                "crossover": None if scan.crossover is None else format_delta(scan.crossover),
                "seed": cfg.master_seed,
                "trials": cfg.trials,
                "kappa_grid": [float(k) for k in cfg.grid()],
            }
            write_text(cfg.out, json.dumps(doc, indent=2) + "\n")
        else:
            write_text(cfg.out, table)
    return 0


def decode_trace(d_x: int, d_z: int, error_text: str) -> str:
    code = build_code(d_x, d_z)
    try:
        error = PauliError.parse(error_text, code.n_data)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc
    syndrome = measure_syndrome(code, error)
    from_z, from_x = get_decoder(code).decode_verbose(syndrome)
    correction = PauliError(from_z.correction, from_x.correction)
    residual = compose(error, correction)
    x_fail, z_fail = logical_failure(code, residual)

    def bits(v):
        return "[" + ", ".join(str(int(b)) for b in v) + "]"

    def pairs(kind, result):
        if not result.matching.pairs:
            return "none"
        g = result.graph
        parts = []
        for a, b in result.matching.pairs:
            w = g.distances[a, g.boundary if b is None else b]
            parts.append(f"{kind}{a}-{'boundary' if b is None else f'{kind}{b}'} (w={w:g})")
        return "; ".join(parts)

    x_def = np.flatnonzero(syndrome.x_bits).tolist()
    z_def = np.flatnonzero(syndrome.z_bits).tolist()
    lines = [
        f"code: {code.distances} ({code.n_data} data qubits)",
        f"error: {error}",
        f"x-syndrome: {bits(syndrome.x_bits)}",
        f"z-syndrome: {bits(syndrome.z_bits)}",
        f"X defects ({len(x_def)}): {' '.join(f'X{i}' for i in x_def) or 'none'}",
        f"Z defects ({len(z_def)}): {' '.join(f'Z{i}' for i in z_def) or 'none'}",
        f"Z-graph matching (X correction): {pairs('Z', from_z)}  total weight {from_z.matching.weight:g}",
        f"X-graph matching (Z correction): {pairs('X', from_x)}  total weight {from_x.matching.weight:g}",
        f"correction: {correction}",
        f"residual: {residual}",
        f"logical failure: x={x_fail} z={z_fail}",
    ]
    return "\n".join(lines) + "\n"


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "decode-one":
            Distances(args.dx, args.dz)
            sys.stdout.write(decode_trace(args.dx, args.dz, args.error))
            return 0
        if args.command == "crossover-scan":
            args.dx = args.dz = None
            cfg = _config(args)
            try:
                codes = [tuple(int(x) for x in c.split("x")) for c in args.codes.split(",")]
                for a, b in codes:
                    Distances(a, b)
            except (ValueError, CodeError) as exc:
                raise ValidationError(f"bad --codes: {exc}") from exc
            return cmd_crossover_scan(cfg, args.deltas, codes)
        cfg = _config(args)
        if args.command == "code":
            return cmd_code_info(cfg)
        if args.command == "sweep":
            return cmd_sweep(cfg)
        if args.command == "pseudo-threshold":
            return cmd_pseudo_threshold(cfg, args.refine, args.tol)
        if args.command == "threshold":
            return cmd_threshold(cfg)
    except (ValidationError, CodeError, ChannelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NoCrossingError as exc:
        print(f"no crossing: {exc}", file=sys.stderr)
        return EXIT_NO_CROSSING
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    parser.error(f"unknown command {args.command}")
    return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
