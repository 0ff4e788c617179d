"""Command-line interface.

Exit codes: ``classify`` returns 0 for CSM, 1 for non-CSM and 2 when no
verdict exists (vanishing Pauli eigenvalue or unavailable principal log).
Malformed input gives 64 and other failures 70; errors are reported on
stderr as ``{"exit_code", "message", "field"}``.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import sys

import numpy as np

from . import io
from .channel import twirl
from .lindblad import InconclusiveError, classify_channel
from .pauli import PauliParseError, pauli_from_label, pauli_matrix
from .plmodel import IllDefinedError, RankDeficientError, fit_sparse_lambda
from .qem import mitigation_estimate, product_state
from .scenarios import default_workers, hadamard_report, sqrtx_report, sweep_phase_diagram

EXIT_CSM = 0
EXIT_NON_CSM = 1
EXIT_NO_VERDICT = 2
EXIT_BAD_INPUT = 64
EXIT_FAILURE = 70


class CliError(Exception):
    def __init__(self, code: int, message: str, field: str | None = None):
        super().__init__(message)
        self.code = code
        self.field = field


class _Parser(argparse.ArgumentParser):
    # usage errors must not collide with the verdict exit codes
    def error(self, message):
        raise CliError(EXIT_BAD_INPUT, f"{self.prog}: {message}", None)


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(obj: dict, args) -> None:
    if getattr(args, "timestamp", False):
        obj = {**obj, "generated_at": _dt.datetime.now(_dt.timezone.utc).isoformat()}
    _emit(io.dumps(obj), getattr(args, "out", None))


def cmd_classify(args) -> int:
    ch = io.channel_from_json(io.load_json(args.input))
    try:
        verdict = classify_channel(ch, tol=args.tol)
    except (IllDefinedError, InconclusiveError) as exc:
        raise CliError(EXIT_NO_VERDICT, str(exc), "data") from exc
    _emit_json(verdict.to_json(), args)
    return EXIT_CSM if verdict.is_csm else EXIT_NON_CSM


def cmd_twirl(args) -> int:
    ch = io.channel_from_json(io.load_json(args.input))
    _emit_json(io.pauli_channel_to_json(twirl(ch)), args)
    return 0


def cmd_convert(args) -> int:
    ch = io.channel_from_json(io.load_json(args.input))
    _emit_json(io.channel_to_json(ch, args.to), args)
    return 0


def cmd_demo(args) -> int:
    if args.scenario == "hadamard":
        report = hadamard_report(args.gphit, args.gt)
    else:
        report = sqrtx_report(args.gamma_tg, args.gammaphi_tg, args.theta)
    _emit_json(report, args)
    return 0


def _positive(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError("tolerance must be positive")
    return v


def _parse_grid(text: str) -> tuple[int, int]:
    try:
        a, b = text.lower().split("x")
        grid = int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like 60x60, got {text!r}") from None
    if min(grid) < 2:
        raise argparse.ArgumentTypeError("grid needs at least 2 points per axis")
    return grid


def cmd_sweep(args) -> int:
    result = sweep_phase_diagram(args.grid, args.gmax, args.gpmax, workers=args.workers, refine=bool(args.boundary))
    _emit(result.to_csv(), args.out)
    if args.boundary:
        _emit(result.boundary_csv(), args.boundary)
    return 0


def cmd_fit(args) -> int:
    measured, weights, support, allow = io.fit_input_from_json(io.load_json(args.input))
    if args.allow_negative is not None:
        allow = args.allow_negative
    try:
        fit = fit_sparse_lambda(measured, support, allow_negative=allow, weights=weights or None)
    except RankDeficientError as exc:
        raise CliError(EXIT_BAD_INPUT, str(exc), "support") from exc
    except ValueError as exc:
        raise CliError(EXIT_BAD_INPUT, str(exc), "f") from exc
    _emit_json({"allow_negative": allow, "residual": fit.residual, "params": io.pl_to_json(fit.params)}, args)
    return 0


def cmd_sample(args) -> int:
    pl = io.pl_from_json(io.load_json(args.pl))
    channel = io.channel_from_json(io.load_json(args.channel)) if args.channel else None
    try:
        obs = pauli_matrix(pauli_from_label(args.observable))
    except PauliParseError as exc:
        raise CliError(EXIT_BAD_INPUT, str(exc), "observable") from exc
    if obs.shape[0] != 2**pl.n:
        raise CliError(EXIT_BAD_INPUT, f"observable acts on the wrong number of qubits (n={pl.n})", "observable")
    try:
        rho = product_state(args.state, pl.n)
    except ValueError as exc:
        raise CliError(EXIT_BAD_INPUT, str(exc), "state") from exc
    try:
        est = mitigation_estimate(channel, pl, args.beta, obs, rho, args.shots, args.seed, args.workers)
    except ValueError as exc:
        raise CliError(EXIT_BAD_INPUT, str(exc), "pl") from exc
    _emit_json(
        {"estimate": est.estimate, "stderr": est.stderr, "total_gamma": est.total_gamma, "shots": est.shots},
        args,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--timestamp", action="store_true", help="add a generated_at field to JSON output")

    parser = _Parser(
        prog="pltwirl", description="Pauli twirling, Pauli-Lindblad parameters and channel Markovianity."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common], help="CSM verdict for a channel file")
    p.add_argument("input")
    p.add_argument("--tol", type=_positive, default=1e-10)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("twirl", parents=[common], help="Pauli-twirl a channel file")
    p.add_argument("input")
    p.set_defaults(func=cmd_twirl)

    p = sub.add_parser("convert", parents=[common], help="change a channel file's representation")
    p.add_argument("input")
    p.add_argument("--to", choices=io.REPRS, required=True)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("demo", help="worked examples")
    demo = p.add_subparsers(dest="scenario", required=True)
    d = demo.add_parser("hadamard", parents=[common], help="Hadamard dephasing (and relaxation)")
    d.add_argument("--gphit", type=float, required=True, help="gamma_phi * t")
    d.add_argument("--gt", type=float, default=0.0, help="gamma * t (relaxation)")
    d.set_defaults(func=cmd_demo)
    d = demo.add_parser("sqrtx", parents=[common], help="noisy sqrt(X) gate")
    d.add_argument("--gamma-tg", type=float, required=True)
    d.add_argument("--gammaphi-tg", type=float, required=True)
    d.add_argument("--theta", type=float, default=np.pi / 2, help="rotation angle (default pi/2)")
    d.set_defaults(func=cmd_demo)

    p = sub.add_parser("sweep", help="transition-diagram sweep to CSV")
    p.add_argument("--grid", type=_parse_grid, default=(60, 60))
    p.add_argument("--gmax", type=float, default=3.0)
    p.add_argument("--gpmax", type=float, default=3.0)
    p.add_argument("--workers", type=int, default=None, help="process count (default: $PLTWIRL_WORKERS or 1)")
    p.add_argument("--boundary", help="also write the refined post-twirl boundary to this CSV")
    p.add_argument("--out", help="output CSV (default: stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit", parents=[common], help="least-squares PL fit")
    p.add_argument("--input", required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--allow-negative", dest="allow_negative", action="store_true", default=None)
    g.add_argument("--no-negative", dest="allow_negative", action="store_false")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sample", parents=[common], help="quasi-probabilistic mitigation estimate")
    p.add_argument("--pl", required=True, help="PL parameter file of the noise model")
    p.add_argument("--channel", help="channel under test (default: the PL channel itself)")
    p.add_argument("--beta", type=float, default=-1.0)
    p.add_argument("--shots", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--observable", default="Z")
    p.add_argument("--state", default="zero")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "workers", 0) is None:
            args.workers = default_workers()
        return args.func(args)
    except CliError as exc:
        code, message, field = exc.code, str(exc), exc.field
    except io.FormatError as exc:
        code, message, field = EXIT_BAD_INPUT, str(exc), exc.field
    except Exception as exc:  # noqa: BLE001 - uniform envelope
        code, message, field = EXIT_FAILURE, f"{type(exc).__name__}: {exc}", None
    sys.stderr.write(json.dumps({"exit_code": code, "message": message, "field": field}) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
