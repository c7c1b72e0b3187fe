"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 invalid input.
Every command writes one JSON document (or a bare integer for ``lower-bound``)
to standard output.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import circuit as cir
from .gates import H, I2, S_PHASE, X, Y, Z
from .linalg import NotUnitaryError, infidelity, phase_distance, require_unitary
from .search import CostGuardError, K_MAX_GUARD, SearchConfig, optimality_evidence
from .structure import kak_decompose, kak_reconstruct
from .synthesis import (
    FREDKIN,
    ccu_matrix,
    classify_ccu,
    lower_bound,
    synth_ccu,
    synth_fredkin,
)

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_INPUT = 0, 1, 2, 3
VERIFY_TOL = 1e-9

NAMED_U = {
    "I": I2,
    "X": X,
    "Y": Y,
    "Z": Z,
    "H": H,
    "S": S_PHASE,
    "T": np.diag([1, np.exp(0.25j * np.pi)]),
}


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


def _emit(doc) -> None:
    json.dump(doc, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _matrix_doc(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _load_matrix_file(path: str, shape: tuple[int, int]) -> np.ndarray:
    try:
        doc = json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if isinstance(doc, dict):
        doc = doc.get("matrix")
    try:
        return cir.decode_matrix(doc, "$", shape)
    except cir.CircuitParseError as exc:
        raise InputError(f"{path}: {exc}") from None


def _parse_u(args) -> np.ndarray:
    given = [v is not None for v in (args.u, args.diag, args.u_json)]
    if sum(given) != 1:
        raise UsageError("give exactly one of --u NAME, --diag T1 T2, --u-json MATRIX")
    if args.u is not None:
        key = args.u.upper()
        if key not in NAMED_U:
            raise UsageError(f"unknown named gate {args.u!r}; choose from {', '.join(NAMED_U)}")
        u = NAMED_U[key]
    elif args.diag is not None:
        t1, t2 = args.diag
        u = np.diag([np.exp(1j * t1), np.exp(1j * t2)])
    else:
        try:
            u = cir.decode_matrix(json.loads(args.u_json), "--u-json", (2, 2))
        except (json.JSONDecodeError, cir.CircuitParseError) as exc:
            raise InputError(f"--u-json: {exc}") from None
    try:
        return require_unitary(u, 1e-10, "u")
    except NotUnitaryError as exc:
        raise InputError(str(exc)) from None


def _resolve_target(args) -> tuple[str, np.ndarray, list]:
    """Target name, 8x8 matrix, and known constructions usable as witnesses."""
    kind = args.target
    if kind == "fredkin":
        return "fredkin", FREDKIN, [synth_fredkin()]
    if kind == "toffoli":
        return "toffoli", ccu_matrix(X), [synth_ccu(X)]
    if kind == "ccu":
        u = _parse_u(args)
        return "ccu", ccu_matrix(u), [synth_ccu(u)]
    if kind == "file":
        if not args.target_file:
            raise UsageError("target 'file' needs --target-file PATH")
        m = _load_matrix_file(args.target_file, (8, 8))
        try:
            require_unitary(m, 1e-9, "target")
        except NotUnitaryError as exc:
            raise InputError(str(exc)) from None
        return args.target_file, m, []
    raise UsageError(f"unknown target {kind!r}")


def _add_u_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--u", metavar="NAME", help="named one-qubit gate: " + ", ".join(NAMED_U))
    p.add_argument("--diag", nargs=2, type=float, metavar=("T1", "T2"), help="u = diag(e^{i T1}, e^{i T2}), radians")
    p.add_argument("--u-json", metavar="MATRIX", help="inline 2x2 matrix, rows of [re, im] pairs")


def _add_target(p: argparse.ArgumentParser, choices) -> None:
    p.add_argument("target", choices=choices)
    _add_u_options(p)


# ---------------------------------------------------------------------------
# commands


def cmd_lower_bound(args) -> int:
    if args.n < 2:
        raise UsageError("n must be at least 2")
    print(lower_bound(args.n))
    return EXIT_OK


def cmd_synth(args) -> int:
    name, target, _ = _resolve_target(args)
    if name == "fredkin":
        c = synth_fredkin(merge=not args.raw)
    else:
        u = X if name == "toffoli" else _parse_u(args)
        c = synth_ccu(u)
    dist = phase_distance(cir.circuit_unitary(c), target)
    if dist >= VERIFY_TOL:
        print(f"self-check failed: phase distance {dist:.3e}", file=sys.stderr)
        return EXIT_VERIFY
    _emit(cir.circuit_to_dict(c))
    return EXIT_OK


def cmd_classify(args) -> int:
    u = _parse_u(args)
    _emit(classify_ccu(u).to_dict())
    return EXIT_OK


def cmd_verify(args) -> int:
    text = _read_text(args.circuit)
    try:
        c = cir.parse(text)
    except (cir.CircuitParseError, cir.GateValidationError) as exc:
        raise InputError(str(exc)) from None
    name, target, _ = _resolve_target(args)
    u = cir.circuit_unitary(c)
    dist = phase_distance(u, target)
    ok = dist < VERIFY_TOL
    _emit(
        {
            "target": name,
            "phase_distance": dist,
            "infidelity": infidelity(u, target),
            "gate_count": len(c),
            "merged_gate_count": len(cir.merge_adjacent(c)),
            "tolerance": VERIFY_TOL,
            "verified": ok,
        }
    )
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_evidence(args) -> int:
    if not 1 <= args.kmax <= K_MAX_GUARD:
        raise UsageError(f"--kmax must be between 1 and {K_MAX_GUARD}")
    name, target, witnesses = _resolve_target(args)
    cfg = SearchConfig(
        restarts=args.restarts,
        max_iterations=args.max_iterations,
        seed=args.seed,
        workers=args.workers,
    )
    try:
        report = optimality_evidence(target, args.kmax, cfg, witnesses, target_name=name)
    except CostGuardError as exc:
        raise UsageError(str(exc)) from None
    _emit(report.to_dict())
    return EXIT_OK


def cmd_kak(args) -> int:
    m = _load_matrix_file(args.file, (4, 4))
    try:
        k = kak_decompose(m)
    except NotUnitaryError as exc:
        raise InputError(str(exc)) from None
    _emit(
        {
            "alpha": list(k.alpha),
            "global_phase": k.global_phase,
            "u_a": _matrix_doc(k.u_a),
            "u_b": _matrix_doc(k.u_b),
            "v_a": _matrix_doc(k.v_a),
            "v_b": _matrix_doc(k.v_b),
            "reconstruction_error": phase_distance(kak_reconstruct(k), m),
        }
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ccsynth", description="Two-qubit-gate synthesis of three-qubit gates.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lower-bound", help="two-qubit gate lower bound for generic n-qubit gates")
    p.add_argument("n", type=int)
    p.set_defaults(func=cmd_lower_bound)

    p = sub.add_parser("synth", help="emit an optimal circuit as JSON")
    _add_target(p, ["fredkin", "toffoli", "ccu"])
    p.add_argument("--raw", action="store_true", help="fredkin only: emit the unmerged seven-gate sequence")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("classify", help="gate-count class of controlled-controlled-u")
    _add_u_options(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("verify", help="check a circuit file against a target")
    p.add_argument("circuit", help="circuit JSON file, or - for stdin")
    _add_target(p, ["fredkin", "toffoli", "ccu", "file"])
    p.add_argument("--target-file", help="8x8 target matrix JSON (with target 'file')")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("evidence", help="numerical gate-count evidence by structure search")
    _add_target(p, ["fredkin", "toffoli", "ccu", "file"])
    p.add_argument("--target-file", help="8x8 target matrix JSON (with target 'file')")
    p.add_argument("--kmax", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--max-iterations", type=int, default=2000)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_evidence)

    p = sub.add_parser("kak", help="canonical decomposition of a 4x4 unitary from a JSON file")
    p.add_argument("file")
    p.set_defaults(func=cmd_kak)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"{parser.prog} {args.command}: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
