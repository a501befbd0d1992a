"""Command-line front end: ``bench``, ``split``, ``landscape`` and ``qasm``.

Exit codes: 0 success, 1 usage error, 2 data error (bad input files, parse
errors, cache budget exceeded).

Peak memory in bench records is this process's RSS high-water mark. For
per-run numbers measured from outside, wrap the command with GNU time::

    /usr/bin/time -v kronsim bench --qubits 8 --repeats 1 2>&1 | grep "Maximum resident"
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bench
from .cache import DEFAULT_BUDGET, CacheBudgetError
from .circuit import circuit_from_dict, circuit_to_dict
from .gradients import RemapConfig, default_grid
from .qasm import QasmError, export_qasm, parse_qasm

EXIT_USAGE = 1
EXIT_DATA = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _on_off(text: str) -> bool:
    if text.lower() in ("on", "true", "1", "yes"):
        return True
    if text.lower() in ("off", "false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected on/off, got {text!r}")


def _split_arg(text: str) -> int | None:
    if text.lower() == "off":
        return None
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or 'off', got {text!r}") from None
    if value < 2:
        raise argparse.ArgumentTypeError("split width must be >= 2")
    return value


def _add_ansatz_args(p: argparse.ArgumentParser, default_qubits: int = 4) -> None:
    p.add_argument("--ansatz", choices=sorted(bench.ANSATZE), default="su2")
    p.add_argument("--qubits", type=int, default=default_qubits)
    p.add_argument("--layers", type=int, default=1)
    p.add_argument("--range", dest="entangle_range", type=int, default=1, help="CNOT ring offset (strongly)")
    p.add_argument("--seed", type=int, default=0)


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _load_circuit(args):
    if getattr(args, "qasm", None):
        return parse_qasm(Path(args.qasm).read_bytes())
    return bench.build_ansatz(args.ansatz, args.qubits, args.layers, args.entangle_range, seed=args.seed)


def cmd_bench(args) -> int:
    modes = [m.strip() for m in args.mode.split(",") if m.strip()]
    if args.split is not None and not any(m.startswith("split") for m in modes):
        modes.append(f"split-{args.split}")
    modes = [f"split-{args.split}" if m == "split" and args.split is not None else m for m in modes]
    try:
        cfg = bench.BenchConfig(
            ansatz=args.ansatz, n_qubits=args.qubits, layers=args.layers, entangle_range=args.entangle_range,
            batch=args.batch, repeats=args.repeats, passes=args.passes, warmup=args.warmup, modes=tuple(modes),
            split=args.split, seed=args.seed, lr=args.lr, remap=args.remap, budget=args.budget, threads=args.threads,
        )
    except ValueError as exc:
        raise _UsageError(str(exc)) from None
    records = bench.run_bench(cfg)
    _write("".join(r.to_json() + "\n" for r in records), args.out)
    for mode, stats in bench.summarize(records).items():
        if "error" in stats:
            print(f"{mode}: error: {stats['error']}", file=sys.stderr)
        else:
            print(f"{mode}: mean {stats['mean']:.4f}s min {stats['min']:.4f}s over {stats['repeats']} repeats",
                  file=sys.stderr)
    return 0


def cmd_split(args) -> int:
    circuit = _load_circuit(args)
    report = bench.split_report(circuit, args.split)
    text = json.dumps(report, indent=2) + "\n" if args.json else bench.format_split_report(report) + "\n"
    _write(text, args.out)
    return 0


def cmd_landscape(args) -> int:
    if args.grid < 1:
        raise _UsageError("grid must be >= 1")
    circuit = _load_circuit(args)
    grid = default_grid(args.grid) if args.grid > 1 else np.array([-np.pi])
    matrix = bench.landscape(circuit, grid, RemapConfig(enabled=args.remap, half_range=args.half_range))
    _write(bench.landscape_csv(grid, matrix), args.out)
    return 0


def cmd_qasm(args) -> int:
    if args.input:
        src = Path(args.input)
        if src.suffix == ".json":
            circuit = circuit_from_dict(json.loads(src.read_text()))
            _write(export_qasm(circuit), args.out)
        else:
            circuit = parse_qasm(src.read_bytes())
            _write(json.dumps(circuit_to_dict(circuit), indent=2) + "\n", args.out)
        return 0
    circuit = bench.build_ansatz(args.ansatz, args.qubits, args.layers, args.entangle_range, seed=args.seed)
    _write(export_qasm(circuit), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kronsim", description="Batched state-vector simulator benchmarks and tools.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("bench", help="time forward+backward training passes")
    _add_ansatz_args(p)
    p.add_argument("--batch", type=int, default=16)
    p.add_argument("--repeats", type=int, default=15)
    p.add_argument("--passes", type=int, default=100)
    p.add_argument("--warmup", type=int, default=1)
    p.add_argument("--split", type=_split_arg, default=None, help="group width g, or 'off'")
    p.add_argument("--mode", default="cached,naive", help="comma list of cached, naive, split[-g]")
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--remap", type=_on_off, default=False)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="cache budget in complex entries")
    p.add_argument("--threads", type=int, default=1, help="BLAS threads during timing")
    p.add_argument("--out", default=None, help="JSON-lines output (default stdout)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("split", help="show the split plan and cache estimates")
    _add_ansatz_args(p)
    p.add_argument("--qasm", default=None, help="read the circuit from an OpenQASM file")
    p.add_argument("--split", type=_split_arg, required=True)
    p.add_argument("--json", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("landscape", help="absolute-gradient landscape as CSV")
    _add_ansatz_args(p, default_qubits=3)
    p.set_defaults(ansatz="strongly")
    p.add_argument("--qasm", default=None)
    p.add_argument("--remap", type=_on_off, default=False)
    p.add_argument("--half-range", type=float, default=np.pi)
    p.add_argument("--grid", type=int, default=64)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_landscape)

    p = sub.add_parser("qasm", help="convert OpenQASM <-> JSON, or export an ansatz")
    _add_ansatz_args(p, default_qubits=2)
    p.add_argument("--in", dest="input", default=None, help=".qasm (to JSON) or .json (to QASM)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_qasm)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "split", None) is None and args.command == "split":
        parser.error("split needs a group width")
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"kronsim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QasmError, CacheBudgetError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"kronsim: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
