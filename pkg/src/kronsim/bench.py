"""Timed training loops, split-plan reports and gradient landscapes."""
from __future__ import annotations

import csv
import io
import json
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from threadpoolctl import threadpool_limits

from .cache import DEFAULT_BUDGET, CacheBudgetError
from .circuit import ANSATZE, Circuit, GateKind
from .executor import FullWidthExecutor, SplitExecutor, zero_state
from .gradients import LossSpec, RemapConfig, gradient_landscape, shift_gradient
from .splitter import split_circuit

ENTRY_BYTES = 16  # complex128
# Embedding angles are drawn from [0, 1). Over a full period the embedded
# inputs average to the maximally mixed state and the loss cannot depend on
# the weights, which would leave nothing to train.
INPUT_RANGE = (0.0, 1.0)


def build_ansatz(name: str, n_qubits: int, layers: int, entangle_range: int = 1, seed: int | None = None) -> Circuit:
    if name not in ANSATZE:
        raise ValueError(f"unknown ansatz {name!r}; choose from {sorted(ANSATZE)}")
    if name == "strongly":
        return ANSATZE[name](n_qubits, layers, entangle_range, seed=seed)
    return ANSATZE[name](n_qubits, layers, seed=seed)


@dataclass
class BenchConfig:
    ansatz: str = "su2"
    n_qubits: int = 4
    layers: int = 1
    entangle_range: int = 1
    batch: int = 16
    repeats: int = 15
    passes: int = 100
    warmup: int = 1
    modes: tuple[str, ...] = ("cached", "naive")
    split: int | None = None
    seed: int = 0
    lr: float = 0.1
    remap: bool = False
    budget: int | None = DEFAULT_BUDGET
    threads: int = 1

    def __post_init__(self):
        self.modes = tuple(self.modes)
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if self.passes < 1:
            raise ValueError("passes must be >= 1")
        if self.batch < 1:
            raise ValueError("batch must be >= 1")
        if self.warmup < 0:
            raise ValueError("warmup must be >= 0")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        for mode in self.modes:
            if mode not in ("cached", "naive") and not mode.startswith("split"):
                raise ValueError(f"unknown mode {mode!r}")
            if mode == "split" and self.split is None:
                raise ValueError("mode 'split' needs a split width")

    def split_width(self, mode: str) -> int:
        return self.split if mode == "split" else int(mode.split("-", 1)[1])


@dataclass
class BenchRecord:
    """Timings of one repeat of one execution mode."""

    mode: str
    repeat: int
    config: dict
    times: list[float] = field(default_factory=list)
    mean: float | None = None
    min: float | None = None
    total: float | None = None
    peak_memory_bytes: int | None = None
    losses: list[float] = field(default_factory=list)
    threads: int = 1
    error: str | None = None
    final_state: np.ndarray | None = field(default=None, repr=False, compare=False)

    def to_json(self) -> str:
        data = asdict(self)
        data.pop("final_state")
        if data["peak_memory_bytes"] is None:
            data["peak_memory_bytes"] = "unavailable"
        return json.dumps(data)


def peak_rss_bytes() -> int | None:
    """Resident-set high-water mark of this process, if the platform reports it."""
    try:
        import resource
    except ImportError:
        return None
    rss = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    # Linux reports KiB, macOS bytes
    return int(rss if sys.platform == "darwin" else rss * 1024)


def _make_engine(mode: str, circuit: Circuit, cfg: BenchConfig):
    axes = [GateKind.RX] * circuit.n_qubits
    if mode == "cached":
        return FullWidthExecutor(circuit, budget=cfg.budget, embedding_axes=axes)
    if mode == "naive":
        return FullWidthExecutor(circuit, naive=True, budget=cfg.budget, embedding_axes=axes)
    plan = split_circuit(circuit, cfg.split_width(mode))
    return SplitExecutor(circuit, plan, budget=cfg.budget, embedding_axes=axes)


def sample_inputs(rng: np.random.Generator, batch: int, n_qubits: int) -> np.ndarray:
    return rng.uniform(*INPUT_RANGE, size=(batch, n_qubits))


def train(engine, circuit: Circuit, values: np.ndarray, rng: np.random.Generator, passes: int, batch: int,
          lr: float, remap: RemapConfig, loss: LossSpec = LossSpec(), timer: list | None = None):
    """Plain gradient descent on random embedded batches.

    Each pass samples embedding angles, runs forward and parameter-shift
    backward, and updates ``values`` in place. Returns the per-pass losses
    and the last forward state.
    """
    losses, out = [], None
    for _ in range(passes):
        t0 = time.perf_counter()
        x = sample_inputs(rng, batch, circuit.n_qubits)
        state = engine.embed(x)
        value, grad, out = shift_gradient(engine, circuit, values, loss, remap, state)
        values -= lr * grad
        if timer is not None:
            timer.append(time.perf_counter() - t0)
        losses.append(value)
    return losses, out


def run_bench(cfg: BenchConfig) -> list[BenchRecord]:
    """Run every requested mode; a mode that cannot be built yields one error record."""
    circuit = build_ansatz(cfg.ansatz, cfg.n_qubits, cfg.layers, cfg.entangle_range, seed=cfg.seed)
    initial = circuit.params.values
    remap = RemapConfig(enabled=cfg.remap)
    echo = {k: v for k, v in asdict(cfg).items()}
    records: list[BenchRecord] = []
    for mode in cfg.modes:
        label = f"split-{cfg.split}" if mode == "split" else mode
        try:
            engine = _make_engine(mode, circuit, cfg)
        except CacheBudgetError as exc:
            records.append(BenchRecord(label, 0, echo, error=str(exc), threads=cfg.threads,
                                       peak_memory_bytes=peak_rss_bytes()))
            continue
        with threadpool_limits(limits=cfg.threads):
            if cfg.warmup:
                train(engine, circuit, initial.copy(), np.random.default_rng(cfg.seed + 1),
                      cfg.warmup, cfg.batch, cfg.lr, remap)
            for rep in range(cfg.repeats):
                times: list[float] = []
                losses, out = train(engine, circuit, initial.copy(), np.random.default_rng(cfg.seed),
                                    cfg.passes, cfg.batch, cfg.lr, remap, timer=times)
                records.append(BenchRecord(
                    label, rep, echo, times=times, mean=float(np.mean(times)), min=float(np.min(times)),
                    total=float(np.sum(times)), peak_memory_bytes=peak_rss_bytes(), losses=losses,
                    threads=cfg.threads, final_state=out,
                ))
    return records


def summarize(records: list[BenchRecord]) -> dict[str, dict]:
    """Per mode: mean and fastest repeat total (wall seconds)."""
    out: dict[str, dict] = {}
    for mode in dict.fromkeys(r.mode for r in records):
        rs = [r for r in records if r.mode == mode]
        errors = [r.error for r in rs if r.error]
        if errors:
            out[mode] = {"error": errors[0]}
            continue
        totals = [r.total for r in rs]
        out[mode] = {"repeats": len(totals), "mean": float(np.mean(totals)), "min": float(np.min(totals))}
    return out


def gate_cache_bytes(circuit: Circuit, width: int, gate_indices=None) -> int:
    """Estimated expanded-matrix bytes for the given gates expanded at ``width``."""
    indices = range(len(circuit.gates)) if gate_indices is None else gate_indices
    per = 4**width * ENTRY_BYTES
    return sum((2 if circuit.gates[i].kind.parametric else 1) * per for i in indices)


def split_report(circuit: Circuit, max_qubits: int) -> dict:
    plan = split_circuit(circuit, max_qubits)
    groups = [
        {
            "qubits": list(g.qubits),
            "gate_count": len(g.gates),
            "width": g.width,
            "cache_bytes": gate_cache_bytes(circuit, g.width, g.gates),
        }
        for g in plan.groups
    ]
    total = sum(g["cache_bytes"] for g in groups)
    # unsplit baseline counts the parametric gates only, at full width
    parametric = [i for i, g in enumerate(circuit.gates) if g.kind.parametric]
    unsplit = gate_cache_bytes(circuit, circuit.n_qubits, parametric)
    return {
        "n_qubits": circuit.n_qubits,
        "max_qubits": max_qubits,
        "groups": groups,
        "split_cache_bytes": total,
        "unsplit_cache_bytes": unsplit,
        "ratio": total / unsplit if unsplit else 0.0,
        "plan": plan.to_dict(),
    }


def format_split_report(report: dict) -> str:
    lines = [f"{len(report['groups'])} groups (max_qubits={report['max_qubits']}, W={report['n_qubits']})"]
    for i, g in enumerate(report["groups"]):
        lines.append(
            f"group {i}: qubits={g['qubits']} gates={g['gate_count']} width={g['width']} cache_bytes={g['cache_bytes']}"
        )
    lines.append(f"split total: {report['split_cache_bytes']} bytes")
    lines.append(f"unsplit estimate: {report['unsplit_cache_bytes']} bytes")
    lines.append(f"ratio: {report['ratio']:.3e}")
    return "\n".join(lines)


def landscape(circuit: Circuit, grid: np.ndarray, remap: RemapConfig) -> np.ndarray:
    state = zero_state(circuit.n_qubits)
    return gradient_landscape(circuit, grid=grid, cfg=remap, state=state, executor=FullWidthExecutor(circuit))


def landscape_csv(grid: np.ndarray, matrix: np.ndarray) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["param"] + [repr(float(a)) for a in grid])
    for i, row in enumerate(matrix):
        writer.writerow([i] + [repr(float(v)) for v in row])
    return buf.getvalue()
