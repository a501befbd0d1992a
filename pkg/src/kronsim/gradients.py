"""Parameter-shift gradients, a finite-difference oracle, and tanh remapping."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuit import Circuit, ParamStore
from .executor import FullWidthExecutor, expectation_z, zero_state

SHIFT = np.pi / 2


@dataclass(frozen=True)
class RemapConfig:
    """Smooth squashing of trainable angles into ``(-half_range, half_range)``."""

    enabled: bool = False
    half_range: float = np.pi


def remap(theta, cfg: RemapConfig):
    if not cfg.enabled:
        return theta
    return cfg.half_range * np.tanh(theta)


def remap_slope(theta, cfg: RemapConfig):
    """d remap / d theta."""
    if not cfg.enabled:
        return np.ones_like(np.asarray(theta, dtype=float))
    return cfg.half_range * (1.0 - np.tanh(theta) ** 2)


@dataclass(frozen=True)
class LossSpec:
    """Mean of <Z> over ``wires`` (all wires when None) and over the batch."""

    wires: tuple[int, ...] | None = None

    def _wires(self, n_qubits: int) -> Sequence[int]:
        return range(n_qubits) if self.wires is None else self.wires

    def __call__(self, state: np.ndarray) -> float:
        return float(self.batched(state[None])[0])

    def batched(self, states: np.ndarray) -> np.ndarray:
        """Losses for a stack of states ``(K, B, N)`` -> ``(K,)``."""
        n = states.shape[-1].bit_length() - 1
        z = np.stack([expectation_z(states, w) for w in self._wires(n)])  # (wires, K, B)
        return z.mean(axis=(0, 2))


def _values(circuit: Circuit, params: ParamStore | Sequence[float] | None) -> np.ndarray:
    if params is None:
        return circuit.params.values
    if isinstance(params, ParamStore):
        return params.values
    return np.asarray(params, dtype=float)


def effective_values(circuit: Circuit, values: np.ndarray, cfg: RemapConfig) -> np.ndarray:
    """Angles actually fed to the gates: remapped where the parameter allows it."""
    mask = circuit.params.remap_mask
    return np.where(mask, remap(values, cfg), values)


def chain_factors(circuit: Circuit, values: np.ndarray, cfg: RemapConfig) -> np.ndarray:
    mask = circuit.params.remap_mask
    return np.where(mask, remap_slope(values, cfg), 1.0)


def shift_gradient(
    executor,
    circuit: Circuit,
    values: np.ndarray,
    loss: LossSpec,
    cfg: RemapConfig,
    state: np.ndarray,
    params: Sequence[int] | None = None,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Loss, gradient and output state in one batched sweep.

    ``params`` restricts which parameter indices get a gradient entry (the
    others are returned as zero). Each gate occurrence of a parameter is
    shifted separately and the contributions summed, so shared parameters
    are handled exactly.
    """
    values = np.asarray(values, dtype=float)
    owners = circuit.param_gates()
    wanted = range(len(values)) if params is None else params
    targets = [g for p in wanted for g in owners[p]]
    for g in targets:
        if not circuit.gates[g].kind.parametric:
            raise ValueError(f"gate {g} ({circuit.gates[g].kind.name}) has no shift rule")
    angles = circuit.gate_angles(effective_values(circuit, values, cfg))
    branches = executor.run_shifted(angles, state, targets, SHIFT)
    losses = loss.batched(branches)
    grad = np.zeros(len(values))
    for j, g in enumerate(targets):
        p = circuit.params.index(circuit.gates[g].param)
        grad[p] += 0.5 * (losses[1 + 2 * j] - losses[2 + 2 * j])
    grad *= chain_factors(circuit, values, cfg)
    return float(losses[0]), grad, branches[0]


def param_shift_grad(
    circuit: Circuit,
    params: ParamStore | Sequence[float] | None = None,
    loss: LossSpec = LossSpec(),
    cfg: RemapConfig = RemapConfig(),
    *,
    state: np.ndarray | None = None,
    executor=None,
) -> np.ndarray:
    """Exact gradient of ``loss`` for rotation-gate circuits.

    Derivatives are taken with respect to the raw (pre-remap) parameters;
    the shift is applied to the remapped angle and the tanh slope multiplied
    in afterwards.
    """
    values = _values(circuit, params)
    if len(values) == 0:
        return np.zeros(0)
    if state is None:
        state = zero_state(circuit.n_qubits)
    executor = executor or FullWidthExecutor(circuit)
    return shift_gradient(executor, circuit, values, loss, cfg, state)[1]


def finite_diff_grad(
    circuit: Circuit,
    params: ParamStore | Sequence[float] | None = None,
    loss: LossSpec = LossSpec(),
    eps: float = 1e-5,
    cfg: RemapConfig = RemapConfig(),
    *,
    state: np.ndarray | None = None,
    executor=None,
) -> np.ndarray:
    """Central differences in the raw parameters, remapping inside the loss."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    values = _values(circuit, params)
    if len(values) == 0:
        return np.zeros(0)
    if state is None:
        state = zero_state(circuit.n_qubits)
    executor = executor or FullWidthExecutor(circuit)

    def f(v):
        return loss(executor.run(circuit.gate_angles(effective_values(circuit, v, cfg)), state))

    grad = np.empty(len(values))
    for i in range(len(values)):
        up, down = values.copy(), values.copy()
        up[i] += eps
        down[i] -= eps
        grad[i] = (f(up) - f(down)) / (2 * eps)
    return grad


def default_grid(points: int = 64) -> np.ndarray:
    return np.linspace(-np.pi, np.pi, points)


def gradient_landscape(
    circuit: Circuit,
    params: ParamStore | Sequence[float] | None = None,
    indices: Sequence[int] | None = None,
    grid: Sequence[float] | None = None,
    cfg: RemapConfig = RemapConfig(),
    loss: LossSpec = LossSpec(),
    *,
    state: np.ndarray | None = None,
    executor=None,
) -> np.ndarray:
    """``|d loss / d theta_i|`` with theta_i swept over ``grid``, others held.

    Rows follow ``indices`` (default: every parameter), columns follow the
    grid (default: 64 points over [-pi, pi]).
    """
    values = _values(circuit, params)
    indices = list(range(len(values))) if indices is None else list(indices)
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    out = np.zeros((len(indices), len(grid)))
    if not indices:
        return out
    if state is None:
        state = zero_state(circuit.n_qubits)
    executor = executor or FullWidthExecutor(circuit)
    for r, i in enumerate(indices):
        for c, a in enumerate(grid):
            v = values.copy()
            v[i] = a
            out[r, c] = abs(shift_gradient(executor, circuit, v, loss, cfg, state, params=[i])[1][i])
    return out
