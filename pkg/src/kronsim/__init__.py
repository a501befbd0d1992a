"""Batched state-vector simulation with cached Kronecker-expanded gate
matrices and circuit splitting."""

from .cache import (
    DEFAULT_BUDGET,
    CacheBudgetError,
    EmbeddingCache,
    ExpandedGate,
    apply_cached,
    build_embedding_cache,
    embedding_forward,
    expand,
)
from .circuit import (
    Circuit,
    GateInstance,
    GateKind,
    ParamStore,
    ansatz_strongly_entangling,
    ansatz_su2,
    validate,
)
from .executor import (
    FullWidthExecutor,
    GroupUnitary,
    SplitExecutor,
    apply_group,
    expectation_z,
    group_unitary,
    probabilities,
    run,
    zero_state,
)
from .gates import PartialDecomposition, decompose, fixed_matrix, gate_matrix
from .gradients import (
    LossSpec,
    RemapConfig,
    finite_diff_grad,
    gradient_landscape,
    param_shift_grad,
    remap,
)
from .qasm import QasmError, export_qasm, parse_qasm
from .splitter import (
    DependencyGraph,
    SplitPlan,
    SubCircuitGroup,
    attach_single_qubit_gates,
    build_dependency_graph,
    greedy_split,
    split_circuit,
    validate_plan,
)

__version__ = "0.1.0"
