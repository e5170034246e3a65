"""Sealed-laboratory measurement pipeline observed from outside: an atom
passes a z-oriented beam splitter, two sense-organ qubits record the branch,
an observer couples to the organs, a message qutrit announces "definite
outcome" without revealing which, and the outside agent measures in the
superposition basis.

Factor layout (leftmost most significant): atom, organ-up, organ-down,
observer, message. Qubit convention |z+> = (1,0), |z-> = (0,1). Observer of
dimension 2 starts ready in index 0, which doubles as "knows up"; dimension 3
uses the encoding 0 = knows up, 1 = knows down, 2 = ready / no outcome.
The message qutrit starts blank (index 2); the written "definite outcome"
message is the symmetric pure state (|0> + |1>)/sqrt(2), which carries no
which-outcome information.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StageError
from .qcore import OperatorMatrix, ProductSpace, StateVector, partial_trace, tensor_all

STAGES = ("initial", "post-stern-gerlach", "post-observer", "post-message")

Z_PLUS = np.array([1.0, 0.0], dtype=complex)
Z_MINUS = np.array([0.0, 1.0], dtype=complex)
X_PLUS = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)
FLIP = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)

MESSAGE_BLANK = np.array([0.0, 0.0, 1.0], dtype=complex)
MESSAGE_DEFINITE = np.array([1.0, 1.0, 0.0], dtype=complex) / np.sqrt(2.0)


@dataclass(frozen=True)
class LabSpace:
    """Five-system laboratory layout; observer dimension 2 or 3."""

    observer_dim: int = 2

    def __post_init__(self):
        if self.observer_dim not in (2, 3):
            raise ValueError("observer dimension must be 2 or 3")

    @property
    def layout(self) -> ProductSpace:
        return ProductSpace((2, 2, 2, self.observer_dim, 3))

    @property
    def total_dim(self) -> int:
        return self.layout.total_dim

    @property
    def ready_index(self) -> int:
        return 0 if self.observer_dim == 2 else 2

    def observer_ready(self) -> np.ndarray:
        v = np.zeros(self.observer_dim, dtype=complex)
        v[self.ready_index] = 1.0
        return v

    def knows_up(self) -> np.ndarray:
        v = np.zeros(self.observer_dim, dtype=complex)
        v[0] = 1.0
        return v

    def knows_down(self) -> np.ndarray:
        v = np.zeros(self.observer_dim, dtype=complex)
        v[1] = 1.0
        return v


@dataclass(frozen=True)
class LabState:
    """Pure state of the five systems plus the pipeline stage tag."""

    space: LabSpace
    psi: StateVector
    stage: str

    def __post_init__(self):
        if self.stage not in STAGES:
            raise ValueError(f"unknown stage {self.stage!r}")
        if self.psi.dim != self.space.total_dim:
            raise ValueError("state dimension does not match the laboratory layout")


def _require_stage(state: LabState, *allowed: str):
    if state.stage not in allowed:
        raise StageError(f"operation requires stage in {allowed}, state is at {state.stage!r}")


def _embed(space: LabSpace, op123: np.ndarray | None = None,
           op234: np.ndarray | None = None, op5: np.ndarray | None = None) -> np.ndarray:
    """Lift a local operator to the full product space (row-major kron)."""
    d4 = space.observer_dim
    if op123 is not None:
        return np.kron(np.kron(op123, np.eye(d4)), np.eye(3))
    if op234 is not None:
        return np.kron(np.kron(np.eye(2), op234), np.eye(3))
    if op5 is not None:
        return np.kron(np.eye(8 * d4), op5)
    raise ValueError("nothing to embed")


def _apply_unitary(state: LabState, u_full: np.ndarray, new_stage: str) -> LabState:
    u = OperatorMatrix(u_full, kind="unitary")
    return LabState(space=state.space,
                    psi=StateVector(u.entries @ state.psi.amplitudes),
                    stage=new_stage)


def prepare_initial(space: LabSpace) -> LabState:
    """Atom along +x, both organs down, observer ready, message blank."""
    psi = tensor_all([
        StateVector(X_PLUS),
        StateVector(Z_MINUS),
        StateVector(Z_MINUS),
        StateVector(space.observer_ready()),
        StateVector(MESSAGE_BLANK),
    ])
    return LabState(space=space, psi=psi, stage="initial")


def stern_gerlach_unitary(space: LabSpace) -> OperatorMatrix:
    """Branch recorder on (atom, organ-up, organ-down): the up branch flips
    organ 2, the down branch flips organ 3. Self-inverse on the z basis.
    """
    p_up = np.outer(Z_PLUS, Z_PLUS.conj())
    p_down = np.outer(Z_MINUS, Z_MINUS.conj())
    u123 = (np.kron(np.kron(p_up, FLIP), np.eye(2))
            + np.kron(np.kron(p_down, np.eye(2)), FLIP))
    return OperatorMatrix(_embed(space, op123=u123), kind="unitary")


def stern_gerlach(state: LabState) -> LabState:
    _require_stage(state, "initial")
    u = stern_gerlach_unitary(state.space)
    return _apply_unitary(state, u.entries, "post-stern-gerlach")


def observer_unitary(space: LabSpace) -> OperatorMatrix:
    """Observer readout on (organ-up, organ-down, observer): the (+,-) organ
    pattern writes "knows up", the (-,+) pattern writes "knows down".
    """
    d4 = space.observer_dim
    ready = space.ready_index
    g_up = np.eye(d4, dtype=complex)
    g_down = np.eye(d4, dtype=complex)
    if d4 == 2:
        g_down = FLIP  # ready |0> -> |1>, i.e. "knows down"
    else:
        g_up[[0, ready]] = g_up[[ready, 0]]
        g_down[[1, ready]] = g_down[[ready, 1]]
    p_up_branch = np.kron(np.outer(Z_PLUS, Z_PLUS.conj()), np.outer(Z_MINUS, Z_MINUS.conj()))
    p_down_branch = np.kron(np.outer(Z_MINUS, Z_MINUS.conj()), np.outer(Z_PLUS, Z_PLUS.conj()))
    p_rest = np.eye(4) - p_up_branch - p_down_branch
    u234 = (np.kron(p_up_branch, g_up) + np.kron(p_down_branch, g_down)
            + np.kron(p_rest, np.eye(d4)))
    return OperatorMatrix(_embed(space, op234=u234), kind="unitary")


def observer_coupling(state: LabState) -> LabState:
    _require_stage(state, "post-stern-gerlach")
    u = observer_unitary(state.space)
    return _apply_unitary(state, u.entries, "post-observer")


def write_message(state: LabState) -> LabState:
    """Set the message qutrit to the definite-outcome announcement.

    Implemented as a local unitary on system 5 alone, so the laboratory
    superposition is untouched and the global state stays a product with the
    message factor.
    """
    _require_stage(state, "post-observer")
    u5 = np.zeros((3, 3), dtype=complex)
    u5[:, 2] = MESSAGE_DEFINITE
    u5[:, 0] = np.array([1.0, -1.0, 0.0]) / np.sqrt(2.0)
    u5[:, 1] = np.array([0.0, 0.0, 1.0])
    return _apply_unitary(state, _embed(state.space, op5=u5), "post-message")


def branch_states(space: LabSpace) -> tuple[StateVector, StateVector]:
    """The two recorded branches of systems 1-4: "all agree up" and "all agree down"."""
    up = tensor_all([StateVector(Z_PLUS), StateVector(Z_PLUS), StateVector(Z_MINUS),
                     StateVector(space.knows_up())])
    down = tensor_all([StateVector(Z_MINUS), StateVector(Z_MINUS), StateVector(Z_PLUS),
                       StateVector(space.knows_down())])
    return up, down


def interference_states(space: LabSpace) -> tuple[StateVector, StateVector]:
    """Superposition-basis output states (branch sum and difference)."""
    up, down = branch_states(space)
    plus = StateVector((up.amplitudes + down.amplitudes) / np.sqrt(2.0))
    minus = StateVector((up.amplitudes - down.amplitudes) / np.sqrt(2.0))
    return plus, minus


def interference_measurement(state, space: LabSpace | None = None):
    """Probabilities of the two superposition-basis outcomes on systems 1-4.

    Accepts a LabState (post-observer or post-message), or a bare StateVector
    / density OperatorMatrix living on the systems-1-4 subspace. Returns
    (p_plus, p_minus, p_rest) with p_rest the weight outside the two-output span.
    """
    if isinstance(state, LabState):
        space = state.space
        plus, minus = interference_states(space)
        _require_stage(state, "post-observer", "post-message")
        p_plus = _subsystem_probability(state, plus)
        p_minus = _subsystem_probability(state, minus)
    else:
        if space is None:
            space = LabSpace(observer_dim=2)
        plus, minus = interference_states(space)
        if isinstance(state, StateVector):
            if state.dim != plus.dim:
                raise ValueError(f"expected a state of dimension {plus.dim}")
            p_plus = abs(np.vdot(plus.amplitudes, state.amplitudes)) ** 2
            p_minus = abs(np.vdot(minus.amplitudes, state.amplitudes)) ** 2
        elif isinstance(state, OperatorMatrix):
            if state.dim != plus.dim:
                raise ValueError(f"expected an operator of dimension {plus.dim}")
            if not state.is_density():
                raise ValueError("operator input must be a density matrix")
            p_plus = float(np.real(plus.amplitudes.conj() @ state.entries @ plus.amplitudes))
            p_minus = float(np.real(minus.amplitudes.conj() @ state.entries @ minus.amplitudes))
        else:
            raise TypeError("state must be LabState, StateVector, or OperatorMatrix")
    p_rest = max(0.0, 1.0 - p_plus - p_minus)
    return float(p_plus), float(p_minus), float(p_rest)


def _subsystem_probability(state: LabState, target_14: StateVector) -> float:
    """Weight of |target><target| (x) identity_message in the full state."""
    d4 = state.space.observer_dim
    m = state.psi.amplitudes.reshape(8 * d4, 3)
    amp = target_14.amplitudes.conj() @ m  # residual message-space vector
    return float(np.real(np.vdot(amp, amp)))


def branch_probabilities(state: LabState) -> tuple[float, float]:
    """Weights of the two recorded branches in a post-observer state."""
    up, down = branch_states(state.space)
    return (_subsystem_probability(state, up), _subsystem_probability(state, down))


def message_reduced_state(state: LabState) -> OperatorMatrix:
    return partial_trace(state.psi.density(), state.space.layout, keep=[4])


def message_purity(state: LabState) -> float:
    rho = message_reduced_state(state)
    return float(np.real(np.trace(rho.entries @ rho.entries)))


def message_mutual_information(state: LabState) -> float:
    """Mutual information between the message and the rest (0 for a product state)."""
    layout = state.space.layout
    rho = state.psi.density()
    s5 = _entropy(partial_trace(rho, layout, keep=[4]))
    s14 = _entropy(partial_trace(rho, layout, keep=[0, 1, 2, 3]))
    return s5 + s14  # global state is pure, so S(total) = 0


def _entropy(rho: OperatorMatrix) -> float:
    evals = np.linalg.eigvalsh(rho.entries)
    evals = evals[evals > 1e-15]
    return float(-np.sum(evals * np.log(evals)))


def qutrit_observer_measurement(state) -> tuple[float, float]:
    """Two-outcome readout of the qutrit observer encoding: "saw a definite
    outcome" projects onto span{|0>, |1>}, "no definite outcome" onto |2>.
    """
    p1 = np.diag([1.0, 1.0, 0.0]).astype(complex)
    p2 = np.diag([0.0, 0.0, 1.0]).astype(complex)
    if isinstance(state, StateVector):
        if state.dim != 3:
            raise ValueError("qutrit readout needs a three-dimensional state")
        rho = np.outer(state.amplitudes, state.amplitudes.conj())
    elif isinstance(state, OperatorMatrix):
        if state.dim != 3:
            raise ValueError("qutrit readout needs a three-dimensional state")
        if not state.is_density():
            raise ValueError("operator input must be a density matrix")
        rho = state.entries
    else:
        raise TypeError("state must be StateVector or OperatorMatrix")
    p_definite = float(np.real(np.trace(p1 @ rho)))
    p_indefinite = float(np.real(np.trace(p2 @ rho)))
    return p_definite, p_indefinite


def run_pipeline(space: LabSpace | None = None) -> dict:
    """Full experiment with a report of the quantities the outside agent checks."""
    if space is None:
        space = LabSpace(observer_dim=2)
    state0 = prepare_initial(space)
    state_t = stern_gerlach(state0)
    state_tp = observer_coupling(state_t)
    plus, _ = interference_states(space)

    p_plus_pre, p_minus_pre, p_rest_pre = interference_measurement(state_tp)
    b_up, b_down = branch_probabilities(state_tp)
    state_msg = write_message(state_tp)
    p_plus_post, p_minus_post, p_rest_post = interference_measurement(state_msg)

    m = state_tp.psi.amplitudes.reshape(8 * space.observer_dim, 3)
    blank_component = m @ MESSAGE_BLANK.conj()
    fidelity_plus = abs(np.vdot(plus.amplitudes, blank_component))

    return {
        "observer_dim": space.observer_dim,
        "fidelity_superposition_output": float(fidelity_plus),
        "branch_probability_up": b_up,
        "branch_probability_down": b_down,
        "p_plus_pre_message": p_plus_pre,
        "p_minus_pre_message": p_minus_pre,
        "p_rest_pre_message": p_rest_pre,
        "p_plus_post_message": p_plus_post,
        "p_minus_post_message": p_minus_post,
        "p_rest_post_message": p_rest_post,
        "message_purity": message_purity(state_msg),
        "message_mutual_information": message_mutual_information(state_msg),
    }
