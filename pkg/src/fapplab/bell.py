"""Bell test on laboratory-level records: two sealed laboratories of four
qubits each share a singlet across their recorded branches, the outside
agents measure branch ("which outcome") or interference observables, and a
brute-force enumeration of deterministic value assignments supplies the
classical ceiling of the CHSH expression.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ToleranceError
from .friend import LabSpace, branch_states
from .qcore import OperatorMatrix, StateVector

LAB_DIM = 16
EIGENVALUE_TOL = 1e-10


@dataclass(frozen=True)
class LaboratoryBasis:
    """Orthonormal pair of recorded-branch states of one sealed laboratory."""

    up_state: StateVector
    down_state: StateVector

    def __post_init__(self):
        if self.up_state.dim != LAB_DIM or self.down_state.dim != LAB_DIM:
            raise ValueError(f"laboratory states must have dimension {LAB_DIM}")
        if abs(self.up_state.overlap(self.up_state) - 1) > 1e-12:
            raise ToleranceError("up state is not normalized")
        if abs(self.up_state.overlap(self.down_state)) > 1e-12:
            raise ToleranceError("branch states are not orthogonal")

    @classmethod
    def default(cls) -> "LaboratoryBasis":
        up, down = branch_states(LabSpace(observer_dim=2))
        return cls(up_state=up, down_state=down)


@dataclass(frozen=True)
class MacroObservable:
    """Plus/minus-one valued observable supported on the two-branch span.

    The operator annihilates the orthogonal complement of span{up, down}, so
    its spectrum is {+1, -1} on the span and 0 elsewhere.
    """

    matrix: OperatorMatrix
    label: str

    def __post_init__(self):
        m = self.matrix.entries
        if self.matrix.dim != LAB_DIM:
            raise ValueError(f"observable must act on dimension {LAB_DIM}")
        if np.max(np.abs(m - m.conj().T)) > 1e-12:
            raise ToleranceError("observable must be Hermitian")
        evals = np.linalg.eigvalsh(m)
        dist = np.min(np.abs(evals[:, None] - np.array([-1.0, 0.0, 1.0])[None, :]), axis=1)
        if np.max(dist) > EIGENVALUE_TOL:
            raise ToleranceError("observable eigenvalues must lie in {-1, 0, +1}")
        n_plus = int(np.sum(np.abs(evals - 1.0) < EIGENVALUE_TOL))
        n_minus = int(np.sum(np.abs(evals + 1.0) < EIGENVALUE_TOL))
        if n_plus != 1 or n_minus != 1:
            raise ToleranceError("observable must have exactly one +1 and one -1 eigenvalue")

    def outcome_projectors(self) -> dict:
        """Spectral projectors for outcomes +1, -1, 0 (used for sampling)."""
        evals, vecs = np.linalg.eigh(self.matrix.entries)
        out = {}
        for value in (1.0, -1.0, 0.0):
            cols = vecs[:, np.abs(evals - value) < EIGENVALUE_TOL]
            out[int(value)] = cols @ cols.conj().T
        return out


def branch_projection_observable(basis: LaboratoryBasis) -> MacroObservable:
    """Z-analogue: +1 on the recorded-up branch, -1 on the recorded-down branch."""
    up, down = basis.up_state.amplitudes, basis.down_state.amplitudes
    m = np.outer(up, up.conj()) - np.outer(down, down.conj())
    return MacroObservable(matrix=OperatorMatrix(m, kind="hermitian"), label="Z")


def interference_observable(basis: LaboratoryBasis) -> MacroObservable:
    """X-analogue: branch-swap observable, +1/-1 on the superposition outputs."""
    up, down = basis.up_state.amplitudes, basis.down_state.amplitudes
    m = np.outer(up, down.conj()) + np.outer(down, up.conj())
    return MacroObservable(matrix=OperatorMatrix(m, kind="hermitian"), label="X")


def rotated_observable(basis: LaboratoryBasis, angle: float) -> MacroObservable:
    """cos(angle) * Z + sin(angle) * X within the branch span."""
    z = branch_projection_observable(basis).matrix.entries
    x = interference_observable(basis).matrix.entries
    m = np.cos(angle) * z + np.sin(angle) * x
    return MacroObservable(matrix=OperatorMatrix(m, kind="hermitian"),
                           label=f"custom({angle})")


@dataclass(frozen=True)
class ChshSettings:
    """Two observables per side; defaults give the maximal quantum violation."""

    a1: MacroObservable
    a2: MacroObservable
    b1: MacroObservable
    b2: MacroObservable

    @classmethod
    def default(cls, basis_a: LaboratoryBasis | None = None,
                basis_b: LaboratoryBasis | None = None) -> "ChshSettings":
        basis_a = basis_a or LaboratoryBasis.default()
        basis_b = basis_b or LaboratoryBasis.default()
        return cls(
            a1=branch_projection_observable(basis_a),
            a2=interference_observable(basis_a),
            b1=rotated_observable(basis_b, np.pi / 4),
            b2=rotated_observable(basis_b, -np.pi / 4),
        )

    def pairs(self):
        return (("a1b1", self.a1, self.b1), ("a1b2", self.a1, self.b2),
                ("a2b1", self.a2, self.b1), ("a2b2", self.a2, self.b2))


def build_bell_state(basis_a: LaboratoryBasis | None = None,
                     basis_b: LaboratoryBasis | None = None) -> StateVector:
    """Laboratory-level singlet: (|up_A down_B> - |down_A up_B>) / sqrt(2)."""
    basis_a = basis_a or LaboratoryBasis.default()
    basis_b = basis_b or LaboratoryBasis.default()
    amps = (np.kron(basis_a.up_state.amplitudes, basis_b.down_state.amplitudes)
            - np.kron(basis_a.down_state.amplitudes, basis_b.up_state.amplitudes))
    return StateVector(amps / np.sqrt(2.0))


def correlation(state: StateVector, obs_a: MacroObservable, obs_b: MacroObservable) -> float:
    """<state| A (x) B |state>, contracted without forming the 256x256 product."""
    if state.dim != LAB_DIM * LAB_DIM:
        raise ValueError(f"state must live on dimension {LAB_DIM * LAB_DIM}")
    m = state.amplitudes.reshape(LAB_DIM, LAB_DIM)
    val = complex(np.einsum("ab,ac,bd,cd->", m.conj(),
                            obs_a.matrix.entries, obs_b.matrix.entries, m))
    if abs(val.imag) > 1e-10:
        raise ToleranceError(f"correlation has imaginary residue {val.imag:.3e}")
    return val.real


def chsh_value(state: StateVector, settings: ChshSettings) -> float:
    """|<A1B1> + <A1B2> + <A2B1> - <A2B2>|."""
    c11 = correlation(state, settings.a1, settings.b1)
    c12 = correlation(state, settings.a1, settings.b2)
    c21 = correlation(state, settings.a2, settings.b1)
    c22 = correlation(state, settings.a2, settings.b2)
    return abs(c11 + c12 + c21 - c22)


def lhv_bound() -> float:
    """Exhaustive maximum of the CHSH expression over deterministic strategies.

    Every side assigns fixed values +/-1 to both of its settings; all sixteen
    assignments are enumerated, so the returned ceiling (2) is exact.
    """
    best = 0
    for a1, a2, b1, b2 in itertools.product((-1, 1), repeat=4):
        best = max(best, abs(a1 * b1 + a1 * b2 + a2 * b1 - a2 * b2))
    return float(best)


def correlation_sampled(state: StateVector, obs_a: MacroObservable, obs_b: MacroObservable,
                        shots: int, rng: np.random.Generator) -> float:
    """Finite-shot estimate: outcomes sampled from the joint Born distribution."""
    if shots < 1:
        raise ValueError("need at least one shot")
    m = state.amplitudes.reshape(LAB_DIM, LAB_DIM)
    proj_a = obs_a.outcome_projectors()
    proj_b = obs_b.outcome_projectors()
    outcomes = []
    probs = []
    for va, pa in proj_a.items():
        for vb, pb in proj_b.items():
            pr = float(np.real(np.einsum("ab,ac,bd,cd->", m.conj(), pa, pb, m)))
            outcomes.append(va * vb)
            probs.append(max(pr, 0.0))
    probs = np.array(probs)
    probs = probs / probs.sum()
    draws = rng.choice(len(outcomes), size=shots, p=probs)
    values = np.array(outcomes)[draws]
    return float(values.mean())


def chsh_value_sampled(state: StateVector, settings: ChshSettings, shots: int,
                       rng: np.random.Generator) -> float:
    c11 = correlation_sampled(state, settings.a1, settings.b1, shots, rng)
    c12 = correlation_sampled(state, settings.a1, settings.b2, shots, rng)
    c21 = correlation_sampled(state, settings.a2, settings.b1, shots, rng)
    c22 = correlation_sampled(state, settings.a2, settings.b2, shots, rng)
    return abs(c11 + c12 + c21 - c22)


def facts_contradiction_report(state: StateVector,
                               settings: ChshSettings | None = None) -> dict:
    """CHSH value vs the deterministic-assignment ceiling, and whether joint
    outside/inside records are excluded.
    """
    settings = settings or ChshSettings.default()
    correlations = {name: correlation(state, a, b) for name, a, b in settings.pairs()}
    chsh = chsh_value(state, settings)
    classical = lhv_bound()
    return {
        "correlations": correlations,
        "chsh_value": chsh,
        "lhv_bound": classical,
        "margin": chsh - classical,
        "coexistence_excluded": bool(chsh > classical + 1e-6),
    }
