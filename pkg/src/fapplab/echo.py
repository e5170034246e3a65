"""Quantum irreversibility of macroscopic states: forward evolution followed
by an imperfectly reversed one, a Gaussian ensemble of diagonal perturbations,
and the ensemble-averaged Bhattacharyya overlap with its Gaussian decay bound.

Weak-perturbation model: the perturbed Hamiltonian shares the eigenvectors of
the unperturbed one and only shifts its eigenvalues, so the combined evolution
exp(+i(H0+V)t) exp(-iH0t) reduces to the pure phase profile exp(i V_alpha t)
in the shared eigenbasis (hbar = 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ToleranceError
from .qcore import OperatorMatrix, StateVector
from .spincoarse import SphereGrid, SpinSystem, bhattacharyya, coherent_kernel, q_function_pure

SIGMA_BYPASS = 1e-15  # below this the ensemble collapses onto its means exactly
DIAGONAL_TOL = 1e-12
SIGMA_SPACING_FACTOR = 0.2  # "spread well below the level spacing", made operational


@dataclass(frozen=True)
class SpectralHamiltonian:
    """Non-degenerate Hamiltonian given by its eigenbasis and sorted eigenvalues."""

    sys: SpinSystem
    eigenbasis: OperatorMatrix
    eigenvalues: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.eigenvalues, dtype=float)
        vals.setflags(write=False)
        object.__setattr__(self, "eigenvalues", vals)
        if self.eigenbasis.dim != self.sys.dim or vals.size != self.sys.dim:
            raise ValueError("eigenbasis/eigenvalue dimensions do not match the spin system")
        if self.eigenbasis.kind != "unitary":
            raise ValueError("eigenbasis must be a unitary OperatorMatrix")
        spacings = np.diff(vals)
        if spacings.size and spacings.min() <= 0:
            raise ValueError("eigenvalues must be strictly increasing (non-degenerate)")

    @property
    def min_spacing(self) -> float:
        return float(np.diff(self.eigenvalues).min())

    @property
    def mean_spacing(self) -> float:
        return float(np.diff(self.eigenvalues).mean())

    def matrix(self) -> OperatorMatrix:
        u = self.eigenbasis.entries
        m = (u * self.eigenvalues) @ u.conj().T
        return OperatorMatrix(0.5 * (m + m.conj().T), kind="hermitian")

    @classmethod
    def random_dicke_diagonal(cls, sys: SpinSystem, seed: int) -> "SpectralHamiltonian":
        """Default model: diagonal in the Dicke basis, spacings drawn uniformly
        with unit mean (on [0.5, 1.5], so the spectrum is safely non-degenerate).
        """
        rng = np.random.default_rng(np.random.SeedSequence(entropy=int(seed)))
        spacings = rng.uniform(0.5, 1.5, size=sys.dim - 1)
        evals = np.concatenate([[0.0], np.cumsum(spacings)])
        return cls(sys=sys, eigenbasis=OperatorMatrix(np.eye(sys.dim), kind="unitary"),
                   eigenvalues=evals)


@dataclass(frozen=True)
class GaussianPerturbation:
    """Ensemble of diagonal perturbations: level shift V_alpha drawn from the
    density (1/(sqrt(pi) sigma)) exp(-(V - W_alpha)^2 / sigma^2), i.e. mean
    W_alpha and standard deviation sigma/sqrt(2), independently per level.
    """

    sigma: float
    means: np.ndarray
    seed: int
    h0: SpectralHamiltonian

    def __post_init__(self):
        means = np.asarray(self.means, dtype=float)
        means.setflags(write=False)
        object.__setattr__(self, "means", means)
        if means.size != self.h0.sys.dim:
            raise ValueError("one mean per level is required")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if self.sigma >= SIGMA_BYPASS:
            limit = SIGMA_SPACING_FACTOR * self.h0.min_spacing
            if self.sigma >= limit:
                raise ValueError(
                    f"sigma {self.sigma} is not small against the level spacing "
                    f"(limit {limit})")

    def draw_values(self, index: int) -> np.ndarray:
        """Level shifts of ensemble member `index`; deterministic in (seed, index)."""
        if index < 0:
            raise ValueError("ensemble index must be non-negative")
        if self.sigma < SIGMA_BYPASS:
            return self.means.copy()
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=int(self.seed), spawn_key=(int(index),)))
        return self.means + self.sigma / np.sqrt(2.0) * rng.standard_normal(self.means.size)


def draw_perturbation(pert: GaussianPerturbation, index: int) -> OperatorMatrix:
    """Perturbation operator of one ensemble member, diagonal in the H0 eigenbasis."""
    values = pert.draw_values(index)
    u = pert.h0.eigenbasis.entries
    if np.allclose(u, np.eye(u.shape[0])):
        mat = np.diag(values.astype(complex))
    else:
        mat = (u * values) @ u.conj().T
        mat = 0.5 * (mat + mat.conj().T)
    return OperatorMatrix(mat, kind="hermitian")


def _diagonal_values(h0: SpectralHamiltonian, v: OperatorMatrix) -> np.ndarray:
    """Eigenbasis representation of V; rejects anything not diagonal there."""
    if v.dim != h0.sys.dim:
        raise ValueError("perturbation dimension mismatch")
    u = h0.eigenbasis.entries
    in_basis = u.conj().T @ v.entries @ u
    off = in_basis - np.diag(np.diag(in_basis))
    worst = np.max(np.abs(off))
    if worst > DIAGONAL_TOL:
        raise ToleranceError(
            f"perturbation is not diagonal in the reference eigenbasis "
            f"(off-diagonal {worst:.3e}); the shared-eigenvector model does not apply")
    diag = np.diag(in_basis)
    if np.max(np.abs(diag.imag)) > DIAGONAL_TOL:
        raise ToleranceError("perturbation has non-real eigenvalues")
    return diag.real


def combined_evolution(psi: StateVector, h0: SpectralHamiltonian,
                       v: OperatorMatrix, t: float) -> StateVector:
    """exp(+i(H0+V)t) exp(-iH0t)|psi>: phase profile e^{i V_alpha t} per level."""
    if psi.dim != h0.sys.dim:
        raise ValueError("state dimension mismatch")
    values = _diagonal_values(h0, v)
    u = h0.eigenbasis.entries
    coeff = u.conj().T @ psi.amplitudes
    return StateVector(u @ (np.exp(1j * values * t) * coeff))


def reversibility_measure(psi: StateVector, h0: SpectralHamiltonian, v: OperatorMatrix,
                          t: float, sys: SpinSystem, grid: SphereGrid,
                          kernel: np.ndarray | None = None) -> float:
    """Bhattacharyya overlap between the macroscopic states before and after
    the forward-then-imperfectly-reversed evolution.
    """
    if kernel is None:
        kernel = coherent_kernel(sys, grid)
    before = q_function_pure(psi, sys, grid, kernel)
    after = q_function_pure(combined_evolution(psi, h0, v, t), sys, grid, kernel)
    return bhattacharyya(before, after)


@dataclass(frozen=True)
class EchoCurve:
    """Time-resolved ensemble-averaged reversibility with its Gaussian bound."""

    times: np.ndarray
    mean_overlap: np.ndarray
    std_error: np.ndarray
    analytic_bound: np.ndarray

    def __post_init__(self):
        arrays = {}
        for name in ("times", "mean_overlap", "std_error", "analytic_bound"):
            a = np.asarray(getattr(self, name), dtype=float)
            a.setflags(write=False)
            arrays[name] = a
            object.__setattr__(self, name, a)
        n = arrays["times"].size
        if any(a.size != n for a in arrays.values()):
            raise ValueError("curve arrays must have equal length")
        if n > 1 and np.any(np.diff(arrays["times"]) <= 0):
            raise ValueError("times must be strictly increasing")
        if np.any(arrays["mean_overlap"] < 0) or np.any(arrays["mean_overlap"] > 1):
            raise ValueError("mean overlap must lie in [0, 1]")
        if arrays["times"][0] == 0.0 and abs(arrays["mean_overlap"][0] - 1.0) > 1e-10:
            raise ToleranceError("overlap at t = 0 must be 1")


def echo_experiment(psi: StateVector, h0: SpectralHamiltonian, pert: GaussianPerturbation,
                    times, ensemble_size: int, sys: SpinSystem, grid: SphereGrid) -> EchoCurve:
    """Ensemble average of the reversibility measure over perturbation draws.

    The analytic bound column is exp(-(sigma t)^2 / 4). Member states are pure
    phase profiles, so each member costs one Q-function evaluation per time.
    """
    if ensemble_size < 100:
        raise ValueError("need at least 100 ensemble members")
    times = np.asarray(times, dtype=float)
    if pert.h0 is not h0 and not np.array_equal(pert.h0.eigenvalues, h0.eigenvalues):
        raise ValueError("perturbation ensemble is paired with a different Hamiltonian")
    kernel = coherent_kernel(sys, grid)
    q_before = q_function_pure(psi, sys, grid, kernel)
    sqrt_before = np.sqrt(q_before.values)
    u = h0.eigenbasis.entries
    coeff = u.conj().T @ psi.amplitudes
    norm = (2 * sys.j + 1) / (4 * np.pi)
    ku = kernel.conj() @ u  # node x level overlap table, reused by every member

    overlaps = np.empty((ensemble_size, times.size))
    for member in range(ensemble_size):
        values = pert.draw_values(member)
        for it, t in enumerate(times):
            amp = ku @ (np.exp(1j * values * t) * coeff)
            q_after = norm * np.abs(amp) ** 2
            val = float(np.sum(grid.weights * sqrt_before * np.sqrt(q_after)))
            overlaps[member, it] = min(max(val, 0.0), 1.0)

    mean = overlaps.mean(axis=0)
    std_error = overlaps.std(axis=0, ddof=1) / np.sqrt(ensemble_size)
    bound = np.exp(-(pert.sigma * times) ** 2 / 4.0)
    return EchoCurve(times=times, mean_overlap=mean, std_error=std_error,
                     analytic_bound=bound)


def averaged_q_formula(psi: StateVector, h0: SpectralHamiltonian, pert: GaussianPerturbation,
                       t: float, sys: SpinSystem, grid: SphereGrid,
                       kernel: np.ndarray | None = None) -> np.ndarray:
    """Exact closed form of the ensemble-averaged Q-function.

    Averaging e^{i(V_a - V_b)t} over independent Gaussian draws damps every
    off-diagonal pair by e^{-(sigma t)^2/2} while the diagonal pairs survive
    undamped, leaving the dephased mixture of eigenlevel populations:

        <Q(Omega,t)> = |<Omega|phi(t)>|^2 e^{-(sigma t)^2/2} * (2j+1)/(4pi)
                       + (1 - e^{-(sigma t)^2/2}) sum_a |psi_a|^2 |<Omega|a>|^2 * (2j+1)/(4pi)

    with phi_a(t) = psi_a e^{i W_a t}.
    """
    if kernel is None:
        kernel = coherent_kernel(sys, grid)
    u = h0.eigenbasis.entries
    coeff = u.conj().T @ psi.amplitudes
    ku = kernel.conj() @ u
    norm = (2 * sys.j + 1) / (4 * np.pi)
    damping = np.exp(-(pert.sigma * t) ** 2 / 2.0)
    phi = np.exp(1j * pert.means * t) * coeff
    coherent_part = norm * np.abs(ku @ phi) ** 2
    dephased_part = norm * (np.abs(ku) ** 2 @ np.abs(coeff) ** 2)
    return damping * coherent_part + (1.0 - damping) * dephased_part
