"""Eigensolver drivers: QDavidson, QLanczos and the dense classical Davidson reference."""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

import numpy as np

from .fermion import build_excitation_pool
from .mapping import ANGLE_TOL, MAPPING_MODES, apply_mapping, map_correction, odd_y_pool
from .measurement import MatrixElementEstimator
from .pauli import PauliSum, PauliWord
from .statevector import StateVector, from_bitstring
from .subspace import (SIGMA_DROP, KrylovBasis, Lineage, SubspaceProblem, assemble,
                       orthonormal_span, projection_ratio, residue_norms, ritz_state, solve)

log = logging.getLogger(__name__)

PARENT_TOL = 1e-8

# run statuses
CONVERGED = "converged"
MAX_ITERATIONS = "max_iterations"
STALLED = "stalled"
LINEAR_DEPENDENCE = "linear_dependence"
COMPLETED = "completed"


@dataclass(frozen=True)
class QDavidsonConfig:
    """Driver settings shared by QDavidson and QLanczos.

    ``pool_spec`` is ``"odd_y"`` (every odd-Y word, optionally capped by
    ``{"kind": "odd_y", "max_weight": w}``), ``{"kind": "excitations",
    "n_electrons": ne, "ms2": m}``, or ``{"kind": "words", "labels": [...]}``.
    ``initial_states`` holds bitstrings, ``{bitstring: amplitude}`` mappings
    or amplitude vectors.  ``mapping_mode`` selects the QDavidson correction
    (see :func:`qdavidson.mapping.map_correction`); QLanczos always maps the
    plain imaginary-time step.
    """

    dtau: float = 0.1
    epsilon_resid: float = 1e-4
    epsilon_lindep: float = 1e-3
    n_roots: int = 4
    max_iterations: int = 20
    initial_states: tuple = ()
    pool_spec: Any = "odd_y"
    estimator_spec: Any = None
    n_steps: int = 20
    sigma_drop: float | None = None
    oracle: bool = True
    angle_tol: float = ANGLE_TOL
    mapping_mode: str = "residue"

    def __post_init__(self):
        if not self.dtau > 0:
            raise ValueError(f"dtau must be > 0, got {self.dtau}")
        for name in ("epsilon_resid", "epsilon_lindep"):
            value = getattr(self, name)
            if not 0 < value < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {value}")
        if self.n_roots < 1:
            raise ValueError(f"n_roots must be >= 1, got {self.n_roots}")
        if self.max_iterations < 0 or self.n_steps < 0:
            raise ValueError("iteration limits must be non-negative")
        if self.mapping_mode not in MAPPING_MODES:
            raise ValueError(f"mapping_mode must be one of {MAPPING_MODES}, got {self.mapping_mode!r}")
        object.__setattr__(self, "initial_states", tuple(self.initial_states))


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    ritz_values: tuple[float, ...]
    residue_norms: tuple[float, ...]
    basis_size: int
    max_depth: int
    added_vectors: int = 0
    lin_dep_rejections: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class RunResult:
    """Outcome of a driver.  Unpacks as ``(problem, records)``."""

    problem: SubspaceProblem
    records: list[IterationRecord]
    status: str
    basis: KrylovBasis | None = None
    shots: int = 0
    extras: dict = field(default_factory=dict)

    def __iter__(self):
        yield self.problem
        yield self.records

    @property
    def iterations(self) -> int:
        return self.records[-1].iteration if self.records else 0

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED


def resolve_pool(pool_spec, n_qubits: int) -> tuple[PauliWord, ...]:
    if pool_spec is None or pool_spec == "odd_y":
        return odd_y_pool(n_qubits)
    if isinstance(pool_spec, str):
        if pool_spec == "excitations":
            return tuple(build_excitation_pool(n_qubits))
        raise ValueError(f"unknown pool {pool_spec!r}")
    if isinstance(pool_spec, dict):
        kind = pool_spec.get("kind", "odd_y")
        if kind == "odd_y":
            return odd_y_pool(n_qubits, pool_spec.get("max_weight"))
        if kind == "excitations":
            return tuple(build_excitation_pool(n_qubits, pool_spec.get("n_electrons"),
                                               pool_spec.get("ms2", 0)))
        if kind == "words":
            return tuple(PauliWord.from_label(label) for label in pool_spec["labels"])
        raise ValueError(f"unknown pool kind {kind!r}")
    return tuple(pool_spec)


def resolve_states(initial_states: Sequence, n_qubits: int) -> list[StateVector]:
    states = []
    for item in initial_states:
        if isinstance(item, StateVector):
            state = item
        elif isinstance(item, str):
            state = from_bitstring(item)
        elif isinstance(item, dict):
            amps = sum(complex(c) * from_bitstring(bits).amplitudes for bits, c in item.items())
            state = StateVector.from_array(np.asarray(amps, dtype=complex))
        else:
            state = StateVector.from_array(np.asarray(item, dtype=complex))
        if state.n_qubits != n_qubits:
            raise ValueError(f"initial state on {state.n_qubits} qubits, Hamiltonian on {n_qubits}")
        states.append(state.normalize())
    if not states:
        raise ValueError("at least one initial state is required")
    mat = np.stack([s.amplitudes for s in states], axis=1)
    if np.linalg.matrix_rank(mat, tol=1e-8) < len(states):
        raise ValueError("initial states are linearly dependent")
    return states


def _estimator(config: QDavidsonConfig, estimator: MatrixElementEstimator | None):
    if estimator is not None:
        return estimator
    return MatrixElementEstimator.from_config(config.estimator_spec)


def _sigma_drop(config: QDavidsonConfig, est: MatrixElementEstimator) -> float:
    if config.sigma_drop is not None:
        return config.sigma_drop
    return max(SIGMA_DROP, 10.0 * est.noise_scale)


def _epsilon_resid(config: QDavidsonConfig, est: MatrixElementEstimator) -> float:
    """Residue threshold, floored at the estimator noise level like ``sigma_drop``."""
    return max(config.epsilon_resid, 10.0 * est.noise_scale)


def _screen(basis: KrylovBasis, delta: StateVector, sigma_drop: float,
            est: MatrixElementEstimator) -> float:
    """Norm ratio ``|delta'| / |delta|`` after projecting out the retained basis span."""
    psi = basis.matrix()
    if not est.perturbs("lindep") or est.samples:
        return projection_ratio(orthonormal_span(psi, sigma_drop), delta.amplitudes)
    s = psi.conj().T @ psi
    s_vals, s_vecs = np.linalg.eigh(0.5 * (s + s.conj().T))
    keep = s_vals > sigma_drop
    x = s_vecs[:, keep] / np.sqrt(s_vals[keep])
    d = est.perturb(psi.conj().T @ delta.amplitudes, "lindep")
    proj = x.conj().T @ d
    return float(np.sqrt(max(1.0 - np.real(np.vdot(proj, proj)), 0.0)))


def _record(iteration, problem, res, basis, added=0, rejected=0) -> IterationRecord:
    return IterationRecord(
        iteration=iteration,
        ritz_values=tuple(float(v) for v in problem.ritz_values),
        residue_norms=tuple(float(r) for r in res),
        basis_size=len(basis),
        max_depth=basis.max_depth,
        added_vectors=added,
        lin_dep_rejections=rejected,
    )


def run_qdavidson(h: PauliSum, config: QDavidsonConfig,
                  estimator: MatrixElementEstimator | None = None) -> RunResult:
    """Grow a Krylov basis from mapped imaginary-time corrections of unconverged Ritz states.

    Each iteration solves the subspace problem, checks the residue norms of
    the lowest ``n_roots`` retained roots, and for every unconverged root (in
    ascending energy) appends ``exp(-i A) |Psi_I>`` when it survives the
    linear-dependence screen against the basis plus earlier additions.
    """
    est = _estimator(config, estimator)
    sigma_drop = _sigma_drop(config, est)
    eps_resid = _epsilon_resid(config, est)
    pool = resolve_pool(config.pool_spec, h.n_qubits)
    basis = KrylovBasis(h.n_qubits)
    for state in resolve_states(config.initial_states, h.n_qubits):
        basis.append(state)

    records: list[IterationRecord] = []
    status = MAX_ITERATIONS
    for j in range(config.max_iterations + 1):
        problem = solve(assemble(basis, h, est), sigma_drop)
        res = residue_norms(problem, basis, h, config.n_roots, est)
        unconverged = [k for k, r in enumerate(res) if r > eps_resid]
        log.debug("iteration %d: N_K=%d rank=%d energies=%s residues=%s", j, len(basis),
                  problem.retained_rank, problem.ritz_values[:len(res)], res)
        if not unconverged:
            records.append(_record(j, problem, res, basis))
            status = CONVERGED
            break
        if j == config.max_iterations:
            records.append(_record(j, problem, res, basis))
            break
        size, depth = len(basis), basis.max_depth
        ritz = {root: ritz_state(problem, basis, root) for root in unconverged}
        added = rejected = 0
        for root in unconverged:
            psi = ritz[root]
            energy = float(problem.ritz_values[root])
            mapping = map_correction(psi, h, energy, config.dtau, pool, est, oracle=config.oracle,
                                     angle_tol=config.angle_tol, mode=config.mapping_mode)
            delta = apply_mapping(psi, mapping)
            ratio = _screen(basis, delta, sigma_drop, est)
            if ratio <= config.epsilon_lindep:
                rejected += 1
                continue
            weights = np.abs(problem.ritz_vectors[:size, root])
            parents = tuple(int(k) for k in np.flatnonzero(weights > PARENT_TOL))
            parent_depth = max((basis.depths[k] for k in parents), default=0)
            basis.append(delta.normalize(), parent_depth + mapping.depth_increment,
                         Lineage(parents, mapping.pool_used, tuple(mapping.angles), f"root {root}"))
            added += 1
        records.append(IterationRecord(
            iteration=j,
            ritz_values=tuple(float(v) for v in problem.ritz_values),
            residue_norms=tuple(float(r) for r in res),
            basis_size=size,
            max_depth=depth,
            added_vectors=added,
            lin_dep_rejections=rejected,
        ))
        if added == 0:
            status = STALLED
            break
    return RunResult(problem, records, status, basis, est.tally)


def run_qlanczos(h: PauliSum, config: QDavidsonConfig,
                 estimator: MatrixElementEstimator | None = None) -> RunResult:
    """Krylov basis of successive mapped imaginary-time snapshots of one trajectory.

    Stops after ``config.n_steps`` snapshots or when a snapshot fails the
    linear-dependence screen.
    """
    est = _estimator(config, estimator)
    sigma_drop = _sigma_drop(config, est)
    pool = resolve_pool(config.pool_spec, h.n_qubits)
    states = resolve_states(config.initial_states, h.n_qubits)
    if len(states) != 1:
        raise ValueError("QLanczos takes exactly one initial state")
    phi = states[0]
    basis = KrylovBasis(h.n_qubits)
    basis.append(phi)

    problem = solve(assemble(basis, h, est), sigma_drop)
    records = [_record(0, problem, residue_norms(problem, basis, h, config.n_roots, est), basis)]
    status = COMPLETED
    energies = [float(est.operator_element(phi, h, phi, "h").real)]
    for step in range(1, config.n_steps + 1):
        mapping = map_correction(phi, h, energies[-1], config.dtau, pool, est, oracle=config.oracle,
                                 angle_tol=config.angle_tol)
        nxt = apply_mapping(phi, mapping)
        if _screen(basis, nxt, sigma_drop, est) <= config.epsilon_lindep:
            status = LINEAR_DEPENDENCE
            break
        basis.append(nxt.normalize(), basis.depths[-1] + mapping.depth_increment,
                     Lineage((len(basis) - 1,), mapping.pool_used, tuple(mapping.angles), "qite"))
        phi = basis.vectors[-1]
        energies.append(float(est.operator_element(phi, h, phi, "h").real))
        problem = solve(assemble(basis, h, est), sigma_drop)
        res = residue_norms(problem, basis, h, config.n_roots, est)
        records.append(_record(step, problem, res, basis, added=1))
    return RunResult(problem, records, status, basis, est.tally, {"trajectory_energies": energies})


@dataclass
class ClassicalResult:
    values: np.ndarray
    vectors: np.ndarray
    records: list[IterationRecord]
    status: str

    @property
    def iterations(self) -> int:
        return self.records[-1].iteration if self.records else 0


def default_guesses(h: np.ndarray, n_roots: int, seed: int = 0, mix: float = 1e-2) -> np.ndarray:
    """Unit vectors on the lowest diagonal entries plus a small seeded random admixture.

    The admixture keeps the search space from being trapped in the symmetry
    sectors of the chosen unit vectors.
    """
    dim = h.shape[0]
    order = np.argsort(np.real(np.diag(h)), kind="stable")[:n_roots]
    guesses = np.zeros((dim, len(order)), dtype=complex)
    guesses[order, np.arange(len(order))] = 1.0
    rng = np.random.default_rng(seed)
    guesses += mix * rng.standard_normal(guesses.shape)
    q, _ = np.linalg.qr(guesses)
    return q


def run_classical_davidson(h: np.ndarray, n_roots: int, guesses: np.ndarray | None = None, *,
                           epsilon: float = 1e-6, epsilon_lindep: float = 1e-6,
                           max_iterations: int = 200, precond_floor: float = 1e-6,
                           seed: int = 0) -> ClassicalResult:
    """Davidson iteration on a dense Hermitian matrix with the diagonal preconditioner.

    Corrections are ``-(diag(H) - E_I)^-1 r_I`` with denominators clamped to
    magnitude ``>= precond_floor``; each is Gram-Schmidt orthogonalized (twice)
    against the trial space and kept when its norm ratio exceeds
    ``epsilon_lindep``.  A rejected correction is retried once with the raw
    residue ``r_I``.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("h must be a square matrix")
    if not np.allclose(h, h.conj().T, atol=1e-10):
        raise ValueError("h must be Hermitian")
    dim = h.shape[0]
    if not 1 <= n_roots <= dim:
        raise ValueError(f"n_roots must lie in [1, {dim}]")
    b = default_guesses(h, n_roots, seed) if guesses is None else np.asarray(guesses, dtype=complex)
    if b.ndim == 1:
        b = b[:, None]
    if not np.allclose(b.conj().T @ b, np.eye(b.shape[1]), atol=1e-8):
        raise ValueError("guesses must be orthonormal")
    diag = np.real(np.diag(h))
    records: list[IterationRecord] = []
    status = MAX_ITERATIONS
    for j in range(max_iterations + 1):
        hb = h @ b
        h_bar = b.conj().T @ hb
        values, w = np.linalg.eigh(0.5 * (h_bar + h_bar.conj().T))
        k = min(n_roots, len(values))
        x = b @ w[:, :k]
        r = hb @ w[:, :k] - x * values[:k]
        res = np.linalg.norm(r, axis=0)
        unconverged = [i for i in range(k) if res[i] > epsilon]
        if not unconverged and k == n_roots:
            records.append(IterationRecord(j, tuple(values[:k]), tuple(res), b.shape[1], 0))
            status = CONVERGED
            break
        if j == max_iterations or b.shape[1] >= dim:
            records.append(IterationRecord(j, tuple(values[:k]), tuple(res), b.shape[1], 0))
            status = CONVERGED if not unconverged else MAX_ITERATIONS
            break
        size = b.shape[1]
        added = rejected = 0
        for i in unconverged:
            denom = diag - values[i]
            denom = np.where(np.abs(denom) < precond_floor, np.copysign(precond_floor, denom), denom)
            # fall back to the raw residue when the preconditioned one is dependent
            for delta in (-r[:, i] / denom, r[:, i]):
                norm0 = np.linalg.norm(delta)
                for _ in range(2):
                    delta = delta - b @ (b.conj().T @ delta)
                if norm0 > 0 and np.linalg.norm(delta) / norm0 > epsilon_lindep:
                    b = np.concatenate([b, (delta / np.linalg.norm(delta))[:, None]], axis=1)
                    added += 1
                    break
            else:
                rejected += 1
        records.append(IterationRecord(j, tuple(values[:k]), tuple(res), size, 0, added, rejected))
        if added == 0:
            status = STALLED
            break
    hb = h @ b
    values, w = np.linalg.eigh(b.conj().T @ hb)
    return ClassicalResult(values[:n_roots], b @ w[:, :n_roots], records, status)
