"""Krylov-subspace matrices and the generalized eigenproblem ``H V = E S V``."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .measurement import MatrixElementEstimator
from .pauli import PauliSum, PauliWord, QubitCountError
from .statevector import StateVector, apply_pauli_sum_array

SIGMA_DROP = 1e-8
NORM_TOL = 1e-10
PSD_TOL = 1e-10


class SubspaceError(RuntimeError):
    """Raised when the overlap matrix is too indefinite to trust."""


@dataclass(frozen=True)
class Lineage:
    """How a Krylov vector was made: Ritz parents and the entangler applied."""

    parents: tuple[int, ...] = ()
    words: tuple[PauliWord, ...] = ()
    angles: tuple[float, ...] = ()
    origin: str = "initial"


@dataclass
class KrylovBasis:
    """Ordered normalized Krylov vectors with circuit depth and lineage."""

    n_qubits: int
    vectors: list[StateVector] = field(default_factory=list)
    depths: list[int] = field(default_factory=list)
    lineage: list[Lineage] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.vectors)

    def append(self, state: StateVector, depth: int = 0, lineage: Lineage | None = None) -> None:
        if state.n_qubits != self.n_qubits:
            raise QubitCountError(f"qubit count mismatch: {state.n_qubits} vs {self.n_qubits}")
        if abs(state.norm() - 1.0) > NORM_TOL:
            raise ValueError(f"Krylov vectors must be normalized (norm {state.norm():.3g})")
        self.vectors.append(state)
        self.depths.append(int(depth))
        self.lineage.append(lineage or Lineage())

    def matrix(self) -> np.ndarray:
        """Vectors as the columns of a ``(2**n, N_K)`` array."""
        return np.stack([v.amplitudes for v in self.vectors], axis=1)

    @property
    def max_depth(self) -> int:
        return max(self.depths, default=0)


@dataclass(frozen=True, eq=False)
class SubspaceProblem:
    h_matrix: np.ndarray
    s_matrix: np.ndarray
    ritz_values: np.ndarray | None = None
    ritz_vectors: np.ndarray | None = None
    retained_rank: int = 0
    sigma_drop: float = SIGMA_DROP
    # whitening map ``X = U_r diag(s_r**-0.5)`` of the retained overlap modes
    whitening: np.ndarray | None = None

    @property
    def size(self) -> int:
        return self.h_matrix.shape[0]

    @property
    def solved(self) -> bool:
        return self.ritz_values is not None


def _hermitize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


def assemble(basis: KrylovBasis, h: PauliSum,
             estimator: MatrixElementEstimator | None = None) -> SubspaceProblem:
    """Measure ``H_KL = <psi_K|H|psi_L>`` and ``S_KL = <psi_K|psi_L>``.

    Only the upper triangle is estimated; the lower triangle is its conjugate
    and the diagonal of ``S`` is 1 by normalization.  The identity term of
    ``h`` contributes ``h_0 S_KL`` through the same overlap estimate, as it
    would on hardware.
    """
    if len(basis) == 0:
        raise ValueError("cannot assemble an empty basis")
    if h.n_qubits != basis.n_qubits:
        raise QubitCountError(f"qubit count mismatch: {h.n_qubits} vs {basis.n_qubits}")
    est = estimator or MatrixElementEstimator()
    n = len(basis)
    iu = np.triu_indices(n)
    # the identity term is the overlap itself, so it shares the S estimate
    identity = PauliWord.identity(h.n_qubits)
    h0 = h.coefficient(identity)
    rest = h - PauliSum.identity(h.n_qubits, h0) if h0 else h
    if est.samples:
        hm = np.zeros((n, n), dtype=complex)
        sm = np.zeros((n, n), dtype=complex)
        for k, l in zip(*iu):
            bra, ket = basis.vectors[k], basis.vectors[l]
            sm[k, l] = 1.0 if k == l else est.overlap(bra, ket, "s")
            hm[k, l] = h0 * sm[k, l] + est.operator_element(bra, rest, ket, "h")
    else:
        psi = basis.matrix()
        hm = psi.conj().T @ apply_pauli_sum_array(psi, rest)
        sm = psi.conj().T @ psi
        hm[iu] = est.perturb(hm[iu], "h")
        off = np.triu_indices(n, 1)
        sm[off] = est.perturb(sm[off], "s")
        np.fill_diagonal(sm, 1.0)
        hm = hm + h0 * sm
    hm = np.triu(hm) + np.triu(hm, 1).conj().T
    sm = np.triu(sm) + np.triu(sm, 1).conj().T
    hm[np.diag_indices(n)] = hm.diagonal().real
    sm[np.diag_indices(n)] = sm.diagonal().real
    return SubspaceProblem(hm, sm)


def solve(problem: SubspaceProblem, sigma_drop: float = SIGMA_DROP,
          psd_tol: float | None = None) -> SubspaceProblem:
    """Canonical orthogonalization then an ordinary Hermitian eigensolve.

    Overlap modes with eigenvalue below ``sigma_drop`` are discarded.  Raises
    :class:`SubspaceError` when ``S`` has an eigenvalue below ``-psd_tol``
    (default ``max(1e-10, sigma_drop)``), a sign that estimator noise
    overwhelms the overlap matrix.
    """
    hm = _hermitize(np.asarray(problem.h_matrix, dtype=complex))
    sm = _hermitize(np.asarray(problem.s_matrix, dtype=complex))
    s_vals, s_vecs = np.linalg.eigh(sm)
    tol = max(PSD_TOL, sigma_drop) if psd_tol is None else psd_tol
    if s_vals[0] < -tol:
        raise SubspaceError(f"overlap matrix eigenvalue {s_vals[0]:.3e} below -{tol:.1e}")
    keep = s_vals > sigma_drop
    if not keep.any():
        raise SubspaceError("no overlap modes above sigma_drop")
    x = s_vecs[:, keep] / np.sqrt(s_vals[keep])
    h_white = _hermitize(x.conj().T @ hm @ x)
    values, w = np.linalg.eigh(h_white)
    return replace(problem, h_matrix=hm, s_matrix=sm, ritz_values=values, ritz_vectors=x @ w,
                   retained_rank=int(keep.sum()), sigma_drop=sigma_drop, whitening=x)


def ritz_state(problem: SubspaceProblem, basis: KrylovBasis, root: int) -> StateVector:
    """``|Psi_I> = sum_K V_KI |psi_K>``, renormalized against round-off."""
    _check_root(problem, root)
    amps = basis.matrix() @ problem.ritz_vectors[:, root]
    return StateVector(basis.n_qubits, amps / np.linalg.norm(amps))


def _check_root(problem: SubspaceProblem, root: int) -> None:
    if not problem.solved:
        raise ValueError("problem has not been solved")
    if not 0 <= root < problem.retained_rank:
        raise IndexError(f"root {root} outside retained rank {problem.retained_rank}")


def residue_norm_sq(problem: SubspaceProblem, basis: KrylovBasis, h: PauliSum, root: int,
                    estimator: MatrixElementEstimator | None = None) -> float:
    """``sum_KL V*_KI V_LI <psi_K|(H - E_I)^2|psi_L>``, clamped at zero."""
    _check_root(problem, root)
    est = estimator or MatrixElementEstimator()
    psi = basis.matrix()
    energy = problem.ritz_values[root]
    r = apply_pauli_sum_array(psi, h) - energy * psi
    m = r.conj().T @ r
    if est.perturbs("residue") and not est.samples:
        iu = np.triu_indices(len(basis))
        m[iu] = est.perturb(m[iu], "residue")
        m = np.triu(m) + np.triu(m, 1).conj().T
    v = problem.ritz_vectors[:, root]
    return max(float(np.real(v.conj() @ m @ v)), 0.0)


def residue_norms(problem: SubspaceProblem, basis: KrylovBasis, h: PauliSum, n_roots: int,
                  estimator: MatrixElementEstimator | None = None) -> np.ndarray:
    return np.sqrt([residue_norm_sq(problem, basis, h, k, estimator)
                    for k in range(min(n_roots, problem.retained_rank))])


def orthonormal_span(vectors: np.ndarray, sigma_drop: float = SIGMA_DROP) -> np.ndarray:
    """Orthonormal columns spanning the retained overlap modes of ``vectors``.

    This is the same canonical whitening used by :func:`solve`, so the
    linear-dependence screen and the eigensolve see one subspace.
    """
    s = _hermitize(vectors.conj().T @ vectors)
    s_vals, s_vecs = np.linalg.eigh(s)
    keep = s_vals > sigma_drop
    return vectors @ (s_vecs[:, keep] / np.sqrt(s_vals[keep]))


def projection_ratio(span: np.ndarray, delta: np.ndarray) -> float:
    """``|delta'| / |delta|`` after removing the component inside ``span``."""
    rest = delta / np.linalg.norm(delta)
    for _ in range(2):
        rest = rest - span @ (span.conj().T @ rest)
    return float(np.linalg.norm(rest))
