"""Unitary mapping of a normalized imaginary-time step and circuit-depth accounting.

The step ``c**-1/2 exp(-dtau (H - E)) |Phi>`` is approximated by one Trotter
step of ``exp(-i A)`` with ``A = sum_a theta_a P_a / dtau`` over a pool of
odd-Y words.  To first order the coefficients solve the real system

    Re(S) a = b,   S_ab = <Phi|P_a P_b|Phi>,   b_a = Im<Phi|P_a H|Phi> / sqrt(c)

(the constant part of the shifted Hamiltonian drops out of ``b`` because
``<Phi|P_a|Phi>`` is real for Hermitian words).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .measurement import MatrixElementEstimator
from .pauli import ORACLE_MAX_QUBITS, PauliSum, PauliWord, QubitCountError
from .statevector import (StateVector, apply_pauli_sum_array, exp_pauli_array,
                          imaginary_step_array)

ANGLE_CAP = np.pi
ANGLE_TOL = 1e-8
REG_START = 1e-8
REG_STOP = 1e-2
MAPPING_MODES = ("step", "residue")


@dataclass(frozen=True)
class DepthModel:
    """Serialized gate count of one Trotter step of single-word exponentials.

    A weight-``w`` word costs a ``2 (w - 1)`` CNOT ladder, one ``R_z`` and a
    basis change before and after each X or Y factor.  No parallelism is
    credited.
    """

    convention: str = "2*(w-1) CNOT + 1 Rz + 2 per X/Y basis change, serial"

    def word_cost(self, word: PauliWord) -> int:
        w = word.weight
        if w == 0:
            return 0
        n_xy = bin(word.x_mask).count("1")
        return 2 * max(w - 1, 0) + 1 + 2 * n_xy

    def depth_of(self, words: Iterable[PauliWord]) -> int:
        return sum(self.word_cost(word) for word in words)


DEFAULT_DEPTH_MODEL = DepthModel()


def depth_of(words: Iterable[PauliWord]) -> int:
    """Depth of ``prod_a exp(-i theta_a P_a)`` under :data:`DEFAULT_DEPTH_MODEL`.

    >>> depth_of([PauliWord.from_label("XX")])
    7
    """
    return DEFAULT_DEPTH_MODEL.depth_of(words)


def odd_y_pool(n_qubits: int, max_weight: int | None = None) -> tuple[PauliWord, ...]:
    """Every phase-free word with an odd number of Y factors, by weight then masks."""
    words = []
    for x, z in itertools.product(range(1 << n_qubits), repeat=2):
        if bin(x & z).count("1") % 2 == 1:
            word = PauliWord(n_qubits, x, z)
            if max_weight is None or word.weight <= max_weight:
                words.append(word)
    words.sort(key=lambda w: (w.weight, w.x_mask, w.z_mask))
    return tuple(words)


@dataclass(frozen=True, eq=False)
class MappingResult:
    """Solved entangler.  ``angles`` are the applied rotations ``a_alpha * dtau``.

    Only words with ``|angle| > angle_tol`` are kept in ``pool_used``.
    """

    angles: np.ndarray
    pool_used: tuple[PauliWord, ...]
    normalization_c: float
    fidelity: float | None
    depth_increment: int
    regularization: float
    n_qubits: int

    def __post_init__(self):
        if not np.all(np.isfinite(self.angles)):
            raise ValueError("non-finite mapping angles")


def _unique(pool: Iterable[PauliWord]) -> list[PauliWord]:
    seen = set()
    out = []
    for word in pool:
        word = word.strip_phase()
        if word.key not in seen:
            seen.add(word.key)
            out.append(word)
    return out


def _pool_action(amps: np.ndarray, words: Sequence[PauliWord]) -> np.ndarray:
    """Columns ``P_a |Phi>``."""
    n = words[0].n_qubits
    idx = np.arange(1 << n, dtype=np.int64)
    out = np.empty((len(idx), len(words)), dtype=complex)
    for col, word in enumerate(words):
        sign = 1 - 2 * (np.bitwise_count(idx & word.z_mask).astype(np.int64) & 1)
        out[idx ^ word.x_mask, col] = (1j ** word.n_y) * sign * amps
    return out


def _trotter(amps: np.ndarray, words: Sequence[PauliWord], angles: Sequence[float]) -> np.ndarray:
    for word, theta in zip(words, angles):
        amps = exp_pauli_array(amps, word, theta)
    return amps


def _spectral_system(state, h, words, pool_amps, hphi, sqrt_c, est):
    """Eigenvalues and eigenvectors of ``Re(S)`` plus ``b`` in that eigenbasis."""
    noisy_s = est.perturbs("mapping_s")
    noisy_b = est.perturbs("mapping_b")
    if not (noisy_s or noisy_b):
        # Re(S) = W^T W with W = [Re V; Im V], and b = W^T [Im y; -Re y]
        w = np.concatenate([pool_amps.real, pool_amps.imag])
        y = hphi / sqrt_c
        rhs = np.concatenate([y.imag, -y.real])
        left, sv, right_t = np.linalg.svd(w, full_matrices=False)
        return sv ** 2, right_t.T, sv * (left.T @ rhs)
    n = len(words)
    if est.samples:
        s = np.eye(n, dtype=complex)
        for a, b in itertools.combinations(range(n), 2):
            word = words[a] * words[b]
            s[a, b] = est.pauli_element(state, word, state) if noisy_s else \
                np.vdot(pool_amps[:, a], pool_amps[:, b])
            s[b, a] = np.conj(s[a, b])
        if noisy_b:
            raw = np.array([est.operator_element(state, PauliSum.from_words([(wd, 1.0)], wd.n_qubits) * h,
                                                 state, "mapping_b") for wd in words])
        else:
            raw = pool_amps.conj().T @ hphi
    else:
        s = pool_amps.conj().T @ pool_amps
        iu = np.triu_indices(n, 1)
        s[iu] = est.perturb(s[iu], "mapping_s")
        s = np.triu(s, 1) + np.triu(s, 1).conj().T + np.eye(n)
        raw = est.perturb(pool_amps.conj().T @ hphi, "mapping_b")
    s_real = s.real
    b = raw.imag / sqrt_c
    vals, vecs = np.linalg.eigh(0.5 * (s_real + s_real.T))
    return vals, vecs, vecs.T @ b


def map_correction(state: StateVector, h: PauliSum, energy: float, dtau: float,
                   pool: Iterable[PauliWord], estimator: MatrixElementEstimator | None = None,
                   *, oracle: bool = True, angle_cap: float = ANGLE_CAP, angle_tol: float = ANGLE_TOL,
                   max_qubits: int = ORACLE_MAX_QUBITS, mode: str = "step") -> MappingResult:
    """Solve for the entangler approximating ``exp(-dtau (H - energy))`` on ``state``.

    Parameters
    ----------
    state : StateVector
        Normalized input.
    h : PauliSum
    energy : float
        Shift ``E``; the Ritz value of the root being corrected.
    dtau : float
    pool : iterable of PauliWord
        Candidate Hermitian words; duplicates are dropped.
    estimator : MatrixElementEstimator, optional
        Source of ``S`` and ``b``; exact by default.
    oracle : bool
        Use the dense imaginary step (when within ``max_qubits``) for ``c``
        and to pick the best member of the regularization ladder.

    mode : {"step", "residue"}
        ``"step"`` targets the normalized imaginary-time step.  ``"residue"``
        targets its first-order part under the shift ``H - E + 1/dtau``,
        namely the normalized ``-(H - E)|Phi>``; the resulting rotation does
        not shrink with ``dtau`` and a vanishing residue gives an empty
        entangler.

    Notes
    -----
    Tikhonov shifts ``lambda = 1e-8 * tr(S) / dim`` up to ``1e-2`` form the
    solved family.  With the oracle the most faithful member wins; without it
    the smallest shift whose angles stay inside ``angle_cap`` is used.
    """
    if state.n_qubits != h.n_qubits:
        raise QubitCountError(f"qubit count mismatch: {state.n_qubits} vs {h.n_qubits}")
    if not dtau > 0:
        raise ValueError(f"dtau must be positive, got {dtau}")
    words = _unique(pool)
    if not words:
        raise ValueError("empty operator pool")
    if any(w.n_qubits != state.n_qubits for w in words):
        raise QubitCountError("pool words do not match the state's qubit count")
    if mode not in MAPPING_MODES:
        raise ValueError(f"mode must be one of {MAPPING_MODES}, got {mode!r}")
    est = estimator or MatrixElementEstimator()
    amps = state.amplitudes
    use_oracle = oracle and state.n_qubits <= max_qubits

    hphi = apply_pauli_sum_array(amps, h)
    target = None
    if mode == "residue":
        # first order of exp(-dtau H') with H' = H - E + 1/dtau is -dtau (H - E)
        resid = -dtau * (hphi - energy * amps)
        c = float(np.real(np.vdot(resid, resid)))
        if c <= np.finfo(float).tiny:
            return MappingResult(np.zeros(0), (), c, 1.0, 0, 0.0, state.n_qubits)
        target = resid / np.sqrt(c)
    elif use_oracle:
        step = imaginary_step_array(amps, h, dtau, shift=energy, max_qubits=max_qubits, normalize=False)
        c = float(np.real(np.vdot(step, step)))
        target = step / np.sqrt(c)
    else:
        mean = float(np.real(np.vdot(amps, hphi)))
        c = 1.0 - 2.0 * dtau * (mean - energy)
        if c <= 0:
            raise ValueError(f"linear-order normalization c={c:.3g} is not positive; reduce dtau")
    sqrt_c = np.sqrt(c)

    pool_amps = _pool_action(amps, words)
    vals, vecs, b_eig = _spectral_system(state, h, words, pool_amps, hphi, sqrt_c, est)
    lam0 = REG_START * float(np.sum(vals)) / len(words)
    ladder = []
    lam = lam0
    while lam <= REG_STOP * (1 + 1e-12):
        ladder.append(lam)
        lam *= 10.0

    best = None
    for lam in ladder:
        denom = np.clip(vals, 0.0, None) + lam
        a = vecs @ (b_eig / denom)
        theta = a * dtau
        if not np.all(np.isfinite(theta)):
            continue
        capped = np.any(np.abs(theta) > angle_cap)
        theta = np.clip(theta, -angle_cap, angle_cap)
        keep = np.abs(theta) > angle_tol
        used = [w for w, k in zip(words, keep) if k]
        kept = theta[keep]
        if target is None:
            if capped and lam != ladder[-1]:
                continue
            best = (None, lam, used, kept)
            break
        mapped = _trotter(amps, used, kept)
        fid = float(abs(np.vdot(target, mapped)))
        if best is None or fid > best[0] + 1e-15:
            best = (fid, lam, used, kept)
    if best is None:
        raise np.linalg.LinAlgError("mapping system could not be solved at any regularization")
    fid, lam, used, kept = best
    if fid is not None:
        fid = min(fid, 1.0)
    return MappingResult(angles=np.asarray(kept, dtype=float), pool_used=tuple(used), normalization_c=c,
                         fidelity=fid, depth_increment=depth_of(used), regularization=lam,
                         n_qubits=state.n_qubits)


def apply_mapping(state: StateVector, result: MappingResult) -> StateVector:
    """Apply ``prod_a exp(-i theta_a P_a)`` in pool order."""
    if state.n_qubits != result.n_qubits:
        raise QubitCountError(f"qubit count mismatch: {state.n_qubits} vs {result.n_qubits}")
    return StateVector(state.n_qubits, _trotter(state.amplitudes, result.pool_used, result.angles))
