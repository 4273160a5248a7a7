"""Dense statevector simulation and the exact-diagonalization oracle.

Basis index ``k`` encodes qubit ``q`` in bit ``q`` (qubit 0 is the least
significant bit).  A bitstring label is read as the binary number of the
index, so ``"0011"`` has qubits 0 and 1 set.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pauli import ORACLE_MAX_QUBITS, OracleCeilingError, PauliSum, PauliWord, QubitCountError


@dataclass(frozen=True, eq=False)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (1 << self.n_qubits,):
            raise ValueError(f"expected {1 << self.n_qubits} amplitudes, got shape {amps.shape}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_array(cls, amps) -> StateVector:
        amps = np.asarray(amps, dtype=complex)
        n = int(round(np.log2(len(amps))))
        return cls(n, amps)

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> StateVector:
        nrm = self.norm()
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.n_qubits, self.amplitudes / nrm)

    def _check(self, other: StateVector) -> None:
        if self.n_qubits != other.n_qubits:
            raise QubitCountError(f"qubit count mismatch: {self.n_qubits} vs {other.n_qubits}")

    def __add__(self, other: StateVector) -> StateVector:
        self._check(other)
        return StateVector(self.n_qubits, self.amplitudes + other.amplitudes)

    def __sub__(self, other: StateVector) -> StateVector:
        self._check(other)
        return StateVector(self.n_qubits, self.amplitudes - other.amplitudes)

    def __mul__(self, scalar) -> StateVector:
        return StateVector(self.n_qubits, self.amplitudes * scalar)

    __rmul__ = __mul__

    def __repr__(self):
        return f"StateVector(n_qubits={self.n_qubits}, norm={self.norm():.6g})"


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    values: np.ndarray
    vectors: np.ndarray

    def state(self, k: int) -> StateVector:
        return StateVector.from_array(self.vectors[:, k])


def _parity(values: np.ndarray) -> np.ndarray:
    return np.bitwise_count(values).astype(np.int64) & 1


def _index(n_qubits: int) -> np.ndarray:
    return np.arange(1 << n_qubits, dtype=np.int64)


def from_bitstring(bits: str) -> StateVector:
    """Computational basis state for a ket label such as ``"0101"``."""
    bits = bits.strip()
    if not bits or set(bits) - {"0", "1"}:
        raise ValueError(f"invalid bitstring {bits!r}")
    amps = np.zeros(1 << len(bits), dtype=complex)
    amps[int(bits, 2)] = 1.0
    return StateVector(len(bits), amps)


def apply_pauli(state: StateVector, word: PauliWord) -> StateVector:
    if state.n_qubits != word.n_qubits:
        raise QubitCountError(f"qubit count mismatch: {state.n_qubits} vs {word.n_qubits}")
    idx = _index(state.n_qubits)
    sign = 1 - 2 * _parity(idx & word.z_mask)
    factor = word.coefficient * 1j ** word.n_y
    out = np.empty_like(state.amplitudes)
    out[idx ^ word.x_mask] = factor * sign * state.amplitudes
    return StateVector(state.n_qubits, out)


def _compiled(s: PauliSum) -> list[tuple[int, np.ndarray]]:
    """Group terms by X mask: each group acts as a diagonal then a bit flip."""
    cached = s._cache.get("compiled")
    if cached is not None:
        return cached
    idx = _index(s.n_qubits)
    groups: dict[int, np.ndarray] = {}
    for word, c in s.items():
        diag = c * (1j ** word.n_y) * (1 - 2 * _parity(idx & word.z_mask))
        if word.x_mask in groups:
            groups[word.x_mask] = groups[word.x_mask] + diag
        else:
            groups[word.x_mask] = diag.astype(complex)
    compiled = sorted(groups.items())
    s._cache["compiled"] = compiled
    return compiled


def apply_pauli_sum_array(amps: np.ndarray, s: PauliSum) -> np.ndarray:
    """Array-level ``s @ amps``; ``amps`` may be a vector or a ``(dim, k)`` block."""
    idx = _index(s.n_qubits)
    out = np.zeros_like(amps, dtype=complex)
    for x, diag in _compiled(s):
        if amps.ndim == 1:
            out[idx ^ x] += diag * amps
        else:
            out[idx ^ x] += diag[:, None] * amps
    return out


def apply_pauli_sum(state: StateVector, s: PauliSum) -> StateVector:
    if state.n_qubits != s.n_qubits:
        raise QubitCountError(f"qubit count mismatch: {state.n_qubits} vs {s.n_qubits}")
    return StateVector(state.n_qubits, apply_pauli_sum_array(state.amplitudes, s))


def exp_pauli_array(amps: np.ndarray, word: PauliWord, theta: float) -> np.ndarray:
    """``exp(-i theta P) amps`` for a Hermitian (phase-free) word."""
    idx = _index(word.n_qubits)
    sign = 1 - 2 * _parity(idx & word.z_mask)
    flipped = np.empty_like(amps)
    flipped[idx ^ word.x_mask] = (1j ** word.n_y) * sign * amps
    return np.cos(theta) * amps - 1j * np.sin(theta) * flipped


def apply_exp_pauli(state: StateVector, word: PauliWord, theta: float) -> StateVector:
    """Apply ``exp(-i theta P)``; the word's own phase is ignored (P must be Hermitian)."""
    if state.n_qubits != word.n_qubits:
        raise QubitCountError(f"qubit count mismatch: {state.n_qubits} vs {word.n_qubits}")
    return StateVector(state.n_qubits, exp_pauli_array(state.amplitudes, word, theta))


def inner(a: StateVector, b: StateVector) -> complex:
    a._check(b)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def expectation(a: StateVector, s: PauliSum, b: StateVector) -> complex:
    """``<a|s|b>``."""
    return inner(a, apply_pauli_sum(b, s))


def _check_ceiling(n_qubits: int, max_qubits: int) -> None:
    if n_qubits > max_qubits:
        raise OracleCeilingError(f"{n_qubits} qubits exceeds oracle ceiling {max_qubits}")


def exact_diagonalize(h: PauliSum, basis: np.ndarray | None = None,
                      max_qubits: int = ORACLE_MAX_QUBITS) -> EigenDecomposition:
    """Full Hermitian eigendecomposition of ``h``.

    ``basis`` optionally restricts the problem to a subset of computational
    basis indices (a symmetry sector); eigenvectors are embedded back into the
    full space.  Results for the whole space are cached on ``h``.
    """
    _check_ceiling(h.n_qubits, max_qubits)
    if not h.is_hermitian():
        raise ValueError("exact_diagonalize requires a Hermitian Pauli sum")
    if basis is None and "eigh" in h._cache:
        return h._cache["eigh"]
    mat = h.to_dense(max_qubits)
    if basis is None:
        values, vectors = np.linalg.eigh(mat)
        result = EigenDecomposition(values, vectors)
        h._cache["eigh"] = result
        return result
    basis = np.asarray(basis)
    values, sub = np.linalg.eigh(mat[np.ix_(basis, basis)])
    vectors = np.zeros((mat.shape[0], len(basis)), dtype=complex)
    vectors[basis, :] = sub
    return EigenDecomposition(values, vectors)


def exact_imaginary_step(state: StateVector, h: PauliSum, dtau: float, shift: float = 0.0,
                         max_qubits: int = ORACLE_MAX_QUBITS) -> StateVector:
    """Normalized ``exp(-dtau (h - shift)) state`` via the dense eigendecomposition."""
    _check_ceiling(h.n_qubits, max_qubits)
    return StateVector(state.n_qubits, imaginary_step_array(state.amplitudes, h, dtau, shift, max_qubits))


def imaginary_step_array(amps: np.ndarray, h: PauliSum, dtau: float, shift: float = 0.0,
                         max_qubits: int = ORACLE_MAX_QUBITS, normalize: bool = True) -> np.ndarray:
    eig = exact_diagonalize(h, max_qubits=max_qubits)
    expo = -dtau * (eig.values - shift)
    coeffs = eig.vectors.conj().T @ amps
    if normalize:
        # only the direction matters; keeps exp() from overflowing
        expo = expo - expo.max()
    out = eig.vectors @ (np.exp(expo) * coeffs)
    if normalize:
        out = out / np.linalg.norm(out)
    return out


def sector_indices(n_qubits: int, n_ones: int | None = None, n_alpha: int | None = None,
                   n_beta: int | None = None) -> np.ndarray:
    """Basis indices with a fixed number of set bits.

    ``n_ones`` fixes the total popcount (particle number or magnetization);
    ``n_alpha``/``n_beta`` fix the popcounts of the even and odd qubits, the
    interleaved spin-orbital convention used for molecules.
    """
    idx = _index(n_qubits)
    keep = np.ones(len(idx), dtype=bool)
    if n_ones is not None:
        keep &= np.bitwise_count(idx) == n_ones
    even = sum(1 << q for q in range(0, n_qubits, 2))
    odd = sum(1 << q for q in range(1, n_qubits, 2))
    if n_alpha is not None:
        keep &= np.bitwise_count(idx & even) == n_alpha
    if n_beta is not None:
        keep &= np.bitwise_count(idx & odd) == n_beta
    return idx[keep]


def fidelity(a: StateVector, b: StateVector) -> float:
    """``|<a|b>|`` for normalized inputs."""
    return abs(inner(a, b))
