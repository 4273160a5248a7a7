"""Pauli words and weighted Pauli sums in symplectic bitmask form.

A word on ``n`` qubits is stored as two integer masks: bit ``q`` of
``x_mask`` is set when qubit ``q`` carries X or Y, bit ``q`` of ``z_mask``
when it carries Z or Y.  The word with masks ``(x, z)`` denotes the
Hermitian tensor product of the corresponding single-qubit matrices (so a
set bit in both masks is Y, not XZ).  An extra global phase ``i**phase`` is
tracked as an integer modulo 4.

String labels are written with qubit 0 as the *rightmost* character, the
same convention used for computational-basis bitstrings, so ``"ZX"`` is
X on qubit 0 and Z on qubit 1.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np

DEFAULT_DROP_TOL = 1e-12
ORACLE_MAX_QUBITS = 14

_PHASES = (1.0 + 0j, 1j, -1.0 + 0j, -1j)
_LETTERS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_SINGLE = {
    (0, 0): np.eye(2, dtype=complex),
    (1, 0): np.array([[0, 1], [1, 0]], dtype=complex),
    (1, 1): np.array([[0, -1j], [1j, 0]], dtype=complex),
    (0, 1): np.array([[1, 0], [0, -1]], dtype=complex),
}


class QubitCountError(ValueError):
    """Operands act on different numbers of qubits."""


class OracleCeilingError(ValueError):
    """A dense realization was requested above the configured qubit ceiling."""


def _popcount(v: int) -> int:
    return bin(v).count("1")


def _check_same(n_a: int, n_b: int) -> None:
    if n_a != n_b:
        raise QubitCountError(f"qubit count mismatch: {n_a} vs {n_b}")


@dataclass(frozen=True)
class PauliWord:
    """Single Pauli string with a phase ``i**phase``."""

    n_qubits: int
    x_mask: int = 0
    z_mask: int = 0
    phase: int = 0

    def __post_init__(self):
        if self.n_qubits < 0:
            raise ValueError("n_qubits must be non-negative")
        limit = 1 << self.n_qubits
        if not (0 <= self.x_mask < limit and 0 <= self.z_mask < limit):
            raise ValueError(f"masks do not fit in {self.n_qubits} qubits")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def identity(cls, n_qubits: int) -> PauliWord:
        return cls(n_qubits)

    @classmethod
    def from_label(cls, label: str, phase: int = 0) -> PauliWord:
        """Build a word from a string over ``IXYZ`` (qubit 0 rightmost)."""
        label = label.strip().upper()
        x = z = 0
        for q, ch in enumerate(reversed(label)):
            try:
                bx, bz = _LETTERS[ch]
            except KeyError:
                raise ValueError(f"invalid Pauli letter {ch!r} in {label!r}") from None
            x |= bx << q
            z |= bz << q
        return cls(len(label), x, z, phase)

    @classmethod
    def from_ops(cls, n_qubits: int, ops: Mapping[int, str], phase: int = 0) -> PauliWord:
        """Build a word from a ``{qubit: letter}`` mapping."""
        x = z = 0
        for q, ch in ops.items():
            if not 0 <= q < n_qubits:
                raise ValueError(f"qubit {q} out of range for {n_qubits} qubits")
            bx, bz = _LETTERS[ch.upper()]
            x |= bx << q
            z |= bz << q
        return cls(n_qubits, x, z, phase)

    @property
    def key(self) -> tuple[int, int]:
        """Phase-free identity of the word."""
        return (self.x_mask, self.z_mask)

    @property
    def coefficient(self) -> complex:
        return _PHASES[self.phase]

    @property
    def weight(self) -> int:
        return _popcount(self.x_mask | self.z_mask)

    @property
    def n_y(self) -> int:
        return _popcount(self.x_mask & self.z_mask)

    @property
    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    def strip_phase(self) -> PauliWord:
        return PauliWord(self.n_qubits, self.x_mask, self.z_mask, 0)

    def label(self) -> str:
        chars = []
        for q in reversed(range(self.n_qubits)):
            bits = ((self.x_mask >> q) & 1, (self.z_mask >> q) & 1)
            chars.append("IXYZ"[[(0, 0), (1, 0), (1, 1), (0, 1)].index(bits)])
        return "".join(chars)

    def commutes_with(self, other: PauliWord) -> bool:
        _check_same(self.n_qubits, other.n_qubits)
        return symplectic_product(self, other) == 0

    def __mul__(self, other):
        if isinstance(other, PauliWord):
            return multiply(self, other)
        return NotImplemented

    def __repr__(self):
        prefix = ("", "i", "-", "-i")[self.phase]
        return f"PauliWord({prefix}{self.label() or 'I'})"

    def to_dense(self, max_qubits: int = ORACLE_MAX_QUBITS) -> np.ndarray:
        if self.n_qubits > max_qubits:
            raise OracleCeilingError(f"{self.n_qubits} qubits exceeds oracle ceiling {max_qubits}")
        mat = np.array([[1.0 + 0j]])
        for q in reversed(range(self.n_qubits)):
            bits = ((self.x_mask >> q) & 1, (self.z_mask >> q) & 1)
            mat = np.kron(mat, _SINGLE[bits])
        return self.coefficient * mat


def symplectic_product(a: PauliWord, b: PauliWord) -> int:
    """0 if the words commute, 1 if they anticommute."""
    return (_popcount(a.x_mask & b.z_mask) + _popcount(a.z_mask & b.x_mask)) & 1


def multiply(a: PauliWord, b: PauliWord) -> PauliWord:
    """Product ``a @ b`` with exact phase tracking.

    With ``P(x, z) = i**(x.z) X**x Z**z`` the product picks up
    ``(-1)**(z_a . x_b)`` from reordering ``Z**z_a X**x_b``.
    """
    _check_same(a.n_qubits, b.n_qubits)
    x = a.x_mask ^ b.x_mask
    z = a.z_mask ^ b.z_mask
    phase = (
        a.phase
        + b.phase
        + _popcount(a.x_mask & a.z_mask)
        + _popcount(b.x_mask & b.z_mask)
        + 2 * _popcount(a.z_mask & b.x_mask)
        - _popcount(x & z)
    )
    return PauliWord(a.n_qubits, x, z, phase)


class PauliSum:
    """Weighted sum of phase-free Pauli words.

    Instances are treated as immutable; every arithmetic operation returns a
    new sum.  Terms whose coefficient magnitude drops below ``drop_tol`` are
    removed.
    """

    __slots__ = ("n_qubits", "drop_tol", "_terms", "_cache")

    def __init__(
        self,
        n_qubits: int,
        terms: Mapping[tuple[int, int], complex] | None = None,
        drop_tol: float = DEFAULT_DROP_TOL,
    ):
        self.n_qubits = n_qubits
        self.drop_tol = drop_tol
        self._terms: dict[tuple[int, int], complex] = {}
        self._cache: dict = {}
        if terms:
            for key, c in terms.items():
                self._accumulate(key, complex(c))
            self._prune()

    # -- construction -------------------------------------------------
    @classmethod
    def from_words(cls, words: Iterable[tuple[PauliWord, complex]], n_qubits: int,
                   drop_tol: float = DEFAULT_DROP_TOL) -> PauliSum:
        out = cls(n_qubits, drop_tol=drop_tol)
        for word, c in words:
            _check_same(n_qubits, word.n_qubits)
            out._accumulate(word.key, c * word.coefficient)
        out._prune()
        return out

    @classmethod
    def from_labels(cls, labels: Mapping[str, complex], drop_tol: float = DEFAULT_DROP_TOL) -> PauliSum:
        words = [(PauliWord.from_label(lab), c) for lab, c in labels.items()]
        if not words:
            raise ValueError("cannot infer qubit count from an empty mapping")
        return cls.from_words(words, words[0][0].n_qubits, drop_tol)

    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> PauliSum:
        return cls(n_qubits, {(0, 0): coeff})

    def _accumulate(self, key: tuple[int, int], c: complex) -> None:
        self._terms[key] = self._terms.get(key, 0.0) + c

    def _prune(self) -> None:
        dead = [k for k, c in self._terms.items() if abs(c) < self.drop_tol]
        for k in dead:
            del self._terms[k]

    def _new(self) -> PauliSum:
        return PauliSum(self.n_qubits, drop_tol=self.drop_tol)

    # -- views --------------------------------------------------------
    @property
    def terms(self) -> Mapping[tuple[int, int], complex]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[PauliWord, complex]]:
        """Terms in deterministic ``(x_mask, z_mask)`` order."""
        for key in sorted(self._terms):
            yield PauliWord(self.n_qubits, *key), self._terms[key]

    def coefficient(self, word: PauliWord) -> complex:
        return self._terms.get(word.key, 0.0) * word.coefficient.conjugate()

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self):
        return self.items()

    def __eq__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.n_qubits == other.n_qubits and self._terms == other._terms

    __hash__ = None

    def __repr__(self):
        body = " + ".join(f"({c:.6g}) {w.label()}" for w, c in list(self.items())[:6])
        more = "" if len(self) <= 6 else f" + ... [{len(self)} terms]"
        return f"PauliSum({body or '0'}{more})"

    @property
    def max_abs_coeff(self) -> float:
        """Largest coefficient magnitude, excluding the identity term."""
        vals = [abs(c) for k, c in self._terms.items() if k != (0, 0)]
        return max(vals, default=0.0)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(c.imag) <= tol for c in self._terms.values())

    # -- algebra ------------------------------------------------------
    def add_term(self, word: PauliWord, coeff: complex = 1.0) -> PauliSum:
        _check_same(self.n_qubits, word.n_qubits)
        out = self.copy()
        out._accumulate(word.key, coeff * word.coefficient)
        out._prune()
        return out

    def copy(self) -> PauliSum:
        out = self._new()
        out._terms = dict(self._terms)
        return out

    def __add__(self, other):
        if isinstance(other, PauliSum):
            _check_same(self.n_qubits, other.n_qubits)
            out = self.copy()
            for k, c in other._terms.items():
                out._accumulate(k, c)
        elif isinstance(other, (int, float, complex)):
            out = self.copy()
            out._accumulate((0, 0), other)
        else:
            return NotImplemented
        out._prune()
        return out

    __radd__ = __add__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        if isinstance(other, (PauliSum, int, float, complex)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            out = self._new()
            out._terms = {k: c * other for k, c in self._terms.items()}
            out._prune()
            return out
        if isinstance(other, PauliWord):
            other = PauliSum.from_words([(other, 1.0)], other.n_qubits)
        if isinstance(other, PauliSum):
            _check_same(self.n_qubits, other.n_qubits)
            out = self._new()
            for (xa, za), ca in self._terms.items():
                wa = PauliWord(self.n_qubits, xa, za)
                for (xb, zb), cb in other._terms.items():
                    w = multiply(wa, PauliWord(self.n_qubits, xb, zb))
                    out._accumulate(w.key, ca * cb * w.coefficient)
            out._prune()
            return out
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self * other
        return NotImplemented

    def adjoint(self) -> PauliSum:
        out = self._new()
        out._terms = {k: c.conjugate() for k, c in self._terms.items()}
        return out

    def commutator(self, other: PauliSum) -> PauliSum:
        return self * other - other * self

    def simplify(self, tol: float) -> PauliSum:
        out = PauliSum(self.n_qubits, drop_tol=tol)
        out._terms = dict(self._terms)
        out._prune()
        return out

    # -- realization --------------------------------------------------
    def to_dense(self, max_qubits: int = ORACLE_MAX_QUBITS) -> np.ndarray:
        """Dense ``2**n x 2**n`` matrix (qubit 0 is the least significant bit)."""
        if self.n_qubits > max_qubits:
            raise OracleCeilingError(f"{self.n_qubits} qubits exceeds oracle ceiling {max_qubits}")
        dim = 1 << self.n_qubits
        mat = np.zeros((dim, dim), dtype=complex)
        idx = np.arange(dim)
        for (x, z), c in sorted(self._terms.items()):
            sign = 1 - 2 * (np.bitwise_count(idx & z).astype(np.int64) & 1)
            mat[idx ^ x, idx] += c * (1j ** _popcount(x & z)) * sign
        return mat

    # -- text I/O -----------------------------------------------------
    def to_text(self) -> str:
        lines = []
        for word, c in self.items():
            lines.append(f"{c.real:.17g} {c.imag:.17g} {word.label()}")
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_text(cls, text: str, n_qubits: int | None = None,
                  drop_tol: float = DEFAULT_DROP_TOL) -> PauliSum:
        terms: dict[tuple[int, int], complex] = {}
        n = n_qubits
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"line {lineno}: expected '<re> <im> <word>', got {raw!r}")
            word = PauliWord.from_label(parts[2])
            if n is None:
                n = word.n_qubits
            elif word.n_qubits != n:
                raise QubitCountError(f"line {lineno}: word length {word.n_qubits} != {n}")
            c = complex(float(parts[0]), float(parts[1]))
            terms[word.key] = terms.get(word.key, 0.0) + c
        if n is None:
            raise ValueError("empty Pauli sum text without explicit n_qubits")
        return cls(n, terms, drop_tol)


def sum_add(s: PauliSum, word: PauliWord, coeff: complex) -> PauliSum:
    """Functional form of :meth:`PauliSum.add_term`."""
    return s.add_term(word, coeff)


def to_dense(s: PauliSum | PauliWord, max_qubits: int = ORACLE_MAX_QUBITS) -> np.ndarray:
    return s.to_dense(max_qubits)
