"""Shared oracles and fixtures.

The dense oracle here is built from explicit Kronecker products so that it is
independent of the bitmask code paths under test.
"""
from functools import reduce
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

from qdavidson.pauli import PauliSum, PauliWord

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"

SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def kron_label(label: str) -> np.ndarray:
    """Dense matrix of a label written with qubit 0 rightmost (kron order = label order)."""
    return reduce(np.kron, [SINGLE[ch] for ch in label])


def kron_word(word: PauliWord) -> np.ndarray:
    return word.coefficient * kron_label(word.label())


def kron_sum(s: PauliSum) -> np.ndarray:
    dim = 1 << s.n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for word, c in s.items():
        out += c * kron_label(word.label())
    return out


def random_state(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return v / np.linalg.norm(v)


def fixture_path(name: str) -> Path:
    path = FIXTURES / name
    if not path.is_file():
        pytest.skip(f"fixture {name} not present")
    return path


@st.composite
def words(draw, n_qubits=None, max_qubits=6):
    n = draw(st.integers(1, max_qubits)) if n_qubits is None else n_qubits
    x = draw(st.integers(0, (1 << n) - 1))
    z = draw(st.integers(0, (1 << n) - 1))
    phase = draw(st.integers(0, 3))
    return PauliWord(n, x, z, phase)


@st.composite
def word_tuples(draw, count, max_qubits=6):
    n = draw(st.integers(1, max_qubits))
    return tuple(draw(words(n_qubits=n)) for _ in range(count))


@st.composite
def hermitian_sums(draw, max_qubits=4, max_terms=8):
    n = draw(st.integers(1, max_qubits))
    k = draw(st.integers(1, max_terms))
    terms = []
    for _ in range(k):
        w = draw(words(n_qubits=n)).strip_phase()
        c = draw(st.floats(-2, 2, allow_nan=False, allow_infinity=False))
        terms.append((w, c))
    return PauliSum.from_words(terms, n)


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(test_acceptance.RESULTS, key=lambda s: int(s.split()[0][3:])):
            terminalreporter.write_line(line)
