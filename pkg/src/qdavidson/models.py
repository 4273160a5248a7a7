"""1D Heisenberg benchmark Hamiltonians."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .pauli import PauliSum, PauliWord

RANGES = ("short", "long")
CONVENTIONS = ("pauli", "spin_half")


@dataclass(frozen=True)
class HeisenbergSpec:
    """Ring of ``n_spins`` with ``H = -sum_ij C_ij S_i . S_j``.

    ``convention="pauli"`` takes ``S = sigma``; ``"spin_half"`` takes
    ``S = sigma / 2``.  ``couplings`` overrides ``C_ij`` for individual bonds
    (keys are unordered spin pairs).
    """

    n_spins: int
    range: str = "short"
    convention: str = "pauli"
    couplings: Mapping[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        if self.n_spins < 2:
            raise ValueError(f"n_spins must be >= 2, got {self.n_spins}")
        if self.range not in RANGES:
            raise ValueError(f"range must be one of {RANGES}, got {self.range!r}")
        if self.convention not in CONVENTIONS:
            raise ValueError(f"convention must be one of {CONVENTIONS}, got {self.convention!r}")
        for i, j in self.couplings:
            if i == j or not (0 <= i < self.n_spins and 0 <= j < self.n_spins):
                raise ValueError(f"invalid bond ({i}, {j}) in couplings override")


def ring_distance(i: int, j: int, n: int) -> int:
    """``D_ij = min(1 + |j - i|, 1 + N - |j - i|)``."""
    d = abs(j - i)
    return min(1 + d, 1 + n - d)


def bond_couplings(spec: HeisenbergSpec) -> dict[tuple[int, int], float]:
    n = spec.n_spins
    bonds: dict[tuple[int, int], float] = {}
    if spec.range == "short":
        for i in range(n):
            key = tuple(sorted((i, (i + 1) % n)))
            # N=2: the wrapped bond repeats (0, 1) and is merged into it
            bonds[key] = bonds.get(key, 0.0) + 1.0
    else:
        for i in range(n):
            for j in range(i + 1, n):
                bonds[(i, j)] = 1.0 / ring_distance(i, j, n)
    for (i, j), c in spec.couplings.items():
        bonds[tuple(sorted((i, j)))] = float(c)
    return dict(sorted(bonds.items()))


def build_heisenberg(spec: HeisenbergSpec) -> PauliSum:
    scale = 1.0 if spec.convention == "pauli" else 0.25
    n = spec.n_spins
    words = []
    for (i, j), c in bond_couplings(spec).items():
        for letter in "XYZ":
            words.append((PauliWord.from_ops(n, {i: letter, j: letter}), -c * scale))
    return PauliSum.from_words(words, n)


def neel_bitstring(n_spins: int) -> str:
    """Alternating ``|0101...>`` label."""
    return ("01" * n_spins)[:n_spins]


def total_z(n_qubits: int) -> PauliSum:
    return PauliSum.from_words(
        [(PauliWord.from_ops(n_qubits, {q: "Z"}), 1.0) for q in range(n_qubits)], n_qubits
    )
