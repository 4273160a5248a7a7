"""FCIDUMP ingestion, Jordan-Wigner mapping and excitation pools.

Spin orbitals are interleaved: spatial orbital ``p`` gives spin orbitals
``2p`` (alpha) and ``2p + 1`` (beta), and spin orbital ``P`` lives on qubit
``P``.  With this layout the Hartree-Fock determinant of the (2e, 2o) space
is ``|0011>`` and the alpha-to-alpha HOMO-LUMO triplet is ``|0101>``.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .pauli import PauliSum, PauliWord


class FCIDumpError(ValueError):
    """Malformed FCIDUMP input; the message carries the offending line number."""


@dataclass(frozen=True, eq=False)
class FermionHamiltonian:
    """Active-space electronic Hamiltonian with spatial-orbital integrals.

    ``two_body[p, q, r, s]`` is the chemist-notation integral ``(pq|rs)``.
    """

    n_orbitals: int
    n_electrons: int
    core_energy: float
    one_body: np.ndarray
    two_body: np.ndarray
    ms2: int = 0
    orbsym: tuple[int, ...] = ()

    def __post_init__(self):
        n = self.n_orbitals
        if self.one_body.shape != (n, n) or self.two_body.shape != (n, n, n, n):
            raise ValueError("integral arrays do not match n_orbitals")
        if not np.allclose(self.one_body, self.one_body.T, atol=1e-12):
            raise ValueError("one-body integrals are not symmetric")
        for perm in _CHEMIST_PERMUTATIONS[1:]:
            if not np.allclose(self.two_body, self.two_body.transpose(perm), atol=1e-12):
                raise ValueError("two-body integrals lack 8-fold permutation symmetry")

    @property
    def n_spin_orbitals(self) -> int:
        return 2 * self.n_orbitals

    @property
    def n_alpha(self) -> int:
        return (self.n_electrons + self.ms2) // 2

    @property
    def n_beta(self) -> int:
        return (self.n_electrons - self.ms2) // 2

    def hf_bitstring(self) -> str:
        return occupation_bitstring(self.n_spin_orbitals,
                                    [2 * p for p in range(self.n_alpha)]
                                    + [2 * p + 1 for p in range(self.n_beta)])


# index permutations of (pq|rs) that leave a real chemist integral unchanged
_CHEMIST_PERMUTATIONS = [
    (0, 1, 2, 3), (1, 0, 2, 3), (0, 1, 3, 2), (1, 0, 3, 2),
    (2, 3, 0, 1), (3, 2, 0, 1), (2, 3, 1, 0), (3, 2, 1, 0),
]


def occupation_bitstring(n_qubits: int, occupied) -> str:
    """Ket label with the listed qubits set (qubit 0 rightmost)."""
    index = 0
    for q in occupied:
        index |= 1 << q
    return format(index, f"0{n_qubits}b")


_HEADER_KEY = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*=")


def _parse_header(text: str, first_line: int) -> dict[str, list[str]]:
    body = re.sub(r"^\s*&FCI", "", text, flags=re.IGNORECASE)
    body = re.sub(r"(&END|/)\s*$", "", body.strip(), flags=re.IGNORECASE)
    matches = list(_HEADER_KEY.finditer(body))
    if not matches:
        raise FCIDumpError(f"line {first_line}: namelist header has no KEY=VALUE entries")
    out: dict[str, list[str]] = {}
    for m, nxt in zip(matches, matches[1:] + [None]):
        raw = body[m.end(): nxt.start() if nxt else len(body)]
        values = [v for v in re.split(r"[,\s]+", raw) if v]
        out[m.group(1).upper()] = values
    return out


def _to_float(token: str, lineno: int) -> float:
    try:
        return float(token.replace("D", "E").replace("d", "e"))
    except ValueError:
        raise FCIDumpError(f"line {lineno}: non-numeric value {token!r}") from None


def parse_fcidump(text: str | bytes) -> FermionHamiltonian:
    """Parse FCIDUMP content.

    The ``&FCI ... &END`` (or ``/``) namelist may span several lines and is
    read case-insensitively.  Integral lines are ``value i j k l`` with
    1-based indices; ``0 0 0 0`` is the core energy, ``i j 0 0`` a one-body
    integral.  Lines ``i 0 0 0`` (orbital energies) are accepted and
    ignored, as is ``ORBSYM``.
    """
    if isinstance(text, bytes):
        text = text.decode()
    lines = text.splitlines()
    header_lines = []
    end = None
    for lineno, line in enumerate(lines, 1):
        header_lines.append(line)
        stripped = line.strip()
        if re.search(r"&END\s*$", stripped, re.IGNORECASE) or stripped.endswith("/"):
            end = lineno
            break
    if end is None or not header_lines[0].strip().upper().startswith("&FCI"):
        raise FCIDumpError("line 1: missing '&FCI ... &END' namelist header")
    header = _parse_header("\n".join(header_lines), 1)
    try:
        norb = int(header["NORB"][0])
        nelec = int(header["NELEC"][0])
        ms2 = int(header.get("MS2", ["0"])[0])
    except (KeyError, IndexError, ValueError):
        raise FCIDumpError(f"line {end}: header must define integer NORB and NELEC") from None
    if norb < 1:
        raise FCIDumpError(f"line {end}: NORB must be positive")
    orbsym = tuple(int(v) for v in header.get("ORBSYM", []) if v.lstrip("-").isdigit())

    h1 = np.zeros((norb, norb))
    h2 = np.zeros((norb, norb, norb, norb))
    core = 0.0
    for lineno in range(end + 1, len(lines) + 1):
        line = lines[lineno - 1].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 5:
            raise FCIDumpError(f"line {lineno}: expected 'value i j k l', got {line!r}")
        value = _to_float(parts[0], lineno)
        try:
            i, j, k, l = (int(p) for p in parts[1:])
        except ValueError:
            raise FCIDumpError(f"line {lineno}: non-integer orbital index in {line!r}") from None
        if any(not 0 <= x <= norb for x in (i, j, k, l)):
            raise FCIDumpError(f"line {lineno}: orbital index out of range [0, {norb}]")
        if i == j == k == l == 0:
            core = value
        elif k == l == 0 and j == 0:
            continue
        elif k == l == 0:
            h1[i - 1, j - 1] = h1[j - 1, i - 1] = value
        elif 0 in (i, j, k, l):
            raise FCIDumpError(f"line {lineno}: malformed index pattern {i} {j} {k} {l}")
        else:
            idx = (i - 1, j - 1, k - 1, l - 1)
            for perm in _CHEMIST_PERMUTATIONS:
                h2[tuple(idx[p] for p in perm)] = value
    return FermionHamiltonian(norb, nelec, core, h1, h2, ms2, orbsym)


def read_fcidump(path: str | Path) -> FermionHamiltonian:
    return parse_fcidump(Path(path).read_text())


# -- Jordan-Wigner -------------------------------------------------------

@lru_cache(maxsize=None)
def ladder(n_qubits: int, p: int, dagger: bool) -> PauliSum:
    """JW image of ``a_p`` (or ``a_p^dagger``): ``Z_{<p} (X_p +/- i Y_p) / 2``."""
    zs = {q: "Z" for q in range(p)}
    x = PauliWord.from_ops(n_qubits, {**zs, p: "X"})
    y = PauliWord.from_ops(n_qubits, {**zs, p: "Y"})
    sign = -1 if dagger else 1
    return PauliSum.from_words([(x, 0.5), (y, 0.5j * sign)], n_qubits)


def fermion_product(n_qubits: int, ops) -> PauliSum:
    """JW image of a product of ladder operators given as ``(index, dagger)`` pairs."""
    out = PauliSum.identity(n_qubits)
    for p, dag in ops:
        out = out * ladder(n_qubits, p, dag)
    return out


def build_qubit_hamiltonian(f: FermionHamiltonian, drop_tol: float = 1e-12) -> PauliSum:
    """Jordan-Wigner qubit Hamiltonian including the core energy.

    ``H = E_core + sum h_pq a+_p a_q + 1/2 sum <PR|SQ> a+_P a+_R a_S a_Q`` with
    spin-orbital integrals ``<PR|SQ> = (pq|rs) d(sP,sQ) d(sR,sS)``.
    """
    n = f.n_spin_orbitals
    terms: dict[tuple[int, int], complex] = {(0, 0): f.core_energy}

    def accumulate(s: PauliSum, scale: float) -> None:
        for key, c in s._terms.items():
            terms[key] = terms.get(key, 0.0) + scale * c

    creators: dict[tuple[int, int], PauliSum] = {}
    annihilators: dict[tuple[int, int], PauliSum] = {}
    for P, Q in itertools.product(range(n), repeat=2):
        if P % 2 != Q % 2:
            continue
        h = f.one_body[P // 2, Q // 2]
        if abs(h) > 0.0:
            accumulate(fermion_product(n, [(P, True), (Q, False)]), h)
    for P, R in itertools.product(range(n), repeat=2):
        if P != R:
            creators[P, R] = fermion_product(n, [(P, True), (R, True)])
            annihilators[P, R] = fermion_product(n, [(P, False), (R, False)])
    for P, Q, R, S in itertools.product(range(n), repeat=4):
        if P == R or S == Q or P % 2 != Q % 2 or R % 2 != S % 2:
            continue
        g = f.two_body[P // 2, Q // 2, R // 2, S // 2]
        if g == 0.0:
            continue
        accumulate(creators[P, R] * annihilators[S, Q], 0.5 * g)
    return PauliSum(n, terms, drop_tol)


def number_operator(n_qubits: int, qubits=None) -> PauliSum:
    """``sum_p (I - Z_p) / 2`` over ``qubits`` (all by default)."""
    qubits = range(n_qubits) if qubits is None else qubits
    words = []
    for q in qubits:
        words.append((PauliWord.identity(n_qubits), 0.5))
        words.append((PauliWord.from_ops(n_qubits, {q: "Z"}), -0.5))
    return PauliSum.from_words(words, n_qubits)


def sz_operator(n_qubits: int) -> PauliSum:
    """``(N_alpha - N_beta) / 2`` in the interleaved layout."""
    n_a = number_operator(n_qubits, range(0, n_qubits, 2))
    n_b = number_operator(n_qubits, range(1, n_qubits, 2))
    return (n_a - n_b) * 0.5


# -- excitation pool ------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ExcitationPool:
    """Ordered odd-Y Pauli words with the excitation each first came from."""

    generators: tuple[PauliWord, ...]
    provenance: dict[tuple[int, int], tuple] = field(default_factory=dict)

    def __iter__(self):
        return iter(self.generators)

    def __len__(self) -> int:
        return len(self.generators)

    def __getitem__(self, i):
        return self.generators[i]


def _sz_preserving_excitations(n: int, n_electrons: int, ms2: int = 0):
    """Singles (i -> a) and doubles (ij -> ab) from the HF occupation that keep S_z."""
    n_alpha = (n_electrons + ms2) // 2
    n_beta = (n_electrons - ms2) // 2
    occ = sorted([2 * p for p in range(n_alpha)] + [2 * p + 1 for p in range(n_beta)])
    virt = [p for p in range(n) if p not in occ]
    spin = [p % 2 for p in range(n)]
    for i in occ:
        for a in virt:
            if spin[i] == spin[a]:
                yield (i,), (a,)
    for i, j in itertools.combinations(occ, 2):
        for a, b in itertools.combinations(virt, 2):
            if spin[i] + spin[j] == spin[a] + spin[b]:
                yield (i, j), (a, b)


def build_excitation_pool(n_spin_orbitals: int, n_electrons: int | None = None,
                          ms2: int = 0) -> ExcitationPool:
    """Unique odd-Y words from JW images of ``T - T^dagger``.

    ``T`` runs over every S_z-preserving single ``a+_a a_i`` and double
    ``a+_a a+_b a_j a_i`` taking occupied spin orbitals of the Hartree-Fock
    determinant to virtual ones.  Words are ordered by excitation rank, then
    orbital indices, then ``(x_mask, z_mask)``.

    Parameters
    ----------
    n_spin_orbitals : int
        Even number of spin orbitals (interleaved alpha/beta).
    n_electrons : int, optional
        Active electrons.  Defaults to a closed shell with
        ``n_spin_orbitals // 4`` doubly occupied spatial orbitals, which covers
        (2e, 2o), (2e, 3o) and (6e, 6o).
    ms2 : int
        ``2 S_z`` of the reference determinant.

    Examples
    --------
    >>> [len(build_excitation_pool(n)) for n in (4, 6, 12)]
    [12, 40, 828]
    """
    n = n_spin_orbitals
    if n % 2:
        raise ValueError(f"n_spin_orbitals must be even, got {n}")
    if n_electrons is None:
        n_electrons = 2 * (n // 4)
    if not 0 <= n_electrons <= n or (n_electrons + ms2) % 2:
        raise ValueError(f"inconsistent electron count {n_electrons} (ms2={ms2}) for {n} spin orbitals")
    seen: dict[tuple[int, int], tuple] = {}
    order: list[PauliWord] = []
    for occ, virt in _sz_preserving_excitations(n, n_electrons, ms2):
        ops = [(p, True) for p in virt] + [(p, False) for p in reversed(occ)]
        t = fermion_product(n, ops)
        gen = t - t.adjoint()
        for word, _ in gen.items():
            if word.n_y % 2 == 1 and word.key not in seen:
                seen[word.key] = (occ, virt)
                order.append(word)
    return ExcitationPool(tuple(order), seen)
