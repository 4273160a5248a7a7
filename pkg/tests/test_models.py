import itertools

import numpy as np
import pytest

from qdavidson.models import (HeisenbergSpec, bond_couplings, build_heisenberg, neel_bitstring,
                              ring_distance, total_z)
from qdavidson.pauli import PauliWord
from qdavidson.statevector import exact_diagonalize


def coeff(h, n, i, j, letter="Z"):
    return h.coefficient(PauliWord.from_ops(n, {i: letter, j: letter}))


def test_sr4_terms():
    h = build_heisenberg(HeisenbergSpec(4))
    assert len(h) == 12
    assert all(c == -1.0 for _, c in h.items())


def test_lr4_terms():
    h = build_heisenberg(HeisenbergSpec(4, "long"))
    assert len(h) == 18
    assert ring_distance(0, 2, 4) == 3
    assert coeff(h, 4, 0, 2) == pytest.approx(-1 / 3)
    assert coeff(h, 4, 0, 1) == pytest.approx(-1 / 2)


def test_n2_bond_merged():
    h = build_heisenberg(HeisenbergSpec(2))
    assert len(h) == 3
    assert all(c == -2.0 for _, c in h.items())


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
@pytest.mark.parametrize("rng", ["short", "long"])
def test_commutes_with_total_z(n, rng):
    h = build_heisenberg(HeisenbergSpec(n, rng))
    assert len(h.commutator(total_z(n)).simplify(1e-12)) == 0
    assert h.is_hermitian()
    assert all(c.imag == 0 for _, c in h.items())


@pytest.mark.parametrize("n", [3, 4, 5, 6])
@pytest.mark.parametrize("rng", ["short", "long"])
def test_translation_invariance(n, rng):
    bonds = bond_couplings(HeisenbergSpec(n, rng))
    shifted = {tuple(sorted(((i + 1) % n, (j + 1) % n))): c for (i, j), c in bonds.items()}
    assert shifted == bonds


def test_convention_factor_four():
    pauli = exact_diagonalize(build_heisenberg(HeisenbergSpec(4))).values
    half = exact_diagonalize(build_heisenberg(HeisenbergSpec(4, convention="spin_half"))).values
    np.testing.assert_allclose(pauli, 4 * half, atol=1e-12)


def test_coupling_override():
    h = build_heisenberg(HeisenbergSpec(4, couplings={(1, 0): 0.25}))
    assert coeff(h, 4, 0, 1, "X") == pytest.approx(-0.25)
    assert coeff(h, 4, 1, 2, "X") == pytest.approx(-1.0)


@pytest.mark.parametrize("kwargs", [dict(n_spins=1), dict(n_spins=4, range="mid"),
                                    dict(n_spins=4, convention="spin_one"),
                                    dict(n_spins=4, couplings={(0, 0): 1.0})])
def test_invalid_specs(kwargs):
    with pytest.raises(ValueError):
        HeisenbergSpec(**kwargs)


def test_neel():
    assert neel_bitstring(4) == "0101"
    assert neel_bitstring(5) == "01010"


def test_lr_distance_formula():
    for n in (4, 5, 6):
        for i, j in itertools.combinations(range(n), 2):
            assert ring_distance(i, j, n) == min(1 + j - i, 1 + n - (j - i))
