import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdavidson.fermion import build_qubit_hamiltonian, read_fcidump
from qdavidson.measurement import MatrixElementEstimator
from qdavidson.models import HeisenbergSpec, build_heisenberg
from qdavidson.pauli import PauliSum
from qdavidson.statevector import (StateVector, apply_pauli_sum, exact_diagonalize, from_bitstring,
                                   inner)
from qdavidson.subspace import (KrylovBasis, SubspaceError, SubspaceProblem, assemble, orthonormal_span,
                                projection_ratio, residue_norm_sq, residue_norms, ritz_state, solve)

from .conftest import fixture_path, hermitian_sums, random_state

SR4 = build_heisenberg(HeisenbergSpec(4))


def basis_of(states, n):
    basis = KrylovBasis(n)
    for s in states:
        basis.append(s if isinstance(s, StateVector) else StateVector(n, s))
    return basis


def random_basis(rng, n, k):
    return basis_of([random_state(rng, n) for _ in range(k)], n)


class TestBasis:
    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            KrylovBasis(1).append(StateVector(1, np.array([1.0, 1.0])))

    def test_rejects_qubit_mismatch(self):
        with pytest.raises(ValueError):
            KrylovBasis(2).append(from_bitstring("0"))


class TestAssemble:
    def test_ethylene_hf(self):
        h = build_qubit_hamiltonian(read_fcidump(fixture_path("c2h4.fcidump")))
        p = assemble(basis_of([from_bitstring("0011")], 4), h)
        assert p.size == 1 and p.s_matrix[0, 0] == 1
        assert p.h_matrix[0, 0].real == pytest.approx(-77.0739546295, abs=1e-6)

    def test_orthogonal_states(self):
        p = assemble(basis_of([from_bitstring("01"), from_bitstring("10")], 2), PauliSum.identity(2))
        np.testing.assert_array_equal(p.s_matrix, np.eye(2))

    @given(st.integers(0, 10 ** 6))
    def test_gram(self, seed):
        rng = np.random.default_rng(seed)
        basis = random_basis(rng, 3, 3)
        p = assemble(basis, build_heisenberg(HeisenbergSpec(3)))
        gram = np.array([[inner(a, b) for b in basis.vectors] for a in basis.vectors])
        np.testing.assert_allclose(p.s_matrix, gram, atol=1e-12)
        assert np.allclose(p.h_matrix, p.h_matrix.conj().T, atol=1e-10)

    def test_noisy_matrices_hermitian_and_diagonal_fixed(self):
        rng = np.random.default_rng(0)
        basis = random_basis(rng, 4, 4)
        for est in (MatrixElementEstimator("gaussian", sigma=1e-3, seed=1),
                    MatrixElementEstimator("hadamard_shots", n_shots=1000, seed=1)):
            p = assemble(basis, SR4, est)
            np.testing.assert_array_equal(p.h_matrix, p.h_matrix.conj().T)
            np.testing.assert_array_equal(p.s_matrix, p.s_matrix.conj().T)
            np.testing.assert_array_equal(np.diag(p.s_matrix), np.ones(4))

    def test_empty(self):
        with pytest.raises(ValueError):
            assemble(KrylovBasis(2), SR4)


class TestSolve:
    def test_diagonal(self):
        p = solve(SubspaceProblem(np.diag([3.0, 1.0, 2.0]), np.eye(3)))
        np.testing.assert_allclose(p.ritz_values, [1, 2, 3])
        assert p.retained_rank == 3

    def test_duplicate_vector(self):
        rng = np.random.default_rng(4)
        vecs = [random_state(rng, 4) for _ in range(3)]
        dedup = solve(assemble(basis_of(vecs, 4), SR4))
        dup = solve(assemble(basis_of(vecs + [vecs[1]], 4), SR4))
        assert dup.retained_rank == 3
        np.testing.assert_allclose(dup.ritz_values, dedup.ritz_values, atol=1e-10)

    def test_full_eigenbasis(self):
        eig = exact_diagonalize(SR4)
        p = solve(assemble(basis_of([eig.state(k) for k in range(16)], 4), SR4))
        np.testing.assert_allclose(p.ritz_values, eig.values, atol=1e-10)

    def test_indefinite_overlap(self):
        with pytest.raises(SubspaceError):
            solve(SubspaceProblem(np.eye(2), np.array([[1.0, 2.0], [2.0, 1.0]])))

    @settings(max_examples=25, deadline=None)
    @given(hermitian_sums(max_qubits=4), st.integers(1, 6), st.integers(0, 10 ** 6))
    def test_variational_interlacing_and_pairs(self, h, k, seed):
        rng = np.random.default_rng(seed)
        n = h.n_qubits
        basis = random_basis(rng, n, min(k, 1 << n))
        p = solve(assemble(basis, h))
        exact = exact_diagonalize(h).values
        assert np.all(p.ritz_values >= exact[:len(p.ritz_values)] - 1e-9)
        hv = p.h_matrix @ p.ritz_vectors
        sv = p.s_matrix @ p.ritz_vectors * p.ritz_values
        scale = max(np.abs(p.h_matrix).max(), 1.0)
        assert np.abs(hv - sv).max() <= 1e-8 * scale
        assert np.linalg.eigvalsh(p.s_matrix).min() >= -1e-10

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 10 ** 6))
    def test_monotone_under_append(self, seed):
        rng = np.random.default_rng(seed)
        states = [random_state(rng, 4) for _ in range(6)]
        lowest = [solve(assemble(basis_of(states[:m], 4), SR4)).ritz_values[0] for m in range(1, 7)]
        assert np.all(np.diff(lowest) <= 1e-10)

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 10 ** 6))
    def test_basis_rotation_invariance(self, seed):
        rng = np.random.default_rng(seed)
        p = assemble(random_basis(rng, 4, 4), SR4)
        q, _ = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
        rotated = SubspaceProblem(q.conj().T @ p.h_matrix @ q, q.conj().T @ p.s_matrix @ q)
        np.testing.assert_allclose(solve(rotated).ritz_values, solve(p).ritz_values, atol=1e-10)


class TestResidue:
    def test_eigenvector_vanishes(self):
        eig = exact_diagonalize(SR4)
        basis = basis_of([eig.state(0), from_bitstring("0101")], 4)
        p = solve(assemble(basis, SR4))
        assert residue_norm_sq(p, basis, SR4, 0) <= 1e-10

    def test_ethylene_hf_variance(self):
        h = build_qubit_hamiltonian(read_fcidump(fixture_path("c2h4.fcidump")))
        hf = from_bitstring("0011")
        basis = basis_of([hf], 4)
        p = solve(assemble(basis, h))
        mat = h.to_dense()
        e = np.vdot(hf.amplitudes, mat @ hf.amplitudes).real
        var = np.vdot(hf.amplitudes, mat @ mat @ hf.amplitudes).real - e ** 2
        assert residue_norm_sq(p, basis, h, 0) == pytest.approx(var, rel=1e-10)

    def test_shifted_energy_adds_square(self):
        eig = exact_diagonalize(SR4)
        basis = basis_of([eig.state(0)], 4)
        p = solve(assemble(basis, SR4))
        delta = 0.3
        shifted = SubspaceProblem(p.h_matrix, p.s_matrix, p.ritz_values + delta, p.ritz_vectors,
                                  p.retained_rank)
        assert residue_norm_sq(shifted, basis, SR4, 0) == pytest.approx(delta ** 2, abs=1e-10)

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 10 ** 6))
    def test_matches_explicit_statevector(self, seed):
        rng = np.random.default_rng(seed)
        basis = random_basis(rng, 4, 3)
        p = solve(assemble(basis, SR4))
        for root, r in enumerate(residue_norms(p, basis, SR4, 3)):
            psi = ritz_state(p, basis, root)
            explicit = np.linalg.norm(apply_pauli_sum(psi, SR4).amplitudes
                                      - p.ritz_values[root] * psi.amplitudes)
            assert abs(r - explicit) <= 1e-9

    def test_invalid_root(self):
        basis = basis_of([from_bitstring("0101")], 4)
        p = solve(assemble(basis, SR4))
        with pytest.raises(IndexError):
            residue_norm_sq(p, basis, SR4, 1)
        with pytest.raises(ValueError):
            residue_norm_sq(assemble(basis, SR4), basis, SR4, 0)


class TestScreen:
    def test_in_span_rejected(self):
        rng = np.random.default_rng(7)
        basis = random_basis(rng, 4, 3)
        psi = basis.matrix()
        delta = psi @ (rng.standard_normal(3) + 1j * rng.standard_normal(3))
        assert projection_ratio(orthonormal_span(psi), delta) <= 1e-8

    def test_orthogonal_kept(self):
        basis = basis_of([from_bitstring("0001"), from_bitstring("0010")], 4)
        ratio = projection_ratio(orthonormal_span(basis.matrix()), from_bitstring("0100").amplitudes)
        assert ratio == pytest.approx(1.0)

    def test_matches_pseudo_inverse_projector(self):
        # projecting with the overlap pseudo-inverse over raw vectors equals the orthonormal span
        rng = np.random.default_rng(8)
        basis = random_basis(rng, 4, 4)
        psi = basis.matrix()
        delta = random_state(rng, 4)
        s = psi.conj().T @ psi
        rest = delta - psi @ np.linalg.pinv(s, rcond=1e-8, hermitian=True) @ (psi.conj().T @ delta)
        assert projection_ratio(orthonormal_span(psi), delta) == pytest.approx(np.linalg.norm(rest), abs=1e-10)
