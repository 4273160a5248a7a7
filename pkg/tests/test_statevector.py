import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdavidson.models import HeisenbergSpec, build_heisenberg, neel_bitstring
from qdavidson.pauli import OracleCeilingError, PauliSum, PauliWord, QubitCountError
from qdavidson.statevector import (StateVector, apply_exp_pauli, apply_pauli, apply_pauli_sum,
                                   exact_diagonalize, exact_imaginary_step, expectation,
                                   from_bitstring, inner, sector_indices)

from .conftest import hermitian_sums, kron_label, kron_sum, kron_word, random_state, words

SR4 = build_heisenberg(HeisenbergSpec(4))


def z_on(n, q):
    return PauliSum.from_words([(PauliWord.from_ops(n, {q: "Z"}), 1.0)], n)


def dense_expm_step(h_mat, amps, dtau, shift=0.0):
    # independent oracle: scaling and squaring of the Taylor series
    a = -dtau * (h_mat - shift * np.eye(len(h_mat)))
    k = max(0, int(np.ceil(np.log2(max(np.linalg.norm(a, 1), 1.0)))) + 4)
    a = a / 2 ** k
    term = np.eye(len(a), dtype=complex)
    out = term.copy()
    for m in range(1, 30):
        term = term @ a / m
        out = out + term
    for _ in range(k):
        out = out @ out
    v = out @ amps
    return v / np.linalg.norm(v)


class TestBitstrings:
    def test_two_qubit_label(self):
        amps = from_bitstring("01").amplitudes
        assert amps[1] == 1 and np.count_nonzero(amps) == 1

    def test_ethylene_hf(self):
        state = from_bitstring("0011")
        assert state.n_qubits == 4 and state.amplitudes[3] == 1 and state.norm() == 1

    def test_neel_z_alternates(self):
        state = from_bitstring(neel_bitstring(6))
        assert neel_bitstring(6) == "010101"
        zs = [expectation(state, z_on(6, q), state).real for q in range(6)]
        assert zs == [-1, 1, -1, 1, -1, 1]

    def test_length(self):
        with pytest.raises(ValueError):
            StateVector(2, np.ones(3))

    @given(st.integers(1, 5), st.integers(0, 10 ** 6))
    def test_normalize(self, n, seed):
        rng = np.random.default_rng(seed)
        state = StateVector(n, 3 * random_state(rng, n)).normalize()
        assert abs(state.norm() - 1) <= 1e-12


class TestApply:
    def test_x_flips(self):
        out = apply_pauli(from_bitstring("0"), PauliWord.from_label("X"))
        np.testing.assert_array_equal(out.amplitudes, [0, 1])

    def test_z_sign(self):
        out = apply_pauli(from_bitstring("1"), PauliWord.from_label("Z"))
        np.testing.assert_array_equal(out.amplitudes, [0, -1])

    @settings(max_examples=40)
    @given(words(n_qubits=6), st.integers(0, 10 ** 6))
    def test_pauli_matches_dense(self, word, seed):
        amps = random_state(np.random.default_rng(seed), 6)
        out = apply_pauli(StateVector(6, amps), word).amplitudes
        np.testing.assert_allclose(out, kron_word(word) @ amps, atol=1e-12)

    def test_mismatch(self):
        with pytest.raises(QubitCountError):
            apply_pauli(from_bitstring("00"), PauliWord.from_label("X"))

    def test_eigen_residue(self):
        eig = exact_diagonalize(SR4)
        out = apply_pauli_sum(eig.state(0), SR4 - eig.values[0])
        assert out.norm() <= 1e-10

    def test_identity_sum(self):
        state = StateVector(3, random_state(np.random.default_rng(1), 3))
        out = apply_pauli_sum(state, PauliSum.identity(3, 2.5))
        np.testing.assert_allclose(out.amplitudes, 2.5 * state.amplitudes)

    def test_sr4_on_neel_norm(self):
        neel = from_bitstring(neel_bitstring(4))
        out = apply_pauli_sum(neel, SR4)
        assert abs(out.norm() - np.linalg.norm(kron_sum(SR4) @ neel.amplitudes)) <= 1e-12

    @settings(max_examples=25)
    @given(hermitian_sums(max_qubits=4), st.integers(0, 10 ** 6))
    def test_sum_linear(self, h, seed):
        rng = np.random.default_rng(seed)
        a = StateVector(h.n_qubits, random_state(rng, h.n_qubits))
        b = StateVector(h.n_qubits, random_state(rng, h.n_qubits))
        lhs = apply_pauli_sum(a + b, h).amplitudes
        rhs = apply_pauli_sum(a, h).amplitudes + apply_pauli_sum(b, h).amplitudes
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)


class TestExpPauli:
    def test_zero_angle(self):
        state = StateVector(2, random_state(np.random.default_rng(0), 2))
        out = apply_exp_pauli(state, PauliWord.from_label("XY"), 0.0)
        np.testing.assert_array_equal(out.amplitudes, state.amplitudes)

    def test_rabi(self):
        out = apply_exp_pauli(from_bitstring("0"), PauliWord.from_label("X"), np.pi / 2)
        np.testing.assert_allclose(out.amplitudes, [0, -1j], atol=1e-15)

    @given(words(n_qubits=4), st.floats(-10, 10), st.integers(0, 10 ** 6))
    def test_norm_preserved(self, word, theta, seed):
        state = StateVector(4, random_state(np.random.default_rng(seed), 4))
        out = apply_exp_pauli(state, word.strip_phase(), theta)
        assert abs(out.norm() - 1) <= 1e-13
        expected = np.cos(theta) * state.amplitudes - 1j * np.sin(theta) * (kron_word(word.strip_phase())
                                                                              @ state.amplitudes)
        np.testing.assert_allclose(out.amplitudes, expected, atol=1e-12)

    def test_thousand_factors(self):
        rng = np.random.default_rng(5)
        state = StateVector(5, random_state(rng, 5))
        for _ in range(1000):
            word = PauliWord(5, int(rng.integers(32)), int(rng.integers(32)))
            state = apply_exp_pauli(state, word, float(rng.uniform(-np.pi, np.pi)))
        assert abs(state.norm() - 1) <= 1e-12


class TestImaginaryStep:
    def test_zero_dtau(self):
        state = StateVector(4, random_state(np.random.default_rng(2), 4))
        out = exact_imaginary_step(state, SR4, 0.0)
        np.testing.assert_allclose(out.amplitudes, state.amplitudes, atol=1e-12)

    def test_ground_state_fixed(self):
        ground = exact_diagonalize(SR4).state(0)
        out = exact_imaginary_step(ground, SR4, 0.3)
        assert abs(abs(inner(ground, out)) - 1) <= 1e-12

    def test_neel_matches_series_oracle(self):
        neel = from_bitstring(neel_bitstring(4))
        out = exact_imaginary_step(neel, SR4, 0.1)
        ref = dense_expm_step(kron_sum(SR4), neel.amplitudes, 0.1)
        assert abs(abs(np.vdot(ref, out.amplitudes)) - 1) <= 1e-12

    def test_small_step_limit(self):
        # Richardson extrapolation of the finite difference recovers -(H - E) psi
        rng = np.random.default_rng(3)
        psi = StateVector(4, random_state(rng, 4))
        energy = expectation(psi, SR4, psi).real
        target = -(apply_pauli_sum(psi, SR4).amplitudes - energy * psi.amplitudes)

        def diff(dt):
            # unnormalized step so that the O(dt) term is the bare generator
            step = exact_imaginary_step(psi, SR4, dt, shift=energy)
            norm = np.linalg.norm(dense_unnormalized(psi.amplitudes, dt, energy))
            return (norm * step.amplitudes - psi.amplitudes) / dt

        def dense_unnormalized(amps, dt, shift):
            vals, vecs = np.linalg.eigh(kron_sum(SR4))
            return vecs @ (np.exp(-dt * (vals - shift)) * (vecs.conj().T @ amps))

        d1, d2, d3 = diff(1e-2), diff(5e-3), diff(2.5e-3)
        first = [np.linalg.norm(d - target) for d in (d1, d2, d3)]
        assert first[0] > first[1] > first[2]
        richardson = 2 * d3 - d2
        assert np.linalg.norm(richardson - target) < 0.05 * first[2]

    def test_ceiling(self):
        with pytest.raises(OracleCeilingError):
            exact_imaginary_step(from_bitstring("0"), PauliSum.identity(1), 0.1, max_qubits=0)


class TestInner:
    def test_basis(self):
        assert inner(from_bitstring("0"), from_bitstring("0")) == 1
        assert inner(from_bitstring("0"), from_bitstring("1")) == 0

    @given(st.integers(1, 5), st.integers(0, 10 ** 6))
    def test_cauchy_schwarz(self, n, seed):
        rng = np.random.default_rng(seed)
        a = StateVector(n, 2 * random_state(rng, n))
        b = StateVector(n, random_state(rng, n))
        assert abs(inner(a, b)) ** 2 <= inner(a, a).real * inner(b, b).real + 1e-12
        assert inner(a, a).real >= 0 and abs(inner(a, a).imag) < 1e-15

    def test_conjugate_linear_first_argument(self):
        rng = np.random.default_rng(4)
        a = StateVector(2, random_state(rng, 2))
        b = StateVector(2, random_state(rng, 2))
        assert np.isclose(inner(a * 1j, b), -1j * inner(a, b))


class TestExpectation:
    def test_z(self):
        zero = from_bitstring("0")
        assert expectation(zero, z_on(1, 0), zero) == 1

    @given(hermitian_sums(), st.integers(0, 10 ** 6))
    def test_real_for_hermitian(self, h, seed):
        psi = StateVector(h.n_qubits, random_state(np.random.default_rng(seed), h.n_qubits))
        assert abs(expectation(psi, h, psi).imag) < 1e-12

    def test_neel_sr4(self):
        neel = from_bitstring(neel_bitstring(4))
        ref = np.vdot(neel.amplitudes, kron_sum(SR4) @ neel.amplitudes)
        assert abs(expectation(neel, SR4, neel) - ref) <= 1e-12
        assert expectation(neel, SR4, neel).real == pytest.approx(4.0)


class TestExactDiagonalize:
    def test_z(self):
        np.testing.assert_allclose(exact_diagonalize(z_on(1, 0)).values, [-1, 1])

    def test_x(self):
        eig = exact_diagonalize(PauliSum.from_labels({"X": 1.0}))
        np.testing.assert_allclose(eig.values, [-1, 1])
        plus = np.array([1, 1]) / np.sqrt(2)
        minus = np.array([1, -1]) / np.sqrt(2)
        assert abs(abs(np.vdot(minus, eig.vectors[:, 0])) - 1) < 1e-12
        assert abs(abs(np.vdot(plus, eig.vectors[:, 1])) - 1) < 1e-12

    def test_sr4_residuals_and_symmetry(self):
        eig = exact_diagonalize(SR4)
        mat = kron_sum(SR4)
        for k in range(16):
            v = eig.vectors[:, k]
            assert np.linalg.norm(mat @ v - eig.values[k] * v) <= 1e-10
        assert np.all(np.diff(eig.values) >= 0)
        np.testing.assert_allclose(eig.vectors.conj().T @ eig.vectors, np.eye(16), atol=1e-10)
        # spin flip X^{(x)4} commutes with H, so the spectrum is unchanged under it
        flip = kron_label("XXXX")
        np.testing.assert_allclose(np.linalg.eigvalsh(flip @ mat @ flip), eig.values, atol=1e-12)

    @settings(max_examples=20)
    @given(hermitian_sums(max_qubits=6))
    def test_reconstructs(self, h):
        eig = exact_diagonalize(h)
        rebuilt = eig.vectors @ np.diag(eig.values) @ eig.vectors.conj().T
        np.testing.assert_allclose(rebuilt, kron_sum(h), atol=1e-9)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            exact_diagonalize(PauliSum.from_labels({"X": 1j}))

    def test_sector(self):
        idx = sector_indices(4, n_ones=2)
        assert len(idx) == 6
        eig = exact_diagonalize(SR4, idx)
        full = np.linalg.eigvalsh(kron_sum(SR4)[np.ix_(idx, idx)])
        np.testing.assert_allclose(eig.values, full, atol=1e-12)
