"""Matrix-element estimators and shot-budget formulas.

Three modes share one interface:

* ``exact``: statevector inner products, no perturbation.
* ``gaussian``: exact values plus independent ``N(0, sigma^2)`` noise on the
  real and imaginary parts, applied only at the configured call sites.
* ``hadamard_shots``: every Pauli element ``<a|P|b>`` is sampled as a
  Hadamard test.  The ancilla outcome probabilities ``(1 +/- Re z) / 2`` and
  ``(1 +/- Im z) / 2`` are computed analytically and sampled binomially,
  which has the same statistics as simulating the ``n + 1`` qubit circuit.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .pauli import PauliSum, PauliWord, QubitCountError
from .statevector import StateVector, apply_pauli, apply_pauli_sum_array, inner

MODES = ("exact", "gaussian", "hadamard_shots")

# call sites perturbed in gaussian mode: subspace H, off-diagonal subspace S,
# and the S / b of the unitary-mapping system
DEFAULT_SITES = frozenset({"h", "s", "mapping_s", "mapping_b"})
ALL_SITES = DEFAULT_SITES | {"residue", "lindep"}


@dataclass
class MatrixElementEstimator:
    """Stateful estimator: one seeded RNG stream and a cumulative shot tally.

    Parameters
    ----------
    mode : {"exact", "gaussian", "hadamard_shots"}
    sigma : float
        Standard deviation per quadrature in ``gaussian`` mode.
    n_shots : int
        Shots per quadrature circuit in ``hadamard_shots`` mode.
    seed : int, optional
        Seed for ``numpy.random.default_rng``.
    sites : frozenset of str
        Call sites that receive noise.
    """

    mode: str = "exact"
    sigma: float = 0.0
    n_shots: int = 0
    seed: int | None = None
    sites: frozenset = DEFAULT_SITES
    tally: int = field(default=0, init=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"estimator mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == "gaussian" and not self.sigma > 0:
            raise ValueError("gaussian mode needs sigma > 0")
        if self.mode == "hadamard_shots" and self.n_shots < 1:
            raise ValueError("hadamard_shots mode needs n_shots >= 1")
        unknown = set(self.sites) - ALL_SITES
        if unknown:
            raise ValueError(f"unknown estimator sites {sorted(unknown)}")
        self.sites = frozenset(self.sites)
        self.rng = np.random.default_rng(self.seed)

    @classmethod
    def from_config(cls, cfg: dict | None) -> MatrixElementEstimator:
        """Build from ``{"estimator": "gaussian", "sigma": 1e-4, "seed": 42}``-style mappings."""
        cfg = dict(cfg or {})
        mode = cfg.pop("estimator", cfg.pop("mode", "exact"))
        sites = cfg.pop("sites", None)
        kwargs = {k: cfg.pop(k) for k in ("sigma", "n_shots", "seed") if k in cfg}
        if cfg:
            raise ValueError(f"unknown estimator fields {sorted(cfg)}")
        if sites is not None:
            kwargs["sites"] = frozenset(sites)
        return cls(mode=mode, **kwargs)

    @property
    def is_exact(self) -> bool:
        return self.mode == "exact"

    @property
    def samples(self) -> bool:
        """True when elements must be estimated term by term (Hadamard tests)."""
        return self.mode == "hadamard_shots"

    @property
    def noise_scale(self) -> float:
        """Per-element noise level used to set linear-dependence thresholds."""
        if self.mode == "gaussian":
            return self.sigma
        if self.mode == "hadamard_shots":
            return 1.0 / np.sqrt(self.n_shots)
        return 0.0

    def perturbs(self, site: str) -> bool:
        return self.mode != "exact" and site in self.sites

    # -- array path (exact and gaussian) --------------------------------
    def perturb(self, values, site: str):
        """Add gaussian noise to exact ``values`` when ``site`` is enabled.

        Noise is drawn in C order over the array, real parts then imaginary
        parts, so identical call sequences reproduce identical estimates.
        """
        values = np.asarray(values)
        if self.mode != "gaussian" or site not in self.sites:
            return values
        noise = self.rng.normal(0.0, self.sigma, size=(2,) + values.shape)
        if np.iscomplexobj(values):
            return values + noise[0] + 1j * noise[1]
        return values + noise[0]

    # -- sampling path ----------------------------------------------------
    def _sample_quadrature(self, value: float) -> float:
        p0 = min(max(0.5 * (1.0 + value), 0.0), 1.0)
        k = self.rng.binomial(self.n_shots, p0)
        self.tally += self.n_shots
        return 2.0 * k / self.n_shots - 1.0

    def sample(self, z: complex) -> complex:
        """Hadamard-test estimate of an element whose exact value is ``z`` (``|z| <= 1``)."""
        return complex(self._sample_quadrature(z.real), self._sample_quadrature(z.imag))

    def pauli_element(self, bra: StateVector, word: PauliWord, ket: StateVector) -> complex:
        return estimate_pauli_element(bra, word, ket, self)

    def operator_element(self, bra: StateVector, op: PauliSum, ket: StateVector, site: str) -> complex:
        """``<bra|op|ket>`` through the estimator at call site ``site``."""
        if bra.n_qubits != op.n_qubits or ket.n_qubits != op.n_qubits:
            raise QubitCountError("qubit count mismatch in operator_element")
        if not (self.samples and site in self.sites):
            exact = complex(np.vdot(bra.amplitudes, apply_pauli_sum_array(ket.amplitudes, op)))
            return complex(self.perturb(exact, site))
        total = 0j
        for word, c in op.items():
            total += c * estimate_pauli_element(bra, word, ket, self)
        return total

    def overlap(self, bra: StateVector, ket: StateVector, site: str) -> complex:
        exact = inner(bra, ket)
        if self.samples and site in self.sites:
            return self.sample(exact)
        return complex(self.perturb(exact, site))


def estimate_pauli_element(bra: StateVector, word: PauliWord, ket: StateVector,
                           est: MatrixElementEstimator) -> complex:
    """Estimate ``<bra|P|ket>`` for a single Pauli word.

    Examples
    --------
    >>> from qdavidson.statevector import from_bitstring
    >>> zero = from_bitstring("0")
    >>> estimate_pauli_element(zero, PauliWord.from_label("Z"), zero, MatrixElementEstimator())
    (1+0j)
    """
    if bra.n_qubits != word.n_qubits or ket.n_qubits != word.n_qubits:
        raise QubitCountError(f"qubit count mismatch: {bra.n_qubits}, {word.n_qubits}, {ket.n_qubits}")
    exact = inner(bra, apply_pauli(ket, word))
    if est.mode == "exact":
        return exact
    if est.mode == "gaussian":
        noise = est.rng.normal(0.0, est.sigma, size=2)
        return complex(exact.real + noise[0], exact.imag + noise[1])
    # the Hadamard test measures the phase-free word; restore the phase after sampling
    phase = word.coefficient
    return phase * est.sample(exact / phase)


@dataclass(frozen=True)
class ShotBudget:
    """Order-of-magnitude shot counts with unit prefactors."""

    h_elements: float
    s_elements: float
    mapping_elements: float

    @property
    def total_shots(self) -> float:
        return self.h_elements + self.s_elements + self.mapping_elements


def estimate_shot_budget(m_terms: int, h_max: float, precision_p: float, n_k: int,
                         pool_p: int) -> ShotBudget:
    """Shot costs of the subspace matrices and the mapping system.

    H matrix: ``|h_max|^2 M p^-2 N_K^2``; S matrix: ``p^-2 N_K^2``; mapping:
    ``max(|h_max|^2 M p^-2 N_K^2 P, p^-2 N_K^2 P^2)``.
    """
    for name, value in (("m_terms", m_terms), ("h_max", h_max), ("precision_p", precision_p),
                        ("n_k", n_k), ("pool_p", pool_p)):
        if not value > 0:
            raise ValueError(f"{name} must be positive, got {value}")
    per_element = precision_p ** -2 * n_k ** 2
    h_cost = h_max ** 2 * m_terms * per_element
    return ShotBudget(
        h_elements=h_cost,
        s_elements=per_element,
        mapping_elements=max(h_cost * pool_p, per_element * pool_p ** 2),
    )
