"""Bloch-tensor representation of symmetric multi-qubit and two-qubit states.

A state is encoded by the real expectation values of Pauli strings.  For a
symmetric state of N qubits only the sorted multi-index matters, so the
tensor is stored as a map from sorted multi-indices to values.  For a
generic (non-symmetric) two-qubit state all 16 entries are kept.

The same tensors double as truncated moment data: a multi-index maps to the
exponent triple of the monomial x^a1 y^a2 z^a3 it measures (one triple per
qubit in the two-qubit case).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .paulis import (
    SIGMA,
    index_multiplicity,
    symmetric_indices,
    symmetric_pauli_ops,
)

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
SUM_RULE_TOL = 1e-10


@dataclass(frozen=True)
class SpinSize:
    """Spin quantum number j and the equivalent qubit count N = 2j."""

    n_qubits: int

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("need at least one qubit")

    @property
    def j(self):
        return self.n_qubits / 2

    @property
    def dicke_dim(self):
        return self.n_qubits + 1

    @classmethod
    def from_j(cls, j):
        n = int(round(2 * j))
        if abs(2 * j - n) > 1e-12:
            raise ValueError(f"j must be a half-integer, got {j}")
        return cls(n)

    def __str__(self):
        return f"j={self.n_qubits/2:g} (N={self.n_qubits})"


def check_hermitian(rho, tol=HERMITICITY_TOL):
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("expected a square matrix")
    if np.max(np.abs(rho - rho.conj().T)) > tol * max(1.0, np.max(np.abs(rho))):
        raise ValueError("matrix is not Hermitian within tolerance")
    return rho


def check_density_matrix(rho, dim=None):
    rho = check_hermitian(rho)
    if dim is not None and rho.shape[0] != dim:
        raise ValueError(f"expected dimension {dim}, got {rho.shape[0]}")
    if abs(np.trace(rho).real - 1.0) > TRACE_TOL:
        raise ValueError("trace differs from 1")
    if np.linalg.eigvalsh(rho)[0] < -PSD_TOL:
        raise ValueError("matrix has a negative eigenvalue")
    return rho


@dataclass
class BlochTensor:
    """Pauli-string expectation values of a state.

    ``kind`` is "sym" (symmetric N-qubit state, values keyed by sorted
    multi-index) or "full2q" (generic two-qubit state, values keyed by the
    ordered pair (mu1, mu2)).
    """

    kind: str
    n_qubits: int
    values: dict

    @property
    def spin(self):
        return SpinSize(self.n_qubits)

    def value(self, idx):
        idx = tuple(idx)
        if self.kind == "sym":
            idx = tuple(sorted(idx))
        return self.values[idx]

    def validate(self):
        """Check trace normalization, the sum rule and the [-1, 1] bounds."""
        n = self.n_qubits
        zero = (0,) * n
        if abs(self.values[zero] - 1.0) > TRACE_TOL:
            raise ValueError("entry at the all-zero index must be 1")
        bound = 1.0 + 1e-9
        for idx, val in self.values.items():
            if abs(val) > bound:
                raise ValueError(f"entry {idx} = {val} outside [-1, 1]")
        if self.kind == "sym" and n >= 2:
            for suffix in symmetric_indices(n - 2) if n > 2 else [()]:
                lhs = sum(
                    self.values[tuple(sorted((a, a) + suffix))] for a in (1, 2, 3)
                )
                rhs = self.values[tuple(sorted((0, 0) + suffix))]
                if abs(lhs - rhs) > SUM_RULE_TOL:
                    raise ValueError(f"sum rule violated at suffix {suffix}")
        return self

    def moments(self, tol=1e-9):
        """Moment map alpha -> value.

        Symmetric case: alpha = (a1, a2, a3) counts occurrences of the axes
        x, y, z in the multi-index (identity factors drop out).  Two-qubit
        case: alpha is a 6-tuple (qubit-1 exponents, qubit-2 exponents).
        Sum-rule consistency of the underlying tensor is re-verified; a
        violation beyond ``tol`` signals a corrupted tensor.
        """
        out = {}
        if self.kind == "sym":
            for idx, val in self.values.items():
                alpha = (idx.count(1), idx.count(2), idx.count(3))
                if alpha in out and abs(out[alpha] - val) > tol:
                    raise ValueError(f"inconsistent duplicate moment {alpha}")
                out[alpha] = val
            for alpha in list(out):
                if sum(alpha) <= self.n_qubits - 2:
                    lhs = sum(
                        out[tuple(a + 2 * (i == ax) for i, a in enumerate(alpha))]
                        for ax in range(3)
                    )
                    if abs(lhs - out[alpha]) > tol:
                        raise ValueError(
                            f"sum rule broken at {alpha}: corrupted tensor"
                        )
        else:
            e = {0: (0, 0, 0), 1: (1, 0, 0), 2: (0, 1, 0), 3: (0, 0, 1)}
            for (m1, m2), val in self.values.items():
                out[e[m1] + e[m2]] = val
        return out


def _validate_spin_dim(rho, spin):
    if rho.shape[0] != spin.dicke_dim:
        raise ValueError(
            f"density matrix dim {rho.shape[0]} does not match {spin} "
            f"(expected {spin.dicke_dim})"
        )


def tensor_from_density(rho, spin):
    """Bloch tensor of a symmetric state given in the Dicke basis."""
    rho = check_density_matrix(np.asarray(rho, dtype=complex))
    _validate_spin_dim(rho, spin)
    ops = symmetric_pauli_ops(spin.n_qubits)
    values = {idx: float(np.sum(rho.T * op).real) for idx, op in ops.items()}
    return BlochTensor("sym", spin.n_qubits, values)


def density_from_tensor(x):
    """Dicke-basis matrix reconstructed from a symmetric Bloch tensor.

    Formal inverse of :func:`tensor_from_density`; the output is Hermitian
    with unit trace but positivity is not guaranteed for tensors that do not
    come from states.
    """
    if x.kind != "sym":
        raise ValueError("expected a symmetric tensor")
    x.validate()
    n = x.n_qubits
    ops = symmetric_pauli_ops(n)
    rho = np.zeros((n + 1, n + 1), dtype=complex)
    for idx, op in ops.items():
        rho += index_multiplicity(idx) * x.values[idx] * op
    return rho / 2**n


def tensor_from_two_qubit_density(rho):
    """Bloch tensor of a generic two-qubit state (computational basis)."""
    rho = check_density_matrix(np.asarray(rho, dtype=complex), dim=4)
    values = {}
    for m1, m2 in product(range(4), repeat=2):
        op = np.kron(SIGMA[m1], SIGMA[m2])
        values[(m1, m2)] = float(np.sum(rho.T * op).real)
    return BlochTensor("full2q", 2, values)


def coherent_tensor(direction, n_qubits):
    """Rank-one tensor of the coherent product state along a unit vector."""
    direction = np.asarray(direction, dtype=float)
    if abs(direction @ direction - 1.0) > 1e-12:
        raise ValueError("direction must be a unit vector")
    n_mu = np.concatenate([[1.0], direction])
    values = {}
    for idx in symmetric_indices(n_qubits):
        values[idx] = float(np.prod([n_mu[mu] for mu in idx]))
    return BlochTensor("sym", n_qubits, values)


def moments_from_tensor(x, tol=1e-9):
    """Moment map of a tensor (see :meth:`BlochTensor.moments`)."""
    return x.moments(tol=tol)
