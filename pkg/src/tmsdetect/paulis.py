"""Pauli matrices, Dicke bases and symmetric-subspace Pauli-string operators.

Everything in this module is deterministic and cached: the operator tables
are built once per qubit number and shared by all callers.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations_with_replacement
from math import comb, sqrt

import numpy as np

SIGMA = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

AXES = "0xyz"


@lru_cache(maxsize=None)
def dicke_isometry(n_qubits):
    """Isometry from the (n+1)-dim Dicke space into the full 2^n space.

    Column k is the normalized symmetric state with k excitations, i.e.
    |j, m> with m = j - k; columns are ordered m = j down to -j.
    """
    dim = 2**n_qubits
    v = np.zeros((dim, n_qubits + 1))
    for idx in range(dim):
        v[idx, bin(idx).count("1")] = 1.0
    v /= np.sqrt(v.sum(axis=0))
    return v


def _apply_pauli_string(mus, vecs, n_qubits):
    """Apply sigma_{mu_1} x ... x sigma_{mu_n} to a stack of 2^n column vectors."""
    out = np.asarray(vecs, dtype=complex)
    ncols = out.shape[1]
    for pos, mu in enumerate(mus):
        if mu == 0:
            continue
        t = out.reshape(2**pos, 2, -1)
        out = np.einsum("ab,ibc->iac", SIGMA[mu], t).reshape(2**n_qubits, ncols)
    return out


@lru_cache(maxsize=None)
def symmetric_indices(n_qubits):
    """All sorted multi-indices (mu_1 <= ... <= mu_n), each mu in 0..3."""
    return tuple(combinations_with_replacement(range(4), n_qubits))


@lru_cache(maxsize=None)
def symmetric_pauli_ops(n_qubits):
    """Dicke-basis matrices of every sorted Pauli string on n qubits.

    Returns a dict mapping the sorted multi-index to the (n+1) x (n+1)
    Hermitian matrix  V^dag (sigma_{mu_1} x ... x sigma_{mu_n}) V  with V the
    Dicke isometry.  Supported for n <= 12 (full 2^n embedding).
    """
    if n_qubits > 12:
        raise ValueError("symmetric Pauli tables are built for n <= 12 qubits")
    v = dicke_isometry(n_qubits)
    ops = {}
    for mus in symmetric_indices(n_qubits):
        ops[mus] = v.T @ _apply_pauli_string(mus, v, n_qubits)
    return ops


def index_multiplicity(mus):
    """Number of distinct qubit orderings of a sorted multi-index."""
    n = len(mus)
    total = 1
    remaining = n
    for mu in range(4):
        c = sum(1 for m in mus if m == mu)
        total *= comb(remaining, c)
        remaining -= c
    return total


@lru_cache(maxsize=None)
def split_isometry(n_qubits, m):
    """Coefficients embedding N-qubit Dicke states into Dicke(m) x Dicke(N-m).

    Returns the (m+1)(N-m+1) x (N+1) real isometry W with
    |D_N^k> = sum_l W[l*(N-m+1)+(k-l), k] |D_m^l>|D_{N-m}^{k-l}>.
    """
    n2 = n_qubits - m
    w = np.zeros(((m + 1) * (n2 + 1), n_qubits + 1))
    for k in range(n_qubits + 1):
        for l in range(max(0, k - n2), min(m, k) + 1):
            w[l * (n2 + 1) + (k - l), k] = sqrt(
                comb(m, l) * comb(n2, k - l) / comb(n_qubits, k)
            )
    return w


def coherent_dicke_ket(n_qubits, direction):
    """Dicke-basis ket of the product state along a unit Bloch vector."""
    nx, ny, nz = direction
    theta = np.arccos(np.clip(nz, -1.0, 1.0))
    phi = np.arctan2(ny, nx)
    a = np.cos(theta / 2)
    b = np.sin(theta / 2) * np.exp(1j * phi)
    return np.array(
        [sqrt(comb(n_qubits, k)) * a ** (n_qubits - k) * b**k for k in range(n_qubits + 1)],
        dtype=complex,
    )
