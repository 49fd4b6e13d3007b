"""Closed-form entanglement witnesses from diagonal tensor entries.

For integer spin j (an even number 2j of qubits) the tensor entries whose
multi-index repeats a half-index twice, X_{m1..mj m1..mj}, are sums of
squares for every separable state; a negative measured value certifies
entanglement on the spot.  For spin 3/2 the partial-transpose test can be
written as positivity of an 8x8 matrix built from the tensor, whose
informative diagonal entries come in pairs X_{0bb} +- X_{bb3}.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, combinations_with_replacement
from math import comb

import numpy as np

from .paulis import SIGMA, symmetric_pauli_ops
from .observables import PERMS3

NEG_TOL = 1e-10

_LETTER = {1: "x", 2: "y", 3: "z"}


@dataclass(frozen=True)
class DiagonalObservable:
    """Half-index multiset; the measured entry is X at (half + half) sorted."""

    half: tuple  # sorted axes, each in 0..3, length j

    @property
    def full_index(self):
        return tuple(sorted(self.half + self.half))

    @property
    def label(self):
        letters = [_LETTER[m] for m in self.full_index if m != 0]
        return "D_" + "".join(letters) if letters else "D_1"

    @property
    def moment(self):
        return (2 * self.half.count(1), 2 * self.half.count(2), 2 * self.half.count(3))


def _canon_half(half):
    best = None
    for perm in PERMS3:
        mapping = {0: 0, 1: perm.index("x") + 1, 2: perm.index("y") + 1,
                   3: perm.index("z") + 1}
        img = tuple(sorted(mapping[m] for m in half))
        if best is None or img < best:
            best = img
    return best


@lru_cache(maxsize=None)
def enumerate_diag(j):
    """Non-equivalent diagonal observables for integer spin j.

    There are C(j+3, 3) half-index multisets before axis relabeling; the
    trivial all-identity one is dropped and the rest are reduced to canonical
    representatives, ordered by (degree, label).
    """
    if j != int(j) or j < 1:
        raise ValueError("diagonal observables require integer spin j >= 1")
    j = int(j)
    seen = {}
    for half in combinations_with_replacement(range(4), j):
        if all(m == 0 for m in half):
            continue
        canon = _canon_half(half)
        seen[canon] = DiagonalObservable(canon)
    obs = sorted(seen.values(), key=lambda o: (len([m for m in o.half if m != 0]),
                                               o.label))
    return tuple(obs)


def diag_count_before_reduction(j):
    return comb(int(j) + 3, 3)


@lru_cache(maxsize=None)
def all_diag_observables(j):
    """Every diagonal observable (all half multisets, trivial one dropped)."""
    if j != int(j) or j < 1:
        raise ValueError("diagonal observables require integer spin j >= 1")
    out = []
    for half in combinations_with_replacement(range(4), int(j)):
        if any(m != 0 for m in half):
            out.append(DiagonalObservable(half))
    return tuple(out)


def diag_witness(tensor, tol=NEG_TOL):
    """Detection by any strictly negative diagonal entry of the tensor.

    Every diagonal entry is scanned (the full orbit, not only canonical
    representatives): a single negative outcome certifies entanglement.
    """
    n = tensor.n_qubits
    if n % 2:
        raise ValueError("diagonal witnesses exist for integer spin only")
    violating = [obs for obs in all_diag_observables(n // 2)
                 if tensor.values[obs.full_index] < -tol]
    return {"detected": bool(violating), "violating": violating}


@lru_cache(maxsize=None)
def _diag_op_stack(j):
    """Dicke-basis operators of every diagonal observable plus class ids."""
    ops = symmetric_pauli_ops(2 * j)
    obs = all_diag_observables(j)
    classes = enumerate_diag(j)
    class_of = {c.half: i for i, c in enumerate(classes)}
    class_ids = np.array([class_of[_canon_half(o.half)] for o in obs])
    return obs, classes, class_ids, np.stack([ops[o.full_index] for o in obs])


def batch_diag_values(rhos, j):
    """Values of every diagonal entry, one row per state.

    Returns (observables, classes, class_ids, values) with ``class_ids``
    mapping each observable column to its canonical class.
    """
    obs, classes, class_ids, stack = _diag_op_stack(int(j))
    rhos = np.asarray(rhos, dtype=complex)
    return obs, classes, class_ids, np.einsum("sij,oji->so", rhos, stack).real


# ---------------------------------------------------------------------------
# spin 3/2: the 8x8 partial-transpose matrix and its diagonal pairs

def t32_matrix(tensor):
    """T_{mu i, nu i'} = sum_tau X_{tau mu nu} sigma^tau_{i i'} (spin 3/2).

    Hermitian, similar to 4x the partial transpose of the state across the
    one-qubit/two-qubit cut; positivity is equivalent to separability.
    """
    if tensor.n_qubits != 3:
        raise ValueError("the T matrix is built for spin 3/2 (three qubits)")
    t = np.zeros((8, 8), dtype=complex)
    for mu in range(4):
        for nu in range(4):
            coefs = [tensor.values[tuple(sorted((tau, mu, nu)))] for tau in range(4)]
            cell = sum(c * SIGMA[tau] for tau, c in enumerate(coefs))
            t[2 * mu:2 * mu + 2, 2 * nu:2 * nu + 2] = cell
    return t


PAIR_LABELS = (
    "X011-X113", "X011+X113",
    "X022-X223", "X022+X223",
    "X033-X333", "X033+X333",
)


def pair_values(tensor):
    """The six informative diagonal entries of T: X_{0bb} -+ X_{bb3}.

    The seventh pair X_{000} +- X_{003} is omitted: |X_{003}| <= 1 always.
    """
    if tensor.n_qubits != 3:
        raise ValueError("pair witnesses are defined for spin 3/2")
    vals = []
    for b in (1, 2, 3):
        x0bb = tensor.values[tuple(sorted((0, b, b)))]
        xbb3 = tensor.values[tuple(sorted((b, b, 3)))]
        vals += [x0bb - xbb3, x0bb + xbb3]
    return np.array(vals)


def batch_pair_values(rhos):
    """Pair-witness values for a stack of spin-3/2 Dicke-basis states."""
    ops = symmetric_pauli_ops(3)
    rhos = np.asarray(rhos, dtype=complex)
    idx0 = [tuple(sorted((0, b, b))) for b in (1, 2, 3)]
    idx3 = [tuple(sorted((b, b, 3))) for b in (1, 2, 3)]
    v0 = np.einsum("sij,oji->so", rhos, np.stack([ops[i] for i in idx0])).real
    v3 = np.einsum("sij,oji->so", rhos, np.stack([ops[i] for i in idx3])).real
    out = np.empty((len(rhos), 6))
    out[:, 0::2] = v0 - v3
    out[:, 1::2] = v0 + v3
    return out


def pair_witness_stats(values, entangled_mask, tol=NEG_TOL):
    """Detection fraction of every subset of the six pair values.

    ``values`` is (n_states, 6); only rows with ``entangled_mask`` count.
    Returns {k: {subset(indices): fraction}} for k = 1..6.
    """
    neg = values[entangled_mask] < -tol
    n = neg.shape[0]
    out = {}
    for k in range(1, 7):
        table = {}
        for subset in combinations(range(6), k):
            table[subset] = float(np.mean(np.any(neg[:, subset], axis=1))) if n else 0.0
        out[k] = table
    return out
