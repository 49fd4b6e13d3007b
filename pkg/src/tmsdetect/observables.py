"""Pauli measurement observables, axis-relabeling symmetry and enumeration.

Symmetric two-qubit case: the universe holds the 8 observables
x, y, z, xx, xy, xz, yy, yz (zz is dropped because any two diagonal
second-order measurements determine the third through the trace sum rule).
Two sets are equivalent when an axis permutation maps one onto the other
with both staying inside the universe.

Generic two-qubit case: 15 observables with per-qubit axis labels and the
36-element group of independent axis permutations on each qubit.

Ordered sequences ("paths") are canonicalized by the list of canonical
prefix sets; the first step is fixed to xx.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, permutations
from math import comb

AXIS = ("x", "y", "z")
PERMS3 = tuple(permutations(AXIS))

SYM_UNIVERSE = ("x", "y", "z", "xx", "xy", "xz", "yy", "yz")
_SYM_ALL = SYM_UNIVERSE + ("zz",)

FULL2Q_UNIVERSE = tuple(
    [a + "1" for a in AXIS]
    + [a + "2" for a in AXIS]
    + [a + "1" + b + "2" for a in AXIS for b in AXIS]
)


def sym_label_key(label):
    """Degree-lexicographic sort key with x < y < z."""
    return (len(label), label)


def full2q_label_key(label):
    if len(label) == 2:  # single-qubit, e.g. "x1"
        return (1, int(label[1]), label[0], "")
    return (2, 0, label[0], label[2])


def label_key(universe, label):
    return sym_label_key(label) if universe == "sym" else full2q_label_key(label)


def universe_labels(universe):
    if universe == "sym":
        return SYM_UNIVERSE
    if universe == "full2q":
        return FULL2Q_UNIVERSE
    raise ValueError(f"unknown universe {universe!r}")


def _apply_perm_sym(perm, label):
    mapping = dict(zip(AXIS, perm))
    return "".join(sorted(mapping[c] for c in label))


def _apply_perm_full2q(perms, label):
    m1 = dict(zip(AXIS, perms[0]))
    m2 = dict(zip(AXIS, perms[1]))
    if len(label) == 2:
        m = m1 if label[1] == "1" else m2
        return m[label[0]] + label[1]
    return m1[label[0]] + "1" + m2[label[2]] + "2"


@lru_cache(maxsize=None)
def group_elements(universe):
    """All axis relabelings: 6 permutations, or 36 per-qubit pairs."""
    if universe == "sym":
        return PERMS3
    return tuple((p1, p2) for p1 in PERMS3 for p2 in PERMS3)


def apply_group(universe, g, labels):
    """Image of a label set; None when the image leaves the universe."""
    if universe == "sym":
        out = frozenset(_apply_perm_sym(g, lab) for lab in labels)
        if "zz" in out:
            return None
        return out
    return frozenset(_apply_perm_full2q(g, lab) for lab in labels)


def _set_key(universe, labels):
    return tuple(sorted(label_key(universe, lab) for lab in labels))


@lru_cache(maxsize=None)
def _canonical_cached(labels, universe):
    best = None
    best_key = None
    for g in group_elements(universe):
        img = apply_group(universe, g, labels)
        if img is None:
            continue
        key = _set_key(universe, img)
        if best_key is None or key < best_key:
            best, best_key = img, key
    return best


def canonical_set(labels, universe="sym"):
    """Degree-lexicographically smallest valid image of a set of labels."""
    labels = frozenset(labels)
    allowed = set(universe_labels(universe))
    if not labels <= allowed:
        raise ValueError(f"labels {sorted(labels)} outside the {universe} universe")
    return _canonical_cached(labels, universe)


def sorted_members(universe, labels):
    return tuple(sorted(labels, key=lambda lab: label_key(universe, lab)))


@dataclass(frozen=True)
class MeasurementSet:
    """A canonical (orbit-representative) unordered set of observables."""

    universe: str
    members: tuple  # sorted labels

    @property
    def k(self):
        return len(self.members)

    def __str__(self):
        return "+".join(self.members)


@lru_cache(maxsize=None)
def _rank_tables(universe):
    """Vectorized group action on rank bitmasks.

    Labels are ranked in degree-lexicographic order.  A set maps to the
    value sum(2^(n-1-rank)); for equal sizes the larger value is the
    degree-lexicographically smaller set, so the canonical form is an argmax.
    Invalid images (leaving the universe) carry weight -inf.
    """
    import numpy as np

    labels = universe_labels(universe)
    n = len(labels)
    rank = {lab: i for i, lab in enumerate(labels)}
    gs = group_elements(universe)
    weights = np.zeros((n, len(gs)))
    invalid = -(2.0 ** 20)  # forces any image leaving the universe below 0
    for gi, g in enumerate(gs):
        for lab in labels:
            img = (_apply_perm_sym(g, lab) if universe == "sym"
                   else _apply_perm_full2q(g, lab))
            weights[rank[lab], gi] = (2.0 ** (n - 1 - rank[img])
                                      if img in rank else invalid)
    return labels, rank, weights


@lru_cache(maxsize=None)
def _canonical_values(universe, k):
    """(canonical value -> orbit size) plus decoded representative members."""
    import numpy as np

    labels, rank, weights = _rank_tables(universe)
    n = len(labels)
    combos = list(combinations(range(n), k))
    mask = np.zeros((len(combos), n), dtype=float)
    for i, combo in enumerate(combos):
        mask[i, list(combo)] = 1.0
    values = mask @ weights               # (n_subsets, n_group)
    canon = values.max(axis=1)            # every subset has a valid image
    counts = {}
    for v in canon:
        counts[v] = counts.get(v, 0) + 1
    reps = {}
    for v in counts:
        bits = int(round(v))
        members = tuple(labels[n - 1 - b] for b in range(n) if bits >> b & 1)
        reps[v] = tuple(sorted(members, key=lambda lab: label_key(universe, lab)))
    ordered = sorted(reps, reverse=True)  # larger value = smaller set key
    return tuple((reps[v], counts[v]) for v in ordered)


@lru_cache(maxsize=None)
def enumerate_sets(universe, k):
    """Canonical k-element measurement sets in degree-lexicographic order."""
    labels = universe_labels(universe)
    if not 1 <= k <= len(labels):
        raise ValueError(f"k must be in 1..{len(labels)}")
    return tuple(MeasurementSet(universe, members)
                 for members, _ in _canonical_values(universe, k))


@lru_cache(maxsize=None)
def orbit_sizes(universe, k):
    """Number of k-subsets in each canonical set's equivalence class."""
    return {members: count for members, count in _canonical_values(universe, k)}


@dataclass(frozen=True)
class MeasurementPath:
    """Ordered measurement sequence with its canonical representation.

    ``rep`` is the tuple of canonical prefix sets (as sorted member tuples);
    two paths are equivalent iff their reps coincide.  ``steps`` is one
    concrete representative sequence.
    """

    steps: tuple
    rep: tuple

    @property
    def k(self):
        return len(self.steps)

    def __str__(self):
        return ">".join(self.steps)


def path_rep(steps, universe="sym"):
    rep = []
    for i in range(1, len(steps) + 1):
        canon = canonical_set(steps[:i], universe)
        rep.append(sorted_members(universe, canon))
    return tuple(rep)


@lru_cache(maxsize=None)
def enumerate_paths(k):
    """Canonical symmetric-universe paths of length k starting with xx."""
    if not 1 <= k <= 8:
        raise ValueError("paths are defined for 1 <= k <= 8")
    rest = tuple(lab for lab in SYM_UNIVERSE if lab != "xx")
    seen = {}
    for tail in permutations(rest, k - 1):
        steps = ("xx",) + tail
        rep = path_rep(steps)
        if rep not in seen:
            seen[rep] = steps
    paths = [MeasurementPath(steps, rep) for rep, steps in seen.items()]
    paths.sort(key=lambda p: p.rep)
    return tuple(paths)


# ---------------------------------------------------------------------------
# moment-level view

_DIAG = ((2, 0, 0), (0, 2, 0), (0, 0, 2))


def label_to_moment(universe, label):
    """Exponent tuple of the monomial a measurement fixes."""
    if universe == "sym":
        alpha = [0, 0, 0]
        for c in label:
            alpha[AXIS.index(c)] += 1
        return tuple(alpha)
    alpha = [0, 0, 0, 0, 0, 0]
    if len(label) == 2:
        off = 0 if label[1] == "1" else 3
        alpha[off + AXIS.index(label[0])] = 1
    else:
        alpha[AXIS.index(label[0])] = 1
        alpha[3 + AXIS.index(label[2])] = 1
    return tuple(alpha)


def effective_moments(labels, universe="sym"):
    """Moments fixed by a measurement set, closed under the trace sum rule.

    In the symmetric universe two diagonal second-order moments determine
    the third (x^2 + y^2 + z^2 averages to 1); the generic two-qubit case has
    no such closure.
    """
    moments = {label_to_moment(universe, lab) for lab in labels}
    if universe == "sym":
        have = [d for d in _DIAG if d in moments]
        if len(have) >= 2:
            moments.update(_DIAG)
    return frozenset(moments)


def _moment_perm(universe, g, alpha):
    if universe == "sym":
        src = {ax: i for i, ax in enumerate(AXIS)}
        out = [0, 0, 0]
        for i, ax in enumerate(AXIS):
            out[src[g[i]]] = alpha[i]
        return tuple(out)
    a1 = _moment_perm("sym", g[0], alpha[:3])
    a2 = _moment_perm("sym", g[1], alpha[3:])
    return a1 + a2


def _moment_set_key(alphas):
    return tuple(sorted((sum(a), a) for a in alphas))


@lru_cache(maxsize=None)
def canonical_moment_class(alphas, universe="sym"):
    """Canonical form of a moment-index set under axis relabeling.

    Unlike :func:`canonical_set` there is no universe restriction here: the
    group acts freely on exponent tuples.  Measurement sets whose effective
    moments fall in the same class pose relabeling-equivalent feasibility
    problems and are pooled in the statistics pipeline.
    """
    best = None
    best_key = None
    for g in group_elements(universe):
        img = frozenset(_moment_perm(universe, g, a) for a in alphas)
        key = _moment_set_key(img)
        if best_key is None or key < best_key:
            best, best_key = img, key
    return best


def mk_formula(j, k):
    """Subset count C(sum of triangular numbers - 1, k) for spin j.

    The observable universe of a spin-j state has one element per monomial
    of degree 1..2j in three variables; triangular numbers T_n = n(n+1)/2
    count monomials of fixed degree.
    """
    if j < 0.5:
        raise ValueError("j must be at least 1/2")
    n2j = int(round(2 * j))
    if abs(2 * j - n2j) > 1e-12:
        raise ValueError("j must be a half-integer")
    size = sum(n * (n + 1) // 2 for n in range(1, n2j + 2)) - 1
    return comb(size, k)
