from itertools import combinations
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tmsdetect.observables import (
    FULL2Q_UNIVERSE,
    SYM_UNIVERSE,
    apply_group,
    canonical_moment_class,
    canonical_set,
    effective_moments,
    enumerate_paths,
    enumerate_sets,
    group_elements,
    label_to_moment,
    mk_formula,
    orbit_sizes,
    path_rep,
)

# Unordered symmetric class counts as verified by an independent union-find
# over the group action.  The published tabulation claims 26 at k = 4, but
# its own explicit k=4 listing has 25 rows, of which two ({z,xx,yy,yz} and
# {z,xx,xz,yy}) are images of each other under swapping x and y while the
# class of {z,xx,xy,yy} is absent; the count of 25 is exact.
SYM_COUNTS = (3, 9, 19, 25, 23, 14, 5, 1)
FULL2Q_COUNTS = (3, 10, 30, 69, 132, 205, 254, 254, 205, 132, 69, 30, 10, 3, 1)
PATH_COUNTS = (1, 5, 26, 128, 524, 1604, 3228, 3228)

K1_SETS = [("x",), ("xx",), ("xy",)]
K2_SETS = [("x", "y"), ("x", "xx"), ("x", "xy"), ("x", "yy"), ("x", "yz"),
           ("xx", "xy"), ("xx", "yy"), ("xx", "yz"), ("xy", "xz")]
K3_SETS = [("x", "y", "z"), ("x", "y", "xx"), ("x", "y", "xy"), ("x", "y", "xz"),
           ("x", "z", "yy"), ("x", "xx", "xy"), ("x", "xx", "yy"),
           ("x", "xx", "yz"), ("x", "xy", "xz"), ("x", "xy", "yy"),
           ("x", "xy", "yz"), ("x", "xz", "yy"), ("x", "yy", "yz"),
           ("z", "xx", "yy"), ("xx", "xy", "xz"), ("xx", "xy", "yy"),
           ("xx", "xy", "yz"), ("xx", "xz", "yy"), ("xy", "xz", "yz")]


class TestEnumeration:
    def test_symmetric_counts(self):
        assert tuple(len(enumerate_sets("sym", k)) for k in range(1, 9)) == SYM_COUNTS

    def test_two_qubit_counts(self):
        got = tuple(len(enumerate_sets("full2q", k)) for k in range(1, 16))
        assert got == FULL2Q_COUNTS

    def test_complement_symmetry(self):
        for k in range(1, 15):
            assert len(enumerate_sets("full2q", k)) == len(enumerate_sets("full2q", 15 - k))

    @pytest.mark.parametrize("k,expected", [(1, K1_SETS), (2, K2_SETS), (3, K3_SETS)])
    def test_listed_sets_in_order(self, k, expected):
        assert [s.members for s in enumerate_sets("sym", k)] == expected

    def test_orbit_partition(self):
        for k in range(1, 9):
            assert sum(orbit_sizes("sym", k).values()) == comb(8, k)
        for k in (1, 2, 3, 13, 14, 15):
            assert sum(orbit_sizes("full2q", k).values()) == comb(15, k)

    def test_union_find_cross_check(self):
        # independent orbit count: merge every subset with its group images
        for k in range(1, 9):
            subsets = [frozenset(c) for c in combinations(SYM_UNIVERSE, k)]
            index = {s: i for i, s in enumerate(subsets)}
            parent = list(range(len(subsets)))

            def find(a):
                while parent[a] != a:
                    parent[a] = parent[parent[a]]
                    a = parent[a]
                return a

            for s in subsets:
                for g in group_elements("sym"):
                    img = apply_group("sym", g, s)
                    if img is not None:
                        ra, rb = find(index[s]), find(index[img])
                        if ra != rb:
                            parent[ra] = rb
            n_classes = len({find(i) for i in range(len(subsets))})
            assert n_classes == SYM_COUNTS[k - 1]


class TestCanonicalForm:
    def test_single_diagonal(self):
        assert canonical_set({"yy"}) == frozenset({"xx"})

    def test_two_offdiagonals(self):
        assert canonical_set({"xz", "yz"}) == frozenset({"xy", "xz"})

    def test_fully_symmetric_fixed_point(self):
        assert canonical_set({"x", "y", "z"}) == frozenset({"x", "y", "z"})

    def test_idempotent_and_invariant(self):
        import random

        rnd = random.Random(4)
        for _ in range(300):
            k = rnd.randint(1, 8)
            s = frozenset(rnd.sample(SYM_UNIVERSE, k))
            canon = canonical_set(s)
            assert canonical_set(canon) == canon
            for g in group_elements("sym"):
                img = apply_group("sym", g, s)
                if img is not None:
                    assert canonical_set(img) == canon

    def test_full2q_invariance(self):
        import random

        rnd = random.Random(9)
        for _ in range(100):
            k = rnd.randint(1, 15)
            s = frozenset(rnd.sample(FULL2Q_UNIVERSE, k))
            canon = canonical_set(s, "full2q")
            assert canonical_set(canon, "full2q") == canon
            g = rnd.choice(group_elements("full2q"))
            assert canonical_set(apply_group("full2q", g, s), "full2q") == canon


class TestPaths:
    def test_counts(self):
        assert tuple(len(enumerate_paths(k)) for k in range(1, 9)) == PATH_COUNTS

    def test_k2_sequences(self):
        steps = {p.steps for p in enumerate_paths(2)}
        assert steps == {("xx", "x"), ("xx", "y"), ("xx", "xy"), ("xx", "yy"),
                         ("xx", "yz")}

    def test_k1(self):
        (path,) = enumerate_paths(1)
        assert path.steps == ("xx",)

    def test_rep_is_canonical_prefixes(self):
        path = enumerate_paths(3)[0]
        rep = path_rep(path.steps)
        assert rep == path.rep
        for k, members in enumerate(rep, start=1):
            assert frozenset(members) == canonical_set(path.steps[:k])

    def test_equivalent_orderings_merge(self):
        # same prefix sets up to relabeling -> same canonical path
        assert path_rep(("xx", "yy", "xz", "yz", "xy", "x", "y", "z")) == \
            path_rep(("xx", "yy", "yz", "xz", "xy", "x", "y", "z"))


class TestEffectiveMoments:
    def test_two_diagonals_fix_three(self):
        assert effective_moments({"xx", "yy"}) == frozenset(
            {(2, 0, 0), (0, 2, 0), (0, 0, 2)})

    def test_single_local(self):
        assert effective_moments({"x"}) == frozenset({(1, 0, 0)})

    def test_single_diagonal_no_closure(self):
        assert effective_moments({"xx"}) == frozenset({(2, 0, 0)})

    def test_classes_16_and_18_are_relabel_equivalent(self):
        c16 = effective_moments({"xx", "xy", "yy"})
        c18 = effective_moments({"xx", "xz", "yy"})
        assert c16 != c18  # distinct moment sets
        assert canonical_moment_class(c16) == canonical_moment_class(c18)

    def test_full2q_has_no_closure(self):
        eff = effective_moments({"x1x2", "y1y2"}, "full2q")
        assert eff == {label_to_moment("full2q", "x1x2"),
                       label_to_moment("full2q", "y1y2")}


class TestCountingFormula:
    def test_spin_one_universe(self):
        assert mk_formula(1, 1) == 9

    def test_spin_one_pairs(self):
        assert mk_formula(1, 2) == 36

    def test_spin_two_singletons(self):
        assert mk_formula(2, 1) == 34

    @given(st.integers(min_value=1, max_value=6), st.integers(min_value=0, max_value=8))
    @settings(max_examples=40, deadline=None)
    def test_matches_binomial(self, twoj, k):
        j = twoj / 2
        size = sum(n * (n + 1) // 2 for n in range(1, twoj + 2)) - 1
        assert mk_formula(j, k) == comb(size, k)
