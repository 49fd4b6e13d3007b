import numpy as np
import pytest

from tmsdetect.bloch import SpinSize, coherent_tensor, tensor_from_density, \
    tensor_from_two_qubit_density
from tmsdetect.observables import apply_group, group_elements
from tmsdetect.sampling import embed_symmetric_two_qubit, ppt_separable_two_qubit
from tmsdetect.tms import (
    ENTANGLED_CERTIFIED,
    FEASIBLE_NOT_FLAT,
    PRODUCT,
    SEPARABLE_FLAT,
    SPHERE,
    DetectConfig,
    LinearContradiction,
    MomentMatrixSpec,
    build_instance,
    detect,
    detect_full_tomography,
    detect_set,
)

from conftest import random_sym_states


class TestMomentMatrixShape:
    def test_sphere_order_two(self):
        spec = MomentMatrixSpec(SPHERE, 2)
        assert spec.dimension == 10
        assert spec.n_moments == 35

    def test_product_order_two(self):
        spec = MomentMatrixSpec(PRODUCT, 2)
        assert spec.dimension == 28
        assert spec.n_moments == 210

    def test_cell_indices_sum(self):
        # basis is graded, lexicographic on exponent tuples: 1, z, y, x, ...
        spec = MomentMatrixSpec(SPHERE, 2)
        assert spec.basis[0] == (0, 0, 0)
        assert spec.basis[1] == (0, 0, 1)
        assert spec.cell_index(1, 1) == (0, 0, 2)
        assert spec.cell_index(0, 3) == spec.basis[3]


class TestBuildInstance:
    def test_bell_forces_negative_diagonal(self):
        problem, tpl, values = build_instance(
            {(2, 0, 0): 1.0, (0, 2, 0): 1.0}, 2)
        # the substituted diagonal cell for z^2 must be the forced -1
        forced = [c0 + cv @ values for _, c0, cv in tpl.fixed_diag]
        assert min(forced) == pytest.approx(-1.0, abs=1e-12)

    def test_order_below_minimum_rejected(self):
        with pytest.raises(ValueError):
            build_instance({(2, 0, 0): 0.5}, 1)

    def test_contradictory_data_raises(self):
        with pytest.raises(LinearContradiction):
            build_instance({(2, 0, 0): 0.5, (0, 2, 0): 0.25,
                            (0, 0, 2): 0.5}, 2)  # sums to 1.25 != 1


class TestDetectExamples:
    def test_bell_with_two_diagonals(self, bell_tensor):
        v = detect_set(bell_tensor, {"xx", "yy"})
        assert v.outcome == ENTANGLED_CERTIFIED
        assert v.level_k == 2

    def test_empty_data_feasible(self):
        v = detect({}, DetectConfig(k_max=2))
        assert v.outcome == SEPARABLE_FLAT

    def test_projector_full_tomography_flat(self, ps3_tensor):
        v = detect_full_tomography(ps3_tensor)
        assert v.outcome == SEPARABLE_FLAT
        assert v.ranks[0] == v.ranks[1]

    @pytest.mark.parametrize("direction", [(0, 0, 1), (1, 0, 0),
                                           (0.6, 0, 0.8), (-0.3, 0.4, 0.8660254037844387)])
    def test_coherent_states_never_certified(self, direction):
        t = coherent_tensor(direction, 2)
        for labels in (None, {"xx"}, {"xx", "yy"}, {"x", "xy"}):
            if labels is None:
                v = detect_full_tomography(t)
            else:
                v = detect_set(t, labels)
            assert v.outcome != ENTANGLED_CERTIFIED

    def test_bell_full_tomography(self, bell_tensor):
        assert detect_full_tomography(bell_tensor).outcome == ENTANGLED_CERTIFIED

    def test_two_qubit_maximally_mixed(self):
        t = tensor_from_two_qubit_density(np.eye(4) / 4)
        v = detect_full_tomography(t)
        assert v.outcome in (SEPARABLE_FLAT, FEASIBLE_NOT_FLAT)

    def test_two_qubit_bell_detected(self):
        psi = np.zeros(4)
        psi[1] = psi[2] = 1 / np.sqrt(2)
        t = tensor_from_two_qubit_density(np.outer(psi, psi))
        assert detect_full_tomography(t).outcome == ENTANGLED_CERTIFIED


# independent measure-level oracle for degree-2 data on the sphere: data is
# feasible iff the matrix [[1, m^T], [m, C]] admits a PSD completion of its
# unknown entries; for the patterns below that reduces to closed forms
def oracle_diag(a, b, c):
    return min(a, b, c) >= -1e-12


def oracle_diag_plus_xy(a, b, c, u):
    return oracle_diag(a, b, c) and u * u <= a * b + 1e-12


def oracle_full_c(cmat):
    return np.linalg.eigvalsh(cmat)[0] >= -1e-12


class TestOracleAgreement:
    def test_two_diagonals_match_closed_form(self):
        for rho in random_sym_states(21, 40):
            t = tensor_from_density(rho, SpinSize(2))
            m = t.moments()
            expected = not oracle_diag(m[(2, 0, 0)], m[(0, 2, 0)], m[(0, 0, 2)])
            v = detect_set(t, {"xx", "yy"}, DetectConfig(k_max=2, binary=True))
            assert v.detected == expected

    def test_diagonals_plus_offdiagonal_match_closed_form(self):
        for rho in random_sym_states(22, 40):
            t = tensor_from_density(rho, SpinSize(2))
            m = t.moments()
            expected = not oracle_diag_plus_xy(
                m[(2, 0, 0)], m[(0, 2, 0)], m[(0, 0, 2)], m[(1, 1, 0)])
            v = detect_set(t, {"xx", "xy", "yy"}, DetectConfig(k_max=2, binary=True))
            assert v.detected == expected

    def test_all_second_order_match_closed_form(self):
        for rho in random_sym_states(23, 40):
            t = tensor_from_density(rho, SpinSize(2))
            m = t.moments()
            cmat = np.array([[m[(2, 0, 0)], m[(1, 1, 0)], m[(1, 0, 1)]],
                             [m[(1, 1, 0)], m[(0, 2, 0)], m[(0, 1, 1)]],
                             [m[(1, 0, 1)], m[(0, 1, 1)], m[(0, 0, 2)]]])
            expected = not oracle_full_c(cmat)
            v = detect_set(t, {"xx", "xy", "xz", "yy", "yz"},
                           DetectConfig(k_max=2, binary=True))
            assert v.detected == expected

    def test_full_tomography_matches_ppt(self):
        agreements = 0
        states = random_sym_states(24, 120)
        for rho in states:
            t = tensor_from_density(rho, SpinSize(2))
            v = detect_full_tomography(t, DetectConfig(k_max=2))
            npt = not ppt_separable_two_qubit(embed_symmetric_two_qubit(rho))
            agreements += (v.detected == npt)
        assert agreements >= len(states) - 1


class TestInvariants:
    def test_group_equivariance(self):
        # relabeling the axes of both state and set leaves the verdict alone
        rng = np.random.default_rng(15)
        states = random_sym_states(25, 10)
        sets = [{"xx"}, {"xx", "xy"}, {"x", "yy"}, {"xx", "yy", "xz"}]
        for rho in states:
            t = tensor_from_density(rho, SpinSize(2))
            for labels in sets:
                base = detect_set(t, labels, DetectConfig(k_max=2, binary=True))
                for g in group_elements("sym"):
                    img = apply_group("sym", g, frozenset(labels))
                    if img is None:
                        continue
                    mapped = _relabel_tensor(t, g)
                    v = detect_set(mapped, img, DetectConfig(k_max=2, binary=True))
                    assert v.detected == base.detected

    def test_monotone_under_set_inclusion(self):
        rng = np.random.default_rng(16)
        chains = [({"xx"}, {"xx", "yy"}),
                  ({"xx", "yy"}, {"xx", "xy", "yy"}),
                  ({"xy"}, {"xy", "xz"}),
                  ({"x"}, {"x", "xx", "yz"})]
        for rho in random_sym_states(26, 25):
            t = tensor_from_density(rho, SpinSize(2))
            for small, big in chains:
                v1 = detect_set(t, small, DetectConfig(k_max=2, binary=True))
                v2 = detect_set(t, big, DetectConfig(k_max=2, binary=True))
                if v1.detected:
                    assert v2.detected

    def test_feasible_point_passes_eigen_recheck(self):
        for rho in random_sym_states(27, 20):
            t = tensor_from_density(rho, SpinSize(2))
            v = detect_set(t, {"xx", "xy"}, DetectConfig(k_max=2, binary=True))
            if v.outcome == FEASIBLE_NOT_FLAT:
                assert v.sdp_verdict.margin > 1e-9

    def test_certificates_reverified(self, bell_tensor):
        from tmsdetect import sdp

        v = detect_set(bell_tensor, {"xx", "yy", "xy"})
        assert v.outcome == ENTANGLED_CERTIFIED
        cert = v.sdp_verdict.dual_certificate
        m = bell_tensor.moments()
        data = {a: m[a] for a in [(2, 0, 0), (0, 2, 0), (0, 0, 2), (1, 1, 0)]}
        problem, _, _ = build_instance(data, 2)
        ok, value = sdp.verify_infeasible(problem, cert)
        assert ok and value < 0


def _relabel_tensor(tensor, perm):
    from tmsdetect.observables import AXIS

    mapping = {0: 0}
    for i, ax in enumerate(AXIS):
        mapping[i + 1] = AXIS.index(perm[i]) + 1
    values = {}
    for idx, val in tensor.values.items():
        values[tuple(sorted(mapping[m] for m in idx))] = val
    return type(tensor)("sym", tensor.n_qubits, values)
