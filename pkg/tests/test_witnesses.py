import numpy as np
import pytest

from tmsdetect.bloch import SpinSize, coherent_tensor, tensor_from_density
from tmsdetect.paulis import dicke_isometry
from tmsdetect.sampling import SeededEnsemble, sample_state
from tmsdetect.tms import DetectConfig, detect
from tmsdetect.witnesses import (
    PAIR_LABELS,
    all_diag_observables,
    batch_diag_values,
    batch_pair_values,
    diag_count_before_reduction,
    diag_witness,
    enumerate_diag,
    pair_values,
    pair_witness_stats,
    t32_matrix,
)

REFERENCE_DIAG_CLASSES = {
    2: ["D_xx", "D_xxxx", "D_xxyy"],
    3: ["D_xx", "D_xxxx", "D_xxyy", "D_xxxxxx", "D_xxxxyy", "D_xxyyzz"],
    4: ["D_xx", "D_xxxx", "D_xxyy", "D_xxxxxx", "D_xxxxyy", "D_xxyyzz",
        "D_xxxxxxxx", "D_xxxxxxyy", "D_xxxxyyyy", "D_xxxxyyzz"],
    5: ["D_xx", "D_xxxx", "D_xxyy", "D_xxxxxx", "D_xxxxyy", "D_xxyyzz",
        "D_xxxxxxxx", "D_xxxxxxyy", "D_xxxxyyyy", "D_xxxxyyzz",
        "D_xxxxxxxxxx", "D_xxxxxxxxyy", "D_xxxxxxyyyy", "D_xxxxxxyyzz",
        "D_xxxxyyyyzz"],
}


class TestDiagonalEnumeration:
    @pytest.mark.parametrize("j", [2, 3, 4, 5])
    def test_reference_lists(self, j):
        assert [o.label for o in enumerate_diag(j)] == REFERENCE_DIAG_CLASSES[j]

    def test_counts(self):
        assert [len(enumerate_diag(j)) for j in (2, 3, 4, 5)] == [3, 6, 10, 15]

    @pytest.mark.parametrize("j", [1, 2, 3, 4, 5])
    def test_count_before_reduction(self, j):
        # all half multisets including the trivial one
        assert len(all_diag_observables(j)) + 1 == diag_count_before_reduction(j)

    def test_half_integer_rejected(self):
        with pytest.raises(ValueError):
            enumerate_diag(1.5)


class TestDiagWitness:
    def test_bell_detected(self, bell_tensor):
        res = diag_witness(bell_tensor)
        assert res["detected"]
        assert any(o.label == "D_zz" for o in res["violating"])

    def test_coherent_never_detected(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            n = rng.normal(size=3)
            n /= np.linalg.norm(n)
            assert not diag_witness(coherent_tensor(n, 2))["detected"]

    def test_projector_not_detected(self, ps3_tensor):
        assert not diag_witness(ps3_tensor)["detected"]

    def test_odd_qubit_number_rejected(self):
        t = coherent_tensor((0, 0, 1), 3)
        with pytest.raises(ValueError):
            diag_witness(t)

    def test_batch_values_match_tensor(self):
        ens = SeededEnsemble(5, "sym", SpinSize(4))
        rhos = [sample_state(ens, i) for i in range(5)]
        obs, classes, class_ids, vals = batch_diag_values(rhos, 2)
        for s, rho in enumerate(rhos):
            t = tensor_from_density(rho, SpinSize(4))
            for o, v in zip(obs, vals[s]):
                assert v == pytest.approx(t.values[o.full_index], abs=1e-10)

    def test_soundness_against_moment_engine(self):
        # a negative diagonal entry must certify entanglement when that
        # moment alone is handed to the feasibility engine
        ens = SeededEnsemble(6, "sym", SpinSize(2))
        found = 0
        for i in range(60):
            rho = sample_state(ens, i)
            t = tensor_from_density(rho, SpinSize(2))
            res = diag_witness(t)
            if not res["detected"]:
                continue
            found += 1
            obs = res["violating"][0]
            data = {obs.moment: t.values[obs.full_index]}
            v = detect(data, DetectConfig(k_max=2, binary=True))
            assert v.detected
        assert found > 5


class TestSpin32:
    def test_spectrum_matches_partial_transpose(self):
        ens = SeededEnsemble(9, "sym", SpinSize(3))
        v = dicke_isometry(3)
        for i in range(50):
            rho = sample_state(ens, i)
            t = tensor_from_density(rho, SpinSize(3))
            tm = t32_matrix(t)
            assert np.max(np.abs(tm - tm.conj().T)) < 1e-12
            big = v @ rho @ v.T
            pt = big.reshape(2, 4, 2, 4).transpose(2, 1, 0, 3).reshape(8, 8)
            diff = np.sort(np.linalg.eigvalsh(tm)) - 4 * np.sort(np.linalg.eigvalsh(pt))
            assert np.max(np.abs(diff)) < 1e-9

    def test_coherent_state_positive(self):
        t = coherent_tensor((0, 0, 1), 3)
        assert np.linalg.eigvalsh(t32_matrix(t))[0] >= -1e-12

    def test_ghz_negative(self):
        rho = np.zeros((4, 4))
        rho[0, 0] = rho[3, 3] = rho[0, 3] = rho[3, 0] = 0.5
        t = tensor_from_density(rho, SpinSize(3))
        assert np.linalg.eigvalsh(t32_matrix(t))[0] < -0.1

    def test_pair_values_are_t_diagonals(self):
        ens = SeededEnsemble(10, "sym", SpinSize(3))
        for i in range(5):
            rho = sample_state(ens, i)
            t = tensor_from_density(rho, SpinSize(3))
            tm = t32_matrix(t)
            diag = np.real(np.diag(tm))
            vals = pair_values(t)
            # rows (mu,i) for mu = 1..3: entries X_0bb + (-1)^i X_bb3
            expected = [diag[2], diag[3], diag[4], diag[5], diag[6], diag[7]]
            got = [vals[1], vals[0], vals[3], vals[2], vals[5], vals[4]]
            assert np.allclose(sorted(got), sorted(expected), atol=1e-10)

    def test_wrong_spin_rejected(self, bell_tensor):
        with pytest.raises(ValueError):
            t32_matrix(bell_tensor)
        with pytest.raises(ValueError):
            pair_values(bell_tensor)


@pytest.fixture(scope="module")
def pair_sample():
    ens = SeededEnsemble(7, "sym", SpinSize(3))
    rhos = [sample_state(ens, i) for i in range(1500)]
    vals = batch_pair_values(rhos)
    tmins = np.array([np.linalg.eigvalsh(t32_matrix(
        tensor_from_density(r, SpinSize(3))))[0] for r in rhos])
    return vals, tmins


class TestPairStats:

    def test_t_positive_states_never_flagged(self, pair_sample):
        vals, tmins = pair_sample
        positive = tmins >= -1e-10
        # diagonal entries of a PSD matrix are non-negative
        assert not np.any(vals[positive] < -1e-10)

    def test_union_monotone_in_subset_size(self, pair_sample):
        vals, tmins = pair_sample
        table = pair_witness_stats(vals, tmins < -1e-10)
        best = [max(table[k].values()) for k in range(1, 7)]
        worst = [min(table[k].values()) for k in range(1, 7)]
        assert all(b2 >= b1 - 1e-12 for b1, b2 in zip(best, best[1:]))
        assert all(w2 >= w1 - 1e-12 for w1, w2 in zip(worst, worst[1:]))

    def test_full_subset_dominates_singletons(self, pair_sample):
        vals, tmins = pair_sample
        table = pair_witness_stats(vals, tmins < -1e-10)
        full = table[6][tuple(range(6))]
        assert all(full >= f - 1e-12 for f in table[1].values())

    def test_labels(self):
        assert len(PAIR_LABELS) == 6
        assert PAIR_LABELS[0] == "X011-X113"
