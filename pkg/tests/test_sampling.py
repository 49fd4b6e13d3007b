import numpy as np
import pytest

from tmsdetect.bloch import SpinSize
from tmsdetect.paulis import coherent_dicke_ket, dicke_isometry
from tmsdetect.sampling import (
    SeededEnsemble,
    embed_symmetric_two_qubit,
    fibonacci_sphere,
    npt_entangled_symmetric,
    ppt_min_eig_symmetric,
    ppt_min_eig_two_qubit,
    ppt_separable_two_qubit,
    quantumness,
    quantumness_batch,
    sample_state,
)


class TestEnsemble:
    def test_identical_calls_bitwise_equal(self, sym_ensemble):
        a = sample_state(sym_ensemble, 17)
        b = sample_state(sym_ensemble, 17)
        assert np.array_equal(a, b)

    def test_order_independent(self, sym_ensemble):
        direct = sample_state(sym_ensemble, 5)
        for i in range(5):
            sample_state(sym_ensemble, i)
        assert np.array_equal(direct, sample_state(sym_ensemble, 5))

    def test_valid_density_matrix(self, sym_ensemble):
        for i in range(20):
            rho = sample_state(sym_ensemble, i)
            assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
            assert np.linalg.eigvalsh(rho)[0] >= -1e-12
            assert np.max(np.abs(rho - rho.conj().T)) < 1e-14

    def test_kinds_and_dims(self):
        assert sample_state(SeededEnsemble(1, "full2q"), 0).shape == (4, 4)
        assert sample_state(SeededEnsemble(1, "sym", SpinSize(6)), 0).shape == (7, 7)

    def test_different_seeds_differ(self):
        a = sample_state(SeededEnsemble(1, "sym", SpinSize(2)), 0)
        b = sample_state(SeededEnsemble(2, "sym", SpinSize(2)), 0)
        assert not np.allclose(a, b)


class TestPptOracle:
    def test_bell_entangled(self):
        psi = np.zeros(4)
        psi[1] = psi[2] = 1 / np.sqrt(2)
        assert not ppt_separable_two_qubit(np.outer(psi, psi))

    def test_maximally_mixed_separable(self):
        assert ppt_separable_two_qubit(np.eye(4) / 4)

    def test_projector_third_separable(self, ps3_tensor):
        rho4 = embed_symmetric_two_qubit(np.eye(3) / 3)
        # direct eigenvalue oracle on the partial transpose
        pt = np.asarray(rho4).reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)
        assert np.linalg.eigvalsh(pt)[0] >= -1e-12
        assert ppt_separable_two_qubit(rho4)

    def test_separable_fraction_of_ensemble(self):
        # coarse version of the full-scale acceptance check
        ens = SeededEnsemble(1, "sym", SpinSize(2))
        sep = sum(ppt_separable_two_qubit(embed_symmetric_two_qubit(
            sample_state(ens, i))) for i in range(4000))
        assert sep / 4000 == pytest.approx(0.0369, abs=0.012)

    def test_split_matches_two_qubit_transpose(self, sym_ensemble):
        for i in range(10):
            rho = sample_state(sym_ensemble, i)
            direct = ppt_min_eig_two_qubit(embed_symmetric_two_qubit(rho))
            assert ppt_min_eig_symmetric(rho, 2, 1) == pytest.approx(direct, abs=1e-12)

    def test_split_matches_full_embedding_three_qubits(self):
        ens = SeededEnsemble(4, "sym", SpinSize(3))
        v = dicke_isometry(3)
        for i in range(5):
            rho = sample_state(ens, i)
            big = v @ rho @ v.T
            pt = big.reshape(2, 4, 2, 4).transpose(2, 1, 0, 3).reshape(8, 8)
            # nonzero spectrum agrees; the compact form skips structural zeros
            direct = np.linalg.eigvalsh(pt)
            compact = np.linalg.eigvalsh(
                _split_pt(rho, 3, 1))
            assert np.min(direct) == pytest.approx(np.min(compact), abs=1e-12)

    def test_npt_reduces_to_ppt_for_two_qubits(self, sym_ensemble):
        for i in range(30):
            rho = sample_state(sym_ensemble, i)
            sep = ppt_separable_two_qubit(embed_symmetric_two_qubit(rho))
            assert npt_entangled_symmetric(rho, 2) == (not sep)


def _split_pt(rho, n, cut):
    from tmsdetect.paulis import split_isometry

    w = split_isometry(n, cut)
    d1, d2 = cut + 1, n - cut + 1
    big = w @ rho @ w.T
    return big.reshape(d1, d2, d1, d2).transpose(2, 1, 0, 3).reshape(d1 * d2, d1 * d2)


class TestQuantumness:
    def test_classical_mixture_is_classical(self):
        grid = fibonacci_sphere(800)
        mix = np.zeros((3, 3), dtype=complex)
        for idx in (10, 200, 400, 600, 700, 50, 111, 222, 333, 444):
            ket = coherent_dicke_ket(2, grid[idx])
            mix += 0.1 * np.outer(ket, ket.conj())
        q = quantumness(mix, SpinSize(2), 800)
        assert q.converged
        assert q.q_value <= 1e-6
        assert q.weights.min() >= 0
        assert q.weights.sum() == pytest.approx(1.0, abs=1e-8)

    def test_bell_state_regression(self, bell_tensor):
        rho = np.zeros((3, 3))
        rho[1, 1] = 1.0
        q = quantumness(rho, SpinSize(2), 2000)
        assert q.q_value > 0.1
        # frozen baseline from the certified solve at grid 2000
        assert q.q_value == pytest.approx(0.612374, abs=2e-4)

    def test_nested_grid_refinement_non_increasing(self):
        rho = np.zeros((3, 3))
        rho[1, 1] = 1.0
        g1 = fibonacci_sphere(400)
        g2 = np.vstack([g1, fibonacci_sphere(777)])
        qa = quantumness(rho, SpinSize(2), grid=g1)
        qb = quantumness(rho, SpinSize(2), grid=g2)
        assert qb.q_value <= qa.q_value + 1e-9

    def test_batch_matches_single(self, sym_ensemble):
        rhos = [sample_state(sym_ensemble, i) for i in range(5)]
        singles = [quantumness(r, SpinSize(2), 400).q_value for r in rhos]
        batch = [r.q_value for r in quantumness_batch(rhos, SpinSize(2), 400)]
        assert np.allclose(singles, batch, atol=1e-10)

    def test_grid_too_small_rejected(self):
        with pytest.raises(ValueError):
            quantumness(np.eye(3) / 3, SpinSize(2), 10)
