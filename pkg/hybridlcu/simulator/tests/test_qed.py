import math

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from simulator import hybrid, qcore, qed, utils
from simulator.qed import PAULI_MATRICES, PauliString


def noisy_codeword(seed, p_z, r):
    psi = qed.random_codeword(utils.substream(seed, 0))
    return qed.apply_biased_noise(np.outer(psi, np.conj(psi)), qed.NoiseModel(p_z, r))


class PauliTests(SimpleTestCase):
    def test_products(self):
        product = PauliString('X') * PauliString('Y')
        self.assertEqual(product, PauliString('Z', 1))
        assert_allclose(product.matrix(), PAULI_MATRICES['X'] @ PAULI_MATRICES['Y'])
        self.assertEqual(PauliString('XZ') * PauliString('XZ'), PauliString('II'))

    def test_commutation(self):
        self.assertTrue(PauliString('XX').commutes_with(PauliString('ZZ')))
        self.assertFalse(PauliString('XI').commutes_with(PauliString('ZI')))

    def test_sign(self):
        self.assertEqual(PauliString('Z', 2).sign, -1)
        with self.assertRaises(ValidationError) as ctx:
            PauliString('Z', 1).sign
        self.assertEqual(ctx.exception.code, 'not_hermitian')

    def test_bad_strings(self):
        for make in (lambda: PauliString('XA'), lambda: PauliString(''),
                     lambda: PauliString.from_support('X', [8])):
            with self.assertRaises(ValidationError) as ctx:
                make()
            self.assertEqual(ctx.exception.code, 'bad_pauli')

    def test_support(self):
        s = PauliString.from_support('X', [1, 2, 3, 4])
        self.assertEqual(s.labels, 'XXXXIII')
        self.assertEqual(s.weight, 4)

    def test_noncommuting_generators(self):
        with self.assertRaises(ValidationError) as ctx:
            qed.stabilizer_group([PauliString('XI'), PauliString('ZI')], n=2)
        self.assertEqual(ctx.exception.code, 'noncommuting')


class SteaneTests(SimpleTestCase):
    def test_projector_ranks(self):
        projectors = qed.steane_projectors()
        self.assertAlmostEqual(np.trace(projectors.p_x.matrix).real, 16)
        self.assertAlmostEqual(np.trace(projectors.p_z.matrix).real, 16)
        self.assertAlmostEqual(np.trace(projectors.p_c).real, 2)
        assert_allclose(projectors.p_x.matrix @ projectors.p_x.matrix, projectors.p_x.matrix, atol=1e-12)
        assert_allclose(projectors.p_x.matrix @ projectors.p_z.matrix,
                        projectors.p_z.matrix @ projectors.p_x.matrix, atol=1e-12)

    def test_group_sizes(self):
        self.assertEqual(len(qed.steane_projectors().p_x.elements), 8)
        self.assertEqual(qed.steane_projectors().p_x.elements[0], PauliString.identity())

    def test_codespace(self):
        basis = qed.codespace_basis()
        self.assertEqual(basis.shape, (128, 2))
        assert_allclose(qcore.dagger(basis) @ basis, np.eye(2), atol=1e-12)
        metrics = qed.qed_metrics(np.outer(basis[:, 0], np.conj(basis[:, 0])))
        self.assertAlmostEqual(metrics.P, 1.0)
        self.assertAlmostEqual(metrics.R, 1.0)


class NoiseTests(SimpleTestCase):
    def test_single_qubit_flips(self):
        zero = np.diag([1.0, 0.0])
        assert_allclose(qed.apply_biased_noise(zero, qed.NoiseModel(0.2, 0.5)), np.diag([0.9, 0.1]), atol=1e-15)
        plus = np.full((2, 2), 0.5)
        dephased = qed.apply_biased_noise(plus, qed.NoiseModel(0.1, 0.0))
        self.assertAlmostEqual(dephased[0, 1].real, 0.4)

    def test_probability_range(self):
        with self.assertRaises(ValidationError) as ctx:
            qed.NoiseModel(0.5, 3.0)
        self.assertEqual(ctx.exception.code, 'bad_probability')

    def test_qubit_register_required(self):
        with self.assertRaises(ValidationError) as ctx:
            qed.apply_biased_noise(np.eye(3) / 3, qed.NoiseModel(0.1, 1.0))
        self.assertEqual(ctx.exception.code, 'dimension_mismatch')

    def test_trace_preserved(self):
        self.assertAlmostEqual(np.trace(noisy_codeword(1, 0.05, 0.3)).real, 1.0)


class MetricTests(SimpleTestCase):
    def test_noiseless(self):
        metrics = qed.qed_metrics(noisy_codeword(2, 0.0, 0.3))
        self.assertAlmostEqual(metrics.P, 1.0)
        self.assertAlmostEqual(metrics.R, 1.0)

    def test_reduction_factor_ignores_x_noise(self):
        values = [qed.qed_metrics(noisy_codeword(3, 0.05, r)).R for r in (0.0, 0.1, 0.2, 0.3)]
        for value in values[1:]:
            self.assertAlmostEqual(value, values[0], delta=1e-12)

    def test_gap_is_nonnegative(self):
        for p_z in (1e-3, 1e-2, 1e-1):
            metrics = qed.qed_metrics(noisy_codeword(4, p_z, 0.2))
            self.assertGreaterEqual(metrics.R_minus_P, -1e-12)
            self.assertLess(metrics.P, 1.0)


class ChannelTests(SimpleTestCase):
    def test_hybrid_channel_reproduces_metrics(self):
        rho = noisy_codeword(5, 0.05, 0.2)
        channel = qed.hybrid_qed_channel()
        self.assertEqual(channel.G, 8)
        self.assertEqual(channel.decomposition.m, 64)
        metrics = qed.detection_metrics(channel, rho)
        expected = qed.qed_metrics(rho)
        self.assertAlmostEqual(metrics.P, expected.P, delta=1e-10)
        self.assertAlmostEqual(metrics.R, expected.R, delta=1e-10)

    def test_coherent_only_variant(self):
        rho = noisy_codeword(6, 0.05, 0.2)
        metrics = qed.detection_metrics(qed.hybrid_qed_channel(virtual_generators=[]), rho)
        p_x = np.trace(qed.steane_projectors().p_x.matrix @ rho).real
        self.assertAlmostEqual(metrics.P, p_x, delta=1e-10)
        self.assertAlmostEqual(metrics.R, p_x, delta=1e-10)

    def test_rounds(self):
        rho = noisy_codeword(7, 0.05, 0.2)
        rounds = hybrid.compose_rounds(qed.qed_round_channels(), rho)
        self.assertAlmostEqual(rounds.factors[0], qed.qed_metrics(rho).R, delta=1e-10)
        self.assertAlmostEqual(rounds.factors[1], 1.0, delta=1e-10)


class SweepTests(SimpleTestCase):
    def test_sweep_criteria(self):
        r_values = [0.1, 0.2, 0.3]
        pz_values = qed.pz_grid(1e-3, 1e-1, 10, include_zero=True)
        rows = qed.fig_sweep(r_values, pz_values, seed=31)
        self.assertEqual(len(rows), 33)
        by_r = {r: [row for row in rows if row['r'] == r] for r in r_values}
        for r, series in by_r.items():
            self.assertAlmostEqual(series[0]['P'], 1.0)
            self.assertAlmostEqual(series[0]['R'], 1.0)
            for row in series:
                self.assertGreaterEqual(row['R_minus_P'], -1e-12)
                self.assertEqual(row['codewords'], 32)
                self.assertEqual(row['seed'], 31)
            for before, after in zip(series, series[1:]):
                self.assertLess(after['P'], before['P'])
        for i in range(len(pz_values)):
            reference = by_r[0.1][i]['R']
            for r in r_values[1:]:
                self.assertAlmostEqual(by_r[r][i]['R'], reference, delta=1e-12)

    def test_grid(self):
        grid = qed.pz_grid(1e-3, 1e-1, 3)
        assert_allclose(grid, [1e-3, 1e-2, 1e-1])
        self.assertEqual(qed.pz_grid(points=2, include_zero=True)[0], 0.0)
        self.assertTrue(math.isclose(qed.NoiseModel(0.1, 0.3).p_x, 0.03))

    def test_bad_codeword_count(self):
        with self.assertRaises(ValidationError) as ctx:
            qed.fig_sweep([0.1], [0.01], seed=1, codewords=0)
        self.assertEqual(ctx.exception.code, 'bad_codewords')
