import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from simulator import lcu, qcore, utils

X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)
I2 = np.eye(2, dtype=complex)


class NormalizeTests(SimpleTestCase):
    def test_probabilities_and_norm(self):
        dec = lcu.normalize([(1.0, I2), (3.0, X)])
        self.assertEqual(dec.one_norm, 4.0)
        assert_allclose(dec.probs, [0.25, 0.75])

    def test_zero_terms_dropped_with_warning(self):
        with self.assertLogs('simulator.lcu', 'WARNING'):
            dec = lcu.normalize([(0.0, I2), (2.0, X)])
        self.assertEqual(dec.m, 1)

    def test_all_zero_rejected(self):
        with self.assertRaises(ValidationError) as ctx:
            lcu.normalize([(0.0, I2)])
        self.assertEqual(ctx.exception.code, 'degenerate_decomposition')

    def test_complex_coefficient_folds_phase(self):
        term = lcu.UnitaryTerm.from_complex(-2.0, X)
        self.assertEqual(term.coefficient, 2.0)
        assert_allclose(term.unitary, -X)

    def test_negative_coefficient_rejected(self):
        with self.assertRaises(ValidationError) as ctx:
            lcu.UnitaryTerm(-1.0, X)
        self.assertEqual(ctx.exception.code, 'negative_coefficient')

    def test_non_unitary_rejected(self):
        with self.assertRaises(ValidationError) as ctx:
            lcu.UnitaryTerm(1.0, 2 * X)
        self.assertEqual(ctx.exception.code, 'not_unitary')

    def test_mismatched_dimensions(self):
        with self.assertRaises(ValidationError) as ctx:
            lcu.normalize([(1.0, I2), (1.0, np.eye(4))])
        self.assertEqual(ctx.exception.code, 'dimension_mismatch')


class CpMapTests(SimpleTestCase):
    def test_identity_decomposition_keeps_state(self):
        rho = qcore.random_density_matrix(2, utils.substream(1, 0))
        dec = lcu.normalize([(0.3, I2), (0.7, I2)])
        assert_allclose(lcu.apply_cp_map(dec, rho), rho, atol=1e-14)
        self.assertAlmostEqual(lcu.success_probability(dec, rho), 1.0)

    def test_cancellation_gives_zero(self):
        dec = lcu.normalize([(1.0, X), (1.0, -X)])
        rho = qcore.random_density_matrix(2, utils.substream(2, 0))
        assert_allclose(lcu.apply_cp_map(dec, rho), np.zeros((2, 2)), atol=1e-15)
        self.assertEqual(lcu.success_probability(dec, rho), 0.0)

    def test_unnormalized_expectation(self):
        rng = utils.substream(3, 0)
        dec = lcu.random_decomposition(3, 4, rng)
        rho = qcore.random_density_matrix(4, rng)
        o = qcore.random_hermitian(4, rng)
        k = sum(t.coefficient * t.unitary for t in dec.terms)
        expected = np.trace(o @ k @ rho @ qcore.dagger(k)).real
        self.assertAlmostEqual(lcu.expectation_unnormalized(dec, rho, o), expected, places=10)

    def test_pauli_mixture(self):
        # (I + Z)/2 projects onto |0>
        dec = lcu.normalize([(0.5, I2), (0.5, Z)])
        self.assertAlmostEqual(lcu.success_probability(dec, np.array([1.0, 0.0])), 1.0)
        self.assertAlmostEqual(lcu.success_probability(dec, np.array([0.0, 1.0])), 0.0)


class InstanceFileTests(SimpleTestCase):
    def test_dump_and_load(self):
        dec = lcu.random_decomposition(3, 2, utils.substream(4, 0))
        loaded = lcu.load_decomposition(lcu.dump_decomposition(dec))
        assert_allclose(loaded.probs, dec.probs)
        assert_allclose(lcu.assemble_klcu(loaded), lcu.assemble_klcu(dec))

    def test_bad_header(self):
        with self.assertRaises(ValidationError) as ctx:
            lcu.load_decomposition('terms 1\n')
        self.assertEqual(ctx.exception.code, 'bad_format')
