import math
from pathlib import Path

import numpy as np
from django.conf import settings
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from simulator import gsp, lcu, qcore, utils
from simulator.constants import GSP_FIELDS
from simulator.management.commands.gsp import Command as GspCommand


def golden_constants():
    params = utils.load_run_config(GspCommand.schema, Path(settings.GOLDEN_CONFIG_DIR) / 'gsp.conf')
    return {name: params['gsp.' + name] for name in ('c_t', 'c_tau', 'c_sigma', 'c_tau_refined')}


CALIBRATED = golden_constants()
H_TWO_LEVEL = np.diag([0.0, math.pi / 2])


class FilterTests(SimpleTestCase):
    def test_perfect_cosine_filter(self):
        assert_allclose(gsp.cosine_filter(H_TWO_LEVEL, 0.0, 0.0, 1), np.diag([1.0, 0.0]), atol=1e-15)
        assert_allclose(gsp.cosine_filter(H_TWO_LEVEL, 0.0, 0.3, 0), np.eye(2))

    def test_cosine_filter_commutes(self):
        h, _ = gsp.random_instance(6, 0.2, 0.5, utils.substream(1, 0))
        f = gsp.cosine_filter(h, 0.1, 0.05, 7)
        self.assertLess(np.abs(f @ h - h @ f).max(), 1e-10)

    def test_binomial_lcu_matches_filter(self):
        h, _ = gsp.random_instance(4, 0.3, 0.5, utils.substream(2, 0))
        dec = gsp.cosine_lcu(h, 0.1, 0.2, 6)
        self.assertEqual(dec.m, 7)
        self.assertAlmostEqual(dec.one_norm, 1.0)
        self.assertLess(np.abs(lcu.assemble_klcu(dec) - gsp.cosine_filter(h, 0.1, 0.2, 6)).max(), 1e-9)

    def test_gaussian_filter(self):
        h, _ = gsp.random_instance(5, 0.2, 0.5, utils.substream(3, 0))
        assert_allclose(gsp.gaussian_filter(h, 0.1, 0.05, 0.0), np.eye(5), atol=1e-12)
        f = gsp.gaussian_filter(h, 0.1, 0.0, 50.0)
        w = np.linalg.eigvalsh(f)
        self.assertGreaterEqual(w.min(), -1e-12)
        self.assertAlmostEqual(w.max(), 1.0)


class ParameterTests(SimpleTestCase):
    def test_cosine_params(self):
        p0 = 0.5
        epsilon = 1 / (math.e * p0)
        T, tau = gsp.cosine_params(1.0, p0, epsilon)
        self.assertEqual(T, 1)
        self.assertAlmostEqual(tau, 1.0)
        self.assertEqual(gsp.cosine_params(0.5, p0, epsilon)[0], 4)
        with self.assertRaises(ValidationError) as ctx:
            gsp.cosine_params(0.0, p0, epsilon)
        self.assertEqual(ctx.exception.code, 'bad_gap')

    def test_gaussian_params(self):
        sigma2, tau = gsp.gaussian_params(0.5, 0.5, 0.5 / math.e)
        self.assertAlmostEqual(sigma2, 4.0)
        self.assertAlmostEqual(tau, 0.5)
        with self.assertRaises(ValidationError):
            gsp.gaussian_params(0.5, 0.5, 0.5)

    def test_config_errors(self):
        h = np.diag([0.0, 0.5])
        for kwargs, code in [({'H': np.diag([-0.5, 0.5])}, 'bad_spectrum'), ({'p0': 1.0}, 'bad_p0'),
                             ({'epsilon': 0.6}, 'bad_epsilon')]:
            with self.assertRaises(ValidationError) as ctx:
                gsp.GspConfig(**{'H': h, 'p0': 0.5, 'epsilon': 0.1, **kwargs})
            self.assertEqual(ctx.exception.code, code)

    def test_degenerate_ground(self):
        with self.assertRaises(ValidationError) as ctx:
            gsp.ground_state(np.diag([0.2, 0.2, 0.9]))
        self.assertEqual(ctx.exception.code, 'degenerate_ground')


class QualityTests(SimpleTestCase):
    def test_ground_input(self):
        quality = gsp.filter_quality(H_TWO_LEVEL, [1.0, 0.0], gsp.cosine_filter(H_TWO_LEVEL, 0.0, 0.3, 3))
        self.assertAlmostEqual(quality.distance, 0.0)
        self.assertAlmostEqual(quality.survival, math.cos(0.3) ** 3)

    def test_superposition_with_perfect_filter(self):
        psi = np.array([1.0, 1.0]) / math.sqrt(2)
        quality = gsp.filter_quality(H_TWO_LEVEL, psi, gsp.cosine_filter(H_TWO_LEVEL, 0.0, 0.0, 1))
        self.assertAlmostEqual(quality.distance, 0.0)
        self.assertAlmostEqual(quality.survival, 1 / math.sqrt(2))

    def test_identity_keeps_initial_distance(self):
        psi = np.array([math.sqrt(0.8), math.sqrt(0.2)])
        quality = gsp.filter_quality(H_TWO_LEVEL, psi, np.eye(2))
        self.assertAlmostEqual(quality.distance, math.sqrt(2 - 2 * math.sqrt(0.8)))
        self.assertAlmostEqual(quality.survival, 1.0)

    def test_fidelity_grows_with_order(self):
        for seed in range(5):
            h, psi = gsp.random_instance(8, 0.2, 0.3, utils.substream(4, seed))
            lambda0, gap, _ = gsp.ground_state(h)
            _, tau = gsp.cosine_params(gap, 0.3, 1.0)
            distances = [gsp.filter_quality(h, psi, gsp.cosine_filter(h, lambda0, tau, T)).distance
                         for T in range(1, 51)]
            for before, after in zip(distances, distances[1:]):
                self.assertLessEqual(after, before + 1e-12)


class HybridTests(SimpleTestCase):
    def test_sixteen_level_instance(self):
        h, psi = gsp.random_instance(16, 0.2, 0.5, utils.substream(5, 0))
        config = gsp.GspConfig(h, 0.5, 1e-3, **CALIBRATED)
        report = gsp.hybrid_gsp(config, psi)
        gap = config.ground[1]
        log_term = math.log(1 / config.p0)
        self.assertEqual(report.Tprime, math.ceil(config.c_t * log_term ** 2 / gap ** 2))
        self.assertAlmostEqual(report.tau, config.c_tau * gap / log_term)
        self.assertLessEqual(report.stage1_dist, config.p0)
        self.assertLessEqual(report.final_dist, 5 * config.epsilon)
        lambda0 = config.ground[0]
        filt = gsp.cosine_filter(h, lambda0, report.tau, report.Tprime)
        expected = np.vdot(psi, filt @ filt @ psi).real
        self.assertAlmostEqual(report.R, expected, delta=1e-10)
        self.assertLessEqual(report.R, 1.0)

    def test_ground_state_input(self):
        h, _ = gsp.random_instance(6, 0.25, 0.5, utils.substream(6, 0))
        config = gsp.GspConfig(h, 0.5, 1e-2, **CALIBRATED)
        report = gsp.hybrid_gsp(config, config.ground[2])
        self.assertAlmostEqual(report.R, math.cos(report.tau) ** (2 * report.Tprime), delta=1e-10)
        self.assertAlmostEqual(report.stage1_dist, 0.0, delta=1e-7)

    def test_overlap_below_promise(self):
        h, psi = gsp.random_instance(4, 0.2, 0.3, utils.substream(7, 0))
        with self.assertRaises(ValidationError) as ctx:
            gsp.hybrid_gsp(gsp.GspConfig(h, 0.5, 1e-2), psi)
        self.assertEqual(ctx.exception.code, 'overlap_below_p0')

    def test_energy_estimate_robustness(self):
        stable = 0
        for seed in range(20):
            h, psi = gsp.random_instance(16, 0.2, 0.5, utils.substream(8, seed))
            config = gsp.GspConfig(h, 0.5, 0.1)
            baseline = gsp.hybrid_gsp(config, psi)
            for sign in (-1, 1):
                shifted = gsp.GspConfig(h, 0.5, 0.1, energy_error=sign * baseline.tau / 4)
                distance = gsp.hybrid_gsp(shifted, psi).final_dist
                ratio = max(distance / baseline.final_dist, baseline.final_dist / distance)
                stable += ratio <= 2
        self.assertGreaterEqual(stable, 36)

    def test_sweep_rows(self):
        reports = gsp.sweep(4, 0.2, 0.5, [0.1, 0.01], 2, seed=9, constants=CALIBRATED)
        pooled = gsp.sweep(4, 0.2, 0.5, [0.1, 0.01], 2, seed=9, constants=CALIBRATED, workers=2)
        self.assertEqual(len(reports), 4)
        self.assertEqual([r.row() for r in reports], [r.row() for r in pooled])
        self.assertEqual(list(reports[0].row()), GSP_FIELDS)

    def test_instance_overlap_and_gap(self):
        h, psi = gsp.random_instance(10, 0.2, 0.4, utils.substream(10, 0))
        lambda0, gap, ground = gsp.ground_state(h)
        self.assertAlmostEqual(lambda0, 0.1)
        self.assertAlmostEqual(gap, 0.2)
        self.assertAlmostEqual(abs(np.vdot(ground, psi)) ** 2, 0.4)
        self.assertAlmostEqual(np.linalg.norm(psi), 1.0)


class ComplexityTests(SimpleTestCase):
    def test_terms(self):
        report = gsp.complexity_report(0.5, 1.0, 0.01)
        prefactor = 1 / (0.5 * 1e-4)
        self.assertAlmostEqual(report.term1, prefactor * math.log(2) ** 2)
        self.assertAlmostEqual(report.term2, prefactor * math.sqrt(math.log(100) * math.log(50)))
        self.assertEqual(report.total, report.term1 + report.term2)
        self.assertAlmostEqual(report.alpha, math.log(0.01) / math.log(0.5))
        self.assertAlmostEqual(report.limit, prefactor * math.log(100))
        self.assertAlmostEqual(report.evolution_factor, math.sqrt(math.log(100)))

    def test_alpha_one(self):
        report = gsp.complexity_report(0.1, 1.0, 0.01, alpha=1.0)
        self.assertAlmostEqual(report.interpolated, report.limit * math.log(100))

    def test_bad_alpha(self):
        with self.assertRaises(ValidationError) as ctx:
            gsp.complexity_report(0.5, 1.0, 0.01, alpha=0.5)
        self.assertEqual(ctx.exception.code, 'bad_alpha')
