import math
import tempfile
from pathlib import Path

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase
from numpy.testing import assert_allclose, assert_array_equal

from simulator import hybrid, lcu, partition, qcore, utils
from simulator.exceptions import DegenerateRoundError

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)


def random_setup(seed, m=None, dim=None):
    rng = utils.substream(seed, 0)
    m = int(rng.integers(1, 7)) if m is None else m
    dim = int(rng.integers(1, 9)) if dim is None else dim
    dec = lcu.random_decomposition(m, dim, rng)
    rho = qcore.random_density_matrix(dim, rng, rank=int(rng.integers(1, dim + 1)))
    o = qcore.Observable(qcore.random_hermitian(dim, rng))
    parts = partition.enumerate_partitions(m)
    part = parts[int(rng.integers(len(parts)))]
    return dec, rho, o, part


class BlockEncodingTests(SimpleTestCase):
    def test_prepare_first_column(self):
        amplitudes = np.sqrt([0.5, 0.3, 0.2])
        u = hybrid.prepare_unitary(amplitudes, 2)
        self.assertTrue(qcore.is_unitary(u))
        assert_allclose(u[:, 0], np.concatenate([amplitudes, [0.0]]), atol=1e-14)

    def test_prepare_trivial_column(self):
        assert_allclose(hybrid.prepare_unitary([1.0], 1), np.eye(2))

    def test_top_left_block_is_group_operator(self):
        dec, _, _, _ = random_setup(1, m=3, dim=2)
        group = partition.group_operator(dec, (0, 1, 2))
        encoding = hybrid.build_block_encoding(group, dec)
        self.assertEqual(encoding.ancilla_qubits, 2)
        self.assertTrue(qcore.is_unitary(encoding.unitary))
        assert_allclose(encoding.unitary[:2, :2], group.operator, atol=1e-12)

    def test_width_too_small(self):
        dec, _, _, _ = random_setup(2, m=3, dim=2)
        with self.assertRaises(ValidationError) as ctx:
            hybrid.build_block_encoding(partition.group_operator(dec, (0, 1, 2)), dec, width=1)
        self.assertEqual(ctx.exception.code, 'bad_width')

    def test_unknown_backend(self):
        dec, _, _, part = random_setup(3)
        with self.assertRaises(ValidationError) as ctx:
            hybrid.HybridChannel(dec, part, backend='gpu')
        self.assertEqual(ctx.exception.code, 'bad_backend')


class ChannelCorrectnessTests(SimpleTestCase):
    def test_three_backends_agree(self):
        for seed in range(100):
            dec, rho, o, part = random_setup(1000 + seed)
            channel = hybrid.HybridChannel(dec, part, backend='circuit')
            analytic = hybrid.exact_expectation(channel, rho, o, backend='analytic')
            circuit = hybrid.exact_expectation(channel, rho, o)
            exhaustive = hybrid.exhaustive_expectation(channel, rho, o)
            target = np.trace(o.matrix @ lcu.apply_cp_map(dec, rho)).real
            self.assertAlmostEqual(analytic, target, delta=1e-9)
            self.assertAlmostEqual(circuit, analytic, delta=1e-9)
            self.assertAlmostEqual(exhaustive, analytic, delta=1e-9)

    def test_second_moment_matches_reduction_factor(self):
        for seed in range(10):
            dec, rho, o, part = random_setup(2000 + seed)
            channel = hybrid.HybridChannel(dec, part, backend='circuit')
            expected = partition.reduction_factor_obs(dec, part, rho, o)
            self.assertAlmostEqual(hybrid.second_moment(channel, rho, o), expected, delta=1e-9)
            self.assertAlmostEqual(hybrid.exhaustive_second_moment(channel, rho, o), expected, delta=1e-9)

    def test_extremes(self):
        dec, rho, _, _ = random_setup(3000, m=5, dim=4)
        coherent, virtual = hybrid.extreme_channels(dec)
        identity = qcore.Observable.identity(4)
        p = lcu.success_probability(dec, rho)
        self.assertAlmostEqual(hybrid.second_moment(coherent, rho, identity), p, delta=1e-12)
        self.assertAlmostEqual(hybrid.second_moment(virtual, rho, identity), 1.0, delta=1e-12)

    def test_outcome_tables_are_distributions(self):
        dec, rho, o, part = random_setup(3001, m=4, dim=3)
        channel = hybrid.HybridChannel(dec, part, backend='circuit')
        for k in range(channel.G):
            for kprime in range(channel.G):
                table = hybrid.outcome_distribution(channel, rho, o, k, kprime)
                self.assertAlmostEqual(table.probs.sum(), 1.0, delta=1e-10)
                self.assertTrue(np.all(table.values[1] == 0))


class SamplerTests(SimpleTestCase):
    def test_moments_of_many_shots(self):
        dec, rho, o, _ = random_setup(4000, m=4, dim=4)
        part = partition.parse_partition('1,2|3|4')
        channel = hybrid.HybridChannel(dec, part, backend='circuit')
        log = hybrid.run_shots(channel, rho, o, 100000, seed=11)
        n = len(log)
        mean_se = log.g.std() / math.sqrt(n)
        self.assertLessEqual(abs(log.g.mean() - hybrid.exact_expectation(channel, rho, o)), 5 * mean_se)
        squares = log.g ** 2
        square_se = squares.std() / math.sqrt(n)
        self.assertLessEqual(abs(squares.mean() - hybrid.second_moment(channel, rho, o)), 5 * square_se)

    def test_worker_count_does_not_change_shots(self):
        dec, rho, o, part = random_setup(4001, m=3, dim=2)
        channel = hybrid.HybridChannel(dec, part)
        serial = hybrid.run_shots(channel, rho, o, 10000, seed=5, workers=1)
        pooled = hybrid.run_shots(channel, rho, o, 10000, seed=5, workers=4)
        assert_array_equal(serial.g, pooled.g)
        assert_array_equal(serial.k, pooled.k)

    def test_records_vanish_off_the_zero_ancilla(self):
        dec, rho, o, part = random_setup(4002, m=4, dim=2)
        log = hybrid.run_shots(hybrid.HybridChannel(dec, part), rho, o, 2000, seed=6)
        for record in log.records():
            if record.z == 1:
                self.assertEqual(record.g, 0.0)
        with self.assertRaises(ValidationError):
            hybrid.OutcomeRecord(0, 0, 1, 0, 0, 0.5)

    def test_single_shot(self):
        dec, rho, o, part = random_setup(4003, m=2, dim=2)
        record = hybrid.sample_g(hybrid.HybridChannel(dec, part), rho, o, utils.substream(1, 2))
        self.assertLessEqual(abs(record.g), o.norm + 1e-12)

    def test_shot_log_csv(self):
        dec, rho, o, _ = random_setup(4004, m=2, dim=2)
        channel = hybrid.HybridChannel(dec, partition.singletons(2))
        log = hybrid.run_shots(channel, rho, o, 50, seed=7)
        with tempfile.TemporaryDirectory() as tmp:
            path = hybrid.write_shot_log(Path(tmp) / 'shots.csv', log, {'seed': 7})
            lines = path.read_text().splitlines()
        self.assertEqual(lines[0], 'shot,k,kprime,z,b,j,g')
        self.assertEqual(len(lines), 52)
        self.assertEqual(lines[-1], '# seed=7')
        self.assertIn(lines[1].split(',')[1], ('1', '2'))


class RoundTests(SimpleTestCase):
    def test_two_projective_rounds(self):
        projector = lcu.normalize([(0.5, I2), (0.5, Z)])
        channel = hybrid.HybridChannel(projector, partition.coarsest(2))
        rho = qcore.random_density_matrix(2, utils.substream(8, 0))
        rounds = hybrid.compose_rounds([channel, channel], rho)
        self.assertAlmostEqual(rounds.factors[0], rho[0, 0].real)
        self.assertAlmostEqual(rounds.factors[1], 1.0)
        self.assertAlmostEqual(rounds.reduction_factor, rho[0, 0].real)

    def test_virtual_round_keeps_trace(self):
        dec = lcu.normalize([(1.0, X), (1.0, Z)])
        rho = qcore.random_density_matrix(2, utils.substream(9, 0))
        rounds = hybrid.compose_rounds([hybrid.HybridChannel(dec, partition.singletons(2))], rho)
        self.assertAlmostEqual(rounds.reduction_factor, 1.0)

    def test_degenerate_round(self):
        dec = lcu.normalize([(1.0, X), (1.0, -X)])
        channel = hybrid.HybridChannel(dec, partition.coarsest(2))
        with self.assertRaises(DegenerateRoundError):
            hybrid.compose_rounds([channel], np.eye(2) / 2)

    def test_resource_summary(self):
        dec, _, _, _ = random_setup(5000, m=5, dim=2)
        summary = hybrid.resource_summary(hybrid.HybridChannel(dec, partition.parse_partition('1,2,3,4|5')))
        self.assertEqual(summary.ancilla_width, 2)
        self.assertEqual(summary.group_sizes, (4, 1))
        self.assertAlmostEqual(summary.gate_scaling, 8.0)
