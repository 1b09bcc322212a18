import numpy as np
from django.conf import settings
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase, override_settings
from numpy.testing import assert_allclose
from scipy import sparse

from exchange_lab.core.fock import (
    FockBasisState,
    Hop,
    LadderKind,
    LadderOp,
    RegisterLayout,
)
from exchange_lab.core.oracle import (
    _LadderCache,
    check_cap,
    cross_check,
    dense_apply,
    dense_expm_hermitian,
    dense_hopping_hamiltonian,
    dense_hops,
    dense_ladder,
    dense_string,
    relation_residual,
    worldline_parity,
)
from exchange_lab.core.protocols import CLOCKWISE, STEP_ONE
from exchange_lab.core.verification import random_closed_loop


class TestDenseOperators(SimpleTestCase):
    def test_two_mode_annihilator(self):
        layout = RegisterLayout.fermions(2)
        f2 = dense_ladder(layout, 2, LadderKind.ANNIHILATE)
        # |11⟩ is index 3, |10⟩ index 1, |01⟩ index 2, |00⟩ index 0
        self.assertEqual(f2[1, 3], -1)
        self.assertEqual(f2[0, 2], 1)
        self.assertEqual(np.count_nonzero(f2), 2)

    def test_printed_columns(self):
        layout = RegisterLayout.fermions(4)
        start = FockBasisState.from_ket("|1010⟩").index
        target = FockBasisState.from_ket("|0101⟩").index
        self.assertEqual(dense_string(layout, STEP_ONE)[target, start], 1)
        self.assertEqual(dense_string(layout, CLOCKWISE)[target, start], -1)

    def test_dense_apply_matches_string(self):
        layout = RegisterLayout.fermions(4)
        rng = np.random.default_rng(3)
        vector = rng.normal(size=16) + 1j * rng.normal(size=16)
        assert_allclose(
            dense_apply(layout, CLOCKWISE, vector),
            dense_string(layout, CLOCKWISE) @ vector,
            atol=1e-12,
        )

    def test_relations(self):
        for layout in (
            RegisterLayout.fermions(3),
            RegisterLayout.hardcore_bosons(3),
            RegisterLayout.from_statistics("mixed:-+/+-@010", 3),
        ):
            for i in range(1, 4):
                for j in range(1, 4):
                    for first in (LadderOp.create(i), LadderOp.annihilate(i)):
                        for second in (
                            LadderOp.create(j),
                            LadderOp.annihilate(j),
                        ):
                            self.assertLessEqual(
                                relation_residual(layout, first, second),
                                1e-13,
                            )

    def test_cap(self):
        with self.assertRaises(ValidationError) as ctx:
            check_cap(13)
        self.assertEqual(ctx.exception.code, "oracle_cap_exceeded")
        with override_settings(
            EXCHANGE_LAB={**settings.EXCHANGE_LAB, "ORACLE_MAX_MODES": 14}
        ):
            check_cap(13)

    def test_cache_is_sparse(self):
        """
        Cached ladders keep only their 2**(M-1) nonzero entries
        """
        cache = _LadderCache(RegisterLayout.fermions(10))
        ladder = cache(LadderOp.create(3))
        self.assertTrue(sparse.issparse(ladder))
        self.assertEqual(ladder.nnz, 512)
        self.assertIs(cache(LadderOp.create(3)), ladder)

    def test_dense_hops(self):
        layout = RegisterLayout.fermions(4)
        out = dense_hops(
            layout,
            [Hop(1, 2), Hop(3, 4), Hop(2, 3), Hop(4, 1)],
            FockBasisState.from_ket("|1010⟩"),
        )
        self.assertEqual(out[FockBasisState.from_ket("|1010⟩").index], -1)


class TestPropagator(SimpleTestCase):
    def test_unitary(self):
        layout = RegisterLayout.fermions(4)
        h = dense_hopping_hamiltonian(layout, [(1, 2, 1.0), (2, 3, 0.5)])
        u = dense_expm_hermitian(h, 0.7)
        assert_allclose(u.conj().T @ u, np.eye(16), atol=1e-10)

    def test_rabi_transfer(self):
        layout = RegisterLayout.fermions(2)
        h = dense_hopping_hamiltonian(layout, [(1, 2, 1.0)])
        u = dense_expm_hermitian(h, np.pi / 2)
        # |10⟩ (index 1) fully transfers to |01⟩ (index 2)
        self.assertAlmostEqual(abs(u[2, 1]), 1.0, places=12)

    def test_not_hermitian(self):
        with self.assertRaises(ValidationError) as ctx:
            dense_expm_hermitian(np.array([[0, 1], [0, 0]]))
        self.assertEqual(ctx.exception.code, "not_hermitian")


class TestWorldlines(SimpleTestCase):
    def test_exchange_parity(self):
        start = FockBasisState.from_ket("|1010⟩")
        hops = [Hop(1, 2), Hop(3, 4), Hop(2, 3), Hop(4, 1)]
        self.assertEqual(worldline_parity(start, hops), -1)
        stuck = hops[:2] + hops[:2][::-1]
        self.assertIsNone(worldline_parity(start, stuck))
        back = [Hop(1, 2), Hop(3, 4), Hop(2, 1), Hop(4, 3)]
        self.assertEqual(worldline_parity(start, back), 1)

    def test_random_loops_close(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            start, hops = random_closed_loop(rng, 6)
            self.assertIn(worldline_parity(start, hops), (1, -1))


class TestCrossCheck(SimpleTestCase):
    def test_cross_check(self):
        """
        1050 random strings spread over four to ten modes
        """
        for modes in range(4, 11):
            report = cross_check(modes, 150, seed=modes)
            self.assertTrue(report.passed, report.failures)
            self.assertLessEqual(report.max_deviation, 1e-12)

    def test_large_register(self):
        report = cross_check(10, 200, seed=7)
        self.assertTrue(report.passed)
        self.assertLess(report.seconds, 60)

    def test_fixed_seed(self):
        report = cross_check(4, 1000, seed=7)
        self.assertTrue(report.passed)
        self.assertEqual(report.trials, 1000)

    def test_mixed_layout(self):
        layout = RegisterLayout.from_statistics("mixed:--/--@0101", 4)
        self.assertTrue(cross_check(4, 100, seed=2, layout=layout).passed)

    def test_zero_trials(self):
        report = cross_check(4, 0, seed=1)
        self.assertTrue(report.passed)
        self.assertEqual(report.max_deviation, 0.0)
