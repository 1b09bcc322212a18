import numpy as np
from django.test import SimpleTestCase

from exchange_lab.core import verification
from exchange_lab.core.fock import (
    RegisterLayout,
    StateVector,
    apply_hop_sequence,
)


class TestChecks(SimpleTestCase):
    def test_fixed_checks_pass(self):
        for check in (
            verification.check_printed_products,
            verification.check_step_two,
            verification.check_swaps,
            verification.check_ring_law,
            verification.check_statistics_contrast,
            verification.check_pulsed_half_swap,
            verification.check_equal_transfer_cancellation,
        ):
            result = check()
            self.assertTrue(result.passed, result.line())

    def test_randomized_checks_pass(self):
        for result in (
            verification.check_anticommutation(4, 3),
            verification.check_dense_relations(4),
            verification.check_hop_sign_law(5),
            verification.check_closed_loops(6, 200, 3),
            verification.check_phase_extraction(3),
            verification.check_norm_and_conservation(3),
            verification.check_trotter_order(3),
        ):
            self.assertTrue(result.passed, result.line())

    def test_closed_loops_return(self):
        rng = np.random.default_rng(5)
        layout = RegisterLayout.fermions(5)
        for _ in range(20):
            start, hops = verification.random_closed_loop(rng, 5)
            final, _ = apply_hop_sequence(
                hops, StateVector.basis(layout, start)
            )
            self.assertEqual(final.kets(), [start.ket])

    def test_suite(self):
        report = verification.run_suite(4, 10, 2)
        self.assertTrue(report.passed)
        self.assertEqual(len(report.checks), 15)
        self.assertEqual(report.lines()[-1], "PASS")

    def test_empty_suite(self):
        report = verification.run_suite(8, 0, 1)
        self.assertTrue(report.passed)
        self.assertEqual(report.checks, [])

    def test_failed_line(self):
        line = verification.CheckResult("demo", False, 0.5, "note").line()
        self.assertEqual(line, "FAIL demo: max deviation 5.000e-01 (note)")

    def test_anticommutation_sample(self):
        result = verification.check_anticommutation(3, 1)
        self.assertTrue(result.passed, result.line())
        self.assertEqual(result.detail, "100 random states, M=3")
