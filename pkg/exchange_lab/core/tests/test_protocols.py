import math

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from exchange_lab.core.fock import (
    FockBasisState,
    Hop,
    RegisterLayout,
    StateVector,
)
from exchange_lab.core.oracle import dense_hops, random_dense_state
from exchange_lab.core.protocols import (
    FULL_SWAP_HOPS,
    ControlledExperiment,
    EvaluationMode,
    HopProgram,
    RingConfig,
    ancilla_measure,
    experiment_full_controlled_swap,
    experiment_half_swap_interference,
    experiment_ring_rotation,
    extract_phase,
    ring_schedule,
    ring_step,
    run_controlled,
    sample_counts,
)
from exchange_lab.core.utils import wrap_phase

FERMIONS = RegisterLayout.fermions(4)
BOSONS = RegisterLayout.hardcore_bosons(4)


class TestSwaps(SimpleTestCase):
    def test_full_swap(self):
        result = experiment_full_controlled_swap(FERMIONS)
        self.assertTrue(result.valid)
        self.assertAlmostEqual(result.phase, math.pi, delta=1e-10)
        self.assertAlmostEqual(result.visibility, 1.0, delta=1e-12)
        self.assertEqual(result.branch_labels, ["identity", "swap"])
        self.assertEqual(result.ledger_relative_sign, -1)

    def test_full_swap_literal(self):
        """
        The printed step products compose to +|1010⟩
        """
        result = experiment_full_controlled_swap(
            FERMIONS, EvaluationMode.LITERAL
        )
        self.assertEqual(result.phase, 0.0)
        self.assertEqual(result.params["mode"], "literal")
        self.assertEqual(len(result.ledgers[1]), 8)

    def test_half_swap(self):
        result = experiment_half_swap_interference(FERMIONS)
        self.assertAlmostEqual(result.phase, math.pi, delta=1e-10)
        self.assertAlmostEqual(result.visibility, 1.0, delta=1e-12)
        self.assertEqual(result.branch_final, ["|0101⟩", "|0101⟩"])
        backward = result.ledgers[1]
        self.assertEqual([e.op for e in backward], ["hop 1→4", "hop 3→2"])
        self.assertEqual([e.sign for e in backward], [-1, 1])
        self.assertTrue(all(e.sign == 1 for e in result.ledgers[0]))

    def test_half_swap_literal(self):
        result = experiment_half_swap_interference(
            FERMIONS, EvaluationMode.LITERAL
        )
        self.assertAlmostEqual(result.phase, math.pi, delta=1e-10)

    def test_bosons(self):
        for result in (
            experiment_full_controlled_swap(BOSONS),
            experiment_half_swap_interference(BOSONS),
        ):
            self.assertEqual(result.phase, 0.0)
            self.assertEqual(result.params["statistics"], "boson")

    def test_mixed_species(self):
        mixed = RegisterLayout.from_statistics("mixed:--/--", 4)
        result = experiment_full_controlled_swap(mixed)
        self.assertAlmostEqual(result.phase, math.pi, delta=1e-10)

    def test_mixed_commuting_species(self):
        """
        Interleaved species commuting with each other: adjacent hops move a
        particle past differently ordered strings and the full swap still
        ends at pi, matching the dense oracle
        """
        commuting = RegisterLayout.from_statistics("mixed:-+/+-@0101", 4)
        result = experiment_full_controlled_swap(commuting)
        self.assertAlmostEqual(result.phase, math.pi, delta=1e-10)
        dense = dense_hops(
            commuting, FULL_SWAP_HOPS, FockBasisState.from_ket("|1010⟩")
        )
        self.assertEqual(dense[FockBasisState.from_ket("|1010⟩").index], -1)

    def test_wrong_register(self):
        with self.assertRaises(ValidationError) as ctx:
            experiment_half_swap_interference(RegisterLayout.fermions(6))
        self.assertEqual(ctx.exception.code, "layout_mismatch")


class TestRing(SimpleTestCase):
    def test_ring_law(self):
        for n in range(1, 6):
            result = experiment_ring_rotation(RingConfig(n))
            expected = math.pi * ((n - 1) % 2)
            self.assertAlmostEqual(result.phase, expected, delta=1e-10)
            self.assertAlmostEqual(result.visibility, 1.0, delta=1e-12)

    def test_wrap_hop(self):
        """
        The backward step opens with the hop across the ring edge, which
        passes every other particle
        """
        result = experiment_ring_rotation(RingConfig(4))
        wrap = [e for e in result.ledgers[1] if e.wrap]
        self.assertEqual(len(wrap), 1)
        self.assertEqual(wrap[0].op, "hop 1→8")
        self.assertEqual((wrap[0].interval_parity, wrap[0].sign), (3, -1))
        result = experiment_ring_rotation(RingConfig(3))
        wrap = [e for e in result.ledgers[1] if e.wrap]
        self.assertEqual((wrap[0].interval_parity, wrap[0].sign), (2, 1))

    def test_single_particle_wrap(self):
        """
        With one particle both branches hop 1→2; only the backward one
        goes around the ring edge
        """
        result = experiment_ring_rotation(RingConfig(1))
        self.assertEqual(
            [(e.op, e.wrap) for e in result.ledgers[0]], [("hop 1→2", False)]
        )
        self.assertEqual(
            [(e.op, e.wrap) for e in result.ledgers[1]], [("hop 1→2", True)]
        )

    def test_no_wrap_off_ring(self):
        for result in (
            experiment_full_controlled_swap(FERMIONS),
            experiment_half_swap_interference(FERMIONS),
        ):
            for ledger in result.ledgers:
                self.assertFalse(any(e.wrap for e in ledger))

    def test_ring_step(self):
        backward = ring_step([1, 3], 4, -1)
        self.assertEqual(backward, [Hop(1, 4), Hop(3, 2)])
        self.assertEqual([hop.wrap for hop in backward], [True, False])
        forward = ring_step([2, 4], 4, +1)
        self.assertEqual(forward, [Hop(2, 3), Hop(4, 1)])
        self.assertEqual([hop.wrap for hop in forward], [False, True])

    def test_revolution(self):
        cfg = RingConfig(2, "revolution")
        self.assertEqual(cfg.step_count, 4)
        self.assertEqual(len(ring_schedule(cfg, +1)), 8)
        for n in (2, 3):
            result = experiment_ring_rotation(RingConfig(n, "revolution"))
            self.assertTrue(result.valid)
            self.assertAlmostEqual(result.phase, 0.0, delta=1e-10)

    def test_ring_bosons(self):
        for n in range(1, 5):
            cfg = RingConfig(n)
            layout = RegisterLayout.hardcore_bosons(cfg.modes)
            self.assertEqual(experiment_ring_rotation(cfg, layout).phase, 0.0)

    def test_invalid_ring(self):
        for args in ((0,), (2, "spiral")):
            with self.assertRaises(ValidationError) as ctx:
                RingConfig(*args)
            self.assertEqual(ctx.exception.code, "invalid_ring")


class TestReadout(SimpleTestCase):
    def test_extract_phase(self):
        psi = StateVector.basis(FERMIONS, "|1010⟩")
        phase, visibility = extract_phase(psi, psi.scaled(1j))
        self.assertAlmostEqual(phase, math.pi / 2)
        self.assertAlmostEqual(visibility, 1.0)
        phase, visibility = extract_phase(
            psi, StateVector.basis(FERMIONS, "|0101⟩")
        )
        self.assertIsNone(phase)
        self.assertEqual(visibility, 0.0)

    def test_extract_global_phase(self):
        """
        A global factor e^{i alpha} reads back as alpha wrapped to (-pi, pi]
        """
        rng = np.random.default_rng(13)
        for _ in range(100):
            psi = StateVector.from_dense(
                FERMIONS, random_dense_state(rng, FERMIONS.dimension)
            )
            alpha = float(rng.uniform(-3 * math.pi, 3 * math.pi))
            phase, visibility = extract_phase(
                psi, psi.scaled(complex(np.exp(1j * alpha)))
            )
            self.assertTrue(-math.pi < phase <= math.pi)
            self.assertAlmostEqual(
                math.remainder(phase - wrap_phase(alpha), 2 * math.pi),
                0.0,
                delta=1e-10,
            )
            self.assertAlmostEqual(visibility, 1.0, delta=1e-12)

    def test_probabilities(self):
        result = experiment_half_swap_interference(FERMIONS)
        self.assertAlmostEqual(result.probabilities["X"]["+"], 0.0)
        self.assertAlmostEqual(result.probabilities["X"]["-"], 1.0)
        self.assertAlmostEqual(result.probabilities["Y"]["+"], 0.5)

    def test_sampling(self):
        result = experiment_half_swap_interference(FERMIONS)
        counts = sample_counts(result, 1000, seed=5)
        self.assertEqual(counts["X"], {"+": 0, "-": 1000})
        self.assertEqual(sum(counts["Y"].values()), 1000)
        self.assertEqual(counts, sample_counts(result, 1000, seed=5))

    def test_sampling_errors(self):
        result = experiment_half_swap_interference(FERMIONS)
        cases = (
            (("X", 10, None), "shots_without_seed"),
            (("Z",), "invalid_basis"),
            (("X", -1, 3), "invalid_shots"),
        )
        for args, code in cases:
            with self.assertRaises(ValidationError) as ctx:
                ancilla_measure(result, *args)
            self.assertEqual(ctx.exception.code, code)

    def test_vanishing_branch(self):
        experiment = ControlledExperiment(
            name="custom",
            layout=FERMIONS,
            initial=FockBasisState.from_ket("|1010⟩"),
            branch0=HopProgram("identity"),
            branch1=HopProgram("empty source", (Hop(2, 3),)),
        )
        result = run_controlled(experiment)
        self.assertFalse(result.valid)
        self.assertIsNone(result.phase)
        self.assertEqual(result.branch_final[1], "0")
        with self.assertRaises(ValidationError) as ctx:
            ancilla_measure(result, "X")
        self.assertEqual(ctx.exception.code, "invalid_result")

    def test_orthogonal_branches(self):
        experiment = ControlledExperiment(
            name="custom",
            layout=FERMIONS,
            initial=FockBasisState.from_ket("|1010⟩"),
            branch0=HopProgram("identity"),
            branch1=HopProgram("one hop", (Hop(1, 2),)),
        )
        result = run_controlled(experiment)
        self.assertTrue(result.valid)
        self.assertIsNone(result.phase)
        self.assertEqual(result.visibility, 0.0)
