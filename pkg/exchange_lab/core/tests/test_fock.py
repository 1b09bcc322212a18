import math

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from exchange_lab.core.fock import (
    FockBasisState,
    Hop,
    LadderOp,
    OperatorString,
    RegisterLayout,
    SignLedger,
    StateVector,
    apply_hop,
    apply_hop_sequence,
    apply_ladder,
    apply_operator_string,
    enumerate_sector,
    inner_product,
    jw_sign,
    sector_indices,
)
from exchange_lab.core.oracle import dense_hops, random_dense_state
from exchange_lab.core.protocols import (
    CLOCKWISE,
    COUNTERCLOCKWISE,
    FULL_SWAP_HOPS,
    STEP_ONE,
    STEP_TWO,
)
from exchange_lab.core.utils import (
    check_if_valid_ket,
    parse_statistics_spec,
    render_ket,
    wrap_phase,
)


class TestKets(SimpleTestCase):
    def test_ket_forms(self):
        """
        Bare and bracketed kets parse to the same state, mode 1 on bit 0
        """
        bracketed = FockBasisState.from_ket("|1010⟩")
        bare = FockBasisState.from_ket("1010")
        self.assertEqual(bracketed, bare)
        self.assertEqual(bare.index, 0b0101)
        self.assertEqual(bare.occupied, [1, 3])
        self.assertEqual(bare.ket, "|1010⟩")
        self.assertEqual(render_ket(0b1010, 4), "|0101⟩")

    def test_invalid_ket(self):
        self.assertFalse(check_if_valid_ket("|10a0⟩"))
        self.assertFalse(check_if_valid_ket(""))
        with self.assertRaises(ValidationError) as ctx:
            FockBasisState.from_ket("|12⟩")
        self.assertEqual(ctx.exception.code, "invalid_ket")

    def test_statistics_spec(self):
        species, matrix = parse_statistics_spec("mixed:--/--@0011", 4)
        self.assertEqual(species, (0, 0, 1, 1))
        self.assertEqual(matrix, ((-1, -1), (-1, -1)))
        species, _ = parse_statistics_spec("mixed:-+/+-", 4)
        self.assertEqual(species, (0, 0, 1, 1))

    def test_statistics_spec_fail(self):
        for text in ("mixed:-+/--", "mixed:--/-", "mixed:--/--@012", "anyon"):
            with self.assertRaises(ValidationError):
                RegisterLayout.from_statistics(text, 3)

    def test_wrap_phase(self):
        self.assertEqual(wrap_phase(-math.pi), math.pi)
        self.assertAlmostEqual(wrap_phase(3 * math.pi), math.pi)
        self.assertEqual(math.copysign(1.0, wrap_phase(-0.0)), 1.0)


class TestLayout(SimpleTestCase):
    def test_mode_cap(self):
        with self.assertRaises(ValidationError) as ctx:
            RegisterLayout.fermions(29)
        self.assertEqual(ctx.exception.code, "modes_cap_exceeded")

    def test_describe_round_trip(self):
        for text in ("fermion", "boson", "mixed:--/--@0011"):
            layout = RegisterLayout.from_statistics(text, 4)
            self.assertEqual(
                RegisterLayout.from_statistics(layout.describe(), 4), layout
            )

    def test_jw_sign(self):
        layout = RegisterLayout.fermions(4)
        self.assertEqual(jw_sign("|1010⟩", 4, layout), 1)
        self.assertEqual(jw_sign("|1010⟩", 2, layout), -1)
        self.assertEqual(jw_sign("|1010⟩", 1, layout), 1)
        bosons = RegisterLayout.hardcore_bosons(4)
        self.assertEqual(jw_sign("|1110⟩", 4, bosons), 1)


class TestLadderOperators(SimpleTestCase):
    def setUp(self):
        self.layout = RegisterLayout.fermions(4)
        self.swap_start = StateVector.basis(self.layout, "|1010⟩")

    def test_two_mode_signs(self):
        layout = RegisterLayout.fermions(2)
        f2 = LadderOp.annihilate(2)
        out = apply_ladder(f2, StateVector.basis(layout, "|11⟩"))
        self.assertEqual(out.amplitude("|10⟩"), -1)
        out = apply_ladder(f2, StateVector.basis(layout, "|01⟩"))
        self.assertEqual(out.amplitude("|00⟩"), 1)

    def test_pauli_exclusion(self):
        out = apply_ladder(LadderOp.create(1), self.swap_start)
        self.assertTrue(out.is_zero)
        self.assertEqual(out.norm, 0.0)
        out = apply_ladder(LadderOp.annihilate(2), self.swap_start)
        self.assertTrue(out.is_zero)

    def test_mode_out_of_range(self):
        with self.assertRaises(ValidationError) as ctx:
            apply_ladder(LadderOp.create(5), self.swap_start)
        self.assertEqual(ctx.exception.code, "mode_out_of_range")

    def test_printed_products(self):
        """
        Step one and the counterclockwise half swap give +|0101⟩, the
        clockwise half swap gives -|0101⟩
        """
        for string, expected in (
            (STEP_ONE, 1),
            (COUNTERCLOCKWISE, 1),
            (CLOCKWISE, -1),
        ):
            out = apply_operator_string(string, self.swap_start)
            self.assertEqual(out.kets(), ["|0101⟩"])
            self.assertEqual(out.amplitude("|0101⟩"), expected)

    def test_step_two_literal(self):
        out = apply_operator_string(
            STEP_TWO, StateVector.basis(self.layout, "|0101⟩")
        )
        self.assertEqual(out.kets(), ["|1010⟩"])
        self.assertEqual(out.amplitude("|1010⟩"), 1)

    def test_bosons_carry_no_sign(self):
        bosons = RegisterLayout.hardcore_bosons(4)
        out = apply_operator_string(
            CLOCKWISE, StateVector.basis(bosons, "|1010⟩")
        )
        self.assertEqual(out.amplitude("|0101⟩"), 1)

    def test_operator_string_parse(self):
        s = OperatorString.parse("f^_4 f_3 f+_2 f_1")
        self.assertEqual(s, STEP_ONE)
        self.assertEqual(str(s), "f†_4 f_3 f†_2 f_1")
        self.assertEqual(len(s), 4)
        with self.assertRaises(ValidationError):
            OperatorString.parse("g_1")

    def test_literal_ledger(self):
        ledger = SignLedger()
        apply_operator_string(CLOCKWISE, self.swap_start, ledger)
        self.assertEqual(len(ledger), 4)
        self.assertEqual(ledger.product, -1)

    def test_linearity(self):
        psi = StateVector.from_terms(
            self.layout, [0b0101, 0b0011], [1 / math.sqrt(2), 1j / math.sqrt(2)]
        )
        out = apply_ladder(LadderOp.annihilate(1), psi)
        self.assertAlmostEqual(out.amplitude("|0010⟩"), 1 / math.sqrt(2))
        self.assertAlmostEqual(out.amplitude("|0100⟩"), 1j / math.sqrt(2))


class TestHops(SimpleTestCase):
    def setUp(self):
        self.layout = RegisterLayout.fermions(4)
        self.swap_start = StateVector.basis(self.layout, "|1010⟩")

    def test_adjacent_hop(self):
        ledger = SignLedger()
        out = apply_hop(Hop(1, 2), self.swap_start, ledger)
        self.assertEqual(out.amplitude("|0110⟩"), 1)
        self.assertEqual(ledger.entries[0].sign, 1)
        self.assertEqual(ledger.entries[0].interval_parity, 0)

    def test_long_hop(self):
        """
        Hop 1→4 passes the particle on mode 3
        """
        ledger = SignLedger()
        out = apply_hop(Hop(1, 4), self.swap_start, ledger)
        self.assertEqual(out.amplitude("|0011⟩"), -1)
        entry = ledger.entries[0]
        self.assertEqual(
            (entry.sign, entry.interval_parity, entry.wrap), (-1, 1, False)
        )
        self.assertEqual((entry.source, entry.target), (1, 4))
        self.assertEqual(entry.op, "hop 1→4")

    def test_illegal_hop(self):
        out = apply_hop(Hop(1, 3), self.swap_start)
        self.assertTrue(out.is_zero)
        with self.assertRaises(ValidationError) as ctx:
            Hop(2, 2)
        self.assertEqual(ctx.exception.code, "invalid_hop")

    def test_full_swap_sequence(self):
        out, ledger = apply_hop_sequence(FULL_SWAP_HOPS, self.swap_start)
        self.assertEqual(out.amplitude("|1010⟩"), -1)
        self.assertEqual(ledger.product, -1)
        self.assertEqual([e.sign for e in ledger], [1, 1, 1, -1])

    def test_out_and_back(self):
        hops = [Hop(1, 2), Hop(3, 4), Hop(2, 1), Hop(4, 3)]
        out, ledger = apply_hop_sequence(hops, self.swap_start)
        self.assertEqual(out.amplitude("|1010⟩"), 1)
        self.assertEqual(ledger.product, 1)

    def test_adjacent_hops_neutral(self):
        """
        Neighbouring hops carry no sign on uniform statistics
        """
        rng = np.random.default_rng(17)
        for text in ("fermion", "boson", "mixed:--/--@000111"):
            layout = RegisterLayout.from_statistics(text, 6)
            psi = StateVector.from_dense(
                layout, random_dense_state(rng, layout.dimension)
            )
            for k in range(1, 6):
                for hop in (Hop(k, k + 1), Hop(k + 1, k)):
                    ledger = SignLedger()
                    apply_hop(hop, psi, ledger)
                    self.assertEqual(
                        [(e.sign, e.interval_parity) for e in ledger],
                        [(1, 0)],
                    )

    def test_adjacent_hop_mixed_species(self):
        """
        Species commuting with each other: an adjacent hop picks up the
        occupied modes whose strings differ between source and target
        """
        cases = (
            ("mixed:-+/+-@0101", Hop(3, 4), "|0110⟩", "|0101⟩"),
            ("mixed:-+/+-@0011", Hop(2, 3), "|1100⟩", "|1010⟩"),
        )
        for text, hop, ket, target in cases:
            layout = RegisterLayout.from_statistics(text, 4)
            start = FockBasisState.from_ket(ket)
            ledger = SignLedger()
            out = apply_hop(hop, StateVector.basis(layout, start), ledger)
            entry = ledger.entries[0]
            self.assertEqual((entry.sign, entry.interval_parity), (-1, 1))
            self.assertEqual(out.amplitude(target), -1)
            dense = dense_hops(layout, [hop], start)
            self.assertEqual(
                dense[FockBasisState.from_ket(target).index], -1
            )

    def test_hop_matches_string(self):
        """
        A hop equals the literal product f†_target f_source
        """
        rng = np.random.default_rng(7)
        vector = rng.normal(size=16) + 1j * rng.normal(size=16)
        psi = StateVector.from_dense(self.layout, vector)
        for hop in (Hop(1, 4), Hop(4, 2), Hop(3, 1)):
            by_hop = apply_hop(hop, psi)
            by_string = apply_operator_string(
                OperatorString.from_hops([hop]), psi
            )
            self.assertLessEqual(by_hop.max_deviation(by_string), 1e-12)


class TestStateVector(SimpleTestCase):
    def setUp(self):
        self.layout = RegisterLayout.fermions(4)

    def test_pruning_and_merge(self):
        psi = StateVector.from_terms(
            self.layout, [3, 3, 5], [0.5, 0.5, 1e-16]
        )
        self.assertEqual(psi.indices.tolist(), [3])
        self.assertEqual(psi.amplitude(3), 1)

    def test_non_finite(self):
        with self.assertRaises(ValidationError) as ctx:
            StateVector.from_terms(self.layout, [1], [float("nan")])
        self.assertEqual(ctx.exception.code, "non_finite")

    def test_inner_product(self):
        a = StateVector.basis(self.layout, "|1010⟩")
        b = StateVector.basis(self.layout, "|0101⟩")
        self.assertEqual(inner_product(a, b), 0)
        self.assertEqual(inner_product(a, a.scaled(1j)), 1j)
        with self.assertRaises(ValidationError) as ctx:
            inner_product(a, StateVector.basis(RegisterLayout.fermions(2), 1))
        self.assertEqual(ctx.exception.code, "layout_mismatch")

    def test_sectors(self):
        self.assertEqual(len(sector_indices(4, 2)), 6)
        self.assertEqual(
            [s.ket for s in enumerate_sector(3, 1)],
            ["|100⟩", "|010⟩", "|001⟩"],
        )
        with self.assertRaises(ValidationError) as ctx:
            sector_indices(4, 5)
        self.assertEqual(ctx.exception.code, "sector_out_of_range")
