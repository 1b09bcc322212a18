"""
Invariant suite run by the `verify` command

Every check compares a fast-path computation with an independent
reference (the dense oracle, the world-line tracker or a closed form)
and reports the largest deviation it saw.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Tuple

import numpy as np

from exchange_lab.core.dynamics import (
    HamiltonianSpec,
    HopPulse,
    Schedule,
    exact_evolve,
    half_swap_schedules,
    hop_rotation,
    run_pulse_interference,
    trotter_evolve,
)
from exchange_lab.core.fock import (
    FockBasisState,
    Hop,
    LadderOp,
    RegisterLayout,
    StateVector,
    apply_hop_sequence,
    apply_ladder,
    apply_operator_string,
    hop_kernel,
)
from exchange_lab.core.oracle import (
    _LadderCache,
    cross_check,
    dense_apply,
    dense_hops,
    random_dense_state,
    relation_residual,
    worldline_parity,
)
from exchange_lab.core.protocols import (
    CLOCKWISE,
    COUNTERCLOCKWISE,
    FULL_SWAP_HOPS,
    STEP_ONE,
    STEP_TWO,
    SWAP_INITIAL,
    RingConfig,
    experiment_full_controlled_swap,
    experiment_half_swap_interference,
    experiment_ring_rotation,
    extract_phase,
    ring_rotation,
)
from exchange_lab.core.utils import lab_setting, wrap_phase

logger = logging.getLogger(__name__)

PHASE_TOLERANCE = 1e-10
# Dense checks that multiply full matrices stay small
RELATION_MAX_MODES = 6
HOP_LAW_MAX_MODES = 10
RING_MAX_N = 5
ANTICOMMUTATION_STATES = 100
PHASE_SAMPLES = 100
NORM_TOLERANCE = 1e-10
# Three edges on six modes, two of them long-range
TROTTER_INSTANCE = HamiltonianSpec(((1, 2, 1.0), (2, 4, 0.8), (4, 6, 0.6)))
TROTTER_STEPS = (8, 16, 32, 64)
SLOPE_TOLERANCE = 0.3


@dataclass
class CheckResult:
    name: str
    passed: bool
    deviation: float = 0.0
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"{status} {self.name}: max deviation {self.deviation:.3e}"
        return f"{text} ({self.detail})" if self.detail else text


@dataclass
class VerificationReport:
    modes: int
    trials: int
    seed: int
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def lines(self) -> List[str]:
        header = (
            f"verify modes={self.modes} trials={self.trials} "
            f"seed={self.seed}: {len(self.checks)} checks"
        )
        footer = "PASS" if self.passed else "FAIL"
        return [header] + [check.line() for check in self.checks] + [footer]


def random_closed_loop(
    rng: np.random.Generator, modes: int
) -> Tuple[FockBasisState, List[Hop]]:
    """
    Random hop sequence that returns the occupation to its start

    Particles wander by random legal hops, then every displaced particle
    is sent straight to a vacated starting mode.
    """
    particles = int(rng.integers(1, modes))
    start = {int(m) + 1 for m in rng.choice(modes, particles, replace=False)}
    current = set(start)
    hops = []
    for _ in range(int(rng.integers(1, 2 * modes + 1))):
        empty = sorted(set(range(1, modes + 1)) - current)
        source = int(rng.choice(sorted(current)))
        target = int(rng.choice(empty))
        hops.append(Hop(source, target))
        current.remove(source)
        current.add(target)
    while current != start:
        source = min(current - start)
        target = min(start - current)
        hops.append(Hop(source, target))
        current.remove(source)
        current.add(target)
    return FockBasisState.from_modes(start, modes), hops


def check_cross(modes: int, trials: int, seed: int) -> CheckResult:
    report = cross_check(modes, trials, seed)
    return CheckResult(
        "oracle-cross-check",
        report.passed,
        report.max_deviation,
        f"{trials} random strings, {report.seconds:.2f}s",
    )


def check_anticommutation(
    modes: int, seed: int, states: int = ANTICOMMUTATION_STATES
) -> CheckResult:
    """
    {f_i, f_j} psi = 0, {f_i, f†_j} psi = delta_ij psi on random states
    """
    layout = RegisterLayout.fermions(modes)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(states):
        psi = StateVector.from_dense(
            layout, random_dense_state(rng, layout.dimension)
        )
        for i in range(1, modes + 1):
            for j in range(1, modes + 1):
                for second in (LadderOp.annihilate(j), LadderOp.create(j)):
                    first = LadderOp.annihilate(i)
                    total = apply_ladder(
                        first, apply_ladder(second, psi)
                    ) + apply_ladder(second, apply_ladder(first, psi))
                    if i == j and second.kind != first.kind:
                        total = total - psi
                    if not total.is_zero:
                        worst = max(
                            worst, float(np.max(np.abs(total.amplitudes)))
                        )
    tolerance = lab_setting("CHECK_TOLERANCE")
    return CheckResult(
        "anticommutation",
        worst <= tolerance,
        worst,
        f"{states} random states, M={modes}",
    )


def check_dense_relations(modes: int) -> CheckResult:
    """Dense ladder matrices obey the statistics of mixed layouts"""
    modes = min(modes, RELATION_MAX_MODES)
    layouts = [
        RegisterLayout.fermions(modes),
        RegisterLayout.hardcore_bosons(modes),
        RegisterLayout.from_statistics("mixed:-+/+-", modes),
    ]
    worst = 0.0
    for layout in layouts:
        for i in range(1, modes + 1):
            for j in range(1, modes + 1):
                for first in (LadderOp.annihilate(i), LadderOp.create(i)):
                    for second in (LadderOp.annihilate(j), LadderOp.create(j)):
                        worst = max(
                            worst, relation_residual(layout, first, second)
                        )
    return CheckResult(
        "dense-relations",
        worst <= 1e-13,
        worst,
        f"fermion, boson and mixed layouts, M={modes}",
    )


def check_hop_sign_law(modes: int) -> CheckResult:
    """
    Every hop on every basis state against the dense hop matrix, and the
    ledger parity against the count of occupied modes strictly between
    """
    modes = min(modes, HOP_LAW_MAX_MODES)
    layout = RegisterLayout.fermions(modes)
    cache = _LadderCache(layout)
    basis = np.arange(layout.dimension, dtype=np.int64)
    worst, parity_errors = 0.0, 0
    for source in range(1, modes + 1):
        for target in range(1, modes + 1):
            if source == target:
                continue
            hop = Hop(source, target)
            dense = (
                cache(LadderOp.create(target))
                @ cache(LadderOp.annihilate(source))
            ).toarray()
            legal, moved, counts = hop_kernel(basis, hop, layout)
            fast = np.zeros_like(dense)
            fast[moved[legal], basis[legal]] = 1 - 2 * (counts[legal] & 1)
            worst = max(worst, float(np.max(np.abs(fast - dense))))
            low, high = min(source, target), max(source, target)
            between = ((1 << (high - 1)) - 1) ^ ((1 << low) - 1)
            expected = np.bitwise_count(basis[legal] & between)
            parity_errors += int(np.count_nonzero(expected != counts[legal]))
    return CheckResult(
        "hop-sign-law",
        worst == 0.0 and parity_errors == 0,
        worst,
        f"all hops, all basis states, M={modes}, "
        f"{parity_errors} interval mismatches",
    )


def check_closed_loops(modes: int, trials: int, seed: int) -> CheckResult:
    modes = max(2, modes)
    layout = RegisterLayout.fermions(modes)
    rng = np.random.default_rng(seed)
    mismatches = 0
    for _ in range(trials):
        start, hops = random_closed_loop(rng, modes)
        final, ledger = apply_hop_sequence(
            hops, StateVector.basis(layout, start)
        )
        sign = final.amplitude(start).real
        if sign != ledger.product or sign != worldline_parity(start, hops):
            mismatches += 1
    return CheckResult(
        "closed-loop-parity",
        mismatches == 0,
        float(mismatches),
        f"{trials} random loops, M={modes}",
    )


def _dense_image(layout, string, ket) -> np.ndarray:
    start = FockBasisState.from_ket(ket)
    vector = np.zeros(layout.dimension, dtype=np.complex128)
    vector[start.index] = 1.0
    return dense_apply(layout, string, vector)


def check_printed_products() -> CheckResult:
    """
    Printed four-mode products, fast path against the dense oracle
    """
    layout = RegisterLayout.fermions(4)
    cases = [
        ("step-one", STEP_ONE, "|1010⟩", "|0101⟩", 1),
        ("counterclockwise", COUNTERCLOCKWISE, "|1010⟩", "|0101⟩", 1),
        ("clockwise", CLOCKWISE, "|1010⟩", "|0101⟩", -1),
    ]
    worst, failed = 0.0, []
    for name, string, ket, target, expected in cases:
        fast = apply_operator_string(string, StateVector.basis(layout, ket))
        dense = _dense_image(layout, string, ket)
        amplitude = fast.amplitude(target)
        worst = max(
            worst,
            abs(amplitude - expected),
            float(np.max(np.abs(fast.to_dense() - dense))),
        )
        if abs(amplitude - expected) > lab_setting("CHECK_TOLERANCE"):
            failed.append(name)
    return CheckResult(
        "printed-products",
        not failed,
        worst,
        "failed: " + ", ".join(failed) if failed else "step one, both half swaps",
    )


def check_step_two() -> CheckResult:
    """
    Step two read literally gives +|1010⟩ although it is printed with a
    minus sign; the sequential clockwise hops give the minus sign. Both
    values are confirmed against the dense oracle and reported.
    """
    layout = RegisterLayout.fermions(4)
    literal = apply_operator_string(
        STEP_TWO, StateVector.basis(layout, "|0101⟩")
    )
    literal_dense = _dense_image(layout, STEP_TWO, "|0101⟩")
    hops = FULL_SWAP_HOPS[2:]
    sequential, _ = apply_hop_sequence(
        hops, StateVector.basis(layout, "|0101⟩")
    )
    sequential_dense = dense_hops(
        layout, hops, FockBasisState.from_ket("|0101⟩")
    )
    literal_value = literal.amplitude("|1010⟩").real
    sequential_value = sequential.amplitude("|1010⟩").real
    worst = max(
        float(np.max(np.abs(literal.to_dense() - literal_dense))),
        float(np.max(np.abs(sequential.to_dense() - sequential_dense))),
    )
    return CheckResult(
        "step-two",
        literal_value == 1.0 and sequential_value == -1.0 and worst == 0.0,
        worst,
        f"literal {literal_value:+.0f}|1010⟩, sequential hops "
        f"{sequential_value:+.0f}|1010⟩, printed -1|1010⟩",
    )


def _phase_error(phase, expected) -> float:
    if phase is None:
        return math.inf
    return abs(math.remainder(phase - expected, 2 * math.pi))


def check_swaps() -> CheckResult:
    layout = RegisterLayout.fermions(4)
    full = experiment_full_controlled_swap(layout)
    half = experiment_half_swap_interference(layout)
    worst = max(
        _phase_error(full.phase, math.pi),
        _phase_error(half.phase, math.pi),
        abs(full.visibility - 1),
        abs(half.visibility - 1),
    )
    return CheckResult(
        "controlled-swaps",
        worst <= PHASE_TOLERANCE,
        worst,
        "full swap and half swap at phase pi",
    )


def check_ring_law() -> CheckResult:
    """Ring phase pi * ((n - 1) mod 2) with both branches dense-confirmed"""
    worst = 0.0
    for n in range(1, RING_MAX_N + 1):
        cfg = RingConfig(n)
        experiment = ring_rotation(cfg)
        result = experiment_ring_rotation(cfg)
        worst = max(worst, _phase_error(result.phase, math.pi * ((n - 1) % 2)))
        initial = StateVector.basis(experiment.layout, cfg.initial)
        for branch in (experiment.branch0, experiment.branch1):
            fast, _ = apply_hop_sequence(branch.hops, initial)
            dense = dense_hops(experiment.layout, branch.hops, cfg.initial)
            worst = max(worst, float(np.max(np.abs(fast.to_dense() - dense))))
    return CheckResult(
        "ring-law",
        worst <= PHASE_TOLERANCE,
        worst,
        f"n = 1..{RING_MAX_N}",
    )


def check_statistics_contrast() -> CheckResult:
    bosons = RegisterLayout.hardcore_bosons(4)
    phases = [
        experiment_full_controlled_swap(bosons).phase,
        experiment_half_swap_interference(bosons).phase,
        run_pulse_interference(
            *half_swap_schedules(),
            FockBasisState.from_ket(SWAP_INITIAL),
            bosons,
        ).phase,
    ]
    for n in range(1, RING_MAX_N + 1):
        cfg = RingConfig(n)
        phases.append(
            experiment_ring_rotation(
                cfg, RegisterLayout.hardcore_bosons(cfg.modes)
            ).phase
        )
    worst = max(_phase_error(phase, 0.0) for phase in phases)
    mixed = experiment_full_controlled_swap(
        RegisterLayout.from_statistics("mixed:--/--", 4)
    )
    worst = max(worst, _phase_error(mixed.phase, math.pi))
    return CheckResult(
        "statistics-contrast",
        worst <= PHASE_TOLERANCE,
        worst,
        "hardcore bosons at 0, anticommuting species at pi",
    )


def check_pulsed_half_swap() -> CheckResult:
    layout = RegisterLayout.fermions(4)
    pulsed = run_pulse_interference(
        *half_swap_schedules(), FockBasisState.from_ket(SWAP_INITIAL), layout
    )
    algebraic = experiment_half_swap_interference(layout)
    worst = max(
        _phase_error(pulsed.phase, algebraic.phase),
        abs(pulsed.visibility - 1),
    )
    return CheckResult(
        "pulsed-half-swap",
        worst <= PHASE_TOLERANCE,
        worst,
        "theta = pi/2 pulses against the algebraic half swap",
    )


def check_phase_extraction(seed: int) -> CheckResult:
    """extract_phase(psi, e^{i alpha} psi) recovers alpha with V = 1"""
    layout = RegisterLayout.fermions(4)
    rng = np.random.default_rng(seed)
    worst, out_of_range = 0.0, 0
    for _ in range(PHASE_SAMPLES):
        psi = StateVector.from_dense(
            layout, random_dense_state(rng, layout.dimension)
        )
        alpha = float(rng.uniform(-3 * math.pi, 3 * math.pi))
        phase, visibility = extract_phase(
            psi, psi.scaled(complex(np.exp(1j * alpha)))
        )
        worst = max(
            worst,
            _phase_error(phase, wrap_phase(alpha)),
            abs(visibility - 1),
        )
        if phase is not None and not -math.pi < phase <= math.pi:
            out_of_range += 1
    return CheckResult(
        "phase-extraction",
        worst <= PHASE_TOLERANCE and out_of_range == 0,
        worst,
        f"{PHASE_SAMPLES} random global phases",
    )


def check_norm_and_conservation(seed: int) -> CheckResult:
    """
    Pulses, exact evolution and both product formulas keep the norm and
    every per-species particle count
    """
    h = HamiltonianSpec(((1, 2, 1.0), (2, 3, 0.4), (4, 6, 0.9)))
    rng = np.random.default_rng(seed)
    worst, violations = 0.0, 0
    for text in ("fermion", "boson", "mixed:--/--@000111"):
        layout = RegisterLayout.from_statistics(text, 6)
        random_state = StateVector.from_dense(
            layout, random_dense_state(rng, layout.dimension)
        )
        for psi in (random_state, StateVector.basis(layout, "|110100⟩")):
            before = psi.species_counts()
            for out in (
                exact_evolve(h, 0.9, psi),
                trotter_evolve(h, 0.9, 7, 1, psi),
                trotter_evolve(h, 0.9, 7, 2, psi),
                hop_rotation(HopPulse(3, 1, 0.6), psi),
            ):
                worst = max(worst, abs(out.norm - 1))
                if out.species_counts() != before:
                    violations += 1
    return CheckResult(
        "norm-and-conservation",
        worst <= NORM_TOLERANCE and violations == 0,
        worst,
        f"fermion, boson and mixed layouts, {violations} count changes",
    )


def check_trotter_order(seed: int) -> CheckResult:
    """
    Log-log error slopes against exact evolution, and the error ratio of
    the symmetric formula on two edges sharing a site
    """
    layout = RegisterLayout.fermions(6)
    rng = np.random.default_rng(seed)
    psi = StateVector.from_dense(
        layout, random_dense_state(rng, layout.dimension)
    )
    exact = exact_evolve(TROTTER_INSTANCE, 1.0, psi)
    steps = np.array(TROTTER_STEPS)
    slopes = []
    for order in (1, 2):
        errors = [
            trotter_evolve(TROTTER_INSTANCE, 1.0, int(n), order, psi)
            .max_deviation(exact)
            for n in steps
        ]
        slopes.append(float(np.polyfit(np.log(steps), np.log(errors), 1)[0]))
    worst = max(abs(slopes[0] + 1), abs(slopes[1] + 2))

    pair = HamiltonianSpec(((1, 2, 1.0), (2, 3, 0.7)))
    small = RegisterLayout.fermions(3)
    phi = StateVector.from_dense(
        small, random_dense_state(rng, small.dimension)
    )
    reference = exact_evolve(pair, 1.0, phi)
    coarse, fine = (
        trotter_evolve(pair, 1.0, n, 2, phi).max_deviation(reference)
        for n in (16, 32)
    )
    ratio = coarse / fine
    return CheckResult(
        "trotter-order",
        worst <= SLOPE_TOLERANCE and 2.5 <= ratio <= 6,
        worst,
        f"slopes {slopes[0]:.2f} and {slopes[1]:.2f} over steps "
        f"{', '.join(str(n) for n in TROTTER_STEPS)}, "
        f"second-order ratio {ratio:.2f}",
    )


def check_equal_transfer_cancellation() -> CheckResult:
    """
    The same out-and-back pulse pair appended to both pulsed half swaps
    leaves the relative phase unchanged
    """
    start = FockBasisState.from_ket(SWAP_INITIAL)
    forward, backward = half_swap_schedules()
    base = run_pulse_interference(forward, backward, start).phase
    worst = 0.0
    for source, target in ((1, 2), (3, 4), (2, 3), (4, 1)):
        pair = Schedule.of(
            (source, target, math.pi / 2), (source, target, math.pi / 2)
        )
        result = run_pulse_interference(
            forward.then(pair), backward.then(pair), start
        )
        worst = max(
            worst,
            _phase_error(result.phase, base),
            abs(result.visibility - 1),
        )
    return CheckResult(
        "equal-transfer-cancellation",
        worst <= PHASE_TOLERANCE,
        worst,
        "four appended out-and-back pulse pairs",
    )


def run_suite(modes: int, trials: int, seed: int) -> VerificationReport:
    """
    Runs the oracle cross-check and every invariant check

    Args:
        modes: Register size for the randomized checks
        trials: Random strings, states and loops per check; 0 runs nothing
        seed: Seed of every random generator

    Returns: VerificationReport

    """
    report = VerificationReport(modes=modes, trials=trials, seed=seed)
    if trials == 0:
        return report
    checks: List[Callable[[], CheckResult]] = [
        lambda: check_cross(modes, trials, seed),
        lambda: check_anticommutation(modes, seed),
        lambda: check_dense_relations(modes),
        lambda: check_hop_sign_law(modes),
        lambda: check_closed_loops(modes, trials, seed),
        check_printed_products,
        check_step_two,
        check_swaps,
        check_ring_law,
        check_statistics_contrast,
        check_pulsed_half_swap,
        lambda: check_phase_extraction(seed),
        lambda: check_norm_and_conservation(seed),
        lambda: check_trotter_order(seed),
        check_equal_transfer_cancellation,
    ]
    for check in checks:
        result = check()
        if not result.passed:
            logger.warning("verification failed: %s", result.line())
        report.checks.append(result)
    logger.info("verification %s", "passed" if report.passed else "failed")
    return report
