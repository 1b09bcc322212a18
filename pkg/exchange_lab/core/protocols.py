"""
Ancilla-controlled interference experiments

A control qubit prepared in (|0> + |1>)/sqrt(2) selects one of two
branch programs acting on the same register state. Because the initial
state is a product, the controlled evolution is exactly the pair of
branch vectors; the ancilla fringe is read from their overlap.
"""
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from django.core.exceptions import ValidationError

from exchange_lab.core.fock import (
    FockBasisState,
    Hop,
    OperatorString,
    RegisterLayout,
    SignLedger,
    StateVector,
    apply_hop_sequence,
    apply_operator_string,
    inner_product,
)
from exchange_lab.core.utils import lab_setting, wrap_phase

logger = logging.getLogger(__name__)

# Printed four-mode products, mode 1 leftmost in the kets
STEP_ONE = OperatorString.parse("f†_4 f_3 f†_2 f_1")
STEP_TWO = OperatorString.parse("f_4 f†_3 f_2 f†_1")
COUNTERCLOCKWISE = OperatorString.parse("f†_4 f_3 f†_2 f_1")
CLOCKWISE = OperatorString.parse("f†_2 f_3 f†_4 f_1")

FULL_SWAP_HOPS = (Hop(1, 2), Hop(3, 4), Hop(2, 3), Hop(4, 1))
HALF_SWAP_FORWARD_HOPS = (Hop(1, 2), Hop(3, 4))
HALF_SWAP_BACKWARD_HOPS = (Hop(1, 4), Hop(3, 2))

SWAP_INITIAL = "|1010⟩"


class EvaluationMode(str, Enum):
    SEQUENTIAL = "sequential"
    LITERAL = "literal"


class BranchProgram(ABC):
    """
    One arm of a controlled experiment
    """

    label: str

    @abstractmethod
    def evaluate(
        self, psi: StateVector, mode: EvaluationMode
    ) -> Tuple[StateVector, SignLedger]:
        """
        Runs the program on the shared initial state
        Args:
            psi: Initial register state
            mode: Literal or sequential evaluation

        Returns: (final state, sign ledger)

        """


@dataclass
class HopProgram(BranchProgram):
    """

    Branch made of hops, with an optional printed operator product

    Attributes:
        `label`: Branch name, Example: "forward"
        `hops`: Sequential transport, first hop first
        `string`: Literal product used in literal mode; the product of the
                  hops when missing

    """

    label: str
    hops: Tuple[Hop, ...] = ()
    string: Optional[OperatorString] = None

    def literal(self) -> OperatorString:
        if self.string is not None:
            return self.string
        return OperatorString.from_hops(self.hops)

    def evaluate(
        self, psi: StateVector, mode: EvaluationMode
    ) -> Tuple[StateVector, SignLedger]:
        if mode == EvaluationMode.LITERAL:
            ledger = SignLedger()
            return apply_operator_string(self.literal(), psi, ledger), ledger
        return apply_hop_sequence(self.hops, psi)


@dataclass
class ControlledExperiment:
    """

    Two branch programs run from one register state under a control qubit

    Attributes:
        `name`: Experiment name, Example: "half-swap"
        `layout`: Register
        `initial`: Shared initial configuration
        `branch0`: Program run when the control is |0>
        `branch1`: Program run when the control is |1>
        `mode`: Literal or sequential evaluation
        `params`: Parameters echoed in the result

    """

    name: str
    layout: RegisterLayout
    initial: FockBasisState
    branch0: BranchProgram
    branch1: BranchProgram
    mode: EvaluationMode = EvaluationMode.SEQUENTIAL
    params: Dict[str, Any] = field(default_factory=dict)


@dataclass
class ExperimentResult:
    """

    Outcome of a controlled experiment

    Attributes:
        `phase`: arg<psi0|psi1> in (-pi, pi], None below the visibility floor
        `visibility`: |<psi0|psi1>|
        `branch_final`: Final configuration of each branch, as text
        `ledgers`: Sign ledger of each branch
        `probabilities`: Exact ancilla probabilities per basis
        `valid`: False when a branch ends in the zero vector

    """

    experiment: str
    params: Dict[str, Any]
    phase: Optional[float]
    visibility: float
    overlap: complex
    branch_labels: List[str]
    branch_final: List[str]
    ledgers: List[SignLedger]
    valid: bool = True
    seed: Optional[int] = None
    counts: Optional[Dict[str, Dict[str, int]]] = None
    version: str = field(
        default_factory=lambda: lab_setting("RESULT_SCHEMA_VERSION")
    )

    @property
    def probabilities(self) -> Dict[str, Dict[str, float]]:
        if not self.valid:
            return {}
        return {
            basis: ancilla_measure(self, basis) for basis in ("X", "Y")
        }

    @property
    def phase_rad(self) -> Optional[float]:
        return self.phase

    @property
    def ledger_relative_sign(self) -> int:
        return self.ledgers[0].product * self.ledgers[1].product


def extract_phase(
    psi0: StateVector, psi1: StateVector
) -> Tuple[Optional[float], float]:
    """
    Relative phase and visibility of two branch states

    Args:
        psi0: Branch 0 state
        psi1: Branch 1 state, same register

    Returns: (phase or None, visibility)

    """
    phase, visibility, _ = _overlap_phase(psi0, psi1)
    return phase, visibility


def _overlap_phase(
    psi0: StateVector, psi1: StateVector
) -> Tuple[Optional[float], float, complex]:
    overlap = inner_product(psi0.normalized(), psi1.normalized())
    visibility = abs(overlap)
    if visibility <= lab_setting("VISIBILITY_FLOOR"):
        return None, visibility, overlap
    return wrap_phase(math.atan2(overlap.imag, overlap.real)), visibility, overlap


def _render(psi: StateVector) -> str:
    if psi.is_zero:
        return "0"
    if psi.indices.size == 1:
        return psi.kets()[0]
    return str(psi)


def run_controlled(e: ControlledExperiment) -> ExperimentResult:
    """
    Evaluates both branches and reads out the control-qubit fringe

    Args:
        e: ControlledExperiment

    Returns: ExperimentResult, flagged invalid if a branch vanishes

    """
    initial = StateVector.basis(e.layout, e.initial)
    finals, ledgers = [], []
    for branch in (e.branch0, e.branch1):
        final, ledger = branch.evaluate(initial, e.mode)
        finals.append(final)
        ledgers.append(ledger)
    params = {
        "initial": e.initial.ket,
        "mode": EvaluationMode(e.mode).value,
        "modes": e.layout.modes,
        "statistics": e.layout.describe(),
        **e.params,
    }
    result = ExperimentResult(
        experiment=e.name,
        params=params,
        phase=None,
        visibility=0.0,
        overlap=0j,
        branch_labels=[e.branch0.label, e.branch1.label],
        branch_final=[_render(final) for final in finals],
        ledgers=ledgers,
    )
    if any(final.is_zero for final in finals):
        logger.warning("%s: a branch ended in the zero vector", e.name)
        result.valid = False
        return result
    result.phase, result.visibility, result.overlap = _overlap_phase(*finals)
    logger.info(
        "%s: phase %s visibility %.12g",
        e.name,
        result.phase,
        result.visibility,
    )
    return result


def _check_modes(layout: RegisterLayout, modes: int, name: str):
    if layout.modes != modes:
        raise ValidationError(
            f"{name} needs a {modes}-mode register, got {layout.modes}",
            code="layout_mismatch",
        )


def full_controlled_swap(
    layout: RegisterLayout,
    mode: EvaluationMode = EvaluationMode.SEQUENTIAL,
) -> ControlledExperiment:
    _check_modes(layout, 4, "full-swap")
    return ControlledExperiment(
        name="full-swap",
        layout=layout,
        initial=FockBasisState.from_ket(SWAP_INITIAL),
        branch0=HopProgram("identity", (), OperatorString()),
        branch1=HopProgram("swap", FULL_SWAP_HOPS, STEP_ONE.then(STEP_TWO)),
        mode=mode,
    )


def experiment_full_controlled_swap(
    layout: RegisterLayout,
    mode: EvaluationMode = EvaluationMode.SEQUENTIAL,
) -> ExperimentResult:
    """
    Controlled full swap of two particles on four sites

    Branch 0 leaves |1010⟩ alone; branch 1 moves both particles clockwise
    twice. Literal mode uses the printed step one / step two products.
    """
    return run_controlled(full_controlled_swap(layout, mode))


def half_swap_interference(
    layout: RegisterLayout,
    mode: EvaluationMode = EvaluationMode.SEQUENTIAL,
) -> ControlledExperiment:
    _check_modes(layout, 4, "half-swap")
    return ControlledExperiment(
        name="half-swap",
        layout=layout,
        initial=FockBasisState.from_ket(SWAP_INITIAL),
        branch0=HopProgram(
            "forward", HALF_SWAP_FORWARD_HOPS, COUNTERCLOCKWISE
        ),
        branch1=HopProgram("backward", HALF_SWAP_BACKWARD_HOPS, CLOCKWISE),
        mode=mode,
    )


def experiment_half_swap_interference(
    layout: RegisterLayout,
    mode: EvaluationMode = EvaluationMode.SEQUENTIAL,
) -> ExperimentResult:
    """
    Half swaps in opposite directions, both ending at |0101⟩
    """
    return run_controlled(half_swap_interference(layout, mode))


@dataclass(frozen=True)
class RingConfig:
    """

    n particles on 2n modes arranged in a circle, odd modes occupied

    Attributes:
        `n`: Particle count
        `turns`: "step" moves every particle one site; "revolution"
                 repeats single-site steps until every particle has gone
                 once around the circle

    """

    n: int
    turns: str = "step"

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError(
                f"Ring needs at least one particle, got {self.n}",
                code="invalid_ring",
            )
        if self.turns not in ("step", "revolution"):
            raise ValidationError(
                f"Unknown ring schedule {self.turns!r}", code="invalid_ring"
            )

    @property
    def modes(self) -> int:
        return 2 * self.n

    @property
    def initial(self) -> FockBasisState:
        return FockBasisState.from_modes(range(1, self.modes, 2), self.modes)

    @property
    def step_count(self) -> int:
        return 1 if self.turns == "step" else self.modes


def ring_step(
    occupied: Sequence[int], modes: int, direction: int
) -> List[Hop]:
    """
    Moves every particle one site around the ring

    Args:
        occupied: Occupied 1-based modes
        modes: Ring size
        direction: +1 for increasing index, -1 for decreasing

    Returns: List[Hop], ordered by ascending source mode, the hop that
             leaves 1..modes and comes back on the other side flagged `wrap`

    """
    hops = []
    for source in sorted(occupied):
        step = source + direction
        target = (step - 1) % modes + 1
        hops.append(Hop(source, target, wrap=not 1 <= step <= modes))
    return hops


def ring_schedule(cfg: RingConfig, direction: int) -> Tuple[Hop, ...]:
    occupied = cfg.initial.occupied
    hops: List[Hop] = []
    for _ in range(cfg.step_count):
        step = ring_step(occupied, cfg.modes, direction)
        hops.extend(step)
        occupied = [hop.target for hop in step]
    return tuple(hops)


def ring_rotation(
    cfg: RingConfig,
    layout: Optional[RegisterLayout] = None,
    mode: EvaluationMode = EvaluationMode.SEQUENTIAL,
) -> ControlledExperiment:
    layout = layout or RegisterLayout.fermions(cfg.modes)
    _check_modes(layout, cfg.modes, "ring")
    return ControlledExperiment(
        name="ring",
        layout=layout,
        initial=cfg.initial,
        branch0=HopProgram("forward", ring_schedule(cfg, +1)),
        branch1=HopProgram("backward", ring_schedule(cfg, -1)),
        mode=mode,
        params={"n": cfg.n, "turns": cfg.turns},
    )


def experiment_ring_rotation(
    cfg: RingConfig,
    layout: Optional[RegisterLayout] = None,
    mode: EvaluationMode = EvaluationMode.SEQUENTIAL,
) -> ExperimentResult:
    """
    Every particle steps one site forward in branch 0 and one site
    backward in branch 1; the backward step starts with the hop across
    the mode 1 / mode 2n edge.
    """
    return run_controlled(ring_rotation(cfg, layout, mode))


def ancilla_measure(
    r: ExperimentResult,
    basis: str,
    shots: Optional[int] = None,
    seed: Optional[int] = None,
) -> Dict[str, float]:
    """
    Control-qubit read-out in the X or Y basis

    Without shots the exact probabilities are returned; with shots, a
    binomial sample drawn from a generator seeded with `seed`.

    Args:
        r: Valid ExperimentResult
        basis: "X" or "Y"
        shots: Optional number of repetitions
        seed: Required together with shots

    Returns: {"+": ..., "-": ...}, probabilities or counts

    """
    if not r.valid:
        raise ValidationError(
            "Cannot measure an invalid experiment", code="invalid_result"
        )
    if basis not in ("X", "Y"):
        raise ValidationError(
            f"Unknown basis {basis!r}", code="invalid_basis"
        )
    if shots is not None and seed is None:
        raise ValidationError(
            "Sampling needs a seed", code="shots_without_seed"
        )
    component = r.overlap.real if basis == "X" else r.overlap.imag
    plus = min(max((1 + component) / 2, 0.0), 1.0)
    if shots is None:
        return {"+": plus, "-": 1.0 - plus}
    if shots < 0:
        raise ValidationError(
            "Shots must be non-negative", code="invalid_shots"
        )
    rng = np.random.default_rng(seed)
    hits = int(rng.binomial(shots, plus))
    return {"+": hits, "-": shots - hits}


def sample_counts(
    r: ExperimentResult, shots: int, seed: int
) -> Dict[str, Dict[str, int]]:
    """Counts in both bases, one seeded generator stream per basis"""
    return {
        basis: ancilla_measure(r, basis, shots, seed + offset)
        for offset, basis in enumerate(("X", "Y"))
    }
