"""
Continuous transport by hopping pulses

A pulse on modes (i, j) applies exp(i theta (f†_j f_i + f†_i f_j)). On
the two configurations that differ by moving one particle across (i, j)
this is a two-level rotation, cos(theta) on the diagonal and
i * s * sin(theta) off it, where s is the hop sign; configurations with
both or neither mode occupied are left alone. theta = pi/2 is a full
transfer carrying a dynamical factor i, so two branches with the same
number of full transfers share their dynamical phase.
"""
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Iterable, Iterator, List, Optional, Tuple

import numpy as np
import scipy.linalg as la
from django.core.exceptions import ValidationError

from exchange_lab.core.const import HALF_PI
from exchange_lab.core.fock import (
    FockBasisState,
    Hop,
    RegisterLayout,
    SignLedger,
    StateVector,
    hop_kernel,
    popcount,
    record_sign_classes,
    sector_indices,
)
from exchange_lab.core.protocols import (
    BranchProgram,
    ControlledExperiment,
    EvaluationMode,
    ExperimentResult,
    run_controlled,
)
from exchange_lab.core.utils import lab_setting

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HopPulse:
    """

    Hopping pulse between two modes

    Attributes:
        `source`: First mode, the particle origin for a full transfer
        `target`: Second mode
        `theta`: Rotation angle in radians, pi/2 is a full transfer

    """

    source: int
    target: int
    theta: float

    def __post_init__(self):
        if self.source == self.target:
            raise ValidationError(
                f"Pulse needs two distinct modes, got {self.source}",
                code="invalid_hop",
            )
        if not math.isfinite(self.theta):
            raise ValidationError(
                "Pulse angle must be finite", code="invalid_hop"
            )

    @property
    def is_full_transfer(self) -> bool:
        return math.isclose(abs(math.sin(self.theta)), 1.0)

    def as_dict(self) -> Dict[str, Any]:
        return {"from": self.source, "to": self.target, "theta": self.theta}

    def __str__(self) -> str:
        return f"pulse {self.source}↔{self.target} θ={self.theta:.12g}"


@dataclass(frozen=True)
class Schedule:
    pulses: Tuple[HopPulse, ...] = ()

    @classmethod
    def of(cls, *pulses: Tuple[int, int, float]) -> "Schedule":
        return cls(tuple(HopPulse(*pulse) for pulse in pulses))

    @property
    def full_transfers(self) -> int:
        return sum(1 for pulse in self.pulses if pulse.is_full_transfer)

    def then(self, other: "Schedule") -> "Schedule":
        return Schedule(self.pulses + other.pulses)

    def as_list(self) -> List[Dict[str, Any]]:
        return [pulse.as_dict() for pulse in self.pulses]

    def __iter__(self) -> Iterator[HopPulse]:
        return iter(self.pulses)

    def __len__(self) -> int:
        return len(self.pulses)


@dataclass(frozen=True)
class HamiltonianSpec:
    """
    Hopping Hamiltonian, sum over edges of -J (f†_j f_i + f†_i f_j)
    """

    edges: Tuple[Tuple[int, int, float], ...]

    def __post_init__(self):
        for i, j, coupling in self.edges:
            if i == j or not math.isfinite(coupling):
                raise ValidationError(
                    f"Invalid edge ({i}, {j}, {coupling})",
                    code="invalid_hop",
                )

    def check(self, layout: RegisterLayout):
        for i, j, _ in self.edges:
            layout.check_mode(i)
            layout.check_mode(j)


def hop_rotation(
    p: HopPulse, psi: StateVector, ledger: Optional[SignLedger] = None
) -> StateVector:
    """
    Applies exp(i theta (f†_j f_i + f†_i f_j)) exactly

    Args:
        p: HopPulse
        psi: StateVector
        ledger: Optional ledger receiving the transfer signs

    Returns: StateVector

    """
    layout = psi.layout
    forward, backward = Hop(p.source, p.target), Hop(p.target, p.source)
    forward.check(layout)
    legal_f, moved_f, counts_f = hop_kernel(psi.indices, forward, layout)
    legal_b, moved_b, counts_b = hop_kernel(psi.indices, backward, layout)
    movable = legal_f | legal_b
    cos, sin = math.cos(p.theta), math.sin(p.theta)

    stay = psi.amplitudes * np.where(movable, cos, 1.0)
    counts = np.concatenate([counts_f[legal_f], counts_b[legal_b]])
    signs = 1 - 2 * (counts & 1)
    moved = np.concatenate([moved_f[legal_f], moved_b[legal_b]])
    carried = (
        np.concatenate([psi.amplitudes[legal_f], psi.amplitudes[legal_b]])
        * 1j
        * sin
        * signs
    )
    if ledger is not None:
        record_sign_classes(
            ledger,
            ledger.next_step(),
            str(p),
            counts,
            source=p.source,
            target=p.target,
        )
    return StateVector.from_terms(
        layout,
        np.concatenate([psi.indices, moved]),
        np.concatenate([stay, carried]),
    )


def apply_schedule(
    schedule: Iterable[HopPulse], psi: StateVector
) -> Tuple[StateVector, SignLedger]:
    ledger = SignLedger()
    for pulse in schedule:
        psi = hop_rotation(pulse, psi, ledger)
    return psi, ledger


@dataclass
class PulseProgram(BranchProgram):
    """
    Branch made of hopping pulses; pulses have no literal form, so both
    evaluation modes run the rotations
    """

    label: str
    schedule: Schedule

    def evaluate(
        self, psi: StateVector, mode: EvaluationMode
    ) -> Tuple[StateVector, SignLedger]:
        return apply_schedule(self.schedule, psi)


def half_swap_schedules(theta: float = HALF_PI) -> Tuple[Schedule, Schedule]:
    """Forward and backward pulsed half swaps on four modes"""
    forward = Schedule.of((1, 2, theta), (3, 4, theta))
    backward = Schedule.of((1, 4, theta), (3, 2, theta))
    return forward, backward


def pulse_interference(
    schedule0: Schedule,
    schedule1: Schedule,
    initial: FockBasisState,
    layout: Optional[RegisterLayout] = None,
) -> ControlledExperiment:
    layout = layout or RegisterLayout.fermions(initial.modes)
    if schedule0.full_transfers != schedule1.full_transfers:
        logger.info(
            "pulse schedules differ in full transfers (%d vs %d); "
            "dynamical factors do not cancel",
            schedule0.full_transfers,
            schedule1.full_transfers,
        )
    return ControlledExperiment(
        name="pulse",
        layout=layout,
        initial=initial,
        branch0=PulseProgram("forward", schedule0),
        branch1=PulseProgram("backward", schedule1),
        params={
            "schedule0": schedule0.as_list(),
            "schedule1": schedule1.as_list(),
        },
    )


def run_pulse_interference(
    schedule0: Schedule,
    schedule1: Schedule,
    initial: FockBasisState,
    layout: Optional[RegisterLayout] = None,
) -> ExperimentResult:
    """
    Controlled interference of two pulse schedules

    Args:
        schedule0: Pulses of branch 0
        schedule1: Pulses of branch 1
        initial: Shared initial configuration
        layout: Register, one fermionic species by default

    Returns: ExperimentResult

    """
    return run_controlled(
        pulse_interference(schedule0, schedule1, initial, layout)
    )


def sector_hamiltonian(
    h: HamiltonianSpec, layout: RegisterLayout, basis: np.ndarray
) -> np.ndarray:
    """
    Dense hopping Hamiltonian restricted to a sorted sector basis
    """
    dimension = basis.size
    matrix = np.zeros((dimension, dimension), dtype=np.complex128)
    columns = np.arange(dimension)
    for i, j, coupling in h.edges:
        for hop in (Hop(i, j), Hop(j, i)):
            legal, moved, counts = hop_kernel(basis, hop, layout)
            rows = np.searchsorted(basis, moved[legal])
            signs = 1 - 2 * (counts[legal] & 1)
            np.add.at(matrix, (rows, columns[legal]), -coupling * signs)
    return matrix


def exact_evolve(
    h: HamiltonianSpec, t: float, psi: StateVector
) -> StateVector:
    """
    exp(-i H t) psi through the Hermitian eigendecomposition, one
    particle-number sector at a time

    Args:
        h: HamiltonianSpec
        t: Time
        psi: StateVector

    Returns: StateVector

    Raises:
        ValidationError: a sector is larger than SECTOR_MAX_DIMENSION

    """
    layout = psi.layout
    h.check(layout)
    limit = lab_setting("SECTOR_MAX_DIMENSION")
    numbers = popcount(psi.indices)
    indices, amplitudes = [], []
    sectors = [int(k) for k in np.unique(numbers)]
    for k in sectors:
        dimension = math.comb(layout.modes, k)
        if dimension > limit:
            raise ValidationError(
                f"Sector of {k} particles in {layout.modes} modes has "
                f"dimension {dimension} > {limit}",
                code="sector_too_large",
            )
    for k in sectors:
        basis = sector_indices(layout.modes, k)
        vector = np.zeros(basis.size, dtype=np.complex128)
        selected = numbers == k
        vector[np.searchsorted(basis, psi.indices[selected])] = (
            psi.amplitudes[selected]
        )
        eigenvalues, eigenvectors = la.eigh(
            sector_hamiltonian(h, layout, basis)
        )
        evolved = eigenvectors @ (
            np.exp(-1j * eigenvalues * t) * (eigenvectors.conj().T @ vector)
        )
        indices.append(basis)
        amplitudes.append(evolved)
    if not indices:
        return psi
    return StateVector.from_terms(
        layout, np.concatenate(indices), np.concatenate(amplitudes)
    )


def trotter_evolve(
    h: HamiltonianSpec, t: float, steps: int, order: int, psi: StateVector
) -> StateVector:
    """
    Product-formula evolution built from exact edge rotations

    Order 1 applies every edge once per step; order 2 is the symmetric
    Strang splitting, half angles outside and the last edge in the middle.

    Args:
        h: HamiltonianSpec
        t: Time
        steps: Number of time slices, at least 1
        order: 1 or 2
        psi: StateVector

    Returns: StateVector

    """
    if steps < 1:
        raise ValidationError(
            f"Trotter needs at least one step, got {steps}",
            code="invalid_steps",
        )
    if order not in (1, 2):
        raise ValidationError(
            f"Trotter order must be 1 or 2, got {order}",
            code="invalid_steps",
        )
    h.check(psi.layout)
    if not h.edges:
        return psi
    dt = t / steps
    if order == 1:
        sweep = [HopPulse(i, j, coupling * dt) for i, j, coupling in h.edges]
    else:
        *outer, last = h.edges
        half = [HopPulse(i, j, coupling * dt / 2) for i, j, coupling in outer]
        sweep = (
            half
            + [HopPulse(last[0], last[1], last[2] * dt)]
            + list(reversed(half))
        )
    for _ in range(steps):
        for pulse in sweep:
            psi = hop_rotation(pulse, psi)
    return psi
