"""
Exact Fock-space registers with statistics-aware ladder operators

A register of M modes is a bitstring, mode k living on bit k-1, so a
basis index is sum(n_k * 2**(k-1)). Every mode belongs to one species;
the species statistics matrix decides whether operators on two modes
commute (+1) or anticommute (-1). The sign of a ladder operator on mode
k is the product of the statistics entries between the target species
and every occupied lower mode, which for a single fermionic species is
the familiar Jordan-Wigner parity of modes 1..k-1.

State vectors are sparse: a sorted array of basis indices and a
matching array of complex amplitudes. The kernels below act on the
whole support at once with bitmask arithmetic.
"""
import itertools
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from django.core.exceptions import ValidationError

from exchange_lab.core.const import (
    ANTICOMMUTE,
    BOSON_LABEL,
    COMMUTE,
    FERMION_LABEL,
)
from exchange_lab.core.utils import (
    lab_setting,
    occupations_to_index,
    parse_ket,
    parse_statistics_spec,
    render_ket,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RegisterLayout:
    """

    Mode count, species assignment and species statistics of a register
    The global ordering 1..M of the modes is the sign-convention ordering

    Attributes:
        `modes`: Total mode count M
        `species_of`: species_of[k] is the species id of mode k+1
        `statistics`: Symmetric species matrix, +1 commute, -1 anticommute
        `labels`: Short species labels, Example: ("e-", "e+")

    """

    modes: int
    species_of: Tuple[int, ...]
    statistics: Tuple[Tuple[int, ...], ...]
    labels: Tuple[str, ...] = ()

    def __post_init__(self):
        cap = lab_setting("FAST_PATH_MAX_MODES")
        if not 1 <= self.modes <= cap:
            raise ValidationError(
                f"Register needs 1 to {cap} modes, got {self.modes}",
                code="modes_cap_exceeded",
            )
        if len(self.species_of) != self.modes:
            raise ValidationError(
                "Every mode needs exactly one species",
                code="invalid_statistics",
            )
        size = len(self.statistics)
        for i, row in enumerate(self.statistics):
            if len(row) != size:
                raise ValidationError(
                    "Statistics matrix must be square",
                    code="invalid_statistics",
                )
            for j, entry in enumerate(row):
                if entry not in (COMMUTE, ANTICOMMUTE):
                    raise ValidationError(
                        "Statistics entries must be +1 or -1",
                        code="invalid_statistics",
                    )
                if entry != self.statistics[j][i]:
                    raise ValidationError(
                        "Statistics matrix must be symmetric",
                        code="invalid_statistics",
                    )
        if any(not 0 <= s < size for s in self.species_of):
            raise ValidationError(
                "Mode assigned to an unknown species",
                code="invalid_statistics",
            )
        if not self.labels:
            object.__setattr__(
                self, "labels", tuple(f"s{i}" for i in range(size))
            )

    @classmethod
    def fermions(cls, modes: int) -> "RegisterLayout":
        """Single anticommuting species"""
        return cls(modes, (0,) * modes, ((ANTICOMMUTE,),), (FERMION_LABEL,))

    @classmethod
    def hardcore_bosons(cls, modes: int) -> "RegisterLayout":
        """Single commuting species, occupancy capped at one"""
        return cls(modes, (0,) * modes, ((COMMUTE,),), (BOSON_LABEL,))

    @classmethod
    def from_statistics(cls, text: str, modes: int) -> "RegisterLayout":
        """
        Builds a layout from a statistics spec
        Args:
            text: "fermion", "boson" or "mixed:<matrix>[@<assignment>]"
            modes: Register size M

        Returns: RegisterLayout

        """
        if text == "fermion":
            return cls.fermions(modes)
        if text == "boson":
            return cls.hardcore_bosons(modes)
        species_of, matrix = parse_statistics_spec(text, modes)
        return cls(modes, species_of, matrix)

    def describe(self) -> str:
        """Statistics spec that rebuilds this layout"""
        if len(self.statistics) == 1:
            if self.statistics[0][0] == ANTICOMMUTE:
                return "fermion"
            return "boson"
        matrix = "/".join(
            "".join("-" if entry == ANTICOMMUTE else "+" for entry in row)
            for row in self.statistics
        )
        assignment = "".join(str(s) for s in self.species_of)
        return f"mixed:{matrix}@{assignment}"

    def check_mode(self, mode: int):
        if not 1 <= mode <= self.modes:
            raise ValidationError(
                f"Mode {mode} outside 1..{self.modes}",
                code="mode_out_of_range",
            )

    def species(self, mode: int) -> int:
        return self.species_of[mode - 1]

    def sigma(self, first: int, second: int) -> int:
        """Statistics entry between the species of two modes"""
        return self.statistics[self.species(first)][self.species(second)]

    @cached_property
    def anti_masks(self) -> Tuple[int, ...]:
        # anti_masks[k] holds the lower modes anticommuting with mode k+1
        masks = []
        for mode in range(1, self.modes + 1):
            mask = 0
            for lower in range(1, mode):
                if self.sigma(lower, mode) == ANTICOMMUTE:
                    mask |= 1 << (lower - 1)
            masks.append(mask)
        return tuple(masks)

    def anti_mask(self, mode: int) -> int:
        self.check_mode(mode)
        return self.anti_masks[mode - 1]

    @property
    def dimension(self) -> int:
        return 1 << self.modes


@dataclass(frozen=True)
class FockBasisState:
    """
    Occupation bitstring over the modes of a register

    Attributes:
        `index`: sum(n_k * 2**(k-1))
        `modes`: Register size M

    """

    index: int
    modes: int

    @classmethod
    def from_ket(cls, text: str) -> "FockBasisState":
        occupations = parse_ket(text)
        return cls(occupations_to_index(occupations), len(occupations))

    @classmethod
    def from_modes(cls, occupied: Iterable[int], modes: int):
        """Builds the state with the given 1-based modes occupied"""
        return cls(sum(1 << (mode - 1) for mode in occupied), modes)

    @property
    def occupations(self) -> List[int]:
        return [(self.index >> k) & 1 for k in range(self.modes)]

    @property
    def occupied(self) -> List[int]:
        return [k + 1 for k in range(self.modes) if (self.index >> k) & 1]

    @property
    def particles(self) -> int:
        return self.index.bit_count()

    @property
    def ket(self) -> str:
        return render_ket(self.index, self.modes)

    def __str__(self) -> str:
        return self.ket


class LadderKind(str, Enum):
    CREATE = "create"
    ANNIHILATE = "annihilate"


@dataclass(frozen=True)
class LadderOp:
    kind: LadderKind
    mode: int

    @classmethod
    def create(cls, mode: int) -> "LadderOp":
        return cls(LadderKind.CREATE, mode)

    @classmethod
    def annihilate(cls, mode: int) -> "LadderOp":
        return cls(LadderKind.ANNIHILATE, mode)

    def __str__(self) -> str:
        dagger = "†" if self.kind == LadderKind.CREATE else ""
        return f"f{dagger}_{self.mode}"


ladder_regex = re.compile(r"f(?P<dagger>†|\^|\+)?_(?P<mode>\d+)")


@dataclass(frozen=True)
class OperatorString:
    """
    Ladder operators written left-to-right as in print, applied
    right-to-left. The empty string is the identity.
    """

    ops: Tuple[LadderOp, ...] = ()

    @classmethod
    def parse(cls, text: str) -> "OperatorString":
        """
        Parses a product such as "f†_4 f_3 f†_2 f_1"
        Args:
            text: Operator product, daggers as "†", "^" or "+"

        Returns: OperatorString

        """
        tokens = text.split()
        ops = []
        for token in tokens:
            match = ladder_regex.fullmatch(token)
            if match is None:
                raise ValidationError(
                    f"Invalid ladder operator {token!r}", code="invalid_hop"
                )
            kind = (
                LadderKind.CREATE
                if match.group("dagger")
                else LadderKind.ANNIHILATE
            )
            ops.append(LadderOp(kind, int(match.group("mode"))))
        return cls(tuple(ops))

    @classmethod
    def from_hops(cls, hops: Sequence["Hop"]) -> "OperatorString":
        """The product f†_to f_from of each hop, first hop rightmost"""
        ops = []
        for hop in reversed(hops):
            ops.extend(
                [LadderOp.create(hop.target), LadderOp.annihilate(hop.source)]
            )
        return cls(tuple(ops))

    def then(self, other: "OperatorString") -> "OperatorString":
        """This string followed by `other`, i.e. the product other * self"""
        return OperatorString(other.ops + self.ops)

    def __len__(self) -> int:
        return len(self.ops)

    def __str__(self) -> str:
        return " ".join(str(op) for op in self.ops) or "1"


@dataclass(frozen=True)
class Hop:
    """
    Transfer of one particle, the product f†_target f_source

    `wrap` marks the ring edge joining mode 1 and mode 2n; it is set by
    ring schedules and does not take part in equality.
    """

    source: int
    target: int
    wrap: bool = field(default=False, compare=False)

    def __post_init__(self):
        if self.source == self.target:
            raise ValidationError(
                f"Hop needs two distinct modes, got {self.source}",
                code="invalid_hop",
            )

    def check(self, layout: RegisterLayout):
        layout.check_mode(self.source)
        layout.check_mode(self.target)

    def __str__(self) -> str:
        return f"{self.source}→{self.target}"


@dataclass(frozen=True)
class SignLedgerEntry:
    """

    Sign acquired by one elementary operation

    Attributes:
        `step`: Position of the operation in its program, from 1
        `op`: Operation description, Example: "hop 1→4" or "f†_2"
        `sign`: +1 or -1
        `interval_parity`: Occupied anticommuting modes that produced
                           the sign
        `wrap`: Hop across the mode 1 / mode 2n edge of a ring

    """

    step: int
    op: str
    sign: int
    interval_parity: int
    wrap: bool = False
    source: Optional[int] = None
    target: Optional[int] = None


@dataclass
class SignLedger:
    entries: List[SignLedgerEntry] = field(default_factory=list)
    steps: int = 0

    def next_step(self) -> int:
        self.steps += 1
        return self.steps

    def append(self, entry: SignLedgerEntry):
        self.entries.append(entry)

    @property
    def product(self) -> int:
        sign = 1
        for entry in self.entries:
            sign *= entry.sign
        return sign

    def __iter__(self) -> Iterator[SignLedgerEntry]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


def popcount(values: np.ndarray) -> np.ndarray:
    return np.bitwise_count(values).astype(np.int64)


def parity_sign(counts: np.ndarray) -> np.ndarray:
    return 1 - 2 * (counts & 1)


@dataclass(frozen=True, eq=False)
class StateVector:
    """

    Sparse state over a register

    Attributes:
        `layout`: Register the state lives on
        `indices`: Sorted unique basis indices of the support
        `amplitudes`: Complex amplitude per stored index

    Entries below the prune threshold are never stored, so the zero
    vector is the empty support.

    """

    layout: RegisterLayout
    indices: np.ndarray
    amplitudes: np.ndarray

    @classmethod
    def from_terms(
        cls,
        layout: RegisterLayout,
        indices: Iterable[int],
        amplitudes: Iterable[complex],
    ) -> "StateVector":
        """
        Builds a state from possibly repeated (index, amplitude) terms,
        summing repeats and pruning negligible entries
        """
        indices = np.asarray(_as_sequence(indices), dtype=np.int64)
        amplitudes = np.asarray(
            _as_sequence(amplitudes), dtype=np.complex128
        )
        if not np.all(np.isfinite(amplitudes)):
            raise ValidationError(
                "Amplitudes must be finite", code="non_finite"
            )
        if indices.size and (
            indices.min() < 0 or indices.max() >= layout.dimension
        ):
            raise ValidationError(
                "Basis index outside the register", code="mode_out_of_range"
            )
        unique, inverse = np.unique(indices, return_inverse=True)
        summed = np.zeros(unique.size, dtype=np.complex128)
        np.add.at(summed, inverse, amplitudes)
        keep = np.abs(summed) >= lab_setting("PRUNE_THRESHOLD")
        return cls(layout, unique[keep], summed[keep])

    @classmethod
    def zero(cls, layout: RegisterLayout) -> "StateVector":
        return cls(
            layout,
            np.zeros(0, dtype=np.int64),
            np.zeros(0, dtype=np.complex128),
        )

    @classmethod
    def basis(
        cls,
        layout: RegisterLayout,
        state: Union[FockBasisState, str, int],
        amplitude: complex = 1.0,
    ) -> "StateVector":
        """
        Single basis term
        Args:
            layout: Register
            state: FockBasisState, ket text or basis index
            amplitude: Coefficient of the term

        Returns: StateVector

        """
        index = _index_of(state, layout)
        return cls.from_terms(layout, [index], [amplitude])

    @classmethod
    def from_dense(
        cls, layout: RegisterLayout, vector: np.ndarray
    ) -> "StateVector":
        vector = np.asarray(vector, dtype=np.complex128)
        if vector.shape != (layout.dimension,):
            raise ValidationError(
                "Dense vector does not match the register",
                code="layout_mismatch",
            )
        return cls.from_terms(
            layout, np.arange(layout.dimension, dtype=np.int64), vector
        )

    def to_dense(self) -> np.ndarray:
        vector = np.zeros(self.layout.dimension, dtype=np.complex128)
        vector[self.indices] = self.amplitudes
        return vector

    @cached_property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @property
    def is_zero(self) -> bool:
        return self.indices.size == 0

    def normalized(self) -> "StateVector":
        if self.is_zero:
            return self
        return StateVector(self.layout, self.indices, self.amplitudes / self.norm)

    def scaled(self, factor: complex) -> "StateVector":
        return StateVector.from_terms(
            self.layout, self.indices, self.amplitudes * factor
        )

    def __neg__(self) -> "StateVector":
        return StateVector(self.layout, self.indices, -self.amplitudes)

    def __add__(self, other: "StateVector") -> "StateVector":
        _check_same_layout(self, other)
        return StateVector.from_terms(
            self.layout,
            np.concatenate([self.indices, other.indices]),
            np.concatenate([self.amplitudes, other.amplitudes]),
        )

    def __sub__(self, other: "StateVector") -> "StateVector":
        return self + (-other)

    def amplitude(self, state: Union[FockBasisState, str, int]) -> complex:
        index = _index_of(state, self.layout)
        position = np.searchsorted(self.indices, index)
        if position < self.indices.size and self.indices[position] == index:
            return complex(self.amplitudes[position])
        return 0j

    def kets(self) -> List[str]:
        return [render_ket(int(i), self.layout.modes) for i in self.indices]

    def species_counts(self) -> set:
        """Distinct per-species particle counts over the support"""
        counts = set()
        for index in self.indices:
            per_species = [0] * len(self.layout.statistics)
            for mode in range(1, self.layout.modes + 1):
                if (int(index) >> (mode - 1)) & 1:
                    per_species[self.layout.species(mode)] += 1
            counts.add(tuple(per_species))
        return counts

    def max_deviation(self, other: "StateVector") -> float:
        """Largest amplitude difference, max |self - other|"""
        _check_same_layout(self, other)
        difference = self - other
        if difference.is_zero:
            return 0.0
        return float(np.max(np.abs(difference.amplitudes)))

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        return " + ".join(
            f"({amplitude:.6g}){render_ket(int(index), self.layout.modes)}"
            for index, amplitude in zip(self.indices, self.amplitudes)
        )


def _as_sequence(values):
    return values if isinstance(values, np.ndarray) else list(values)


def _index_of(
    state: Union[FockBasisState, str, int], layout: RegisterLayout
) -> int:
    if isinstance(state, str):
        state = FockBasisState.from_ket(state)
    if isinstance(state, FockBasisState):
        if state.modes != layout.modes:
            raise ValidationError(
                f"{state.ket} does not fit a {layout.modes}-mode register",
                code="layout_mismatch",
            )
        return state.index
    return int(state)


def _check_same_layout(first: StateVector, second: StateVector):
    if first.layout != second.layout:
        raise ValidationError(
            "States live on different registers", code="layout_mismatch"
        )


def jw_sign(
    state: Union[FockBasisState, str, int], mode: int, layout: RegisterLayout
) -> int:
    """
    Sign picked up by a ladder operator on `mode`

    Product of the statistics entries between `mode` and every occupied
    lower mode; (-1)**(occupied modes 1..mode-1) for one fermionic species.

    Args:
        state: Basis state the operator acts on
        mode: 1-based target mode
        layout: Register

    Returns: +1 or -1

    """
    index = _index_of(state, layout)
    return -1 if (index & layout.anti_mask(mode)).bit_count() % 2 else 1


def _ladder_kernel(
    indices: np.ndarray, op: LadderOp, layout: RegisterLayout
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Returns (legal, new_indices, prefix_counts) for every input index
    """
    bit = np.int64(1) << np.int64(op.mode - 1)
    occupied = (indices & bit) != 0
    legal = occupied if op.kind == LadderKind.ANNIHILATE else ~occupied
    counts = popcount(indices & np.int64(layout.anti_mask(op.mode)))
    return legal, indices ^ bit, counts


def record_sign_classes(
    ledger: SignLedger,
    step: int,
    description: str,
    counts: np.ndarray,
    wrap: bool = False,
    source: Optional[int] = None,
    target: Optional[int] = None,
):
    # one entry per distinct parity class among the surviving terms
    for count in np.unique(counts):
        count = int(count)
        ledger.append(
            SignLedgerEntry(
                step=step,
                op=description,
                sign=-1 if count % 2 else 1,
                interval_parity=count,
                wrap=wrap,
                source=source,
                target=target,
            )
        )


def apply_ladder(
    op: LadderOp, psi: StateVector, ledger: Optional[SignLedger] = None
) -> StateVector:
    """
    Applies one creation or annihilation operator

    Terms where the operator is illegal (empty mode annihilated, occupied
    mode created into) vanish; the result may be the zero vector.

    Args:
        op: LadderOp
        psi: StateVector
        ledger: Optional ledger receiving one entry per sign class

    Returns: StateVector

    """
    psi.layout.check_mode(op.mode)
    legal, new_indices, counts = _ladder_kernel(psi.indices, op, psi.layout)
    counts = counts[legal]
    if ledger is not None:
        record_sign_classes(ledger, ledger.next_step(), str(op), counts)
    return StateVector.from_terms(
        psi.layout,
        new_indices[legal],
        psi.amplitudes[legal] * parity_sign(counts),
    )


def apply_operator_string(
    s: OperatorString, psi: StateVector, ledger: Optional[SignLedger] = None
) -> StateVector:
    """
    Literal evaluation of a printed operator product, rightmost first
    """
    for op in reversed(s.ops):
        psi = apply_ladder(op, psi, ledger)
    return psi


def hop_kernel(
    indices: np.ndarray, hop: Hop, layout: RegisterLayout
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Vectorized f†_target f_source on an index array

    Returns (legal, new_indices, interval_counts). A term's hop sign is
    (-1)**interval_count; the count covers the occupied modes whose
    contributions from the two ladder strings do not cancel, which for
    one species are the occupied modes strictly between the endpoints.
    """
    source_bit = np.int64(1) << np.int64(hop.source - 1)
    target_bit = np.int64(1) << np.int64(hop.target - 1)
    legal = ((indices & source_bit) != 0) & ((indices & target_bit) == 0)
    removed = indices ^ source_bit
    mask = np.int64(
        layout.anti_mask(hop.source) ^ layout.anti_mask(hop.target)
    )
    counts = popcount(removed & mask)
    return legal, removed | target_bit, counts


def apply_hop(
    h: Hop, psi: StateVector, ledger: Optional[SignLedger] = None
) -> StateVector:
    """
    Applies f_source, then f†_target, recording the acquired sign

    Args:
        h: Hop
        psi: StateVector
        ledger: SignLedger receiving one entry per surviving sign class

    Returns: StateVector, zero where the hop is illegal

    """
    h.check(psi.layout)
    legal, new_indices, counts = hop_kernel(psi.indices, h, psi.layout)
    counts = counts[legal]
    if ledger is not None:
        record_sign_classes(
            ledger,
            ledger.next_step(),
            f"hop {h}",
            counts,
            wrap=h.wrap,
            source=h.source,
            target=h.target,
        )
    return StateVector.from_terms(
        psi.layout,
        new_indices[legal],
        psi.amplitudes[legal] * parity_sign(counts),
    )


def apply_hop_sequence(
    hops: Sequence[Hop], psi: StateVector
) -> Tuple[StateVector, SignLedger]:
    """
    Sequential transport: hops applied strictly in list order
    Args:
        hops: List of Hop, first hop first
        psi: Initial state

    Returns: (final state, ledger of every hop sign)

    """
    ledger = SignLedger()
    for hop in hops:
        psi = apply_hop(hop, psi, ledger)
        logger.debug("hop %s -> %s", hop, psi)
    return psi, ledger


def inner_product(psi: StateVector, phi: StateVector) -> complex:
    """
    <psi|phi>, conjugating psi, over the stored entries
    """
    _check_same_layout(psi, phi)
    _, left, right = np.intersect1d(
        psi.indices, phi.indices, assume_unique=True, return_indices=True
    )
    return complex(np.vdot(psi.amplitudes[left], phi.amplitudes[right]))


def sector_indices(modes: int, k: int) -> np.ndarray:
    """Ascending basis indices with exactly k occupied modes"""
    if not 0 <= k <= modes:
        raise ValidationError(
            f"Particle number {k} outside 0..{modes}",
            code="sector_out_of_range",
        )
    indices = [
        sum(1 << bit for bit in combination)
        for combination in itertools.combinations(range(modes), k)
    ]
    return np.array(sorted(indices), dtype=np.int64)


def enumerate_sector(modes: int, k: int) -> List[FockBasisState]:
    """
    All C(M, k) states with k occupied modes, ascending basis index
    Args:
        modes: Register size M
        k: Particle number

    Returns: List[FockBasisState]

    """
    return [
        FockBasisState(int(index), modes)
        for index in sector_indices(modes, k)
    ]
