"""
Dense-matrix reference implementation

Ladder operators are built explicitly as Kronecker products of a local
2x2 raise/lower block, diagonal string factors on the lower modes and
identities. They are cached in CSR form for products with vectors and
turned into full 2**M x 2**M matrices for the public builders and the
propagator. Nothing here shares code with the fast-path kernels except the
layout description, so agreement between the two is evidence.
"""
import logging
import time
from dataclasses import dataclass, field
from functools import reduce
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as la
from django.core.exceptions import ValidationError
from scipy import sparse

from exchange_lab.core.const import ANTICOMMUTE
from exchange_lab.core.fock import (
    FockBasisState,
    Hop,
    LadderKind,
    LadderOp,
    OperatorString,
    RegisterLayout,
    StateVector,
    apply_operator_string,
)
from exchange_lab.core.utils import lab_setting

logger = logging.getLogger(__name__)

# Basis |0>, |1>: lowering maps |1> to |0>
LOWER = np.array([[0.0, 1.0], [0.0, 0.0]])
RAISE = LOWER.T
PARITY = np.diag([1.0, -1.0])
IDENTITY = np.eye(2)


def check_cap(modes: int):
    """
    Raises if a register is too large for dense matrices
    Args:
        modes: Register size M

    Raises:
        ValidationError, code "oracle_cap_exceeded"

    """
    cap = lab_setting("ORACLE_MAX_MODES")
    if modes > cap:
        raise ValidationError(
            f"Dense oracle is capped at {cap} modes, got {modes}; "
            "raise EXCHANGE_LAB_ORACLE_MAX_MODES to override",
            code="oracle_cap_exceeded",
        )


def _sparse_ladder(
    layout: RegisterLayout, mode: int, kind: LadderKind
) -> sparse.csr_array:
    layout.check_mode(mode)
    factors = []
    for position in range(1, layout.modes + 1):
        if position < mode:
            anticommutes = layout.sigma(position, mode) == ANTICOMMUTE
            factors.append(PARITY if anticommutes else IDENTITY)
        elif position == mode:
            factors.append(LOWER if kind == LadderKind.ANNIHILATE else RAISE)
        else:
            factors.append(IDENTITY)
    # kron puts its first factor on the most significant bit; mode 1 is the
    # least significant bit, so the highest mode goes first
    return reduce(
        lambda left, right: sparse.kron(left, right, format="csr"),
        (sparse.csr_array(factor) for factor in reversed(factors)),
    )


def dense_ladder(
    layout: RegisterLayout, mode: int, kind: LadderKind
) -> np.ndarray:
    """
    Dense creation or annihilation operator on one mode

    Args:
        layout: Register, M within the oracle cap
        mode: 1-based target mode
        kind: LadderKind

    Returns: np.ndarray, complex (2**M, 2**M)

    """
    check_cap(layout.modes)
    ladder = _sparse_ladder(layout, mode, LadderKind(kind))
    return ladder.toarray().astype(np.complex128)


def dense_string(layout: RegisterLayout, s: OperatorString) -> np.ndarray:
    """
    Matrix of a printed operator product, factors multiplied in order
    """
    check_cap(layout.modes)
    identity = np.eye(layout.dimension, dtype=np.complex128)
    return reduce(
        np.matmul,
        [dense_ladder(layout, op.mode, op.kind) for op in s.ops],
        identity,
    )


class _LadderCache:
    """
    Builds each ladder once per register, kept in CSR form: a ladder has
    2**(M-1) nonzeros
    """

    def __init__(self, layout: RegisterLayout):
        check_cap(layout.modes)
        self.layout = layout
        self.matrices: Dict[Tuple[int, LadderKind], sparse.csr_array] = {}

    def __call__(self, op: LadderOp) -> sparse.csr_array:
        key = (op.mode, op.kind)
        if key not in self.matrices:
            self.matrices[key] = _sparse_ladder(
                self.layout, op.mode, op.kind
            )
        return self.matrices[key]

    def apply(self, s: OperatorString, vector: np.ndarray) -> np.ndarray:
        for op in reversed(s.ops):
            vector = self(op) @ vector
        return vector


def dense_apply(
    layout: RegisterLayout, s: OperatorString, vector: np.ndarray
) -> np.ndarray:
    """
    Applies an operator string to a dense vector, rightmost factor first
    """
    return _LadderCache(layout).apply(s, np.asarray(vector, np.complex128))


def dense_hops(
    layout: RegisterLayout, hops: Sequence[Hop], state: FockBasisState
) -> np.ndarray:
    """Dense image of a basis state under a hop sequence"""
    vector = np.zeros(layout.dimension, dtype=np.complex128)
    vector[state.index] = 1.0
    return dense_apply(layout, OperatorString.from_hops(hops), vector)


def dense_hopping_hamiltonian(
    layout: RegisterLayout, edges: Iterable[Tuple[int, int, float]]
) -> np.ndarray:
    """
    Sum over edges of -J (f†_j f_i + f†_i f_j) as a dense matrix
    """
    cache = _LadderCache(layout)
    hamiltonian = np.zeros((layout.dimension,) * 2, dtype=np.complex128)
    for i, j, coupling in edges:
        forward = cache(LadderOp.create(j)) @ cache(LadderOp.annihilate(i))
        hamiltonian -= coupling * (forward + forward.T).toarray()
    return hamiltonian


def relation_residual(
    layout: RegisterLayout, first: LadderOp, second: LadderOp
) -> float:
    """
    Max-norm residual of the (anti)commutation relation of two operators

    For distinct modes the relation is AB - sigma BA = 0; on one mode it
    is f f† + f† f = 1 and f f = f† f† = 0.
    """
    cache = _LadderCache(layout)
    a, b = cache(first), cache(second)
    if first.mode != second.mode:
        sigma = layout.sigma(first.mode, second.mode)
        residual = (a @ b - sigma * (b @ a)).toarray()
    elif first.kind != second.kind:
        residual = (a @ b + b @ a).toarray() - np.eye(layout.dimension)
    else:
        residual = (a @ b).toarray()
    return float(np.max(np.abs(residual), initial=0.0))


def dense_expm_hermitian(h: np.ndarray, t: float = 1.0) -> np.ndarray:
    """
    exp(-i H t) through the Hermitian eigendecomposition

    Args:
        h: Hermitian matrix, within 1e-12
        t: Time, defaults to 1

    Returns: np.ndarray, unitary propagator

    Raises:
        ValidationError: input is not Hermitian

    """
    h = np.asarray(h, dtype=np.complex128)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValidationError("Matrix must be square", code="not_hermitian")
    if h.size and np.max(np.abs(h - h.conj().T)) > 1e-12:
        raise ValidationError("Matrix is not Hermitian", code="not_hermitian")
    eigenvalues, eigenvectors = la.eigh(h)
    phases = np.exp(-1j * eigenvalues * t)
    return (eigenvectors * phases) @ eigenvectors.conj().T


def worldline_parity(
    initial: FockBasisState, hops: Sequence[Hop]
) -> Optional[int]:
    """
    Tracks labeled particles through a hop sequence by position alone

    Particles are labeled in increasing mode order, moved hop by hop, and
    the permutation of labels in final mode order is returned as its
    parity. Returns None when a hop is illegal.

    Args:
        initial: Starting configuration
        hops: Hop sequence

    Returns: +1 / -1, or None

    """
    positions = {mode: label for label, mode in enumerate(initial.occupied)}
    for hop in hops:
        if hop.source not in positions or hop.target in positions:
            return None
        positions[hop.target] = positions.pop(hop.source)
    labels = [positions[mode] for mode in sorted(positions)]
    inversions = sum(
        1
        for a in range(len(labels))
        for b in range(a + 1, len(labels))
        if labels[a] > labels[b]
    )
    return -1 if inversions % 2 else 1


@dataclass
class CrossCheckReport:
    modes: int
    trials: int
    seed: int
    max_deviation: float = 0.0
    failures: List[int] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures


def random_operator_string(
    rng: np.random.Generator, modes: int, max_length: int = 8
) -> OperatorString:
    length = int(rng.integers(1, max_length + 1))
    kinds = rng.integers(0, 2, size=length)
    targets = rng.integers(1, modes + 1, size=length)
    return OperatorString(
        tuple(
            LadderOp(
                LadderKind.CREATE if kind else LadderKind.ANNIHILATE,
                int(mode),
            )
            for kind, mode in zip(kinds, targets)
        )
    )


def random_dense_state(rng: np.random.Generator, dimension: int) -> np.ndarray:
    vector = rng.normal(size=dimension) + 1j * rng.normal(size=dimension)
    return vector / np.linalg.norm(vector)


def cross_check(
    modes: int,
    trials: int,
    seed: int,
    layout: Optional[RegisterLayout] = None,
) -> CrossCheckReport:
    """
    Compares sparse and dense evaluation of random operator strings

    Args:
        modes: Register size M, within the oracle cap
        trials: Number of random (string, state) pairs
        seed: Seed of the generator, results are deterministic per seed
        layout: Register statistics, single fermionic species by default

    Returns: CrossCheckReport, passed iff every deviation is within tolerance

    """
    check_cap(modes)
    layout = layout or RegisterLayout.fermions(modes)
    tolerance = lab_setting("CHECK_TOLERANCE")
    report = CrossCheckReport(modes=modes, trials=trials, seed=seed)
    if trials == 0:
        return report
    started = time.perf_counter()
    rng = np.random.default_rng(seed)
    cache = _LadderCache(layout)
    for trial in range(trials):
        s = random_operator_string(rng, modes)
        vector = random_dense_state(rng, layout.dimension)
        fast = apply_operator_string(
            s, StateVector.from_dense(layout, vector)
        ).to_dense()
        dense = cache.apply(s, vector)
        deviation = float(np.max(np.abs(fast - dense)))
        report.max_deviation = max(report.max_deviation, deviation)
        if deviation > tolerance:
            logger.warning(
                "cross-check trial %d deviates by %.3e on %s",
                trial,
                deviation,
                s,
            )
            report.failures.append(trial)
    report.seconds = time.perf_counter() - started
    logger.info(
        "cross-check M=%d trials=%d max deviation %.3e",
        modes,
        trials,
        report.max_deviation,
    )
    return report
