import math
import re
from typing import List, Tuple

from django.conf import settings
from django.core.exceptions import ValidationError
from rest_framework.exceptions import ValidationError as RestValidationError

from exchange_lab.core.const import ANTICOMMUTE, COMMUTE

# Ket Regex, mode 1 leftmost
regex = re.compile(r"^\|?(?P<bits>[01]+)(?:⟩|>)?$")

# Statistics Regex
statistics_regex = re.compile(
    r"^mixed:(?P<matrix>[+-]+(?:/[+-]+)*)(?:@(?P<assignment>\d+))?$"
)


def lab_setting(key: str):
    """
    Reads one entry of the EXCHANGE_LAB settings dict at call time
    Args:
        key: str, setting name

    Returns: The configured value

    """
    return settings.EXCHANGE_LAB[key]


def check_if_valid_ket(text: str) -> bool:
    """
    Checks if a text is a valid ket
    Args:
        text: str, "|1010⟩" or "1010"

    Returns: bool, If text is a valid ket or not

    """
    return re.match(regex, text.strip()) is not None


def validate_ket(text: str):
    """

    Core Validator

    Args:
        text: Ket string

    Raises:
        Raises validation error if the ket is malformed

    """
    if not check_if_valid_ket(text):
        raise ValidationError(f"Invalid ket {text!r}", code="invalid_ket")


def validate_ket_drf(text: str):
    """
    Django Rest Framework Serializer Validator
    Args:
        text: Ket string

    Raises:
        Raises validation error if the ket is malformed

    """
    if not check_if_valid_ket(text):
        raise RestValidationError(f"Invalid ket {text!r}")


def parse_ket(text: str) -> List[int]:
    """
    Parses a ket into occupation numbers, mode 1 first
    Args:
        text: str, "|1010⟩" or "1010"

    Returns: List[int], occupations n_1 ... n_M

    """
    validate_ket(text)
    bits = re.match(regex, text.strip()).group("bits")
    return [int(bit) for bit in bits]


def occupations_to_index(occupations: List[int]) -> int:
    """Mode k is bit k-1"""
    return sum(n << k for k, n in enumerate(occupations))


def render_ket(index: int, modes: int) -> str:
    """
    Renders a basis index as a bracketed ket, mode 1 leftmost
    Args:
        index: Basis index
        modes: Register size M

    Returns: str, Example: "|1010⟩"

    """
    bits = "".join(str((index >> k) & 1) for k in range(modes))
    return f"|{bits}⟩"


def wrap_phase(phase: float) -> float:
    """
    Wraps an angle into (-pi, pi], folding -0.0 into 0.0
    """
    wrapped = math.remainder(phase, 2 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2 * math.pi
    return wrapped + 0.0


def parse_statistics_spec(
    text: str, modes: int
) -> Tuple[Tuple[int, ...], Tuple[Tuple[int, ...], ...]]:
    """
    Parses a `mixed:<matrix>[@<assignment>]` statistics spec

    The matrix lists rows of the species statistics matrix separated by
    "/", one "+" (commute) or "-" (anticommute) per entry. Without an
    assignment, modes are split into contiguous equal blocks in species
    order.

    Args:
        text: str, Example: "mixed:--/--@0011"
        modes: Register size M

    Returns: (species_of, matrix), species_of[k] is the species of mode k+1

    Raises:
        ValidationError: malformed, asymmetric or inconsistent spec

    """
    match = re.match(statistics_regex, text.strip())
    if match is None:
        raise ValidationError(
            f"Invalid statistics spec {text!r}", code="invalid_statistics"
        )
    rows = match.group("matrix").split("/")
    size = len(rows)
    if any(len(row) != size for row in rows):
        raise ValidationError(
            "Statistics matrix must be square", code="invalid_statistics"
        )
    matrix = tuple(
        tuple(ANTICOMMUTE if entry == "-" else COMMUTE for entry in row)
        for row in rows
    )
    assignment = match.group("assignment")
    if assignment is None:
        species_of = tuple(k * size // modes for k in range(modes))
    else:
        if len(assignment) != modes:
            raise ValidationError(
                f"Species assignment needs {modes} digits",
                code="invalid_statistics",
            )
        species_of = tuple(int(digit) for digit in assignment)
        if max(species_of) >= size:
            raise ValidationError(
                "Species assignment refers to an unknown species",
                code="invalid_statistics",
            )
    return species_of, matrix
