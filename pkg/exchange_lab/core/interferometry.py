"""
Single-particle interference phases used as reference points: the
optical path difference between two arms, and the gravitational phase
between two neutron paths at different heights. Phases are unwrapped.
"""
import math
from dataclasses import dataclass
from typing import Iterable, Tuple

from django.core.exceptions import ValidationError

from exchange_lab.core.const import HBAR, NEUTRON_MASS, STANDARD_GRAVITY


@dataclass(frozen=True)
class PathProfile:
    """

    One interferometer arm as (length in m, refractive index) segments

    """

    segments: Tuple[Tuple[float, float], ...] = ()

    def __post_init__(self):
        for length, index in self.segments:
            if not (math.isfinite(length) and math.isfinite(index)):
                raise ValidationError(
                    "Path segments must be finite", code="invalid_path"
                )
            if length < 0:
                raise ValidationError(
                    f"Negative segment length {length}", code="invalid_path"
                )

    @classmethod
    def of(cls, segments: Iterable[Iterable[float]]) -> "PathProfile":
        return cls(tuple((float(dx), float(n)) for dx, n in segments))

    @property
    def optical_length(self) -> float:
        return math.fsum(length * index for length, index in self.segments)


@dataclass(frozen=True)
class COWParams:
    """

    Attributes:
        `mass`: Particle mass, kg
        `gravity`: m s^-2
        `height`: Separation of the two paths, m
        `time`: Time spent in the interferometer, s

    """

    mass: float = NEUTRON_MASS
    gravity: float = STANDARD_GRAVITY
    height: float = 0.0
    time: float = 0.0

    def __post_init__(self):
        values = (self.mass, self.gravity, self.height, self.time)
        if not all(math.isfinite(value) for value in values):
            raise ValidationError(
                "Parameters must be finite", code="invalid_params"
            )
        if self.mass < 0 or self.time < 0:
            raise ValidationError(
                "Mass and time must be non-negative", code="invalid_params"
            )


def optical_path_phase(
    p1: PathProfile, p2: PathProfile, wavelength: float
) -> float:
    """
    2 pi (optical length of p1 - optical length of p2) / wavelength
    Args:
        p1: First arm
        p2: Second arm
        wavelength: m, positive

    Returns: float, unwrapped phase in radians

    """
    if not wavelength > 0:
        raise ValidationError(
            f"Wavelength must be positive, got {wavelength}",
            code="invalid_wavelength",
        )
    return 2 * math.pi * ((p1.optical_length - p2.optical_length) / wavelength)


def cow_phase(p: COWParams) -> float:
    """Gravitational phase m g h t / hbar, unwrapped"""
    return p.mass * p.gravity * p.height * p.time / HBAR
