import math

# Physical constants, pinned. Values from CODATA 2018 unless noted.
# Reduced Planck constant, J s (exact in SI since 2019)
HBAR = 1.054571817e-34
# Neutron mass, kg
NEUTRON_MASS = 1.67492749804e-27
# Standard gravity, m s^-2 (CGPM 1901 conventional value)
STANDARD_GRAVITY = 9.80665

HALF_PI = math.pi / 2

EXPERIMENTS = ["full-swap", "half-swap", "ring", "pulse"]
EVALUATION_MODES = ["sequential", "literal"]
OUTPUT_FORMATS = ["json", "csv"]
RING_TURNS = ["step", "revolution"]

# Statistics matrix entries
COMMUTE = 1
ANTICOMMUTE = -1

FERMION_LABEL = "f"
BOSON_LABEL = "b"
