"""Lifting group actions to torsors and gerbes, and the obstructions to doing so."""

from descentiq.descent.gerbes import (
    GerbeLift,
    find_gerbe_lift,
    fixed_point_gerbe,
    gerbe_obstruction,
    is_induced_gerbe,
)
from descentiq.descent.torsors import (
    TorsorLift,
    find_torsor_lift,
    fixed_point_torsor,
    is_induced_torsor,
    torsor_obstruction,
)
