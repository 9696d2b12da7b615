"""Finite groups, their modules, and group cohomology through the bar complex."""

from descentiq.groupcoh.bar import GroupCochain, group_cohomology
from descentiq.groupcoh.finite import FiniteGroup
from descentiq.groupcoh.modules import GroupModule
