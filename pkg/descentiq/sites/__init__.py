"""Finite posets as Alexandrov sites and equivariant sheaves on them."""

from descentiq.sites.poset import PosetAction, PosetMap, PosetSite
from descentiq.sites.sheaves import EquivariantSheaf, GTorsorCocycle, SheafMorphism, SiteCochain
