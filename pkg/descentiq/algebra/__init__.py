"""Integer linear algebra: Smith normal form, abelian groups, cochain complexes."""

from descentiq.algebra.abelian import FgAbelianGroup, GroupElement, GroupHom
from descentiq.algebra.complexes import CochainComplex, DoubleComplex, TotalComplex
