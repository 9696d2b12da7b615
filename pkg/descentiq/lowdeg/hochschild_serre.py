"""Low-degree comparison for A = E[M].

For a G-torsor M the total complex of C^p(G, C^q(X, E[M])) computes
H^n(X, E). The comparison is made on invariant factors; the E2 page
H^p(G, H^q(X, E[M])) is reported alongside.
"""

from __future__ import annotations

import logging

from descentiq.lowdeg.double import LowDegreeComplex
from descentiq.models import HSCompareReport, HSDegree
from descentiq.sites.constructions import (
    internal_hom_torsor,
    invariants_sheaf,
    stalkwise_local_vanishing,
)
from descentiq.sites.sheaves import EquivariantSheaf, GTorsorCocycle

logger = logging.getLogger(__name__)


def hs_low_degree_compare(E: EquivariantSheaf, M: GTorsorCocycle, max_degree: int = 3,
                          margin: int = 1, name: str = "") -> HSCompareReport:
    """Compare degrees 0..max_degree. Site cochains above the poset height are
    zero, so the double complex is complete in every compared degree."""
    A = internal_hom_torsor(E, M)
    K = LowDegreeComplex(A, max_total_degree=max_degree, group_degree_margin=margin)
    vanishing = all(stalkwise_local_vanishing(A, j).holds for j in range(1, max_degree + 1))
    AG = invariants_sheaf(A)[0] if vanishing else None

    report = HSCompareReport(model=name, local_vanishing_holds=vanishing)
    for n in range(max_degree + 1):
        total = K.total_cohomology(n)
        direct = E.cohomology(n).group
        match = total.is_isomorphic(direct)
        invariants = None
        if AG is not None:
            inv = AG.cohomology(n).group
            invariants = str(inv)
            match = match and inv.is_isomorphic(direct)
        if not match:
            logger.warning("degree %d: total %s, direct %s", n, total, direct)
        report.degrees.append(HSDegree(degree=n, total=str(total), direct=str(direct),
                                       invariants=invariants, match=match))
    for p in range(max_degree + 1):
        for q in range(max_degree + 1 - p):
            report.e2[f"{p},{q}"] = str(K.e2_term(p, q))
    return report
