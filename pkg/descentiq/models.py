"""Report models for DescentIQ.

Everything the CLI prints is one of these, so ``--json`` output and the text
reports share field names. Groups are stored as rendered strings.
"""

from __future__ import annotations

from enum import Enum
from typing import Optional

from pydantic import BaseModel, Field

from descentiq.algebra.abelian import FgAbelianGroup


class Verdict(str, Enum):
    YES = "yes"
    NO = "no"


class GroupSummary(BaseModel):
    """A finitely generated abelian group by its invariant factors."""

    rendered: str
    free_rank: int = 0
    torsion: list[int] = Field(default_factory=list)

    @classmethod
    def of(cls, group: FgAbelianGroup) -> GroupSummary:
        return cls(rendered=str(group), free_rank=group.free_rank, torsion=list(group.torsion))

    def __str__(self) -> str:
        return self.rendered


class CohomologyReport(BaseModel):
    """H^q of a sheaf or of a group, with the generators' representatives."""

    model: str = ""
    label: str
    degree: int
    group: GroupSummary
    generators: list[dict[str, list[int]]] = Field(default_factory=list)


class ClassReport(BaseModel):
    """A cohomology class: coordinates on invariant generators and a cocycle table."""

    group: GroupSummary
    coordinates: list[int] = Field(default_factory=list)
    cocycle: dict[str, list[int]] = Field(default_factory=dict)
    is_zero: bool = True


class LocalVanishingReport(BaseModel):
    degree: int
    holds: bool
    groups: dict[str, str] = Field(default_factory=dict)
    failing: list[str] = Field(default_factory=list)


class ObstructionReport(BaseModel):
    """Outcome of lifting the action to a torsor (degree 2) or gerbe (degree 3)."""

    model: str = ""
    kind: str  # torsor, gerbe
    lift_found: bool
    obstruction: Optional[ClassReport] = None
    vanishes_after_adjustment: Optional[bool] = None
    lift: dict = Field(default_factory=dict)
    message: str = ""


class InducedReport(BaseModel):
    model: str = ""
    degree: int
    induced: Verdict
    witness: dict[str, list[int]] = Field(default_factory=dict)
    cokernel_coordinates: list[int] = Field(default_factory=list)
    obstruction_zero: Optional[bool] = None
    descended: Optional[dict[str, list[int]]] = None
    descent_failure: dict[str, list[int]] = Field(default_factory=dict)


class NodeVerdict(BaseModel):
    """One node of the exact sequence: image of the incoming map against the
    kernel of the outgoing one."""

    name: str
    image: str
    kernel: str
    exact: bool
    certificate: str = ""

    def line(self) -> str:
        return (f"node {self.name}: image={self.image} kernel={self.kernel} "
                f"exact={'yes' if self.exact else 'no'}")


class ThetaSummary(BaseModel):
    name: str
    source: str
    target: str
    defined: bool
    matrix: list[list[int]] = Field(default_factory=list)
    failure: str = ""


class ExactnessReport(BaseModel):
    model: str = ""
    nodes: list[NodeVerdict] = Field(default_factory=list)
    gerbe_node: Optional[NodeVerdict] = None
    maps: list[ThetaSummary] = Field(default_factory=list)
    local_vanishing: list[LocalVanishingReport] = Field(default_factory=list)

    @property
    def all_exact(self) -> bool:
        return all(node.exact for node in self.nodes)

    def node(self, index: int) -> NodeVerdict:
        """Nodes are numbered from 1 in the order of the sequence."""
        return self.nodes[index - 1]


class HSDegree(BaseModel):
    degree: int
    total: str
    direct: str
    invariants: Optional[str] = None
    match: bool


class HSCompareReport(BaseModel):
    model: str = ""
    degrees: list[HSDegree] = Field(default_factory=list)
    e2: dict[str, str] = Field(default_factory=dict)  # "p,q" -> H^p(G, H^q(X, A))
    local_vanishing_holds: bool = False

    @property
    def all_match(self) -> bool:
        return all(d.match for d in self.degrees)


class PropertyCheckReport(BaseModel):
    name: str
    trials: int = 0
    passed: bool = True
    failures: list[str] = Field(default_factory=list)
