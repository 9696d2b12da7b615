"""Exceptions raised by DescentIQ.

Two families matter to callers: ``ModelError`` for malformed or inconsistent
input (CLI exit status 1) and ``PreconditionError`` for valid input on which a
mathematical precondition fails (CLI exit status 2). Precondition errors carry
certificates so a failure can be re-verified independently.
"""

from __future__ import annotations

from typing import Any


class DescentIQError(Exception):
    """Base class for all DescentIQ errors."""


class ModelError(DescentIQError, ValueError):
    """Input violates an axiom of the model it claims to be."""


class IllDefinedHom(ModelError):
    def __init__(self, relation_index: int, message: str = ""):
        self.relation_index = relation_index
        super().__init__(
            message or f"Matrix does not preserve source relation {relation_index}"
        )


class ComplexError(ModelError):
    def __init__(self, degree: int):
        self.degree = degree
        super().__init__(f"d^{degree + 1} o d^{degree} != 0")


class NotNormal(ModelError):
    def __init__(self, g: int, n: int, conjugate: int):
        self.witness = (g, n, conjugate)
        super().__init__(f"g={g} conjugates n={n} to {conjugate}, which leaves the subgroup")


class CorruptedLift(ModelError):
    """A lift record fails its own cobounding identities."""


class PreconditionError(DescentIQError):
    """A mathematical precondition fails on otherwise valid input."""


class NotInImage(PreconditionError):
    def __init__(self, cokernel_coords: list[int], message: str = ""):
        self.cokernel_coords = list(cokernel_coords)
        super().__init__(
            message or f"Element not in image; cokernel class {self.cokernel_coords}"
        )


class NotACocycle(PreconditionError):
    def __init__(self, boundary: Any, where: Any = None):
        self.boundary = boundary
        self.where = where
        detail = f" at {where}" if where is not None else ""
        super().__init__(f"Input is not a cocycle{detail}; its coboundary is {boundary}")


class NotStable(PreconditionError):
    def __init__(self, element: int, moved_class: list[int]):
        self.element = element
        self.moved_class = list(moved_class)
        super().__init__(
            f"Class is moved by group element {element}; "
            f"difference class {self.moved_class}"
        )


class NotInKernel(PreconditionError):
    def __init__(self, class_coords: list[int]):
        self.class_coords = list(class_coords)
        super().__init__(
            f"Induced class is nonzero ({self.class_coords}); no cobounding witness exists"
        )


class NoConnecting(PreconditionError):
    """The 2-commuting data of a gerbe lift cannot be chosen.

    ``obstruction`` holds the coordinates of the class in H^2(G, H^1(X, A));
    ``pair_classes`` maps (g, h) to the H^1(X, A) class that failed to vanish.
    """

    def __init__(self, obstruction: list[int], pair_classes: dict[tuple[int, int], list[int]]):
        self.obstruction = list(obstruction)
        self.pair_classes = pair_classes
        super().__init__(f"No connecting data; obstruction class {self.obstruction}")


class LocalVanishingFailure(PreconditionError):
    def __init__(self, degree: int, failures: dict[str, list[int]]):
        self.degree = degree
        self.failures = failures
        pts = ", ".join(sorted(failures))
        super().__init__(f"H^{degree}(G, F(x)) class nonzero at: {pts}")


class ObstructionNonzero(PreconditionError):
    def __init__(self, degree: int, class_coords: list[int]):
        self.degree = degree
        self.class_coords = list(class_coords)
        super().__init__(f"Obstruction class in degree {degree} is nonzero: {self.class_coords}")


class NontrivialAction(PreconditionError):
    def __init__(self, element: int):
        self.element = element
        super().__init__(f"Group element {element} acts nontrivially")


class DegreeAboveChainCap(PreconditionError):
    def __init__(self, degree: int, chain_cap: int):
        self.degree = degree
        self.chain_cap = chain_cap
        super().__init__(
            f"H^{degree} needs chains of length {degree + 1}; chain_cap={chain_cap}"
        )
