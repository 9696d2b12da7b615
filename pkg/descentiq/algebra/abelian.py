"""Finitely generated abelian groups given by integer relation matrices.

A group on ``n`` generators is Z^n modulo the row span of its relations
matrix. Every element is stored in a canonical form (coordinates reduced
through the Smith form of the relations), so equality is coordinate equality.
Homomorphism matrices act on column vectors: ``target.ngens x source.ngens``.
"""

from __future__ import annotations

import itertools
import logging
from functools import cached_property
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from descentiq.algebra.matrices import (
    Lattice,
    SmithForm,
    block_diag,
    hstack,
    identity,
    int_matrix,
    int_vector,
    matmul,
    smith_normal_form,
    vstack,
    zero_vector,
    zeros,
)
from descentiq.errors import IllDefinedHom, NotInImage

logger = logging.getLogger(__name__)


def render_invariants(free_rank: int, torsion: Sequence[int]) -> str:
    parts: list[str] = []
    if free_rank == 1:
        parts.append("Z")
    elif free_rank > 1:
        parts.append(f"Z^{free_rank}")
    parts.extend(f"Z/{d}" for d in torsion)
    return " + ".join(parts) if parts else "0"


class FgAbelianGroup:
    def __init__(self, ngens: int, relations: Iterable[Iterable[int]] | np.ndarray | None = None):
        self.ngens = int(ngens)
        if relations is None:
            rel = zeros(0, self.ngens)
        else:
            rel = int_matrix(relations, cols=self.ngens)
        if rel.shape[1] != self.ngens:
            raise ValueError(f"Relations have {rel.shape[1]} columns, expected {self.ngens}")
        self.relations = rel

    # -- constructors ------------------------------------------------------

    @classmethod
    def free(cls, rank: int) -> FgAbelianGroup:
        return cls(rank)

    @classmethod
    def cyclic(cls, order: int) -> FgAbelianGroup:
        """Z/order; ``order=0`` gives Z."""
        return cls(1, [[order]] if order else None)

    @classmethod
    def trivial(cls) -> FgAbelianGroup:
        return cls(0)

    @classmethod
    def from_invariants(cls, free_rank: int = 0, torsion: Sequence[int] = ()) -> FgAbelianGroup:
        """Torsion generators first, then free ones; relations diag(torsion)."""
        n = len(torsion) + free_rank
        rel = zeros(len(torsion), n)
        for i, d in enumerate(torsion):
            if d < 1:
                raise ValueError(f"Torsion coefficient must be positive, got {d}")
            rel[i, i] = d
        return cls(n, rel)

    @classmethod
    def direct_sum(cls, groups: Sequence[FgAbelianGroup]) -> FgAbelianGroup:
        n = sum(g.ngens for g in groups)
        if not groups:
            return cls(0)
        return cls(n, block_diag([g.relations for g in groups]))

    # -- invariants --------------------------------------------------------

    @cached_property
    def smith(self) -> SmithForm:
        return smith_normal_form(self.relations)

    @cached_property
    def _summands(self) -> tuple[list[int], list[int]]:
        """Indices (in Smith coordinates) of nontrivial summands and their moduli."""
        idx: list[int] = []
        mod: list[int] = []
        for i, d in enumerate(self.smith.diagonal):
            if d > 1:
                idx.append(i)
                mod.append(d)
        for i in range(self.smith.rank, self.ngens):
            idx.append(i)
            mod.append(0)
        return idx, mod

    @property
    def torsion(self) -> list[int]:
        return [d for d in self.smith.diagonal if d > 1]

    @property
    def free_rank(self) -> int:
        return self.ngens - self.smith.rank

    @property
    def invariants(self) -> tuple[int, tuple[int, ...]]:
        return self.free_rank, tuple(self.torsion)

    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    def is_finite(self) -> bool:
        return self.free_rank == 0

    def order(self) -> Optional[int]:
        if self.free_rank:
            return None
        out = 1
        for d in self.torsion:
            out *= d
        return out

    def is_isomorphic(self, other: FgAbelianGroup) -> bool:
        return self.invariants == other.invariants

    def same_presentation(self, other: FgAbelianGroup) -> bool:
        return (
            self is other
            or (
                self.ngens == other.ngens
                and self.relations.shape == other.relations.shape
                and bool(np.all(self.relations == other.relations))
            )
        )

    def __str__(self) -> str:
        return render_invariants(self.free_rank, self.torsion)

    def __repr__(self) -> str:
        return f"FgAbelianGroup({self})"

    # -- elements ----------------------------------------------------------

    def reduce(self, coords: Iterable[int] | np.ndarray) -> np.ndarray:
        x = np.asarray(coords, dtype=object) if isinstance(coords, np.ndarray) \
            else int_vector(coords)
        if x.shape[0] != self.ngens:
            raise ValueError(f"Element has {x.shape[0]} coordinates, expected {self.ngens}")
        if self.smith.rank == 0:
            return np.array(x, dtype=object, copy=True)
        y = matmul(x, self.smith.V)
        for i, d in enumerate(self.smith.diagonal):
            y[i] = y[i] % d
        return matmul(y, self.smith.V_inv)

    def nonzero_columns(self, mat: np.ndarray) -> list[int]:
        """Indices of columns of ``mat`` that are nonzero elements of this group."""
        if mat.shape[1] == 0 or self.ngens == 0:
            return []
        y = matmul(mat.T, self.smith.V)
        for i, d in enumerate(self.smith.diagonal):
            y[:, i] = y[:, i] % d
        return [int(k) for k in np.flatnonzero(np.any(y != 0, axis=1))]

    def invariant_coordinates(self, coords: Iterable[int] | np.ndarray) -> list[int]:
        """Coordinates in the invariant-factor decomposition: torsion, then free."""
        x = np.asarray(coords, dtype=object) if isinstance(coords, np.ndarray) \
            else int_vector(coords)
        y = matmul(x, self.smith.V) if self.ngens else zero_vector(0)
        idx, mod = self._summands
        return [int(y[i] % m) if m else int(y[i]) for i, m in zip(idx, mod)]

    def from_invariant_coordinates(self, values: Sequence[int]) -> GroupElement:
        idx, _ = self._summands
        if len(values) != len(idx):
            raise ValueError(f"Expected {len(idx)} invariant coordinates, got {len(values)}")
        y = zero_vector(self.ngens)
        for i, v in zip(idx, values):
            y[i] = int(v)
        return self.element(matmul(y, self.smith.V_inv) if self.ngens else y)

    def element(self, coords: Iterable[int] | np.ndarray) -> GroupElement:
        return GroupElement(self, coords)

    def zero(self) -> GroupElement:
        return GroupElement(self, zero_vector(self.ngens), reduced=True)

    def generators(self) -> list[GroupElement]:
        eye = identity(self.ngens)
        return [self.element(eye[:, i]) for i in range(self.ngens)]

    def invariant_generators(self) -> list[GroupElement]:
        n = len(self._summands[0])
        return [self.from_invariant_coordinates([int(i == j) for j in range(n)])
                for i in range(n)]

    def elements(self) -> Iterator[GroupElement]:
        """All elements of a finite group, in lexicographic invariant order."""
        if self.free_rank:
            raise ValueError(f"Cannot enumerate infinite group {self}")
        for values in itertools.product(*(range(d) for d in self.torsion)):
            yield self.from_invariant_coordinates(list(values))

    def torsion_elements(self) -> Iterator[GroupElement]:
        free = [0] * self.free_rank
        for values in itertools.product(*(range(d) for d in self.torsion)):
            yield self.from_invariant_coordinates(list(values) + free)

    def smith_presentation(self) -> tuple[FgAbelianGroup, GroupHom, GroupHom]:
        """Isomorphic group on invariant generators, with the two isomorphisms."""
        idx, mod = self._summands
        torsion = [m for m in mod if m]
        target = FgAbelianGroup.from_invariants(len(mod) - len(torsion), torsion)
        V, V_inv = self.smith.V, self.smith.V_inv
        to_m = zeros(len(idx), self.ngens)
        from_m = zeros(self.ngens, len(idx))
        for k, i in enumerate(idx):
            to_m[k, :] = V[:, i]
            from_m[:, k] = V_inv[i, :]
        return target, GroupHom(self, target, to_m, check=False), \
            GroupHom(target, self, from_m, check=False)


class GroupElement:
    """An element of an FgAbelianGroup in canonical coordinates."""

    __slots__ = ("group", "coords")

    def __init__(self, group: FgAbelianGroup, coords: Iterable[int] | np.ndarray,
                 reduced: bool = False):
        self.group = group
        self.coords = np.asarray(coords, dtype=object) if reduced else group.reduce(coords)

    def _check(self, other: GroupElement) -> None:
        if not self.group.same_presentation(other.group):
            raise ValueError(f"Elements of different groups: {self.group} vs {other.group}")

    def __add__(self, other: GroupElement) -> GroupElement:
        self._check(other)
        return GroupElement(self.group, self.coords + other.coords)

    def __sub__(self, other: GroupElement) -> GroupElement:
        self._check(other)
        return GroupElement(self.group, self.coords - other.coords)

    def __neg__(self) -> GroupElement:
        return GroupElement(self.group, -self.coords)

    def __mul__(self, k: int) -> GroupElement:
        return GroupElement(self.group, self.coords * int(k))

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GroupElement):
            return NotImplemented
        return self.group.same_presentation(other.group) and bool(
            np.all(self.coords == other.coords)
        )

    def __hash__(self) -> int:
        return hash(tuple(int(c) for c in self.coords))

    def is_zero(self) -> bool:
        return not np.any(self.coords != 0)

    def invariant_coordinates(self) -> list[int]:
        return self.group.invariant_coordinates(self.coords)

    def as_list(self) -> list[int]:
        return [int(c) for c in self.coords]

    def __repr__(self) -> str:
        return f"GroupElement({self.as_list()} in {self.group})"


class GroupHom:
    """Homomorphism between finitely generated abelian groups.

    ``check=True`` verifies that every source relation is sent into the target
    relations and raises ``IllDefinedHom`` naming the first violating row.
    """

    def __init__(self, source: FgAbelianGroup, target: FgAbelianGroup,
                 matrix: Iterable[Iterable[int]] | np.ndarray, check: bool = True):
        self.source = source
        self.target = target
        m = int_matrix(matrix, rows=target.ngens, cols=source.ngens)
        if m.shape != (target.ngens, source.ngens):
            raise ValueError(
                f"Hom matrix has shape {m.shape}, expected {(target.ngens, source.ngens)}"
            )
        self.matrix = m
        if check:
            self._check()

    def _check(self) -> None:
        rel = self.source.relations
        if rel.shape[0] == 0:
            return
        bad = self.target.nonzero_columns(matmul(self.matrix, rel.T))
        if bad:
            raise IllDefinedHom(bad[0])

    # -- constructors ------------------------------------------------------

    @classmethod
    def identity(cls, group: FgAbelianGroup) -> GroupHom:
        return cls(group, group, identity(group.ngens), check=False)

    @classmethod
    def zero(cls, source: FgAbelianGroup, target: FgAbelianGroup) -> GroupHom:
        return cls(source, target, zeros(target.ngens, source.ngens), check=False)

    @classmethod
    def scalar(cls, group: FgAbelianGroup, k: int) -> GroupHom:
        return cls(group, group, identity(group.ngens) * int(k), check=False)

    @classmethod
    def from_images(cls, source: FgAbelianGroup, target: FgAbelianGroup,
                    images: Sequence[GroupElement | np.ndarray]) -> GroupHom:
        """Hom sending source generator i to ``images[i]``."""
        m = zeros(target.ngens, source.ngens)
        for i, img in enumerate(images):
            m[:, i] = img.coords if isinstance(img, GroupElement) else img
        return cls(source, target, m)

    @classmethod
    def block(cls, source: FgAbelianGroup, target: FgAbelianGroup,
              matrix: np.ndarray) -> GroupHom:
        """Unchecked constructor for maps assembled from checked blocks."""
        return cls(source, target, matrix, check=False)

    # -- evaluation --------------------------------------------------------

    def apply_vector(self, x: np.ndarray) -> np.ndarray:
        return self.target.reduce(matmul(self.matrix, np.asarray(x, dtype=object)))

    def __call__(self, x: GroupElement | np.ndarray | Sequence[int]) -> GroupElement:
        if isinstance(x, GroupElement):
            coords = x.coords
        elif isinstance(x, np.ndarray):
            coords = x
        else:
            coords = int_vector(x)
        return GroupElement(self.target, self.apply_vector(coords), reduced=True)

    def compose(self, inner: GroupHom) -> GroupHom:
        """``self o inner``."""
        return GroupHom(inner.source, self.target, matmul(self.matrix, inner.matrix),
                        check=False)

    def __matmul__(self, inner: GroupHom) -> GroupHom:
        return self.compose(inner)

    def __add__(self, other: GroupHom) -> GroupHom:
        return GroupHom(self.source, self.target, self.matrix + other.matrix, check=False)

    def __sub__(self, other: GroupHom) -> GroupHom:
        return GroupHom(self.source, self.target, self.matrix - other.matrix, check=False)

    def __neg__(self) -> GroupHom:
        return GroupHom(self.source, self.target, -self.matrix, check=False)

    def is_zero(self) -> bool:
        return not self.target.nonzero_columns(self.matrix)

    def equals(self, other: GroupHom) -> bool:
        return (self - other).is_zero()

    # -- derived data (cached; values are immutable) ------------------------

    @cached_property
    def _solver(self) -> Lattice:
        return Lattice(hstack([self.matrix, self.target.relations.T], self.target.ngens))

    @cached_property
    def kernel(self) -> tuple[FgAbelianGroup, GroupHom]:
        return hom_kernel(self)

    @cached_property
    def cokernel(self) -> tuple[FgAbelianGroup, GroupHom]:
        return hom_cokernel(self)

    def image_group(self) -> FgAbelianGroup:
        """Group isomorphic to the image (source modulo kernel)."""
        return hom_cokernel(self.kernel[1])[0]

    def is_injective(self) -> bool:
        return self.kernel[0].is_trivial()

    def is_surjective(self) -> bool:
        return self.cokernel[0].is_trivial()

    def solve(self, y: GroupElement | np.ndarray) -> Optional[GroupElement]:
        """Preimage of y, or None."""
        coords = y.coords if isinstance(y, GroupElement) else np.asarray(y, dtype=object)
        x = self._solver.solve(coords)
        if x is None:
            return None
        return self.source.element(x[: self.source.ngens])

    def __repr__(self) -> str:
        return f"GroupHom({self.source} -> {self.target})"


def hom_kernel(h: GroupHom) -> tuple[FgAbelianGroup, GroupHom]:
    """Kernel of h as a group on invariant generators, with its inclusion."""
    S = h.source
    null = h._solver.kernel_basis()[: S.ngens, :]
    lattice = Lattice(hstack([null, S.relations.T], S.ngens))
    rel_rows = []
    for idx in range(S.relations.shape[0]):
        coeffs = lattice.coordinates(S.relations[idx, :])
        if coeffs is None:
            raise IllDefinedHom(idx)
        rel_rows.append(coeffs)
    k = lattice.rank
    presented = FgAbelianGroup(k, vstack([c.reshape(1, k) for c in rel_rows], k)
                               if rel_rows else None)
    K, _, from_k = presented.smith_presentation()
    incl = GroupHom(K, S, matmul(lattice.basis, from_k.matrix), check=False)
    logger.debug("kernel of %r is %s", h, K)
    return K, incl


def hom_cokernel(h: GroupHom) -> tuple[FgAbelianGroup, GroupHom]:
    """Cokernel of h as a group on invariant generators, with its projection."""
    T = h.target
    presented = FgAbelianGroup(T.ngens, vstack([T.relations, h.matrix.T], T.ngens))
    C, to_c, _ = presented.smith_presentation()
    proj = GroupHom(T, C, to_c.matrix, check=False)
    return C, proj


def solve_image_membership(h: GroupHom, y: GroupElement) -> GroupElement:
    """Return x with h(x) == y, or raise NotInImage carrying cokernel coordinates."""
    x = h.solve(y)
    if x is None:
        C, proj = h.cokernel
        raise NotInImage(proj(y).invariant_coordinates())
    return x


def enumerate_homs(source: FgAbelianGroup, target: FgAbelianGroup) -> Iterator[GroupHom]:
    """All homomorphisms source -> target; target must be finite."""
    if not target.is_finite():
        raise ValueError(f"Cannot enumerate homs into infinite group {target}")
    N, to_n, _ = source.smith_presentation()
    choices: list[list[GroupElement]] = []
    for k in range(N.ngens):
        d = N.torsion[k] if k < len(N.torsion) else 0
        choices.append([t for t in target.elements() if d == 0 or (t * d).is_zero()])
    for images in itertools.product(*choices):
        on_n = GroupHom.from_images(N, target, list(images))
        yield on_n.compose(to_n)
