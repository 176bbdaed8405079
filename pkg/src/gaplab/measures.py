"""Finite positive measures on computational groups.

A measure is stored as a finite map ``element -> mass``.  On grid kinds
the mass of a cell equals density * cell volume, so a single atomic
representation covers both the atomic and the grid-density views of the
underlying continuous measure.  All operations are pure: they return new
measures and never mutate their inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DescriptorMismatchError, PreconditionError, ResourceLimitError
from .groups import Element, GroupDescriptor

#: default cap on the support size produced by convolutions
DEFAULT_SUPPORT_CAP = 10_000_000


@dataclass(frozen=True)
class GroupMeasure:
    """A finite positive measure with finite support on a group."""

    group: GroupDescriptor
    atoms: dict[Element, float] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for g, w in self.atoms.items():
            if w < 0:
                raise PreconditionError(f"negative weight {w} at atom {g}")
            if w > 0:
                clean[tuple(g)] = float(w)
        object.__setattr__(self, "atoms", clean)

    # -- constructors ----------------------------------------------------

    @classmethod
    def point_mass(cls, group: GroupDescriptor, g: Element, mass: float = 1.0):
        return cls(group, {tuple(g): mass})

    @classmethod
    def from_atoms(cls, group: GroupDescriptor, pairs):
        atoms: dict[Element, float] = {}
        for g, w in pairs:
            g = tuple(g)
            atoms[g] = atoms.get(g, 0.0) + float(w)
        return cls(group, atoms)

    @classmethod
    def uniform_on(cls, group: GroupDescriptor, elements, total: float = 1.0):
        elements = list(elements)
        if not elements:
            raise PreconditionError("uniform measure needs a nonempty support")
        w = total / len(elements)
        return cls.from_atoms(group, ((g, w) for g in elements))

    @classmethod
    def from_density(cls, group: GroupDescriptor, pairs):
        """Grid-density view: each cell carries density * cell volume."""
        vol = group.cell_volume
        return cls.from_atoms(group, ((g, d * vol) for g, d in pairs))

    @classmethod
    def uniform_interval(
        cls, group: GroupDescriptor, lo: float, hi: float, total: float = 1.0,
        closed: bool = True,
    ):
        """Grid-uniform probability mass on the interval [lo, hi] of a 1-d grid.

        With ``closed=False`` the right endpoint cell is excluded, which is
        the grid-exact discretization of the uniform density on [lo, hi).
        """
        if group.dimension != 1 or group.kind == "free":
            raise PreconditionError("uniform_interval needs a 1-d grid-like group")
        q = group.resolution if group.kind == "real-grid" else 1
        if group.kind == "torus-grid":
            q = group.size
        a = math.ceil(lo * q - 1e-9)
        b = math.floor(hi * q + 1e-9)
        if not closed:
            b -= 1
        cells = [(c,) for c in range(a, b + 1)]
        if group.kind == "torus-grid":
            cells = sorted({(c % group.size,) for (c,) in cells})
        return cls.uniform_on(group, cells, total=total)

    @classmethod
    def simple_random_walk(cls, group: GroupDescriptor, step: int = 1):
        """Uniform measure on the +-step generators of a lattice-like group."""
        if group.kind == "free":
            letters = [(i,) for i in range(1, group.dimension + 1)]
            gens = letters + [group.inverse(w) for w in letters]
            return cls.uniform_on(group, gens)
        gens = []
        for axis in range(group.dimension):
            e = [0] * group.dimension
            e[axis] = step
            gens.append(tuple(e))
            gens.append(group.inverse(tuple(e)))
        return cls.uniform_on(group, gens)

    # -- queries ----------------------------------------------------------

    @property
    def total_mass(self) -> float:
        return float(sum(self.atoms.values()))

    def mass_at(self, g: Element) -> float:
        return self.atoms.get(tuple(g), 0.0)

    def density_at(self, g: Element) -> float:
        return self.mass_at(g) / self.group.cell_volume

    def support(self) -> list[Element]:
        return sorted(self.atoms, key=self.group.sort_key)

    def items(self):
        for g in self.support():
            yield g, self.atoms[g]

    def is_symmetric(self, tol: float = 0.0) -> bool:
        for g, w in self.atoms.items():
            if abs(self.atoms.get(self.group.inverse(g), 0.0) - w) > tol:
                return False
        return True

    def scaled(self, factor: float) -> "GroupMeasure":
        return GroupMeasure(self.group, {g: w * factor for g, w in self.atoms.items()})

    def __len__(self) -> int:
        return len(self.atoms)


# -- operations -----------------------------------------------------------


def convolve(
    a: GroupMeasure, b: GroupMeasure, cap: int = DEFAULT_SUPPORT_CAP
) -> GroupMeasure:
    """Convolution: mass of g is the sum of a(h)*b(k) over h*k = g."""
    if a.group != b.group:
        raise DescriptorMismatchError(
            f"cannot convolve measures on {a.group.kind} and {b.group.kind} groups"
        )
    g = a.group
    out: dict[Element, float] = {}
    compose = g.compose
    for h, wa in a.atoms.items():
        for k, wb in b.atoms.items():
            key = compose(h, k)
            out[key] = out.get(key, 0.0) + wa * wb
        if len(out) > cap:
            raise ResourceLimitError(
                f"convolution support exceeded the cap of {cap} atoms"
            )
    return GroupMeasure(g, out)


def convolution_power(
    a: GroupMeasure, n: int, cap: int = DEFAULT_SUPPORT_CAP
) -> GroupMeasure:
    """The n-fold convolution a * a * ... * a (n = 0 gives the point mass at e)."""
    if n < 0:
        raise PreconditionError("convolution power must be >= 0")
    result = GroupMeasure.point_mass(a.group, a.group.identity())
    for _ in range(n):
        result = convolve(result, a, cap=cap)
    return result


def involute(a: GroupMeasure) -> GroupMeasure:
    """The adjoint measure g -> a(g^{-1}); total mass is preserved exactly."""
    inv = a.group.inverse
    return GroupMeasure(a.group, {inv(g): w for g, w in a.atoms.items()})


def symmetrize(a: GroupMeasure, cap: int = DEFAULT_SUPPORT_CAP) -> GroupMeasure:
    """The positive-type measure a * a^.  Always symmetric."""
    return convolve(a, involute(a), cap=cap)


def mass_on_set(a: GroupMeasure, cells) -> float:
    """Total mass carried by the atoms lying in the given finite set."""
    wanted = {tuple(c) for c in cells}
    return float(sum(w for g, w in a.atoms.items() if g in wanted))


def truncate(a: GroupMeasure, radius: float) -> GroupMeasure:
    """Restriction to the word/Euclidean ball of the given radius."""
    if radius < 0:
        raise PreconditionError("truncation radius must be >= 0")
    norm = a.group.norm
    return GroupMeasure(
        a.group, {g: w for g, w in a.atoms.items() if norm(g) <= radius + 1e-12}
    )


def regularize(a: GroupMeasure, epsilon: float, radius: float) -> GroupMeasure:
    """Add epsilon times the Haar-uniform mass on the radius ball.

    The total mass grows by exactly epsilon * (number of ball cells) *
    (cell volume), i.e. by epsilon times the discrete Haar volume of the
    ball.  On the discrete kinds the Haar measure is counting measure.
    """
    if epsilon <= 0:
        raise PreconditionError("epsilon must be > 0")
    vol = a.group.cell_volume
    out = dict(a.atoms)
    for g in a.group.ball(radius):
        out[g] = out.get(g, 0.0) + epsilon * vol
    return GroupMeasure(a.group, out)


# -- serialization ----------------------------------------------------------

_KIND_FIELDS = {
    "lattice": ("dimension",),
    "free": ("dimension",),
    "real-grid": ("dimension", "resolution"),
    "torus-grid": ("dimension", "size"),
}


def measure_to_text(a: GroupMeasure) -> str:
    """Serialize to the line-based interchange format.

    Header: format tag, then the group kind and its parameters.  Body: one
    ``atom`` record per support element with coordinates and weight, in
    deterministic (length-then-lexicographic) order.
    """
    g = a.group
    lines = ["gaplab-measure 1"]
    params = " ".join(f"{name}={getattr(g, name)}" for name in _KIND_FIELDS[g.kind])
    lines.append(f"group {g.kind} {params}".rstrip())
    for el, w in a.items():
        fields = ["atom", *(str(c) for c in el), repr(w)]
        lines.append(" ".join(fields))
    return "\n".join(lines) + "\n"


def measure_from_text(text: str) -> GroupMeasure:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != "gaplab-measure 1":
        raise PreconditionError("not a gaplab-measure document")
    head = lines[1].split()
    if head[0] != "group" or head[1] not in _KIND_FIELDS:
        raise PreconditionError(f"bad group header: {lines[1]!r}")
    kwargs = {"kind": head[1]}
    for tok in head[2:]:
        name, _, val = tok.partition("=")
        kwargs[name] = int(val)
    group = GroupDescriptor(**kwargs)
    atoms = []
    for ln in lines[2:]:
        parts = ln.split()
        if parts[0] != "atom":
            raise PreconditionError(f"bad atom record: {ln!r}")
        coords = tuple(int(c) for c in parts[1:-1])
        atoms.append((coords, float(parts[-1])))
    return GroupMeasure.from_atoms(group, atoms)
