"""Separated nets and volume-counting checks on discretized groups.

An A-separated net of a finite set is a subset whose A-translates are
pairwise disjoint.  Maximal nets sandwich Haar volumes: |N| mu(A) <=
mu(BA) and, for maximal nets, mu(B) <= |N| mu(AA^{-1}).  Everything here
is exact set arithmetic in Haar cell weights; the checks are theorems,
so a reported failure means an implementation bug, never bad luck.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import PreconditionError
from .groups import (
    Element,
    GroupDescriptor,
    inverse_set,
    power_set,
    product_set,
)


def haar(group: GroupDescriptor, cells) -> float:
    """Haar measure of a finite cell set: cardinality times cell volume."""
    return len(set(cells)) * group.cell_volume


@dataclass(frozen=True)
class NetInstance:
    """A separated net together with the data it was built from."""

    group: GroupDescriptor
    A: tuple
    B: tuple  # the base set whose power was netted (may equal span)
    n: int
    net: tuple
    span: tuple  # the set the net lives in (B^n)
    maximal: bool = True


def greedy_maximal_net(
    group: GroupDescriptor,
    span,
    A,
    B=None,
    n: int = 1,
) -> NetInstance:
    """Greedy maximal A-separated net of ``span`` in deterministic order.

    Points are visited in the group's lexicographic order and accepted
    iff their A-translate is disjoint from all accepted translates.  The
    result is maximal (no remaining point can be added), hence the span
    is covered by net * A * A^{-1}.
    """
    A = sorted({tuple(a) for a in A}, key=group.sort_key)
    if group.identity() not in A:
        raise PreconditionError("A must contain the identity")
    span = sorted({tuple(x) for x in span}, key=group.sort_key)
    covered: set[Element] = set()
    net: list[Element] = []
    for point in span:
        translate = [group.compose(point, a) for a in A]
        if any(t in covered for t in translate):
            continue
        net.append(point)
        covered.update(translate)
    return NetInstance(
        group=group,
        A=tuple(A),
        B=tuple(sorted({tuple(b) for b in B}, key=group.sort_key)) if B else tuple(),
        n=n,
        net=tuple(net),
        span=tuple(span),
    )


def net_is_separated(inst: NetInstance) -> bool:
    group = inst.group
    seen: set[Element] = set()
    for point in inst.net:
        translate = {group.compose(point, a) for a in inst.A}
        if translate & seen:
            return False
        seen |= translate
    return True


def net_is_maximal(inst: NetInstance) -> bool:
    """Exhaustive re-check: no point of the span can be added."""
    group = inst.group
    covered: set[Element] = set()
    for point in inst.net:
        covered.update(group.compose(point, a) for a in inst.A)
    for point in inst.span:
        if point in inst.net:
            continue
        translate = {group.compose(point, a) for a in inst.A}
        if not (translate & covered):
            return False
    return True


@dataclass(frozen=True)
class NetBoundsReport:
    net_size: int
    mu_A: float
    mu_spanA: float
    mu_span: float
    mu_AAinv: float
    packing_ok: bool  # |N| mu(A) <= mu(span A)
    covering_ok: bool  # mu(span) <= |N| mu(A A^{-1}), for maximal nets

    @property
    def all_ok(self) -> bool:
        return self.packing_ok and self.covering_ok


def verify_net_bounds(inst: NetInstance) -> NetBoundsReport:
    """Check both counting inequalities exactly in Haar cell weights."""
    group = inst.group
    span_a = product_set(group, inst.span, inst.A)
    aainv = product_set(group, inst.A, inverse_set(group, inst.A))
    mu_a = haar(group, inst.A)
    mu_span_a = haar(group, span_a)
    mu_span = haar(group, inst.span)
    mu_aainv = haar(group, aainv)
    packing = len(inst.net) * mu_a <= mu_span_a + 1e-12
    covering = (not inst.maximal) or (mu_span <= len(inst.net) * mu_aainv + 1e-12)
    return NetBoundsReport(
        net_size=len(inst.net),
        mu_A=mu_a,
        mu_spanA=mu_span_a,
        mu_span=mu_span,
        mu_AAinv=mu_aainv,
        packing_ok=packing,
        covering_ok=covering,
    )


@dataclass(frozen=True)
class NetRatioStudy:
    ratios: dict[int, float]
    c1: float
    c2: float
    k1: float
    k2: float
    k3: float
    within_bounds: bool


def net_ratio_study(
    group: GroupDescriptor,
    A1,
    A2,
    B,
    n_range,
) -> NetRatioStudy:
    """Cardinality ratios |N2|/|N1| of maximal nets at consecutive powers.

    For each n in the range, N1 is a maximal A1-net of B^n and N2 a
    maximal A2-net of B^{n-2}.  The growth constants k1, k2, k3 are
    measured on the same range (k1: mu(B^n A1)/mu(B^n), k2:
    mu(B^{n-2} A2)/mu(B^n), k3: mu(B^n)/mu(B^{n-2})), and the resulting
    window [c1, c2] must contain every measured ratio.
    """
    n_range = sorted(n_range)
    if not n_range or n_range[0] < 3:
        raise PreconditionError("the ratio study needs n >= 3 throughout")
    A1 = sorted({tuple(a) for a in A1}, key=group.sort_key)
    A2 = sorted({tuple(a) for a in A2}, key=group.sort_key)
    B = sorted({tuple(b) for b in B}, key=group.sort_key)

    powers = {0: [group.identity()]}
    for m in range(1, max(n_range) + 1):
        powers[m] = product_set(group, powers[m - 1], B)

    k1 = k2 = k3 = 0.0
    ratios = {}
    for n in n_range:
        bn, bn2 = powers[n], powers[n - 2]
        k1 = max(k1, haar(group, product_set(group, bn, A1)) / haar(group, bn))
        k2 = max(k2, haar(group, product_set(group, bn2, A2)) / haar(group, bn))
        k3 = max(k3, haar(group, bn) / haar(group, bn2))
        n1 = greedy_maximal_net(group, bn, A1, B=B, n=n)
        n2 = greedy_maximal_net(group, bn2, A2, B=B, n=n - 2)
        ratios[n] = len(n2.net) / len(n1.net)

    mu_a1 = haar(group, A1)
    mu_a2 = haar(group, A2)
    mu_a1a1 = haar(group, product_set(group, A1, inverse_set(group, A1)))
    mu_a2a2 = haar(group, product_set(group, A2, inverse_set(group, A2)))
    c1 = mu_a1 / (k3 * k1 * mu_a2a2)
    c2 = k2 * mu_a1a1 / mu_a2
    within = all(c1 - 1e-12 <= r <= c2 + 1e-12 for r in ratios.values())
    return NetRatioStudy(
        ratios=ratios, c1=c1, c2=c2, k1=k1, k2=k2, k3=k3, within_bounds=within
    )


@dataclass(frozen=True)
class CoveringWitness:
    S: tuple
    checked_powers: dict[int, bool] = field(default_factory=dict)

    @property
    def all_ok(self) -> bool:
        return all(self.checked_powers.values())


def covering_witness(
    group: GroupDescriptor,
    A,
    B,
    k: int,
    verify_up_to: int = 3,
) -> CoveringWitness:
    """Greedy finite set S with B^k A contained in B S.

    Scanning B^k A in deterministic order, every still-uncovered point h
    is adopted into S and its translate B h is marked covered (B contains
    the identity, so h covers itself).  The containment B^{k+n-1} A
    within B^n S then holds for every n >= 1; it is re-verified here by
    exhaustive set arithmetic for n up to ``verify_up_to``.
    """
    A = sorted({tuple(a) for a in A}, key=group.sort_key)
    B = sorted({tuple(b) for b in B}, key=group.sort_key)
    if group.identity() not in B:
        raise PreconditionError("B must contain the identity")
    target = product_set(group, power_set(group, B, k), A)
    covered: set[Element] = set()
    chosen: list[Element] = []
    for h in target:
        if h in covered:
            continue
        chosen.append(h)
        covered.update(group.compose(b, h) for b in B)
    checks = {}
    for n in range(1, verify_up_to + 1):
        lhs = set(product_set(group, power_set(group, B, k + n - 1), A))
        rhs = set(product_set(group, power_set(group, B, n), chosen))
        checks[n] = lhs <= rhs
    return CoveringWitness(S=tuple(chosen), checked_powers=checks)
