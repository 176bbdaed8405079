"""Estimators for the regular-representation norm of a finite positive measure.

The workhorse is the convolution-power estimate: for the symmetrized
measure eta = mu * mu^, the masses eta^{*n}(F) on a fixed neighborhood F
of the identity satisfy (eta^{*n}(F))^{1/n} -> ||lambda(eta)|| =
||lambda(mu)||^2 (Berg-Christensen), monotonically from below for
positive-type measures.  Closed-form oracles for abelian groups (Fourier
transform), amenable kinds (Kesten mass), and the free-group simple
random walk (radial birth-death chain) cross-validate it.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError, ResourceLimitError, UnsupportedKindError
from .groups import FREE, GroupDescriptor
from .measures import (
    DEFAULT_SUPPORT_CAP,
    GroupMeasure,
    convolve,
    mass_on_set,
    symmetrize,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class NormEstimate:
    """A lower-bound estimate of the regular-representation norm."""

    value: float
    method: str  # berg-christensen | fourier-abelian | amenable-mass | free-radial
    sequence: list[tuple[int, float]] = field(default_factory=list)
    extrapolated: bool = False
    note: str = ""


# -- convolution-power estimate ------------------------------------------


def default_neighborhood(group: GroupDescriptor) -> list:
    """Smallest convenient identity neighborhood: {e} on discrete kinds,
    the unit grid ball on grid kinds."""
    if group.is_discrete:
        return [group.identity()]
    return group.ball(1.0)


def berg_christensen_estimate(
    mu: GroupMeasure,
    F=None,
    n_max: int = 50,
    cap: int = DEFAULT_SUPPORT_CAP,
) -> NormEstimate:
    """Convolution-power lower bound for the regular-representation norm.

    Forms eta = mu * mu^ and reports (eta^{*n}(F))^{1/(2n)} for
    n = 1..n_max; the final term is the returned value.  Each term is a
    certified lower bound (up to discretization) and the sequence is
    expected to be nondecreasing for the positive-type eta; a decrease
    beyond 1e-10 is logged as a warning rather than raised, since no
    quantitative monotonicity statement backs the general case.

    For the uniform measure on free-group generators with F = {e} the
    exact radial oracle replaces convolution powers (no exponential
    support growth).
    """
    if n_max < 2:
        raise PreconditionError("n_max must be >= 2")
    group = mu.group
    if F is None:
        F = default_neighborhood(group)
    F = [tuple(x) for x in F]
    if not F:
        raise PreconditionError("F must be a nonempty neighborhood of the identity")
    if group.identity() not in F:
        raise PreconditionError("F must contain the identity cell")

    if F == [group.identity()] and _is_uniform_generator_walk(mu):
        return _radial_estimate(mu, n_max)

    eta = symmetrize(mu, cap=cap)
    seq: list[tuple[int, float]] = []
    power = eta
    prev = -math.inf
    try:
        for n in range(1, n_max + 1):
            if n > 1:
                power = convolve(power, eta, cap=cap)
            raw = mass_on_set(power, F) ** (1.0 / (2 * n))
            if raw < prev - 1e-10:
                log.warning(
                    "convolution-power sequence decreased at n=%d (%.12g -> %.12g); "
                    "monotonicity is only heuristic for this input",
                    n, prev, raw,
                )
            prev = raw
            seq.append((n, raw))
    except ResourceLimitError as err:
        hint = ""
        if group.kind == FREE:
            hint = (
                " (free-group support grows exponentially; the radial oracle"
                " free_group_radial_return covers the uniform-generator walk)"
            )
        raise ResourceLimitError(str(err) + hint) from err
    return NormEstimate(value=seq[-1][1], method="berg-christensen", sequence=seq)


def _is_uniform_generator_walk(mu: GroupMeasure) -> bool:
    group = mu.group
    if group.kind != FREE or group.dimension < 2:
        return False
    k = group.dimension
    gens = {(i,) for i in range(1, k + 1)} | {(-i,) for i in range(1, k + 1)}
    if set(mu.atoms) != gens:
        return False
    weights = list(mu.atoms.values())
    return max(weights) - min(weights) <= 1e-15


def _radial_estimate(mu: GroupMeasure, n_max: int) -> NormEstimate:
    k = mu.group.dimension
    mass = mu.total_mass
    returns = _radial_return_sequence(k, 2 * n_max)
    seq = []
    for n in range(1, n_max + 1):
        # eta^{*n}({e}) = mass^{2n} * (2n-step return probability)
        raw = mass * returns[2 * n] ** (1.0 / (2 * n))
        seq.append((n, raw))
    return NormEstimate(
        value=seq[-1][1],
        method="free-radial",
        sequence=seq,
        note=f"radial birth-death oracle for the uniform walk on F_{k}",
    )


def free_group_radial_return(k: int, n: int) -> float:
    """Return probability at e of the simple random walk on F_k after n steps.

    Uses the distance-from-identity birth-death chain: from distance
    m >= 1 the walk moves to m+1 with probability (2k-1)/(2k) and to m-1
    with probability 1/(2k); from 0 it moves to 1 with probability 1.
    Odd n returns exactly 0.  Cost O(n^2), no word enumeration.
    """
    if n % 2 == 1:
        return 0.0
    return _radial_return_sequence(k, n)[n]


def _radial_return_sequence(k: int, n_steps: int) -> np.ndarray:
    """Return probabilities at distance 0 after 0..n_steps steps."""
    if k < 2:
        raise PreconditionError("radial oracle needs rank k >= 2")
    if n_steps < 0:
        raise PreconditionError("step count must be >= 0")
    p_up = (2 * k - 1) / (2 * k)
    p_down = 1 / (2 * k)
    dist = np.zeros(n_steps + 2)
    dist[0] = 1.0
    out = np.zeros(n_steps + 1)
    out[0] = 1.0
    for step in range(1, n_steps + 1):
        nxt = np.zeros_like(dist)
        nxt[1] += dist[0]
        nxt[2:] += dist[1:-1] * p_up
        nxt[0] += dist[1] * p_down
        nxt[1:-1] += dist[2:] * p_down
        dist = nxt
        out[step] = dist[0]
    return out


# -- closed-form oracles ---------------------------------------------------


def fourier_norm_abelian(
    mu: GroupMeasure,
    freq_bound: float = 0.5,
    freq_samples: int = 1001,
    freq_min: float = 0.0,
) -> NormEstimate:
    """Sup of |mu-hat| over a uniform frequency sample (abelian kinds only).

    The frequency 0 is always included when ``freq_min`` is 0 (the
    default), so the value is a lower bound on the true sup with a
    sampling-resolution caveat recorded in the note.
    """
    group = mu.group
    if not group.is_abelian:
        raise UnsupportedKindError(
            f"Fourier oracle needs an abelian group kind, got {group.kind}"
        )
    d = group.dimension
    if group.kind == "torus-grid":
        reach = int(freq_bound)
        axis = np.arange(-reach, reach + 1, dtype=float)
    else:
        axis = np.linspace(-freq_bound, freq_bound, freq_samples)
        if freq_min == 0.0:
            axis = np.union1d(axis, [0.0])
    grids = np.meshgrid(*([axis] * d), indexing="ij")
    xi = np.stack([g.ravel() for g in grids], axis=1)
    if freq_min > 0.0:
        keep = np.linalg.norm(xi, axis=1) >= freq_min - 1e-12
        xi = xi[keep]
        if xi.size == 0:
            raise PreconditionError("no frequencies left after the freq_min cut")
    values = np.array([group.value(g) for g in mu.atoms], dtype=float)
    weights = np.array([mu.atoms[g] for g in mu.atoms], dtype=float)
    best = 0.0
    chunk = 65536
    for start in range(0, xi.shape[0], chunk):
        block = xi[start : start + chunk]
        phases = np.exp(-2j * np.pi * (block @ values.T))
        best = max(best, float(np.abs(phases @ weights).max()))
    note = f"sup over {xi.shape[0]} sampled frequencies, |xi| <= {freq_bound}"
    if freq_min > 0:
        note += f", |xi| >= {freq_min}"
    return NormEstimate(value=best, method="fourier-abelian", note=note)


def amenable_norm(mu: GroupMeasure) -> NormEstimate:
    """Exact norm (= total mass) for generating measures on amenable kinds.

    All supported amenable kinds are abelian, where the norm of any
    positive measure equals |mu-hat(0)| = total mass, so symmetry of mu is
    not required; the generating-support condition is still checked and a
    violation reports the proper subgroup that the support generates.
    """
    group = mu.group
    if not group.is_abelian:
        raise UnsupportedKindError(
            f"amenable-mass oracle does not apply to group kind {group.kind}"
        )
    if not mu.atoms:
        raise PreconditionError("measure is zero")
    subgroup = _generated_subgroup_defect(group, list(mu.atoms))
    if subgroup is not None:
        raise PreconditionError(
            f"support does not generate the group: it generates {subgroup}"
        )
    return NormEstimate(value=mu.total_mass, method="amenable-mass")


def _generated_subgroup_defect(group: GroupDescriptor, atoms) -> str | None:
    """None if the atoms generate the whole grid group, else a description
    of the proper subgroup they do generate."""
    d = group.dimension
    rows = [list(a) for a in atoms if any(a)]
    if group.kind == "torus-grid":
        n = group.size
        rows += [[n if i == j else 0 for j in range(d)] for i in range(d)]
    if not rows:
        return "the trivial subgroup {e}"
    diag = _hermite_diagonal(rows, d)
    if diag is None:
        return "a sublattice of rank < dimension"
    if all(x == 1 for x in diag):
        return None
    if d == 1:
        return f"{diag[0]}Z (index {diag[0]})"
    return f"a sublattice with diagonal {tuple(diag)} (index {math.prod(diag)})"


def _hermite_diagonal(rows: list[list[int]], d: int) -> list[int] | None:
    """Diagonal of a column-style Hermite form of the row lattice; None if
    the rows do not span a finite-index sublattice."""
    mat = [row[:] for row in rows]
    diag = []
    col = 0
    for col in range(d):
        pivot = None
        for i, row in enumerate(mat):
            if row[col] != 0:
                pivot = i if pivot is None or abs(row[col]) < abs(mat[pivot][col]) else pivot
        while True:
            nonzero = [i for i, row in enumerate(mat) if row[col] != 0]
            if not nonzero:
                return None
            pivot = min(nonzero, key=lambda i: abs(mat[i][col]))
            done = True
            for i in nonzero:
                if i == pivot:
                    continue
                q = mat[i][col] // mat[pivot][col]
                mat[i] = [x - q * y for x, y in zip(mat[i], mat[pivot])]
                if mat[i][col] != 0:
                    done = False
            if done:
                break
        prow = mat.pop(pivot)
        if prow[col] < 0:
            prow = [-x for x in prow]
        diag.append(prow[col])
        # eliminate the pivot column from the remaining rows (already zero)
    return diag
