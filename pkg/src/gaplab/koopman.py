"""Averaging operators of discretized actions and their discrepancies.

The discrepancy of a measure mu under a measure-preserving action is the
operator norm of the averaging operator on zero-mean square-summable
functions.  For pure translation actions the operator diagonalizes in the
discrete Fourier basis, which gives both a fast apply (FFT multiplier)
and an exact character oracle; the generic path applies the measure atom
by atom through cell permutations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .actions import ActionSpace
from .errors import DescriptorMismatchError, PreconditionError, UnsupportedKindError
from .measures import GroupMeasure
from .operators import (
    LinearOperatorHandle,
    NormResult,
    operator_norm_self_adjoint,
)
from .regular_norm import NormEstimate, amenable_norm, berg_christensen_estimate


def _axes(shape) -> tuple[int, ...]:
    return tuple(range(len(shape)))


class KoopmanAveragingOperator:
    """The operator phi -> integral of phi(g^{-1} x) d mu(g), compressed to
    the cell space, with an optional projection onto zero-mean functions.

    ``apply_l2`` is the raw averaging in the natural cell coordinates.
    ``handle``/``adjoint_handle`` expose the zero-mean block in the flat
    coordinates u = sqrt(weights) * phi, in which the L2(nu) norm is the
    Euclidean norm, as required by the spectral routines.
    """

    def __init__(self, space: ActionSpace, measure: GroupMeasure):
        if measure.group != space.group:
            raise DescriptorMismatchError(
                "measure and action space live on different groups"
            )
        self.space = space
        self.measure = measure
        self._sqrtw = np.sqrt(space.weights)
        self._atoms = list(measure.items())
        self._perms = None
        self._multiplier_raw = None
        self._multiplier = None
        if space.is_translation:
            self._multiplier_raw = self._build_multiplier()
            self._multiplier = self._multiplier_raw.copy()
            # zero-mean projection = kill the DC eigenvalue
            self._multiplier.flat[0] = 0.0
        else:
            self._perms = [
                (space.koopman_permutation(g), w) for g, w in self._atoms
            ]

    # -- raw averaging ------------------------------------------------------

    def apply_l2(self, phi: np.ndarray) -> np.ndarray:
        """Averaging without the zero-mean projection (natural coordinates)."""
        phi = np.asarray(phi, dtype=float)
        if self._multiplier_raw is not None:
            shape = self.space.grid_shape
            spec = np.fft.rfftn(phi.reshape(shape))
            out = np.fft.irfftn(spec * self._multiplier_raw, s=shape, axes=_axes(shape))
            return out.reshape(phi.shape)
        out = np.zeros_like(phi)
        for perm, w in self._perms:
            out += w * phi[perm]
        return out

    def mean_of(self, phi: np.ndarray) -> float:
        return float(np.dot(self.space.weights, phi))

    # -- zero-mean handles ----------------------------------------------------

    def _build_multiplier(self) -> np.ndarray:
        """rfft-layout eigenvalue grid of the raw translation operator.

        pi(g) phi = phi(g^{-1} .) shifts a grid function by +v(g), whose
        rfft symbol at frequency m is exp(-2 pi i <m, v(g)> / N).
        """
        shape = self.space.grid_shape
        freq_axes = [np.fft.fftfreq(n, d=1.0 / n).astype(np.int64) for n in shape]
        freq_axes[-1] = np.fft.rfftfreq(shape[-1], d=1.0 / shape[-1]).astype(np.int64)
        mult = np.zeros(tuple(len(ax) for ax in freq_axes), dtype=complex)
        grids = np.meshgrid(*freq_axes, indexing="ij")
        n = shape[0]
        for g, w in self._atoms:
            vec = self.space.translation_vector(g)
            phase = sum(m * v for m, v in zip(grids, vec))
            mult += w * np.exp(-2j * np.pi * phase / n)
        return mult

    def _flat_apply(self, adjoint: bool):
        space = self.space
        sqrtw = self._sqrtw
        if self._multiplier is not None:
            mult = np.conj(self._multiplier) if adjoint else self._multiplier
            shape = space.grid_shape

            def apply(u: np.ndarray) -> np.ndarray:
                spec = np.fft.rfftn(u.reshape(shape))
                return np.fft.irfftn(spec * mult, s=shape, axes=_axes(shape)).reshape(u.shape)

            return apply

        perms = [
            (space.koopman_permutation(space.group.inverse(g)), w)
            for g, w in self._atoms
        ] if adjoint else self._perms

        def apply(u: np.ndarray) -> np.ndarray:
            phi = u / sqrtw
            out = np.zeros_like(phi)
            for perm, w in perms:
                out += w * phi[perm]
            out = sqrtw * out
            return out - np.dot(sqrtw, out) * sqrtw

        return apply

    def handle(self) -> LinearOperatorHandle:
        return LinearOperatorHandle(
            dimension=self.space.n_cells,
            apply=self._flat_apply(adjoint=False),
            self_adjoint=self.measure.is_symmetric(),
            nonnegative=False,
        )

    def adjoint_handle(self) -> LinearOperatorHandle:
        return LinearOperatorHandle(
            dimension=self.space.n_cells,
            apply=self._flat_apply(adjoint=True),
            self_adjoint=self.measure.is_symmetric(),
            nonnegative=False,
        )

    def symmetrized_handle(self) -> LinearOperatorHandle:
        """T T* in one pass; on multiplier spaces the symbols fuse to |m|^2."""
        if self._multiplier is not None:
            mult = np.abs(self._multiplier) ** 2
            shape = self.space.grid_shape

            def apply(u: np.ndarray) -> np.ndarray:
                spec = np.fft.rfftn(u.reshape(shape))
                return np.fft.irfftn(spec * mult, s=shape, axes=_axes(shape)).reshape(u.shape)

            return LinearOperatorHandle(
                dimension=self.space.n_cells, apply=apply,
                self_adjoint=True, nonnegative=True,
            )
        fwd = self._flat_apply(adjoint=False)
        adj = self._flat_apply(adjoint=True)
        return LinearOperatorHandle(
            dimension=self.space.n_cells,
            apply=lambda u: fwd(adj(u)),
            self_adjoint=True,
            nonnegative=True,
        )

    def rayleigh(self, phi: np.ndarray) -> float:
        """<pi(mu) phi, phi> in L2(nu) for a zero-mean phi."""
        out = self.apply_l2(phi)
        return float(np.dot(self.space.weights, out * phi))


def discrepancy(
    space: ActionSpace,
    mu: GroupMeasure,
    tol: float = 1e-8,
    max_iter: int = 200_000,
    seed: int = 7,
) -> NormResult:
    """Norm of the averaging operator on zero-mean functions.

    Always computed through the symmetrization route: the norm is the
    square root of the top eigenvalue of T T*, obtained by seeded power
    iteration, so the result is deterministic given the seed.
    """
    op = KoopmanAveragingOperator(space, mu)
    res = operator_norm_self_adjoint(
        op.symmetrized_handle(), tol=tol, max_iter=max_iter, seed=seed
    )
    return NormResult(
        value=float(math.sqrt(max(res.value, 0.0))),
        residual=res.residual,
        iterations=res.iterations,
    )


def character_norm(space: ActionSpace, mu: GroupMeasure, freq_cutoff: int) -> float:
    """Exact diagonalization bound for translation actions.

    The eigenvalue of the averaging operator at the character m of the
    cell grid is mu-hat evaluated along the translation vectors; the
    returned value is the max of |eigenvalue| over nonzero characters
    with sup-norm at most ``freq_cutoff``.  With ``freq_cutoff`` spanning
    the grid dual this equals the discrepancy of the discretized action
    exactly.
    """
    if not space.is_translation:
        raise UnsupportedKindError(
            f"character oracle needs a translation action, got {space.kind}"
        )
    if mu.group != space.group:
        raise DescriptorMismatchError("measure and action space group mismatch")
    shape = space.grid_shape
    mass_grid = np.zeros(shape)
    for g, w in mu.items():
        mass_grid[space.translation_vector(g)] += w
    spectrum = np.fft.fftn(mass_grid)
    mags = np.abs(spectrum)
    freqs = [np.fft.fftfreq(m, d=1.0 / m).astype(np.int64) for m in shape]
    grids = np.meshgrid(*freqs, indexing="ij")
    keep = np.ones(shape, dtype=bool)
    for gax in grids:
        keep &= np.abs(gax) <= freq_cutoff
    keep.flat[0] = False  # exclude the trivial character
    if not keep.any():
        raise PreconditionError("freq_cutoff excludes every nonzero character")
    return float(mags[keep].max())


def character_line_scan(
    mu: GroupMeasure, slope: float, freq_cutoff: int
) -> tuple[float, tuple[int, int]]:
    """Continuum character scan along the line of the given slope.

    For the flow t -> (t, slope * t) the character (m1, m2) sees the
    1-d transform of the time measure at theta = m1 + slope * m2; the
    best frequency pair minimizes |theta|.  The scan trusts the
    discretized time measure only below its Nyquist frequency (half the
    grid resolution), since beyond it the transform aliases back to 1.
    Returns (value, (m1, m2)).
    """
    if mu.group.dimension != 1:
        raise PreconditionError("line scan needs a 1-d time measure")
    times = np.array([mu.group.value(g)[0] for g in mu.atoms])
    weights = np.array([mu.atoms[g] for g in mu.atoms])
    spacings = np.diff(np.unique(times))
    nyquist = 0.5 / spacings.min() if spacings.size else math.inf

    def transform(theta: float) -> float:
        return float(np.abs(np.dot(weights, np.exp(-2j * np.pi * times * theta))))

    best, best_m = 0.0, (0, 0)
    for m2 in range(0, freq_cutoff + 1):
        if m2 == 0:
            candidates = list(range(1, min(freq_cutoff, 8) + 1))
        else:
            center = -round(slope * m2)
            candidates = [c for c in (center - 1, center, center + 1)
                          if abs(c) <= freq_cutoff]
        for m1 in candidates:
            if m1 == 0 and m2 == 0:
                continue
            theta = m1 + slope * m2
            if abs(theta) > nyquist:
                continue
            val = transform(theta)
            if val > best:
                best, best_m = val, (m1, m2)
    return best, best_m


@dataclass(frozen=True)
class VerifyReport:
    """Outcome of one lower-bound verification run."""

    delta: float
    regular_norm: float
    regular_method: str
    tol: float
    hypothesis_ok: bool
    violations: tuple[str, ...]
    passed: bool | None  # None when the hypotheses fail: nothing is asserted
    delta_residual: float
    notes: tuple[str, ...] = field(default_factory=tuple)

    @property
    def asserted(self) -> bool:
        return self.passed is not None


def check_hypotheses(space: ActionSpace, mu: GroupMeasure) -> list[str]:
    """Discrete surrogates for the hypotheses under which the lower bound
    is proved.

    Every space must pass the atomless surrogate (no cell at/above the
    atom threshold).  For actions of grid-kind groups the free-orbit
    surrogate is additionally required: no non-identity support atom may
    fix a cell, and the support orbit of the base cell must have mass
    below 1/2.  Discrete group kinds need no orbit condition (their
    specialization of the bound holds without it).
    """
    violations = []
    wmax = float(space.weights.max())
    if wmax >= space.atom_threshold:
        violations.append(
            f"atomless surrogate fails: a cell carries mass {wmax:.6g} "
            f">= threshold {space.atom_threshold}"
        )
    if mu.group.is_grid:
        identity = mu.group.identity()
        offenders = []
        for g, _ in mu.items():
            if g == identity:
                continue
            if space.has_fixed_cell(g):
                offenders.append(g)
        if offenders:
            violations.append(
                f"free-orbit surrogate fails: support atoms {offenders[:3]} fix cells"
            )
        orbit = space.orbit(space.base_cell, [g for g, _ in mu.items()])
        mass = space.mass_of(orbit)
        if mass > 0.5 - 1e-12:
            if mass >= 1.0 - 1e-12:
                violations.append("orbit covers the space")
            else:
                violations.append(
                    f"support orbit of the base cell has mass {mass:.6g} >= 1/2"
                )
    return violations


def verify_lower_bound(
    space: ActionSpace,
    mu: GroupMeasure,
    regular_norm_method: str = "auto",
    tol: float = 1e-3,
    seed: int = 7,
    n_max: int = 50,
    max_iter: int = 200_000,
) -> VerifyReport:
    """Compute both sides of the universal bound and compare them.

    The report carries the discrepancy estimate, the chosen
    regular-representation estimate, and the boolean delta >= lambda - tol.
    When the hypothesis surrogates fail the inequality is NOT asserted
    (it can genuinely fail, e.g. for orbit-covering measures) and
    ``passed`` is None.
    """
    if mu.total_mass <= 0:
        raise PreconditionError("measure must be positive")
    violations = check_hypotheses(space, mu)
    disc = discrepancy(space, mu, tol=tol, max_iter=max_iter, seed=seed)
    est = _regular_estimate(mu, regular_norm_method, n_max)
    notes = []
    if violations:
        passed = None
        notes.append("inequality not asserted (hypothesis violation: %s)"
                     % "; ".join(violations))
    else:
        passed = bool(disc.value >= est.value - tol)
    return VerifyReport(
        delta=disc.value,
        regular_norm=est.value,
        regular_method=est.method,
        tol=tol,
        hypothesis_ok=not violations,
        violations=tuple(violations),
        passed=passed,
        delta_residual=disc.residual,
        notes=tuple(notes),
    )


def _regular_estimate(mu: GroupMeasure, method: str, n_max: int) -> NormEstimate:
    if method == "auto":
        method = "amenable" if mu.group.is_abelian else "berg-christensen"
    if method in ("amenable", "amenable-mass"):
        return amenable_norm(mu)
    if method == "berg-christensen":
        return berg_christensen_estimate(mu, n_max=n_max)
    raise PreconditionError(f"unknown regular-norm method {method!r}")
