"""Group descriptor and measure algebra tests."""

import itertools
import math

import numpy as np
import pytest

from gaplab import (
    DescriptorMismatchError,
    GroupDescriptor,
    GroupMeasure,
    ResourceLimitError,
    convolution_power,
    convolve,
    involute,
    mass_on_set,
    measure_from_text,
    measure_to_text,
    regularize,
    symmetrize,
    truncate,
)

Z = GroupDescriptor(kind="lattice", dimension=1)
Z2 = GroupDescriptor(kind="lattice", dimension=2)
F2 = GroupDescriptor(kind="free", dimension=2)


def naive_reduce(word):
    """Independent reduction used as the oracle for free-group products."""
    out = []
    for letter in word:
        if out and out[-1] == -letter:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


def random_measure(group, rng, n_atoms=4, reach=3):
    atoms = {}
    for _ in range(n_atoms):
        if group.kind == "free":
            length = int(rng.integers(0, 3))
            word = []
            for _ in range(length):
                letter = int(rng.choice([-2, -1, 1, 2]))
                word.append(letter)
            g = naive_reduce(word)
        else:
            g = tuple(int(c) for c in rng.integers(-reach, reach + 1, group.dimension))
        atoms[g] = atoms.get(g, 0.0) + float(rng.uniform(0.1, 2.0))
    return GroupMeasure(group, atoms)


class TestGroupLaws:
    def test_identity_and_inverse_laws_on_samples(self):
        rng = np.random.default_rng(0)
        for group in (Z, Z2, F2):
            mu = random_measure(group, rng, n_atoms=6)
            e = group.identity()
            for g in mu.support():
                assert group.compose(g, e) == g
                assert group.compose(e, g) == g
                assert group.compose(g, group.inverse(g)) == e

    def test_associativity_on_sampled_triples(self):
        rng = np.random.default_rng(1)
        for group in (Z2, F2):
            elems = random_measure(group, rng, n_atoms=9).support()
            for a, b, c in itertools.islice(itertools.product(elems, repeat=3), 200):
                assert group.compose(group.compose(a, b), c) == group.compose(
                    a, group.compose(b, c)
                )

    def test_haar_weight_translation_invariant_on_grids(self):
        grid = GroupDescriptor(kind="real-grid", dimension=1, resolution=8)
        cells = [(c,) for c in range(-4, 5)]
        shift = (3,)
        shifted = [grid.compose(shift, c) for c in cells]
        weight = lambda cell_set: len(cell_set) * grid.cell_volume
        assert weight(shifted) == weight(cells)
        assert grid.cell_volume > 0

    def test_torus_wraps(self):
        t = GroupDescriptor(kind="torus-grid", dimension=2, size=8)
        assert t.compose((7, 3), (2, 6)) == (1, 1)
        assert t.inverse((3, 0)) == (5, 0)


class TestConvolve:
    def test_point_masses_compose(self):
        a = GroupMeasure.point_mass(F2, (1,))
        b = GroupMeasure.point_mass(F2, (-1, 2))
        c = convolve(a, b)
        assert c.support() == [(2,)]
        assert c.total_mass == pytest.approx(1.0, abs=0)

    def test_srw_square_binomial(self):
        srw = GroupMeasure.simple_random_walk(Z)
        sq = convolve(srw, srw)
        assert sq.mass_at((-2,)) == pytest.approx(0.25)
        assert sq.mass_at((0,)) == pytest.approx(0.5)
        assert sq.mass_at((2,)) == pytest.approx(0.25)

    def test_free_uniform_square_support(self):
        # oracle: enumerate all 16 generator products and reduce independently
        gens = [(1,), (-1,), (2,), (-2,)]
        products = {naive_reduce(a + b) for a in gens for b in gens}
        assert len(products) == 13
        assert sum(len(w) == 2 for w in products) == 12

        mu = GroupMeasure.simple_random_walk(F2)
        sq = convolve(mu, mu)
        assert sq.total_mass == 1.0
        assert set(sq.atoms) == products

    def test_mass_multiplies(self):
        rng = np.random.default_rng(2)
        for group in (Z2, F2):
            a = random_measure(group, rng)
            b = random_measure(group, rng)
            c = convolve(a, b)
            assert c.total_mass == pytest.approx(
                a.total_mass * b.total_mass, rel=1e-10
            )

    def test_associative(self):
        rng = np.random.default_rng(3)
        for group in (Z, F2):
            a, b, c = (random_measure(group, rng) for _ in range(3))
            left = convolve(convolve(a, b), c)
            right = convolve(a, convolve(b, c))
            assert set(left.atoms) == set(right.atoms)
            for g in left.atoms:
                assert left.atoms[g] == pytest.approx(right.atoms[g], rel=1e-10)

    def test_group_mismatch(self):
        with pytest.raises(DescriptorMismatchError):
            convolve(
                GroupMeasure.point_mass(Z, (0,)), GroupMeasure.point_mass(Z2, (0, 0))
            )

    def test_support_cap(self):
        mu = GroupMeasure.simple_random_walk(F2)
        with pytest.raises(ResourceLimitError, match="cap"):
            convolution_power(mu, 10, cap=100)


class TestInvolute:
    def test_point_mass(self):
        assert involute(GroupMeasure.point_mass(F2, (1, 2))).support() == [(-2, -1)]

    def test_relabeling_on_z(self):
        mu = GroupMeasure.from_atoms(Z, [((2,), 0.3), ((5,), 0.7)])
        out = involute(mu)
        assert out.mass_at((-2,)) == 0.3
        assert out.mass_at((-5,)) == 0.7
        assert out.total_mass == mu.total_mass

    def test_symmetric_fixed_point(self):
        mu = GroupMeasure.simple_random_walk(Z2)
        assert involute(mu).atoms == mu.atoms

    def test_involution_squared_is_identity(self):
        rng = np.random.default_rng(4)
        for group in (Z2, F2):
            mu = random_measure(group, rng)
            assert involute(involute(mu)).atoms == mu.atoms

    def test_antihomomorphism(self):
        rng = np.random.default_rng(5)
        for group in (Z2, F2):
            a = random_measure(group, rng)
            b = random_measure(group, rng)
            left = involute(convolve(a, b))
            right = convolve(involute(b), involute(a))
            assert set(left.atoms) == set(right.atoms)
            for g in left.atoms:
                assert left.atoms[g] == pytest.approx(right.atoms[g], rel=1e-12)


class TestSymmetrize:
    def test_point_mass_goes_to_identity(self):
        out = symmetrize(GroupMeasure.point_mass(F2, (1, 2, 1)))
        assert out.support() == [()]

    def test_scaled_point(self):
        out = symmetrize(GroupMeasure.point_mass(Z, (1,), mass=3.0))
        assert out.mass_at((0,)) == pytest.approx(9.0)

    def test_free_uniform_identity_weight(self):
        out = symmetrize(GroupMeasure.simple_random_walk(F2))
        assert out.mass_at(()) == pytest.approx(0.25, abs=0)

    def test_symmetric_and_positive_at_identity(self):
        rng = np.random.default_rng(6)
        for group in (Z2, F2):
            mu = random_measure(group, rng)
            eta = symmetrize(mu)
            assert eta.is_symmetric(tol=1e-12)
            # identity mass is the sum of squared atom masses
            expect = sum(w * w for w in mu.atoms.values())
            assert eta.mass_at(group.identity()) == pytest.approx(expect, rel=1e-12)
            assert eta.mass_at(group.identity()) > 0


class TestMassOnSet:
    def test_point(self):
        assert mass_on_set(GroupMeasure.point_mass(Z, (0,)), [(0,)]) == 1.0

    def test_srw_square_at_zero(self):
        sq = convolution_power(GroupMeasure.simple_random_walk(Z), 2)
        assert mass_on_set(sq, [(0,)]) == pytest.approx(0.5)

    def test_binomial_identity(self):
        # oracle: central binomial return probability, checked at n = 5
        walk = convolution_power(GroupMeasure.simple_random_walk(Z), 10)
        assert mass_on_set(walk, [(0,)]) == pytest.approx(
            math.comb(10, 5) / 4**5, rel=1e-12
        )
        assert math.comb(10, 5) / 4**5 == 63 / 256

    def test_full_support_is_total_mass(self):
        rng = np.random.default_rng(7)
        mu = random_measure(Z2, rng)
        assert mass_on_set(mu, mu.support()) == pytest.approx(
            mu.total_mass, rel=1e-12
        )


class TestTruncate:
    def test_identity_ball_zero(self):
        mu = GroupMeasure.point_mass(Z, (0,))
        assert truncate(mu, 0).atoms == mu.atoms

    def test_drops_far_atoms(self):
        mu = GroupMeasure.from_atoms(Z, [((2,), 0.3), ((5,), 0.7)])
        out = truncate(mu, 3)
        assert out.atoms == {(2,): 0.3}

    def test_grid_uniform_halves(self):
        grid = GroupDescriptor(kind="real-grid", dimension=1, resolution=4)
        mu = GroupMeasure.uniform_on(grid, [(c,) for c in range(-8, 9)])
        out = truncate(mu, 1.0)
        assert out.total_mass == pytest.approx(9 / 17)

    def test_free_word_length(self):
        mu = GroupMeasure.from_atoms(F2, [((1, 2), 1.0), ((1, 2, 1), 2.0)])
        assert truncate(mu, 2).atoms == {(1, 2): 1.0}


class TestRegularize:
    def test_counting_on_z(self):
        zero = GroupMeasure(Z, {})
        out = regularize(zero, 1.0, 1)
        assert out.atoms == {(-1,): 1.0, (0,): 1.0, (1,): 1.0}
        assert out.total_mass == 3.0

    def test_point_plus_half(self):
        out = regularize(GroupMeasure.point_mass(Z, (0,)), 0.5, 1)
        assert out.total_mass == pytest.approx(2.5)
        assert out.mass_at((0,)) == pytest.approx(1.5)

    def test_small_epsilon_recovers(self):
        grid = GroupDescriptor(kind="real-grid", dimension=1, resolution=4)
        mu = GroupMeasure.uniform_on(grid, [(c,) for c in range(4)])
        eps = 1e-6
        out = regularize(mu, eps, 1.0)
        ball_volume = len(grid.ball(1.0)) * grid.cell_volume
        assert out.total_mass - mu.total_mass == pytest.approx(
            eps * ball_volume, rel=1e-9
        )

    def test_rejects_bad_epsilon(self):
        from gaplab import PreconditionError

        with pytest.raises(PreconditionError):
            regularize(GroupMeasure.point_mass(Z, (0,)), 0.0, 1)


class TestDensityView:
    def test_density_times_volume(self):
        grid = GroupDescriptor(kind="real-grid", dimension=1, resolution=8)
        mu = GroupMeasure.from_density(grid, [((0,), 2.0), ((3,), 4.0)])
        assert mu.mass_at((0,)) == pytest.approx(2.0 / 8)
        assert mu.density_at((3,)) == pytest.approx(4.0)
        assert mu.total_mass == pytest.approx(6.0 / 8)


class TestSerialization:
    @pytest.mark.parametrize("group", [Z, Z2, F2,
                                       GroupDescriptor(kind="real-grid", dimension=1, resolution=8),
                                       GroupDescriptor(kind="torus-grid", dimension=2, size=16)])
    def test_roundtrip(self, group):
        rng = np.random.default_rng(8)
        if group.kind == "torus-grid":
            mu = GroupMeasure.from_atoms(group, [((1, 2), 0.5), ((15, 0), 1.25)])
        else:
            mu = random_measure(group, rng)
        back = measure_from_text(measure_to_text(mu))
        assert back.group == mu.group
        assert back.atoms == mu.atoms

    def test_deterministic_order(self):
        mu = GroupMeasure.from_atoms(Z, [((3,), 1.0), ((-1,), 2.0)])
        text = measure_to_text(mu)
        assert text.index("-1") < text.index("3")
