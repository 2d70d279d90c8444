import cmath
import math

import numpy as np
import pytest

from radialspec import (Atom, AtomicMeasure, boundary_value, m_minus,
                        period_monodromy, reflectionless_defect,
                        riccati_m_plus, spectral_density, weyl_disk)
from radialspec.measures import TailRule
from conftest import random_measure


def one_atom_m_plus(t1, b, z):
    """Hand-rolled one-atom m_plus at complex z, free beyond the atom."""
    k = cmath.sqrt(z)
    if k.imag < 0:
        k = -k
    m1 = b * (1j * k)
    c = cmath.cos(k * t1)
    s = cmath.sin(k * t1)
    f = c - s * m1 / k
    fp = k * s + c * m1
    return fp / f


class TestRiccati:
    def test_free(self):
        for kappa in (0.5, 1.0, 3.0):
            got = riccati_m_plus(AtomicMeasure(), -kappa ** 2).value
            assert got == pytest.approx(-kappa, abs=1e-13)

    def test_single_atom(self):
        mu = AtomicMeasure((Atom.from_b(1.0, 4.0),), 1.0)
        got = riccati_m_plus(mu, -1.0).value
        assert got == pytest.approx(-1.17676, abs=5e-6)
        assert got == pytest.approx(one_atom_m_plus(1.0, 4.0, -1.0), rel=1e-12)

    def test_wall(self):
        mu = AtomicMeasure((Atom(1.0, 1.0),), 1.0)
        got = riccati_m_plus(mu, -1.0).value
        assert got == pytest.approx(-1.0 / math.tanh(1.0), abs=1e-12)

    def test_base_point_between_atoms(self):
        pairs = [(1.0, 4.0), (2.0, 9.0)]
        mu = AtomicMeasure.from_pairs(pairs)
        got = riccati_m_plus(mu, -1.0, t=1.5).value
        # only the atom at 2 matters from t = 1.5
        ref = one_atom_m_plus(0.5, 9.0, -1.0)
        assert got == pytest.approx(ref, rel=1e-12)

    def test_base_point_on_atom_rejected(self):
        mu = AtomicMeasure((Atom(1.0, 3.0),), 1.0)
        with pytest.raises(ValueError):
            riccati_m_plus(mu, -1.0, t=1.0)

    def test_herglotz_sweep(self, rng):
        for _ in range(200):
            mu = random_measure(rng, max_atoms=8)
            z = complex(rng.uniform(-2, 8), 10 ** rng.uniform(-3, 0.5))
            t = float(rng.uniform(0, 2))
            while any(a.t == t for a in mu.atoms):
                t += 1e-3
            assert riccati_m_plus(mu, z, t).value.imag > 0

    def test_deep_tail_reset_matches_truncation(self):
        # an atom 100 units out is invisible at z = -4
        far = AtomicMeasure.from_pairs([(1.0, 4.0), (150.0, 9.0)])
        near = AtomicMeasure.from_pairs([(1.0, 4.0)])
        a = riccati_m_plus(far, -4.0).value
        b = riccati_m_plus(near, -4.0).value
        assert a == pytest.approx(b, rel=1e-13)

    def test_periodic_tail_fixed_point(self):
        atoms = [(float(n), 4.0) for n in range(1, 30)]
        mu = AtomicMeasure.from_pairs(atoms, tail=TailRule.periodic(1.0))
        z = complex(-2.0, 0.0)
        m_per = riccati_m_plus(mu, z).value
        # truncating the tail far out changes nothing at this z
        finite = AtomicMeasure.from_pairs(atoms)
        m_fin = riccati_m_plus(finite, z).value
        assert m_per == pytest.approx(m_fin, rel=1e-10)

    def test_gap_tail_returns_disk_center(self):
        mu = AtomicMeasure.from_pairs([(1.0, 4.0)], tail=TailRule.gaps(3.0))
        s = riccati_m_plus(mu, -0.01)
        assert not s.converged
        assert s.uncertainty > 0


class TestMMinus:
    def test_free_left(self):
        mu = AtomicMeasure.from_pairs([(1.0, 4.0)], whole_line=True)
        got = m_minus(mu, 1.0, 0.0).value
        assert got == pytest.approx(1j, abs=1e-13)

    def test_free_whole_line_identity(self):
        free = AtomicMeasure(whole_line=True)
        for E in (0.5, 1.0, 4.0):
            mp = riccati_m_plus(free, E).value
            mm = m_minus(free, E).value
            assert -mm.conjugate() == pytest.approx(mp, abs=1e-13)
            assert mp == pytest.approx(1j * math.sqrt(E), abs=1e-13)

    def test_one_atom_closed_form(self):
        # atom at -1 with b = 4, z = -1: two explicit Moebius steps
        mu = AtomicMeasure.from_pairs([(-1.0, 4.0)], whole_line=True)
        got = m_minus(mu, -1.0, 0.0).value
        ch, sh = math.cosh(1.0), math.sinh(1.0)
        expected = -(4 * sh + ch) / (4 * ch + sh)
        assert got == pytest.approx(expected, rel=1e-12)

    def test_herglotz(self, rng):
        for _ in range(100):
            mu = random_measure(rng, max_atoms=6)
            shifted = mu.shift(4.0)
            z = complex(rng.uniform(-2, 6), 10 ** rng.uniform(-2, 0.5))
            assert m_minus(shifted, z, 3.9).value.imag > 0

    def test_wall_on_left(self):
        # wall at -1: Neumann restart, m_minus(0) from (1, 0) data
        mu = AtomicMeasure.from_pairs([(-1.0, math.inf)], whole_line=True)
        got = m_minus(mu, -1.0, 0.0).value
        # f(0) = cosh 1, f'(0) = sinh 1 from Neumann data at -1
        assert got == pytest.approx(-math.tanh(1.0), rel=1e-12)


class TestWeylDisk:
    def test_free_interval_shrinks(self):
        free = AtomicMeasure()
        radii = [weyl_disk(free, -1.0, n).radius for n in (1.0, 2.0, 4.0, 8.0)]
        assert all(b < a for a, b in zip(radii, radii[1:]))
        d = weyl_disk(free, -1.0, 8.0)
        assert d.center == pytest.approx(-1.0, abs=1e-6)
        assert d.radius < 1e-6

    def test_nesting_complex(self, rng):
        mu = AtomicMeasure.from_pairs([(1.0, 4.0), (2.5, 9.0)])
        z = complex(1.0, 0.5)
        prev = None
        for depth in (3.0, 4.5, 6.0, 8.0):
            d = weyl_disk(mu, z, depth)
            if prev is not None:
                # nested: the new disk sits inside the previous one
                assert abs(d.center - prev.center) + d.radius <= \
                    prev.radius * (1 + 1e-9) + 1e-12
            prev = d

    def test_membership_of_completions(self, rng):
        base_pairs = [(1.0, 4.0), (2.0, 2.5)]
        depth = 3.0
        for z in (complex(-1.5, 0.0), complex(2.0, 0.8)):
            disk = weyl_disk(AtomicMeasure.from_pairs(base_pairs), z, depth)
            for extra in ([], [(3.5, 9.0)], [(3.2, 2.0), (4.5, 6.0)],
                          [(4.0, math.inf)]):
                mu = AtomicMeasure.from_pairs(base_pairs + extra)
                m = riccati_m_plus(mu, z).value
                assert disk.contains(m, slack=1e-8)

    def test_wall_inside_collapses(self):
        mu = AtomicMeasure.from_pairs([(1.0, math.inf), (2.0, 4.0)])
        d = weyl_disk(mu, -1.0, 3.0)
        assert d.radius == 0.0
        assert d.center == pytest.approx(-1.0 / math.tanh(1.0), abs=1e-12)

    def test_positive_axis_rejected(self):
        with pytest.raises(ValueError):
            weyl_disk(AtomicMeasure(), 1.0, 2.0)


class TestBoundaryValue:
    def test_free_values(self):
        for E in (1.0, 4.0):
            s = boundary_value(AtomicMeasure(), E)
            assert s.converged
            assert s.value == pytest.approx(1j * math.sqrt(E), abs=1e-8)

    def test_periodic_gap_real_limit(self):
        atoms = [(float(n), 4.0) for n in range(1, 40)]
        mu = AtomicMeasure.from_pairs(atoms, tail=TailRule.periodic(1.0))
        trace = np.trace(period_monodromy(mu, 10.0)).real
        assert abs(trace) > 2.0  # spectral gap at E = 10
        s = boundary_value(mu, 10.0)
        assert s.converged
        assert abs(s.value.imag) < 1e-6

    def test_band_energy_positive_density(self):
        atoms = [(float(n), 4.0) for n in range(1, 40)]
        mu = AtomicMeasure.from_pairs(atoms, tail=TailRule.periodic(1.0))
        E = (math.pi / 2) ** 2
        assert abs(np.trace(period_monodromy(mu, E)).real) < 2.0
        s = boundary_value(mu, E)
        assert s.converged
        assert s.value.imag > 0.1

    def test_rejects_nonpositive_energy(self):
        with pytest.raises(ValueError):
            boundary_value(AtomicMeasure(), 0.0)


class TestReflectionless:
    def test_free_line(self):
        res = reflectionless_defect(AtomicMeasure(whole_line=True),
                                    [0.5, 1.0, 2.0])
        assert res.sup <= 1e-8

    def test_one_atom_defect(self):
        mu = AtomicMeasure.from_pairs([(1.0, 4.0)], whole_line=True)
        res = reflectionless_defect(mu, [1.0])
        assert res.defect[0] >= 1e-3
        # closed form: m_plus from the atom, m_minus free
        mp = one_atom_m_plus(1.0, 4.0, complex(1.0, 0.0))
        expected = abs(mp + (1j).conjugate())
        assert res.defect[0] == pytest.approx(expected, abs=1e-7)

    def test_shift_covariance(self):
        mu = AtomicMeasure.from_pairs([(1.0, 4.0)], whole_line=True)
        base = reflectionless_defect(mu, [1.0, 2.0], t=0.0)
        moved = reflectionless_defect(mu.shift(-3.0), [1.0, 2.0], t=3.0)
        np.testing.assert_allclose(base.defect, moved.defect, atol=1e-9)


class TestSpectralDensity:
    def test_free_value_and_shape(self):
        dens = spectral_density(AtomicMeasure(), [1.0, 4.0], 0.0)
        assert dens.density[0] == pytest.approx(1.0 / math.pi, abs=1e-6)
        assert dens.density[1] / dens.density[0] == pytest.approx(2.0, rel=1e-6)

    def test_periodic_gap_suppressed(self):
        atoms = [(float(n), 4.0) for n in range(1, 40)]
        mu = AtomicMeasure.from_pairs(atoms, tail=TailRule.periodic(1.0))
        dens = spectral_density(mu, [10.0, (math.pi / 2) ** 2], 0.0)
        assert abs(dens.density[0]) < 1e-6      # gap
        assert dens.density[1] > 1e-2           # band
        assert list(dens.spectral_set.indicator) == [False, True]

    def test_finite_eta_support_flags(self, rng):
        mu = AtomicMeasure.from_pairs([(1.0, 4.0)])
        dens = spectral_density(mu, [1.0, 2.0, 3.0], 1e-2)
        assert dens.eta == 1e-2
        assert np.all(np.isfinite(dens.density))


class TestContinuityUnderWeakConvergence:
    def test_position_perturbation_converges(self):
        pairs = [(2.0, 4.0), (3.5, 4.0)]
        base = AtomicMeasure.from_pairs(pairs)
        m0 = riccati_m_plus(base, -1.0).value
        devs = []
        for j in (1, 10, 100, 1000):
            mu_j = AtomicMeasure.from_pairs([(t + 1.0 / j, b)
                                             for t, b in pairs])
            devs.append(abs(riccati_m_plus(mu_j, -1.0).value - m0))
        assert all(b < a for a, b in zip(devs, devs[1:]))
        assert devs[-1] < 1e-4
