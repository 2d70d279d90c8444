import math

import numpy as np
import pytest

from radialspec import (Atom, AtomicMeasure, TruncationError, assemble_krein,
                        asymptotic_ratio, free_green, m_plus_krein,
                        resolvent_kernel, riccati_m_plus, trace_block,
                        weight_block)
from radialspec.krein import boundary_trace
from radialspec.measures import TailRule
from conftest import random_measure


def _hyperbolic_step(m, d, kappa):
    ch, sh = math.cosh(kappa * d), math.sinh(kappa * d)
    if math.isinf(m):
        # Dirichlet data at the right end of the piece
        return -kappa * ch / sh
    return (m * ch - kappa * sh) / (ch - m * sh / kappa)


def riccati_closed_form(pairs, kappa):
    """Independent m oracle: explicit backward Moebius steps at z = -kappa^2.

    Walks the atoms right to left starting from the decaying free solution;
    m(t-) = b * m(t+) across an atom (infinity at a hard wall, which wipes
    out everything to its right) and the hyperbolic fraction across free
    pieces.
    """
    m = -kappa
    prev = None
    for t, b in reversed(pairs):
        if prev is not None:
            m = _hyperbolic_step(m, prev - t, kappa)
        m = math.inf if math.isinf(b) else b * m
        prev = t
    if prev is None:
        return m
    return _hyperbolic_step(m, prev, kappa)


class TestFreeGreen:
    def test_boundary_zero(self, rng):
        for u in rng.uniform(0, 5, size=10):
            assert free_green(0.0, float(u), -1.0) == pytest.approx(0.0, abs=1e-15)

    def test_diagonal_negative_energy(self):
        for t in (0.5, 1.0, 3.0, 10.0):
            got = free_green(t, t, -1.0)
            assert got == pytest.approx(0.5 * (1 - math.exp(-2 * t)), rel=1e-12)
        assert free_green(40.0, 40.0, -1.0) == pytest.approx(0.5, rel=1e-12)

    def test_symmetry(self, rng):
        for _ in range(20):
            t, u = rng.uniform(0, 6, size=2)
            z = complex(rng.uniform(-5, 3), rng.uniform(0.1, 2))
            assert free_green(t, u, z) == pytest.approx(free_green(u, t, z),
                                                        rel=1e-12)

    def test_positive_axis_rejected(self):
        with pytest.raises(ValueError):
            free_green(1.0, 2.0, 1.0)
        with pytest.raises(ValueError):
            free_green(1.0, 2.0, 0.0)


class TestTraceBlock:
    def test_diagonal_substitution(self):
        # kappa = 1, t = ln(2)/2 makes the decay factor exactly 1/2
        mu = AtomicMeasure((Atom(math.log(2.0) / 2.0, 3.0),), 0.25)
        got = trace_block(0, 0, mu, -1.0)
        np.testing.assert_allclose(
            got, [[-0.25, -0.25], [-0.25, 0.75]], rtol=1e-12)

    def test_far_diagonal_is_asymptotic_block(self):
        kappa = 2.0
        mu = AtomicMeasure((Atom(40.0, 3.0),), 1.0)
        got = trace_block(0, 0, mu, -kappa ** 2)
        np.testing.assert_allclose(
            got, [[-1 / (2 * kappa), 0.0], [0.0, kappa / 2]], atol=1e-16)

    def test_offdiagonal_exponential_bound(self, rng):
        # ||block(n, m)|| <= 2 kappa e^{-kappa |t_n - t_m|} for kappa >= 1
        for _ in range(30):
            kappa = float(rng.uniform(1.0, 8.0))
            t1 = float(rng.uniform(0.5, 4.0))
            t2 = t1 + float(rng.uniform(0.3, 4.0))
            mu = AtomicMeasure((Atom(t1, 3.0), Atom(t2, 3.0)), 0.25)
            block = trace_block(0, 1, mu, -kappa ** 2)
            norm = np.linalg.norm(block, 2)
            assert norm <= 2.0 * kappa * math.exp(-kappa * (t2 - t1))

    def test_adjoint_symmetry(self, rng):
        mu = random_measure(rng, max_atoms=5, p_wall=0.0)
        if not mu.atoms:
            mu = AtomicMeasure((Atom(1.0, 3.0), Atom(2.0, 2.0)), 0.25)
        z = complex(1.3, 0.8)
        a = assemble_krein(mu, z)
        b = assemble_krein(mu, z.conjugate())
        np.testing.assert_allclose(b.matrix, a.matrix.conj().T, rtol=1e-12)


class TestWeightBlock:
    def test_values(self):
        np.testing.assert_allclose(weight_block(3.0), [[0, 1.5], [1.5, 0]])
        np.testing.assert_allclose(weight_block(1.0), [[0, 0.5], [0.5, 0]])
        with pytest.raises(ValueError):
            weight_block(0.5)

    def test_diagonal_block_eigenvalue_split(self, rng):
        # the positive eigenvalue exceeds kappa/2, the negative one stays
        # below -1/(2 kappa), uniformly in the weight
        for _ in range(50):
            kappa = float(rng.uniform(0.5, 20.0))
            beta = float(rng.uniform(1.0, 50.0))
            block = np.array([[-1 / (2 * kappa), 0], [0, kappa / 2]]) \
                + weight_block(beta)
            lam = np.linalg.eigvalsh(block)
            assert lam[1] >= kappa / 2 - 1e-12
            assert lam[0] <= -1 / (2 * kappa) + 1e-12


class TestAssembly:
    def test_empty_system(self):
        sys_ = assemble_krein(AtomicMeasure(), -1.0)
        assert sys_.size == 0
        assert sys_.tail_bound == 0.0
        assert sys_.m_plus() == pytest.approx(-1.0)

    def test_single_atom_blocks(self):
        mu = AtomicMeasure((Atom(1.0, 3.0),), 1.0)
        sys_ = assemble_krein(mu, -1.0)
        expected = trace_block(0, 0, mu, -1.0) + weight_block(3.0)
        np.testing.assert_allclose(sys_.block(0, 0), expected, rtol=1e-12)

    def test_block_symmetry_under_transpose(self, rng):
        mu = AtomicMeasure((Atom(1.0, 3.0), Atom(2.2, 2.0), Atom(4.0, 5.0)),
                           0.5)
        z = complex(-2.0, 1.0)
        sys_ = assemble_krein(mu, z)
        np.testing.assert_allclose(sys_.matrix, sys_.matrix.T, rtol=1e-12)

    def test_tail_bound_rate(self):
        # halving the truncation distance scales the bound by e^{kappa dt}
        atoms = tuple(Atom(float(n), 3.0) for n in range(1, 30))
        mu = AtomicMeasure(atoms, 1.0)
        kappa = 2.0
        s5 = assemble_krein(mu, -kappa ** 2, size=5)
        s9 = assemble_krein(mu, -kappa ** 2, size=9)
        ratio = s5.tail_bound / s9.tail_bound
        assert ratio == pytest.approx(math.exp(kappa * 4.0), rel=1e-9)

    def test_adaptive_on_periodic_tail(self):
        mu = AtomicMeasure.from_pairs([(1.0, 4.0)], tail=TailRule.periodic(1.0))
        sys_ = assemble_krein(mu, -4.0, rtol=1e-9)
        assert sys_.size >= 2
        m = sys_.m_plus()
        ref = riccati_m_plus(mu, -4.0).value
        assert m == pytest.approx(ref, rel=1e-8)

    def test_truncation_refusal(self):
        mu = AtomicMeasure.from_pairs([(1.0, 4.0)], tail=TailRule.periodic(1.0))
        with pytest.raises(TruncationError) as err:
            assemble_krein(mu, -0.01, rtol=1e-30, max_atoms=16)
        assert err.value.required_size is not None

    def test_schur_remainder_rate(self):
        # the full matrix approaches its diagonal large-kappa model at the
        # rate kappa (e^{-2 kappa t_1} + e^{-kappa eps}); only the rate is
        # asserted, the prefactor is empirical
        atoms = tuple(Atom(1.0 + 0.5 * n, 3.0) for n in range(6))
        mu = AtomicMeasure(atoms, 0.5)

        def remainder(kappa):
            sys_ = assemble_krein(mu, -kappa ** 2)
            model = np.zeros_like(sys_.matrix)
            for i in range(len(atoms)):
                model[2 * i, 2 * i] = -1.0 / (2.0 * kappa)
                model[2 * i + 1, 2 * i + 1] = kappa / 2.0
                model[2 * i:2 * i + 2, 2 * i:2 * i + 2] += \
                    weight_block(atoms[i].beta)
            return np.linalg.norm(sys_.matrix - model, 2)

        def envelope(kappa):
            return kappa * (math.exp(-2 * kappa * atoms[0].t)
                            + math.exp(-kappa * mu.separation))

        c = remainder(4.0) / envelope(4.0)
        for kappa in (6.0, 8.0, 12.0):
            assert remainder(kappa) <= 4.0 * c * envelope(kappa)


class TestBoundaryTrace:
    def test_exponential_decay_beyond_support(self):
        # beyond the support the resolvent is a pure decaying exponential,
        # so the per-atom norms drop by e^{-kappa gap} from atom to atom
        kappa = 1.0
        atoms = tuple(Atom(float(n), 3.0) for n in range(3, 12))
        mu = AtomicMeasure(atoms, 1.0)
        bump = lambda u: u * (2.0 - u)
        tv = boundary_trace(mu, -kappa ** 2, bump, (0.0, 2.0))
        norms = tv.norms()
        ratios = norms[1:] / norms[:-1]
        np.testing.assert_allclose(ratios, math.exp(-kappa), rtol=1e-6)

    def test_matches_closed_form_beyond_support(self):
        # (A0 + kappa^2)^-1 f = c e^{-kappa t} (1, -kappa) past supp f
        kappa = 2.0
        mu = AtomicMeasure((Atom(4.0, 3.0),), 1.0)
        bump = lambda u: u * (2.0 - u)
        tv = boundary_trace(mu, -kappa ** 2, bump, (0.0, 2.0))
        val, der = tv.entries[0]
        assert der == pytest.approx(-kappa * val, rel=1e-8)


class TestResolventKernel:
    def test_empty_reduces_to_free(self, rng):
        for _ in range(10):
            t, u = rng.uniform(0.1, 5, size=2)
            z = complex(rng.uniform(-4, -0.5), rng.uniform(0, 1))
            assert resolvent_kernel(AtomicMeasure(), z, t, u) == \
                pytest.approx(free_green(t, u, z), rel=1e-12)

    def test_vanishes_at_origin(self):
        mu = AtomicMeasure((Atom(1.0, 3.0),), 1.0)
        assert abs(resolvent_kernel(mu, -1.0, 0.0, 0.7)) < 1e-14

    def test_wall_gives_interval_kernel(self):
        # a hard wall at L decouples [0, L]; the kernel there is the
        # Dirichlet interval kernel sinh(k t<) sinh(k (L - t>)) / (k sinh kL)
        kappa, L = 1.3, 1.0
        mu = AtomicMeasure((Atom(L, 1.0),), 1.0)
        sys_ = assemble_krein(mu, -kappa ** 2)
        for (t, u) in [(0.2, 0.7), (0.5, 0.5), (0.9, 0.3)]:
            lo, hi = min(t, u), max(t, u)
            expected = (math.sinh(kappa * lo) * math.sinh(kappa * (L - hi))
                        / (kappa * math.sinh(kappa * L)))
            assert sys_.resolvent(t, u) == pytest.approx(expected, rel=1e-12)

    def test_symmetry(self, rng):
        mu = AtomicMeasure((Atom(1.0, 4.0), Atom(2.0, 2.0), Atom(3.5, 3.0)),
                           1.0)
        sys_ = assemble_krein(mu, complex(-1.0, 0.7))
        for _ in range(20):
            t, u = rng.uniform(0.05, 5.0, size=2)
            if any(abs(a.t - x) < 1e-6 for a in mu.atoms for x in (t, u)):
                continue
            assert sys_.resolvent(t, u) == pytest.approx(
                sys_.resolvent(u, t), rel=1e-9)

    def test_base_point_on_atom_rejected(self):
        mu = AtomicMeasure((Atom(1.0, 4.0),), 1.0)
        with pytest.raises(ValueError):
            resolvent_kernel(mu, -1.0, 1.0, 0.5)


class TestMPlus:
    def test_free_exact(self):
        for kappa in (0.5, 1.0, 2.0, 4.0):
            got = m_plus_krein(AtomicMeasure(), -kappa ** 2).value
            assert got == pytest.approx(-kappa, abs=1e-12)

    def test_single_atom_oracle(self):
        mu = AtomicMeasure((Atom.from_b(1.0, 4.0),), 1.0)
        got = m_plus_krein(mu, -1.0).value
        oracle = riccati_closed_form([(1.0, 4.0)], 1.0)
        assert got == pytest.approx(oracle, rel=1e-12)
        assert got == pytest.approx(-1.17676, abs=5e-6)

    def test_wall_oracle(self):
        mu = AtomicMeasure((Atom(1.0, 1.0),), 1.0)
        got = m_plus_krein(mu, -1.0).value
        assert got == pytest.approx(-1.0 / math.tanh(1.0), abs=1e-12)

    def test_wall_hides_deeper_atoms(self):
        mu = AtomicMeasure((Atom(1.0, 1.0), Atom(2.0, 3.0)), 1.0)
        got = m_plus_krein(mu, -1.0).value
        assert got == pytest.approx(-1.0 / math.tanh(1.0), abs=1e-11)

    def test_real_on_negative_axis(self, rng):
        for _ in range(30):
            mu = random_measure(rng)
            kappa = float(rng.uniform(0.5, 6.0))
            got = m_plus_krein(mu, -kappa ** 2).value
            assert abs(got.imag) <= 1e-10 * (1 + abs(got))

    def test_herglotz(self, rng):
        for _ in range(100):
            mu = random_measure(rng, max_atoms=6)
            z = complex(rng.uniform(-3, 6), 10 ** rng.uniform(-2, 0.5))
            assert m_plus_krein(mu, z).value.imag > 0

    def test_route_equivalence(self, rng):
        for _ in range(60):
            mu = random_measure(rng)
            kappa = float(rng.uniform(0.5, 10.0))
            mk = m_plus_krein(mu, -kappa ** 2).value
            mr = riccati_m_plus(mu, -kappa ** 2).value
            assert abs(mk - mr) / (1 + abs(mk)) <= 1e-6

    def test_closed_form_oracle_multi_atom(self):
        pairs = [(0.7, 4.0), (1.6, 9.0), (2.9, 2.5)]
        mu = AtomicMeasure.from_pairs(pairs, separation=0.5)
        for kappa in (0.7, 1.0, 3.0):
            got = m_plus_krein(mu, -kappa ** 2).value
            assert got == pytest.approx(riccati_closed_form(pairs, kappa),
                                        rel=1e-10)

    def test_uniqueness_probe(self, rng):
        # distinct small measures stay separated in m on a kappa sample
        kappas = np.arange(1.0, 9.0)
        margins = []
        for _ in range(25):
            a = random_measure(rng, max_atoms=2, p_wall=0.2, min_first=0.3)
            b = random_measure(rng, max_atoms=2, p_wall=0.2, min_first=0.3)
            if [(x.t, x.beta) for x in a.atoms] == [(x.t, x.beta) for x in b.atoms]:
                continue
            sep = max(abs(m_plus_krein(a, -k * k).value
                          - m_plus_krein(b, -k * k).value) for k in kappas)
            margins.append(sep)
        assert margins
        assert min(margins) > 1e-9


class TestAsymptotics:
    def test_ratio_tends_to_one(self):
        mu = AtomicMeasure((Atom.from_b(1.0, 4.0),), 1.0)
        devs = [abs(asymptotic_ratio(mu, kappa) - 1.0)
                for kappa in (2.0, 4.0, 6.0, 10.0)]
        assert all(b < a for a, b in zip(devs, devs[1:]))
        assert devs[-1] < 1e-2

    def test_wall_variant(self):
        mu = AtomicMeasure((Atom(1.0, 1.0),), 1.0)
        assert abs(asymptotic_ratio(mu, 10.0) - 1.0) < 1e-2

    def test_riccati_route_agrees(self):
        mu = AtomicMeasure((Atom.from_b(1.0, 4.0),), 1.0)
        a = asymptotic_ratio(mu, 6.0, route="krein")
        b = asymptotic_ratio(mu, 6.0, route="riccati")
        assert a == pytest.approx(b, rel=1e-5)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            asymptotic_ratio(AtomicMeasure(), 5.0)
