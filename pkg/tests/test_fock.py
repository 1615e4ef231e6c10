import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from pinspace.errors import ConfigurationError, InvalidSettingError, NormalizationError, ShapeError, UnitarityError
from pinspace.fock import (
    Setting,
    Wavefunction,
    apply_annihilation,
    apply_creation,
    apply_orbital_rotation,
    apply_string,
    build_basis,
    compound_matrix,
    random_state,
    random_unitary,
    require_normalized,
    slater_overlap,
)


def rotation_34(theta, d=6):
    u = np.eye(d)
    u[2:4, 2:4] = [[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]]
    return u


class TestBasis:
    def test_borland_dennis_basis(self):
        basis = build_basis(Setting(3, 6))
        assert len(basis) == 20
        assert basis[0] == (1, 2, 3) and basis[-1] == (4, 5, 6)

    def test_sizes(self):
        assert len(build_basis(Setting(3, 8))) == 56
        assert build_basis(Setting(1, 1)) == [(1,)]
        with pytest.raises(InvalidSettingError):
            Setting(0, 3)

    def test_lexicographic(self):
        basis = build_basis(Setting(3, 7))
        assert basis == sorted(basis)
        assert basis == list(itertools.combinations(range(1, 8), 3))

    @pytest.mark.parametrize("n,d", [(4, 3), (-1, 2), (1, 0)])
    def test_invalid(self, n, d):
        with pytest.raises(InvalidSettingError):
            Setting(n, d)

    def test_parse(self):
        assert Setting.parse("3,8") == Setting(3, 8)
        assert str(Setting(3, 8)) == "(3,8)"
        with pytest.raises(InvalidSettingError):
            Setting.parse("3;8")


class TestLadder:
    def test_creation_sign(self):
        assert apply_creation((1, 3), 2, 6) == (-1, (1, 2, 3))
        assert apply_creation((2, 3), 1, 6) == (1, (1, 2, 3))
        assert apply_creation((1, 3), 3, 6) is None

    def test_annihilation_sign(self):
        assert apply_annihilation((1, 2, 3), 1, 6) == (1, (2, 3))
        assert apply_annihilation((1, 2, 3), 3, 6) == (1, (1, 2))
        assert apply_annihilation((1, 2, 3), 2, 6) == (-1, (1, 3))
        assert apply_annihilation((1, 2, 3), 4, 6) is None

    @pytest.mark.parametrize("p", [0, 7])
    def test_out_of_range(self, p):
        with pytest.raises(IndexError):
            apply_creation((1,), p, 6)
        with pytest.raises(IndexError):
            apply_annihilation((1,), p, 6)

    @given(st.sets(st.integers(1, 6), max_size=6), st.integers(1, 6), st.integers(1, 6))
    def test_anticommutator(self, occ, p, q):
        # {f_p, f+_q} = delta_pq on every configuration
        cfg = tuple(sorted(occ))
        total = {}
        for ops in ([("-", p), ("+", q)], [("+", q), ("-", p)]):
            res = apply_string(ops, cfg, 6)
            if res is not None:
                total[res[1]] = total.get(res[1], 0) + res[0]
        expected = {cfg: 1} if p == q else {}
        assert {k: v for k, v in total.items() if v} == expected

    @given(st.sets(st.integers(1, 5), max_size=5), st.integers(1, 5), st.integers(1, 5))
    def test_creators_anticommute(self, occ, p, q):
        cfg = tuple(sorted(occ))
        a = apply_string([("+", p), ("+", q)], cfg, 5)
        b = apply_string([("+", q), ("+", p)], cfg, 5)
        if a is None or b is None:
            assert a is None and b is None
        else:
            assert a[1] == b[1] and a[0] == -b[0]

    def test_matches_jordan_wigner(self):
        d = 5
        a = oracles.annihilators(d)
        for cfg in build_basis(Setting(2, d)):
            for p in range(1, d + 1):
                res = apply_creation(cfg, p, d)
                vec = a[p - 1].T @ oracles.determinant_vector(cfg, d)
                ref = np.zeros(2 ** d) if res is None else res[0] * oracles.determinant_vector(res[1], d)
                np.testing.assert_array_equal(vec, ref)


class TestOverlap:
    def test_identity(self):
        u = np.eye(6)
        assert slater_overlap(u, (1, 2, 3), (1, 2, 3)) == pytest.approx(1.0)
        assert slater_overlap(u, (1, 2, 3), (1, 2, 4)) == pytest.approx(0.0)

    def test_rotation_cosine(self):
        theta = 0.37
        assert slater_overlap(rotation_34(theta), (1, 2, 3), (1, 2, 3)) == pytest.approx(np.cos(theta))

    def test_shape_errors(self):
        with pytest.raises(ShapeError):
            slater_overlap(np.eye(3)[:, :2], (1,), (1,))
        with pytest.raises(ShapeError):
            slater_overlap(np.eye(3), (1, 2), (1,))
        with pytest.raises(ShapeError):
            slater_overlap(np.eye(3), (4,), (1,))

    def test_compound_is_multiplicative(self, rng):
        u, v = random_unitary(6, rng), random_unitary(6, rng)
        np.testing.assert_allclose(compound_matrix(u @ v, 3), compound_matrix(u, 3) @ compound_matrix(v, 3),
                                   atol=1e-12)


class TestRotation:
    def test_identity(self, rng):
        psi = random_state(Setting(3, 6), rng)
        np.testing.assert_allclose(apply_orbital_rotation(psi, np.eye(6)).coeffs, psi.coeffs, atol=1e-15)

    def test_swap_orbitals(self):
        # new orbital 3 is old orbital 4; the 3x3 minor u[(1,2,4),(1,2,3)] is the identity
        u = np.eye(6)[:, [0, 1, 3, 2, 4, 5]]
        psi = apply_orbital_rotation(Wavefunction.single(Setting(3, 6), (1, 2, 3)), u)
        assert psi.amplitudes == {(1, 2, 4): pytest.approx(1.0)}
        assert np.linalg.det(u[np.ix_([0, 1, 3], [0, 1, 2])]) == pytest.approx(1.0)

    def test_matches_fock_space_exponential(self, rng):
        psi = random_state(Setting(3, 6), rng)
        u = random_unitary(6, rng)
        np.testing.assert_allclose(apply_orbital_rotation(psi, u).coeffs, oracles.rotate(psi, u), atol=1e-10)

    @pytest.mark.parametrize("n,d", [(3, 6), (3, 8), (2, 5), (4, 8)])
    def test_norm_preserved(self, n, d, rng):
        for _ in range(20):
            psi = random_state(Setting(n, d), rng)
            assert apply_orbital_rotation(psi, random_unitary(d, rng)).norm() == pytest.approx(1.0, abs=1e-10)

    def test_composition(self, rng):
        psi = random_state(Setting(3, 7), rng)
        u, v = random_unitary(7, rng), random_unitary(7, rng)
        two_step = apply_orbital_rotation(apply_orbital_rotation(psi, v), u)
        np.testing.assert_allclose(two_step.coeffs, apply_orbital_rotation(psi, u @ v).coeffs, atol=1e-12)

    def test_inverse(self, rng):
        psi = random_state(Setting(3, 6), rng)
        u = random_unitary(6, rng)
        back = apply_orbital_rotation(apply_orbital_rotation(psi, u), u.conj().T)
        np.testing.assert_allclose(back.coeffs, psi.coeffs, atol=1e-12)

    def test_rejects_non_unitary(self):
        psi = Wavefunction.single(Setting(3, 6), (1, 2, 3))
        with pytest.raises(UnitarityError):
            apply_orbital_rotation(psi, 1.1 * np.eye(6))
        with pytest.raises(ShapeError):
            apply_orbital_rotation(psi, np.eye(5))


class TestWavefunction:
    def test_from_amplitudes(self):
        psi = Wavefunction.from_amplitudes(Setting(3, 6), {(1, 2, 3): 0.6, (1, 4, 5): 0.8j})
        assert psi[(1, 4, 5)] == 0.8j
        assert psi.is_normalized()
        assert not psi.is_real()
        with pytest.raises(ConfigurationError):
            Wavefunction.from_amplitudes(Setting(3, 6), {(2, 1, 3): 1.0})
        with pytest.raises(ConfigurationError):
            Wavefunction.from_amplitudes(Setting(3, 6), {(1, 2, 7): 1.0})

    def test_immutable(self):
        psi = Wavefunction.single(Setting(2, 4), (1, 2))
        with pytest.raises(ValueError):
            psi.coeffs[0] = 2.0

    def test_normalization_policy(self):
        psi = Wavefunction.from_amplitudes(Setting(3, 6), {(1, 2, 3): 1.0, (1, 4, 5): 1.0})
        with pytest.raises(NormalizationError):
            require_normalized(psi)
        fixed = require_normalized(psi, auto_normalize=True)
        assert fixed.norm() == pytest.approx(1.0)
        assert fixed.original_norm == pytest.approx(np.sqrt(2))
        with pytest.raises(NormalizationError):
            Wavefunction(Setting(1, 2), np.zeros(2)).normalized()
