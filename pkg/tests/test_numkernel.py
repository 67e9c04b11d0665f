import numpy as np
import pytest

from projgeo.errors import (
    LogAtMinusOne,
    NotHermitian,
    NotSkew,
    NotUnitary,
    SingularInput,
)
from projgeo.numkernel import (
    Tolerance,
    default_tolerance,
    expm_skew,
    herm_eig,
    logm_unitary_principal,
    nullspace,
    op_norm,
    polar_unitary,
)
from projgeo.projections import random_unitary


def random_hermitian(n, rng):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (a + a.conj().T) / 2


def random_skew(n, rng, scale=1.0):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    z = (a - a.conj().T) / 2
    return scale * z / max(op_norm(z), 1e-300)


class TestHermEig:
    def test_diagonal(self):
        w, u = herm_eig(np.diag([2.0, -1.0]).astype(complex))
        assert np.allclose(w, [-1.0, 2.0])
        assert np.allclose(np.abs(u), [[0, 1], [1, 0]])

    def test_off_diagonal_symmetry(self):
        w, _ = herm_eig(np.array([[0, 1], [1, 0]], dtype=complex))
        assert np.allclose(w, [-1.0, 1.0])

    def test_reconstruction_random(self):
        rng = np.random.default_rng(0)
        a = random_hermitian(8, rng)
        w, u = herm_eig(a)
        # oracle: explicit multiplication
        assert op_norm((u * w) @ u.conj().T - a) <= 1e-12 * op_norm(a)
        assert op_norm(u.conj().T @ u - np.eye(8)) <= 1e-12

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitian):
            herm_eig(np.array([[0, 1], [0, 0]], dtype=complex))

    def test_invariant_battery(self):
        rng = np.random.default_rng(7)
        for trial in range(1000):
            n = int(rng.integers(2, 17))
            a = random_hermitian(n, rng)
            w, u = herm_eig(a)
            assert np.all(np.diff(w) >= 0)
            assert op_norm((u * w) @ u.conj().T - a) <= 1e-12 * op_norm(a)
            assert op_norm(u.conj().T @ u - np.eye(n)) <= 1e-12


class TestOpNorm:
    def test_zero(self):
        assert op_norm(np.zeros((3, 3))) == 0.0

    def test_diagonal(self):
        assert op_norm(np.diag([3.0, -5.0])) == 5.0

    def test_against_spectral_oracle(self):
        rng = np.random.default_rng(1)
        a = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        # oracle: largest eigenvalue of (A* A)^{1/2}
        w, _ = herm_eig(a.conj().T @ a)
        assert abs(op_norm(a) - np.sqrt(w[-1])) <= 1e-12 * np.sqrt(w[-1])

    def test_unitary_invariance(self):
        rng = np.random.default_rng(2)
        for trial in range(50):
            n = int(rng.integers(2, 10))
            a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            u = random_unitary(n, rng)
            v = random_unitary(n, rng)
            assert abs(op_norm(u @ a @ v) - op_norm(a)) <= 1e-12 * max(op_norm(a), 1)


class TestNullspace:
    def test_diagonal_with_kernel(self):
        basis = nullspace(np.diag([0.0, -2.0]).astype(complex))
        assert basis.shape == (2, 1)
        assert abs(abs(basis[0, 0]) - 1.0) <= 1e-14

    def test_invertible(self):
        assert nullspace(np.diag([2.0, 1.0]).astype(complex)).shape == (2, 0)

    def test_crossed_projection_difference(self):
        p = np.diag([1.0, 0.0]).astype(complex)
        q = np.diag([0.0, 1.0]).astype(complex)
        # oracle: P - Q - 1 = diag(0, -2) has nullity 1
        assert nullspace(p - q - np.eye(2)).shape[1] == 1

    def test_zero_matrix_full_nullity(self):
        assert nullspace(np.zeros((4, 4))).shape == (4, 4)

    def test_basis_annihilates(self):
        rng = np.random.default_rng(3)
        a = rng.standard_normal((5, 5))
        a[:, 2] = a[:, 0] + a[:, 1]
        basis = nullspace(a.T @ a)  # rank-deficient gram matrix
        assert basis.shape[1] >= 1
        assert op_norm((a.T @ a) @ basis) <= 1e-9 * op_norm(a.T @ a)


class TestPolarUnitary:
    def test_diagonal_signs(self):
        v = polar_unitary(np.diag([3.0, -2.0]).astype(complex))
        assert np.allclose(v, np.diag([1.0, -1.0]))

    def test_identity(self):
        assert np.allclose(polar_unitary(np.eye(4, dtype=complex)), np.eye(4))

    def test_singular_input(self):
        with pytest.raises(SingularInput):
            polar_unitary(np.diag([1.0, 0.0]).astype(complex))

    def test_spectral_sign_oracle(self):
        rng = np.random.default_rng(4)
        a = random_hermitian(6, rng) + 3 * np.eye(6)  # push away from singular
        a = a - 2.5 * np.eye(6)  # mixed signs, still invertible generically
        v = polar_unitary(a)
        w, u = herm_eig(a)
        expected = (u * np.where(w >= 0, 1.0, -1.0)) @ u.conj().T
        assert op_norm(v - expected) <= 1e-11

    def test_reconstructs_input(self):
        rng = np.random.default_rng(5)
        for trial in range(50):
            n = int(rng.integers(2, 9))
            a = random_hermitian(n, rng) + np.diag(rng.choice([-2.0, 2.0], n))
            w = np.linalg.eigvalsh(a)
            if np.min(np.abs(w)) < 1e-3:
                continue
            v = polar_unitary(a)
            assert op_norm(v @ v - np.eye(n)) <= 1e-12
            assert op_norm(v - v.conj().T) <= 1e-12
            ew, eu = herm_eig(a)
            absolute = (eu * np.abs(ew)) @ eu.conj().T
            assert op_norm(v @ absolute - a) <= 1e-11


class TestExpmSkew:
    def test_zero(self):
        assert np.allclose(expm_skew(np.zeros((3, 3))), np.eye(3))

    def test_rotation_closed_form(self):
        theta = np.pi / 2
        z = theta * np.array([[0, -1], [1, 0]], dtype=complex)
        expected = np.array([[0, -1], [1, 0]], dtype=complex)
        assert op_norm(expm_skew(z) - expected) <= 1e-14

    def test_inverse_check(self):
        rng = np.random.default_rng(6)
        z = random_skew(6, rng, scale=1.3)
        e = expm_skew(z) @ expm_skew(-z)
        assert op_norm(e - np.eye(6)) <= 1e-11

    def test_rejects_non_skew(self):
        with pytest.raises(NotSkew):
            expm_skew(np.eye(2, dtype=complex))


class TestLogmUnitary:
    def test_identity(self):
        log = logm_unitary_principal(np.eye(3, dtype=complex))
        assert op_norm(log.skew) <= 1e-14
        assert log.within_half_pi and not log.near_minus_one

    def test_diagonal_phases(self):
        log = logm_unitary_principal(np.diag([1j, -1j]))
        assert np.allclose(log.skew, np.diag([1j * np.pi / 2, -1j * np.pi / 2]))
        assert log.within_half_pi

    def test_round_trip(self):
        rng = np.random.default_rng(8)
        for trial in range(100):
            n = int(rng.integers(2, 9))
            z = random_skew(n, rng, scale=np.pi / 2 - 0.01)
            recovered = logm_unitary_principal(expm_skew(z)).skew
            assert op_norm(recovered - z) <= 1e-9

    def test_reconstructs_unitary(self):
        rng = np.random.default_rng(9)
        w = random_unitary(7, rng)
        log = logm_unitary_principal(w)
        assert op_norm(expm_skew(log.skew) - w) <= 1e-12

    def test_branch_closed_at_pi(self):
        log = logm_unitary_principal(np.array([[-1.0 + 0j]]))
        assert np.allclose(log.skew, [[1j * np.pi]])
        assert log.near_minus_one and not log.within_half_pi

    def test_minus_one_flagged(self):
        with pytest.raises(LogAtMinusOne):
            logm_unitary_principal(np.diag([-1.0 + 0j, 1.0]), require_interior=True)

    def test_rejects_non_unitary(self):
        with pytest.raises(NotUnitary):
            logm_unitary_principal(2 * np.eye(2, dtype=complex))


def test_tolerance_validation():
    with pytest.raises(ValueError):
        Tolerance(rank_rtol=0.5)
    with pytest.raises(ValueError):
        Tolerance(recon_rtol=-1e-9)
    assert default_tolerance().rank_rtol == 1e-10


def test_rank_env_override(monkeypatch):
    monkeypatch.setenv("PROJGEO_TOL_RANK", "1e-6")
    assert default_tolerance().rank_rtol == 1e-6
