"""Dense complex linear-algebra kernels.

Everything here operates on plain ``numpy`` complex arrays and is a
deterministic function of its input: for a fixed input array the output
bits are reproducible on a given platform.  Spectral routines sit on top
of LAPACK's Hermitian eigensolver; the principal logarithm of a unitary
uses a complex Schur factorization, which is a spectral decomposition
whenever the input is normal.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import (
    LogAtMinusOne,
    NoConvergence,
    NotHermitian,
    NotSkew,
    NotUnitary,
    SingularInput,
)

RANK_RTOL_ENV = "PROJGEO_TOL_RANK"


@dataclass(frozen=True)
class Tolerance:
    """Numerical thresholds: ``rank_rtol`` governs rank/nullity decisions,
    ``recon_rtol`` governs reconstruction and symmetry checks."""

    rank_rtol: float = 1e-10
    recon_rtol: float = 1e-12

    def __post_init__(self):
        for name in ("rank_rtol", "recon_rtol"):
            value = getattr(self, name)
            if not (0.0 < value < 1e-2):
                raise ValueError(f"{name} must lie in (0, 1e-2), got {value!r}")


def default_tolerance() -> Tolerance:
    """Default thresholds; ``PROJGEO_TOL_RANK`` overrides the rank threshold."""
    raw = os.environ.get(RANK_RTOL_ENV)
    if raw is None:
        return Tolerance()
    return Tolerance(rank_rtol=float(raw))


def as_cmatrix(a) -> np.ndarray:
    """Coerce to a 2-d complex128 array with finite entries."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d array, got shape {m.shape}")
    if m.size and not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def require_square(m: np.ndarray) -> int:
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m.shape[0]


def op_norm(a) -> float:
    """Operator (spectral) norm: the largest singular value."""
    m = as_cmatrix(a)
    if m.size == 0:
        return 0.0
    return float(np.linalg.svd(m, compute_uv=False)[0])


class HermEig(NamedTuple):
    eigenvalues: np.ndarray   # real, ascending
    eigenvectors: np.ndarray  # unitary, columns match eigenvalues


def _check_hermitian(m: np.ndarray, tol: Tolerance) -> None:
    # bitwise-symmetric inputs (the common case) skip the two SVDs
    if np.array_equal(m, m.conj().T):
        return
    norm = op_norm(m)
    if op_norm(m - m.conj().T) > tol.recon_rtol * max(norm, 1e-300):
        raise NotHermitian(
            f"asymmetry {op_norm(m - m.conj().T):.3e} exceeds "
            f"{tol.recon_rtol:.1e} * norm {norm:.3e}"
        )


def herm_eig(a, tol: Tolerance | None = None) -> HermEig:
    """Eigendecomposition of a Hermitian matrix.

    Parameters
    ----------
    a : (n, n) array_like, Hermitian within ``tol.recon_rtol`` relative error.
    tol : Tolerance, optional

    Returns
    -------
    HermEig
        Real eigenvalues sorted ascending and a matching unitary of
        eigenvectors, so that ``U diag(w) U* == a`` up to roundoff.

    Raises
    ------
    NotHermitian
        If the input fails the symmetry precondition.
    NoConvergence
        If the underlying iteration fails to converge.
    """
    tol = tol or default_tolerance()
    m = as_cmatrix(a)
    require_square(m)
    _check_hermitian(m, tol)
    try:
        w, u = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return HermEig(w, u)


def nullspace(a, tol: Tolerance | None = None, *, scale: float | None = None) -> np.ndarray:
    """Orthonormal basis (columns) of the numerical nullspace of ``a``.

    A direction ``v`` belongs to the nullspace when ``|a v| <= rank_rtol *
    s * |v|``, where the reference ``s`` defaults to ``|a|`` itself.  The
    zero matrix has the whole space as its nullspace; a matrix of full
    rank yields a basis with zero columns.

    Callers whose operators have a known natural scale (e.g. expressions
    in projections and the identity) should pass ``scale`` explicitly:
    a purely relative reference cannot recognize a matrix that is zero up
    to roundoff.
    """
    tol = tol or default_tolerance()
    m = as_cmatrix(a)
    cols = m.shape[1]
    if m.size == 0:
        return np.eye(cols, dtype=np.complex128)
    _, s, vh = np.linalg.svd(m, full_matrices=True)
    reference = float(s[0]) if scale is None else float(scale)
    if reference == 0.0:
        return np.eye(cols, dtype=np.complex128)
    rank = int(np.sum(s > tol.rank_rtol * reference))
    return vh[rank:].conj().T


def nullity(a, tol: Tolerance | None = None, *, scale: float | None = None) -> int:
    """Dimension of the numerical nullspace."""
    return nullspace(a, tol, scale=scale).shape[1]


def polar_unitary(a, tol: Tolerance | None = None) -> np.ndarray:
    """Unitary factor of the polar decomposition of an invertible Hermitian
    matrix.

    For Hermitian ``a`` with trivial nullspace the factor is the spectral
    sign function: a symmetry ``V = V* = V^{-1}`` with ``a = V |a|``.

    Raises
    ------
    SingularInput
        If ``a`` has a numerical nullspace.
    """
    tol = tol or default_tolerance()
    w, u = herm_eig(a, tol)
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    if scale == 0.0 or float(np.min(np.abs(w))) <= tol.rank_rtol * scale:
        raise SingularInput("polar factor undefined: input has a nullspace")
    signs = np.where(w >= 0.0, 1.0, -1.0)
    v = (u * signs) @ u.conj().T
    return (v + v.conj().T) / 2


def _check_skew(m: np.ndarray, tol: Tolerance) -> None:
    if np.array_equal(m, -m.conj().T):
        return
    norm = op_norm(m)
    if norm == 0.0:
        return
    if op_norm(m + m.conj().T) > tol.recon_rtol * norm:
        raise NotSkew(
            f"skew defect {op_norm(m + m.conj().T):.3e} exceeds "
            f"{tol.recon_rtol:.1e} * norm {norm:.3e}"
        )


def expm_skew(z, tol: Tolerance | None = None) -> np.ndarray:
    """Unitary exponential of a skew-Hermitian matrix.

    Computed spectrally: with ``-i z = U diag(theta) U*`` the result is
    ``U diag(exp(i theta)) U*``, unitary to working precision.
    """
    tol = tol or default_tolerance()
    m = as_cmatrix(z)
    require_square(m)
    _check_skew(m, tol)
    h = -1j * m
    h = (h + h.conj().T) / 2
    w, u = herm_eig(h, tol)
    return (u * np.exp(1j * w)) @ u.conj().T


class PrincipalLog(NamedTuple):
    skew: np.ndarray        # skew-Hermitian logarithm
    within_half_pi: bool    # all phases in [-pi/2, pi/2] (+ tiny slack)
    near_minus_one: bool    # spectrum within rank_rtol of -1


def logm_unitary_principal(
    w,
    tol: Tolerance | None = None,
    *,
    require_interior: bool = False,
) -> PrincipalLog:
    """Principal skew-Hermitian logarithm of a unitary matrix.

    Eigenvalue phases are taken with a two-argument arctangent, so they lie
    in ``(-pi, pi]`` with the branch closed at ``+pi``: a phase of exactly
    ``-pi`` is mapped to ``+pi``.  The result reports whether all phases fit
    inside ``[-pi/2, pi/2]`` and whether the spectrum touches ``-1``.

    Parameters
    ----------
    w : (n, n) array_like, unitary within ``tol.recon_rtol``.
    require_interior : bool
        When True, raise ``LogAtMinusOne`` if an eigenvalue sits within
        ``tol.rank_rtol`` of ``-1`` instead of silently using the closed
        branch.

    Raises
    ------
    NotUnitary, LogAtMinusOne
    """
    tol = tol or default_tolerance()
    m = as_cmatrix(w)
    n = require_square(m)
    if op_norm(m.conj().T @ m - np.eye(n)) > tol.recon_rtol:
        raise NotUnitary("input is not unitary within recon_rtol")
    # complex Schur of a normal matrix is a spectral decomposition with an
    # exactly unitary vector matrix
    t, u = scipy.linalg.schur(m, output="complex")
    lam = np.diagonal(t)
    phases = np.arctan2(lam.imag, lam.real)
    phases = np.where(phases == -np.pi, np.pi, phases)
    near = bool(np.any(np.abs(lam + 1.0) <= tol.rank_rtol)) if n else False
    if require_interior and near:
        raise LogAtMinusOne("spectrum touches -1; no interior logarithm")
    z = (u * (1j * phases)) @ u.conj().T
    z = (z - z.conj().T) / 2
    within = bool(np.all(np.abs(phases) <= np.pi / 2 + 1e-12)) if n else True
    return PrincipalLog(z, within, near)
