"""Exact desk-scale model of the bounded-operators-mod-compacts quotient.

Operators act block-diagonally on an infinite orthogonal sum of ``d``
dimensional blocks: finitely many *exceptional* blocks followed by one
*tail* block repeated forever.  Operators whose tail is zero play the role
of the compact ideal, and the quotient map simply reads off the tail
block, so quotient identities hold exactly (they are plain ``d x d``
matrix identities, no truncation error).

Within the model, "infinite-dimensional nullspace" translates to "the
tail block contributes a nontrivial nullspace", since the tail repeats
infinitely often.  The existence dichotomy and the lifting constructions
are stated and verified at that level.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from math import lcm

import numpy as np

from .errors import (
    BlockDimMismatch,
    NoGeodesic,
    NormTooLarge,
    NoSpectralGap,
    NotCodiagonal,
    NotProjection,
    NotSelfadjoint,
)
from .geodesics import GeodesicSegment, evaluate, minimal_exponent
from .numkernel import (
    Tolerance,
    as_cmatrix,
    default_tolerance,
    herm_eig,
    nullity,
    op_norm,
)
from .projections import IndexPair, halmos_decompose, index_pair, make_projection

# keeps exact norm evaluation bounded
MAX_EXCEPTIONAL = 64

# forbidden band around 1/2 for spectral thresholding
SPECTRAL_GAP = 0.1


def _as_block(m, d: int) -> np.ndarray:
    b = as_cmatrix(m)
    if b.shape != (d, d):
        raise BlockDimMismatch(f"expected a {d}x{d} block, got {b.shape}")
    return b


@dataclass(frozen=True)
class BlockOperator:
    """Block-diagonal operator: exceptional ``d x d`` blocks, then a
    repeating tail block.

    Kept in normal form: trailing exceptional blocks bitwise equal to the
    tail are absorbed, so the exceptional list is minimal.
    """

    block_dim: int
    exceptional: tuple[np.ndarray, ...]
    tail: np.ndarray

    def __post_init__(self):
        d = self.block_dim
        if d < 1:
            raise BlockDimMismatch(f"block_dim must be positive, got {d}")
        tail = _as_block(self.tail, d)
        blocks = tuple(_as_block(b, d) for b in self.exceptional)
        if len(blocks) > MAX_EXCEPTIONAL:
            raise ValueError(
                f"exceptional list longer than {MAX_EXCEPTIONAL} blocks"
            )
        while blocks and np.array_equal(blocks[-1], tail):
            blocks = blocks[:-1]
        object.__setattr__(self, "exceptional", blocks)
        object.__setattr__(self, "tail", tail)

    # -- structure ---------------------------------------------------------

    def block_at(self, i: int) -> np.ndarray:
        """Block acting on the ``i``-th summand."""
        if i < len(self.exceptional):
            return self.exceptional[i]
        return self.tail

    def _aligned(self, other: "BlockOperator") -> int:
        if not isinstance(other, BlockOperator):
            raise TypeError(f"expected a BlockOperator, got {type(other)!r}")
        if self.block_dim != other.block_dim:
            raise BlockDimMismatch(
                f"block dims {self.block_dim} and {other.block_dim} differ"
            )
        return max(len(self.exceptional), len(other.exceptional))

    # -- *-algebra operations ----------------------------------------------

    def __add__(self, other: "BlockOperator") -> "BlockOperator":
        m = self._aligned(other)
        return BlockOperator(
            self.block_dim,
            tuple(self.block_at(i) + other.block_at(i) for i in range(m)),
            self.tail + other.tail,
        )

    def __sub__(self, other: "BlockOperator") -> "BlockOperator":
        return self + (-1.0) * other

    def __neg__(self) -> "BlockOperator":
        return (-1.0) * self

    def __mul__(self, other):
        if isinstance(other, BlockOperator):
            m = self._aligned(other)
            return BlockOperator(
                self.block_dim,
                tuple(self.block_at(i) @ other.block_at(i) for i in range(m)),
                self.tail @ other.tail,
            )
        return BlockOperator(
            self.block_dim,
            tuple(other * b for b in self.exceptional),
            other * self.tail,
        )

    def __rmul__(self, scalar) -> "BlockOperator":
        return self * scalar

    def adjoint(self) -> "BlockOperator":
        return BlockOperator(
            self.block_dim,
            tuple(b.conj().T for b in self.exceptional),
            self.tail.conj().T,
        )

    def norm(self) -> float:
        """Exact operator norm: the largest block norm."""
        norms = [op_norm(b) for b in self.exceptional]
        norms.append(op_norm(self.tail))
        return max(norms)

    def is_compact(self) -> bool:
        """Zero tail: only finitely many nonzero blocks."""
        return not np.any(self.tail)

    def truncate(self, n_blocks: int) -> np.ndarray:
        """Dense matrix of the first ``n_blocks`` blocks."""
        d = self.block_dim
        out = np.zeros((n_blocks * d, n_blocks * d), dtype=np.complex128)
        for i in range(n_blocks):
            out[i * d:(i + 1) * d, i * d:(i + 1) * d] = self.block_at(i)
        return out


def block_identity(d: int) -> BlockOperator:
    return BlockOperator(d, (), np.eye(d, dtype=np.complex128))


def block_zero(d: int) -> BlockOperator:
    return BlockOperator(d, (), np.zeros((d, d), dtype=np.complex128))


def quotient(a: BlockOperator) -> np.ndarray:
    """Quotient map: the tail block.  A *-homomorphism, exactly: products,
    sums and adjoints of tails are computed by the very same matrix
    operations as in the block algebra."""
    return a.tail.copy()


# -- projection lifting ------------------------------------------------------


def _threshold_block(b: np.ndarray, tol: Tolerance) -> np.ndarray:
    w, u = herm_eig(b, tol)
    p = (u * (w >= 0.5).astype(float)) @ u.conj().T
    return (p + p.conj().T) / 2


def lift_projection(t: BlockOperator, tol: Tolerance | None = None) -> BlockOperator:
    """Spectral-threshold lift of an almost-projection to a projection.

    Each block is pushed through the step function that sends eigenvalues
    ``>= 1/2`` to one and the rest to zero.  Exceptional blocks must keep
    their spectrum out of the band of half-width ``SPECTRAL_GAP`` around
    1/2; the tail must already be a projection up to 1e-10.

    Raises
    ------
    NotSelfadjoint
        If a block is not bitwise selfadjoint.
    NoSpectralGap
        If an exceptional eigenvalue falls inside the forbidden band,
        reporting the offending eigenvalue.
    NotProjection
        If the tail is not a projection within 1e-10.
    """
    tol = tol or default_tolerance()
    for i, b in enumerate((*t.exceptional, t.tail)):
        if not np.array_equal(b, b.conj().T):
            raise NotSelfadjoint(f"block {i} is not selfadjoint")
    try:
        make_projection(t.tail)
    except Exception as exc:
        raise NotProjection(f"tail is not a projection: {exc}") from exc
    new_blocks = []
    for i, b in enumerate(t.exceptional):
        w, _ = herm_eig(b, tol)
        bad = np.abs(w - 0.5) < SPECTRAL_GAP
        if np.any(bad):
            offending = float(w[bad][0])
            raise NoSpectralGap(
                f"eigenvalue {offending!r} of exceptional block {i} lies "
                f"within {SPECTRAL_GAP} of 1/2"
            )
        new_blocks.append(_threshold_block(b, tol))
    new_tail = _threshold_block(t.tail, tol)
    return BlockOperator(t.block_dim, tuple(new_blocks), new_tail)


# -- norm-minimal selfadjoint lifting ----------------------------------------


@dataclass(frozen=True)
class DiagonalSequence:
    """Real sequence: a finite prefix followed by a cycle repeated forever.

    The eventual behaviour is exactly the cycle, so ``limsup |d_n|`` is the
    largest absolute cycle value.
    """

    prefix: tuple[float, ...]
    tail_cycle: tuple[float, ...]

    def __post_init__(self):
        prefix = tuple(float(x) for x in self.prefix)
        cycle = tuple(float(x) for x in self.tail_cycle)
        if not cycle:
            raise ValueError("tail_cycle must be non-empty")
        values = prefix + cycle
        if not all(np.isfinite(values)):
            raise ValueError("sequence has non-finite entries")
        object.__setattr__(self, "prefix", prefix)
        object.__setattr__(self, "tail_cycle", cycle)

    def value_at(self, n: int) -> float:
        if n < len(self.prefix):
            return self.prefix[n]
        return self.tail_cycle[(n - len(self.prefix)) % len(self.tail_cycle)]

    def limsup_abs(self) -> float:
        return max(abs(x) for x in self.tail_cycle)

    def sup_abs(self) -> float:
        return max(self.limsup_abs(), max((abs(x) for x in self.prefix), default=0.0))

    def __add__(self, other: "DiagonalSequence") -> "DiagonalSequence":
        if not isinstance(other, DiagonalSequence):
            return NotImplemented
        head = max(len(self.prefix), len(other.prefix))
        cyc = lcm(len(self.tail_cycle), len(other.tail_cycle))
        prefix = tuple(self.value_at(n) + other.value_at(n) for n in range(head))
        cycle = tuple(
            self.value_at(head + j) + other.value_at(head + j) for j in range(cyc)
        )
        return DiagonalSequence(prefix, cycle)


def _clip_correction(x: float, level: float) -> float:
    """Correction k with ``|x + k|`` inside ``[-level, level]`` as floats.

    Starts from ``clip(x) - x`` and, if re-rounding pushed the sum one ulp
    outside the band, walks the correction toward ``-x`` (whose sum is
    exactly zero, so the walk always terminates inside).
    """
    if abs(x) <= level:
        return 0.0
    k = (level if x > 0 else -level) - x
    while abs(x + k) > level:
        k = np.nextafter(k, -x)
    return k


def minimal_norm_lift(d: DiagonalSequence) -> DiagonalSequence:
    """Eventually-zero correction ``k0`` with ``sup |d + k0| = limsup |d|``.

    Prefix entries are clipped into ``[-L, L]`` with ``L = limsup |d|``
    (two-sided clipping; no eventual entry ever exceeds ``L``), so the
    equality holds exactly in floating point.  No eventually-zero
    correction can do better: it leaves the cycle, and hence the limsup,
    untouched.
    """
    level = d.limsup_abs()
    prefix = tuple(_clip_correction(x, level) for x in d.prefix)
    return DiagonalSequence(prefix, (0.0,) * len(d.tail_cycle))


# -- geodesic lifting ---------------------------------------------------------


def lift_geodesic(
    p: np.ndarray,
    z: np.ndarray,
    lift_p: BlockOperator,
    tol: Tolerance | None = None,
) -> BlockOperator:
    """Lift a quotient geodesic exponent without increasing its norm.

    Given a quotient projection ``p``, a skew ``p``-codiagonal exponent
    ``z`` with ``|z| <= pi/2``, and any block projection ``lift_p`` whose
    tail is exactly ``p`` (the initial point is free within the fiber),
    the lift places ``z`` on the tail and compresses it to the codiagonal
    corners ``P z (1-P) + (1-P) z P`` on each exceptional block.
    Compression cannot increase a norm while the tail pins it from below,
    so the lifted norm equals ``|z|``.
    """
    tol = tol or default_tolerance()
    d = lift_p.block_dim
    p = _as_block(p, d)
    z = _as_block(z, d)
    make_projection(p)
    eye = np.eye(d)
    if op_norm(z + z.conj().T) > 1e-10:
        raise NotCodiagonal("exponent is not skew")
    if max(op_norm(p @ z @ p), op_norm((eye - p) @ z @ (eye - p))) > 1e-10:
        raise NotCodiagonal("exponent is not codiagonal with respect to p")
    z_norm = op_norm(z)
    if z_norm > np.pi / 2 + 1e-12:
        raise NormTooLarge(f"|z| = {z_norm!r} exceeds pi/2")
    if not np.array_equal(lift_p.tail, p):
        raise NotProjection("lift_p is not a lift of p: tails differ")
    for b in lift_p.exceptional:
        make_projection(b)
    blocks = []
    for b in lift_p.exceptional:
        corner = b @ z @ (eye - b) + (eye - b) @ z @ b
        blocks.append((corner - corner.conj().T) / 2)
    # the tail carries z itself, so the quotient of the lift is exact
    return BlockOperator(d, tuple(blocks), z)


def evaluate_block_geodesic(lift_p: BlockOperator, z: BlockOperator):
    """Blockwise geodesic ``t -> exp(tZ) P exp(-tZ)`` as a curve of
    BlockOperators.

    Each block evolves independently; in particular the tail of the curve
    is exactly the quotient geodesic of the tails.
    """
    if lift_p.block_dim != z.block_dim:
        raise BlockDimMismatch("block dims differ")
    m = max(len(lift_p.exceptional), len(z.exceptional))
    segments = [
        GeodesicSegment(base=lift_p.block_at(i), exponent=z.block_at(i))
        for i in range(m)
    ]
    tail_segment = GeodesicSegment(base=lift_p.tail, exponent=z.tail)

    def at(t: float) -> BlockOperator:
        return BlockOperator(
            lift_p.block_dim,
            tuple(evaluate(s, t) for s in segments),
            evaluate(tail_segment, t),
        )

    return at


# -- existence dichotomy -------------------------------------------------------


class DichotomyCase(Enum):
    FINITE_FINITE = "FiniteFinite"
    INFINITE_INFINITE = "InfiniteInfinite"
    MIXED = "Mixed"


@dataclass(frozen=True)
class DichotomyResult:
    exists: bool
    case: DichotomyCase
    witnesses: tuple[BlockOperator, BlockOperator] | None
    quotient_index: IndexPair


def lifting_surgery(
    lift_p: BlockOperator,
    lift_q: BlockOperator,
    tol: Tolerance | None = None,
) -> tuple[BlockOperator, BlockOperator]:
    """Remove crossed intersections from every exceptional block pair.

    Each exceptional pair ``(P_i, Q_i)`` is replaced by its restriction to
    the aligned intersection plus the generic part, dropping the two
    crossed intersections.  This changes nothing modulo the ideal (the
    tails are untouched) and leaves every exceptional pair with index
    ``(0, 0)``.
    """
    tol = tol or default_tolerance()
    if lift_p.block_dim != lift_q.block_dim:
        raise BlockDimMismatch("block dims differ")
    d = lift_p.block_dim
    m = max(len(lift_p.exceptional), len(lift_q.exceptional))
    new_p, new_q = [], []
    for i in range(m):
        bp, bq = lift_p.block_at(i), lift_q.block_at(i)
        fs = halmos_decompose(bp, bq, tol)
        if fs.m10.shape[1] == 0 and fs.m01.shape[1] == 0:
            new_p.append(bp)
            new_q.append(bq)
            continue
        aligned = fs.m11 @ fs.m11.conj().T
        h = fs.h0
        rp = aligned + h @ fs.p0 @ h.conj().T
        rq = aligned + h @ fs.q0 @ h.conj().T
        new_p.append(make_projection((rp + rp.conj().T) / 2))
        new_q.append(make_projection((rq + rq.conj().T) / 2))
    return (
        BlockOperator(d, tuple(new_p), lift_p.tail),
        BlockOperator(d, tuple(new_q), lift_q.tail),
    )


def existence_dichotomy(
    p: np.ndarray,
    q: np.ndarray,
    *,
    lifts: tuple[BlockOperator, BlockOperator] | None = None,
    tol: Tolerance | None = None,
) -> DichotomyResult:
    """Classify a quotient pair by the nullities of ``p - q -+ 1``.

    Both trivial: every lift has finite crossed nullspaces (FiniteFinite).
    Both nontrivial: the repeating tail makes both crossed nullspaces
    infinite-dimensional (InfiniteInfinite).  Exactly one trivial: the
    characters can never match (Mixed), and no geodesic exists.

    When lifts are supplied their tails must equal ``p`` and ``q``; in the
    FiniteFinite case their exceptional discrepancies are removed by
    ``lifting_surgery`` so the returned witnesses have balanced index on
    every block.
    """
    tol = tol or default_tolerance()
    p = as_cmatrix(p)
    q = as_cmatrix(q)
    try:
        make_projection(p)
        make_projection(q)
    except Exception as exc:
        raise NotProjection(str(exc)) from exc
    d = p.shape[0]
    ip = index_pair(p, q, tol)
    if ip.d_plus == 0 and ip.d_minus == 0:
        case = DichotomyCase.FINITE_FINITE
    elif ip.d_plus > 0 and ip.d_minus > 0:
        case = DichotomyCase.INFINITE_INFINITE
    else:
        case = DichotomyCase.MIXED

    if lifts is None:
        lifts = (BlockOperator(d, (), p), BlockOperator(d, (), q))
    else:
        lp, lq = lifts
        if not (np.array_equal(lp.tail, p) and np.array_equal(lq.tail, q)):
            raise NotProjection("supplied lifts do not have tails p, q")
        for b in (*lp.exceptional, *lq.exceptional):
            make_projection(b)

    if case is DichotomyCase.MIXED:
        return DichotomyResult(False, case, None, ip)
    witnesses = lifts
    if case is DichotomyCase.FINITE_FINITE:
        witnesses = lifting_surgery(*lifts, tol=tol)
    return DichotomyResult(True, case, witnesses, ip)


def truncated_index_pairs(
    lift_p: BlockOperator,
    lift_q: BlockOperator,
    lengths,
    tol: Tolerance | None = None,
) -> list[IndexPair]:
    """Index pairs of dense truncations, one per truncation length."""
    tol = tol or default_tolerance()
    out = []
    for n_blocks in lengths:
        tp = lift_p.truncate(n_blocks)
        tq = lift_q.truncate(n_blocks)
        eye = np.eye(tp.shape[0])
        out.append(
            IndexPair(
                d_plus=nullity(tp - tq - eye, tol, scale=1.0),
                d_minus=nullity(tp - tq + eye, tol, scale=1.0),
            )
        )
    return out


# -- quotient geodesics --------------------------------------------------------


@dataclass(frozen=True)
class QuotientGeodesic:
    segment: GeodesicSegment
    unique: bool
    case: DichotomyCase
    lift_commutation_error: float | None


def quotient_geodesic(
    p: np.ndarray,
    q: np.ndarray,
    tol: Tolerance | None = None,
) -> QuotientGeodesic:
    """Minimal geodesic between quotient projections, with a lift check.

    The exponent is computed on the ``d x d`` quotient matrices.  The
    block-periodic model realizes a quotient geodesic only when the tail
    index pair is balanced: with both crossed nullities positive but
    unequal the dichotomy still reports existence (the crossed spaces are
    both infinite-dimensional), yet any pairing between them must cross
    block boundaries and leaves the periodic algebra; that case raises
    ``NoGeodesic`` here.

    Uniqueness is decided by invertibility of ``p + q - 1`` at the rank
    threshold, which in a matrix algebra is the same as its annihilator
    being trivial.
    """
    tol = tol or default_tolerance()
    dich = existence_dichotomy(p, q, tol=tol)
    if not dich.exists:
        raise NoGeodesic(
            f"no geodesic: index {tuple(dich.quotient_index)} has mixed character"
        )
    if dich.quotient_index.d_plus != dich.quotient_index.d_minus:
        raise NoGeodesic(
            f"tail index {tuple(dich.quotient_index)} is unbalanced: the "
            "crossed pairing is not block-periodic"
        )
    segment = minimal_exponent(p, q, tol=tol)
    commutation = None
    if dich.case is DichotomyCase.FINITE_FINITE:
        wp, wq = dich.witnesses
        tail_seg = minimal_exponent(quotient(wp), quotient(wq), tol=tol)
        commutation = op_norm(tail_seg.exponent - segment.exponent)
    b_minus_one = (p + q) - np.eye(p.shape[0])
    sing = np.linalg.svd(b_minus_one, compute_uv=False)
    scale = float(sing[0]) if sing.size else 0.0
    unique = bool(scale > 0.0 and float(sing[-1]) > tol.rank_rtol * scale)
    return QuotientGeodesic(
        segment=segment,
        unique=unique,
        case=dich.case,
        lift_commutation_error=commutation,
    )
