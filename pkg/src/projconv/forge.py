"""Explicit divergent paths for systems the decider rejects.

:func:`dispatch` picks a recipe, :func:`make_generator` turns it into an
infinite deterministic symbol stream, and :func:`certify` runs the engine
on a long prefix and checks that the ratio keeps returning to two distinct
clusters.

Recipes whose gap lengths only need to be "large enough" are scheduled
adaptively: the generator tracks ``w = q/p`` exactly, with the same frame
conventions as the engine, and only switches symbol once ``w`` has crossed
``2**i`` (or ``2**-i``) in the direction the current diagonal run pushes it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .algebra import Mat2, MatrixSystem, ShapeTag, classify, conjugate_by_delta, det
from .clusters import MIN_VISITS, two_clusters
from .decider import Verdict, decide
from .engine import DetSign, Mode, ProjectiveRatio, compute_A, init, iterate
from .errors import CertificationFailed, InternalExhaustive, NotApplicable

DEFAULT_STEPS = 10_000
DEFAULT_DELTA_MIN = 1e-3


class ForgeTag(enum.Enum):
    CONST_ANTIDIAG = "ConstAntidiag"
    ALTERNATE_DIAG_ANTIDIAG = "AlternateDiagAntidiag"
    SPARSE_LOWER_TRI = "SparseLowerTri"
    DIAGONAL_BLOCKS = "DiagonalBlocks"
    NULLVEC_LOWER_TRI = "NullVec_LowerTri"
    NULLVEC_UPPER_TRI = "NullVec_UpperTri"
    NULLVEC_ANTIDIAG = "NullVec_Antidiag"


@dataclass(frozen=True)
class ForgeCase:
    """Recipe plus the matrix indices it uses.

    ``k`` is the antidiagonal matrix for the first two recipes and the
    diagonal driver otherwise; ``h`` is the second matrix of an alternating
    or sparse schedule; ``ell`` is the opposite diagonal of DiagonalBlocks.
    """

    tag: ForgeTag
    k: int
    h: int | None = None
    ell: int | None = None
    mirror_derived: bool = False

    def as_dict(self) -> dict:
        out = {"case": self.tag.value, "k": self.k}
        if self.h is not None:
            out["h"] = self.h
        if self.ell is not None:
            out["ell"] = self.ell
        out["mirror_derived"] = self.mirror_derived
        return out


# ---------------------------------------------------------------------------
# dispatch


def _has_eigenvector(M: Mat2, V) -> bool:
    y1 = M.a * V.v1 + M.b * V.v2
    y2 = M.c * V.v1 + M.d * V.v2
    return y1 * V.v2 == y2 * V.v1


def dispatch(system: MatrixSystem, verdict: Verdict | None = None) -> ForgeCase:
    verdict = verdict or decide(system)
    if verdict.converges_all:
        raise NotApplicable("the system converges along every admissible path")
    V = system.V
    antidiag, diag_gt, diag_lt, a_zero, d_zero = [], [], [], [], []
    for idx, M in enumerate(system.matrices):
        s = classify(M)
        if not s.invertible:
            continue
        if s.tag is ShapeTag.ANTIDIAGONAL:
            antidiag.append(idx)
        elif s.tag is ShapeTag.DIAGONAL:
            if M.a > M.d:
                diag_gt.append(idx)
            elif M.a < M.d:
                diag_lt.append(idx)
        elif M.a == 0:
            a_zero.append(idx)
        elif M.d == 0:
            d_zero.append(idx)

    for idx in antidiag:
        if not _has_eigenvector(system.matrices[idx], V):
            return ForgeCase(ForgeTag.CONST_ANTIDIAG, k=idx)
    if antidiag:
        distinct = sorted(diag_gt + diag_lt)
        if distinct:
            return ForgeCase(ForgeTag.ALTERNATE_DIAG_ANTIDIAG, k=antidiag[0], h=distinct[0])
        raise InternalExhaustive("antidiagonal matrices all fix V but no distinct diagonal exists")

    if V.positive:
        if diag_gt:
            k = diag_gt[0]
            partner = min(a_zero + diag_lt, default=None)
            if partner is None:
                raise InternalExhaustive("condition (ii) fails without a witness")
            if partner in a_zero:
                return ForgeCase(ForgeTag.SPARSE_LOWER_TRI, k=k, h=partner)
            return ForgeCase(ForgeTag.DIAGONAL_BLOCKS, k=k, ell=partner)
        if diag_lt and d_zero:
            return ForgeCase(ForgeTag.SPARSE_LOWER_TRI, k=diag_lt[0], h=d_zero[0], mirror_derived=True)
        raise InternalExhaustive("no distinct diagonal matrix with a matching partner")

    if diag_gt and a_zero:
        return ForgeCase(ForgeTag.NULLVEC_LOWER_TRI, k=diag_gt[0], h=a_zero[0])
    if diag_lt and d_zero:
        return ForgeCase(ForgeTag.NULLVEC_UPPER_TRI, k=diag_lt[0], h=d_zero[0], mirror_derived=True)
    raise InternalExhaustive(
        "V has a null entry and the family has no diagonal matrix with distinct "
        "entries to pair with its a=0 / d=0 matrices; no recipe applies"
    )


# ---------------------------------------------------------------------------
# generators


class OmegaGenerator:
    """Deterministic infinite symbol stream for one recipe."""

    def __init__(self, system: MatrixSystem, case: ForgeCase):
        self.system = system
        self.case = case
        self.emitted = 0

    def __iter__(self) -> Iterator[int]:
        return self

    def __next__(self) -> int:
        return self.next_symbol()

    def next_symbol(self) -> int:
        k = self._next()
        self.emitted += 1
        return k

    def _next(self) -> int:
        raise NotImplementedError

    def fresh(self) -> "OmegaGenerator":
        return make_generator(self.system, self.case)

    def prefix(self, n: int) -> list[int]:
        g = self.fresh()
        return [g.next_symbol() for _ in range(n)]


class _Constant(OmegaGenerator):
    def _next(self):
        return self.case.k


class _Alternate(OmegaGenerator):
    def _next(self):
        return self.case.h if self.emitted % 2 == 0 else self.case.k


class _WTracker:
    """Exact ``w = q/p`` in the engine's internal frame."""

    def __init__(self):
        self.sign = DetSign.PLUS
        self.mirrored = False
        self.w: Fraction | None = None

    def frame_A(self, M: Mat2) -> Mat2:
        A = compute_A(self.sign, M)
        return conjugate_by_delta(A) if self.mirrored else A

    def push(self, M: Mat2):
        A = self.frame_A(M)
        if self.w is None:
            if A.b or A.c:
                if A.b == 0:
                    self.mirrored = True
                    A = conjugate_by_delta(A)
                self.w = A.b / A.a
        else:
            w = self.w
            self.w = (A.b + A.d * w) / (A.a + A.c * w)
        if det(M) < 0:
            self.sign = DetSign.MINUS if self.sign is DetSign.PLUS else DetSign.PLUS


class _SparseTri(OmegaGenerator):
    """``h`` at sparse positions, the diagonal ``k`` in between."""

    def __init__(self, system, case):
        super().__init__(system, case)
        self.tracker = _WTracker()
        self.block = 0
        self.gaps: list[int] = []
        self._gap = 0

    def _emit(self, idx):
        self.tracker.push(self.system.matrices[idx])
        return idx

    def _next(self):
        Mk = self.system.matrices[self.case.k]
        if self.block == 0:
            self.block = 1
            return self._emit(self.case.h)
        A = self.tracker.frame_A(Mk)
        w = self.tracker.w
        i = self.block
        crossed = w >= 2**i if A.d > A.a else w <= Fraction(1, 2**i)
        if crossed:
            self.gaps.append(self._gap)
            self._gap = 0
            self.block += 1
            return self._emit(self.case.h)
        self._gap += 1
        return self._emit(self.case.k)


class _DiagBlocks(OmegaGenerator):
    def __init__(self, system, case):
        super().__init__(system, case)
        self.rho = Fraction(1)
        self.block = 1
        Mk = system.matrices[case.k]
        Ml = system.matrices[case.ell]
        self._factor = {case.k: Mk.d / Mk.a, case.ell: Ml.d / Ml.a}

    def _next(self):
        j = self.block
        idx = self.case.ell if j % 2 else self.case.k
        self.rho *= self._factor[idx]
        if (j % 2 and self.rho >= 2**j) or (not j % 2 and self.rho <= Fraction(1, 2**j)):
            self.block += 1
        return idx


class _NullAntidiag(OmegaGenerator):
    """``h''`` at positions ``i_j`` with ``i_{j+1} - i_j = j + 1``."""

    def __init__(self, system, case):
        super().__init__(system, case)
        self.block = 1
        self.left = 0

    def _next(self):
        if self.left == 0:
            self.left = self.block
            self.block += 1
            return self.case.h
        self.left -= 1
        return self.case.k


_GENERATORS = {
    ForgeTag.CONST_ANTIDIAG: _Constant,
    ForgeTag.ALTERNATE_DIAG_ANTIDIAG: _Alternate,
    ForgeTag.SPARSE_LOWER_TRI: _SparseTri,
    ForgeTag.NULLVEC_LOWER_TRI: _SparseTri,
    ForgeTag.NULLVEC_UPPER_TRI: _SparseTri,
    ForgeTag.DIAGONAL_BLOCKS: _DiagBlocks,
    ForgeTag.NULLVEC_ANTIDIAG: _NullAntidiag,
}


def make_generator(system: MatrixSystem, case: ForgeCase) -> OmegaGenerator:
    return _GENERATORS[case.tag](system, case)


def next_symbol(gen: OmegaGenerator) -> int:
    return gen.next_symbol()


def forge(system: MatrixSystem) -> OmegaGenerator:
    return make_generator(system, dispatch(system))


# ---------------------------------------------------------------------------
# certification


@dataclass(frozen=True)
class DivergenceCertificate:
    case: ForgeCase
    cluster_lo: ProjectiveRatio | float
    cluster_hi: ProjectiveRatio | float
    separation: Fraction | float
    visits_lo: int
    visits_hi: int
    steps_used: int
    mode: Mode

    def as_dict(self) -> dict:
        def fmt(x):
            return str(x) if isinstance(x, (ProjectiveRatio, Fraction)) else repr(x)

        return {
            **self.case.as_dict(),
            "cluster_lo": fmt(self.cluster_lo),
            "cluster_hi": fmt(self.cluster_hi),
            "separation": fmt(self.separation),
            "separation_float": float(self.separation),
            "visits_lo": self.visits_lo,
            "visits_hi": self.visits_hi,
            "steps_used": self.steps_used,
            "mode": self.mode.value,
        }


def certify(
    system: MatrixSystem,
    gen: OmegaGenerator | ForgeCase | None = None,
    steps: int = DEFAULT_STEPS,
    delta_min: float = DEFAULT_DELTA_MIN,
    mode: Mode = Mode.EXACT,
) -> DivergenceCertificate:
    if gen is None:
        gen = forge(system)
    elif isinstance(gen, ForgeCase):
        gen = make_generator(system, gen)
    else:
        gen = gen.fresh()
    state = init(system, mode)
    half = steps // 2
    tail_m, tail_ratio = [], []
    used = 0
    for rec in iterate(state, gen, steps):
        used = rec.n
        if rec.excluded:
            break
        if rec.n > half:
            tail_m.append(rec.m)
            tail_ratio.append(rec.ratio)
    if state.excluded or len(tail_m) < 2:
        raise CertificationFailed(f"forged path ended early at step {used}", oscillation=0.0)
    stats = two_clusters(tail_m)
    if not stats.oscillates(delta_min, MIN_VISITS):
        raise CertificationFailed(
            f"tail oscillation {stats.separation:.3g} with visits "
            f"{stats.visits_lo}/{stats.visits_hi} does not certify divergence",
            oscillation=stats.separation,
        )
    lo, hi = tail_ratio[stats.lo_index], tail_ratio[stats.hi_index]
    if mode is Mode.EXACT:
        separation = hi.m() - lo.m()
    else:
        separation = stats.separation
    return DivergenceCertificate(
        gen.case, lo, hi, separation, stats.visits_lo, stats.visits_hi, used, mode
    )
