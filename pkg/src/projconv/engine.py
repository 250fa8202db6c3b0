"""Step-by-step simulation of one symbol path.

The engine never multiplies the raw matrices.  Every factor is replaced by
the swap-variant with positive determinant (``A_n``), so the cumulative
product ``P = (p q; r s)`` always has ``det P > 0`` and equals ``Y_n`` or
``Y_n @ Delta`` depending on the sign of ``det Y_n``.  Once a non-diagonal
factor shows up (step ``n1``) the two column ratios ``u = r/p`` and
``v = s/q`` bracket the ratio ``(Y_n V)_2 / (Y_n V)_1`` and the bracket
shrinks monotonically.

If that first non-diagonal factor has ``b = 0`` the whole computation is
moved to the swap-conjugated frame (``mirrored``), where ``b != 0``.
``ratio`` in a :class:`StepRecord` is always reported for the original
system; ``u``, ``v``, ``w``, the factors and the L/U memberships are
internal-frame quantities and ``frame_ratio`` is the ratio they bracket.

Two arithmetic modes exist.  ``EXACT`` keeps the product as four Python
ints (inputs are reduced to primitive integer matrices first, so positive
rescaling of any input is invisible).  ``FLOAT`` keeps natural logs of the
norm-sum normalized entries, which survives ``w`` running off to 0 or inf.
"""

from __future__ import annotations

import copy
import enum
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

from .algebra import Mat2, MatrixSystem, classify, delta_variant, det, mplus, primitive_ints
from .errors import ExcludedPath, NotApplicable, SingularInput

DEFAULT_BITS_LIMIT = 1_000_000
BITS_ENV = "PROJCONV_BITS_LIMIT"

NEG_INF = float("-inf")
INF = float("inf")


class Mode(enum.Enum):
    EXACT = "exact"
    FLOAT = "float"


class DetSign(enum.Enum):
    PLUS = "+"
    MINUS = "-"
    LOCKED = "locked"


class TraceStatus(enum.Enum):
    COMPLETE = "complete"
    EXCLUDED = "excluded"
    EXHAUSTED = "exhausted"  # exact mode hit its bit budget


def default_bits_limit() -> int:
    raw = os.environ.get(BITS_ENV)
    return int(raw) if raw else DEFAULT_BITS_LIMIT


# ---------------------------------------------------------------------------
# projective ratios


class ProjectiveRatio:
    """A value in ``[0, inf]`` stored as an unreduced ``num/den`` pair.

    Infinity is ``den == 0``.  Comparison is by cross-multiplication, so
    huge unreduced pairs never need a gcd until they are printed.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=1):
        if isinstance(num, Fraction) or isinstance(den, Fraction):
            num, den = Fraction(num), Fraction(den)
            scale = num.denominator * den.denominator
            num, den = int(num * scale), int(den * scale)
        if num < 0 or den < 0:
            raise ValueError("projective ratio must be nonnegative")
        if num == 0 and den == 0:
            raise ValueError("0/0 is not a projective ratio")
        self.num = num
        self.den = den

    INFINITY: "ProjectiveRatio"

    @property
    def is_infinite(self) -> bool:
        return self.den == 0

    def reciprocal(self) -> "ProjectiveRatio":
        return ProjectiveRatio(self.den, self.num)

    def canonical(self) -> tuple[int, int]:
        g = math.gcd(self.num, self.den)
        return self.num // g, self.den // g

    def to_fraction(self) -> Fraction | None:
        return None if self.den == 0 else Fraction(self.num, self.den)

    def m(self) -> Fraction:
        """Image in ``[0, 1]`` under ``t -> t / (1 + t)``."""
        return Fraction(self.num, self.num + self.den)

    def m_float(self) -> float:
        return self.num / (self.num + self.den)

    def __float__(self):
        if self.den == 0:
            return INF
        try:
            return self.num / self.den
        except OverflowError:
            return INF

    def __eq__(self, other):
        if not isinstance(other, ProjectiveRatio):
            if isinstance(other, (int, Fraction)):
                other = ProjectiveRatio(Fraction(other))
            else:
                return NotImplemented
        return self.num * other.den == other.num * self.den

    def __lt__(self, other: "ProjectiveRatio"):
        return self.num * other.den < other.num * self.den

    def __le__(self, other: "ProjectiveRatio"):
        return self.num * other.den <= other.num * self.den

    def __gt__(self, other):
        return other < self

    def __ge__(self, other):
        return other <= self

    def __hash__(self):
        return hash(self.canonical())

    def __str__(self):
        n, d = self.canonical()
        return f"{n}/{d}"

    def __repr__(self):
        return f"ProjectiveRatio({self})"


ProjectiveRatio.INFINITY = ProjectiveRatio(1, 0)


def fraction_str(x: Fraction | None) -> str:
    if x is None:
        return ""
    return f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
# the A_n normal form


def _variant_index(sign: DetSign, det_positive: bool) -> tuple[int, int]:
    if sign is DetSign.PLUS:
        return (0, 0) if det_positive else (0, 1)
    return (1, 1) if det_positive else (1, 0)


def compute_A(det_sign: DetSign, M: Mat2) -> Mat2:
    """Positive-determinant swap variant of ``M`` given the sign of ``det Y_{n-1}``."""
    dM = det(M)
    if dM == 0:
        raise SingularInput(f"matrix {M} is singular")
    if det_sign is DetSign.LOCKED:
        raise ValueError("no normal form once a singular factor was applied")
    return delta_variant(M, *_variant_index(det_sign, dM > 0))


def _log(x) -> float:
    return math.log(x) if x > 0 else NEG_INF


def _lse(x: float, y: float) -> float:
    if x == NEG_INF:
        return y
    if y == NEG_INF:
        return x
    if x > y:
        return x + math.log1p(math.exp(y - x))
    return y + math.log1p(math.exp(x - y))


def _softplus(x: float) -> float:
    if x > 35.0:
        return x
    if x == NEG_INF:
        return 0.0
    return math.log1p(math.exp(x))


def _safe_exp(x: float) -> float:
    if x > 709.0:
        return INF
    return math.exp(x)


def expit_log(lt: float) -> float:
    """``t / (1 + t)`` for ``t = exp(lt)``."""
    if lt >= 0:
        return 1.0 / (1.0 + math.exp(-lt)) if lt != INF else 1.0
    e = math.exp(lt)
    return e / (1.0 + e)


@dataclass(frozen=True)
class _Symbol:
    """Precomputed data for one matrix of the family."""

    index: int
    M: Mat2
    sign: int  # sign of det M
    prim: tuple[int, int, int, int]
    variants: dict  # (i, j) -> Mat2
    ivariants: dict  # (i, j) -> int quadruple
    lvariants: dict  # (i, j) -> log quadruple
    ldet: float  # log |det| of the primitive variant
    gamma: dict  # (i, j) -> Fraction (1 - bc/ad) for positive-det variants

    @classmethod
    def build(cls, index: int, M: Mat2) -> "_Symbol":
        dM = det(M)
        prim = primitive_ints(M.entries)
        variants, ivariants, lvariants, gamma = {}, {}, {}, {}
        for i in (0, 1):
            for j in (0, 1):
                X = delta_variant(M, i, j)
                variants[i, j] = X
                a, b, c, d = prim
                if i:
                    a, b, c, d = c, d, a, b
                if j:
                    a, b, c, d = b, a, d, c
                ivariants[i, j] = (a, b, c, d)
                lvariants[i, j] = tuple(_log(x) for x in (a, b, c, d))
                if a * d - b * c > 0:
                    gamma[i, j] = Fraction(a * d - b * c, a * d)
        pdet = prim[0] * prim[3] - prim[1] * prim[2]
        return cls(
            index,
            M,
            (dM > 0) - (dM < 0),
            prim,
            variants,
            ivariants,
            lvariants,
            _log(abs(pdet)),
            gamma,
        )


# ---------------------------------------------------------------------------
# step records


class StepRecord:
    """Common surface of exact and float step records."""

    __slots__ = ()
    mode: Mode

    @property
    def defined(self) -> bool:
        """Whether the bracket quantities (u, v, w, ...) exist at this step."""
        return self.n1 is not None and self.det_sign is not DetSign.LOCKED and not self.excluded

    @property
    def shape(self):
        return None if self.A is None else classify(self.A)


class ExactStepRecord(StepRecord):
    __slots__ = (
        "n", "symbol", "A", "Aint", "det_sign", "mirrored", "n1", "P", "detP",
        "prev", "W", "_ratio", "_frame", "excluded",
    )
    mode = Mode.EXACT

    def __init__(self, n, symbol, A, Aint, det_sign, mirrored, n1, P, detP, prev, W, ratio, frame, excluded):
        self.n = n
        self.symbol = symbol
        self.A = A
        self.Aint = Aint
        self.det_sign = det_sign
        self.mirrored = mirrored
        self.n1 = n1
        self.P = P
        self.detP = detP
        self.prev = prev
        self.W = W
        self._ratio = ratio
        self._frame = frame
        self.excluded = excluded

    @property
    def ratio(self) -> ProjectiveRatio | None:
        return self._ratio

    @property
    def frame_ratio(self) -> ProjectiveRatio | None:
        return self._frame

    @property
    def m(self) -> float:
        return self._ratio.m_float()

    @property
    def ratio_float(self) -> float:
        return float(self._ratio)

    @property
    def in_L(self) -> bool:
        return self.Aint is not None and self.Aint[2] != 0

    @property
    def in_U(self) -> bool:
        return self.Aint is not None and self.Aint[1] != 0

    @property
    def u(self) -> Fraction | None:
        if not self.defined:
            return None
        p, q, r, s = self.P
        return Fraction(r, p)

    @property
    def v(self) -> Fraction | None:
        if not self.defined:
            return None
        p, q, r, s = self.P
        return Fraction(s, q)

    @property
    def w(self) -> Fraction | None:
        if not self.defined:
            return None
        return Fraction(self.P[1], self.P[0])

    @property
    def x(self) -> ProjectiveRatio | None:
        if not self.defined:
            return None
        return ProjectiveRatio(self.W[1], self.W[0])

    @property
    def lam(self) -> Fraction | None:
        if not self.defined:
            return None
        p, q = self.P[0], self.P[1]
        w1, w2 = self.W
        return Fraction(p * w1, p * w1 + q * w2)

    @property
    def width(self) -> Fraction | None:
        if not self.defined:
            return None
        return Fraction(self.detP, self.P[0] * self.P[1])

    @property
    def alpha(self) -> Fraction | None:
        if not self.defined or self.prev is None:
            return None
        a, b, c, d = self.Aint
        pp, qp = self.prev
        return Fraction(a * pp, a * pp + c * qp)

    @property
    def beta(self) -> Fraction | None:
        if not self.defined or self.prev is None:
            return None
        a, b, c, d = self.Aint
        pp, qp = self.prev
        return Fraction(d * qp, d * qp + b * pp)

    @property
    def gamma(self) -> Fraction | None:
        if not self.defined or self.prev is None:
            return None
        a, b, c, d = self.Aint
        return Fraction(a * d - b * c, a * d)

    @property
    def w_prev(self) -> Fraction | None:
        if self.prev is None:
            return None
        return Fraction(self.prev[1], self.prev[0])


class FloatStepRecord(StepRecord):
    __slots__ = (
        "n", "symbol", "A", "det_sign", "mirrored", "n1", "excluded", "in_L", "in_U",
        "log_ratio", "log_frame", "lu", "lv", "lw", "lwidth", "alpha", "beta", "gamma", "lw_prev",
    )
    mode = Mode.FLOAT

    def __init__(self, n, symbol, A, det_sign, mirrored, n1, excluded, in_L, in_U, log_ratio, log_frame):
        self.n = n
        self.symbol = symbol
        self.A = A
        self.det_sign = det_sign
        self.mirrored = mirrored
        self.n1 = n1
        self.excluded = excluded
        self.in_L = in_L
        self.in_U = in_U
        self.log_ratio = log_ratio
        self.log_frame = log_frame
        self.lu = self.lv = self.lw = self.lwidth = None
        self.alpha = self.beta = self.gamma = self.lw_prev = None

    @property
    def m(self) -> float:
        return expit_log(self.log_ratio)

    @property
    def ratio_float(self) -> float:
        lt = self.log_ratio
        if lt == INF:
            return INF
        return _safe_exp(lt)

    ratio = ratio_float

    @property
    def frame_ratio(self) -> float:
        return _safe_exp(self.log_frame) if self.log_frame != INF else INF

    def _exp(self, x):
        if x is None or not self.defined:
            return None
        return _safe_exp(x) if x != INF else INF

    @property
    def u(self):
        return self._exp(self.lu)

    @property
    def v(self):
        return self._exp(self.lv)

    @property
    def w(self):
        return self._exp(self.lw)

    @property
    def width(self):
        return self._exp(self.lwidth)

    @property
    def w_prev(self):
        return None if self.lw_prev is None else _safe_exp(self.lw_prev)


# ---------------------------------------------------------------------------
# state


@dataclass
class ProductState:
    """Incremental state of one symbol path.

    Mutable and single-owner; :func:`step` returns an advanced copy, while
    :meth:`advance` updates in place and is what the drivers use.
    """

    symbols: tuple
    mode: Mode
    V: tuple  # primitive integers (exact) or logs (float), original frame
    bits_limit: int
    n: int = 0
    det_sign: DetSign = DetSign.PLUS
    mirrored: bool = False
    n1: int | None = None
    P: tuple = (1, 0, 0, 1)
    detP: object = 1  # int, or log of det of the normalized P in float mode
    Y: tuple | None = None  # original-frame product once locked
    locked_ratio: ProjectiveRatio | None = None
    log_scale: float = 0.0
    excluded: bool = False
    exhausted: bool = False
    last: StepRecord | None = field(default=None, repr=False)

    @property
    def ratio(self):
        """Current ratio ``(Y_n V)_2 / (Y_n V)_1`` (original frame)."""
        if self.last is not None:
            return self.last.ratio
        v1, v2 = self.V
        if self.mode is Mode.EXACT:
            return ProjectiveRatio(v2, v1)
        return _safe_exp(v2 - v1) if v2 - v1 != INF else INF

    def copy(self) -> "ProductState":
        return copy.copy(self)

    def advance(self, k: int) -> StepRecord:
        if self.excluded:
            raise ExcludedPath(f"path already excluded at step {self.n}")
        if not 0 <= k < len(self.symbols):
            raise IndexError(f"symbol {k} out of range for {len(self.symbols)} matrices")
        sym = self.symbols[k]
        self.n += 1
        if self.mode is Mode.EXACT:
            rec = self._advance_exact(sym)
        else:
            rec = self._advance_float(sym)
        self.last = rec
        return rec

    # -- exact -------------------------------------------------------------

    def _frame_W(self):
        v1, v2 = self.V
        if self.mirrored:
            v1, v2 = v2, v1
        if self.det_sign is DetSign.MINUS:
            v1, v2 = v2, v1
        return v1, v2

    def _original_Y(self):
        p, q, r, s = self.P
        if self.mirrored:
            p, q, r, s = s, r, q, p
        if self.det_sign is DetSign.MINUS:
            p, q, r, s = q, p, s, r
        return p, q, r, s

    def _advance_exact(self, sym: _Symbol) -> ExactStepRecord:
        if self.det_sign is DetSign.LOCKED or sym.sign == 0:
            return self._advance_locked_exact(sym)
        i, j = _variant_index(self.det_sign, sym.sign > 0)
        if self.mirrored:
            i, j = 1 - i, 1 - j
        a, b, c, d = sym.ivariants[i, j]
        if self.n1 is None and (b or c):
            if b == 0:
                self.mirrored = True
                p, q, r, s = self.P
                self.P = (s, r, q, p)
                i, j = 1 - i, 1 - j
                a, b, c, d = sym.ivariants[i, j]
            self.n1 = self.n
        prev = (self.P[0], self.P[1]) if self.n1 is not None and self.n1 < self.n else None
        p, q, r, s = self.P
        self.P = (p * a + q * c, p * b + q * d, r * a + s * c, r * b + s * d)
        self.detP *= a * d - b * c
        if sym.sign < 0:
            self.det_sign = DetSign.MINUS if self.det_sign is DetSign.PLUS else DetSign.PLUS
        p, q, r, s = self.P
        w1, w2 = self._frame_W()
        frame = ProjectiveRatio(r * w1 + s * w2, p * w1 + q * w2)
        ratio = frame.reciprocal() if self.mirrored else frame
        if max(p.bit_length(), q.bit_length(), r.bit_length(), s.bit_length()) > self.bits_limit:
            self.exhausted = True
        return ExactStepRecord(
            self.n, sym.index, sym.variants[i, j], (a, b, c, d), self.det_sign, self.mirrored,
            self.n1, self.P, self.detP, prev, (w1, w2), ratio, frame, False,
        )

    def _advance_locked_exact(self, sym: _Symbol) -> ExactStepRecord:
        first = self.det_sign is not DetSign.LOCKED
        y = self._original_Y() if first else self.Y
        a, b, c, d = sym.prim
        p, q, r, s = y
        self.Y = (p * a + q * c, p * b + q * d, r * a + s * c, r * b + s * d)
        self.det_sign = DetSign.LOCKED
        p, q, r, s = self.Y
        v1, v2 = self.V
        y1, y2 = p * v1 + q * v2, r * v1 + s * v2
        if y1 == 0 and y2 == 0:
            self.excluded = True
            ratio = None
        else:
            ratio = ProjectiveRatio(y2, y1)
            if self.locked_ratio is None:
                self.locked_ratio = ratio
            elif ratio != self.locked_ratio:
                raise AssertionError(f"ratio moved after a singular factor at step {self.n}")
        if max(x.bit_length() for x in self.Y) > self.bits_limit:
            self.exhausted = True
        return ExactStepRecord(
            self.n, sym.index, None, None, DetSign.LOCKED, self.mirrored, self.n1,
            self.Y, 0, None, None, ratio, ratio, self.excluded,
        )

    # -- float -------------------------------------------------------------

    def _normalize_float(self, p, q, r, s):
        c = _lse(_lse(p, q), _lse(r, s))
        self.log_scale += c
        return (p - c, q - c, r - c, s - c), c

    def _advance_float(self, sym: _Symbol) -> FloatStepRecord:
        if self.det_sign is DetSign.LOCKED or sym.sign == 0:
            return self._advance_locked_float(sym)
        i, j = _variant_index(self.det_sign, sym.sign > 0)
        if self.mirrored:
            i, j = 1 - i, 1 - j
        la, lb, lc, ld = sym.lvariants[i, j]
        if self.n1 is None and (lb != NEG_INF or lc != NEG_INF):
            if lb == NEG_INF:
                self.mirrored = True
                p, q, r, s = self.P
                self.P = (s, r, q, p)
                i, j = 1 - i, 1 - j
                la, lb, lc, ld = sym.lvariants[i, j]
            self.n1 = self.n
        p, q, r, s = self.P
        lw_prev = q - p if self.n1 is not None and self.n1 < self.n else None
        raw = (_lse(p + la, q + lc), _lse(p + lb, q + ld), _lse(r + la, s + lc), _lse(r + lb, s + ld))
        self.P, c = self._normalize_float(*raw)
        self.detP = self.detP + sym.ldet - 2 * c
        if sym.sign < 0:
            self.det_sign = DetSign.MINUS if self.det_sign is DetSign.PLUS else DetSign.PLUS
        p, q, r, s = self.P
        w1, w2 = self._frame_W()
        lframe = _lse(r + w1, s + w2) - _lse(p + w1, q + w2)
        lratio = -lframe if self.mirrored else lframe
        rec = FloatStepRecord(
            n=self.n, symbol=sym.index, A=sym.variants[i, j], det_sign=self.det_sign,
            mirrored=self.mirrored, n1=self.n1, excluded=False,
            in_L=lc != NEG_INF, in_U=lb != NEG_INF, log_ratio=lratio, log_frame=lframe,
        )
        if self.n1 is not None:
            rec.lu = r - p
            rec.lv = s - q
            rec.lw = q - p
            rec.lwidth = self.detP - p - q
            if lw_prev is not None:
                rec.lw_prev = lw_prev
                rec.alpha = math.exp(-_softplus(lc - la + lw_prev))
                rec.beta = math.exp(-_softplus(lb - ld - lw_prev))
                rec.gamma = float(sym.gamma[i, j])
        return rec

    def _advance_locked_float(self, sym: _Symbol) -> FloatStepRecord:
        if self.det_sign is not DetSign.LOCKED:
            y = self._original_Y()
        else:
            y = self.Y
        la, lb, lc, ld = sym.lvariants[0, 0]
        p, q, r, s = y
        raw = (_lse(p + la, q + lc), _lse(p + lb, q + ld), _lse(r + la, s + lc), _lse(r + lb, s + ld))
        self.det_sign = DetSign.LOCKED
        if all(x == NEG_INF for x in raw):
            self.Y = raw
        else:
            self.Y, _ = self._normalize_float(*raw)
        p, q, r, s = self.Y
        v1, v2 = self.V
        y1, y2 = _lse(p + v1, q + v2), _lse(r + v1, s + v2)
        excluded = y1 == NEG_INF and y2 == NEG_INF
        self.excluded = excluded
        lt = None if excluded else (INF if y1 == NEG_INF else y2 - y1)
        return FloatStepRecord(
            n=self.n, symbol=sym.index, A=None, det_sign=DetSign.LOCKED, mirrored=self.mirrored,
            n1=self.n1, excluded=excluded, in_L=False, in_U=False, log_ratio=lt, log_frame=lt,
        )


def init(system: MatrixSystem, mode: Mode = Mode.EXACT, bits_limit: int | None = None) -> ProductState:
    symbols = tuple(_Symbol.build(k, M) for k, M in enumerate(system.matrices))
    v1, v2 = primitive_ints((system.V.v1, system.V.v2))
    if mode is Mode.EXACT:
        return ProductState(symbols, mode, (v1, v2), bits_limit or default_bits_limit())
    return ProductState(
        symbols, mode, (_log(v1), _log(v2)), bits_limit or default_bits_limit(),
        P=(0.0, NEG_INF, NEG_INF, 0.0), detP=0.0,
    )


def step(state: ProductState, k: int) -> ProductState:
    """Functional step: returns a new state, leaving ``state`` untouched."""
    nxt = state.copy()
    nxt.advance(k)
    return nxt


# ---------------------------------------------------------------------------
# driving a whole path


@dataclass
class Trace:
    records: list
    status: TraceStatus
    mode: Mode
    mirrored: bool = False

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def ratios(self):
        return [r.ratio for r in self.records if not r.excluded]

    def m_values(self) -> list[float]:
        return [r.m for r in self.records if not r.excluded]


def iterate(state: ProductState, omega: Iterable[int], steps: int) -> Iterator[StepRecord]:
    """Advance ``state`` along ``omega`` yielding one record per step.

    Stops after ``steps`` symbols, at exclusion, or on bit exhaustion; the
    reason is left on the state (``excluded`` / ``exhausted``).
    """
    it = iter(omega)
    for _ in range(steps):
        try:
            k = next(it)
        except StopIteration:
            return
        rec = state.advance(k)
        yield rec
        if state.excluded or state.exhausted:
            return


def status_of(state: ProductState) -> TraceStatus:
    if state.excluded:
        return TraceStatus.EXCLUDED
    if state.exhausted:
        return TraceStatus.EXHAUSTED
    return TraceStatus.COMPLETE


def run(
    system: MatrixSystem,
    omega: Iterable[int],
    steps: int,
    mode: Mode = Mode.EXACT,
    bits_limit: int | None = None,
) -> Trace:
    if steps < 1:
        raise ValueError("steps must be >= 1")
    state = init(system, mode, bits_limit)
    records = list(iterate(state, omega, steps))
    return Trace(records, status_of(state), mode, state.mirrored)


# ---------------------------------------------------------------------------
# series diagnostics


@dataclass(frozen=True)
class SeriesProbe:
    """Partial sums behind the positive-width criterion for the bracket.

    ``sum_L`` adds ``w_{n-1}`` over steps whose factor has a lower entry,
    ``sum_U`` adds ``1/w_{n-1}`` over steps with an upper entry, and
    ``both`` counts steps with a positive factor.  ``width_ratio`` is the
    exact ``|I_N| / |I_{n1}|`` (the product of all contraction factors).
    The ``tail_*`` fields are the growth over the second half of the trace.
    """

    n1: int
    steps: int
    sum_L: Fraction
    sum_U: Fraction
    both: int
    width_ratio: Fraction
    tail_L: float
    tail_U: float
    tail_both: int
    tail_width_ratio: float

    @property
    def bounded(self) -> bool:
        return (
            self.tail_L <= 1e-6 * (1 + float(self.sum_L))
            and self.tail_U <= 1e-6 * (1 + float(self.sum_U))
            and self.tail_both == 0
        )


def series_criterion_probe(trace: Trace | Iterable[ExactStepRecord]) -> SeriesProbe:
    records = [r for r in trace if r.defined]
    if not records:
        raise NotApplicable("no non-diagonal factor in the trace")
    if records[0].mode is not Mode.EXACT:
        raise ValueError("the series probe needs an exact-mode trace")
    n1 = records[0].n1
    first = records[0]
    half = first.n + (records[-1].n - first.n) // 2
    sum_L = sum_U = Fraction(0)
    both = 0
    mid = None
    width_mid = None
    for rec in records:
        if rec.in_L and rec.in_U:
            both += 1
        if rec.prev is not None:
            if rec.in_L:
                sum_L += rec.w_prev
            if rec.in_U:
                sum_U += 1 / rec.w_prev
        if mid is None and rec.n >= half:
            mid = (sum_L, sum_U, both)
            width_mid = rec.width
    last = records[-1]
    ratio = last.width / first.width
    return SeriesProbe(
        n1=n1,
        steps=last.n,
        sum_L=sum_L,
        sum_U=sum_U,
        both=both,
        width_ratio=ratio,
        tail_L=float(sum_L - mid[0]),
        tail_U=float(sum_U - mid[1]),
        tail_both=both - mid[2],
        tail_width_ratio=float(last.width / width_mid),
    )


def membership_constant(system: MatrixSystem) -> Fraction:
    """A constant K with ``1/K <= c/a <= K`` on L and ``1/K <= b/d <= K`` on U."""
    K = Fraction(1)
    for X in mplus(system):
        if X.c:
            K = max(K, X.c / X.a, X.a / X.c)
        if X.b:
            K = max(K, X.b / X.d, X.d / X.b)
    return K
