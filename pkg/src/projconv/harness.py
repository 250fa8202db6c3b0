"""Verification harness.

* :func:`exhaustive_check` walks every symbol prefix up to a depth and
  re-derives each engine identity from an independent Fraction product.
* :func:`classify_empirical` labels a finished trace Converged /
  Oscillating / Undecided from its tail.
* :func:`cross_validate` compares decider verdicts with sampled and forged
  traces.
* :func:`corpus_generate` builds seeded, stratified test families.
"""

from __future__ import annotations

import enum
import math
import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .algebra import (
    DELTA, IDENTITY, Mat2, MatrixSystem, Vec2, apply, det, mplus, mul,
)
from .clusters import MIN_VISITS, ClusterStats, two_clusters
from .decider import ConditionId, decide
from .engine import DetSign, Mode, ProjectiveRatio, Trace, init, iterate
from .errors import (
    BudgetExceeded, ContradictionFound, InternalExhaustive, StratumUnsatisfiable,
)
from .forge import dispatch, make_generator

DEFAULT_BUDGET = 200_000
DEFAULT_WINDOW = 200
DEFAULT_EPS = 1e-6
DEFAULT_DELTA = 1e-3

FAMILIES = (
    "normal_form",
    "product",
    "nesting",
    "ratio_in_interval",
    "recurrence",
    "diagonal_run",
    "singular_constancy",
)


# ---------------------------------------------------------------------------
# exhaustive identity check


@dataclass
class VerifyReport:
    depth: int
    paths: int = 0
    steps: int = 0
    excluded: int = 0
    checks: Counter = field(default_factory=Counter)
    violations: Counter = field(default_factory=Counter)
    first_violation: dict | None = None

    @property
    def ok(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        return {
            "depth": self.depth,
            "paths": self.paths,
            "steps": self.steps,
            "excluded": self.excluded,
            "checks": {f: self.checks[f] for f in FAMILIES},
            "violations": {f: self.violations[f] for f in FAMILIES},
            "first_violation": self.first_violation,
            "ok": self.ok,
        }


def _proportional(X: tuple, Y: tuple) -> bool:
    """``X == c * Y`` for some ``c > 0`` (entrywise tuples of rationals)."""
    pivot = next((i for i, y in enumerate(Y) if y != 0), None)
    if pivot is None or X[pivot] <= 0:
        return False
    c = Fraction(X[pivot]) / Y[pivot]
    return all(x == c * y for x, y in zip(X, Y))


@dataclass
class _Node:
    Y: Mat2
    run_start_w: Fraction | None = None
    run_prod: Fraction = Fraction(1)
    prev_u: Fraction | None = None
    prev_v: Fraction | None = None
    prev_w: Fraction | None = None
    prev_width: Fraction | None = None
    locked_ratio: ProjectiveRatio | None = None


def _check_step(rec, node: _Node, system: MatrixSystem, mp: frozenset, report: VerifyReport):
    """Yield ``(family, message)`` for every identity this step breaks."""
    V = system.V
    M = system.matrices[rec.symbol]
    node.Y = mul(node.Y, M)
    y1, y2 = apply(node.Y, V)
    oracle = ProjectiveRatio(y2, y1)

    if rec.det_sign is DetSign.LOCKED:
        report.checks["singular_constancy"] += 1
        if rec.ratio != oracle:
            yield "singular_constancy", f"ratio {rec.ratio} != direct {oracle}"
        if node.locked_ratio is None:
            node.locked_ratio = oracle
        elif oracle != node.locked_ratio:
            yield "singular_constancy", f"ratio moved from {node.locked_ratio} to {oracle}"
        return

    A = rec.A
    report.checks["normal_form"] += 1
    if not det(A) > 0 or A not in mp:
        yield "normal_form", f"A_n={A} det={det(A)} outside M+"

    report.checks["product"] += 1
    P = rec.P
    P_orig = (P[3], P[2], P[1], P[0]) if rec.mirrored else P
    Yt = node.Y.entries
    target = Yt if rec.det_sign is DetSign.PLUS else mul(node.Y, DELTA).entries
    if not _proportional(P_orig, target):
        yield "product", f"P={P_orig} not a positive multiple of {target}"
    a, b, c, d = rec.Aint
    if a * d * P[0] * P[3] == 0:
        yield "product", "a_n d_n p_n s_n vanished"
    if rec.ratio != oracle:
        yield "product", f"ratio {rec.ratio} != direct {oracle}"

    if not rec.defined:
        return
    u, v, w, width = rec.u, rec.v, rec.w, rec.width

    report.checks["nesting"] += 1
    if not (0 <= u < v) or not (0 < w):
        yield "nesting", f"bracket broken: u={u} v={v} w={w}"
    if width != v - u:
        yield "nesting", f"|I_n|={width} != v-u={v - u}"
    if node.prev_u is not None and not (node.prev_u <= u <= v <= node.prev_v):
        yield "nesting", f"[{u},{v}] not inside [{node.prev_u},{node.prev_v}]"

    report.checks["ratio_in_interval"] += 1
    fr = rec.frame_ratio
    if not (ProjectiveRatio(u) <= fr <= ProjectiveRatio(v)):
        yield "ratio_in_interval", f"ratio {fr} outside [{u},{v}]"
    lam = rec.lam
    if ProjectiveRatio(lam * u + (1 - lam) * v) != fr:
        yield "ratio_in_interval", f"lambda-mix {lam * u + (1 - lam) * v} != {fr}"

    if rec.prev is not None:
        report.checks["recurrence"] += 1
        al, be, ga = rec.alpha, rec.beta, rec.gamma
        if not (0 < al <= 1 and 0 < be <= 1 and 0 < ga <= 1):
            yield "recurrence", f"factors out of (0,1]: {al} {be} {ga}"
        if width != al * be * ga * node.prev_width:
            yield "recurrence", f"|I_n|={width} != abg|I_n-1|"
        if w != Fraction(d, a) * al / be * node.prev_w:
            yield "recurrence", f"w_n={w} != (d/a)(alpha/beta) w_n-1"
        if rec.w_prev != node.prev_w:
            yield "recurrence", "recorded w_{n-1} does not match the previous step"

        diagonal = b == 0 and c == 0
        if diagonal:
            report.checks["diagonal_run"] += 1
            if node.run_start_w is None:
                node.run_start_w, node.run_prod = node.prev_w, Fraction(1)
            node.run_prod *= Fraction(d, a)
            if w != node.run_start_w * node.run_prod:
                yield "diagonal_run", f"w_n={w} != w_start * prod(d/a)"
        else:
            node.run_start_w = None
    node.prev_u, node.prev_v, node.prev_w, node.prev_width = u, v, w, width


def exhaustive_check(system: MatrixSystem, depth: int, budget: int = DEFAULT_BUDGET) -> VerifyReport:
    nsym = system.d
    if nsym**depth > budget:
        raise BudgetExceeded(f"{nsym}^{depth} paths exceed the budget of {budget}")
    mp = mplus(system)
    report = VerifyReport(depth)

    def record(family, msg, prefix):
        report.violations[family] += 1
        if report.first_violation is None:
            report.first_violation = {"family": family, "omega": "".join(map(str, prefix)), "message": msg}

    def walk(state, node: _Node, prefix: list):
        if len(prefix) == depth:
            report.paths += 1
            return
        for k in range(nsym):
            st = state.copy()
            nd = _Node(**node.__dict__)
            prefix.append(k)
            try:
                rec = st.advance(k)
            except AssertionError as exc:
                record("singular_constancy", str(exc), prefix)
                prefix.pop()
                continue
            report.steps += 1
            if rec.excluded:
                report.excluded += 1
                report.paths += 1
                prefix.pop()
                continue
            for family, msg in _check_step(rec, nd, system, mp, report):
                record(family, msg, prefix)
            walk(st, nd, prefix)
            prefix.pop()

    walk(init(system, Mode.EXACT), _Node(IDENTITY), [])
    return report


# ---------------------------------------------------------------------------
# empirical classification


class ClassTag(enum.Enum):
    CONVERGED = "Converged"
    OSCILLATING = "Oscillating"
    UNDECIDED = "Undecided"


@dataclass(frozen=True)
class Classification:
    tag: ClassTag
    amplitude: float
    window: int
    clusters: ClusterStats | None = None


def classify_empirical(
    trace: Trace | Sequence[float],
    window: int = DEFAULT_WINDOW,
    eps: float = DEFAULT_EPS,
    delta: float = DEFAULT_DELTA,
) -> Classification:
    ms = trace.m_values() if isinstance(trace, Trace) else list(trace)
    if len(ms) < 2 * window:
        raise ValueError(f"need at least {2 * window} ratios, got {len(ms)}")
    last = ms[-window:]
    amplitude = max(last) - min(last)
    if amplitude < eps:
        return Classification(ClassTag.CONVERGED, amplitude, window)
    stats = two_clusters(ms[len(ms) // 2:])
    if stats.oscillates(delta, MIN_VISITS):
        return Classification(ClassTag.OSCILLATING, amplitude, window, stats)
    return Classification(ClassTag.UNDECIDED, amplitude, window, stats)


# ---------------------------------------------------------------------------
# cross validation


@dataclass
class CrossReport:
    converges_all: bool
    satisfied: list
    samples: int
    steps: int
    excluded: int = 0
    counts: Counter = field(default_factory=Counter)
    forged: str | None = None
    forge_case: str | None = None
    contradictions: list = field(default_factory=list)

    @property
    def classified(self) -> int:
        return sum(self.counts.values()) + (self.forged is not None)

    @property
    def undecided(self) -> int:
        return self.counts[ClassTag.UNDECIDED.value] + (self.forged == ClassTag.UNDECIDED.value)

    def as_dict(self) -> dict:
        return {
            "converges_all": self.converges_all,
            "satisfied": self.satisfied,
            "samples": self.samples,
            "steps": self.steps,
            "excluded": self.excluded,
            "counts": {t.value: self.counts[t.value] for t in ClassTag},
            "forge_case": self.forge_case,
            "forged": self.forged,
            "contradictions": self.contradictions,
        }


def random_omega(rng: random.Random, nsym: int, steps: int) -> list[int]:
    return [rng.randrange(nsym) for _ in range(steps)]


def _m_series(system, omega, steps, mode):
    state = init(system, mode)
    ms = [rec.m for rec in iterate(state, omega, steps) if not rec.excluded]
    return ms, state.excluded


def cross_validate(
    system: MatrixSystem,
    samples: int = 100,
    steps: int = 1000,
    seed: int = 0,
    mode: Mode = Mode.EXACT,
    window: int = DEFAULT_WINDOW,
    raise_on_contradiction: bool = True,
) -> CrossReport:
    verdict = decide(system)
    report = CrossReport(verdict.converges_all, verdict.satisfied_tags(), samples, steps)
    rng = random.Random(seed)
    for s in range(samples):
        omega = random_omega(rng, system.d, steps)
        ms, excluded = _m_series(system, omega, steps, mode)
        if excluded:
            report.excluded += 1
            continue
        cls = classify_empirical(ms, window)
        report.counts[cls.tag.value] += 1
        if verdict.converges_all and cls.tag is ClassTag.OSCILLATING:
            report.contradictions.append(
                {"kind": "oscillation_in_convergent_system", "sample": s, "amplitude": cls.clusters.separation}
            )
    if not verdict.converges_all:
        try:
            case = dispatch(system, verdict)
        except InternalExhaustive:
            report.forge_case = "unavailable"
        else:
            report.forge_case = case.tag.value
            ms, _ = _m_series(system, make_generator(system, case), steps, mode)
            cls = classify_empirical(ms, window)
            report.forged = cls.tag.value
            if cls.tag is ClassTag.CONVERGED:
                report.contradictions.append({"kind": "forged_path_converged", "case": case.tag.value})
    if report.contradictions and raise_on_contradiction:
        raise ContradictionFound(f"{len(report.contradictions)} trace(s) contradict the decider", system=system)
    return report


# ---------------------------------------------------------------------------
# corpus


PROFILES = ("i", "ii", "iii", "iv", "none")


@dataclass(frozen=True)
class Stratum:
    profile: str
    v_positive: bool = True
    singular: bool = False
    count: int = 1

    def __post_init__(self):
        if self.profile not in PROFILES:
            raise ValueError(f"unknown profile {self.profile!r}")

    @property
    def key(self) -> str:
        return f"{self.profile},{'vpos' if self.v_positive else 'vzero'},{'singular' if self.singular else 'plain'}"


@dataclass(frozen=True)
class CorpusSpec:
    seed: int = 0
    strata: tuple[Stratum, ...] = ()
    bound: int = 16
    max_d: int = 3


DEFAULT_STRATA = (
    Stratum("i", True, False),
    Stratum("i", True, True),
    Stratum("ii", True, False),
    Stratum("ii", False, False),
    Stratum("iii", True, False),
    Stratum("iii", False, True),
    Stratum("iv", False, False),
    Stratum("iv", False, True),
    Stratum("none", True, False),
    Stratum("none", True, True),
    Stratum("none", False, False),
    Stratum("none", False, True),
)


def default_corpus_spec(seed: int = 0, count: int = 60) -> CorpusSpec:
    n = len(DEFAULT_STRATA)
    strata = tuple(
        Stratum(s.profile, s.v_positive, s.singular, count // n + (i < count % n))
        for i, s in enumerate(DEFAULT_STRATA)
    )
    return CorpusSpec(seed=seed, strata=tuple(s for s in strata if s.count))


class _Draw:
    """Shape-specific random matrices with integer entries in ``[1, bound]``."""

    def __init__(self, rng: random.Random, bound: int):
        self.rng = rng
        self.bound = bound

    def x(self, lo=1):
        return self.rng.randint(lo, self.bound)

    def pair_distinct(self):
        a, d = self.rng.sample(range(1, self.bound + 1), 2)
        return a, d

    def scalar(self, V):
        s = self.x()
        return Mat2(s, 0, 0, s)

    def diag_gt(self, V):
        a, d = sorted(self.pair_distinct(), reverse=True)
        return Mat2(a, 0, 0, d)

    def diag_lt(self, V):
        a, d = sorted(self.pair_distinct())
        return Mat2(a, 0, 0, d)

    def antidiag(self, V):
        while True:
            M = Mat2(0, self.x(), self.x(), 0)
            if not V.positive or M.b * V.v2**2 != M.c * V.v1**2:
                return M

    def antidiag_eigen(self, V):
        # b / c = (v1 / v2)^2 in lowest terms; may exceed the bound, then the
        # candidate is rejected
        r = V.v1 / V.v2
        t = self.rng.randint(1, 3)
        return Mat2(0, t * r.numerator**2, t * r.denominator**2, 0)

    def a_zero(self, V):
        return Mat2(0, self.x(), self.x(), self.x())

    def d_zero(self, V):
        return Mat2(self.x(), self.x(), self.x(), 0)

    def upper(self, V):
        return Mat2(self.x(), self.x(), 0, self.x())

    def lower(self, V):
        return Mat2(self.x(), 0, self.x(), self.x())

    def positive(self, V):
        while True:
            M = Mat2(self.x(), self.x(), self.x(), self.x())
            if det(M) != 0:
                return M

    def singular(self, V):
        if self.rng.random() < 0.2:
            return Mat2(0, 0, 0, 0)
        # rank one with entries x_i * y_j, kept within the bound
        root = math.isqrt(self.bound)
        x1, x2 = self.rng.randint(0, root), self.rng.randint(0, root)
        y1, y2 = self.rng.randint(0, root), self.rng.randint(0, root)
        if x1 == x2 == 0:
            x1 = 1
        if y1 == y2 == 0:
            y2 = 1
        return Mat2(x1 * y1, x1 * y2, x2 * y1, x2 * y2)

    def vector(self, positive: bool):
        def q():
            return Fraction(self.rng.randint(1, self.bound), self.rng.choice((1, 1, 2, 3, 4)))

        if positive:
            return Vec2(q(), q())
        return Vec2(q(), 0) if self.rng.random() < 0.5 else Vec2(0, q())


_POOLS = {
    "i": ("scalar", "antidiag_eigen", "upper", "lower", "positive", "a_zero", "d_zero"),
    "ii": ("diag_gt", "scalar", "upper", "lower", "positive", "d_zero"),
    "iii": ("diag_lt", "scalar", "upper", "lower", "positive", "a_zero"),
    "iv": ("diag_gt", "diag_lt", "scalar", "upper", "lower", "positive"),
}

# divergent skeletons: (required shapes, allowed for V positive, allowed for V with a zero)
_NONE_SKELETONS = (
    (("antidiag",), True, True),
    (("antidiag_eigen", "diag_gt"), True, False),
    (("diag_gt", "a_zero"), True, True),
    (("diag_lt", "d_zero"), True, True),
    (("diag_gt", "diag_lt"), True, False),
)
_NONE_EXTRAS = ("upper", "lower", "positive", "scalar", "a_zero", "d_zero", "diag_gt", "diag_lt")


def _feasible(st: Stratum) -> bool:
    if st.profile == "i" and not st.v_positive:
        return False
    if st.profile == "iv" and st.v_positive:
        return False
    return True


def _candidate(st: Stratum, rng: random.Random, spec: CorpusSpec) -> MatrixSystem:
    draw = _Draw(rng, spec.bound)
    V = draw.vector(st.v_positive)
    room = spec.max_d - (1 if st.singular else 0)
    if st.profile == "none":
        skeletons = [s for s in _NONE_SKELETONS if (s[1] if st.v_positive else s[2])]
        shapes, _, _ = rng.choice(skeletons)
        shapes = list(shapes)
        if len(shapes) < room and rng.random() < 0.5:
            shapes.append(rng.choice(_NONE_EXTRAS))
    else:
        pool = _POOLS[st.profile]
        shapes = [rng.choice(pool) for _ in range(rng.randint(1, room))]
    mats = [getattr(draw, s)(V) for s in shapes]
    if st.singular:
        mats.append(draw.singular(V))
    rng.shuffle(mats)
    return MatrixSystem(tuple(mats), V)


def _within(system: MatrixSystem, bound: int) -> bool:
    return all(x <= bound for M in system.matrices for x in M.entries)


def _accepts(st: Stratum, system: MatrixSystem) -> bool:
    verdict = decide(system)
    if st.profile == "none":
        if verdict.converges_all:
            return False
        try:
            dispatch(system, verdict)
        except InternalExhaustive:
            return False
        return True
    return ConditionId(st.profile) in verdict.satisfied


def generate_stratum(st: Stratum, seed: int, spec: CorpusSpec, attempts: int = 500) -> list[MatrixSystem]:
    if not _feasible(st):
        raise StratumUnsatisfiable(f"stratum {st.key} cannot be built")
    out = []
    for idx in range(st.count):
        for attempt in range(attempts):
            rng = random.Random(f"{seed}/{st.key}/{idx}/{attempt}")
            system = _candidate(st, rng, spec)
            if _within(system, spec.bound) and _accepts(st, system):
                out.append(system)
                break
        else:
            raise StratumUnsatisfiable(f"stratum {st.key}: no system found in {attempts} attempts")
    return out


def corpus_generate(spec: CorpusSpec) -> list[MatrixSystem]:
    systems = []
    for st in spec.strata:
        systems.extend(generate_stratum(st, spec.seed, spec))
    return systems


def random_system(rng: random.Random, bound: int = 16, max_d: int = 3) -> MatrixSystem:
    """Unconstrained random family, used by the symmetry and scaling suites."""
    draw = _Draw(rng, bound)
    shapes = ("scalar", "diag_gt", "diag_lt", "antidiag", "a_zero", "d_zero", "upper", "lower", "positive", "singular")
    V = draw.vector(rng.random() < 0.7)
    mats = tuple(getattr(draw, rng.choice(shapes))(V) for _ in range(rng.randint(1, max_d)))
    return MatrixSystem(mats, V)
