"""Decide whether every admissible path converges.

The four conditions are checked independently and exactly; the system
converges for all paths iff at least one holds.  Each failing condition
records :class:`Witness` entries naming the matrix (or the vector) that
breaks it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .algebra import Mat2, MatrixSystem, ShapeTag, Vec2, classify, conjugate_by_delta


class ConditionId(enum.Enum):
    I = "i"
    II = "ii"
    III = "iii"
    IV = "iv"


REASONS = (
    "a_zero",
    "d_zero",
    "diag_a_lt_d",
    "diag_d_lt_a",
    "not_eigenvector",
    "V_positive",
    "V_has_zero",
)

# Reading condition (iii) through the mirrored system renames its reasons.
_MIRROR_REASON = {
    "a_zero": "d_zero",
    "d_zero": "a_zero",
    "diag_a_lt_d": "diag_d_lt_a",
    "diag_d_lt_a": "diag_a_lt_d",
}


@dataclass(frozen=True, order=True)
class Witness:
    condition: ConditionId = field(compare=False)
    target: int | str  # matrix index or "vector"
    reason: str

    def as_dict(self) -> dict:
        return {"condition": self.condition.value, "target": self.target, "reason": self.reason}


@dataclass(frozen=True)
class CheckResult:
    holds: bool
    witnesses: tuple[Witness, ...] = ()

    def __bool__(self):
        return self.holds


@dataclass(frozen=True)
class Verdict:
    converges_all: bool
    satisfied: frozenset[ConditionId]
    violations: dict[ConditionId, tuple[Witness, ...]]

    def satisfied_tags(self) -> list[str]:
        return [c.value for c in ConditionId if c in self.satisfied]

    def as_dict(self) -> dict:
        return {
            "converges_all": self.converges_all,
            "satisfied": self.satisfied_tags(),
            "violations": [w.as_dict() for c in ConditionId for w in self.violations.get(c, ())],
        }


def _require(cond: bool, msg: str):
    if not cond:
        raise ValueError(msg)


def is_eigen_of_diag(V: Vec2, M: Mat2) -> bool:
    s = classify(M)
    _require(s.tag is ShapeTag.DIAGONAL and s.invertible, "expected an invertible diagonal matrix")
    return M.a == M.d


def is_eigen_of_antidiag(V: Vec2, M: Mat2) -> bool:
    """Collinearity of a positive V with the Perron vector (sqrt b, sqrt c)."""
    s = classify(M)
    _require(s.tag is ShapeTag.ANTIDIAGONAL and s.invertible, "expected an invertible antidiagonal matrix")
    _require(V.positive, "V must be positive")
    return M.b * V.v2 * V.v2 == M.c * V.v1 * V.v1


def check_i(system: MatrixSystem) -> CheckResult:
    V = system.V
    if not V.positive:
        return CheckResult(False, (Witness(ConditionId.I, "vector", "V_has_zero"),))
    bad = []
    for k, M in enumerate(system.matrices):
        s = classify(M)
        if not s.invertible:
            continue
        if s.tag is ShapeTag.DIAGONAL and not is_eigen_of_diag(V, M):
            bad.append(Witness(ConditionId.I, k, "not_eigenvector"))
        elif s.tag is ShapeTag.ANTIDIAGONAL and not is_eigen_of_antidiag(V, M):
            bad.append(Witness(ConditionId.I, k, "not_eigenvector"))
    return CheckResult(not bad, tuple(bad))


def _check_ii_matrices(matrices, cond: ConditionId) -> CheckResult:
    bad = []
    for k, M in enumerate(matrices):
        s = classify(M)
        if not s.invertible:
            continue
        if M.a == 0:
            bad.append(Witness(cond, k, "a_zero"))
        elif s.tag is ShapeTag.DIAGONAL and M.a < M.d:
            bad.append(Witness(cond, k, "diag_a_lt_d"))
    return CheckResult(not bad, tuple(bad))


def check_ii(system: MatrixSystem) -> CheckResult:
    return _check_ii_matrices(system.matrices, ConditionId.II)


def check_iii(system: MatrixSystem) -> CheckResult:
    """Condition (ii) read on the swap-conjugated family."""
    mirrored = [conjugate_by_delta(M) for M in system.matrices]
    res = _check_ii_matrices(mirrored, ConditionId.III)
    return CheckResult(
        res.holds,
        tuple(Witness(ConditionId.III, w.target, _MIRROR_REASON[w.reason]) for w in res.witnesses),
    )


def check_iv(system: MatrixSystem) -> CheckResult:
    V = system.V
    bad = []
    if V.positive:
        bad.append(Witness(ConditionId.IV, "vector", "V_positive"))
    for k, M in enumerate(system.matrices):
        if not classify(M).invertible:
            continue
        if M.a == 0:
            bad.append(Witness(ConditionId.IV, k, "a_zero"))
        if M.d == 0:
            bad.append(Witness(ConditionId.IV, k, "d_zero"))
    return CheckResult(not bad, tuple(bad))


_CHECKS = {
    ConditionId.I: check_i,
    ConditionId.II: check_ii,
    ConditionId.III: check_iii,
    ConditionId.IV: check_iv,
}


def decide(system: MatrixSystem) -> Verdict:
    satisfied = set()
    violations = {}
    for cid, check in _CHECKS.items():
        res = check(system)
        if res.holds:
            satisfied.add(cid)
        else:
            violations[cid] = res.witnesses
    return Verdict(bool(satisfied), frozenset(satisfied), violations)
