import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import mat, system
from projconv.algebra import Mat2, MatrixSystem, Vec2, apply, mul
from projconv.engine import (
    DetSign, Mode, ProjectiveRatio, TraceStatus, compute_A, init, iterate, run,
    series_criterion_probe, step,
)
from projconv.errors import ExcludedPath, NotApplicable, SingularInput
from projconv.harness import random_system

TRI = [[[1, 1], [0, 1]], [[1, 0], [1, 1]]]


def test_projective_ratio():
    assert ProjectiveRatio(2, 4) == ProjectiveRatio(1, 2)
    assert ProjectiveRatio(1, 0).is_infinite
    assert ProjectiveRatio(0, 3) < ProjectiveRatio(1, 10**50) < ProjectiveRatio.INFINITY
    assert str(ProjectiveRatio(6, 4)) == "3/2"
    assert ProjectiveRatio(2, 3).m() == Fraction(2, 5)
    assert ProjectiveRatio.INFINITY.m() == 1
    assert float(ProjectiveRatio(10**400, 1)) == math.inf
    with pytest.raises(ValueError):
        ProjectiveRatio(0, 0)


@pytest.mark.parametrize("V, ratio", [((1, 1), ProjectiveRatio(1, 1)), ((0, 1), ProjectiveRatio.INFINITY), ((3, 2), ProjectiveRatio(2, 3))])
def test_init(V, ratio):
    s = init(system([[[1, 0], [0, 1]]], V))
    assert s.n == 0 and s.det_sign is DetSign.PLUS and s.n1 is None
    assert s.ratio == ratio


def test_compute_A_examples():
    assert compute_A(DetSign.PLUS, mat([[0, 2], [1, 0]])) == mat([[2, 0], [0, 1]])
    assert compute_A(DetSign.PLUS, mat([[2, 0], [0, 1]])) == mat([[2, 0], [0, 1]])
    assert compute_A(DetSign.MINUS, mat([[0, 1], [2, 0]])) == mat([[2, 0], [0, 1]])
    with pytest.raises(SingularInput):
        compute_A(DetSign.PLUS, mat([[1, 2], [2, 4]]))


def test_two_step_example():
    rec = run(system(TRI, (1, 1)), [0, 1], 2).records[-1]
    assert rec.ratio == ProjectiveRatio(2, 3)
    assert (rec.u, rec.v, rec.w, rec.lam) == (Fraction(1, 2), 1, Fraction(1, 2), Fraction(2, 3))
    assert rec.lam * rec.u + (1 - rec.lam) * rec.v == Fraction(2, 3)
    assert (rec.alpha, rec.beta, rec.gamma) == (Fraction(1, 2), 1, 1)
    assert rec.width == rec.v - rec.u


def test_singular_factor_locks_the_ratio():
    # Y V = (3, 6) for M = (1 2; 2 4), V = (1, 1)
    trace = run(system([[[1, 2], [2, 4]]], (1, 1)), [0] * 6, 6)
    assert all(r.det_sign is DetSign.LOCKED for r in trace)
    assert {r.ratio for r in trace} == {ProjectiveRatio(2, 1)}


def test_singular_after_invertible_prefix():
    S = system([[[2, 1], [1, 1]], [[1, 2], [2, 4]]], (1, 3))
    trace = run(S, [0, 0, 1, 0, 1, 0], 6)
    locked = [r.ratio for r in trace.records[2:]]
    assert len(set(locked)) == 1
    Y = mul(mul(S.matrices[0], S.matrices[0]), S.matrices[1])
    y1, y2 = apply(Y, S.V)
    assert locked[0] == ProjectiveRatio(y2, y1)


def test_swap_flips_zero_to_infinity():
    s = init(system([[[0, 1], [1, 0]]], (1, 0)))
    assert s.ratio == ProjectiveRatio(0, 1)
    s.advance(0)
    assert s.ratio.is_infinite
    assert s.det_sign is DetSign.MINUS


def test_excluded_path():
    S = system([[[1, 0], [0, 0]]], (0, 5))
    trace = run(S, [0, 0, 0], 3)
    assert trace.status is TraceStatus.EXCLUDED
    assert len(trace) == 1 and trace.records[0].excluded
    state = init(S)
    state.advance(0)
    with pytest.raises(ExcludedPath):
        state.advance(0)


def test_step_is_functional():
    s0 = init(system(TRI, (1, 1)))
    s1 = step(s0, 0)
    assert s0.n == 0 and s1.n == 1
    assert s1.ratio == ProjectiveRatio(1, 2)


def test_identity_family_is_constant():
    trace = run(system([[[1, 0], [0, 1]]], (2, 7)), [0] * 10, 10)
    assert {r.ratio for r in trace} == {ProjectiveRatio(7, 2)}


def test_antidiagonal_alternates():
    trace = run(system([[[0, 1], [2, 0]]], (1, 1)), [0] * 10, 10)
    assert [str(r) for r in trace.ratios()] == ["2/1", "1/1"] * 5


def test_bit_limit_stops_exact_mode(monkeypatch):
    monkeypatch.setenv("PROJCONV_BITS_LIMIT", "64")
    trace = run(system([[[3, 1], [1, 2]]], (1, 1)), [0] * 500, 500)
    assert trace.status is TraceStatus.EXHAUSTED
    assert len(trace) < 500


def _oracle_ratio(S, omega):
    Y = Mat2(1, 0, 0, 1)
    out = []
    for k in omega:
        Y = mul(Y, S.matrices[k])
        y1, y2 = apply(Y, S.V)
        out.append(None if y1 == y2 == 0 else ProjectiveRatio(y2, y1))
    return out


def test_ratio_matches_direct_product():
    rng = random.Random(1)
    for _ in range(60):
        S = random_system(rng, 8, 3)
        omega = [rng.randrange(S.d) for _ in range(25)]
        trace = run(S, omega, 25)
        oracle = _oracle_ratio(S, omega)
        for rec, want in zip(trace, oracle):
            assert (None if rec.excluded else rec.ratio) == want


def test_bracket_nests_and_contains_ratio():
    rng = random.Random(2)
    for _ in range(60):
        S = random_system(rng, 8, 3)
        omega = [rng.randrange(S.d) for _ in range(40)]
        prev = None
        for rec in run(S, omega, 40):
            if not rec.defined:
                prev = None
                continue
            assert rec.u <= rec.frame_ratio.to_fraction() <= rec.v or rec.u == rec.v
            assert rec.width == rec.v - rec.u
            if prev is not None:
                assert prev.u <= rec.u and rec.v <= prev.v
                a, b, c, d = rec.Aint
                w = prev.w
                assert rec.w == (b + d * w) / (a + c * w)
                assert rec.width == prev.width * rec.alpha * rec.beta * rec.gamma
            prev = rec


def test_mirrored_system_gives_reciprocal_ratios():
    rng = random.Random(3)
    for _ in range(50):
        S = random_system(rng, 10, 3)
        omega = [rng.randrange(S.d) for _ in range(60)]
        a = run(S, omega, 60)
        b = run(S.mirrored(), omega, 60)
        assert [r.reciprocal() for r in a.ratios()] == b.ratios()


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.fractions(Fraction(1, 9), 9, max_denominator=9))
def test_rescaling_leaves_ratios_unchanged(seed, s):
    rng = random.Random(seed)
    S = random_system(rng, 10, 3)
    T = MatrixSystem(tuple(M.scaled(s * (i + 1)) for i, M in enumerate(S.matrices)), S.V.scaled(1 / s))
    omega = [rng.randrange(S.d) for _ in range(40)]
    assert [r.canonical() for r in run(S, omega, 40).ratios()] == [r.canonical() for r in run(T, omega, 40).ratios()]


def test_float_mode_tracks_exact_mode():
    rng = random.Random(4)
    for _ in range(10):
        S = random_system(rng, 16, 3)
        omega = [rng.randrange(S.d) for _ in range(1000)]
        ex = run(S, omega, 1000, Mode.EXACT)
        fl = run(S, omega, 1000, Mode.FLOAT)
        assert len(ex) == len(fl)
        for a, b in zip(ex, fl):
            assert a.excluded == b.excluded
            if not a.excluded:
                assert abs(a.m - b.m) <= 1e-9


def test_float_mode_survives_extreme_ratios():
    S = system([[[1, 0], [0, 1000]]], (1, 1))
    trace = run(S, [0] * 2000, 2000, Mode.FLOAT)
    assert trace.records[-1].m == 1.0
    assert trace.records[-1].ratio_float == math.inf


def test_series_probe_on_period_two_antidiagonal():
    # both factors become diagonal in the normal form, so nothing is defined
    trace = run(system([[[0, 1], [2, 0]]], (1, 1)), [0] * 20, 20)
    with pytest.raises(NotApplicable):
        series_criterion_probe(trace)


def test_series_probe_on_diagonal_suffix():
    S = system([[[1, 1], [1, 2]], [[2, 0], [0, 1]]], (1, 1))
    trace = run(S, [0, 0] + [1] * 400, 402)
    probe = series_criterion_probe(trace)
    assert probe.both == 2 and probe.tail_both == 0
    assert probe.tail_U == 0
    assert probe.bounded


def test_series_probe_needs_exact_trace():
    trace = run(system(TRI, (1, 1)), [0, 1, 0, 1], 4, Mode.FLOAT)
    with pytest.raises(ValueError):
        series_criterion_probe(trace)
