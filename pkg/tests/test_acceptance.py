"""End-to-end acceptance criteria, one test per criterion."""

import io
import random
import time
from fractions import Fraction

import pytest

from conftest import ACCEPTANCE, system
from projconv.algebra import MatrixSystem
from projconv.decider import ConditionId, decide
from projconv.engine import Mode, TraceStatus, run, series_criterion_probe
from projconv.forge import ForgeTag, certify, dispatch, forge
from projconv.formats import write_trace_csv
from projconv.harness import cross_validate, default_corpus_spec, corpus_generate, exhaustive_check, random_system


def report(n, ok, detail):
    ACCEPTANCE[n] = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(ACCEPTANCE[n])
    assert ok, ACCEPTANCE[n]


@pytest.fixture(scope="module")
def corpus():
    return corpus_generate(default_corpus_spec(seed=0, count=60))


# labels read off the four conditions by hand
TABLE = [
    # condition (i)
    ([[[0, 1], [1, 1]], [[1, 1], [1, 0]]], (1, 1), {"i"}),
    ([[[0, 4], [9, 0]], [[3, 0], [0, 3]]], (2, 3), {"i"}),
    ([[[0, 1], [4, 0]]], (1, 2), {"i"}),
    ([[[5, 0], [0, 5]], [[1, 1], [1, 0]]], (1, 3), {"i", "ii"}),
    ([[[0, 1], [1, 0]], [[2, 1], [1, 1]]], (1, 1), {"i"}),
    # condition (ii)
    ([[[2, 0], [0, 1]]], (1, 1), {"ii"}),
    ([[[1, 1], [0, 1]], [[1, 0], [1, 1]]], (1, 1), {"i", "ii", "iii"}),
    ([[[3, 0], [0, 1]], [[1, 1], [1, 0]]], (1, 2), {"ii"}),
    ([[[2, 0], [0, 1]], [[1, 2], [2, 4]]], (0, 1), {"ii", "iv"}),
    ([[[4, 0], [0, 2]], [[1, 1], [1, 0]], [[0, 0], [0, 0]]], (1, 0), {"ii"}),
    # condition (iii)
    ([[[1, 0], [0, 2]]], (1, 1), {"iii"}),
    ([[[0, 1], [1, 1]], [[1, 0], [0, 3]]], (2, 1), {"iii"}),
    ([[[1, 0], [0, 2]], [[1, 0], [1, 1]]], (0, 3), {"iii", "iv"}),
    ([[[0, 1], [2, 3]], [[1, 0], [0, 5]]], (1, 0), {"iii"}),
    ([[[1, 0], [0, 2]], [[2, 3], [1, 2]]], (1, 1), {"iii"}),
    # condition (iv)
    ([[[1, 1], [0, 1]]], (1, 0), {"ii", "iii", "iv"}),
    ([[[2, 1], [1, 1]], [[1, 0], [0, 2]], [[2, 0], [0, 1]]], (1, 0), {"iv"}),
    ([[[1, 0], [0, 2]], [[2, 0], [0, 1]]], (0, 1), {"iv"}),
    ([[[1, 0], [0, 3]], [[3, 0], [0, 1]], [[0, 0], [1, 1]]], (0, 2), {"iv"}),
    ([[[1, 0], [1, 1]], [[1, 0], [0, 2]]], (5, 0), {"iii", "iv"}),
    # no condition
    ([[[0, 1], [2, 0]]], (1, 1), set()),
    ([[[2, 0], [0, 1]], [[1, 0], [0, 2]]], (1, 1), set()),
    ([[[3, 0], [0, 1]], [[0, 1], [1, 1]]], (1, 0), set()),
    ([[[2, 0], [0, 1]], [[0, 1], [1, 0]]], (1, 1), set()),
    ([[[0, 1], [1, 1]], [[1, 1], [1, 0]]], (1, 0), set()),
]


def test_criterion_1_decider_table():
    t0 = time.perf_counter()
    wrong = []
    for mats, V, want in TABLE:
        v = decide(system(mats, V))
        if set(v.satisfied_tags()) != want or v.converges_all != bool(want):
            wrong.append((mats, V, v.satisfied_tags(), sorted(want)))
    elapsed = time.perf_counter() - t0
    per_condition = {c.value: sum(c.value in w for _, _, w in TABLE) for c in ConditionId}
    report(
        1, not wrong and elapsed < 1.0 and len(TABLE) >= 20 and min(per_condition.values()) >= 5,
        f"{len(TABLE) - len(wrong)}/{len(TABLE)} labels match in {elapsed:.3f}s",
    )


def test_criterion_2_exhaustive_identities(corpus):
    t0 = time.perf_counter()
    bad, checks = [], 0
    for idx, S in enumerate(corpus):
        rep = exhaustive_check(S, 8)
        checks += sum(rep.checks.values())
        if not rep.ok:
            bad.append((idx, rep.first_violation))
    elapsed = time.perf_counter() - t0
    sized = len(corpus) >= 50 and all(
        S.d <= 3 and all(x <= 16 for M in S.matrices for x in M.entries) for S in corpus
    )
    report(
        2, sized and not bad and elapsed < 300,
        f"{len(corpus)} systems, {checks} checks, {len(bad)} with violations, {elapsed:.1f}s",
    )


def test_criterion_3_forge_soundness(corpus):
    divergent = [S for S in corpus if not decide(S).converges_all]
    failures, cases = [], {}
    for S in divergent:
        try:
            cert = certify(S, dispatch(S), steps=10_000, delta_min=1e-3)
        except Exception as exc:  # any failure is a criterion failure
            failures.append(repr(exc))
            continue
        cases[cert.case.tag.value] = cases.get(cert.case.tag.value, 0) + 1
    anti = certify(system([[[0, 1], [2, 0]]], (1, 1)), steps=10_000)
    exact_ok = (
        anti.case.tag is ForgeTag.CONST_ANTIDIAG
        and {str(anti.cluster_lo), str(anti.cluster_hi)} == {"1/1", "2/1"}
        and anti.separation == Fraction(1, 6)
    )
    report(
        3, divergent and not failures and exact_ok,
        f"{len(divergent) - len(failures)}/{len(divergent)} certified {dict(sorted(cases.items()))}; "
        f"ConstAntidiag separation {anti.separation}",
    )


def test_criterion_4_cross_validation(corpus):
    contradictions, classified, undecided = 0, 0, 0
    for idx, S in enumerate(corpus):
        rep = cross_validate(S, samples=100, steps=1000, seed=idx, raise_on_contradiction=False)
        contradictions += len(rep.contradictions)
        classified += rep.classified
        undecided += rep.undecided
    rate = undecided / classified
    report(
        4, contradictions == 0 and rate < 0.2,
        f"{contradictions} contradictions, undecided {undecided}/{classified} = {rate:.2%}",
    )


def test_criterion_5_symmetry():
    rng = random.Random(20240505)
    swap = {ConditionId.II: ConditionId.III, ConditionId.III: ConditionId.II}
    bad_verdicts = bad_traces = 0
    for _ in range(100):
        S = random_system(rng, 16, 3)
        a, b = decide(S), decide(S.mirrored())
        if a.converges_all != b.converges_all or {swap.get(c, c) for c in a.satisfied} != b.satisfied:
            bad_verdicts += 1
        omega = [rng.randrange(S.d) for _ in range(300)]
        ra, rb = run(S, omega, 300).ratios(), run(S.mirrored(), omega, 300).ratios()
        if [r.reciprocal() for r in ra] != rb:
            bad_traces += 1
    report(5, bad_verdicts == bad_traces == 0, f"100 systems: {bad_verdicts} verdict and {bad_traces} trace mismatches")


def _csv(S, omega, steps):
    buf = io.StringIO()
    write_trace_csv(run(S, omega, steps).records, buf)
    return buf.getvalue()


def test_criterion_6_scaling():
    rng = random.Random(6)
    bad = 0
    for _ in range(100):
        S = random_system(rng, 16, 3)
        scales = [Fraction(rng.randint(1, 50), rng.randint(1, 50)) for _ in range(S.d + 1)]
        T = MatrixSystem(tuple(M.scaled(s) for M, s in zip(S.matrices, scales)), S.V.scaled(scales[-1]))
        omega = [rng.randrange(S.d) for _ in range(200)]
        if decide(S).as_dict() != decide(T).as_dict() or _csv(S, omega, 200) != _csv(T, omega, 200):
            bad += 1
    report(6, bad == 0, f"100 rescaled systems, {bad} differ in verdict or trace CSV")


def test_criterion_7_exact_float_coherence():
    rng = random.Random(7)
    worst, compared, skipped, bad = 0.0, 0, 0, 0
    for _ in range(20):
        S = random_system(rng, 16, 3)
        for _ in range(5):
            omega = [rng.randrange(S.d) for _ in range(1000)]
            ex = run(S, omega, 1000, Mode.EXACT)
            if ex.status is TraceStatus.EXHAUSTED:
                skipped += 1
                continue
            fl = run(S, omega, 1000, Mode.FLOAT)
            if len(ex) != len(fl) or ex.status != fl.status:
                bad += 1
                continue
            for a, b in zip(ex, fl):
                if not a.excluded:
                    worst = max(worst, abs(a.m - b.m))
            compared += 1
    report(7, bad == 0 and worst <= 1e-9, f"{compared} paths compared, {skipped} exhausted, max |dm| = {worst:.2e}")


def test_criterion_8_positive_width_mechanism():
    S = system([[[3, 0], [0, 1]], [[0, 1], [1, 1]]], (1, 1))
    gen = forge(S)
    trace = run(S, gen, 3000)
    probe = series_criterion_probe(trace)
    ms = trace.m_values()[1500:]
    osc = max(ms) - min(ms)
    ok = (
        gen.case.tag is ForgeTag.SPARSE_LOWER_TRI
        and probe.bounded
        and probe.tail_width_ratio > 0.99
        and probe.width_ratio > 0
        and osc > 0.1
    )
    report(
        8, ok,
        f"sum_L={float(probe.sum_L):.4f} sum_U={float(probe.sum_U):.4f} |L&U|={probe.both} "
        f"|I_N|/|I_n1|={float(probe.width_ratio):.4f} tail ratio={probe.tail_width_ratio:.6f} oscillation={osc:.3f}",
    )
