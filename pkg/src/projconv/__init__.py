"""Pointwise convergence of normalized products of nonnegative 2x2 matrices.

Given a finite family of nonnegative matrices and a nonnegative starting
vector ``V``, the direction of ``M_{w_n} ... M_{w_1} V`` either converges for
every symbol path or fails to for some path.  This package decides which,
simulates paths exactly, and builds explicit divergent paths.
"""

__version__ = "0.1.0"

from .algebra import (
    DELTA, IDENTITY, Mat2, MatrixSystem, Shape, ShapeTag, Vec2, apply, classify,
    conjugate_by_delta, delta, det, mplus, mul,
)
from .decider import (
    CheckResult, ConditionId, Verdict, Witness, check_i, check_ii, check_iii, check_iv,
    decide, is_eigen_of_antidiag, is_eigen_of_diag,
)
from .engine import (
    DetSign, Mode, ProductState, ProjectiveRatio, Trace, TraceStatus, compute_A, init,
    iterate, run, series_criterion_probe, step,
)
from .errors import (
    BudgetExceeded, CertificationFailed, ContradictionFound, ExcludedPath, InternalExhaustive,
    NotApplicable, ProjconvError, SingularInput, StratumUnsatisfiable, SystemFileError,
)
from .forge import (
    DivergenceCertificate, ForgeCase, ForgeTag, certify, dispatch, forge, make_generator, next_symbol,
)
from .harness import (
    ClassTag, Classification, CorpusSpec, Stratum, classify_empirical, corpus_generate,
    cross_validate, default_corpus_spec, exhaustive_check,
)
