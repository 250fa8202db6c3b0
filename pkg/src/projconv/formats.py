"""File formats: system JSON in, symbol paths in, trace CSV out.

Rationals are written as ``"p/q"`` strings (always with the denominator)
and floats with ``repr`` so identical inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import json
import random
import re
from fractions import Fraction
from itertools import cycle
from pathlib import Path
from typing import Iterable, Iterator, TextIO

from .algebra import Mat2, MatrixSystem, Vec2
from .engine import DetSign, Mode, StepRecord
from .errors import SystemFileError

CSV_HEADER = (
    "n", "symbol", "ratio_num", "ratio_den", "ratio_float", "u", "v", "w",
    "interval_width", "alpha", "beta", "gamma", "in_L", "in_U", "det_sign",
)

_RATIONAL = re.compile(r"^\s*(\d+)\s*(?:/\s*(\d+)\s*)?$")


# ---------------------------------------------------------------------------
# system files


def parse_scalar(raw, where: str) -> Fraction:
    if isinstance(raw, bool) or not isinstance(raw, (int, str)):
        raise SystemFileError(f"expected an integer or a 'p/q' string, got {json.dumps(raw)}", where)
    if isinstance(raw, int):
        if raw < 0:
            raise SystemFileError(f"negative entry {raw}", where)
        return Fraction(raw)
    m = _RATIONAL.match(raw)
    if not m:
        raise SystemFileError(f"cannot read {raw!r} as 'p/q' with integers p >= 0, q >= 1", where)
    p, q = int(m.group(1)), int(m.group(2) or 1)
    if q == 0:
        raise SystemFileError(f"zero denominator in {raw!r}", where)
    return Fraction(p, q)


def _pair(raw, where: str) -> list:
    if not isinstance(raw, list) or len(raw) != 2:
        raise SystemFileError("expected a list of two entries", where)
    return raw


def system_from_obj(obj, source: str = "<input>") -> MatrixSystem:
    """Build a system from decoded JSON; errors name the element path."""
    if not isinstance(obj, dict):
        raise SystemFileError("top level must be an object with 'matrices' and 'vector'", source)
    missing = [k for k in ("matrices", "vector") if k not in obj]
    if missing:
        raise SystemFileError(f"missing key(s): {', '.join(missing)}", source)
    extra = sorted(set(obj) - {"matrices", "vector"})
    if extra:
        raise SystemFileError(f"unknown key(s): {', '.join(extra)}", source)
    mats_raw = obj["matrices"]
    if not isinstance(mats_raw, list) or not mats_raw:
        raise SystemFileError("expected a nonempty list of 2x2 matrices", f"{source}: matrices")
    mats = []
    for k, m in enumerate(mats_raw):
        rows = _pair(m, f"{source}: matrices[{k}]")
        vals = []
        for i, row in enumerate(rows):
            row = _pair(row, f"{source}: matrices[{k}][{i}]")
            vals.extend(parse_scalar(x, f"{source}: matrices[{k}][{i}][{j}]") for j, x in enumerate(row))
        mats.append(Mat2(*vals))
    vec = _pair(obj["vector"], f"{source}: vector")
    v1, v2 = (parse_scalar(x, f"{source}: vector[{i}]") for i, x in enumerate(vec))
    if v1 == 0 and v2 == 0:
        raise SystemFileError("vector must be nonzero", f"{source}: vector")
    return MatrixSystem(tuple(mats), Vec2(v1, v2))


def loads_system(text: str, source: str = "<input>") -> MatrixSystem:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SystemFileError(f"invalid JSON: {exc.msg}", f"{source}:{exc.lineno}:{exc.colno}") from None
    return system_from_obj(obj, source)


def load_system(path: str | Path) -> MatrixSystem:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SystemFileError(f"cannot read file: {exc.strerror}", str(path)) from None
    return loads_system(text, str(path))


def _scalar_json(x: Fraction):
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def system_to_obj(system: MatrixSystem) -> dict:
    return {
        "matrices": [[[_scalar_json(x) for x in row] for row in M.rows()] for M in system.matrices],
        "vector": [_scalar_json(system.V.v1), _scalar_json(system.V.v2)],
    }


def dumps_system(system: MatrixSystem) -> str:
    return json.dumps(system_to_obj(system)) + "\n"


# ---------------------------------------------------------------------------
# symbol paths


def _digits(body: str, d: int, what: str) -> list[int]:
    parts = body.split(",") if "," in body else list(body)
    try:
        syms = [int(p) for p in parts]
    except ValueError:
        raise ValueError(f"{what}: symbols must be integers, got {body!r}") from None
    if not syms:
        raise ValueError(f"{what}: empty symbol string")
    bad = [k for k in syms if not 0 <= k < d]
    if bad:
        raise ValueError(f"{what}: symbol {bad[0]} out of range for {d} matrices")
    return syms


def parse_omega(spec: str, d: int) -> Iterator[int] | str:
    """Turn an omega spec into a symbol iterator.

    ``"forge"`` is returned as is; the caller owns the forge dispatch.
    Explicit strings are finite; ``cycle:`` and ``random:`` are infinite.
    """
    spec = spec.strip()
    if spec == "forge":
        return spec
    if spec.startswith("cycle:"):
        return cycle(_digits(spec[6:], d, "cycle"))
    if spec.startswith("random:"):
        try:
            seed = int(spec[7:])
        except ValueError:
            raise ValueError(f"random: seed must be an integer, got {spec[7:]!r}") from None
        rng = random.Random(seed)
        return iter(lambda: rng.randrange(d), None)
    return iter(_digits(spec, d, "omega"))


def format_symbols(symbols: Iterable[int], d: int) -> str:
    syms = list(symbols)
    if d <= 10:
        return "".join(map(str, syms))
    return ",".join(map(str, syms))


# ---------------------------------------------------------------------------
# trace CSV


def _frac(x) -> str:
    if x is None:
        return ""
    return f"{x.numerator}/{x.denominator}"


def _flt(x) -> str:
    return "" if x is None else repr(float(x))


def _row(rec: StepRecord) -> list[str]:
    if rec.excluded:
        return [str(rec.n), str(rec.symbol)] + [""] * 12 + ["excluded"]
    sign = rec.det_sign.value
    locked = rec.det_sign is DetSign.LOCKED
    in_L = "" if locked else str(int(rec.in_L))
    in_U = "" if locked else str(int(rec.in_U))
    if rec.mode is Mode.EXACT:
        num, den = rec.ratio.canonical()
        fields = [str(num), str(den), repr(rec.ratio_float)]
        fields += [_frac(x) for x in (rec.u, rec.v, rec.w, rec.width, rec.alpha, rec.beta, rec.gamma)]
    else:
        fields = ["", "", repr(rec.ratio_float)]
        fields += [_flt(x) for x in (rec.u, rec.v, rec.w, rec.width, rec.alpha, rec.beta, rec.gamma)]
    return [str(rec.n), str(rec.symbol)] + fields + [in_L, in_U, sign]


def write_trace_csv(records: Iterable[StepRecord], fh: TextIO) -> int:
    """Stream records to ``fh``; returns the number of rows written."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    count = 0
    for rec in records:
        writer.writerow(_row(rec))
        count += 1
    return count


def read_trace_csv(fh: TextIO) -> list[dict]:
    return list(csv.DictReader(fh))
