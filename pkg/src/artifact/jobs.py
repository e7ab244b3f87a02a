"""Job orchestration: one job evaluates a cocycle at a special point and recognizes the value."""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from . import __version__
from .cocycle import SigmaCache, ingest_newforms, j_eval, validate_divisor
from .io import data_path, format_divisor_label, format_factor, parse_divisor_label, read_units
from .padic import make_context
from .paths import INFINITY, base_pair_decompose
from .points import RealQuadElt, atr_points, build_atr_fields, small_points
from .recognition import algdep, allowed_primes, conj_triv

log = logging.getLogger(__name__)

__all__ = [
    "JobSpec",
    "JobError",
    "DEFAULT_DIGITS",
    "MAX_DIGITS",
    "EXTENDED_MAX_DIGITS",
    "MIN_RECOGNITION_DIGITS",
    "run_job",
    "run_jobs",
    "pmap",
    "unit_from_vector",
]

DEFAULT_DIGITS = 40
MAX_DIGITS = 40
# below this many digits a lattice relation carries no weight, whatever its height
MIN_RECOGNITION_DIGITS = 10
EXTENDED_MAX_DIGITS = 400
POINT_TYPES = ("smallRM", "smallCM", "bigATR")


class JobError(RuntimeError):
    """A failure tagged with the pipeline stage that raised it."""

    def __init__(self, stage: str, exc: BaseException):
        super().__init__(f"[{stage}] {type(exc).__name__}: {exc}")
        self.stage = stage


@dataclass(frozen=True)
class JobSpec:
    label: str
    type: str
    p: int
    D: int
    n: int = 1
    digits: int = DEFAULT_DIGITS
    char: str = "both"
    cache_dir: str | None = None
    newforms: str | None = None
    units: str | None = None
    extended: bool = False
    branch: tuple[int, int] = (0, 0)
    max_level: int = 3
    guard: int = 6

    def __post_init__(self):
        parse_divisor_label(self.label)
        if self.type not in POINT_TYPES:
            raise ValueError(f"type must be one of {POINT_TYPES}")
        if self.char not in ("triv", "conj", "both"):
            raise ValueError("char must be triv, conj or both")
        cap = EXTENDED_MAX_DIGITS if self.extended else MAX_DIGITS
        if not 1 <= self.digits <= cap:
            raise ValueError(f"digits must lie in 1..{cap} (use the extended mode for more)")


def unit_from_vector(data, coords: Sequence[Fraction]) -> tuple[RealQuadElt, RealQuadElt]:
    """(T, y) with u = (T + y w)/2 from coordinates on 1, w, w^2, w^3."""
    c0, c1, c2, c3 = (Fraction(c) for c in coords)
    na = data.alpha * data.n
    T = (RealQuadElt(c0, Fraction(0), data.D) + na * RealQuadElt(c2, Fraction(0), data.D)) * RealQuadElt(
        Fraction(2), Fraction(0), data.D
    )
    y = (RealQuadElt(c1, Fraction(0), data.D) + na * RealQuadElt(c3, Fraction(0), data.D)) * RealQuadElt(
        Fraction(2), Fraction(0), data.D
    )
    return T, y


def _stage(name: str, fn: Callable, *a, **kw):
    try:
        return fn(*a, **kw)
    except JobError:
        raise
    except Exception as exc:  # every failure is reported with its stage
        raise JobError(name, exc) from exc


def _build_point(spec: JobSpec, ctx):
    if spec.type == "bigATR":
        unit = None
        if spec.units:
            table = read_units(spec.units)
            if (spec.D, spec.n) in table:
                data = build_atr_fields(spec.D, spec.n)
                unit = unit_from_vector(data, table[(spec.D, spec.n)])
        pts = atr_points(spec.D, spec.n, ctx, unit=unit)
    else:
        pts = small_points(spec.D, ctx)
        want = "smallRM" if spec.type == "smallRM" else "smallCM"
        pts = [pt for pt in pts if pt.kind == want]
    for pt in pts:
        if tuple(pt.branch) == tuple(spec.branch):
            return pt
    if spec.type == "smallCM" and spec.branch == (0, 0):
        return pts[0]
    raise ValueError(f"branch {spec.branch} not available for {spec.type}")


def run_job(spec: JobSpec) -> dict:
    """Evaluate, split into trivial and conjugate parts, recognize, and return a record.

    The record carries every table column plus bookkeeping and nothing
    that depends on the machine, so reruns are byte-identical; timings go
    to the log.
    """
    t0 = time.perf_counter()
    D = _stage("divisor", parse_divisor_label, spec.label)
    forms_path = spec.newforms
    if forms_path is None and data_path(f"newforms_{4 * spec.p}.txt").exists():
        forms_path = data_path(f"newforms_{4 * spec.p}.txt")
    forms = _stage("newforms", ingest_newforms, forms_path, spec.p) if forms_path else None
    report = _stage("divisor", validate_divisor, D, forms, spec.p)
    if not report.passed:
        raise JobError("divisor", ValueError(f"divisor {spec.label} fails the weight/newform conditions"))
    ctx = _stage("context", make_context, spec.p, spec.digits, spec.guard)
    pt = _stage("point", _build_point, spec, ctx)
    chain = _stage("path", base_pair_decompose, INFINITY, pt.cusp_target())
    cache = SigmaCache(spec.p, spec.cache_dir)
    res = _stage(
        "evaluation",
        j_eval,
        D,
        chain,
        pt.tau,
        ctx,
        target=spec.digits,
        family="iwahori",
        max_level=spec.max_level,
        cache=cache,
    )
    J = res.value
    triv, conj = _stage("conjugation", conj_triv, J)
    achieved = max(min(res.precision, spec.digits), 1)
    rctx = ctx.with_precision(achieved, 0)

    allowed = None
    q = None
    if spec.type == "bigATR":
        data = pt.data[0]
        q = data.q
        allowed = allowed_primes([d for d, _ in D.terms], q, spec.p, data).filtered

    trivial_flag = (triv - 1).is_zero() or (triv - 1).val >= achieved
    chars = ("triv", "conj") if spec.char == "both" else (spec.char,)
    out = {
        "label": format_divisor_label(D),
        "type": spec.type,
        "p": spec.p,
        "D": spec.D,
        "n": spec.n,
        "branch": list(pt.branch),
        "gamma_u": [[str(e.re), str(e.im)] if hasattr(e, "re") else str(e) for e in _flat(pt.gamma_u)],
        "iterations": res.iterations,
        "converged": res.converged,
        "precision": achieved,
        "trivial": bool(trivial_flag),
        "version": __version__,
        "cache": sorted(f"{d}:{v}" for d, v in cache._mem),
        "q": q,
        "value": {"J": J.to_record(), "triv": triv.to_record(), "conj": conj.to_record()},
    }
    out["recognized"] = False
    for ch in chars:
        x = triv if ch == "triv" else conj
        if (x - 1).is_zero() or (x - 1).val >= achieved:
            out[f"{ch}_poly"] = [-1, 1]
            continue
        if achieved < MIN_RECOGNITION_DIGITS:
            out[f"{ch}_flag"] = "insufficient-precision"
            continue
        rec = _stage("recognition", algdep, x, rctx, 8, None, 5, allowed)
        out[f"{ch}_flag"] = rec.flag
        if rec.recognized:
            out["recognized"] = True
            out["char"] = ch
            out["poly"] = list(rec.poly)
            out["field"] = list(rec.field_poly)
            out["factor"] = format_factor(rec.norm, rec.norm_sign)
    log.info("%s %s D=%s n=%s p=%s: %.3fs", out["label"], spec.type, spec.D, spec.n, spec.p, time.perf_counter() - t0)
    return out


def _flat(g):
    if len(g) == 2 and isinstance(g[0], (tuple, list)):
        return [g[0][0], g[0][1], g[1][0], g[1][1]]
    return list(g)


def pmap(fn: Callable, items: Iterable, workers: int = 1) -> list:
    """Order-preserving map, in a process pool when ``workers > 1``."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def run_jobs(specs: Iterable[JobSpec], workers: int = 1) -> list[dict]:
    return pmap(run_job, specs, workers)
