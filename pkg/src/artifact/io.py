"""Persistence: divisor labels, enumeration caches, result stores, tables and unit files."""

from __future__ import annotations

import fcntl
import hashlib
import json
import os
import re
import warnings
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator, Sequence, TextIO

import numpy as np

from .quadspace import DivisorSpec, sigma0_array

__all__ = [
    "SCHEMA_VERSION",
    "CACHE_VERSION",
    "parse_divisor_label",
    "format_divisor_label",
    "sigma_cache_paths",
    "save_sigma_cache",
    "load_sigma_cache",
    "cache_ops",
    "dump_record",
    "append_record",
    "read_records",
    "export_table",
    "TABLE_COLUMNS",
    "format_factor",
    "parse_units",
    "read_units",
    "data_path",
]

SCHEMA_VERSION = 1
CACHE_VERSION = 1

# ---------------------------------------------------------------------------
# Divisor labels

_SEP = re.compile(r"[·.*]")


def parse_divisor_label(label: str) -> DivisorSpec:
    """Read labels such as ``6_24_even``, ``6·6_14_odd`` or ``3·3·15_21_odd``.

    The positive part comes first with repeated entries for multiplicity,
    the negative part follows the first underscore and the parity is the
    final token.  ``.`` and ``*`` are accepted in place of ``·``.

    >>> parse_divisor_label("3·3·15_21_odd").terms
    ((3, 2), (15, 1), (21, -1))
    """
    parts = label.strip().split("_")
    if len(parts) != 3 or parts[2] not in ("even", "odd") or not parts[0]:
        raise ValueError(f"malformed divisor label {label!r}")
    terms: list[tuple[int, int]] = []
    for chunk, sign in ((parts[0], 1), (parts[1], -1)):
        if not chunk:
            continue
        for tok in _SEP.split(chunk):
            if not tok.isdigit() or int(tok) < 1:
                raise ValueError(f"malformed divisor label {label!r}")
            terms.append((int(tok), sign))
    return DivisorSpec(terms, parts[2])


def format_divisor_label(D: DivisorSpec) -> str:
    pos = [str(d) for d, n in D.terms for _ in range(max(n, 0))]
    neg = [str(d) for d, n in D.terms for _ in range(max(-n, 0))]
    return f"{'·'.join(pos)}_{'·'.join(neg)}_{D.parity}"


# ---------------------------------------------------------------------------
# Enumeration caches


def sigma_cache_paths(directory, p: int, d: int, v: int) -> tuple[Path, Path]:
    base = Path(directory) / f"sigma_p{p}_d{d}_v{v}"
    return base.with_suffix(".npy"), base.with_suffix(".json")


def _digest(arr: np.ndarray) -> str:
    h = hashlib.sha256()
    h.update(str(arr.dtype).encode())
    h.update(str(arr.shape).encode())
    h.update(np.ascontiguousarray(arr).tobytes())
    return h.hexdigest()


def save_sigma_cache(directory, p: int, d: int, v: int, arr: np.ndarray) -> str:
    """Write the array and a JSON header; returns the content hash."""
    os.makedirs(directory, exist_ok=True)
    data_p, head_p = sigma_cache_paths(directory, p, d, v)
    digest = _digest(arr)
    tmp = data_p.with_name(data_p.stem + ".tmp.npy")
    np.save(tmp, arr, allow_pickle=False)
    os.replace(tmp, data_p)
    header = {"p": p, "d": d, "v": v, "version": CACHE_VERSION, "rows": int(arr.shape[0]), "sha256": digest}
    head_p.write_text(json.dumps(header, sort_keys=True) + "\n", encoding="utf-8")
    return digest


def load_sigma_cache(directory, p: int, d: int, v: int) -> np.ndarray | None:
    """The cached array, or None when absent, stale or corrupted."""
    data_p, head_p = sigma_cache_paths(directory, p, d, v)
    if not (data_p.exists() and head_p.exists()):
        return None
    try:
        header = json.loads(head_p.read_text(encoding="utf-8"))
        arr = np.load(data_p, allow_pickle=False)
    except (OSError, ValueError) as exc:
        warnings.warn(f"unreadable cache {data_p.name}: {exc}", stacklevel=2)
        return None
    expect = {"p": p, "d": d, "v": v, "version": CACHE_VERSION}
    if any(header.get(k) != val for k, val in expect.items()):
        return None
    if header.get("sha256") != _digest(arr):
        warnings.warn(f"hash mismatch in {data_p.name}; rebuilding", stacklevel=2)
        return None
    return arr


def _check_rows(arr: np.ndarray, d: int, v: int, p: int, sample: int, seed: int) -> bool:
    if arr.shape[0] == 0:
        return True
    rng = np.random.default_rng(seed)
    idx = rng.choice(arr.shape[0], size=min(sample, arr.shape[0]), replace=False)
    q = d * p**v
    for x, y, b, c in arr[np.sort(idx)].tolist():
        if x * x + y * y - b * c != q or b * c >= 0:
            return False
    return True


def cache_ops(op: str, directory, p: int, keys: Iterable[tuple[int, int]], sample: int = 64) -> dict:
    """``build``, ``verify`` or ``purge`` the caches for the (d, v) keys.

    Verification checks the stored hash, re-checks a random sample of rows
    against the defining equation and compares the row count with a fresh
    enumeration.
    """
    out: dict[str, object] = {}
    for d, v in keys:
        name = f"p{p}_d{d}_v{v}"
        data_p, head_p = sigma_cache_paths(directory, p, d, v)
        if op == "build":
            arr = load_sigma_cache(directory, p, d, v)
            if arr is None:
                arr = sigma0_array(d, v, p)
                save_sigma_cache(directory, p, d, v, arr)
            out[name] = _digest(arr)
        elif op == "verify":
            arr = load_sigma_cache(directory, p, d, v)
            if arr is None:
                out[name] = "missing-or-corrupt"
                continue
            fresh = sigma0_array(d, v, p)
            ok = _check_rows(arr, d, v, p, sample, seed=d * 1000 + v) and _digest(fresh) == _digest(arr)
            out[name] = "clean" if ok else "mismatch"
        elif op == "purge":
            removed = False
            for f in (data_p, head_p):
                if f.exists():
                    f.unlink()
                    removed = True
            out[name] = "purged" if removed else "absent"
        else:
            raise ValueError(f"unknown cache operation {op!r}")
    return out


# ---------------------------------------------------------------------------
# Result store


def dump_record(rec: dict) -> str:
    """Canonical one-line JSON (sorted keys, no spaces)."""
    return json.dumps(rec, sort_keys=True, separators=(",", ":"))


def append_record(path, rec: dict) -> None:
    """Append a record under an exclusive lock (single writer per file)."""
    rec = dict(rec)
    rec.setdefault("schema", SCHEMA_VERSION)
    line = dump_record(rec) + "\n"
    os.makedirs(Path(path).parent or ".", exist_ok=True)
    with open(path, "a", encoding="utf-8") as fh:
        fcntl.flock(fh, fcntl.LOCK_EX)
        try:
            fh.write(line)
        finally:
            fcntl.flock(fh, fcntl.LOCK_UN)


def read_records(path) -> list[dict]:
    out = []
    if not Path(path).exists():
        return out
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            if rec.get("schema") != SCHEMA_VERSION:
                raise ValueError(f"{path}:{lineno}: unsupported schema {rec.get('schema')!r}")
            out.append(rec)
    return out


# ---------------------------------------------------------------------------
# Tables

TABLE_COLUMNS = ("label", "D", "n", "field", "factor")


def format_poly(coeffs: Sequence[int], var: str = "x") -> str:
    """Human form of a polynomial given from the constant term upward."""
    terms = []
    deg = len(coeffs) - 1
    for k in range(deg, -1, -1):
        c = int(coeffs[k])
        if c == 0:
            continue
        mag = abs(c)
        if k == 0:
            body = str(mag)
        else:
            mono = var if k == 1 else f"{var}^{k}"
            body = mono if mag == 1 else f"{mag}*{mono}"
        sign = "-" if c < 0 else "+"
        terms.append((sign, body))
    if not terms:
        return "0"
    first_sign, first = terms[0]
    s = ("-" if first_sign == "-" else "") + first
    for sign, body in terms[1:]:
        s += f" {sign} {body}"
    return s


def format_factor(norm: Sequence[Sequence[int]], sign: int = 1, power: int = 1) -> str:
    """``J = 31^4`` style rendering of a signed factorization."""
    lhs = "J" if power == 1 else f"J^{power}"
    if not norm:
        body = "1" if sign > 0 else "-1"
    else:
        body = " * ".join(f"{l}^{e}" for l, e in norm)
        if sign < 0:
            body = "-" + body
    return f"{lhs} = {body}"


def export_table(records: Iterable[dict], out: TextIO, p: int | None = None, recognized_only: bool = True) -> int:
    """Write a tab-separated table of records; returns the row count.

    Rows are sorted by (D, n, label) so the output is stable regardless of
    the order in which jobs finished.
    """
    rows = []
    for rec in records:
        if p is not None and rec.get("p") != p:
            continue
        if recognized_only and not rec.get("recognized"):
            continue
        rows.append(
            (
                rec.get("label", ""),
                str(rec.get("D", "")),
                str(rec.get("n", "")),
                format_poly(rec["field"]) if rec.get("field") else "",
                rec.get("factor", ""),
            )
        )
    rows.sort(key=lambda r: (int(r[1]) if r[1].lstrip("-").isdigit() else 0, r[2], r[0]))
    out.write("\t".join(TABLE_COLUMNS) + "\n")
    for r in rows:
        out.write("\t".join(r) + "\n")
    return len(rows)


# ---------------------------------------------------------------------------
# Unit files

_UNIT = re.compile(r"^D=(-?\d+)\s+n=(\d+)\s+u=\[?([^\]]+)\]?\s*$")


def parse_units(text: str) -> dict[tuple[int, int], tuple[Fraction, ...]]:
    """Records ``D=<int> n=<int> u=<c0,c1,c2,c3>`` in the power basis of E = F(w).

    Here w is the square root of n*alpha, so the vector lists the
    coordinates of u on 1, w, w^2, w^3.
    """
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _UNIT.match(line)
        if not m:
            raise ValueError(f"line {lineno}: malformed unit record")
        D, n, vec = int(m.group(1)), int(m.group(2)), m.group(3)
        coords = tuple(Fraction(t.strip()) for t in re.split(r"[;,]", vec) if t.strip())
        if len(coords) != 4:
            raise ValueError(f"line {lineno}: expected four coordinates")
        out[(D, n)] = coords
    return out


def read_units(path) -> dict[tuple[int, int], tuple[Fraction, ...]]:
    with open(path, encoding="utf-8") as fh:
        return parse_units(fh.read())


def data_path(name: str) -> Path:
    """Location of a bundled data file (for example ``newforms_52.txt``)."""
    return Path(__file__).with_name("data") / name
