"""Audits and derived computations on V_n values.

Contents: an Alexander-polynomial oracle (independent of the state sum),
symmetry and specialization checks, genus and positivity audits, the V_1 to
V_2 cabling relation, the mirror-folded equivalence sieve, and linear
recurrences for the 2-strand torus knots.
"""
from __future__ import annotations

import csv
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .diagram import PDCode
from .poly import (
    ONE,
    Q,
    T,
    ZERO,
    LaurentPoly,
    coeffs_nonneg,
    divexact,
    expand_u_form,
    mirror,
    parse_poly,
    substitute_monomial,
    t_span,
    to_text,
)

# ---------------------------------------------------------------- Alexander oracle


def _bareiss_det(m: list[list[LaurentPoly]]) -> LaurentPoly:
    """Fraction-free determinant; every division is exact."""
    m = [row[:] for row in m]
    n = len(m)
    if n == 0:
        return ONE
    sign = 1
    prev = ONE
    for k in range(n - 1):
        if m[k][k].is_zero():
            swap = next((r for r in range(k + 1, n) if not m[r][k].is_zero()), None)
            if swap is None:
                return ZERO
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = divexact(m[i][j] * m[k][k] - m[i][k] * m[k][j], prev)
            m[i][k] = ZERO
        prev = m[k][k]
    return m[n - 1][n - 1].scale(sign)


def _normalize_alexander(d: LaurentPoly) -> LaurentPoly:
    if d.is_zero():
        raise ArithmeticError("Alexander determinant vanished; not a knot diagram?")
    lo, hi = d.t_range()
    if (hi - lo) % 2:
        raise ArithmeticError(f"Alexander polynomial {d} has odd span")
    d = d.shift(-(lo + hi) // 2, 0)
    at_one = sum(c for _e, c in d.items())
    if abs(at_one) != 1:
        raise ArithmeticError(f"Alexander polynomial {d} has |value at 1| = {abs(at_one)}")
    return d.scale(at_one)


def alexander_oracle(pd: PDCode) -> LaurentPoly:
    """Symmetrized Alexander polynomial from the Wirtinger presentation.

    Over-strands are found by joining the two over-edges of every crossing;
    each crossing contributes the abelianized Fox derivative of its relation.
    Deleting one row and column leaves a square matrix whose determinant is
    the Alexander polynomial up to a unit, fixed by symmetry and Delta(1)=1.
    """
    if not pd.crossings:
        return ONE
    parent: dict[int, int] = {}

    def find(a: int) -> int:
        parent.setdefault(a, a)
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for c in pd.crossings:
        for a in c.arcs:
            find(a)
        i, j, k, l = c.arcs
        parent[find(j)] = find(l)
    strands = sorted({find(a) for a in parent})
    col = {s: n for n, s in enumerate(strands)}
    one_minus_t = ONE - T
    rows = []
    for c in pd.crossings:
        i, j, k, l = c.arcs
        row = [ZERO] * len(strands)
        o, a, b = col[find(j)], col[find(i)], col[find(k)]
        if c.sign > 0:
            entries = ((o, one_minus_t), (a, T), (b, -ONE))
        else:
            entries = ((o, -one_minus_t), (a, ONE), (b, -T))
        for idx, v in entries:
            row[idx] = row[idx] + v
        rows.append(row)
    minor = [r[:-1] for r in rows[:-1]]
    return _normalize_alexander(_bareiss_det(minor))


# ---------------------------------------------------------------- axiom checks

_T_INV = {"t": (1, -1, 0)}
_T_TO_Q = {"t": (1, 0, 1)}
_Q_TO_1 = {"q": (1, 0, 0)}
_Q_NEG = {"q": (-1, 0, 1)}


def check_symmetry(p: LaurentPoly) -> bool:
    return substitute_monomial(p, _T_INV) == p


@dataclass(frozen=True)
class SpecializationReport:
    at_t_equals_q: bool        # V(q, q) = 1
    at_q_equals_1: bool        # V(t, 1) = Delta(t)^2

    @property
    def ok(self) -> bool:
        return self.at_t_equals_q and self.at_q_equals_1


def check_specialization(p: LaurentPoly, pd: PDCode, alexander: LaurentPoly | None = None) -> SpecializationReport:
    if alexander is None:
        alexander = alexander_oracle(pd)
    return SpecializationReport(
        substitute_monomial(p, _T_TO_Q).is_one(),
        substitute_monomial(p, _Q_TO_1) == alexander * alexander,
    )


# ---------------------------------------------------------------- records and tables

FLAG_NAMES = ("alternating", "tight", "loose", "thin", "thick")


@dataclass
class InvariantRecord:
    knot_name: str
    n: int
    poly: LaurentPoly
    genus: int | None = None
    flags: frozenset[str] = frozenset()
    status: dict[str, str] = field(default_factory=dict)

    @property
    def t_span(self) -> int:
        return t_span(self.poly)

    def genus_status(self) -> str | None:
        if self.genus is None:
            return None
        s, bound = self.t_span, 4 * self.genus
        return "equality" if s == bound else ("strict" if s < bound else "violation")


@dataclass(frozen=True)
class Annotation:
    genus: int | None
    alternating: bool | None
    thin: bool | None


def _opt_bool(x: str) -> bool | None:
    x = x.strip().lower()
    if x in ("", "na", "?"):
        return None
    return x in ("1", "true", "yes", "y")


def read_annotations(path: str | Path) -> dict[str, Annotation]:
    """Sidecar CSV with columns name,genus,alternating,thin (blank = unknown)."""
    out = {}
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            g = row.get("genus", "").strip()
            out[row["name"].strip()] = Annotation(
                int(g) if g else None,
                _opt_bool(row.get("alternating", "")),
                _opt_bool(row.get("thin", "")),
            )
    return out


def alexander_span(p: LaurentPoly) -> int:
    """Span of Delta, read off V(t, 1) = Delta(t)^2."""
    return t_span(substitute_monomial(p, _Q_TO_1)) // 2


def annotate_flags(p: LaurentPoly, ann: Annotation | None) -> tuple[int | None, frozenset[str]]:
    if ann is None:
        return None, frozenset()
    flags = set()
    if ann.alternating:
        flags.add("alternating")
    if ann.thin is not None:
        flags.add("thin" if ann.thin else "thick")
    if ann.genus is not None:
        flags.add("tight" if alexander_span(p) == 2 * ann.genus else "loose")
    return ann.genus, frozenset(flags)


TSV_COLUMNS = ("name", "n", "polynomial", "t_span", "genus", "flags", "status")


def format_record(r: InvariantRecord) -> str:
    flags = ",".join(f for f in FLAG_NAMES if f in r.flags)
    status = ";".join(f"{k}={v}" for k, v in sorted(r.status.items()))
    genus = "" if r.genus is None else str(r.genus)
    return "\t".join([r.knot_name, str(r.n), to_text(r.poly), str(r.t_span), genus, flags, status])


def write_records(records: Iterable[InvariantRecord], path: str | Path) -> None:
    with open(path, "w") as f:
        f.write("\t".join(TSV_COLUMNS) + "\n")
        for r in records:
            f.write(format_record(r) + "\n")


def read_records(path: str | Path) -> list[InvariantRecord]:
    out = []
    with open(path) as f:
        header = f.readline().rstrip("\n").split("\t")
        if tuple(header[:3]) != TSV_COLUMNS[:3]:
            raise ValueError(f"{path}: unexpected header {header}")
        for lineno, line in enumerate(f, 2):
            line = line.rstrip("\n")
            if not line:
                continue
            cols = dict(zip(header, line.split("\t")))
            poly = parse_poly(cols["polynomial"])
            if "t_span" in cols and cols["t_span"] and int(cols["t_span"]) != t_span(poly):
                raise ValueError(f"{path}:{lineno}: t_span column disagrees with polynomial")
            status = {}
            for item in filter(None, cols.get("status", "").split(";")):
                k, _, v = item.partition("=")
                status[k] = v
            out.append(InvariantRecord(
                cols["name"],
                int(cols["n"]),
                poly,
                int(cols["genus"]) if cols.get("genus") else None,
                frozenset(filter(None, cols.get("flags", "").split(","))),
                status,
            ))
    return out


# ---------------------------------------------------------------- genus audit


@dataclass
class GenusReport:
    status: dict[str, str]
    counts: Counter

    @property
    def violations(self) -> list[str]:
        return [k for k, v in self.status.items() if v == "violation"]


def genus_report(records: Sequence[InvariantRecord]) -> GenusReport:
    """t_span against 4*genus for every annotated record."""
    status = {}
    for r in records:
        s = r.genus_status()
        if s is not None:
            status[r.knot_name] = s
    return GenusReport(status, Counter(status.values()))


# ---------------------------------------------------------------- V1 -> V2 relation

# D * V2(t^2, q^2) = N0 * V1(K(2,1)) + Nm * V1(K)(t^2/q, q) + Np * V1(K)(t^2 q, q)
# with D = q t (1+q^2)(t^2-1).  The outer coefficients carry the sign that makes
# the three weights sum to 1 (the unknot case).
_D = Q * T * (ONE + Q**2) * (T**2 - ONE)
_N0 = Q * (Q + T) * (T**2 - ONE) * (ONE + Q * T)
_NM = T**2 * (ONE - Q**2 * T**2)
_NP = Q**2 - T**2


def relation_coefficients() -> tuple[LaurentPoly, LaurentPoly, LaurentPoly, LaurentPoly]:
    """(numerator of c_{2,0}, of c_{2,-1}, of c_{2,1}, common denominator)."""
    return _N0, _NM, _NP, _D


def _halve_exponents(p: LaurentPoly) -> LaurentPoly:
    terms = {}
    for (a, b), c in p.items():
        if a % 2 or b % 2:
            raise ArithmeticError(f"odd exponent t^{a} q^{b} in V2(t^2, q^2)")
        terms[(a // 2, b // 2)] = c
    return LaurentPoly(terms)


def v2_from_v1(v1_knot: LaurentPoly, v1_cable: LaurentPoly) -> LaurentPoly:
    """V_2(K) from V_1(K) and V_1 of the (2,1)-cable."""
    num = (
        _N0 * v1_cable
        + _NM * substitute_monomial(v1_knot, {"t": (1, 2, -1)})
        + _NP * substitute_monomial(v1_knot, {"t": (1, 2, 1)})
    )
    return _halve_exponents(divexact(num, _D))


# ---------------------------------------------------------------- sieve


def sieve_key(p: LaurentPoly) -> str:
    """Mirror-folded canonical key: the smaller serialization of p and p(q -> 1/q)."""
    return min(to_text(p), to_text(mirror(p)))


_NAME = re.compile(r"^(\d+)([an_]?)(\d+)$")


def census_order(name: str):
    m = _NAME.match(name)
    if not m:
        return (1 << 30, "", 0, name)
    return (int(m.group(1)), m.group(2), int(m.group(3)), name)


@dataclass(frozen=True)
class SieveClass:
    members: tuple[tuple[str, bool], ...]     # (name, mirrored relative to the first member)

    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.members)

    def __str__(self) -> str:
        return " ".join(f"{n}*" if m else n for n, m in self.members)


def sieve_classes(records: Sequence[InvariantRecord], mirror_fold: bool = True) -> list[SieveClass]:
    """Groups of at least two knots with equal value, up to mirror image if mirror_fold.

    A trailing `*` marks members whose value equals the mirror of the first
    member's value (and not the value itself).  Output is independent of the
    order of `records`.
    """
    ns = {r.n for r in records}
    if len(ns) > 1:
        raise ValueError(f"records mix invariants n={sorted(ns)}")
    groups: dict[str, list[InvariantRecord]] = {}
    for r in records:
        key = sieve_key(r.poly) if mirror_fold else to_text(r.poly)
        groups.setdefault(key, []).append(r)
    out = []
    for rs in groups.values():
        if len(rs) < 2:
            continue
        rs = sorted(rs, key=lambda r: census_order(r.knot_name))
        first = rs[0].poly
        out.append(SieveClass(tuple((r.knot_name, r.poly != first) for r in rs)))
    out.sort(key=lambda c: census_order(c.members[0][0]))
    return out


# ---------------------------------------------------------------- positivity


@dataclass
class PositivityReport:
    results: dict[str, bool]

    @property
    def ok(self) -> bool:
        return all(self.results.values())

    @property
    def failures(self) -> list[str]:
        return [k for k, v in self.results.items() if not v]


def positive_at_minus_q(p: LaurentPoly) -> bool:
    return coeffs_nonneg(substitute_monomial(p, _Q_NEG))


def positivity_audit(records: Sequence[InvariantRecord], only_alternating: bool = True) -> PositivityReport:
    res = {}
    for r in records:
        if only_alternating and "alternating" not in r.flags:
            continue
        res[r.knot_name] = positive_at_minus_q(r.poly)
    return PositivityReport(res)


# ---------------------------------------------------------------- recurrences


@dataclass(frozen=True)
class RecurrenceSpec:
    """sum_k coeffs[k] * f_{b+k} = 0 for all b, with the given initial values."""

    order: int
    coeffs: tuple[LaurentPoly, ...]
    initials: Mapping[int, LaurentPoly]

    def __post_init__(self):
        if len(self.coeffs) != self.order + 1:
            raise ValueError(f"order {self.order} needs {self.order + 1} coefficients")
        if self.coeffs[0].is_zero() or self.coeffs[-1].is_zero():
            raise ValueError("leading and trailing coefficients must be nonzero")


def lin_extend(spec: RecurrenceSpec, lo: int, hi: int) -> dict[int, LaurentPoly]:
    """Values on lo..hi, extending forward and backward from the first `order` initials.

    Initial values outside that window must agree with the recurrence.
    """
    d = spec.order
    start = min(spec.initials)
    if any(i not in spec.initials for i in range(start, start + d)):
        raise ValueError(f"initials must cover {d} consecutive indices from {start}")
    vals = {i: spec.initials[i] for i in range(start, start + d)}
    c = spec.coeffs
    top, bottom = start + d - 1, start
    want_hi, want_lo = max(hi, max(spec.initials)), min(lo, start)
    while top < want_hi:
        b = top + 1 - d
        acc = sum((c[k] * vals[b + k] for k in range(d)), ZERO)
        top += 1
        vals[top] = divexact(-acc, c[d])
    while bottom > want_lo:
        b = bottom - 1
        acc = sum((c[k] * vals[b + k] for k in range(1, d + 1)), ZERO)
        vals[b] = divexact(-acc, c[0])
        bottom = b
    for i, v in spec.initials.items():
        if vals[i] != v:
            raise ArithmeticError(f"initial value at {i} contradicts the recurrence")
    return {i: vals[i] for i in range(lo, hi + 1)}


def _from_roots(roots: Sequence[tuple[LaurentPoly, LaurentPoly]]) -> tuple[LaurentPoly, ...]:
    """Coefficients (ascending in x) of prod(den * x - num)."""
    c = [ONE]
    for num, den in roots:
        nxt = [ZERO] * (len(c) + 1)
        for i, ci in enumerate(c):
            nxt[i] = nxt[i] - ci * num
            nxt[i + 1] = nxt[i + 1] + ci * den
        c = nxt
    return tuple(c)


def _u(*coeffs: str) -> LaurentPoly:
    return expand_u_form([parse_poly(x) for x in coeffs])


def torus_recurrence(n: int) -> RecurrenceSpec:
    """Recurrence for b -> V_n(T(2, 2b+1)), from the minimal polynomial of the squared R-matrix."""
    if n == 1:
        roots = [(ONE, ONE), (T**2, Q**2), (ONE, Q**2 * T**2)]
        f1 = _u("1", "q^-1+q^-3", "q^-2")
        return RecurrenceSpec(3, _from_roots(roots), {-1: ONE, 0: ONE, 1: f1})
    if n == 2:
        roots = [(ONE, ONE), (T**2, Q**2), (ONE, Q**3), (T**2, Q**4), (ONE, Q**2 * T**2), (ONE, Q**4 * T**2)]
        gm2 = _u("1", "q+2*q^3-q^4+q^5-q^6", "q^2+q^4-q^5")
        gm3 = _u(
            "1",
            "2*q+3*q^3-q^4+3*q^5-q^6+2*q^7-q^8+q^9-2*q^10+q^11-q^12",
            "4*q^2+7*q^4-3*q^5+10*q^6-6*q^7+6*q^8-7*q^9+3*q^10-3*q^11",
            "3*q^3+6*q^5-3*q^6+6*q^7-6*q^8+3*q^9-3*q^10",
            "q^4+q^6-q^7+q^8-q^9",
        )
        init = {-3: gm3, -2: gm2, -1: ONE, 0: ONE, 1: mirror(gm2), 2: mirror(gm3)}
        return RecurrenceSpec(6, _from_roots(roots), init)
    raise ValueError(f"no torus recurrence stored for n={n}")


def torus_family(n: int, b: int) -> LaurentPoly:
    """V_n of T(2, 2b+1); T(2, m) here is the closure of sigma_1^m."""
    spec = torus_recurrence(n)
    lo, hi = min(spec.initials), max(spec.initials)
    return lin_extend(spec, min(b, lo), max(b, hi))[b]


def torus_family_range(n: int, lo: int, hi: int) -> dict[int, LaurentPoly]:
    spec = torus_recurrence(n)
    a, z = min(spec.initials), max(spec.initials)
    vals = lin_extend(spec, min(lo, a), max(hi, z))
    return {b: vals[b] for b in range(lo, hi + 1)}
