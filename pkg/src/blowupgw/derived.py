"""Derived enumerative numbers and the standard tables."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .engine import Workspace
from .ring import CohClass, abelian_surface_ring, curve_secant_ring, format_rational


def _ws(ws):
    return ws if ws is not None else Workspace()


# ---------------------------------------------------------------------------
# tangency

@dataclass
class TangencyQuery:
    r: int
    d: int
    k: int
    T: tuple = ()  # names of non-exceptional classes


def default_tangency_classes(r, d, k):
    """Points plus at most one H^j filling the dimension of a tangency count."""
    excess = (r + 1) * d - 2 - k
    if excess < 0:
        raise ValueError("no insertions fit: degree too small")
    a, rem = divmod(excess, r - 1)
    T = ["pt"] * a
    if rem:
        T.append(f"H{rem + 1}")
    return tuple(T)


def tangency_count(q, ws=None):
    """Rational curves through T tangent at a fixed point to a fixed (k+1)-codim space.

    For k < r-1 this is GW on P^r(1) of class dH'-E' with the extra insertion
    -(-E)^{k+1}; for k = r-1 it is GW_d(T, pt, pt) on P^r minus twice
    GW_{dH'-2E'}(T) on P^r(1).
    """
    r, d, k = q.r, q.d, q.k
    if not (r >= 2 and d >= 1 and 1 <= k <= r - 1):
        raise ValueError("need r >= 2, d >= 1 and 1 <= k <= r-1")
    ws = _ws(ws)
    X = ws.point_blowup(r, 0)
    bX = ws.point_blowup(r, 1)
    for name in q.T:
        c = bX.t.cls(name)
        (idx,) = c.coeffs
        if bX.t.basis[idx].exc:
            raise ValueError("tangency insertions must be non-exceptional")
    n = len(q.T)
    total = sum(bX.t.codims[bX.t.index[x]] for x in q.T)
    need = (r + 1) * d + r - 3 + n - r + 1 - k
    if total != need:
        raise ValueError(f"insertions have codimension {total}, need {need}")
    if k < r - 1:
        tang = CohClass.basis(bX.t.index[f"E1.{k + 1}"], (-1) ** k)
        return bX.gw((d, -1), list(q.T) + [tang])
    return X.gw((d,), list(q.T) + ["pt", "pt"]) - 2 * bX.gw((d, -2), list(q.T))


# ---------------------------------------------------------------------------

def multiple_cover_number(d, ws=None):
    """GW of P^3(2) in class d(H' - E'_1 - E'_2): d-fold covers of the line through both points."""
    if d < 1:
        raise ValueError("need d >= 1")
    return _ws(ws).point_blowup(3, 2).gw((d, -d, -d), [])


def secant_closed_forms(d, g):
    """The closed forms for the line invariants of P^3 blown up along a (d, g) curve.

    Returns a list of (e, classes, value) with classes as names.
    """
    d, g = Fraction(d), Fraction(g)
    return [
        (-1, ("H2", "H2", "H2"), 2 * d),
        (-1, ("H2", "pt"), d),
        (-1, ("F", "F", "H2"), Fraction(0)),
        (-1, ("F", "H2", "H2"), Fraction(1)),
        (-1, ("F", "pt"), Fraction(1)),
        (-2, ("H2", "H2"), d * (d - 2) + 1 - g),
        (-2, ("pt",), d * (d - 3) / 2 + 1 - g),
        (-2, ("F", "H2"), d - 1),
        (-2, ("F", "F"), Fraction(1)),
        (-3, ("H2",), (d - 1) * (d - 2) * (d - 3) / 3 - g * (d - 2)),
        (-3, ("F",), (d - 1) * (d - 4) / 2 + 1 - g),
        (-4, (), (d - 2) * (d - 3) ** 2 * (d - 4) / 12 - g / 2 * (d * d - 7 * d + 13 - g)),
    ]


def secant_list(d, g, ws=None):
    """Engine values next to the closed forms: list of (e, classes, engine, closed)."""
    eng = _ws(ws).engine(curve_secant_ring(d, g))
    return [(e, cl, eng.gw((1, e), list(cl)), v) for e, cl, v in secant_closed_forms(d, g)]


def secant_numbers(d, g, ws=None):
    """(t, q): trisecants of a (d, g) space curve meeting a line, and quadrisecants."""
    eng = _ws(ws).engine(curve_secant_ring(d, g))
    return eng.gw((1, -3), ["H2"]), eng.gw((1, -4), [])


def abelian_sixsecants(ws=None):
    """6-secant lines of a generic abelian surface of degree 10 in P^4."""
    return _ws(ws).engine(abelian_surface_ring()).gw((1, -6), [])


# ---------------------------------------------------------------------------
# tables

@dataclass
class Table:
    id: str
    r: object
    s: int
    row_header: str
    columns: list                       # column values of d
    rows: list = field(default_factory=list)  # (label, [Fraction or None])

    def cell(self, label, d):
        for lab, vals in self.rows:
            if lab == label:
                return vals[self.columns.index(d)]
        raise KeyError(label)

    def to_tsv(self):
        lines = [f"# table={self.id} r={self.r} s={self.s}",
                 "\t".join([self.row_header] + [f"d={d}" for d in self.columns])]
        for label, vals in self.rows:
            lines.append("\t".join([label] + [_fmt(v) for v in vals]))
        return "\n".join(lines) + "\n"

    def to_markdown(self):
        head = [self.row_header] + [f"d={d}" for d in self.columns]
        body = [[label] + [_fmt(v) for v in vals] for label, vals in self.rows]
        widths = [max(len(row[j]) for row in [head] + body) for j in range(len(head))]

        def line(row):
            return "| " + " | ".join(x.rjust(w) for x, w in zip(row, widths)) + " |"

        sep = "|" + "|".join("-" * (w + 1) + ":" for w in widths) + "|"
        return "\n".join([f"**{self.id}**", "", line(head), sep] + [line(b) for b in body]) + "\n"


def _fmt(v):
    return "-" if v is None else format_rational(v)


def _pt_cell(r, count):
    def cell(beta):
        n = count(beta)
        return None if n < 0 else ["pt"] * n
    return cell


def _p41_cell(beta):
    d, e1, e2 = beta
    n = 5 * d + 3 * e1 + 3 * e2 + 1
    if n < 0:
        return None
    b = n % 3
    return ["pt"] * ((n - b) // 3) + ["H2"] * b


TABLES = {
    "p2-1": dict(r=2, s=1, header="e", dmin=1, dmax=7,
                 rows=[(e,) for e in range(0, -7, -1)],
                 cell=_pt_cell(2, lambda b: 3 * b[0] + b[1] - 1)),
    "p3-1": dict(r=3, s=1, header="e", dmin=1, dmax=8,
                 rows=[(e,) for e in range(0, -5, -1)],
                 cell=_pt_cell(3, lambda b: 2 * b[0] + b[1])),
    "p3-2": dict(r=3, s=2, header="e1,e2", dmin=2, dmax=9,
                 rows=[(-2, -2), (-3, -2), (-3, -3), (-4, -2), (-4, -3), (-4, -4)],
                 cell=_pt_cell(3, lambda b: 2 * b[0] + b[1] + b[2])),
    "p4-1": dict(r=4, s=2, header="e1,e2", dmin=2, dmax=8,
                 rows=[(-1, -1), (-2, -1), (-2, -2), (-3, -1), (-3, -2), (-3, -3),
                       (-4, -1), (-4, -2)],
                 cell=_p41_cell),
    "ex-tangency": dict(r="2,3", s=1, header="r,k", dmin=2, dmax=7,
                        rows=[(2, 1), (3, 1), (3, 2)]),
    "covmult": dict(r=3, s=2, header="class", dmin=1, dmax=6, rows=[("-d,-d",)]),
}

# smallest dmax used by default for tables whose last columns are expensive
DEFAULT_DMAX = {"p2-1": 7, "p3-1": 8, "p3-2": 9, "p4-1": 7, "ex-tangency": 7, "covmult": 6}


def _label(row):
    return ",".join(str(x) for x in row)


def table_cell(table_id, row, d, ws=None):
    """One cell of a standard table; None where the table has no entry."""
    spec = TABLES[table_id]
    ws = _ws(ws)
    if table_id == "ex-tangency":
        r, k = row
        q = TangencyQuery(r, d, k, default_tangency_classes(r, d, k))
        return tangency_count(q, ws)
    if table_id == "covmult":
        return multiple_cover_number(d, ws)
    beta = (d,) + tuple(row)
    T = spec["cell"](beta)
    if T is None:
        return None
    return ws.point_blowup(spec["r"], spec["s"]).gw(beta, T)


def make_table(table_id, dmax=None, workers=1, ws=None, dmin=None):
    """Compute one of the standard tables; cells run on ``workers`` threads."""
    if table_id not in TABLES:
        raise ValueError(f"unknown table {table_id!r}; known: {', '.join(TABLES)}")
    spec = TABLES[table_id]
    ws = _ws(ws)
    lo = spec["dmin"] if dmin is None else dmin
    hi = DEFAULT_DMAX[table_id] if dmax is None else dmax
    cols = list(range(lo, hi + 1))
    jobs = [(row, d) for row in spec["rows"] for d in cols]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            vals = list(pool.map(lambda j: table_cell(table_id, j[0], j[1], ws), jobs))
    else:
        vals = [table_cell(table_id, row, d, ws) for row, d in jobs]
    table = Table(table_id, spec["r"], spec["s"], spec["header"], cols)
    it = iter(vals)
    for row in spec["rows"]:
        table.rows.append((_label(row), [next(it) for _ in cols]))
    return table
