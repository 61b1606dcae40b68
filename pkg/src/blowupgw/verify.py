"""Consistency checks against the axioms, the vanishing theorem and the stored tables."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

from .derived import TABLES, Table, make_table
from .engine import Workspace
from .homology import format_curve_class, vdim
from .keys import GWKey, normalize, vanishing_certificate, weight
from .wdvv import build_relation, evaluate

TABLE_IDS = tuple(TABLES)


# ---------------------------------------------------------------------------
# fixtures

def parse_table_tsv(text):
    """Parse the TSV table format written by :meth:`Table.to_tsv`."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise ValueError("table must start with a '# table=...' header")
    meta = dict(tok.split("=", 1) for tok in lines[0][1:].split())
    head = lines[1].split("\t")
    cols = []
    for h in head[1:]:
        if not h.startswith("d="):
            raise ValueError(f"bad column header {h!r}")
        cols.append(int(h[2:]))
    r = meta.get("r", "")
    table = Table(meta["table"], int(r) if r.isdigit() else r, int(meta.get("s", 0)),
                  head[0], cols)
    for ln in lines[2:]:
        parts = ln.split("\t")
        if len(parts) != len(cols) + 1:
            raise ValueError(f"row {parts[0]!r} has {len(parts) - 1} cells, need {len(cols)}")
        table.rows.append((parts[0], [None if x == "-" else Fraction(x) for x in parts[1:]]))
    return table


def load_fixture(table_id):
    text = resources.files("blowupgw.data").joinpath("fixtures", f"{table_id}.tsv").read_text()
    return parse_table_tsv(text)


@dataclass
class Report:
    name: str
    checked: int = 0
    failures: list = field(default_factory=list)
    seconds: float = 0.0
    notes: dict = field(default_factory=dict)

    @property
    def ok(self):
        return not self.failures

    def summary(self):
        status = "ok" if self.ok else f"{len(self.failures)} FAILED"
        extra = "".join(f" {k}={v}" for k, v in sorted(self.notes.items()))
        return f"{self.name}: {self.checked} checked, {status}{extra}"


def regress_tables(table_id, dmax=None, workers=1, ws=None):
    """Recompute a stored table (up to ``dmax``) and list every differing cell."""
    ws = ws if ws is not None else Workspace()
    t0 = time.perf_counter()
    expected = load_fixture(table_id)
    top = max(expected.columns) if dmax is None else min(dmax, max(expected.columns))
    got = make_table(table_id, dmax=top, workers=workers, ws=ws, dmin=min(expected.columns))
    rep = Report(f"tables[{table_id}]")
    for label, vals in expected.rows:
        for d, want in zip(expected.columns, vals):
            if d > top:
                continue
            have = got.cell(label, d)
            rep.checked += 1
            if have != want:
                rep.failures.append(f"{table_id} {expected.row_header}={label} d={d}: "
                                    f"expected {_f(want)}, computed {_f(have)}")
    rep.seconds = time.perf_counter() - t0
    return rep


def _f(v):
    return "-" if v is None else str(v)


# ---------------------------------------------------------------------------
# vanishing theorem and points versus exceptional lines

def check_vanishing(t, beta, classes):
    """Point index certifying GW_beta(classes) = 0, or None."""
    return vanishing_certificate(t, tuple(beta), tuple(classes))


def check_ptexc(eng, beta, i, classes):
    """Compare GW_{beta - E'_i}(T) with GW_beta(T, pt)."""
    t = eng.t
    beta = tuple(beta)
    if beta[0] == 0 or beta[i] != 0 or weight(t, classes, i) != 0:
        raise ValueError("need d != 0, e_i = 0 and no classes E_i^k")
    lowered = tuple(x - (1 if n == i else 0) for n, x in enumerate(beta))
    return eng.gw_classes(lowered, classes) == eng.gw_classes(beta, tuple(classes) + (t.point,))


def _random_classes(rng, t, total, allowed, max_n=12):
    """A random multiset of allowed basis indices with codimensions summing as needed.

    ``total`` is the excess sum of (codim - 1) still to be filled.
    """
    out = []
    while total > 0 and len(out) < max_n:
        fits = [k for k in allowed if t.codims[k] - 1 <= total]
        if not fits:
            return None
        k = rng.choice(fits)
        out.append(k)
        total -= t.codims[k] - 1
    return tuple(sorted(out)) if total == 0 else None


def _random_beta(rng, t, dmax):
    d = rng.randint(1, dmax)
    return (d,) + tuple(rng.randint(-d, 0) for _ in range(t.s))


def sample_keys(t, n, seed, dmax=4, exceptional=True, tries=50):
    """Random dimension-matched divisor-free keys on a point blow-up."""
    rng = random.Random(seed)
    allowed = [k for k in range(len(t.basis)) if t.codims[k] >= 2
               and (exceptional or t.basis[k].exc is None)]
    out = []
    for _ in range(n * tries):
        if len(out) >= n:
            break
        beta = _random_beta(rng, t, dmax)
        if rng.random() < 0.3:
            i = rng.randint(1, t.s)
            beta = beta[:i] + (rng.randint(0, 2),) + beta[i + 1:]
        excess = vdim(t, beta, 0)
        if excess < 0:
            continue
        cl = _random_classes(rng, t, excess, allowed)
        if cl is None:
            continue
        out.append((beta, cl))
    return out


def vanishing_suite(eng, samples, seed, dmax=4):
    """Keys certified zero by the vanishing theorem must evaluate to zero."""
    t = eng.t
    rep = Report(f"vanishing[{t.name}]")
    t0 = time.perf_counter()
    rng = random.Random(seed)
    found = 0
    for beta, cl in sample_keys(t, samples * 40, seed, dmax):
        if found >= samples:
            break
        i = check_vanishing(t, beta, cl)
        if i is None and rng.random() < 0.8:
            continue
        v = eng.gw_classes(beta, cl)
        rep.checked += 1
        if i is not None:
            found += 1
            if v != 0:
                rep.failures.append(f"{_show(t, beta, cl)} certified by point {i} but = {v}")
    rep.notes["certified"] = found
    rep.seconds = time.perf_counter() - t0
    return rep


def ptexc_suite(eng, samples, seed, dmax=4):
    """GW_{beta-E'_i}(T) = GW_beta(T, pt) whenever e_i(beta) = 0 and T avoids E_i."""
    t = eng.t
    rep = Report(f"ptexc[{t.name}]")
    t0 = time.perf_counter()
    rng = random.Random(seed)
    for _ in range(samples * 50):
        if rep.checked >= samples:
            break
        beta = _random_beta(rng, t, dmax)
        i = rng.randint(1, t.s)
        beta = beta[:i] + (0,) + beta[i + 1:]
        lowered = beta[:i] + (-1,) + beta[i + 1:]
        excess = vdim(t, lowered, 0)
        if excess < 0:
            continue
        allowed = [k for k in range(len(t.basis)) if t.codims[k] >= 2
                   and (t.basis[k].exc is None or t.basis[k].exc[0] != i)]
        cl = _random_classes(rng, t, excess, allowed)
        if cl is None:
            continue
        rep.checked += 1
        if not check_ptexc(eng, beta, i, cl):
            rep.failures.append(f"{_show(t, beta, cl)} with point {i}")
    rep.seconds = time.perf_counter() - t0
    return rep


# ---------------------------------------------------------------------------
# splitting-axiom residuals

def sample_relation(rng, t, dmax=3, tries=200):
    """A random balanced tuple (beta, T, mu1..mu4) on a point blow-up."""
    nondivisor = [k for k in range(len(t.basis)) if t.codims[k] >= 2]
    positive = [k for k in range(len(t.basis)) if t.codims[k] >= 1]
    for _ in range(tries):
        beta = _random_beta(rng, t, dmax)
        if rng.random() < 0.2:
            i = rng.randint(1, t.s)
            beta = beta[:i] + (rng.randint(0, 1),) + beta[i + 1:]
        mus = tuple(rng.choice(positive) for _ in range(4))
        # sum codim T + sum codim mu = -K.beta + r + n, i.e. excess(T) = -K.beta + r - sum mu
        excess = vdim(t, beta, 0) + 3 - sum(t.codims[m] for m in mus)
        if excess < 0:
            continue
        T = _random_classes(rng, t, excess, nondivisor, max_n=8)
        if T is None:
            continue
        return beta, T, mus
    raise RuntimeError("could not sample a balanced relation")


def residual(eng, beta, T, mus):
    rel = build_relation(eng.t, tuple(beta), tuple(T), *mus)
    return evaluate(rel, eng.value), len(rel)


def residual_suite(eng, samples, seed, dmax=3):
    """Evaluate random splitting-axiom relations with engine values; all must vanish."""
    from .engine import run_deep

    t = eng.t
    rep = Report(f"residual[{t.name}]")
    t0 = time.perf_counter()
    rng = random.Random(seed)
    biggest = 0
    for _ in range(samples):
        beta, T, mus = sample_relation(rng, t, dmax)
        res, size = run_deep(residual, eng, beta, T, mus)
        biggest = max(biggest, size)
        rep.checked += 1
        if res != 0:
            names = [t.basis[m].name for m in mus]
            rep.failures.append(f"{_show(t, beta, T)} mu={names}: residual {res}")
    rep.notes["max_terms"] = biggest
    rep.seconds = time.perf_counter() - t0
    return rep


# ---------------------------------------------------------------------------
# symmetry and divisor axiom

def permutation_suite(eng, samples, seed, dmax=4):
    """Swapping two blown-up points (classes and curve class together) fixes the value."""
    t = eng.t
    rep = Report(f"permutation[{t.name}]")
    t0 = time.perf_counter()
    rng = random.Random(seed)
    for beta, cl in sample_keys(t, samples, seed, dmax):
        i, j = rng.sample(range(1, t.s + 1), 2)
        perm = {i: j, j: i}
        b2 = list(beta)
        b2[i], b2[j] = beta[j], beta[i]
        cl2 = []
        for k in cl:
            exc = t.basis[k].exc
            cl2.append(t.index[f"E{perm.get(exc[0], exc[0])}.{exc[1]}"] if exc else k)
        rep.checked += 1
        a, b = eng.gw_classes(beta, cl), eng.gw_classes(tuple(b2), tuple(cl2))
        if a != b:
            rep.failures.append(f"{_show(t, beta, cl)} = {a} but swapped = {b}")
    rep.seconds = time.perf_counter() - t0
    return rep


def divisor_suite(eng, samples, seed, dmax=4):
    """GW(beta, D, T) = (D.beta) GW(beta, T) for each divisor basis class D."""
    t = eng.t
    rep = Report(f"divisor[{t.name}]")
    t0 = time.perf_counter()
    rng = random.Random(seed)
    for beta, cl in sample_keys(t, samples, seed, dmax):
        D = rng.choice(t.divisors)
        with_d = eng.gw(beta, [t.basis[k].name for k in cl + (D,)])
        pairing = sum(p * x for p, x in zip(t.div_pairing[D], beta))
        rep.checked += 1
        if with_d != pairing * eng.gw_classes(beta, cl):
            rep.failures.append(f"{_show(t, beta, cl)} with {t.basis[D].name}")
    rep.seconds = time.perf_counter() - t0
    return rep


def _show(t, beta, classes):
    names = ",".join(t.basis[k].name for k in classes) or "-"
    return f"GW[{t.name}]({format_curve_class(beta)}; {names})"


__all__ = ["Report", "parse_table_tsv", "load_fixture", "regress_tables", "check_vanishing",
           "check_ptexc", "vanishing_suite", "ptexc_suite", "residual_suite", "residual",
           "permutation_suite", "divisor_suite", "sample_keys", "sample_relation", "TABLE_IDS",
           "GWKey", "normalize"]
