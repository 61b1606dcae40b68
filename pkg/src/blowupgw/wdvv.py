"""Instantiated splitting-axiom relations and solving them for one unknown.

A relation is stored fully materialized: a map from ``(key1, key2)`` to a
rational coefficient, where ``key2`` is None for single-invariant terms and
both keys are canonical :class:`~blowupgw.keys.GWKey` s. Identical invariants
are merged at build time, so an unknown that occurs in several slots ends up
with one accumulated coefficient.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import comb

from .homology import anticanonical_degree, enumerate_splits
from .keys import GWKey, normalize


class RelationError(ValueError):
    pass


class ZeroCoefficientError(RelationError):
    """The unknown does not occur with nonzero coefficient."""


class CycleError(RuntimeError):
    """The recursion asked for a value that is still being computed."""


def distribute(T):
    """All ways to split the multiset T onto two factors.

    ``T`` is a sorted tuple of basis indices. Returns a list of
    ``(T1, T2, multiplicity)`` where multiplicity counts the distributions of
    labelled marked points that collapse to this multiset split.
    """
    counts = sorted(Counter(T).items())
    out = []
    for parts in product(*(range(m + 1) for _, m in counts)):
        t1, t2, mult = [], [], 1
        for (k, m), m1 in zip(counts, parts):
            t1.extend([k] * m1)
            t2.extend([k] * (m - m1))
            mult *= comb(m, m1)
        out.append((tuple(t1), tuple(t2), mult))
    return out


@dataclass
class Relation:
    terms: dict = field(default_factory=dict)
    constant: Fraction = Fraction(0)
    provenance: tuple = ()

    def add(self, coeff, k1, k2=None):
        if not coeff:
            return
        if k1 is None and k2 is None:
            self.constant += coeff
            return
        if k1 is None:
            k1, k2 = k2, None
        elif k2 is not None and k2 < k1:
            k1, k2 = k2, k1
        key = (k1, k2)
        c = self.terms.get(key, 0) + coeff
        if c:
            self.terms[key] = c
        else:
            self.terms.pop(key, None)

    def keys(self):
        seen = set()
        for k1, k2 in self.terms:
            seen.add(k1)
            if k2 is not None:
                seen.add(k2)
        return seen

    def __len__(self):
        return len(self.terms)


def build_relation(t, beta, T, mu1, mu2, mu3, mu4):
    """The splitting-axiom relation for (beta, T | mu1, mu2 | mu3, mu4).

    ``T`` is a tuple of basis indices and the mu's are basis indices.
    """
    T = tuple(sorted(T))
    codims = t.codims
    r = t.dim
    lhs = sum(codims[k] for k in T) + sum(codims[m] for m in (mu1, mu2, mu3, mu4))
    rhs = anticanonical_degree(t, beta) + r + len(T)
    if lhs != rhs:
        raise RelationError(f"unbalanced relation: codimensions sum to {lhs}, need {rhs}")

    rel = Relation(provenance=(beta, T, (mu1, mu2, mu3, mu4)))
    products = t.products
    for (a, b, c, d), sign in (((mu1, mu2, mu3, mu4), 1), ((mu3, mu4, mu1, mu2), 1),
                               ((mu1, mu3, mu2, mu4), -1), ((mu2, mu4, mu1, mu3), -1)):
        for k, x in products[c][d].items():
            f, key = normalize(t, beta, T + (a, b, k))
            if f:
                rel.add(sign * x * f, key)

    # per distribution and side: the fixed classes of both factors split
    # into divisors and sorted non-divisor classes (independent of the split)
    sides = (((mu1, mu2), (mu3, mu4), 1), ((mu1, mu3), (mu2, mu4), -1))
    plans = []
    for T1, T2, mult in distribute(T):
        c1 = sum(codims[k] for k in T1)
        for (x1, x2), (x3, x4), sign in sides:
            left, right = _split_divisors(codims, T1 + (x1, x2)), _split_divisors(codims, T2 + (x3, x4))
            if left is None or right is None:
                continue
            plans.append((len(T1) - c1 - codims[x1] - codims[x2], sign * mult, left, right))
    by_codim = t.by_codim
    ginv = _int_ginv(t)
    name = t.name
    for beta1, beta2 in enumerate_splits(t, beta):
        base1 = int(anticanonical_degree(t, beta1)) + r
        div1, div2 = _div_factors(t, beta1), _div_factors(t, beta2)
        for shift, sm, (d1, rest1), (d2, rest2) in plans:
            # the dimension constraint holds on both sides by the choice of
            # ci, and both classes are candidates: only the divisor axiom and
            # the fundamental class remain
            ci = base1 + shift
            cj = r - ci
            if ci <= 0 or cj <= 0:
                continue
            coeff = sm
            for k in d1:
                coeff *= div1[k]
            if not coeff:
                continue
            for k in d2:
                coeff *= div2[k]
            if not coeff:
                continue
            for i in by_codim[ci]:
                if ci == 1:
                    g1 = div1[i]
                    if not g1:
                        continue
                    k1 = GWKey(name, beta1, rest1)
                else:
                    g1 = 1
                    k1 = GWKey(name, beta1, _insert(rest1, i))
                for j, gij in ginv[i]:
                    if cj == 1:
                        g2 = div2[j]
                        if not g2:
                            continue
                        k2 = GWKey(name, beta2, rest2)
                    else:
                        g2 = 1
                        k2 = GWKey(name, beta2, _insert(rest2, j))
                    rel.add(coeff * gij * g1 * g2, k1, k2)
    return rel


def _as_int(x):
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else x


def _int_ginv(t):
    g = t.__dict__.get("_ginv_int")
    if g is None:
        g = t.__dict__["_ginv_int"] = [[(j, _as_int(x)) for j, x in row]
                                        for row in t.ginv_nonzero]
    return g


def _div_factors(t, beta):
    cache = t.__dict__.setdefault("_divint_cache", {})
    f = cache.get(beta)
    if f is None:
        f = cache[beta] = {k: _as_int(sum(p * x for p, x in zip(t.div_pairing[k], beta)))
                           for k in t.divisors}
    return f


def _split_divisors(codims, classes):
    """(divisor classes, sorted other classes), or None with a fundamental class."""
    divs, rest = [], []
    for k in classes:
        c = codims[k]
        if c == 0:
            return None
        (divs if c == 1 else rest).append(k)
    return tuple(divs), tuple(sorted(rest))


def _insert(rest, i):
    return tuple(sorted(rest + (i,)))


def _cost(key):
    return (key.beta[0], len(key.classes))


def evaluate(rel, oracle):
    """Value of the relation with every invariant supplied by ``oracle``."""
    total = rel.constant
    for (k1, k2), c in rel.terms.items():
        if k2 is None:
            total += c * oracle(k1)
        else:
            total += c * oracle(k1) * oracle(k2)
    return total


def solve_for(rel, target, oracle):
    """Solve ``rel`` for the invariant ``target``.

    Co-factors of the target are evaluated first and accumulate into its
    coefficient; in other product terms the cheaper factor is evaluated first
    and the other one is skipped when it vanishes.
    """
    coeff = Fraction(0)
    rest = rel.constant
    found = False
    for (k1, k2), c in rel.terms.items():
        if k2 is None:
            if k1 == target:
                coeff += c
                found = True
            else:
                rest += c * oracle(k1)
            continue
        if k1 == target and k2 == target:
            raise RelationError("unknown occurs quadratically")
        if k1 == target or k2 == target:
            found = True
            coeff += c * oracle(k2 if k1 == target else k1)
            continue
        first, second = (k1, k2) if _cost(k1) <= _cost(k2) else (k2, k1)
        v = oracle(first)
        if v:
            rest += c * v * oracle(second)
    if not coeff:
        where = "does not occur" if not found else "has zero coefficient"
        raise ZeroCoefficientError(f"unknown {target} {where} in relation {rel.provenance}")
    return -rest / coeff
