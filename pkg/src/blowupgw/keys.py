"""Canonical invariant keys and the axioms used to reach them."""

from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple

from .homology import anticanonical_degree, is_candidate

ZERO = Fraction(0)
ONE = Fraction(1)


class GWKey(NamedTuple):
    target: str
    beta: tuple
    classes: tuple  # sorted basis indices, all of codimension >= 2


def _cached(t, name, beta, fn):
    cache = t.__dict__.setdefault(name, {})
    try:
        return cache[beta]
    except KeyError:
        v = cache[beta] = fn(t, beta)
        return v


def _base_dim(t, beta):
    return int(anticanonical_degree(t, beta)) + t.dim - 3


def _div_factors(t, beta):
    return {k: sum(p * x for p, x in zip(t.div_pairing[k], beta)) for k in t.divisors}


def normalize(t, beta, classes):
    """Reduce GW_beta(classes) to ``factor * GW(key)``.

    Returns ``(factor, key)``; when the invariant is determined outright the
    key is None and ``factor`` is its value. Applies, in this order: mapping to
    a point, the fundamental class axiom, the dimension constraint, the
    divisor axiom and the effectivity filter.
    """
    if not any(beta):
        if len(classes) != 3:
            return ZERO, None
        a, b, c = classes
        if t.codims[a] + t.codims[b] + t.codims[c] != t.dim:
            return ZERO, None
        total = ZERO
        for k, x in t.products[a][b].items():
            total += x * t.products[k][c].get(t.point, 0)
        return total, None
    codims = t.codims
    total = 0
    factor = 1
    rest = []
    divf = None
    for k in classes:
        c = codims[k]
        if c == 0:
            return ZERO, None
        total += c
        if c == 1:
            if divf is None:
                divf = _cached(t, "_divf_cache", beta, _div_factors)
            f = divf[k]
            if not f:
                return ZERO, None
            factor *= f
        else:
            rest.append(k)
    if total != _cached(t, "_dim_cache", beta, _base_dim) + len(classes):
        return ZERO, None
    if not _cached(t, "_cand_cache", beta, is_candidate):
        return ZERO, None
    rest.sort()
    return Fraction(factor), GWKey(t.name, beta, tuple(rest))


def weight(t, classes, i):
    """Sum of (k-1) over the classes E_i^k in ``classes``."""
    w = 0
    for k in classes:
        exc = t.basis[k].exc
        if exc and exc[0] == i:
            w += exc[1] - 1
    return w


def vanishing_certificate(t, beta, classes):
    """Return a point index certifying GW_beta(classes) = 0, or None.

    Only meaningful on blow-ups of P^r at points.
    """
    if not t.is_point_blowup or beta[0] == 0:
        return None
    r = t.dim
    for i in range(1, t.s + 1):
        w = weight(t, classes, i)
        e = beta[i]
        if (w > 0 or e > 0) and w < (e + 1) * (r - 1):
            return i
    return None
