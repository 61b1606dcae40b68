"""Curve classes, virtual dimensions and splittings of curve classes.

Curve classes are plain integer tuples over the target's curve basis: for a
blow-up of P^r at s points ``(d, e_1, ..., e_s)`` means d H' + sum e_i E'_i;
for the rings loaded from files ``(a, b)`` means a H' + b E'.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product
from math import ceil


def parse_curve_class(text, t=None):
    try:
        beta = tuple(int(x) for x in text.replace(" ", "").split(","))
    except ValueError:
        raise ValueError(f"bad curve class {text!r}") from None
    if t is not None and len(beta) != len(t.curve_basis):
        raise ValueError(f"curve class {text!r} needs {len(t.curve_basis)} coefficients")
    return beta


def format_curve_class(beta):
    return ",".join(str(x) for x in beta)


def anticanonical_degree(t, beta):
    return sum(c * x for c, x in zip(t.anticanonical, beta))


def vdim(t, beta, n):
    """Expected dimension of the space of n-pointed stable maps in class beta."""
    v = anticanonical_degree(t, beta) + t.dim + n - 3
    return int(v)


def divisor_pair(t, D, beta):
    """Intersection number of a divisor class with a curve class."""
    total = Fraction(0)
    for k, c in D.items():
        if t.codims[k] != 1:
            raise ValueError("divisor_pair needs a class of pure codimension 1")
        total += c * sum(p * x for p, x in zip(t.div_pairing[k], beta))
    return total


def pair_basis_divisor(t, k, beta):
    p = t.div_pairing[k]
    return sum(p[j] * beta[j] for j in range(len(beta)))


def _single_exceptional(rest):
    """True if ``rest`` is a positive multiple of a single unit vector."""
    nz = [x for x in rest if x]
    return len(nz) == 1 and nz[0] > 0


def is_candidate(t, beta):
    """Cheap over-approximation of effectivity; False means the invariant is 0.

    For point blow-ups the multiplicity at a point never exceeds the degree.
    For file-defined targets the bound uses the declared degree of the blown-up
    subvariety when present, plus the fact that a divisor-free invariant needs
    ``-K.beta + r - 3 >= 0``.
    """
    a, rest = beta[0], beta[1:]
    if a < 0:
        return False
    if a == 0:
        return all(x >= 0 for x in rest) and any(rest)
    if t.is_point_blowup:
        return all(x >= -a for x in rest)
    if t.subdegree is not None and any(x < -a * t.subdegree for x in rest):
        return False
    return anticanonical_degree(t, beta) + t.dim - 3 >= 0


def _custom_lower(t, a):
    """Smallest admissible exceptional coefficient for H'-degree a (two-generator case)."""
    if a == 0:
        return 1
    k0, k1 = t.anticanonical
    if k1 <= 0:
        raise ValueError(f"cannot bound curve classes of target {t.name}")
    low = ceil(Fraction(-(t.dim - 3) - k0 * a) / k1)
    if t.subdegree is not None:
        low = max(low, -a * t.subdegree)
    return low


def enumerate_splits(t, beta):
    """All ordered pairs (beta1, beta2) of nonzero candidate classes summing to beta.

    Parts with vanishing H'-degree are kept only if they are positive multiples
    of a single exceptional line class; all other such invariants vanish.
    """
    out = []
    d = beta[0]
    if d < 0:
        return out
    if t.is_point_blowup or len(beta) != 2:
        es = beta[1:]
        for d1 in range(d + 1):
            d2 = d - d1
            ranges = [range(-d1, e + d2 + 1) for e in es]
            for e1 in product(*ranges):
                e2 = tuple(e - x for e, x in zip(es, e1))
                if d1 == 0 and not _single_exceptional(e1):
                    continue
                if d2 == 0 and not _single_exceptional(e2):
                    continue
                b1, b2 = (d1,) + e1, (d2,) + e2
                if is_candidate(t, b1) and is_candidate(t, b2):
                    out.append((b1, b2))
        return out
    b = beta[1]
    for a1 in range(d + 1):
        a2 = d - a1
        lo = _custom_lower(t, a1)
        hi = b - _custom_lower(t, a2)
        for b1 in range(lo, hi + 1):
            b1c, b2c = (a1, b1), (a2, b - b1)
            if is_candidate(t, b1c) and is_candidate(t, b2c):
                out.append((b1c, b2c))
    return out
