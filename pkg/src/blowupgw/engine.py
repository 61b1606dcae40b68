"""The memoized recursion computing genus-zero invariants.

Every invariant is reduced by :func:`~blowupgw.keys.normalize` to a canonical
:class:`~blowupgw.keys.GWKey` without divisor insertions. A key is then
computed by one of

* the reconstruction on P^r (degree and number of classes go down),
* the recursion for purely exceptional classes d E'_i,
* reduction to P^r when neither the class nor the insertions see the
  blown-up points,
* the three-case algorithm for point blow-ups, or
* the scripted strategies shipped with the curve and surface rings.

Each unknown is solved from one splitting-axiom relation.
"""

from __future__ import annotations

import os
import sys
import threading
from collections import Counter
from fractions import Fraction
from typing import NamedTuple

from .homology import format_curve_class
from .keys import ONE, ZERO, GWKey, normalize, vanishing_certificate
from .ring import CohClass, RingError, build_blowup_point_ring, format_rational
from .wdvv import CycleError, build_relation, solve_for

STACK_SIZE = 512 * 1024 * 1024
RECURSION_LIMIT = 200000


class UnsupportedStrategy(RuntimeError):
    pass


class UnsupportedKey(UnsupportedStrategy):
    pass


class CacheError(RuntimeError):
    pass


class OrderRank(NamedTuple):
    d: int
    v: int
    e: int


def run_deep(fn, *args):
    """Call ``fn(*args)`` on a thread with a large stack.

    The recursion depth grows with the degree, and CPython recursion lives on
    the C stack.
    """
    result, error = [], []

    def target():
        try:
            result.append(fn(*args))
        except BaseException as exc:  # re-raised in the caller
            error.append(exc)

    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, RECURSION_LIMIT))
    old_size = threading.stack_size()
    threading.stack_size(STACK_SIZE)
    try:
        th = threading.Thread(target=target, name="gw-recursion")
        th.start()
    finally:
        threading.stack_size(old_size)
    th.join()
    if error:
        raise error[0]
    return result[0]


# ---------------------------------------------------------------------------
# memo store and its file format

class MemoStore:
    """Map from keys to exact values; values are written once and never change."""

    def __init__(self):
        self._data = {}
        self._lock = threading.Lock()

    def get(self, key):
        return self._data.get(key)

    def __contains__(self, key):
        return key in self._data

    def __len__(self):
        return len(self._data)

    def put(self, key, value):
        with self._lock:
            old = self._data.get(key)
            if old is None:
                self._data[key] = value
            elif old != value:
                raise CacheError(f"conflicting values for {key}: {old} and {value}")

    def keys_for(self, target):
        return sorted(k for k in list(self._data) if k.target == target)


def cache_filename(target):
    return f"{target}.gwcache"


def format_record(t, key, value):
    counts = sorted(Counter(key.classes).items())
    cls = ",".join(f"{k}^{m}" for k, m in counts)
    v = Fraction(value)
    return f"V1|{t.dim} {t.s}|{format_curve_class(key.beta)}|{cls}|{v.numerator}/{v.denominator}"


def parse_record(t, line):
    parts = line.split("|")
    if len(parts) != 5 or parts[0] != "V1":
        raise CacheError(f"bad cache record {line!r}")
    if parts[1] != f"{t.dim} {t.s}":
        raise CacheError(f"cache record for another target: {line!r}")
    beta = tuple(int(x) for x in parts[2].split(","))
    classes = []
    if parts[3]:
        for tok in parts[3].split(","):
            k, m = tok.split("^")
            classes.extend([int(k)] * int(m))
    return GWKey(t.name, beta, tuple(classes)), Fraction(parts[4])


def dump_cache(t, memo, path):
    lines = [f"GWCACHE V1 {t.basis_hash()}"]
    lines += [format_record(t, k, memo.get(k)) for k in memo.keys_for(t.name)]
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(tmp, path)
    return len(lines) - 1


def load_cache(t, memo, path):
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if header[:2] != ["GWCACHE", "V1"] or len(header) != 3:
            raise CacheError(f"{path}: not a cache file")
        if header[2] != t.basis_hash():
            raise CacheError(f"{path}: written for a different ring")
        n = 0
        for line in fh:
            line = line.strip()
            if line:
                memo.put(*parse_record(t, line))
                n += 1
    return n


# ---------------------------------------------------------------------------

class Workspace:
    """Engines for several targets sharing one memo store and cache directory."""

    def __init__(self, cache_dir=None, use_vanishing=False):
        self.memo = MemoStore()
        self.cache_dir = cache_dir
        self.use_vanishing = use_vanishing
        self._engines = {}
        self._lock = threading.RLock()

    def engine(self, t):
        with self._lock:
            eng = self._engines.get(t.name)
            if eng is None:
                eng = Engine(t, self)
                self._engines[t.name] = eng
                if self.cache_dir:
                    path = os.path.join(self.cache_dir, cache_filename(t.name))
                    if os.path.exists(path):
                        load_cache(t, self.memo, path)
            return eng

    def point_blowup(self, r, s):
        from .ring import target_name

        with self._lock:
            eng = self._engines.get(target_name(r, s))
            if eng is not None:
                return eng
            return self.engine(build_blowup_point_ring(r, s))

    def engines(self):
        return [self._engines[k] for k in sorted(self._engines)]

    def save(self):
        if not self.cache_dir:
            return 0
        os.makedirs(self.cache_dir, exist_ok=True)
        n = 0
        for eng in self.engines():
            path = os.path.join(self.cache_dir, cache_filename(eng.t.name))
            n += dump_cache(eng.t, self.memo, path)
        return n


class Engine:
    def __init__(self, t, workspace=None):
        if t.strategy not in ("projective", "point-blowup", "curve-secant", "abelian-surface"):
            raise UnsupportedStrategy(f"target {t.name} has no usable recursion strategy "
                                      f"({t.strategy or 'none declared'})")
        self.t = t
        self.ws = workspace if workspace is not None else Workspace()
        self.ws._engines.setdefault(t.name, self)
        self.memo = self.ws.memo
        self._local = threading.local()
        self.trace = None  # set to a list to record (key, case, rank) steps
        t_ = t
        self._H = t_.index.get("H")

    # -- public entry points ------------------------------------------------

    def gw(self, beta, insertions=()):
        """GW_beta(insertions) for a list of classes (CohClass, name or index)."""
        beta = tuple(beta)
        if len(beta) != len(self.t.curve_basis):
            raise ValueError(f"curve class needs {len(self.t.curve_basis)} coefficients")
        cls = [self._as_class(x) for x in insertions]
        return run_deep(self._gw, beta, cls)

    def gw_classes(self, beta, classes):
        """GW_beta of basis indices."""
        return run_deep(self._eval, tuple(beta), tuple(classes))

    def _as_class(self, x):
        if isinstance(x, CohClass):
            return x
        if isinstance(x, str):
            return self.t.cls(x)
        return CohClass.basis(x)

    def _gw(self, beta, cls):
        terms = [((), Fraction(1))]
        for c in cls:
            terms = [(ks + (k,), f * x) for ks, f in terms for k, x in c.items()]
        total = ZERO
        for ks, f in terms:
            if f:
                total += f * self._eval(beta, ks)
        return total

    def _eval(self, beta, classes):
        f, key = normalize(self.t, beta, classes)
        if key is None or not f:
            return f
        return f * self.value(key)

    # -- memoized evaluation -----------------------------------------------------

    def value(self, key):
        v = self.memo.get(key)
        if v is not None:
            return v
        if key.target != self.t.name:
            return self.ws._engines[key.target].value(key)
        stack = getattr(self._local, "stack", None)
        if stack is None:
            stack = self._local.stack = set()
        if key in stack:
            raise CycleError(f"recursion re-entered {self.describe(key)}")
        stack.add(key)
        try:
            v = Fraction(self._compute(key))
        finally:
            stack.discard(key)
        self.memo.put(key, v)
        return v

    def _compute(self, key):
        t = self.t
        seed = t.seeds.get((key.beta, key.classes))
        if seed is not None:
            return seed
        if t.strategy == "curve-secant":
            return self.run_strategy_curve_secant(key)
        if t.strategy == "abelian-surface":
            return self.run_strategy_abelian(key)
        beta = key.beta
        if beta[0] == 0:
            return self.gw_purely_exceptional(key)
        if t.s == 0:
            return self.gw_projective(key)
        if self.ws.use_vanishing and vanishing_certificate(t, beta, key.classes) is not None:
            return ZERO
        if not any(beta[1:]) and all(t.basis[k].exc is None for k in key.classes):
            return self.induced_value(key)
        return self.blowup_step(key)

    def describe(self, key):
        names = ",".join(self.t.basis[k].name for k in key.classes) or "-"
        return f"GW[{key.target}]({format_curve_class(key.beta)}; {names})"

    # -- P^r ---------------------------------------------------------------------

    def _power(self, c, i=0):
        """Basis index of H^c (i = 0) or E_i^c."""
        t = self.t
        if i == 0:
            name = "one" if c == 0 else "pt" if c == t.dim else "H" if c == 1 else f"H{c}"
        else:
            name = f"E{i}.{c}"
        return t.index[name]

    def gw_projective(self, key):
        """Reconstruction on P^r: trade codimension between classes until one is H."""
        t = self.t
        d = key.beta[0]
        cl = sorted(key.classes, key=lambda k: (-t.codims[k], k))
        if len(cl) <= 2:
            return ONE if d == 1 and cl == [t.point, t.point] else ZERO
        x1, x2, xm = cl[0], cl[1], cl[-1]
        rest = tuple(cl[2:-1])
        c = t.codims[xm] - 1
        rel = build_relation(t, key.beta, rest, x1, x2, self._power(c), self._H)
        return solve_for(rel, key, self.value)

    def induced_value(self, key):
        """Invariant of P^r(s) that only sees P^r."""
        t = self.t
        base = self.ws.point_blowup(t.dim, 0)
        bk = GWKey(base.t.name, key.beta[:1],
                   tuple(sorted(base.t.index[t.basis[k].name] for k in key.classes)))
        return base.value(bk)

    # -- purely exceptional classes ---------------------------------------------

    def gw_purely_exceptional(self, key):
        t = self.t
        es = key.beta[1:]
        nz = [i for i, e in enumerate(es, 1) if e]
        if len(nz) != 1 or es[nz[0] - 1] < 0:
            return ZERO
        i = nz[0]
        for k in key.classes:
            exc = t.basis[k].exc
            if not exc or exc[0] != i:
                return ZERO
        r = t.dim
        top = self._power(r - 1, i)
        f, base = normalize(t, key.beta, (top, top))
        if base is not None and key == base:
            return 1 / f
        cl = sorted(key.classes, key=lambda k: (-t.codims[k], k))
        if len(cl) <= 2:
            return ZERO
        x1, x2, xm = cl[0], cl[1], cl[-1]
        rest = tuple(cl[2:-1])
        c = t.codims[xm] - 1
        rel = build_relation(t, key.beta, rest, x1, x2, self._power(c, i), self._power(1, i))
        return solve_for(rel, key, self.value)

    # -- the three-case algorithm -------------------------------------------------

    def _working(self, classes):
        """Non-exceptional classes by (codim desc, index), the pad count, exceptional ones."""
        t = self.t
        nonexc = sorted((k for k in classes if t.basis[k].exc is None),
                        key=lambda k: (-t.codims[k], k))
        exc = sorted(k for k in classes if t.basis[k].exc is not None)
        pads = max(0, t.dim + 1 - sum(t.codims[k] for k in nonexc))
        return nonexc, pads, exc

    def order_rank(self, beta, classes):
        t = self.t
        nonexc, pads, _ = self._working(classes)
        codims = [t.codims[k] for k in nonexc] + [1] * pads
        total, v = 0, 0
        for c in codims:
            total += c
            v += 1
            if total >= t.dim + 1:
                break
        return OrderRank(beta[0], v, sum(beta[1:]))

    def select_equation(self, beta, classes):
        """Return (case, beta', T', (mu1, mu2, mu3, mu4)) for the key's relation.

        Padding copies of H serve only as the two leading classes; the others
        would merely rescale the relation's target term.
        """
        t = self.t
        r = t.dim
        nonexc, pads, exc = self._working(classes)
        work = nonexc + [self._H] * pads
        j1, j2 = work[0], work[1]
        rest = tuple(nonexc[2:])
        if exc:
            x = exc[0]
            i, k = t.basis[x].exc
            others = list(exc)
            others.remove(x)
            return "A", beta, rest + tuple(others), (j1, j2, self._power(1, i), self._power(k - 1, i))
        nz = [i for i, e in enumerate(beta[1:], 1) if e]
        if not nz:
            raise RuntimeError(f"no exceptional direction for {format_curve_class(beta)}")
        i = nz[0]
        if j1 == t.point and t.codims[j2] >= 2:
            return "B", beta, rest, (self._H, self._power(r - 1), self._power(1, i), j2)
        beta2 = tuple(x + (1 if n == i else 0) for n, x in enumerate(beta))
        return "C", beta2, rest, (j1, j2, self._power(1, i), self._power(r - 1, i))

    def blowup_step(self, key):
        case, beta, T, mus = self.select_equation(key.beta, key.classes)
        if self.trace is not None:
            self.trace.append((key, case, self.order_rank(key.beta, key.classes)))
        rel = build_relation(self.t, beta, T, *mus)
        return solve_for(rel, key, self.value)

    # -- scripted strategies for file-defined rings -------------------------------

    def _line_class(self, key):
        a, b = key.beta
        if a == 0 or (a == 1 and b >= 0):
            return None
        if a != 1:
            raise UnsupportedKey(f"{self.describe(key)} is outside the reach of the "
                                 f"{self.t.strategy} recursion")
        return b

    def run_strategy_curve_secant(self, key):
        """Lines meeting a space curve: raise e one step at a time."""
        b = self._line_class(key)
        if b is None:
            return ZERO
        t = self.t
        H, E, F = t.index["H"], t.index["E"], t.index["F"]
        alpha = key.classes.count(F)
        beta = (1, b + 1)
        if alpha + b:
            rel = build_relation(t, beta, key.classes, H, H, E, E)
        else:
            T = list(key.classes)
            T.remove(F)
            rel = build_relation(t, beta, tuple(T), H, H, E, F)
        return solve_for(rel, key, self.value)

    def run_strategy_abelian(self, key):
        """Lines meeting a surface in P^4; same scheme with the class gamma."""
        b = self._line_class(key)
        if b is None:
            return ZERO
        t = self.t
        H, E, F, gamma = t.index["H"], t.index["E"], t.index["F"], t.index["gamma"]
        beta = (1, b + 1)
        T = list(key.classes)
        if F in T:
            T.remove(F)
            rel = build_relation(t, beta, tuple(T), H, H, E, F)
        elif gamma in T:
            T.remove(gamma)
            rel = build_relation(t, beta, tuple(T), H, H, gamma, E)
        else:
            rel = build_relation(t, beta, tuple(T), H, H, E, E)
        return solve_for(rel, key, self.value)


def format_value(v):
    return format_rational(v)


__all__ = ["Engine", "Workspace", "MemoStore", "OrderRank", "UnsupportedStrategy",
           "UnsupportedKey", "CacheError", "CycleError", "RingError", "run_deep"]
