"""Graded cohomology rings with exact rational coefficients.

A target is described by a :class:`TargetData`: an ordered homogeneous basis
(fundamental class first, point class last), a dense product table over basis
pairs, the Poincare pairing and its inverse, the canonical divisor and the
pairing of divisors against a basis of curve classes.

Two constructors are provided: :func:`build_blowup_point_ring` for projective
space blown up at points, and :func:`parse_ring_file` for user supplied rings
(see ``data/*.ring`` for the format).
"""

from __future__ import annotations

import ast
import hashlib
import operator
import re
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from itertools import product as iproduct


class RingError(ValueError):
    """Raised for malformed or inconsistent ring descriptions."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


@dataclass(frozen=True)
class BasisClass:
    index: int
    name: str
    codim: int
    # (i, k) for the class E_i^k of a blown-up point, None otherwise
    exc: tuple | None = None

    @property
    def exceptional(self):
        return self.exc is not None


class CohClass:
    """Sparse rational linear combination of basis classes."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=None):
        self.coeffs = {}
        for k, v in (coeffs or {}).items():
            v = Fraction(v)
            if v:
                self.coeffs[k] = v

    @classmethod
    def basis(cls, index, coeff=1):
        return cls({index: coeff})

    def __add__(self, other):
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) + v
        return CohClass(out)

    def __neg__(self):
        return CohClass({k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, scalar):
        return CohClass({k: scalar * v for k, v in self.coeffs.items()})

    def __eq__(self, other):
        return isinstance(other, CohClass) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def __bool__(self):
        return bool(self.coeffs)

    def __repr__(self):
        return f"CohClass({self.coeffs!r})"

    def items(self):
        return self.coeffs.items()

    def coefficient(self, index):
        return self.coeffs.get(index, Fraction(0))

    def homogeneous_part(self, t, codim):
        return CohClass({k: v for k, v in self.coeffs.items()
                         if t.basis[k].codim == codim})

    def format(self, t):
        if not self.coeffs:
            return "0"
        parts = []
        for k in sorted(self.coeffs):
            parts.append(f"{format_rational(self.coeffs[k])}*{t.basis[k].name}")
        return " + ".join(parts)


def format_rational(q):
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(eq=False)
class TargetData:
    """Everything the engine needs to know about a target variety.

    ``products[a][b]`` is a dict ``{index: Fraction}``. ``div_pairing`` maps
    the index of each codimension-1 basis class to its integer pairing with
    the curve basis generators. Instances are treated as immutable.
    """

    name: str
    dim: int
    s: int
    basis: list
    products: list
    g: list
    ginv: list
    canonical: CohClass
    curve_basis: list
    div_pairing: dict
    strategy: str
    seeds: dict = field(default_factory=dict)
    subdegree: int | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.index = {b.name: b.index for b in self.basis}
        self.codims = [b.codim for b in self.basis]
        self.by_codim = [[b.index for b in self.basis if b.codim == c]
                         for c in range(self.dim + 1)]
        self.divisors = tuple(self.by_codim[1])
        self.point = len(self.basis) - 1
        self.ginv_nonzero = [[(j, self.ginv[i][j]) for j in range(len(self.basis))
                              if self.ginv[i][j]] for i in range(len(self.basis))]
        # -K . beta is linear in beta
        self.anticanonical = tuple(
            -sum((c * self.div_pairing[k][j] for k, c in self.canonical.items()),
                 Fraction(0))
            for j in range(len(self.curve_basis)))

    @property
    def is_point_blowup(self):
        return self.strategy in ("projective", "point-blowup")

    def cls(self, name):
        try:
            return CohClass.basis(self.index[name])
        except KeyError:
            raise RingError(f"unknown class {name!r} for target {self.name}") from None

    def product(self, a, b):
        return product(self, a, b)

    def basis_hash(self):
        h = hashlib.sha256()
        h.update(f"{self.name}|{self.dim}|{self.s}|".encode())
        for b in self.basis:
            h.update(f"{b.name}:{b.codim};".encode())
        for a, b in iproduct(range(len(self.basis)), repeat=2):
            items = sorted(self.products[a][b].items())
            h.update(f"{a},{b}={items};".encode())
        return h.hexdigest()[:16]


def product(t, a, b):
    """Product of two classes, by bilinear extension of the basis table."""
    out = {}
    for i, x in a.items():
        row = t.products[i]
        for j, y in b.items():
            for k, z in row[j].items():
                out[k] = out.get(k, 0) + x * y * z
    return CohClass(out)


def triple_product(t, a, b, c):
    """Degree of a.b.c, i.e. the coefficient of the point class."""
    return product(t, product(t, a, b), c).coefficient(t.point)


def _pairing(basis, products, r):
    n = len(basis)
    pt = n - 1
    g = [[Fraction(0)] * n for _ in range(n)]
    for a in range(n):
        for b in range(n):
            if basis[a].codim + basis[b].codim == r:
                g[a][b] = Fraction(products[a][b].get(pt, 0))
    return g


def _invert(g):
    import sympy

    m = sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in row]
                      for row in g])
    if m.det() == 0:
        raise RingError("intersection pairing is singular")
    inv = m.inv()
    return [[Fraction(int(inv[i, j].p), int(inv[i, j].q)) for j in range(m.cols)]
            for i in range(m.rows)]


def target_name(r, s):
    return f"P{r}" if s == 0 else f"P{r}({s})"


def build_blowup_point_ring(r, s):
    """Cohomology of projective r-space blown up at s general points.

    The basis is ordered by codimension; within codimension k (0 < k < r) it
    lists H^k followed by E_1^k, ..., E_s^k.
    """
    if r < 2 or s < 0:
        raise ValueError("need r >= 2 and s >= 0")
    basis = [BasisClass(0, "one", 0)]
    hpow = {0: 0}
    epow = {}
    for k in range(1, r):
        hpow[k] = len(basis)
        basis.append(BasisClass(len(basis), "H" if k == 1 else f"H{k}", k))
        for i in range(1, s + 1):
            epow[i, k] = len(basis)
            basis.append(BasisClass(len(basis), f"E{i}.{k}", k, (i, k)))
    pt = len(basis)
    hpow[r] = pt
    basis.append(BasisClass(pt, "pt", r))
    n = len(basis)

    def kind(idx):
        b = basis[idx]
        if b.exc:
            return "E", b.exc[0], b.exc[1]
        return "H", 0, b.codim

    products = [[{} for _ in range(n)] for _ in range(n)]
    for a in range(n):
        for b in range(n):
            ka, kb = kind(a), kind(b)
            if ka[0] == "H" and kb[0] == "H":
                c = ka[2] + kb[2]
                if c <= r:
                    products[a][b] = {hpow[c]: Fraction(1)}
            elif ka[0] == "E" and kb[0] == "E":
                if ka[1] != kb[1]:
                    continue
                c = ka[2] + kb[2]
                if c < r:
                    products[a][b] = {epow[ka[1], c]: Fraction(1)}
                elif c == r:
                    products[a][b] = {pt: Fraction((-1) ** (r - 1))}
            else:
                # pullbacks kill exceptional classes except for the unit
                h, e = (ka, b) if ka[0] == "H" else (kb, a)
                if h[2] == 0:
                    products[a][b] = {e: Fraction(1)}

    g = _pairing(basis, products, r)
    canonical = CohClass({hpow[1]: -(r + 1),
                          **{epow[i, 1]: r - 1 for i in range(1, s + 1)}})
    div_pairing = {hpow[1]: (1,) + (0,) * s}
    for i in range(1, s + 1):
        div_pairing[epow[i, 1]] = tuple(-1 if j == i else 0 for j in range(s + 1))
    curve_basis = ["H'"] + [f"E{i}'" for i in range(1, s + 1)]
    return TargetData(
        name=target_name(r, s), dim=r, s=s, basis=basis, products=products,
        g=g, ginv=_invert(g), canonical=canonical, curve_basis=curve_basis,
        div_pairing=div_pairing,
        strategy="projective" if s == 0 else "point-blowup",
    )


# ---------------------------------------------------------------------------
# ring files

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.FloorDiv: operator.floordiv,
           ast.Pow: operator.pow, ast.Mod: operator.mod}


def eval_template(expr, params):
    """Evaluate an arithmetic expression over named rational parameters."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return Fraction(node.value)
        if isinstance(node, ast.Name):
            if node.id not in params:
                raise RingError(f"unbound template parameter {node.id!r}")
            return Fraction(params[node.id])
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return Fraction(_BINOPS[type(node.op)](ev(node.left), ev(node.right)))
        raise RingError(f"unsupported template expression {expr!r}")

    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError:
        raise RingError(f"bad template expression {expr!r}") from None
    return ev(tree)


_COEFF = r"(?:\{[^}]*\}|\d+(?:/\d+)?)"
_TERM = re.compile(r"\s*([+-])?\s*(?:(" + _COEFF + r")\s*\*\s*)?([A-Za-z_][\w.]*)\s*")
_AMBIENT = re.compile(r"^(one|H\d*|pt)$")


def _parse_scalar(tok, params, lineno):
    tok = tok.strip()
    try:
        if tok.startswith("{") and tok.endswith("}"):
            return eval_template(tok[1:-1], params)
        return Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise RingError(f"bad number {tok!r}", lineno) from None
    except RingError as exc:
        raise RingError(str(exc), lineno) from None


def _parse_combination(text, index, params, lineno):
    text = text.strip()
    if text == "0":
        return {}
    out = {}
    pos = 0
    first = True
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m or m.end() == pos or (not first and not m.group(1)):
            raise RingError(f"cannot parse linear combination {text!r}", lineno)
        sign, coeff, name = m.groups()
        if name not in index:
            raise RingError(f"unknown class {name!r}", lineno)
        c = _parse_scalar(coeff, params, lineno) if coeff else Fraction(1)
        if sign == "-":
            c = -c
        out[index[name]] = out.get(index[name], 0) + c
        pos = m.end()
        first = False
    return {k: v for k, v in out.items() if v}


def parse_class_list(text, index):
    """Parse ``name[^m],...`` into a sorted tuple of basis indices."""
    text = text.strip()
    if text in ("", "-", "1"):
        return ()
    out = []
    for tok in text.split(","):
        name, _, mult = tok.strip().partition("^")
        if name not in index:
            raise RingError(f"unknown class {name!r}")
        out.extend([index[name]] * (int(mult) if mult else 1))
    return tuple(sorted(out))


def _ambient_power(name, r):
    if name == "one":
        return 0
    if name == "pt":
        return r
    return int(name[1:] or 1)


def parse_ring_file(text, params=None, name=None):
    """Build a :class:`TargetData` from the line-oriented ring format.

    Template coefficients ``{expr}`` are evaluated with ``params``; every
    parameter declared by a ``PARAM`` line must be supplied.
    """
    params = {k: Fraction(v) for k, v in (params or {}).items()}
    dim = None
    names, codims, exc_flags = [], [], []
    declared = {}
    canonical_text = None
    curve_basis = None
    pairs = {}
    seed_lines = []
    strategy = None
    subdegree = None
    target = name
    seen = set()

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        seen.add(head)
        if head == "NAME":
            target = target or rest
        elif head == "PARAM":
            for p in rest.split():
                if p not in params:
                    raise RingError(f"missing value for parameter {p!r}", lineno)
        elif head == "DIM":
            try:
                dim = int(rest)
            except ValueError:
                raise RingError(f"bad dimension {rest!r}", lineno) from None
        elif head == "BASIS":
            toks = rest.split()
            if len(toks) not in (2, 3):
                raise RingError("BASIS needs a name and a codimension", lineno)
            if toks[0] in names:
                raise RingError(f"duplicate basis class {toks[0]!r}", lineno)
            names.append(toks[0])
            try:
                codims.append(int(toks[1]))
            except ValueError:
                raise RingError(f"bad codimension {toks[1]!r}", lineno) from None
            exc_flags.append(len(toks) == 3 and toks[2] == "exceptional")
        elif head == "PRODUCT":
            lhs, eq, rhs = rest.partition("=")
            ab = lhs.split()
            if not eq or len(ab) != 2:
                raise RingError("PRODUCT needs the form 'a b = ...'", lineno)
            declared[tuple(ab)] = (rhs, lineno)
        elif head == "CANONICAL":
            canonical_text = (rest.lstrip("= ").strip(), lineno)
        elif head == "CURVEBASIS":
            curve_basis = rest.split()
        elif head == "PAIR":
            lhs, eq, rhs = rest.partition("=")
            dc = lhs.split()
            if not eq or len(dc) != 2:
                raise RingError("PAIR needs the form 'D C = n'", lineno)
            val = _parse_scalar(rhs, params, lineno)
            if val.denominator != 1:
                raise RingError("divisor-curve pairings must be integers", lineno)
            pairs[tuple(dc)] = int(val)
        elif head == "SEED":
            seed_lines.append((rest, lineno))
        elif head == "STRATEGY":
            strategy = rest
        elif head == "SUBDEGREE":
            val = _parse_scalar(rest, params, lineno)
            subdegree = int(val)
        else:
            raise RingError(f"unknown directive {head!r}", lineno)

    for required in ("DIM", "BASIS", "PRODUCT", "CANONICAL", "CURVEBASIS", "PAIR"):
        if required not in seen:
            raise RingError(f"missing {required} section")
    r = dim
    if names[0] != "one" or codims[0] != 0:
        raise RingError("first basis class must be 'one 0'")
    if names[-1] != "pt" or codims[-1] != r:
        raise RingError(f"last basis class must be 'pt {r}'")
    if any(b < a for a, b in zip(codims, codims[1:])):
        raise RingError("basis must be sorted by codimension")
    if codims.count(0) != 1 or codims.count(r) != 1:
        raise RingError("exactly one class of codimension 0 and of codimension r")

    basis = [BasisClass(i, n, c, (1, c) if x else None)
             for i, (n, c, x) in enumerate(zip(names, codims, exc_flags))]
    index = {b.name: b.index for b in basis}
    n = len(basis)
    products = [[None] * n for _ in range(n)]
    for (a, b), (rhs, lineno) in declared.items():
        for nm in (a, b):
            if nm not in index:
                raise RingError(f"unknown class {nm!r}", lineno)
        ia, ib = index[a], index[b]
        val = _parse_combination(rhs, index, params, lineno)
        for k in val:
            if codims[k] != codims[ia] + codims[ib]:
                raise RingError(f"product {a}*{b} is not homogeneous of the right codimension",
                                lineno)
        for x, y in ((ia, ib), (ib, ia)):
            if products[x][y] is not None and products[x][y] != val:
                raise RingError(f"product {a}*{b} declared inconsistently (not symmetric)",
                                lineno)
            products[x][y] = val
    ambient_h = {}
    for b in basis:
        if _AMBIENT.match(b.name):
            ambient_h[_ambient_power(b.name, r)] = b.index
    for a in range(n):
        for b in range(n):
            if products[a][b] is not None:
                continue
            if a == 0 or b == 0:
                products[a][b] = {b if a == 0 else a: Fraction(1)}
            elif _AMBIENT.match(basis[a].name) and _AMBIENT.match(basis[b].name):
                c = _ambient_power(basis[a].name, r) + _ambient_power(basis[b].name, r)
                if c <= r:
                    if c not in ambient_h:
                        raise RingError(f"ambient class of codimension {c} missing")
                    products[a][b] = {ambient_h[c]: Fraction(1)}
                else:
                    products[a][b] = {}
            else:
                products[a][b] = {}

    _check_associative(basis, products)
    g = _pairing(basis, products, r)
    ginv = _invert(g)

    canonical = CohClass(_parse_combination(canonical_text[0], index, params,
                                            canonical_text[1]))
    if any(codims[k] != 1 for k in canonical.coeffs):
        raise RingError("canonical divisor must have codimension 1")
    div_pairing = {}
    for b in basis:
        if b.codim == 1:
            div_pairing[b.index] = tuple(pairs.get((b.name, c), 0) for c in curve_basis)
    for (d, c) in pairs:
        if d not in index or index[d] not in div_pairing or c not in curve_basis:
            raise RingError(f"bad PAIR {d} {c}")

    t = TargetData(
        name=target or "custom", dim=r, s=0, basis=basis, products=products,
        g=g, ginv=ginv, canonical=canonical, curve_basis=curve_basis,
        div_pairing=div_pairing, strategy=strategy or "", subdegree=subdegree,
        params=dict(params),
    )
    for rest, lineno in seed_lines:
        beta, classes, value = _parse_seed(rest, t, params, lineno)
        t.seeds[beta, classes] = value
    return t


def _parse_seed(rest, t, params, lineno):
    fields = dict(tok.split("=", 1) for tok in rest.split())
    try:
        beta = tuple(int(x) for x in fields["beta"].split(","))
        classes = parse_class_list(fields.get("classes", ""), t.index)
        value = _parse_scalar(fields["value"], params, lineno)
    except (KeyError, ValueError) as exc:
        raise RingError(f"bad SEED line ({exc})", lineno) from None
    if len(beta) != len(t.curve_basis):
        raise RingError("seed curve class has the wrong length", lineno)
    if any(t.codims[k] < 2 for k in classes):
        raise RingError("seed classes must be non-divisorial", lineno)
    return beta, classes, value


def _check_associative(basis, products):
    n = len(basis)

    def mul(x, j):
        out = {}
        for i, c in x.items():
            for k, z in products[i][j].items():
                out[k] = out.get(k, 0) + c * z
        return {k: v for k, v in out.items() if v}

    for a in range(n):
        for b in range(n):
            ab = products[a][b]
            for c in range(n):
                left = mul(ab, c)
                bc = products[b][c]
                right = {}
                for i, z in bc.items():
                    for k, w in products[a][i].items():
                        right[k] = right.get(k, 0) + z * w
                right = {k: v for k, v in right.items() if v}
                if left != right:
                    raise RingError(
                        f"product table is not associative on "
                        f"({basis[a].name}, {basis[b].name}, {basis[c].name})")


def load_bundled_ring(name, **params):
    """Load one of the ring files shipped with the package."""
    text = resources.files("blowupgw.data").joinpath(f"{name}.ring").read_text()
    if params:
        label = ",".join(f"{k}={params[k]}" for k in sorted(params))
        return parse_ring_file(text, params, name=f"{name}({label})")
    return parse_ring_file(text, params)


def curve_secant_ring(d, g):
    return load_bundled_ring("curvesec", d=d, g=g)


def abelian_surface_ring():
    return load_bundled_ring("surfsec")
