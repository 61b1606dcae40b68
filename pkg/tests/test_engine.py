import os
from fractions import Fraction

import pytest

from blowupgw.engine import (CacheError, Engine, MemoStore, UnsupportedKey, UnsupportedStrategy,
                             Workspace, load_cache)
from blowupgw.keys import GWKey, normalize
from blowupgw.ring import (CohClass, abelian_surface_ring, build_blowup_point_ring,
                           curve_secant_ring, parse_ring_file)
from blowupgw.wdvv import CycleError, build_relation


def names(t, *items):
    out = []
    for item in items:
        name, _, m = item.partition("^")
        out += [t.index[name]] * int(m or 1)
    return tuple(out)


def test_spec_values(P):
    assert P(2, 1).gw((3, -2), ["pt"] * 6) == 1
    assert P(3, 2).gw((5, -2, -2), ["pt"] * 6) == 1
    # the table cell for (-2,-2), d=3 carries one point and one H^2
    assert P(4, 2).gw((3, -2, -2), ["pt", "H2"]) == Fraction(1, 4)
    assert P(4, 2).gw((5, -2, -2), ["pt"] * 4 + ["H2"] * 2) == Fraction(5, 4)


def test_projective(P):
    assert P(2).gw((4,), ["pt"] * 11) == 620
    assert P(3).gw((1,), ["pt"] * 2) == 1
    assert P(3).gw((2,), ["pt"] * 4) == 0
    assert P(2).gw((1,), ["H"] * 3 + ["pt"] * 2) == 1


def test_projective_lines_in_p4(P):
    # Schubert calculus on G(2,5): sigma_1^6 = 5, sigma_2^3 = 1, sigma_1^4 sigma_2 = 3
    P4 = P(4)
    assert P4.gw((1,), ["H2"] * 6) == 5
    assert P4.gw((1,), ["H3"] * 3) == 1
    assert P4.gw((1,), ["H2"] * 4 + ["H3"]) == 3


def test_normalize_examples(P):
    t = P(2).t
    f, key = normalize(t, (2,), (t.index["H"],) + (t.point,) * 5)
    assert f == 2 and key.classes == (t.point,) * 5
    assert P(2).gw((2,), ["H"] + ["pt"] * 5) == 2
    assert normalize(t, (1,), (0, t.point, t.point)) == (0, None)
    t = P(3, 2).t
    assert normalize(t, (3, -4, 0), (t.point,) * 2)[0] == 0
    # beta = 0 is the triple intersection
    assert normalize(t, (0, 0, 0), names(t, "E1.1", "E1.1", "E1.1")) == (1, None)


def test_purely_exceptional(P):
    eng = P(3, 1)
    assert eng.gw((0, 1), ["E1.2", "E1.2"]) == 1
    assert eng.gw((0, 1), ["E1.1", "E1.2", "E1.2"]) == -1
    assert P(3, 2).gw((0, 1, 1), ["E1.2", "E2.2"]) == 0
    assert P(2, 1).gw((0, 1), []) == 1
    assert P(2, 1).gw((0, 2), []) == 0
    assert P(3, 1).gw((0, 2), ["E1.2"] * 3) == 0


def test_induced_by_base(P):
    assert P(3, 2).gw((4, 0, 0), ["pt"] * 8) == P(3).gw((4,), ["pt"] * 8) == 4


def test_select_equation_cases(P):
    eng = P(4, 2)
    t = eng.t
    case, beta, T, mus = eng.select_equation((3, -1, -1), names(t, "pt", "pt", "E1.3"))
    assert case == "A" and mus[2:] == (t.index["E1.1"], t.index["E1.2"])
    eng = P(3, 1)
    assert eng.select_equation((4, -2), (eng.t.point,) * 6)[0] == "B"
    eng = P(2, 1)
    assert eng.select_equation((2, -1), (eng.t.point,) * 4)[0] == "B"
    eng = P(3, 1)
    assert eng.select_equation((2, -1), names(eng.t, "pt", "H2^4"))[0] == "B"
    case, beta, T, mus = eng.select_equation((2, -1), names(eng.t, "H2^6"))
    assert case == "C" and beta == (2, 0)


def test_order_rank(P):
    eng = P(3, 1)
    assert eng.order_rank((2, -2), (eng.t.point,) * 2) == (2, 2, -2)
    # two largest classes merge: v drops
    assert eng.order_rank((3, -1), names(eng.t, "H2^4")) == (3, 2, -1)
    assert eng.order_rank((3, -1), names(eng.t, "pt", "H2^2")) == (3, 2, -1)


def _is_base(eng, key):
    t = eng.t
    if key.beta[0] == 0:
        return True
    return not any(key.beta[1:]) and all(t.basis[k].exc is None for k in key.classes)


def _others(eng, key):
    """Non-base keys of the key's relation, skipping products with a known zero factor."""
    case, beta, T, mus = eng.select_equation(key.beta, key.classes)
    rel = build_relation(eng.t, beta, T, *mus)
    out = set()
    for pair in rel.terms:
        ks = [k for k in pair if k is not None]
        if any(_is_base(eng, k) and eng.value(k) == 0 for k in ks):
            continue
        out.update(k for k in ks if k != key and not _is_base(eng, k))
    return case, out


def _reduces(eng, key, bound, depth):
    """Every key needed for ``key`` is below ``bound``, allowing ``depth`` chained steps."""
    case, others = _others(eng, key)
    for k in others:
        if eng.order_rank(k.beta, k.classes) < bound:
            continue
        if depth == 0 or eng.select_equation(k.beta, k.classes)[0] not in "BC":
            return False
        if not _reduces(eng, k, bound, depth - 1):
            return False
    return True


@pytest.mark.parametrize("r,s,beta,cl", [
    (2, 1, (4, -2), "pt^9"),
    (3, 1, (3, -1), "pt^5"),
    (3, 2, (4, -2, -1), "pt^5"),
    (3, 2, (3, -1, -1), "pt,E1.2,H2^5"),
    (4, 2, (3, -1, -1), "pt^2,E1.3,H2^2"),
    (3, 1, (2, -1), "E1.2^2,H2^4"),
])
def test_termination_order(P, r, s, beta, cl):
    eng = P(r, s)
    key = GWKey(eng.t.name, beta, tuple(sorted(names(eng.t, *cl.split(",")))))
    bound = eng.order_rank(key.beta, key.classes)
    assert _reduces(eng, key, bound, 2)


def test_trace_records_cases():
    ws = Workspace()
    eng = ws.point_blowup(3, 1)
    eng.trace = []
    assert eng.gw((4, -2), ["pt"] * 6) == 0
    assert {c for _, c, _ in eng.trace} <= {"A", "B", "C"}
    assert eng.trace


def test_cycle_detection():
    ws = Workspace()
    eng = ws.point_blowup(2, 1)
    key = normalize(eng.t, (3, -2), (eng.t.point,) * 6)[1]

    def looping(k):
        return eng.value(k)

    eng._compute = looping
    with pytest.raises(CycleError):
        eng.gw_classes((3, -2), (eng.t.point,) * 6)
    assert key not in eng.memo


def test_memo_store_conflict():
    m = MemoStore()
    k = GWKey("X", (1,), ())
    m.put(k, Fraction(1))
    m.put(k, Fraction(1))
    with pytest.raises(CacheError):
        m.put(k, Fraction(2))


def test_cache_round_trip(tmp_path):
    ws = Workspace(cache_dir=str(tmp_path))
    a = ws.point_blowup(2, 1).gw((5, -2), ["pt"] * 12)
    n = ws.save()
    assert n > 0 and os.path.exists(tmp_path / "P2(1).gwcache")
    ws2 = Workspace(cache_dir=str(tmp_path))
    eng = ws2.point_blowup(2, 1)
    assert len(ws2.memo) > 0
    assert eng.gw((5, -2), ["pt"] * 12) == a == 18132
    lines = (tmp_path / "P2(1).gwcache").read_text().splitlines()
    assert lines[0].startswith("GWCACHE V1 ")
    assert all(ln.startswith("V1|2 1|") for ln in lines[1:])


def test_cache_hash_mismatch(tmp_path):
    ws = Workspace(cache_dir=str(tmp_path))
    ws.point_blowup(2, 1).gw((3, -1), ["pt"] * 7)
    ws.save()
    path = tmp_path / "P2(1).gwcache"
    text = path.read_text().splitlines()
    text[0] = "GWCACHE V1 0000000000000000"
    path.write_text("\n".join(text) + "\n")
    with pytest.raises(CacheError):
        load_cache(build_blowup_point_ring(2, 1), MemoStore(), str(path))


def test_unsupported_strategy():
    text = """
DIM 2
BASIS one 0
BASIS H 1
BASIS pt 2
PRODUCT H H = pt
CANONICAL = -3*H
CURVEBASIS H'
PAIR H H' = 1
"""
    t = parse_ring_file(text)
    with pytest.raises(UnsupportedStrategy):
        Engine(t)


def test_unsupported_key(ws):
    eng = ws.engine(curve_secant_ring(5, 1))
    with pytest.raises(UnsupportedKey):
        eng.gw((2, -4), ["H2"] * 4)


def test_surface_line_seeds_match_p4(ws):
    t = abelian_surface_ring()
    P4 = ws.point_blowup(4, 0)
    for (beta, classes), v in t.seeds.items():
        if beta == (1, 0):
            assert P4.gw((1,), [t.basis[k].name for k in classes]) == v


def test_curve_line_seeds_match_p3(ws):
    t = curve_secant_ring(4, 1)
    P3 = ws.point_blowup(3, 0)
    for (beta, classes), v in t.seeds.items():
        if beta == (1, 0):
            assert P3.gw((1,), [t.basis[k].name for k in classes]) == v


def test_vanishing_fast_path_agrees():
    slow = Workspace().point_blowup(3, 2)
    fast = Workspace(use_vanishing=True).point_blowup(3, 2)
    for beta, T in [((5, -2, -2), ["pt"] * 6), ((6, -3, -2), ["pt"] * 7),
                    ((3, 1, -1), ["pt"] * 4)]:
        assert slow.gw(beta, T) == fast.gw(beta, T)


def test_multilinear_insertions(P):
    eng = P(2, 1)
    t = eng.t
    mix = CohClass.basis(t.point, 2) + CohClass.basis(t.index["E1.1"], 3)
    v = eng.gw((3, -1), ["pt"] * 6 + [mix])
    assert v == 2 * eng.gw((3, -1), ["pt"] * 7) + 3 * eng.gw((3, -1), ["pt"] * 6 + ["E1.1"])


def test_permutation_invariance(P):
    eng = P(3, 2)
    a = eng.gw((3, -1, 0), ["E1.2", "pt", "H2", "pt"])
    b = eng.gw((3, -1, 0), ["pt", "H2", "pt", "E1.2"])
    assert a == b
