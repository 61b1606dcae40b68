import io
import subprocess
import sys

import pytest

from blowupgw.cli import main
from blowupgw.verify import load_fixture, parse_table_tsv


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


@pytest.mark.parametrize("args,want", [
    (["--r", "3", "--s", "2", "--beta", "5,-2,-2", "--classes", "pt^6"], "1"),
    (["--r", "2", "--s", "1", "--beta", "6,-4", "--classes", "pt^13"], "3840"),
    (["--r", "2", "--s", "0", "--beta", "1", "--classes", "pt^2"], "1"),
    (["--r", "4", "--s", "2", "--beta", "3,-2,-2", "--classes", "pt,H2"], "1/4"),
    (["--r", "3", "--s", "1", "--beta", "0,1", "--classes", "E1.1,E1.2^2"], "-1"),
])
def test_gw(args, want):
    code, text = run("gw", *args)
    assert code == 0 and text == want + "\n"


def test_gw_token_aliases():
    a = run("gw", "--r", "3", "--s", "1", "--beta", "3,-1", "--classes", "H3^3,H2,E1")[1]
    b = run("gw", "--r", "3", "--s", "1", "--beta", "3,-1", "--classes", "pt^3,H2,E1.1")[1]
    assert a == b and a.strip()


def test_gw_explain():
    code, text = run("gw", "--r", "2", "--s", "1", "--beta", "3,-2", "--classes", "pt^6",
                     "--explain")
    lines = text.splitlines()
    assert lines[0] == "1" and lines[1].startswith("enumerative:")
    code, text = run("gw", "--r", "3", "--s", "2", "--beta", "5,-2,-2", "--classes", "pt^6",
                     "--explain")
    assert text == "1\n"


def test_custom_targets():
    assert run("gw", "--target", "curvesec", "--param", "d=5", "--param", "g=1",
               "--beta", "1,-2", "--classes", "pt") == (0, "5\n")
    assert run("gw", "--target", "surfsec", "--beta", "1,-6") == (0, "25\n")


def test_exit_codes(capsys):
    assert run("gw", "--r", "2", "--beta", "1", "--classes", "Q^2")[0] == 2
    assert run("gw", "--r", "2", "--beta", "1,2", "--classes", "pt^2")[0] == 2
    assert run("gw", "--beta", "1")[0] == 2
    assert run("gw", "--ring", "/nonexistent.ring", "--beta", "1")[0] == 2
    assert run("gw", "--target", "curvesec", "--param", "d=5", "--param", "g=1",
               "--beta", "2,-4", "--classes", "H2^4")[0] == 3
    assert run("secant", "--d", "0", "--g", "0")[0] == 2
    assert run("tangency", "--r", "3", "--k", "5", "--d", "3")[0] == 2
    assert "error" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        run("table", "--id", "nope")
    assert exc.value.code == 2


def test_table_tsv_round_trip():
    code, text = run("table", "--id", "p3-2", "--dmax", "7", "--format", "tsv")
    assert code == 0
    got, want = parse_table_tsv(text), load_fixture("p3-2")
    assert got.columns == list(range(2, 8))
    for label, vals in got.rows:
        for d, v in zip(got.columns, vals):
            assert v == want.cell(label, d)


def test_table_markdown():
    code, text = run("table", "--id", "covmult")
    assert code == 0 and "1/216" in text


def test_small_commands():
    assert run("secant", "--d", "3", "--g", "0") == (0, "t=0 q=0\n")
    assert run("abelian") == (0, "25\n")
    assert run("tangency", "--r", "3", "--k", "1", "--d", "3") == (0, "3\n")
    assert run("tangency", "--r", "2", "--k", "1", "--d", "4", "--pattern", "pt^9") == (0, "428\n")
    code, text = run("secant", "--d", "4", "--g", "1", "--all")
    assert code == 0 and len(text.splitlines()) == 13


def test_verify_command():
    code, text = run("verify", "--suite", "residual", "--samples", "5", "--seed", "2")
    assert code == 0 and text.count("ok") == 3
    code, text = run("verify", "--suite", "tables", "--id", "p2-1", "--dmax", "5")
    assert code == 0 and text.startswith("tables[p2-1]: 35 checked, ok")


def test_cache_shared(tmp_path):
    cache = str(tmp_path / "c")
    a = run("--cache", cache, "table", "--id", "p2-1", "--dmax", "5", "--format", "tsv")
    code, info = run("--cache", cache, "cache-info")
    assert code == 0 and "P2(1).gwcache" in info
    b = run("--cache", cache, "--workers", "3", "table", "--id", "p2-1", "--dmax", "5",
            "--format", "tsv")
    assert a == b


def test_cache_env(tmp_path, monkeypatch):
    monkeypatch.setenv("GW_CACHE", str(tmp_path))
    proc = subprocess.run([sys.executable, "-m", "blowupgw", "gw", "--r", "2", "--beta", "3",
                           "--classes", "pt^8"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "12\n"
    assert (tmp_path / "P2.gwcache").exists()
