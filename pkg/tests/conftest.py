import pytest

from blowupgw.engine import Workspace, run_deep


@pytest.fixture(scope="session", autouse=True)
def _deep_recursion():
    # run_deep raises the interpreter recursion limit once; do it before any
    # test so hypothesis sees a stable limit
    run_deep(int)


@pytest.fixture(scope="session")
def ws():
    """One workspace for the whole run, so invariants are computed once."""
    return Workspace()


@pytest.fixture(scope="session")
def P(ws):
    def get(r, s=0):
        return ws.point_blowup(r, s)
    return get
