from __future__ import annotations

import copy
import json
import random
from pathlib import Path

import pytest

from eslmc.model import load_model

ROOT = Path(__file__).resolve().parent.parent
TOY_PATH = ROOT / "models" / "matching-pennies.json"
DATA = Path(__file__).resolve().parent / "data"

# matching pennies: does B know it can win, or can it win knowingly?
DE_DICTO = "forall x:A. X K[B] exists y:B. X win_B"
DE_RE = "forall x:A. X exists y:B. K[B] X win_B"
NESTED_DE_DICTO = "forall x:A. X K[B] K[A] exists y:B. X win_A"
NESTED_DE_RE = "forall x:A. X K[B] exists y:B. K[A] X win_A"

# toy states as (A local, B local)
S0 = ("eA", "eB")
S0L = ("0", "lam")
S1L = ("1", "lam")
S00 = ("0", "0")
S01 = ("0", "1")
S10 = ("1", "0")
S11 = ("1", "1")


@pytest.fixture(scope="session")
def toy():
    return load_model(TOY_PATH)


@pytest.fixture
def toy_doc():
    return copy.deepcopy(json.loads(TOY_PATH.read_text()))


@pytest.fixture
def selfloop_doc():
    return {
        "agents": [{"name": "A", "locals": ["l"], "actions": ["a"], "protocol": {"l": ["a"]}}],
        "initial": ["l"],
        "transitions": [{"from": ["l"], "action": ["a"], "to": ["l"]}],
        "atoms": {},
    }


@pytest.fixture
def rng():
    return random.Random(20241018)


# one line per acceptance criterion, echoed at the end of the run
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
