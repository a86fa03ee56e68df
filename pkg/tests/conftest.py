import pathlib

import pytest

from lh.surface import parse

EXAMPLES = pathlib.Path(__file__).resolve().parent.parent / "examples"

E3_SRC = """
<{x:Int|x mod 2 = 0} => {x:Int|x <> 0} @ l3>
  (<{x:Int|x >= 0} => {x:Int|x mod 2 = 0} @ l2>
    (<{x:Int|true} => {x:Int|x >= 0} @ l1> (-1)))
"""


@pytest.fixture(scope="session")
def e3():
    return parse(E3_SRC)


@pytest.fixture(scope="session")
def examples_dir():
    return EXAMPLES


def load_example(name: str):
    return parse((EXAMPLES / name).read_text())
