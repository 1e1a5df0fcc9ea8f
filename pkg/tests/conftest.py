import json
import os

import pytest

from pcflab.constants import ConstantsCatalog

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


@pytest.fixture(scope="session")
def catalog():
    return ConstantsCatalog(verify_cap=400)


@pytest.fixture(scope="session")
def frozen_digits():
    with open(os.path.join(DATA_DIR, "constant_digits.json"), encoding="utf-8") as fh:
        return json.load(fh)
