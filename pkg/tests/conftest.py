import math
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from krivine.config import defaults, kernel_config, shipped_scheme_path
from krivine.series import KrivineScheme, gamma_p


@pytest.fixture(scope="session")
def shipped():
    return KrivineScheme.load(str(shipped_scheme_path()))


@pytest.fixture(scope="session")
def mixed():
    """gamma_p recomputed from scratch at the shipped configuration."""
    d = defaults()
    return gamma_p(d["eta"], d["p"], d["sample_radius"], d["order"], kernel_config(),
                   tuple(d["alpha"]))


LOG1P2 = math.log(1 + math.sqrt(2))
KRIVINE_C = 2 / math.pi * LOG1P2
