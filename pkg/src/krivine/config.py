"""The shipped defaults, kept in one versioned file and echoed into reports."""

from functools import lru_cache
from importlib import resources
import json

from .kernel import KernelConfig


@lru_cache(maxsize=1)
def defaults():
    with resources.files("krivine").joinpath("defaults.json").open() as fh:
        return json.load(fh)


def kernel_config(d=None):
    q = (d or defaults())["quadrature"]
    return KernelConfig(q["n_outer"], q["n_inner"], q["n_base"], q["extent"])


def shipped_scheme_path():
    return resources.files("krivine").joinpath("scheme_mixed.json")
