import os
import shutil
import stat
from importlib.resources import files
from pathlib import Path
from typing import Any

from mpmath import mp

from cloud_moments.config import list_fixtures
from cloud_moments.measure_lib import parse_measure
from cloud_moments.moment_core import PrecisionPolicy

__all__ = [
    "remove_readonly",
    "fixture_path",
    "copy_fixtures",
    "measure_fixture",
    "policy",
    "assert_close",
]


def remove_readonly(func: Any, path: str, excinfo: Any) -> None:  # noqa: ANN401
    """shutil.rmtree hook clearing read-only bits on Windows."""
    try:
        os.chmod(path, stat.S_IWUSR)
    except OSError:
        pass
    func(path)


def fixture_path(name: str) -> Path:
    return Path(str(files("cloud_moments.fixtures").joinpath(name)))


def copy_fixtures(dest: str | Path) -> list[str]:
    """Copy every shipped JSON fixture into ``dest`` and return their names."""
    names = list_fixtures()
    for name in names:
        shutil.copyfile(fixture_path(name), Path(dest) / name)
    return names


def measure_fixture(name: str):
    return parse_measure(fixture_path(name).read_bytes())


def policy(bits: int = 128) -> PrecisionPolicy:
    return PrecisionPolicy(significand_bits=bits)


def assert_close(actual: Any, expected: Any, tol: float, what: str = "value") -> None:
    """Absolute comparison that works for floats, complex numbers and mpmath scalars."""
    with mp.workprec(512):
        deviation = abs(mp.mpc(actual) - mp.mpc(expected))
    assert deviation <= tol, f"{what}: got {actual}, expected {expected} (deviation {mp.nstr(deviation, 5)} > {tol:g})"
