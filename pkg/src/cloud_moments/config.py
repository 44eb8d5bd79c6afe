import os
from importlib.resources import files

from .errors import InvalidArgumentError

PRECISION_ENV_VAR = "CLOUDMOMENTS_PREC"
DEFAULT_PRECISION_BITS = 256
MIN_PRECISION_BITS = 53


def default_precision_bits() -> int:
    """Return the working precision, honouring ``CLOUDMOMENTS_PREC`` when set."""
    raw = os.environ.get(PRECISION_ENV_VAR)
    if raw is None or raw.strip() == "":
        return DEFAULT_PRECISION_BITS
    try:
        bits = int(raw)
    except ValueError:
        raise InvalidArgumentError(f"{PRECISION_ENV_VAR} must be an integer, got {raw!r}") from None
    if bits < MIN_PRECISION_BITS:
        raise InvalidArgumentError(f"{PRECISION_ENV_VAR} must be at least {MIN_PRECISION_BITS}, got {bits}")
    return bits


def get_fixture_bytes(name: str) -> bytes:
    """Return the raw bytes of a JSON fixture shipped as package data."""
    resource = files("cloud_moments.fixtures").joinpath(name)
    return resource.read_bytes()


def list_fixtures() -> list[str]:
    return sorted(
        entry.name
        for entry in files("cloud_moments.fixtures").iterdir()
        if entry.name.endswith(".json")
    )
