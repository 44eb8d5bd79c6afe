from __future__ import annotations

import sys
from pathlib import Path
from typing import Union

from ..errors import InvalidArgumentError

__all__ = ["safe_path_join", "read_bytes", "write_output", "STDOUT"]

STDOUT = "-"

PathLike = Union[str, Path]


def safe_path_join(base: PathLike, *paths: PathLike) -> Path:
    """Resolve ``paths`` under ``base`` and refuse anything that lands outside it.

    ``..`` components are collapsed before the check. Symlinks that point out
    of ``base`` are not detected.
    """
    base_path = Path(base).resolve(strict=False)
    target = base_path.joinpath(*map(Path, paths)).resolve(strict=False)
    if not target.is_relative_to(base_path):
        raise InvalidArgumentError(f"path escapes the workspace directory: {target}")
    return target


def read_bytes(path: PathLike) -> bytes:
    try:
        return Path(path).read_bytes()
    except FileNotFoundError:
        raise InvalidArgumentError(f"file not found: {path}") from None
    except IsADirectoryError:
        raise InvalidArgumentError(f"expected a file, got a directory: {path}") from None


def write_output(payload: bytes | str, out: PathLike | None = None) -> str | None:
    """Write ``payload`` to ``out``, or to stdout when ``out`` is ``None`` or ``"-"``.

    Returns the path written, ``None`` for stdout.
    """
    data = payload.encode("utf-8") if isinstance(payload, str) else payload
    if out is None or str(out) == STDOUT:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
        return None
    target = Path(out)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_bytes(data)
    return str(target)
