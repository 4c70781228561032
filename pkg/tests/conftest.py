"""Shared fixtures.

Zero tables are looked up in ``$MH_CACHE_DIR`` (default ``~/.cache/mertens``)
as ``zeros_1e5.txt`` / ``zeros_1e6.txt``.  The 1e5 table is generated on the
fly (about 30 s) when missing; the 1e6 table takes much longer, so tests that
need it are skipped unless it exists or ``MH_GENERATE_ZEROS=1`` is set.
"""

from __future__ import annotations

import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mertens.primes import mertens_constant  # noqa: E402
from mertens.zeros import import_zeros  # noqa: E402


def data_dir() -> Path:
    d = Path(os.environ.get("MH_CACHE_DIR") or Path.home() / ".cache" / "mertens")
    d.mkdir(parents=True, exist_ok=True)
    return d


def zero_table(T: float, generate: bool):
    name = {1e5: "zeros_1e5.txt", 1e6: "zeros_1e6.txt"}[T]
    path = data_dir() / name
    if not path.exists():
        if not generate:
            return None
        import zetagen

        g = zetagen.generate_zeros(T)
        tmp = path.with_suffix(".tmp")
        tmp.write_text("\n".join(f"{v:.12f}" for v in g) + "\n")
        tmp.rename(path)
    return import_zeros(path, height=T)


@pytest.fixture(scope="session")
def zeros_1e5():
    return zero_table(1e5, generate=True)


@pytest.fixture(scope="session")
def zeros_1e6():
    zs = zero_table(1e6, generate=os.environ.get("MH_GENERATE_ZEROS") == "1")
    if zs is None:
        pytest.skip("zeros up to 1e6 not available (set MH_GENERATE_ZEROS=1 to build them)")
    return zs


@pytest.fixture(scope="session")
def mertens_consts():
    return mertens_constant(1e-9)
