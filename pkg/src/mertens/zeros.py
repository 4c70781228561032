"""Ordinates of nontrivial zeta zeros: import, validation and binary cache.

Only positive ordinates are stored.  Sums over zeros fold each conjugate
pair analytically, so realness holds by construction.

Binary cache layout (little-endian)::

    b"MHZ1" | u32 version | u64 count | f64 precision | f64 rh_verified_height
    | f64 height | count * f64 ordinates | u64 CRC-64/ECMA-182 of everything before it

``height`` is the completeness height: every zero with 0 < gamma <= height
is present.  It defaults to the largest ordinate.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CorruptionError, CoverageError, FormatError, OrderError

FIRST_ZERO_WINDOW = (14.1347, 14.1348)

_MAGIC = b"MHZ1"
_VERSION = 1
_HEADER = struct.Struct("<4sIQddd")


@dataclass(frozen=True, eq=False)
class ZeroSet:
    """Ascending positive ordinates of zeros assumed to lie on the critical line."""

    gammas: np.ndarray = field(repr=False)
    precision: float
    rh_verified_height: float = 3.0e12
    source: str = ""
    height: float | None = None

    def __post_init__(self):
        g = np.ascontiguousarray(self.gammas, dtype=np.float64)
        g.setflags(write=False)
        object.__setattr__(self, "gammas", g)
        top = float(g[-1]) if g.size else 0.0
        if self.height is None:
            object.__setattr__(self, "height", top)
        elif self.height < top:
            raise FormatError(f"completeness height {self.height:g} is below the largest ordinate {top:g}")

    @property
    def count(self) -> int:
        return int(self.gammas.size)

    @property
    def max_gamma(self) -> float:
        return float(self.gammas[-1]) if self.gammas.size else 0.0

    def up_to(self, T: float) -> np.ndarray:
        """Ordinates with gamma <= T; raises if T is beyond the completeness height."""
        if T > self.height:
            raise CoverageError(f"height T = {T:g} exceeds the loaded zeros (complete to {self.height:g})")
        return self.gammas[: int(np.searchsorted(self.gammas, T, side="right"))]

    def truncate(self, T: float) -> "ZeroSet":
        return ZeroSet(self.up_to(T).copy(), self.precision, self.rh_verified_height, self.source, float(T))

    def meta(self) -> "ZeroSetMeta":
        return ZeroSetMeta(self.source, self.precision, self.count, crc64_fast(self.gammas.astype("<f8").tobytes()))


@dataclass(frozen=True)
class ZeroSetMeta:
    source: str
    precision: float
    count: int
    checksum: int


# ---------------------------------------------------------------------------
# CRC-64/ECMA-182 (non-reflected, poly 0x42F0E1EBA9EA3693, init 0)

_POLY = 0x42F0E1EBA9EA3693
_MASK = (1 << 64) - 1


def _crc_table() -> np.ndarray:
    table = np.zeros(256, dtype=np.uint64)
    for i in range(256):
        crc = i << 56
        for _ in range(8):
            crc = ((crc << 1) ^ _POLY) & _MASK if crc & (1 << 63) else (crc << 1) & _MASK
        table[i] = crc
    return table


_CRC_TABLE = _crc_table()
_CRC_LIST = [int(v) for v in _CRC_TABLE]


def crc64(data: bytes) -> int:
    """CRC-64/ECMA-182 of ``data`` (byte-serial reference implementation)."""
    crc = 0
    table = _CRC_LIST
    for b in data:
        crc = table[((crc >> 56) ^ b) & 0xFF] ^ ((crc << 8) & _MASK)
    return crc


def _zero_shift_map(n_bytes: int) -> list[list[int]]:
    """Byte tables for r -> r * x^(8 n_bytes) mod P (appending zero bytes)."""
    images = []
    for bit in range(64):
        r = 1 << bit
        for _ in range(n_bytes):
            r = _CRC_LIST[(r >> 56) & 0xFF] ^ ((r << 8) & _MASK)
        images.append(r)
    tables = []
    for j in range(8):
        t = [0] * 256
        for b in range(1, 256):
            low = b & -b
            t[b] = t[b ^ low] ^ images[8 * j + low.bit_length() - 1]
        tables.append(t)
    return tables


def crc64_fast(data: bytes, lanes: int = 4096) -> int:
    """Same value as :func:`crc64`, computed over parallel lanes.

    The input is left-padded with zero bytes (a no-op for this CRC) so it
    splits into equal lanes; lane CRCs are combined by the linear
    zero-append map.
    """
    n = len(data)
    if n < 4 * lanes:
        return crc64(data)
    width = -(-n // lanes)
    buf = np.zeros(width * lanes, dtype=np.uint8)
    buf[width * lanes - n :] = np.frombuffer(data, dtype=np.uint8)
    cols = buf.reshape(lanes, width).T.copy()
    reg = np.zeros(lanes, dtype=np.uint64)
    table = _CRC_TABLE
    s56 = np.uint64(56)
    s8 = np.uint64(8)
    ff = np.uint64(0xFF)
    for row in cols:
        idx = ((reg >> s56) ^ row.astype(np.uint64)) & ff
        reg = table[idx] ^ (reg << s8)
    shift = _zero_shift_map(width)
    crc = 0
    for lane_crc in reg.tolist():
        c = crc
        crc = lane_crc
        for j in range(8):
            crc ^= shift[j][(c >> (8 * j)) & 0xFF]
    return crc


# ---------------------------------------------------------------------------
# Text import


def _read_sidecar(path: Path) -> dict[str, str]:
    meta_path = path.with_name(path.name + ".meta")
    if not meta_path.exists():
        return {}
    out: dict[str, str] = {}
    for lineno, line in enumerate(meta_path.read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise FormatError(f"{meta_path}: expected key=value", lineno)
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def write_sidecar(path: str | Path, meta: ZeroSetMeta, height: float | None = None) -> Path:
    p = Path(path)
    meta_path = p.with_name(p.name + ".meta")
    text = f"source={meta.source}\nprecision={meta.precision!r}\ncount={meta.count}\n"
    if height is not None:
        text += f"height={height!r}\n"
    meta_path.write_text(text)
    return meta_path


def import_zeros(
    path: str | Path,
    format: str = "plain-text",
    precision: float | None = None,
    rh_verified_height: float = 3.0e12,
    height: float | None = None,
) -> ZeroSet:
    """Parse a text table of zero ordinates.

    ``plain-text``: one ordinate per line.  ``paired-text``: two columns
    ``index ordinate`` per line (as in the LMFDB/Odlyzko tables).  Blank lines
    and ``#`` comments are skipped.  Precision comes from the argument, else
    from a ``<file>.meta`` sidecar (``precision=...``), else defaults to 1e-9.
    The completeness ``height`` likewise comes from the argument, the sidecar
    (``height=...``) or the largest ordinate.
    """
    path = Path(path)
    if format not in ("plain-text", "paired-text"):
        raise FormatError(f"unknown zero file format {format!r}")
    sidecar = _read_sidecar(path)
    values: list[float] = []
    prev = -math.inf
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            token = parts[-1] if format == "paired-text" else parts[0]
            if (format == "plain-text" and len(parts) != 1) or (format == "paired-text" and len(parts) != 2):
                raise FormatError(f"expected {'1' if format == 'plain-text' else '2'} column(s): {line!r}", lineno)
            try:
                g = float(token)
            except ValueError:
                raise FormatError(f"not a decimal ordinate: {token!r}", lineno) from None
            if not (math.isfinite(g) and g > 0):
                raise FormatError(f"ordinate must be positive and finite: {token!r}", lineno)
            if g <= prev:
                raise OrderError(f"ordinates not strictly ascending ({g!r} after {prev!r})", lineno)
            values.append(g)
            prev = g
    if not values:
        raise FormatError(f"{path}: no ordinates found")
    if precision is None:
        precision = float(sidecar.get("precision", 1e-9))
    if "count" in sidecar and int(sidecar["count"]) != len(values):
        raise FormatError(f"sidecar count {sidecar['count']} does not match {len(values)} ordinates")
    if height is None and "height" in sidecar:
        height = float(sidecar["height"])
    source = sidecar.get("source", path.name)
    return ZeroSet(np.array(values, dtype=np.float64), float(precision), rh_verified_height, source, height)


# ---------------------------------------------------------------------------
# Validation


def validate(zs: ZeroSet) -> list[str]:
    """Sanity checks; returns a list of human-readable violations (empty if clean)."""
    issues: list[str] = []
    g = zs.gammas
    if g.size == 0:
        return ["empty zero set"]
    if not (zs.precision > 0):
        issues.append("precision must be positive")
    if np.any(g <= 0) or not np.all(np.isfinite(g)):
        issues.append("non-positive or non-finite ordinate")
    d = np.diff(g)
    bad = np.flatnonzero(d <= 0)
    if bad.size:
        issues.append(f"non-strict order at index {int(bad[0]) + 1} (gamma = {g[bad[0] + 1]!r})")
    lo, hi = FIRST_ZERO_WINDOW
    if not (lo < g[0] < hi):
        issues.append(f"first ordinate {g[0]!r} outside {FIRST_ZERO_WINDOW}")
    if g.size > 1:
        mid = 0.5 * (g[1:] + g[:-1])
        above = mid > 50.0
        big = np.flatnonzero(above & (d > 10.0))
        if big.size:
            k = int(big[0])
            issues.append(f"density violation: gap {d[k]:.4g} > 10 above gamma = 50, at gamma = {g[k]!r}")
        # local density against N'(T) = log(T / 2pi) / 2pi, in windows of 64 zeros
        w = 64
        if g.size > w:
            starts = np.arange(0, g.size - w, w)
            starts = starts[g[starts] > 50.0]
            if starts.size:
                span = g[starts + w] - g[starts]
                centre = 0.5 * (g[starts + w] + g[starts])
                expected = w * 2 * math.pi / np.log(centre / (2 * math.pi))
                ratio = span / expected
                off = np.flatnonzero((ratio > 2.0) | (ratio < 0.5))
                if off.size:
                    k = int(starts[off[0]])
                    issues.append(
                        f"density violation near gamma = {g[k]:.6g}: {w} zeros span {span[off[0]]:.4g}, "
                        f"expected ~{expected[off[0]]:.4g}"
                    )
            # single large gaps relative to the mean spacing
            mean_gap = 2 * math.pi / np.log(np.maximum(mid, 7.0) / (2 * math.pi))
            huge = np.flatnonzero(above & (d > 8.0 * mean_gap) & (d <= 10.0))
            if huge.size:
                k = int(huge[0])
                issues.append(f"density violation: gap {d[k]:.4g} at gamma = {g[k]:.6g}")
    return issues


# ---------------------------------------------------------------------------
# Binary cache


def cache_write(zs: ZeroSet, path: str | Path) -> None:
    header = _HEADER.pack(_MAGIC, _VERSION, zs.count, zs.precision, zs.rh_verified_height, zs.height)
    body = header + zs.gammas.astype("<f8").tobytes()
    crc = crc64_fast(body)
    with open(path, "wb") as fh:
        fh.write(body)
        fh.write(struct.pack("<Q", crc))
    write_sidecar(path, zs.meta(), zs.height)


def cache_read(path: str | Path) -> ZeroSet:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size + 8:
        raise CorruptionError(f"{path}: truncated zero cache")
    magic, version, count, precision, rh_height, height = _HEADER.unpack_from(raw, 0)
    if magic != _MAGIC:
        raise CorruptionError(f"{path}: bad magic {magic!r}")
    if version != _VERSION:
        raise CorruptionError(f"{path}: unsupported version {version}")
    expected = _HEADER.size + 8 * count + 8
    if len(raw) != expected:
        raise CorruptionError(f"{path}: size {len(raw)} does not match header count {count}")
    (crc,) = struct.unpack_from("<Q", raw, expected - 8)
    if crc != crc64_fast(raw[: expected - 8]):
        raise CorruptionError(f"{path}: checksum mismatch")
    gammas = np.frombuffer(raw, dtype="<f8", count=count, offset=_HEADER.size).astype(np.float64)
    source = ""
    meta = Path(str(path) + ".meta")
    if meta.exists():
        for line in meta.read_text().splitlines():
            if line.startswith("source="):
                source = line[len("source=") :]
    return ZeroSet(gammas, precision, rh_height, source, height)
