"""Distance matrices: construction, validation and the OCVRP-DMX v1 container.

Binary layout (all little-endian)::

    offset  size   field
    0       8      magic  b"OCVRPDMX"
    8       1      version (1)
    9       1      flags   (bit0 = symmetric)
    10      4      n, unsigned
    14      8*n*n  float64 km, row-major
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import CorruptMatrix, FormatError, InvalidCoordinate, IoError

EARTH_RADIUS_KM = 6371.0088

MAGIC = b"OCVRPDMX"
VERSION = 1
FLAG_SYMMETRIC = 0x01
_HEADER = struct.Struct("<8sBBI")


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Dense n x n km matrix with a zero diagonal. Asymmetry is allowed."""

    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise CorruptMatrix(f"matrix must be square, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise CorruptMatrix("matrix contains NaN or infinite entries")
        if np.any(values < 0):
            raise CorruptMatrix("matrix contains negative entries")
        if np.any(np.diag(values) != 0):
            raise CorruptMatrix("matrix diagonal must be zero")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @cached_property
    def symmetric(self) -> bool:
        return bool(np.array_equal(self.values, self.values.T))

    @cached_property
    def rows(self) -> list[list[float]]:
        # plain lists index several times faster than ndarray scalars in hot loops
        return self.values.tolist()

    def __getitem__(self, ij: tuple[int, int]) -> float:
        return float(self.values[ij])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DistanceMatrix):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    def __hash__(self) -> int:
        return hash(self.values.tobytes())


def _check_coordinate(lat: float, lon: float) -> None:
    if not (-90.0 <= lat <= 90.0) or not (-180.0 <= lon <= 180.0):
        raise InvalidCoordinate(f"coordinate out of range: ({lat}, {lon})")


def haversine_km(a: Sequence[float], b: Sequence[float]) -> float:
    """Great-circle distance in km between two (lat, lon) points in degrees."""
    lat1, lon1 = a
    lat2, lon2 = b
    _check_coordinate(lat1, lon1)
    _check_coordinate(lat2, lon2)
    phi1, phi2 = math.radians(lat1), math.radians(lat2)
    dphi = phi2 - phi1
    dlmb = math.radians(lon2 - lon1)
    h = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlmb / 2) ** 2
    return 2 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


def _haversine_matrix(lat: np.ndarray, lon: np.ndarray) -> np.ndarray:
    phi = np.radians(lat)
    lmb = np.radians(lon)
    dphi = phi[None, :] - phi[:, None]
    dlmb = lmb[None, :] - lmb[:, None]
    h = np.sin(dphi / 2) ** 2 + np.cos(phi)[:, None] * np.cos(phi)[None, :] * np.sin(dlmb / 2) ** 2
    d = 2 * EARTH_RADIUS_KM * np.arcsin(np.minimum(1.0, np.sqrt(h)))
    # force exact symmetry; the two triangle halves can differ in the last ulp
    d = np.triu(d, 1)
    return d + d.T


def build_matrix(locations: Iterable, mode: str = "haversine") -> DistanceMatrix:
    """Pairwise distances for ``locations`` (anything with ``lat``/``lon``).

    ``euclidean_plane`` reads lat/lon as planar km offsets, which is handy
    for hand-made fixtures.
    """
    locs = list(locations)
    if len(locs) < 2:
        raise ValueError("need at least 2 locations to build a matrix")
    lat = np.array([loc.lat for loc in locs], dtype=np.float64)
    lon = np.array([loc.lon for loc in locs], dtype=np.float64)
    if mode == "haversine":
        for la, lo in zip(lat, lon):
            _check_coordinate(la, lo)
        d = _haversine_matrix(lat, lon)
    elif mode == "euclidean_plane":
        d = np.hypot(lat[:, None] - lat[None, :], lon[:, None] - lon[None, :])
    else:
        raise ValueError(f"unknown matrix mode {mode!r}")
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix(d)


def save_matrix(matrix: DistanceMatrix, path: str | Path) -> None:
    flags = FLAG_SYMMETRIC if matrix.symmetric else 0
    payload = _HEADER.pack(MAGIC, VERSION, flags, matrix.n)
    payload += matrix.values.astype("<f8").tobytes(order="C")
    try:
        Path(path).write_bytes(payload)
    except OSError as exc:
        raise IoError(f"cannot write matrix to {path}: {exc}") from exc


def decode_matrix(data: bytes) -> DistanceMatrix:
    if len(data) < _HEADER.size:
        raise FormatError("file too short for an OCVRP-DMX header")
    magic, version, _flags, n = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"unsupported OCVRP-DMX version {version}")
    body = data[_HEADER.size:]
    if len(body) != 8 * n * n:
        raise CorruptMatrix(f"header declares n={n} ({n * n} values) but payload holds {len(body) / 8:g}")
    values = np.frombuffer(body, dtype="<f8").reshape(n, n)
    return DistanceMatrix(values)


def load_matrix(path: str | Path) -> DistanceMatrix:
    return decode_matrix(Path(path).read_bytes())


def load_matrix_csv(path: str | Path) -> DistanceMatrix:
    """n lines of n comma-separated decimals."""
    try:
        values = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except ValueError as exc:
        raise FormatError(f"unparseable CSV matrix {path}: {exc}") from exc
    return DistanceMatrix(values)
