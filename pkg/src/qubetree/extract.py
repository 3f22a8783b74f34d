"""Byte-range access planning against a mock binary field store.

Store layout, fields concatenated in field-index order::

    b"QFLD"          4 bytes magic
    field index      uint32 little-endian
    cell count       uint64 little-endian
    values           cell count x float64 little-endian

Each field holds ``value(fi, ci) = fi * 1e6 + ci``. ByteRange offsets are
relative to a field's first value byte.
"""
from __future__ import annotations

import enum
import json
import math
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .core import Qube, leaves
from .errors import CorruptField, OutOfBounds, SchemaError, ShortRead, UnknownField
from .select import Constraint, select
from .values import render_value

MAGIC = b"QFLD"
HEADER = struct.Struct("<4sIQ")
HEADER_SIZE = HEADER.size  # 16
VALUE_SIZE = 8
MANIFEST_NAME = "manifest.json"
MANIFEST_VERSION = "qube-store/1"


@dataclass(frozen=True)
class GridSpec:
    """Regular lat-lon grid of cell centres.

    Row 0 sits at ``lat0`` and the last row at ``lat1`` (north to south);
    column 0 at ``lon0``, the last column at ``lon1``.
    """

    nlat: int
    nlon: int
    lat0: float = 90.0
    lat1: float = -90.0
    lon0: float = 0.0
    lon1: float | None = None

    def __post_init__(self):
        if self.nlat < 1 or self.nlon < 1:
            raise ValueError("grid dimensions must be positive")
        if self.lon1 is None:
            object.__setattr__(self, "lon1", self.lon0 + 360.0 * (self.nlon - 1) / self.nlon)

    @property
    def cell_count(self) -> int:
        return self.nlat * self.nlon

    def index(self, i: int, j: int) -> int:
        return i * self.nlon + j

    def lat(self, i: int) -> float:
        return self.lat0 if self.nlat == 1 else self.lat0 + i * (self.lat1 - self.lat0) / (self.nlat - 1)

    def lon(self, j: int) -> float:
        return self.lon0 if self.nlon == 1 else self.lon0 + j * (self.lon1 - self.lon0) / (self.nlon - 1)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("nlat", "nlon", "lat0", "lat1", "lon0", "lon1")}


class FeatureKind(enum.Enum):
    POINT = "point"
    BOX = "box"
    ALL = "all"


@dataclass(frozen=True)
class Feature:
    kind: FeatureKind
    point: tuple[float, float] | None = None
    box: tuple[float, float, float, float] | None = None  # lat_min, lat_max, lon_min, lon_max

    @classmethod
    def at(cls, lat: float, lon: float) -> Feature:
        return cls(FeatureKind.POINT, point=(lat, lon))

    @classmethod
    def bbox(cls, lat_min: float, lat_max: float, lon_min: float, lon_max: float) -> Feature:
        if lat_min > lat_max or lon_min > lon_max:
            raise ValueError("box bounds must be ordered (min <= max)")
        return cls(FeatureKind.BOX, box=(lat_min, lat_max, lon_min, lon_max))

    @classmethod
    def all_cells(cls) -> Feature:
        return cls(FeatureKind.ALL)

    @classmethod
    def parse(cls, text: str) -> Feature:
        """``point:LAT,LON``, ``box:LATMIN,LATMAX,LONMIN,LONMAX`` or ``all``."""
        kind, _, rest = text.strip().partition(":")
        kind = kind.lower()
        try:
            nums = [float(x) for x in rest.split(",")] if rest else []
        except ValueError:
            raise ValueError(f"bad feature {text!r}") from None
        if kind == "all" and not nums:
            return cls.all_cells()
        if kind == "point" and len(nums) == 2:
            return cls.at(*nums)
        if kind == "box" and len(nums) == 4:
            return cls.bbox(*nums)
        raise ValueError(f"bad feature {text!r}; expected point:LAT,LON, box:A,B,C,D or all")


@dataclass(frozen=True, order=True)
class ByteRange:
    field_index: int
    offset: int
    length: int

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError("byte range length must be positive")


@dataclass(frozen=True)
class AccessPlan:
    ranges: tuple[ByteRange, ...]

    @property
    def total_bytes(self) -> int:
        return sum(r.length for r in self.ranges)

    @property
    def fields_touched(self) -> int:
        return len({r.field_index for r in self.ranges})


@dataclass
class FieldStoreManifest:
    grid: GridSpec
    fields: dict[str, int] = field(default_factory=dict)
    data_path: str = "fields.bin"

    def __post_init__(self):
        if sorted(self.fields.values()) != list(range(len(self.fields))):
            raise ValueError("field indices must be dense 0..F-1 and unique")

    @property
    def field_size(self) -> int:
        return HEADER_SIZE + VALUE_SIZE * self.grid.cell_count

    @classmethod
    def for_qube(cls, q: Qube, grid: GridSpec, data_path: str = "fields.bin") -> FieldStoreManifest:
        """One field per leaf tuple, numbered in canonical leaf order."""
        return cls(grid, {field_key(t): i for i, t in enumerate(leaves(q))}, data_path)

    def to_dict(self) -> dict:
        return {
            "version": MANIFEST_VERSION,
            "grid": self.grid.to_dict(),
            "fields": self.fields,
            "data": self.data_path,
        }

    @classmethod
    def from_dict(cls, doc) -> FieldStoreManifest:
        if not isinstance(doc, dict) or doc.get("version") != MANIFEST_VERSION:
            raise SchemaError(f"expected manifest version {MANIFEST_VERSION!r}", "$.version")
        try:
            grid = GridSpec(**doc["grid"])
            return cls(grid, {str(k): int(v) for k, v in doc["fields"].items()}, str(doc["data"]))
        except (KeyError, TypeError, ValueError, AttributeError) as e:
            raise SchemaError(f"bad manifest: {e}") from None


def field_key(t: Iterable[tuple]) -> str:
    """Canonical ``dim=value,...`` string of a leaf tuple in tree order."""
    return ",".join(f"{d}={render_value(v)}" for d, v in t)


def save_manifest(m: FieldStoreManifest, path: str | os.PathLike) -> None:
    Path(path).write_text(json.dumps(m.to_dict(), indent=1, sort_keys=True) + "\n", encoding="utf-8")


def load_manifest(path: str | os.PathLike) -> FieldStoreManifest:
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid manifest JSON: {e}") from None
    return FieldStoreManifest.from_dict(doc)


# ---------------------------------------------------------------------------
# geometry
# ---------------------------------------------------------------------------


def _nearest(x: float, first: float, last: float, n: int) -> int:
    if n == 1:
        return 0
    step = (last - first) / (n - 1)
    t = (x - first) / step
    lo = min(max(math.floor(t), 0), n - 1)
    hi = min(lo + 1, n - 1)
    # ties go to the lower index
    return lo if abs(x - (first + lo * step)) <= abs(x - (first + hi * step)) else hi


def _span(lo: float, hi: float, first: float, last: float, n: int) -> range:
    """Indices whose centres fall inside [lo, hi]."""
    if n == 1:
        return range(1) if lo <= first <= hi else range(0)
    step = (last - first) / (n - 1)
    a, b = (lo - first) / step, (hi - first) / step
    if a > b:
        a, b = b, a
    eps = 1e-9
    start = max(math.ceil(a - eps), 0)
    stop = min(math.floor(b + eps), n - 1)
    return range(start, stop + 1) if start <= stop else range(0)


def feature_to_indices(grid: GridSpec, f: Feature) -> list[tuple[int, int]]:
    """Cell runs ``(start_index, count)`` covered by a feature, ascending."""
    lat_lo, lat_hi = sorted((grid.lat0, grid.lat1))
    lon_lo, lon_hi = sorted((grid.lon0, grid.lon1))
    if f.kind is FeatureKind.ALL:
        return [(0, grid.cell_count)]
    if f.kind is FeatureKind.POINT:
        lat, lon = f.point
        if not (lat_lo <= lat <= lat_hi and lon_lo <= lon <= lon_hi):
            raise OutOfBounds(f"point ({lat}, {lon}) lies outside the grid")
        i = _nearest(lat, grid.lat0, grid.lat1, grid.nlat)
        j = _nearest(lon, grid.lon0, grid.lon1, grid.nlon)
        return [(grid.index(i, j), 1)]
    la0, la1, lo0, lo1 = f.box
    if la1 < lat_lo or la0 > lat_hi or lo1 < lon_lo or lo0 > lon_hi:
        raise OutOfBounds(f"box {f.box} lies outside the grid")
    rows = _span(la0, la1, grid.lat0, grid.lat1, grid.nlat)
    cols = _span(lo0, lo1, grid.lon0, grid.lon1, grid.nlon)
    if not rows or not cols:
        return []
    return [(grid.index(i, cols.start), len(cols)) for i in sorted(rows)]


# ---------------------------------------------------------------------------
# planning
# ---------------------------------------------------------------------------


def coalesce(ranges: Iterable[ByteRange]) -> list[ByteRange]:
    """Sort and fuse overlapping or touching ranges within each field."""
    out: list[ByteRange] = []
    for r in sorted(ranges):
        if out and out[-1].field_index == r.field_index and out[-1].offset + out[-1].length >= r.offset:
            last = out[-1]
            end = max(last.offset + last.length, r.offset + r.length)
            out[-1] = ByteRange(last.field_index, last.offset, end - last.offset)
        else:
            out.append(r)
    return out


def plan(q: Qube, c: Constraint, f: Feature, m: FieldStoreManifest) -> AccessPlan:
    """Byte ranges needed to serve feature ``f`` on every field selected by ``c``."""
    runs = feature_to_indices(m.grid, f)
    ranges = []
    for t in leaves(select(q, c)):
        key = field_key(t)
        fi = m.fields.get(key)
        if fi is None:
            raise UnknownField(f"no field for {key!r} in manifest")
        ranges.extend(ByteRange(fi, start * VALUE_SIZE, count * VALUE_SIZE) for start, count in runs)
    return AccessPlan(tuple(coalesce(ranges)))


# ---------------------------------------------------------------------------
# store
# ---------------------------------------------------------------------------


def field_values(fi: int, cells: int) -> list[float]:
    base = fi * 1_000_000
    return [float(base + ci) for ci in range(cells)]


def write_mock_store(m: FieldStoreManifest, path: str | os.PathLike) -> Path:
    """Write the manifest and its synthetic data file into directory ``path``."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    cells = m.grid.cell_count
    with open(root / m.data_path, "wb") as fh:
        for fi in range(len(m.fields)):
            fh.write(HEADER.pack(MAGIC, fi, cells))
            fh.write(struct.pack(f"<{cells}d", *field_values(fi, cells)))
    save_manifest(m, root / MANIFEST_NAME)
    return root


@dataclass
class ReadCounter:
    payload_bytes: int = 0
    header_bytes: int = 0
    reads: int = 0


def execute(
    p: AccessPlan,
    store_path: str | os.PathLike,
    counter: ReadCounter | None = None,
) -> dict[tuple[int, int], float]:
    """Read exactly the planned ranges; returns ``{(field, cell): value}``.

    ``store_path`` is the data file. Each touched field's header is read
    once to validate it; ``counter`` accumulates bytes read.
    """
    counter = counter if counter is not None else ReadCounter()
    out: dict[tuple[int, int], float] = {}
    if not p.ranges:
        return out
    with open(store_path, "rb") as fh:
        head = fh.read(HEADER_SIZE)
        counter.header_bytes += len(head)
        counter.reads += 1
        if len(head) < HEADER_SIZE:
            raise ShortRead("store shorter than one field header")
        magic, _, cells = HEADER.unpack(head)
        if magic != MAGIC:
            raise CorruptField("bad magic in field 0")
        field_size = HEADER_SIZE + VALUE_SIZE * cells
        checked = {0}
        for r in p.ranges:
            base = r.field_index * field_size
            if r.field_index not in checked:
                fh.seek(base)
                head = fh.read(HEADER_SIZE)
                counter.header_bytes += len(head)
                counter.reads += 1
                if len(head) < HEADER_SIZE:
                    raise ShortRead(f"field {r.field_index} header truncated")
                magic, fi, n = HEADER.unpack(head)
                if magic != MAGIC or fi != r.field_index or n != cells:
                    raise CorruptField(f"field {r.field_index} header does not match")
                checked.add(r.field_index)
            if r.offset % VALUE_SIZE or r.length % VALUE_SIZE or r.offset + r.length > VALUE_SIZE * cells:
                raise ValueError(f"range {r} does not align with field layout")
            fh.seek(base + HEADER_SIZE + r.offset)
            data = fh.read(r.length)
            counter.payload_bytes += len(data)
            counter.reads += 1
            if len(data) < r.length:
                raise ShortRead(f"field {r.field_index}: wanted {r.length} bytes, got {len(data)}")
            first = r.offset // VALUE_SIZE
            for k, v in enumerate(struct.unpack(f"<{r.length // VALUE_SIZE}d", data)):
                out[(r.field_index, first + k)] = v
    return out


def read_full_fields(store_path: str | os.PathLike, field_indices: Iterable[int], cells: int,
                     counter: ReadCounter | None = None) -> dict[tuple[int, int], float]:
    """Baseline: decode whole fields, as native full-field access would."""
    full = AccessPlan(tuple(ByteRange(fi, 0, cells * VALUE_SIZE) for fi in sorted(set(field_indices))))
    return execute(full, store_path, counter)
