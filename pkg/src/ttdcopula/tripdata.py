"""Trip ingestion, complete-drive assembly and synthetic datasets."""
from __future__ import annotations

import csv
import io
import json
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .copulas import CopulaModel, copula_sample
from .marginals import GmmParams, gmm_cdf, gmm_quantile

HEADER = ("drive_id", "segment_id", "travel_time_s")


class TripDataError(ValueError):
    """Base class for ingestion and assembly errors."""


class TripParseError(TripDataError):
    pass


class TripDomainError(TripDataError):
    pass


class DuplicateTripError(TripDataError):
    pass


class EmptySeriesError(TripDataError):
    pass


@dataclass(frozen=True)
class TripRecord:
    drive_id: str
    segment_id: int
    travel_time: float

    def __post_init__(self):
        if not (self.travel_time > 0 and np.isfinite(self.travel_time)):
            raise TripDomainError(f"travel time must be positive and finite, got {self.travel_time!r}")


@dataclass(frozen=True)
class SegmentSeries:
    """Complete trips over an ordered set of segments (rows = drives)."""

    segment_ids: tuple[int, ...]
    times: np.ndarray
    drive_ids: tuple[str, ...] = ()
    n_discarded: int = 0

    def __post_init__(self):
        t = np.array(self.times, dtype=float)
        ids = tuple(int(s) for s in self.segment_ids)
        if t.ndim != 2 or t.shape[1] != len(ids):
            raise ValueError("times must be an N x S matrix matching segment_ids")
        if t.shape[0] < 2:
            raise ValueError("a series needs at least two complete trips")
        if not np.all(np.isfinite(t) & (t > 0)):
            raise ValueError("travel times must be finite and positive")
        drives = tuple(self.drive_ids) or tuple(f"row{i:06d}" for i in range(t.shape[0]))
        if len(drives) != t.shape[0]:
            raise ValueError("one drive id per row is required")
        t.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "segment_ids", ids)
        object.__setattr__(self, "drive_ids", drives)

    @property
    def n(self) -> int:
        return self.times.shape[0]

    @property
    def s(self) -> int:
        return self.times.shape[1]

    def column(self, segment_id: int) -> np.ndarray:
        return self.times[:, self.segment_ids.index(segment_id)]

    def select(self, segment_ids) -> "SegmentSeries":
        idx = [self.segment_ids.index(s) for s in segment_ids]
        return SegmentSeries(tuple(segment_ids), self.times[:, idx], self.drive_ids,
                             self.n_discarded)

    def to_records(self) -> list[TripRecord]:
        return [TripRecord(d, s, float(t))
                for d, row in zip(self.drive_ids, self.times)
                for s, t in zip(self.segment_ids, row)]


def _open_text(source):
    if isinstance(source, (str, Path)):
        return open(source, newline="", encoding="utf-8")
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(source.decode("utf-8"), newline="")
    if isinstance(source, io.TextIOBase):
        return source
    return io.TextIOWrapper(source, encoding="utf-8", newline="")


def load_trips(source) -> list[TripRecord]:
    """Parse ``drive_id,segment_id,travel_time_s`` CSV.

    ``source`` may be a path, raw bytes or a binary/text stream. Errors name
    the offending line (the header is line 1).
    """
    fh = _open_text(source)
    try:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != HEADER:
            raise TripParseError(f"line 1: expected header {','.join(HEADER)!r}, got {header!r}")
        records = []
        seen = {}
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise TripParseError(f"line {line}: expected 3 fields, got {len(row)}")
            drive, seg, value = (c.strip() for c in row)
            if not drive:
                raise TripParseError(f"line {line}: empty drive_id")
            try:
                seg_id = int(seg)
            except ValueError:
                raise TripParseError(f"line {line}: segment_id {seg!r} is not an integer") from None
            try:
                tt = float(value)
            except ValueError:
                raise TripParseError(f"line {line}: travel time {value!r} is not numeric") from None
            if not np.isfinite(tt):
                raise TripParseError(f"line {line}: travel time {value!r} is not finite")
            if seg_id < 1:
                raise TripDomainError(f"line {line}: segment_id must be >= 1, got {seg_id}")
            if tt <= 0:
                raise TripDomainError(f"line {line}: travel time must be positive, got {tt!r}")
            key = (drive, seg_id)
            if key in seen:
                raise DuplicateTripError(
                    f"line {line}: duplicate record for drive {drive!r} segment {seg_id} "
                    f"(first seen on line {seen[key]})")
            seen[key] = line
            records.append(TripRecord(drive, seg_id, tt))
        return records
    finally:
        if fh is not source:
            fh.close()


def write_trips(data, dest) -> None:
    """Write a :class:`SegmentSeries` or list of records as trip CSV."""
    records = data.to_records() if isinstance(data, SegmentSeries) else data
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER)
    for r in records:
        writer.writerow((r.drive_id, r.segment_id, repr(float(r.travel_time))))
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(buf.getvalue(), encoding="utf-8")
    else:
        dest.write(buf.getvalue())


def assemble_series(records, segment_ids) -> SegmentSeries:
    """Keep drives that cover every requested segment exactly once."""
    segment_ids = tuple(int(s) for s in segment_ids)
    if not segment_ids:
        raise ValueError("segment_ids must not be empty")
    if len(set(segment_ids)) != len(segment_ids):
        raise ValueError("segment_ids must be distinct")
    wanted = set(segment_ids)
    by_drive = defaultdict(dict)
    counts = defaultdict(lambda: defaultdict(int))
    for r in records:
        if r.segment_id in wanted:
            by_drive[r.drive_id][r.segment_id] = r.travel_time
            counts[r.drive_id][r.segment_id] += 1
    all_drives = {r.drive_id for r in records}
    complete = sorted(d for d, segs in by_drive.items()
                      if len(segs) == len(segment_ids) and all(c == 1 for c in counts[d].values()))
    if not complete:
        raise EmptySeriesError(f"no drive covers all segments {list(segment_ids)}")
    if len(complete) < 2:
        raise EmptySeriesError(f"only one drive covers all segments {list(segment_ids)}")
    times = np.array([[by_drive[d][s] for s in segment_ids] for d in complete])
    return SegmentSeries(segment_ids, times, tuple(complete), len(all_drives) - len(complete))


@dataclass(frozen=True)
class SynthSpec:
    marginals: tuple[GmmParams, ...]
    coupling: CopulaModel
    n_trips: int
    seed: int = 42
    segment_ids: tuple[int, ...] | None = None
    gps_artifact: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "marginals", tuple(self.marginals))
        if self.coupling.dim != len(self.marginals):
            raise ValueError(f"coupling has dimension {self.coupling.dim} but "
                             f"{len(self.marginals)} marginals were given")
        if int(self.n_trips) != self.n_trips or self.n_trips < 2:
            raise ValueError("n_trips must be an integer >= 2")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if not 0 <= self.gps_artifact <= 1:
            raise ValueError("gps_artifact must lie in [0, 1]")
        ids = self.segment_ids or tuple(range(1, len(self.marginals) + 1))
        if len(ids) != len(self.marginals):
            raise ValueError("one segment id per marginal is required")
        object.__setattr__(self, "segment_ids", tuple(int(s) for s in ids))

    def to_dict(self) -> dict:
        return {
            "segments": [{"segment_id": s, "gmm": g.to_dict()}
                         for s, g in zip(self.segment_ids, self.marginals)],
            "coupling": self.coupling.to_dict(),
            "n_trips": self.n_trips,
            "seed": self.seed,
            "gps_artifact": self.gps_artifact,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SynthSpec":
        segs = d["segments"]
        return cls(
            marginals=tuple(GmmParams.from_dict(s["gmm"]) for s in segs),
            coupling=CopulaModel.from_dict(d["coupling"]),
            n_trips=int(d["n_trips"]),
            seed=int(d.get("seed", 42)),
            segment_ids=tuple(int(s["segment_id"]) for s in segs),
            gps_artifact=float(d.get("gps_artifact", 0.0)),
        )

    @classmethod
    def from_json(cls, path) -> "SynthSpec":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def positive_quantile(params: GmmParams, u):
    """Quantile of the mixture conditioned on a positive travel time."""
    f0 = float(gmm_cdf(params, 0.0))
    p = f0 + np.asarray(u, dtype=float) * (1.0 - f0)
    return gmm_quantile(params, np.clip(p, np.nextafter(f0, 1.0), np.nextafter(1.0, 0.0)))


def synthesize(spec: SynthSpec) -> SegmentSeries:
    """Draw ``n_trips`` complete drives from the marginal + copula ground truth.

    Copula coordinates are mapped through each segment's mixture quantile
    restricted to positive times.  With ``gps_artifact = p`` a fraction ``p``
    of drives gets one consecutive segment pair rewritten so the second time
    is proportional to the first (equal speed over both segments, ratio of
    the marginal medians standing in for the length ratio).
    """
    ss = np.random.SeedSequence(int(spec.seed))
    copula_seed, artifact_seed = ss.spawn(2)
    u = copula_sample(spec.coupling, spec.n_trips, copula_seed)
    times = np.column_stack([positive_quantile(g, u[:, i]) for i, g in enumerate(spec.marginals)])
    if spec.gps_artifact > 0 and times.shape[1] >= 2:
        rng = np.random.default_rng(artifact_seed)
        n_hit = int(round(spec.gps_artifact * spec.n_trips))
        rows = rng.choice(spec.n_trips, size=n_hit, replace=False)
        first = rng.integers(0, times.shape[1] - 1, size=n_hit)
        medians = np.array([gmm_quantile(g, 0.5) for g in spec.marginals])
        times[rows, first + 1] = times[rows, first] * medians[first + 1] / medians[first]
    width = len(str(spec.n_trips))
    drives = tuple(f"d{i:0{width}d}" for i in range(1, spec.n_trips + 1))
    return SegmentSeries(spec.segment_ids, times, drives, 0)
