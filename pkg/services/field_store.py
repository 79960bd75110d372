"""
Field Store Service - CSV codecs for point fields, polymers and weight profiles
"""
import csv
import io
import json
import logging
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from core.exceptions import FieldFormatError, UsageError
from models.schemas import PointField, Polymer, Region, WeightProfile


logger = logging.getLogger(__name__)

FLOAT_FORMAT = ".17g"


def format_float(value: float) -> str:
    """17 significant digits: parses back to the same double"""
    return format(float(value), FLOAT_FORMAT)


def sidecar_path(path: str | Path) -> Path:
    return Path(path).with_suffix(".json")


# =============================================================================
# Point fields
# =============================================================================

def field_csv(field: PointField) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["a", "b"])
    for a, b in zip(field.a.tolist(), field.b.tolist()):
        writer.writerow([format_float(a), format_float(b)])
    return buffer.getvalue()


def field_sidecar(field: PointField) -> dict[str, Any]:
    return {
        "region": field.region.describe(),
        "rate": field.rate,
        "seed": field.seed,
        "count": field.count
    }


def save_field(
    field: PointField,
    path: str | Path,
    metadata: dict[str, Any] | None = None
) -> Path:
    """Write `path` (a,b rows) and its JSON sidecar; metadata rides along in the sidecar"""
    target = Path(path)
    sidecar = field_sidecar(field)
    if metadata:
        sidecar["metadata"] = metadata
    write_text(target, field_csv(field))
    write_text(sidecar_path(target), json.dumps(sidecar, indent=2) + "\n")
    logger.info("saved %d points to %s", field.count, target)
    return target


def load_field(path: str | Path) -> PointField:
    """
    Read a field written by save_field. Coordinates shared by two points
    are rejected rather than perturbed.
    """
    target = Path(path)
    meta = _read_sidecar(sidecar_path(target))

    try:
        region = Region(**meta["region"])
        rate = float(meta.get("rate", 1.0))
        seed = int(meta.get("seed", 0))
    except (KeyError, TypeError, ValueError, ValidationError) as e:
        raise FieldFormatError(f"bad sidecar for {target}: {e}") from e

    points = []
    for row in _read_rows(target, ["a", "b"]):
        points.append((float(row[0]), float(row[1])))

    if "count" in meta and int(meta["count"]) != len(points):
        raise FieldFormatError(f"{target}: sidecar says {meta['count']} points, file has {len(points)}")

    return PointField.from_points(points, region=region, seed=seed, rate=rate)


# =============================================================================
# Polymers and profiles
# =============================================================================

def polymer_csv(p: Polymer) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["t", "x"])
    for t, x in zip(p.t.tolist(), p.x.tolist()):
        writer.writerow([format_float(t), format_float(x)])
    return buffer.getvalue()


def profile_header(profile: WeightProfile) -> dict[str, Any]:
    return {"n": profile.n, "seed": profile.seed, "k_trunc": profile.k_trunc}


def profile_csv(profile: WeightProfile) -> str:
    """Interpolation nodes d_i with X_n(d_i), d_0 = 1 and d_m = 2 included"""
    times, levels = profile.nodes
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["d_i", "X_i"])
    for d, x in zip(times.tolist(), levels.tolist()):
        writer.writerow([format_float(d), int(x)])
    return buffer.getvalue()


def save_profile(profile: WeightProfile, path: str | Path) -> Path:
    target = Path(path)
    write_text(target, profile_csv(profile))
    write_text(sidecar_path(target), json.dumps(profile_header(profile), indent=2) + "\n")
    return target


# =============================================================================
# Helpers
# =============================================================================

def write_text(path: Path, content: str) -> None:
    try:
        path.write_text(content, encoding="utf-8")
    except OSError as e:
        raise UsageError(f"unwritable destination {path}: {e}") from e


def _read_sidecar(path: Path) -> dict[str, Any]:
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise FieldFormatError(f"missing sidecar {path}") from e
    except (OSError, json.JSONDecodeError) as e:
        raise FieldFormatError(f"unreadable sidecar {path}: {e}") from e


def _read_rows(path: Path, header: list[str]) -> list[list[str]]:
    try:
        with path.open(newline="", encoding="utf-8") as handle:
            rows = list(csv.reader(handle))
    except OSError as e:
        raise FieldFormatError(f"unreadable field file {path}: {e}") from e

    if not rows or [cell.strip() for cell in rows[0]] != header:
        raise FieldFormatError(f"{path}: expected header {','.join(header)}")

    body = []
    for line_no, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise FieldFormatError(f"{path}:{line_no}: expected {len(header)} columns, got {len(row)}")
        try:
            [float(cell) for cell in row]
        except ValueError as e:
            raise FieldFormatError(f"{path}:{line_no}: {e}") from e
        body.append(row)
    return body
