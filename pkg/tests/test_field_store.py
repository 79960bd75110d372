import json

import numpy as np
import pytest

from core.exceptions import CoordinateCollision, FieldFormatError
from models.schemas import Region, ScaledPoint
from services.field_sampler import sample_field, window_region
from services.field_store import (
    format_float,
    load_field,
    polymer_csv,
    profile_csv,
    save_field,
    save_profile,
    sidecar_path,
)
from services.scaling import polymer
from services.weight_profile import weight_profile


def test_format_float_keeps_every_bit():
    value = 0.1 + 0.2
    assert float(format_float(value)) == value


def test_saved_field_loads_bit_exact(tmp_path):
    region = Region.diagonal_strip(n=50, half_width=10, t_max=1.0)
    field = sample_field(region, rate=1.0, seed=12)
    target = save_field(field, tmp_path / "field.csv", metadata={"note": "kept"})

    loaded = load_field(target)
    assert loaded.a.tobytes() == field.a.tobytes()
    assert loaded.b.tobytes() == field.b.tobytes()
    assert loaded.region == field.region
    assert loaded.seed == 12
    assert json.loads(sidecar_path(target).read_text())["metadata"] == {"note": "kept"}


def test_colliding_rows_are_rejected(tmp_path):
    field = sample_field(Region.rectangle(0, 5, 0, 5), seed=1)
    target = save_field(field, tmp_path / "field.csv")
    lines = target.read_text().splitlines()
    a0, _ = lines[1].split(",")
    _, b1 = lines[2].split(",")
    lines.append(f"{a0},{b1}")
    target.write_text("\n".join(lines) + "\n")
    meta = json.loads(sidecar_path(target).read_text())
    meta["count"] = len(lines) - 1
    sidecar_path(target).write_text(json.dumps(meta))

    with pytest.raises(CoordinateCollision):
        load_field(target)


def test_missing_sidecar(tmp_path):
    target = tmp_path / "bare.csv"
    target.write_text("a,b\n1,2\n")
    with pytest.raises(FieldFormatError):
        load_field(target)


def test_bad_header_and_count(tmp_path):
    field = sample_field(Region.rectangle(0, 5, 0, 5), seed=2)
    target = save_field(field, tmp_path / "field.csv")
    rows = target.read_text().splitlines()

    target.write_text("\n".join(["x,y", *rows[1:]]) + "\n")
    with pytest.raises(FieldFormatError):
        load_field(target)

    target.write_text("\n".join(rows[:-1]) + "\n")
    with pytest.raises(FieldFormatError):
        load_field(target)


def test_polymer_and_profile_exports(tmp_path):
    n = 30.0
    field = sample_field(Region.rectangle(0, 2 * n, 0, 2 * n), seed=3)
    p = polymer(field, n, ScaledPoint(x=0.0, t=0.0), ScaledPoint(x=0.0, t=1.0))
    rows = polymer_csv(p).splitlines()
    assert rows[0] == "t,x"
    assert len(rows) == p.t.size + 1

    profile = weight_profile(field, n)
    text = profile_csv(profile).splitlines()
    assert text[0] == "d_i,X_i"
    assert float(text[1].split(",")[0]) == 1.0
    assert float(text[-1].split(",")[0]) == 2.0

    target = save_profile(profile, tmp_path / "profile.csv")
    assert json.loads(sidecar_path(target).read_text()) == {"n": n, "seed": 3, "k_trunc": None}


def test_strip_profile_records_truncation(tmp_path):
    n = 2000.0
    region = window_region(n, 0.0, 2.0, k_trunc=1.0)
    field = sample_field(region, rate=1e-9, seed=0)
    profile = weight_profile(field, n)
    assert profile.k_trunc == pytest.approx(1.0, rel=1e-6)
    assert np.isclose(profile.n, n)
