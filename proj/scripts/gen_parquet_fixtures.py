#!/usr/bin/env python3
"""Writes the committed parquet fixtures with pyarrow.

Regenerate with:  python3 scripts/gen_parquet_fixtures.py
Outputs land in tests/fixtures/ and are committed; tests never require
pyarrow at runtime. A sidecar JSON records pyarrow's own view of each file
(leaf paths, row counts) so tests compare against an independent reader.
"""

import decimal
import json
import pathlib
import random

import pyarrow as pa
import pyarrow.parquet as pq

ROOT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures"

rng = random.Random(20240601)

CODES = ["LAB//50912", "ICU//ADMIT", "MED//insulin", "DX//I10", "PROC//0040"]


def meds_table(rows, seed):
    r = random.Random(seed)
    return pa.table(
        {
            "subject_id": pa.array([r.randrange(10**7, 10**8) for _ in range(rows)], pa.int64()),
            "time": pa.array([1374616800000000 + i * 60_000_000 for i in range(rows)], pa.timestamp("us")),
            "code": pa.array([r.choice(CODES) for _ in range(rows)], pa.string()),
            "numeric_value": pa.array([round(r.uniform(0, 300), 2) for _ in range(rows)], pa.float32()),
            "text_value": pa.array([None if i % 3 else "note" for i in range(rows)], pa.string()),
        }
    )


def write(path, table, **kwargs):
    path.parent.mkdir(parents=True, exist_ok=True)
    pq.write_table(table, path, **kwargs)
    return path


def leaf_paths(schema):
    out = []

    def walk(field, prefix):
        t = field.type
        if pa.types.is_struct(t):
            for child in t:
                walk(child, prefix + field.name + ".")
        elif pa.types.is_list(t) or pa.types.is_large_list(t):
            value = t.value_field
            if pa.types.is_struct(value.type):
                for child in value.type:
                    walk(child, prefix + field.name + ".")
            else:
                out.append(prefix + field.name)
        else:
            out.append(prefix + field.name)

    for field in schema:
        walk(field, "")
    return out


manifest = {}

meds_dir = ROOT / "meds" / "data"
for i in range(5):
    rows = 200
    path = write(meds_dir / f"shard_{i}.parquet", meds_table(rows, seed=100 + i))
    meta = pq.read_metadata(path)
    manifest[str(path.relative_to(ROOT))] = {
        "num_rows": meta.num_rows,
        "leaves": leaf_paths(pq.read_schema(path)),
    }

types_table = pa.table(
    {
        "c_bool": pa.array([True, False, None], pa.bool_()),
        "c_int8": pa.array([1, -2, 3], pa.int8()),
        "c_int16": pa.array([100, -200, 300], pa.int16()),
        "c_int32": pa.array([1 << 20, -5, 7], pa.int32()),
        "c_int64": pa.array([1 << 40, -9, 11], pa.int64()),
        "c_uint8": pa.array([1, 2, 255], pa.uint8()),
        "c_uint16": pa.array([1, 2, 65535], pa.uint16()),
        "c_uint32": pa.array([1, 2, 4000000000], pa.uint32()),
        "c_uint64": pa.array([1, 2, 1 << 50], pa.uint64()),
        "c_float": pa.array([1.5, 2.5, None], pa.float32()),
        "c_double": pa.array([1.25, 2.75, 3.0], pa.float64()),
        "c_string": pa.array(["a", "b", None], pa.string()),
        "c_binary": pa.array([b"\x00\x01", b"\xff", None], pa.binary()),
        "c_date": pa.array([19000, 19001, None], pa.date32()),
        "c_time": pa.array([1_000_000, 2_000_000, None], pa.time64("us")),
        "c_ts_ms": pa.array([1700000000000, 1700000000001, None], pa.timestamp("ms")),
        "c_decimal": pa.array([decimal.Decimal("1.25"), decimal.Decimal("2.50"), None],
                              pa.decimal128(10, 2)),
        "c_struct": pa.array(
            [{"lat": 42.36, "lon": -71.06}, None, {"lat": 0.0, "lon": 0.0}],
            pa.struct([("lat", pa.float64()), ("lon", pa.float64())]),
        ),
        "c_list": pa.array([[1, 2], [], None], pa.list_(pa.int64())),
        "c_list_struct": pa.array(
            [[{"x": 1, "y": "a"}], None, [{"x": 2, "y": "b"}, {"x": 3, "y": None}]],
            pa.list_(pa.struct([("x", pa.int64()), ("y", pa.string())])),
        ),
    }
)
path = write(ROOT / "parquet_types" / "types.parquet", types_table)
meta = pq.read_metadata(path)
manifest[str(path.relative_to(ROOT))] = {
    "num_rows": meta.num_rows,
    "leaves": leaf_paths(pq.read_schema(path)),
}

legacy_table = pa.table(
    {
        "event_time": pa.array([1700000000000000, 1700000001000000], pa.timestamp("us")),
        "label": pa.array(["x", "y"], pa.string()),
    }
)
path = write(
    ROOT / "parquet_types" / "legacy_int96.parquet",
    legacy_table,
    use_deprecated_int96_timestamps=True,
)
meta = pq.read_metadata(path)
manifest[str(path.relative_to(ROOT))] = {
    "num_rows": meta.num_rows,
    "leaves": leaf_paths(pq.read_schema(path)),
}

mixed_dir = ROOT / "meds_mixed" / "data"
write(mixed_dir / "shard_0.parquet", meds_table(50, seed=7))
write(mixed_dir / "extra.parquet", pa.table({"only_col": pa.array([1, 2, 3], pa.int64())}))
for name in ["shard_0.parquet", "extra.parquet"]:
    p = mixed_dir / name
    meta = pq.read_metadata(p)
    manifest[str(p.relative_to(ROOT))] = {
        "num_rows": meta.num_rows,
        "leaves": leaf_paths(pq.read_schema(p)),
    }

(ROOT / "parquet_manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
print(f"wrote {len(manifest)} fixtures under {ROOT}")
