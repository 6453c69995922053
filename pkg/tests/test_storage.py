import numpy as np
import pytest

from errors import DataError
from storage import dump_kv, dumps_kv, load_arrays, load_kv, loads_kv, save_arrays, sha256_file, sha256_text


def test_kv_round_trip_nested_values():
    nested = {
        "kind": "ecg",
        "note": "has spaces and a # hash",
        "quote": "it's \"quoted\"",
        "n": 10,
        "rate": 500.0,
        "tiny": 1e-05,
        "flag": True,
        "numeric_text": "123",
        "names": ["maternal", "fetal"],
        "grid": [[1, 2], [3, 4]],
        "split": {"train": [0, 2], "test": [1]},
        "skipped": None,
    }
    back = loads_kv(dumps_kv(nested, header="header\nsecond line"))
    expected = {k: v for k, v in nested.items() if v is not None}
    assert back == expected


def test_kv_sorted_and_commented():
    text = dumps_kv({"b": 1, "a": {"z": 2, "y": 3}}, header="title")
    lines = text.splitlines()
    assert lines[0] == "# title"
    assert lines[1:] == ["a.y=3", "a.z=2", "b=1"]


def test_kv_file_helpers(tmp_path):
    path = dump_kv({"x": {"y": [1.5, 2.5]}}, tmp_path / "sub" / "m.txt")
    assert load_kv(path) == {"x": {"y": [1.5, 2.5]}}
    with pytest.raises(DataError):
        load_kv(tmp_path / "missing.txt")


def test_arrays_keep_dtype(tmp_path):
    a = np.arange(6, dtype=np.float64).reshape(2, 3) / 7
    save_arrays(tmp_path / "f8.npz", {"a": a})
    save_arrays(tmp_path / "f4.npz", {"a": a}, dtype="<f4")
    assert np.array_equal(load_arrays(tmp_path / "f8.npz")["a"], a)
    loaded = load_arrays(tmp_path / "f4.npz")["a"]
    assert loaded.dtype == np.dtype("<f4")
    assert np.array_equal(loaded, a.astype(np.float32))


def test_arrays_missing_or_corrupt(tmp_path):
    with pytest.raises(DataError):
        load_arrays(tmp_path / "nope.npz")
    bad = tmp_path / "bad.npz"
    bad.write_bytes(b"not an archive")
    with pytest.raises(DataError):
        load_arrays(bad)


def test_hashes(tmp_path):
    path = tmp_path / "t.txt"
    path.write_text("abc", encoding="utf-8")
    assert sha256_file(path) == sha256_text("abc")
    assert sha256_text("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
