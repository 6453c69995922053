"""
On-disk formats shared by datasets, checkpoints, configs and run manifests.

Key-value files
    One ``dotted.key=value`` pair per line, ``#`` comments, parsed with
    python-dotenv (no interpolation). Values are JSON scalars, bare strings,
    or single-quoted JSON lists. Nested mappings are flattened into dotted
    keys; ``None`` values are omitted.

Array files
    ``.npz`` archives whose members are ``.npy`` arrays: a magic string,
    a header with the little-endian dtype code and shape, then row-major data.
"""
import hashlib
import io
import json
from pathlib import Path
from typing import Any, Mapping

import numpy as np
from dotenv import dotenv_values

from errors import DataError

_BARE_FORBIDDEN = set(" \t#'\"\\=")


def _encode_value(value: Any) -> str:
    if isinstance(value, (bool, int, float)):
        return json.dumps(value)
    if isinstance(value, (list, tuple)):
        text = json.dumps(list(value), separators=(",", ":"))
        return "'" + text.replace("\\", "\\\\").replace("'", "\\'") + "'"
    text = str(value)
    try:
        json.loads(text)
        looks_like_json = True
    except ValueError:
        looks_like_json = False
    if text and not looks_like_json and not (_BARE_FORBIDDEN & set(text)):
        return text
    quoted = json.dumps(text)
    return "'" + quoted.replace("\\", "\\\\").replace("'", "\\'") + "'"


def _decode_value(text: str | None) -> Any:
    if text is None:
        return None
    try:
        return json.loads(text)
    except ValueError:
        return text


def flatten(nested: Mapping[str, Any], prefix: str = "") -> dict[str, Any]:
    """Flatten nested mappings into dotted keys, dropping None values."""
    flat: dict[str, Any] = {}
    for key, value in nested.items():
        name = f"{prefix}{key}"
        if value is None:
            continue
        if isinstance(value, Mapping):
            flat.update(flatten(value, prefix=f"{name}."))
        else:
            flat[name] = value
    return flat


def unflatten(flat: Mapping[str, Any]) -> dict[str, Any]:
    nested: dict[str, Any] = {}
    for key, value in flat.items():
        node = nested
        parts = key.split(".")
        for part in parts[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise DataError(f"key {key!r} collides with a scalar at {part!r}")
            node = child
        node[parts[-1]] = value
    return nested


def dumps_kv(nested: Mapping[str, Any], header: str | None = None) -> str:
    lines = []
    if header:
        lines.extend(f"# {line}" for line in header.splitlines())
    flat = flatten(nested)
    for key in sorted(flat):
        lines.append(f"{key}={_encode_value(flat[key])}")
    return "\n".join(lines) + "\n"


def dump_kv(nested: Mapping[str, Any], path: Path, header: str | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_kv(nested, header=header), encoding="utf-8")
    return path


def loads_kv(text: str) -> dict[str, Any]:
    raw = dotenv_values(stream=io.StringIO(text), interpolate=False)
    return unflatten({key: _decode_value(value) for key, value in raw.items()})


def load_kv(path: Path) -> dict[str, Any]:
    """Read a key-value file back into nested dicts."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"missing key-value file: {path}")
    return loads_kv(path.read_text(encoding="utf-8"))


# ----- Arrays -----


def save_arrays(path: Path, arrays: Mapping[str, np.ndarray], dtype: str = "<f8") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        np.savez(fh, **{name: np.ascontiguousarray(a, dtype=dtype) for name, a in arrays.items()})
    return path


def load_arrays(path: Path) -> dict[str, np.ndarray]:
    path = Path(path)
    try:
        with np.load(path, allow_pickle=False) as archive:
            return {name: archive[name] for name in archive.files}
    except FileNotFoundError as e:
        raise DataError(f"missing array file: {path}") from e
    except Exception as e:
        raise DataError(f"corrupt array file {path}: {e}") from e


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
