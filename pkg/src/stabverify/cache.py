"""Content-hashed on-disk cache for complexes and Smith normal form results."""

from __future__ import annotations

import hashlib
import json
import logging
import os
from pathlib import Path
from typing import Callable

import numpy as np

from .builders import Splitting
from .complexes import SimplicialComplex
from .linalg import Submodule
from .rings import Ring

log = logging.getLogger(__name__)

CACHE_ENV = "STABVERIFY_CACHE"
FORMAT_VERSION = 1
MODES = ("read", "write", "off")


class CacheError(ValueError):
    pass


def _encode_sub(s: Submodule) -> dict:
    return {"n": s.n, "codes": sorted(s.codes),
            "witness": None if s.witness is None else [list(v) for v in s.witness],
            "rank": s.free_rank}


def _decode_sub(ring: Ring, d: dict) -> Submodule:
    s = Submodule(ring, d["n"], frozenset(d["codes"]))
    if d["witness"] is not None:
        s.witness = tuple(tuple(v) for v in d["witness"])
    s.free_rank = d["rank"]
    return s


def encode_payload(p) -> dict:
    if isinstance(p, Submodule):
        return {"t": "sub", **_encode_sub(p)}
    if isinstance(p, Splitting):
        return {"t": "split", "P": _encode_sub(p.P), "Q": _encode_sub(p.Q)}
    return {"t": "vec", "v": [int(x) for x in p]}


def decode_payload(ring: Ring, d: dict):
    if d["t"] == "sub":
        return _decode_sub(ring, d)
    if d["t"] == "split":
        return Splitting(_decode_sub(ring, d["P"]), _decode_sub(ring, d["Q"]))
    return tuple(d["v"])


def _encode_meta(value):
    if isinstance(value, np.ndarray):
        return {"__nd__": value.tolist(), "dtype": str(value.dtype)}
    if isinstance(value, Ring):
        return {"__ring__": value.name}
    if isinstance(value, dict):
        return {str(k): _encode_meta(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_encode_meta(v) for v in value]
    if isinstance(value, (np.integer,)):
        return int(value)
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    return {"__repr__": repr(value)}


def _decode_meta(ring: Ring, value):
    if isinstance(value, dict):
        if "__nd__" in value:
            return np.array(value["__nd__"], dtype=value["dtype"])
        if "__ring__" in value:
            return ring
        if "__repr__" in value:
            return value["__repr__"]
        return {k: _decode_meta(ring, v) for k, v in value.items()}
    if isinstance(value, list):
        return [_decode_meta(ring, v) for v in value]
    return value


def _digest(arrays: list[np.ndarray], *texts: str) -> str:
    h = hashlib.sha256()
    for a in arrays:
        h.update(str(a.shape).encode())
        h.update(np.ascontiguousarray(a, dtype=np.int64).tobytes())
    for t in texts:
        h.update(t.encode())
    return h.hexdigest()


class Cache:
    """Directory cache; ``mode`` is ``read`` (never writes), ``write`` (read and write) or ``off``."""

    def __init__(self, root: str | os.PathLike | None, mode: str = "write"):
        if mode not in MODES:
            raise CacheError(f"cache mode must be one of {MODES}")
        env = os.environ.get(CACHE_ENV)
        if env:
            root = env
        self.root = Path(root) if root and mode != "off" else None
        self.mode = mode if self.root is not None else "off"
        if self.mode == "write":
            self.root.mkdir(parents=True, exist_ok=True)

    @property
    def enabled(self) -> bool:
        return self.mode != "off"

    @staticmethod
    def key(_kind: str, **params) -> str:
        text = json.dumps({"_kind": _kind, "format": FORMAT_VERSION, **params}, sort_keys=True, default=str)
        return hashlib.sha256(text.encode()).hexdigest()[:32]

    def _path(self, key: str, suffix: str) -> Path:
        return self.root / f"{key}{suffix}"

    # complexes -------------------------------------------------------

    def store_complex(self, key: str, x: SimplicialComplex) -> None:
        if self.mode != "write":
            return
        payloads = json.dumps([encode_payload(p) for p in (x.payloads or [])])
        meta = json.dumps(_encode_meta(x.meta))
        arrays = [np.asarray(s, dtype=np.int64) for s in x.simplices]
        digest = _digest(arrays, payloads, meta, x.name)
        data = {f"s{k}": a for k, a in enumerate(arrays)}
        tmp = self._path(key, ".tmp.npz")
        np.savez(tmp, payloads=np.array(payloads), meta=np.array(meta), name=np.array(x.name),
                 digest=np.array(digest), levels=np.array(len(arrays)), **data)
        os.replace(tmp, self._path(key, ".npz"))

    def load_complex(self, key: str, ring: Ring) -> SimplicialComplex | None:
        if not self.enabled:
            return None
        path = self._path(key, ".npz")
        if not path.exists():
            return None
        try:
            with np.load(path, allow_pickle=False) as z:
                levels = int(z["levels"])
                arrays = [z[f"s{k}"].astype(np.int64) for k in range(levels)]
                payloads, meta, name = str(z["payloads"]), str(z["meta"]), str(z["name"])
                digest = str(z["digest"])
            if _digest(arrays, payloads, meta, name) != digest:
                raise CacheError("content hash mismatch")
            decoded = [decode_payload(ring, d) for d in json.loads(payloads)]
            return SimplicialComplex(arrays, decoded or None, name, _decode_meta(ring, json.loads(meta)))
        except Exception as exc:
            log.warning("corrupt cache entry %s (%s); rebuilding", path.name, exc)
            return None

    def complex(self, key: str, ring: Ring, build: Callable[[], SimplicialComplex]) -> SimplicialComplex:
        x = self.load_complex(key, ring)
        if x is None:
            x = build()
            self.store_complex(key, x)
        return x

    # Smith normal forms ----------------------------------------------

    def store_json(self, key: str, obj: dict) -> None:
        if self.mode != "write":
            return
        body = json.dumps(obj, sort_keys=True)
        wrapped = json.dumps({"digest": hashlib.sha256(body.encode()).hexdigest(), "body": body})
        tmp = self._path(key, ".tmp.json")
        tmp.write_text(wrapped)
        os.replace(tmp, self._path(key, ".json"))

    def load_json(self, key: str) -> dict | None:
        if not self.enabled:
            return None
        path = self._path(key, ".json")
        if not path.exists():
            return None
        try:
            wrapped = json.loads(path.read_text())
            body = wrapped["body"]
            if hashlib.sha256(body.encode()).hexdigest() != wrapped["digest"]:
                raise CacheError("content hash mismatch")
            return json.loads(body)
        except Exception as exc:
            log.warning("corrupt cache entry %s (%s); rebuilding", path.name, exc)
            return None

    def snf(self, matrix, with_transforms: bool = True) -> tuple:
        """Cached ``smith_normal_form``; the key is the hash of the matrix entries."""
        from .homology import SparseIntMatrix, smith_normal_form

        m = matrix if isinstance(matrix, SparseIntMatrix) else SparseIntMatrix.from_dense(matrix)
        key = self.key("snf", shape=list(m.shape), rows=m.rows.tolist(), cols=m.cols.tolist(),
                       vals=[int(v) for v in m.vals.tolist()], transforms=with_transforms)
        hit = self.load_json(key)
        if hit is not None:
            return tuple(hit["divisors"]), hit["U"], hit["V"]
        d, U, V = smith_normal_form(m, with_transforms)
        self.store_json(key, {"divisors": [int(x) for x in d],
                              "U": None if U is None else [[int(x) for x in r] for r in U],
                              "V": None if V is None else [[int(x) for x in r] for r in V]})
        return tuple(d), U, V
