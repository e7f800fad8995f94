"""Memory-mapped node store with a fixed map size.

Layout per (dataset, builder) directory:

- ``data.bin``: preallocated to ``map_size`` bytes (sparse), holding node
  records appended tree by tree in preorder.
- ``index.bin``: per-tree offset tables into data.bin.
- ``manifest.json``: builder kind, node count, format version, map size.

Writes are atomic per tree: node bytes are appended first, then index and
manifest are republished via write-to-temp-and-rename.  A reader never sees a
partially written tree, because unpublished bytes are unreachable from the
old index.  Writing past ``map_size`` raises ``StoreCapacityError`` naming
the size the write would need.  The store supports one writer or many
concurrent readers; an fcntl lock enforces that.

Node keys are (tree id, preorder id) pairs encoded big-endian and fixed
width, so sorting keys as bytes equals sorting them numerically.
"""
from __future__ import annotations

import fcntl
import json
import mmap
import os
import struct
from pathlib import Path

from .hier import (
    AttrSummary,
    EMPTY_ATTRS,
    LeafEvent,
    NodeKey,
    NumericSummary,
    SummaryNode,
    TreeArrays,
)

import numpy as np

FORMAT_VERSION = 1
DEFAULT_MAP_SIZE = 2 << 30  # 2 GiB

_KEY = struct.Struct(">II")
_HEADER = struct.Struct("<qqiiqiiB")
_LEAF = struct.Struct("<qqqi")
_NUM = struct.Struct("<dddq")
_FLAG_LEAF = 1
_FLAG_END_MARK = 2


class StoreError(Exception):
    pass


class StoreCapacityError(StoreError):
    pass


class StoreBusyError(StoreError):
    pass


def encode_key(key: NodeKey) -> bytes:
    tree_id, pid = key
    return _KEY.pack(tree_id, pid)


def decode_key(raw: bytes) -> NodeKey:
    return _KEY.unpack(raw)


def _pack_str(out: bytearray, s: str) -> None:
    b = s.encode("utf-8")
    if len(b) > 255:
        raise StoreError(f"name too long to serialize: {s[:32]!r}...")
    out.append(len(b))
    out += b


def serialize_node(node: SummaryNode) -> bytes:
    out = bytearray()
    flags = (_FLAG_LEAF if node.leaf is not None else 0) | (
        _FLAG_END_MARK if node.end_mark else 0
    )
    out += _HEADER.pack(
        node.begin,
        node.end,
        node.track_lo,
        node.track_hi,
        node.count,
        node.child_a,
        node.child_b,
        flags,
    )
    if node.leaf is not None:
        out += _LEAF.pack(node.leaf.id, node.leaf.enter, node.leaf.leave, node.leaf.track)
    cat = node.attrs.categorical
    out.append(len(cat))
    for attr in sorted(cat):
        _pack_str(out, attr)
        values = sorted(cat[attr])
        if len(values) > 0xFFFF:
            raise StoreError(f"attribute {attr!r}: too many values to serialize")
        out += struct.pack("<H", len(values))
        for v in values:
            b = v.encode("utf-8")
            out += struct.pack("<H", len(b))
            out += b
    num = node.attrs.numeric
    out.append(len(num))
    for attr in sorted(num):
        _pack_str(out, attr)
        s = num[attr]
        out += _NUM.pack(s.min, s.max, s.mean, s.count)
    return bytes(out)


def deserialize_node(raw: bytes, key: NodeKey) -> SummaryNode:
    begin, end, track_lo, track_hi, count, child_a, child_b, flags = _HEADER.unpack_from(raw, 0)
    pos = _HEADER.size
    leaf = None
    if flags & _FLAG_LEAF:
        ev_id, ev_enter, ev_leave, ev_track = _LEAF.unpack_from(raw, pos)
        pos += _LEAF.size
        leaf = LeafEvent(id=ev_id, track=ev_track, enter=ev_enter, leave=ev_leave)
    n_cat = raw[pos]
    pos += 1
    cat: dict[str, frozenset[str]] = {}
    for _ in range(n_cat):
        name_len = raw[pos]
        pos += 1
        name = raw[pos : pos + name_len].decode("utf-8")
        pos += name_len
        (n_values,) = struct.unpack_from("<H", raw, pos)
        pos += 2
        values = []
        for _ in range(n_values):
            (vlen,) = struct.unpack_from("<H", raw, pos)
            pos += 2
            values.append(raw[pos : pos + vlen].decode("utf-8"))
            pos += vlen
        cat[name] = frozenset(values)
    n_num = raw[pos]
    pos += 1
    num: dict[str, NumericSummary] = {}
    for _ in range(n_num):
        name_len = raw[pos]
        pos += 1
        name = raw[pos : pos + name_len].decode("utf-8")
        pos += name_len
        mn, mx, mean, cnt = _NUM.unpack_from(raw, pos)
        pos += _NUM.size
        num[name] = NumericSummary(min=mn, max=mx, mean=mean, count=cnt)
    attrs = EMPTY_ATTRS if not cat and not num else AttrSummary(cat, num)
    return SummaryNode(
        key=key,
        begin=begin,
        end=end,
        track_lo=track_lo,
        track_hi=track_hi,
        count=count,
        child_a=child_a,
        child_b=child_b,
        end_mark=bool(flags & _FLAG_END_MARK),
        leaf=leaf,
        attrs=attrs,
    )


class NodeStore:
    """One store directory.  Open ``writable=True`` to put trees."""

    def __init__(self, directory: Path, writable: bool = False, map_size: int = DEFAULT_MAP_SIZE):
        self.directory = Path(directory)
        self.writable = writable
        self.directory.mkdir(parents=True, exist_ok=True)
        self._lock_file = open(self.directory / ".lock", "a+b")
        try:
            mode = fcntl.LOCK_EX if writable else fcntl.LOCK_SH
            fcntl.flock(self._lock_file, mode | fcntl.LOCK_NB)
        except BlockingIOError:
            self._lock_file.close()
            role = "writer" if writable else "reader"
            raise StoreBusyError(
                f"{self.directory}: cannot open as {role}; held by a conflicting process"
            ) from None

        data_path = self.directory / "data.bin"
        manifest_path = self.directory / "manifest.json"
        if manifest_path.exists():
            self.manifest = json.loads(manifest_path.read_text())
            if self.manifest.get("format_version") != FORMAT_VERSION:
                raise StoreError(
                    f"{self.directory}: unsupported format version "
                    f"{self.manifest.get('format_version')}"
                )
            self.map_size = int(self.manifest["map_size"])
        else:
            if not writable:
                raise StoreError(f"{self.directory}: no store manifest found")
            self.map_size = map_size
            self.manifest = {
                "format_version": FORMAT_VERSION,
                "map_size": self.map_size,
                "builder": None,
                "node_count": 0,
                "used_bytes": 0,
                "trees": [],
            }
            with open(data_path, "wb") as fh:
                fh.truncate(self.map_size)
            self._publish_index({})
            self._publish_manifest()

        self._index: dict[int, np.ndarray] = self._load_index()
        self._data_file = open(data_path, "r+b" if writable else "rb")
        access = mmap.ACCESS_WRITE if writable else mmap.ACCESS_READ
        self._mm = mmap.mmap(self._data_file.fileno(), self.map_size, access=access)

    # -- publication ------------------------------------------------------

    def _publish_manifest(self) -> None:
        tmp = self.directory / "manifest.json.tmp"
        tmp.write_text(json.dumps(self.manifest, indent=1, sort_keys=True))
        os.replace(tmp, self.directory / "manifest.json")

    def _publish_index(self, index: dict[int, np.ndarray]) -> None:
        tmp = self.directory / "index.bin.tmp"
        with open(tmp, "wb") as fh:
            fh.write(struct.pack("<I", len(index)))
            for tree_id in sorted(index):
                offsets = index[tree_id]
                fh.write(struct.pack("<II", tree_id, len(offsets) - 1))
                fh.write(offsets.astype("<u8").tobytes())
        os.replace(tmp, self.directory / "index.bin")

    def _load_index(self) -> dict[int, np.ndarray]:
        path = self.directory / "index.bin"
        raw = path.read_bytes()
        (n_trees,) = struct.unpack_from("<I", raw, 0)
        pos = 4
        index = {}
        for _ in range(n_trees):
            tree_id, count = struct.unpack_from("<II", raw, pos)
            pos += 8
            offsets = np.frombuffer(raw, dtype="<u8", count=count + 1, offset=pos)
            pos += (count + 1) * 8
            index[tree_id] = offsets
        return index

    # -- write path --------------------------------------------------------

    def put_tree(self, tree_id: int, nodes, builder: str | None = None) -> None:
        self.put_trees([(tree_id, nodes)], builder=builder)

    def put_trees(self, trees, builder: str | None = None) -> None:
        """Append whole trees (iterables of SummaryNode in preorder) and
        publish them atomically."""
        if not self.writable:
            raise StoreError(f"{self.directory}: store opened read-only")
        used = int(self.manifest["used_bytes"])
        new_index = dict(self._index)
        added_nodes = 0
        tree_meta = {t["tree_id"]: t for t in self.manifest["trees"]}
        for tree_id, nodes in trees:
            if tree_id in new_index:
                raise StoreError(f"{self.directory}: tree {tree_id} already stored")
            offsets = [used]
            for node in nodes:
                blob = serialize_node(node)
                needed = used + len(blob)
                if needed > self.map_size:
                    raise StoreCapacityError(
                        f"{self.directory}: writing tree {tree_id} requires at least "
                        f"{needed} bytes but map_size is {self.map_size}"
                    )
                self._mm[used : used + len(blob)] = blob
                used += len(blob)
                offsets.append(used)
            count = len(offsets) - 1
            new_index[tree_id] = np.asarray(offsets, dtype="<u8")
            tree_meta[tree_id] = {"tree_id": tree_id, "nodes": count}
            added_nodes += count
        self._mm.flush()
        self._publish_index(new_index)
        self._index = new_index
        if builder is not None:
            self.manifest["builder"] = builder
        self.manifest["used_bytes"] = used
        self.manifest["node_count"] = int(self.manifest["node_count"]) + added_nodes
        self.manifest["trees"] = [tree_meta[t] for t in sorted(tree_meta)]
        self._publish_manifest()

    def put_index(self, index, builder: str) -> None:
        """Store every tree of a built DatasetIndex."""
        self.put_trees(
            ((tree_id, _iter_nodes(tree)) for tree_id, tree in sorted(index.trees.items())),
            builder=builder,
        )

    # -- read path ---------------------------------------------------------

    def has_tree(self, tree_id: int) -> bool:
        return tree_id in self._index

    def tree_ids(self) -> list[int]:
        return sorted(self._index)

    def tree_node_count(self, tree_id: int) -> int:
        return len(self._index[tree_id]) - 1

    @property
    def node_count(self) -> int:
        return int(self.manifest["node_count"])

    def get(self, key: NodeKey) -> SummaryNode:
        tree_id, pid = key
        offsets = self._index.get(tree_id)
        if offsets is None:
            raise KeyError(key)
        if not 0 <= pid < len(offsets) - 1:
            raise KeyError(key)
        lo = int(offsets[pid])
        hi = int(offsets[pid + 1])
        return deserialize_node(self._mm[lo:hi], key)

    def close(self) -> None:
        if getattr(self, "_mm", None) is not None:
            self._mm.close()
            self._mm = None
        if getattr(self, "_data_file", None) is not None:
            self._data_file.close()
            self._data_file = None
        if getattr(self, "_lock_file", None) is not None:
            fcntl.flock(self._lock_file, fcntl.LOCK_UN)
            self._lock_file.close()
            self._lock_file = None

    def __enter__(self) -> "NodeStore":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def _iter_nodes(tree: TreeArrays):
    for pid in range(tree.size):
        yield tree.node(pid)


def store_dir(store_root: Path, dataset: str, builder: str) -> Path:
    return Path(store_root) / dataset / builder


def write_index_store(
    store_root: Path,
    dataset: str,
    builder: str,
    index,
    map_size: int = DEFAULT_MAP_SIZE,
) -> Path:
    d = store_dir(store_root, dataset, builder)
    with NodeStore(d, writable=True, map_size=map_size) as st:
        st.put_index(index, builder)
    return d
