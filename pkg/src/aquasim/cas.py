"""Content-addressed storage.

CIDs follow the CIDv1 layout from the multiformats project::

    <varint version=1><varint codec><varint 0x12 sha2-256><varint 0x20 len><digest>

and are rendered in multibase base32 lower-case ("b" prefix, no padding).
Single-chunk blobs use the ``raw`` codec (0x55), which is what a Kubo daemon
produces for ``ipfs add --raw-leaves --cid-version=1``. Files larger than one
chunk are stored as their chunks plus a manifest blob; the manifest format is
private to this package and never sent to a daemon.
"""
from __future__ import annotations

import base64
import hashlib
import json
import os
import struct
from dataclasses import dataclass, field

import requests

RAW_CODEC = 0x55
# First code of the multicodec private-use range. Its varint is 4 bytes, so a
# manifest CID is 39 bytes where a raw one is 36.
MANIFEST_CODEC = 0x300000
SHA2_256 = 0x12
DIGEST_LEN = 32
CID_VERSION = 1
DEFAULT_CHUNK_SIZE = 262144

DEFAULT_API = "http://127.0.0.1:5001"
API_ENV_VAR = "AQUA_IPFS_API"


class InvalidCidError(ValueError):
    """A CID string or byte form could not be decoded."""


class NotFoundError(KeyError):
    """A blob is absent from a store. ``cid`` names the missing blob."""

    def __init__(self, cid: Cid):
        super().__init__(f"blob not found: {cid}")
        self.cid = cid


class RemoteUnavailable(ConnectionError):
    pass


class RemoteError(RuntimeError):
    def __init__(self, status: int, body: str = ""):
        super().__init__(f"daemon returned HTTP {status}: {body[:200]}")
        self.status = status


class BadRemoteCid(ValueError):
    pass


def _varint(n: int) -> bytes:
    out = bytearray()
    while True:
        byte = n & 0x7F
        n >>= 7
        if n:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return bytes(out)


def _read_varint(buf: bytes, pos: int) -> tuple[int, int]:
    value = shift = 0
    while True:
        if pos >= len(buf):
            raise InvalidCidError("truncated varint")
        byte = buf[pos]
        pos += 1
        value |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return value, pos
        shift += 7
        if shift > 63:
            raise InvalidCidError("varint too long")


@dataclass(frozen=True)
class Cid:
    codec: int
    digest: bytes
    version: int = CID_VERSION

    def __post_init__(self):
        if self.version != CID_VERSION:
            raise InvalidCidError(f"unsupported CID version {self.version}")
        if len(self.digest) != DIGEST_LEN:
            raise InvalidCidError(f"digest must be {DIGEST_LEN} bytes, got {len(self.digest)}")

    def to_bytes(self) -> bytes:
        return (_varint(self.version) + _varint(self.codec)
                + _varint(SHA2_256) + _varint(DIGEST_LEN) + self.digest)

    @property
    def text(self) -> str:
        return "b" + base64.b32encode(self.to_bytes()).decode("ascii").rstrip("=").lower()

    def __str__(self):
        return self.text

    @classmethod
    def from_bytes(cls, buf: bytes) -> Cid:
        version, pos = _read_varint(buf, 0)
        codec, pos = _read_varint(buf, pos)
        mh_code, pos = _read_varint(buf, pos)
        mh_len, pos = _read_varint(buf, pos)
        if mh_code != SHA2_256 or mh_len != DIGEST_LEN:
            raise InvalidCidError(f"unsupported multihash 0x{mh_code:x}/{mh_len}")
        if len(buf) - pos != DIGEST_LEN:
            raise InvalidCidError("digest length mismatch")
        return cls(codec=codec, digest=bytes(buf[pos:]), version=version)

    @classmethod
    def parse(cls, text: str) -> Cid:
        if not text or text[0] != "b":
            raise InvalidCidError(f"not a base32-lower CIDv1 string: {text!r}")
        body = text[1:].upper()
        try:
            raw = base64.b32decode(body + "=" * (-len(body) % 8))
        except ValueError as exc:
            raise InvalidCidError(f"bad base32 in {text!r}") from exc
        cid = cls.from_bytes(raw)
        if cid.text != text:
            raise InvalidCidError(f"non-canonical CID text {text!r}")
        return cid


def cid_of_blob(data: bytes) -> Cid:
    return Cid(RAW_CODEC, hashlib.sha256(data).digest())


def chunk_bytes(data: bytes, chunk_size: int = DEFAULT_CHUNK_SIZE) -> list[bytes]:
    """Fixed-size chunks; empty input gives one empty chunk."""
    if chunk_size < 1:
        raise ValueError("chunk_size must be >= 1")
    if not data:
        return [b""]
    return [data[i:i + chunk_size] for i in range(0, len(data), chunk_size)]


@dataclass(frozen=True)
class Manifest:
    chunk_cids: tuple[Cid, ...]
    chunk_lens: tuple[int, ...]

    @property
    def total_len(self) -> int:
        return sum(self.chunk_lens)

    def encode(self) -> bytes:
        parts = [struct.pack(">I", len(self.chunk_cids))]
        for cid, n in zip(self.chunk_cids, self.chunk_lens):
            raw = cid.to_bytes()
            parts.append(struct.pack(">B", len(raw)) + raw + struct.pack(">Q", n))
        return b"".join(parts)

    @classmethod
    def decode(cls, buf: bytes) -> Manifest:
        (count,), pos = struct.unpack_from(">I", buf, 0), 4
        cids, lens = [], []
        for _ in range(count):
            n = buf[pos]
            cids.append(Cid.from_bytes(buf[pos + 1:pos + 1 + n]))
            pos += 1 + n
            lens.append(struct.unpack_from(">Q", buf, pos)[0])
            pos += 8
        if pos != len(buf):
            raise ValueError("trailing bytes after manifest")
        return cls(tuple(cids), tuple(lens))


@dataclass
class BlobStore:
    """In-memory blob store keyed by CID. Writes must be serialized by the caller."""

    blobs: dict[Cid, bytes] = field(default_factory=dict)
    pins: set[Cid] = field(default_factory=set)

    def put(self, cid: Cid, data: bytes) -> None:
        self.blobs.setdefault(cid, data)

    def get(self, cid: Cid) -> bytes:
        try:
            return self.blobs[cid]
        except KeyError:
            raise NotFoundError(cid) from None

    def delete(self, cid: Cid) -> None:
        self.blobs.pop(cid, None)
        self.pins.discard(cid)

    def pin(self, cid: Cid) -> None:
        if cid not in self.blobs:
            raise NotFoundError(cid)
        self.pins.add(cid)

    def unpin(self, cid: Cid) -> None:
        self.pins.discard(cid)

    def __len__(self):
        return len(self.blobs)

    def __contains__(self, cid):
        return cid in self.blobs


def add_file(store: BlobStore, data: bytes, chunk_size: int = DEFAULT_CHUNK_SIZE,
             pin: bool = False) -> Cid:
    """Store ``data`` and return its root CID.

    A file that fits in one chunk is addressed by ``cid_of_blob(data)``. Larger
    files get one raw blob per chunk plus a manifest under ``MANIFEST_CODEC``.
    """
    chunks = chunk_bytes(data, chunk_size)
    if len(chunks) == 1:
        root = cid_of_blob(data)
        store.put(root, data)
    else:
        cids = []
        for chunk in chunks:
            cid = cid_of_blob(chunk)
            store.put(cid, chunk)
            cids.append(cid)
        manifest = Manifest(tuple(cids), tuple(len(c) for c in chunks)).encode()
        root = Cid(MANIFEST_CODEC, hashlib.sha256(manifest).digest())
        store.put(root, manifest)
    if pin:
        store.pin(root)
    return root


def get_file(store: BlobStore, root: Cid) -> bytes:
    blob = store.get(root)
    if root.codec == RAW_CODEC:
        return blob
    if root.codec != MANIFEST_CODEC:
        raise InvalidCidError(f"unknown codec 0x{root.codec:x}")
    manifest = Manifest.decode(blob)
    return b"".join(store.get(cid) for cid in manifest.chunk_cids)


# -- Kubo-compatible HTTP RPC client ---------------------------------------

def default_endpoint() -> str:
    return os.environ.get(API_ENV_VAR, DEFAULT_API)


def _post(url: str, timeout: float, **kwargs) -> requests.Response:
    try:
        resp = requests.post(url, timeout=timeout, **kwargs)
    except (requests.ConnectionError, requests.Timeout) as exc:
        raise RemoteUnavailable(f"cannot reach {url}: {exc}") from exc
    if not 200 <= resp.status_code < 300:
        raise RemoteError(resp.status_code, resp.text)
    return resp


def remote_add(endpoint: str | None, data: bytes, timeout: float = 30.0) -> Cid:
    """``POST /api/v0/add`` with raw leaves, CIDv1 and sha2-256."""
    endpoint = (endpoint or default_endpoint()).rstrip("/")
    resp = _post(
        f"{endpoint}/api/v0/add",
        timeout,
        params={"raw-leaves": "true", "cid-version": "1", "hash": "sha2-256"},
        files={"file": ("blob", data, "application/octet-stream")},
    )
    # the daemon may stream one JSON object per line; the last one is the root
    lines = [ln for ln in resp.text.splitlines() if ln.strip()]
    try:
        text = json.loads(lines[-1])["Hash"]
        return Cid.parse(text)
    except (IndexError, KeyError, ValueError, TypeError) as exc:
        raise BadRemoteCid(f"unparseable add response: {resp.text[:200]!r}") from exc


def remote_cat(endpoint: str | None, cid: Cid, timeout: float = 30.0) -> bytes:
    endpoint = (endpoint or default_endpoint()).rstrip("/")
    return _post(f"{endpoint}/api/v0/cat", timeout, params={"arg": str(cid)}).content
