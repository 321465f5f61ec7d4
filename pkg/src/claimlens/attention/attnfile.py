"""Binary attention file format.

Layout (little-endian, bit-exact across platforms):

    magic   4s   b"ATTN"
    version u16  currently 1
    n       u32  token count
    layer   u16  layer index the matrix came from
    redux   u8   0=mean 1=max 2=single
    matrix  n*n float32, row-major
    align   n * (char_start u32, char_end u32, special u8)
    doc_id  32 raw bytes (sha256 of the normalized text)

Export -> import is lossless at float32 precision.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..docmodel import TokenAlignment
from ..errors import IOFailure
from .types import TokenAttention

MAGIC = b"ATTN"
VERSION = 1

_HEADER = struct.Struct("<4sHIHB")
_ALIGN_ENTRY = struct.Struct("<IIB")

_REDUX_CODES = {"mean": 0, "max": 1, "single": 2}
_REDUX_NAMES = {v: k for k, v in _REDUX_CODES.items()}


def write_attention_file(
    path: str | Path,
    att: TokenAttention,
    alignment: TokenAlignment,
    doc_id: str,
) -> None:
    """Serialize attention plus alignment; rejects empty matrices."""
    n = att.n_tokens
    if n == 0:
        raise IOFailure("refusing to export an empty attention matrix")
    if len(alignment) != n:
        raise IOFailure(f"alignment covers {len(alignment)} tokens, matrix has {n}")
    if att.layer_index < 0 or att.layer_index > 0xFFFF:
        raise IOFailure(f"layer index {att.layer_index} not storable")
    try:
        doc_id_bytes = bytes.fromhex(doc_id)
    except ValueError as exc:
        raise IOFailure(f"doc_id is not a hex digest: {exc}") from exc
    if len(doc_id_bytes) != 32:
        raise IOFailure("doc_id must be a 32-byte (sha256) digest")

    payload = bytearray()
    payload += _HEADER.pack(MAGIC, VERSION, n, att.layer_index,
                            _REDUX_CODES[att.head_reduction])
    matrix = np.ascontiguousarray(att.matrix, dtype="<f4")
    payload += matrix.tobytes(order="C")
    for (start, end), special in zip(alignment.token_char_offsets,
                                     alignment.special_token_mask):
        payload += _ALIGN_ENTRY.pack(start, end, 1 if special else 0)
    payload += doc_id_bytes

    try:
        Path(path).write_bytes(bytes(payload))
    except OSError as exc:
        raise IOFailure(f"cannot write attention file: {exc}") from exc


def read_attention_file(path: str | Path) -> tuple[TokenAttention, TokenAlignment, str]:
    """Load a file written by write_attention_file; returns (attention, alignment, doc_id)."""
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise IOFailure(f"cannot read attention file: {exc}") from exc

    if len(raw) < _HEADER.size:
        raise IOFailure("attention file truncated (no header)")
    magic, version, n, layer, redux_code = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise IOFailure(f"bad magic {magic!r}; not an attention file")
    if version != VERSION:
        raise IOFailure(f"unsupported attention file version {version}")
    if redux_code not in _REDUX_NAMES:
        raise IOFailure(f"unknown head reduction code {redux_code}")

    offset = _HEADER.size
    matrix_bytes = n * n * 4
    align_bytes = n * _ALIGN_ENTRY.size
    expected = offset + matrix_bytes + align_bytes + 32
    if len(raw) != expected:
        raise IOFailure(f"attention file size {len(raw)} != expected {expected}")

    matrix = np.frombuffer(raw, dtype="<f4", count=n * n, offset=offset).reshape(n, n)
    matrix = matrix.copy()  # own the memory; TokenAttention freezes it
    offset += matrix_bytes

    offsets = []
    specials = []
    for _ in range(n):
        start, end, special = _ALIGN_ENTRY.unpack_from(raw, offset)
        offsets.append((start, end))
        specials.append(bool(special))
        offset += _ALIGN_ENTRY.size
    doc_id = raw[offset:offset + 32].hex()

    att = TokenAttention(
        matrix=matrix,
        layer_index=layer,
        head_reduction=_REDUX_NAMES[redux_code],
        provider_id="file",
        special_token_mask=tuple(specials),
    )
    alignment = TokenAlignment(tuple(offsets), tuple(specials))
    return att, alignment, doc_id
