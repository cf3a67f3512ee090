"""Bit-exact NIfTI-1 single-file reader/writer (.nii and gzipped .nii.gz).

Only the single-file variant (magic "n+1\\0") is handled; the header affine
block (bytes 252..343, qform/sform and intent_name) is carried opaquely so a
read-modify-write cycle does not lose it, but it is never interpreted.
"""

from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass

import numpy as np

from .volumes import LabelMap, Volume3D, VALID_LABELS

HEADER_SIZE = 348
DATA_OFFSET = 352  # header + 4-byte extension flag

# NIfTI-1 datatype codes we decode.
DTYPES = {
    2: np.dtype(np.uint8),
    4: np.dtype(np.int16),
    8: np.dtype(np.int32),
    16: np.dtype(np.float32),
    64: np.dtype(np.float64),
    512: np.dtype(np.uint16),
}
INTEGER_DTYPE_CODES = (2, 4, 8, 512)

MAGIC_SINGLE = b"n+1\x00"
MAGIC_PAIR = b"ni1\x00"
GZIP_MAGIC = b"\x1f\x8b"


class NiftiFormatError(ValueError):
    """Malformed or unsupported NIfTI stream.

    category: one of bad-header, bad-magic, unsupported-version,
    unsupported-datatype, truncated, label-range, paired-files, bad-dim.
    offset: byte position of the offending field, when known.
    """

    def __init__(self, category: str, message: str, offset: int | None = None):
        self.category = category
        self.offset = offset
        where = f" (at byte {offset})" if offset is not None else ""
        super().__init__(f"{category}: {message}{where}")


@dataclass(frozen=True)
class NiftiHeader:
    """Decoded header fields plus the opaque affine block."""

    dim: tuple[int, ...]
    datatype: int
    bitpix: int
    pixdim: tuple[float, ...]
    vox_offset: int
    scl_slope: float
    scl_inter: float
    magic: bytes
    byte_order: str  # "<" little, ">" big (as stored on disk)
    affine_bytes: bytes = b"\x00" * 92  # raw bytes 252..343

    @property
    def shape(self) -> tuple[int, int, int]:
        return tuple(self.dim[1:4])  # type: ignore[return-value]

    @property
    def spacing(self) -> tuple[float, float, float]:
        return tuple(self.pixdim[1:4])  # type: ignore[return-value]


def _decompress_if_gzip(data: bytes) -> bytes:
    if data[:2] == GZIP_MAGIC:
        try:
            return gzip.decompress(data)
        except (OSError, EOFError) as exc:
            raise NiftiFormatError("truncated", f"bad gzip stream: {exc}") from exc
    return data


def _detect_byte_order(data: bytes) -> str:
    (le,) = struct.unpack_from("<i", data, 0)
    if le == HEADER_SIZE:
        return "<"
    (be,) = struct.unpack_from(">i", data, 0)
    if be == HEADER_SIZE:
        return ">"
    if le == 540 or be == 540:  # NIfTI-2 header size
        raise NiftiFormatError("unsupported-version", "NIfTI-2 is not supported", offset=0)
    raise NiftiFormatError("bad-header", f"sizeof_hdr is {le}, expected 348", offset=0)


def parse_header(data: bytes) -> NiftiHeader:
    """Decode the 348-byte header of an (already decompressed) stream."""
    if len(data) < DATA_OFFSET:
        raise NiftiFormatError("truncated", f"stream has {len(data)} bytes, need at least {DATA_OFFSET}")
    bo = _detect_byte_order(data)
    magic = data[344:348]
    if magic != MAGIC_SINGLE:
        if magic == MAGIC_PAIR:
            raise NiftiFormatError("paired-files", "two-file .hdr/.img pairs are not supported", offset=344)
        raise NiftiFormatError("bad-magic", f"magic is {magic!r}, expected {MAGIC_SINGLE!r}", offset=344)
    dim = struct.unpack_from(bo + "8h", data, 40)
    datatype, bitpix = struct.unpack_from(bo + "2h", data, 70)
    pixdim = struct.unpack_from(bo + "8f", data, 76)
    vox_offset, scl_slope, scl_inter = struct.unpack_from(bo + "3f", data, 108)

    if dim[0] not in (3, 4):
        raise NiftiFormatError("bad-dim", f"dim[0] is {dim[0]}, expected 3 or 4", offset=40)
    used = dim[1 : 1 + dim[0]]
    if any(d < 1 for d in used):
        raise NiftiFormatError("bad-dim", f"non-positive dimension in {used}", offset=40)
    if dim[0] == 4 and dim[4] != 1:
        raise NiftiFormatError("bad-dim", f"rank-4 file with dim[4]={dim[4]}; only singleton 4th dims collapse", offset=48)
    if datatype not in DTYPES:
        raise NiftiFormatError("unsupported-datatype", f"datatype code {datatype}", offset=70)
    if vox_offset < DATA_OFFSET:
        raise NiftiFormatError("bad-header", f"vox_offset {vox_offset} < {DATA_OFFSET}", offset=108)

    return NiftiHeader(
        dim=tuple(int(d) for d in dim),
        datatype=int(datatype),
        bitpix=int(bitpix),
        pixdim=tuple(float(p) for p in pixdim),
        vox_offset=int(vox_offset),
        scl_slope=float(scl_slope),
        scl_inter=float(scl_inter),
        magic=magic,
        byte_order=bo,
        affine_bytes=bytes(data[252:344]),
    )


def parse_nifti(data: bytes, as_labels: bool = False):
    """Parse a complete .nii (or gzipped) stream.

    Returns (NiftiHeader, Volume3D) or, with as_labels, (NiftiHeader, LabelMap);
    a label request requires every (scaled) voxel value to lie in {0,1,2,3}.
    """
    data = _decompress_if_gzip(data)
    hdr = parse_header(data)

    nx, ny, nz = hdr.shape
    count = nx * ny * nz
    dtype = DTYPES[hdr.datatype].newbyteorder(hdr.byte_order)
    nbytes = count * dtype.itemsize
    if len(data) < hdr.vox_offset + nbytes:
        raise NiftiFormatError(
            "truncated",
            f"data section needs {nbytes} bytes at offset {hdr.vox_offset}, stream has {len(data)}",
            offset=len(data),
        )
    raw = np.frombuffer(data, dtype=dtype, count=count, offset=hdr.vox_offset)
    arr = raw.reshape((nx, ny, nz), order="F").astype(np.float64)
    if hdr.scl_slope != 0.0 and not (hdr.scl_slope == 1.0 and hdr.scl_inter == 0.0):
        arr = arr * hdr.scl_slope + hdr.scl_inter

    spacing = hdr.spacing
    if as_labels:
        rounded = np.rint(arr)
        if not (np.abs(arr - rounded) < 1e-9).all() or not np.isin(rounded, VALID_LABELS).all():
            bad = np.unique(arr[~np.isin(np.rint(arr), VALID_LABELS) | (np.abs(arr - np.rint(arr)) >= 1e-9)])
            raise NiftiFormatError("label-range", f"label values outside {{0,1,2,3}}: {bad[:8]}", offset=hdr.vox_offset)
        return hdr, LabelMap(rounded.astype(np.uint8), spacing)
    return hdr, Volume3D(arr, spacing)


def write_nifti(volume, compress: bool = False, affine_bytes: bytes | None = None) -> bytes:
    """Serialize a Volume3D (float32) or LabelMap (uint8) as a single-file NIfTI-1.

    Output is little-endian with scl_slope=1, scl_inter=0 and vox_offset=352;
    compressed output is deterministic (gzip mtime pinned to 0).
    """
    if isinstance(volume, LabelMap):
        datatype, bitpix = 2, 8
        payload = volume.labels.astype("<u1")
    elif isinstance(volume, Volume3D):
        datatype, bitpix = 16, 32
        payload = volume.voxels.astype("<f4")
    else:
        raise TypeError(f"expected Volume3D or LabelMap, got {type(volume).__name__}")
    if affine_bytes is not None and len(affine_bytes) != 92:
        raise ValueError(f"affine_bytes must be 92 bytes, got {len(affine_bytes)}")

    nx, ny, nz = volume.shape
    sx, sy, sz = volume.spacing
    hdr = bytearray(HEADER_SIZE)
    struct.pack_into("<i", hdr, 0, HEADER_SIZE)
    struct.pack_into("<8h", hdr, 40, 3, nx, ny, nz, 1, 1, 1, 1)
    struct.pack_into("<2h", hdr, 70, datatype, bitpix)
    struct.pack_into("<8f", hdr, 76, 1.0, sx, sy, sz, 0.0, 0.0, 0.0, 0.0)
    struct.pack_into("<3f", hdr, 108, float(DATA_OFFSET), 1.0, 0.0)
    hdr[123] = 2  # xyzt_units: millimetres
    if affine_bytes is not None:
        hdr[252:344] = affine_bytes
    hdr[344:348] = MAGIC_SINGLE

    stream = bytes(hdr) + b"\x00" * 4 + payload.tobytes(order="F")
    if compress:
        return gzip.compress(stream, mtime=0)
    return stream


def read_nifti_file(path, as_labels: bool = False):
    """parse_nifti over a file path."""
    with open(path, "rb") as fh:
        return parse_nifti(fh.read(), as_labels=as_labels)


def write_nifti_file(path, volume, affine_bytes: bytes | None = None) -> None:
    """write_nifti to a path; compression follows the .gz suffix."""
    compress = str(path).endswith(".gz")
    with open(path, "wb") as fh:
        fh.write(write_nifti(volume, compress=compress, affine_bytes=affine_bytes))
