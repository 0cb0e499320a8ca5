'''CATF binary tensor files, plus CSV for rank 1 and rank 2 tensors.

Layout (all little-endian):

    offset 0   4 bytes   magic "CATF"
    offset 4   u32       version, always 1
    offset 8   u8        rank
    offset 9   u64 * rank  dimensions
    then       f64 * prod(dims)  row-major payload
'''
import math
from pathlib import Path
from typing import Union

import numpy as np

from .errors import AttrContrastError, ErrorReason
from .tensors import as_tensor


MAGIC = b'CATF'
VERSION = 1
MAX_RANK = 255
VERSION_OFFSET = 4
RANK_OFFSET = 8
DIMS_OFFSET = 9
CSV_SUFFIX = '.csv'

PathLike = Union[str, Path]


def _malformed(path: PathLike, detail: str) -> AttrContrastError:
    return AttrContrastError(ErrorReason.MALFORMED_FILE, path=path, detail=detail)


def decode_tensor(data: bytes, path: PathLike = '<bytes>') -> np.ndarray:
    '''Decode CATF bytes.

    Raises:
        AttrContrastError: Bad magic, version, rank or a truncated header/payload,
            reported with the byte offset where decoding stopped.
    '''
    if len(data) < len(MAGIC) and MAGIC.startswith(data):
        raise _malformed(path, f'truncated header at byte offset {len(data)}')
    if data[:len(MAGIC)] != MAGIC:
        raise _malformed(path, 'bad magic at byte offset 0')
    if len(data) < DIMS_OFFSET:
        raise _malformed(path, f'truncated header at byte offset {len(data)}')

    version = int(np.frombuffer(data, dtype='<u4', count=1, offset=VERSION_OFFSET)[0])
    if version != VERSION:
        raise _malformed(path, f'unsupported version {version} at byte offset {VERSION_OFFSET}')
    rank = data[RANK_OFFSET]
    if rank == 0:
        raise _malformed(path, f'rank 0 at byte offset {RANK_OFFSET}')

    payload_offset = DIMS_OFFSET + 8 * rank
    if len(data) < payload_offset:
        raise _malformed(path, f'truncated dimensions at byte offset {len(data)}')
    shape = tuple(int(dim) for dim in np.frombuffer(data, dtype='<u8', count=rank, offset=DIMS_OFFSET))
    for axis, dim in enumerate(shape):
        if dim == 0:
            raise _malformed(path, f'zero dimension at byte offset {DIMS_OFFSET + 8 * axis}')

    # python ints, so huge dimensions cannot wrap around
    expected = 8 * math.prod(shape)
    actual = len(data) - payload_offset
    if actual != expected:
        raise _malformed(path, f'payload at byte offset {payload_offset} has {actual} bytes, expected {expected}')

    values = np.frombuffer(data, dtype='<f8', offset=payload_offset).reshape(shape)
    try:
        return as_tensor(values, name=str(path))
    except AttrContrastError as exc:
        raise _malformed(path, exc.detail)


def encode_tensor(tensor) -> bytes:
    '''Encode a tensor of rank 1..255 as CATF bytes.'''
    tensor = as_tensor(tensor)
    if not 1 <= tensor.ndim <= MAX_RANK:
        raise AttrContrastError(ErrorReason.OUT_OF_RANGE, name='rank', value=tensor.ndim, allowed=f'[1, {MAX_RANK}]')
    header = (
        MAGIC
        + np.array([VERSION], dtype='<u4').tobytes()
        + bytes([tensor.ndim])
        + np.array(tensor.shape, dtype='<u8').tobytes()
    )
    return header + tensor.astype('<f8').tobytes(order='C')


def _read_csv(path: Path) -> np.ndarray:
    try:
        values = np.loadtxt(path, delimiter=',', ndmin=2, dtype=np.float64)
    except ValueError as exc:
        raise _malformed(path, f'not a numeric CSV table ({exc})')
    if values.shape[0] == 1:
        values = values[0]
    try:
        return as_tensor(values, name=str(path))
    except AttrContrastError as exc:
        raise _malformed(path, exc.detail)


def read_tensor(path: PathLike) -> np.ndarray:
    '''Read a CATF file, or a CSV file when the name ends in ".csv".

    A single-row CSV is read as a rank 1 tensor.

    Raises:
        AttrContrastError: The file is missing or malformed.
    '''
    path = Path(path)
    try:
        if path.suffix.lower() == CSV_SUFFIX:
            return _read_csv(path)
        data = path.read_bytes()
    except OSError:
        raise AttrContrastError(ErrorReason.MISSING_FILE, path=path)
    return decode_tensor(data, path)


def write_tensor(tensor, path: PathLike) -> None:
    '''Write a tensor as CATF, or as CSV (rank <= 2) when the name ends in ".csv".

    A (1, n) matrix is refused for CSV since it would read back as a vector.
    '''
    path = Path(path)
    try:
        if path.suffix.lower() == CSV_SUFFIX:
            tensor = as_tensor(tensor)
            if tensor.ndim > 2:
                raise AttrContrastError(ErrorReason.OUT_OF_RANGE, name='rank', value=tensor.ndim, allowed='[1, 2] for CSV')
            # a single CSV row reads back as rank 1
            if tensor.ndim == 2 and tensor.shape[0] == 1:
                raise AttrContrastError(ErrorReason.OUT_OF_RANGE, name='shape', value=tensor.shape,
                                        allowed='CSV shapes (use CATF for a single-row matrix)')
            np.savetxt(path, np.atleast_2d(tensor), delimiter=',', fmt='%.17g')
        else:
            path.write_bytes(encode_tensor(tensor))
    except OSError:
        raise AttrContrastError(ErrorReason.MISSING_FILE, path=path)
