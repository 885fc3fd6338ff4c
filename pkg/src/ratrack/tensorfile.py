"""Binary record/replay format for range-angle tensors.

Layout, all little-endian:

  header: magic "RATN" | u16 version | u32 n_range | u32 n_tx | u32 n_rx
          | f64 bin_size_m | f32 tx_angles[n_tx] | f32 rx_angles[n_rx]
  per sweep: u64 sweep_index | f64 t_start_s
             | f32 payload[n_range * n_tx * n_rx], range-major then tx
             then rx (C order of [range, tx, rx])

Truncated or malformed input is rejected with the offending byte
offset; a partial sweep is never yielded.
"""

from __future__ import annotations

import struct
from typing import BinaryIO, Iterator

import numpy as np

from .errors import FormatError, StreamError
from .receiver import RaTensor

MAGIC = b"RATN"
VERSION = 1

_HEADER_FIXED = struct.Struct("<4sHIIId")
_SWEEP_HEADER = struct.Struct("<Qd")


class TensorWriter:
    """Appends sweeps to an open binary stream after writing the header."""

    def __init__(
        self,
        fh: BinaryIO,
        n_range: int,
        tx_angles_deg: tuple[float, ...],
        rx_angles_deg: tuple[float, ...],
        bin_size_m: float,
    ):
        self._fh = fh
        self._dims = (n_range, len(tx_angles_deg), len(rx_angles_deg))
        self._last_index: int | None = None
        fh.write(
            _HEADER_FIXED.pack(
                MAGIC, VERSION, n_range, len(tx_angles_deg),
                len(rx_angles_deg), bin_size_m,
            )
        )
        fh.write(np.asarray(tx_angles_deg, dtype="<f4").tobytes())
        fh.write(np.asarray(rx_angles_deg, dtype="<f4").tobytes())

    def write(self, tensor: RaTensor) -> None:
        if tensor.power.shape != self._dims:
            raise StreamError(
                f"tensor dims {tensor.power.shape} do not match "
                f"file header {self._dims}"
            )
        if self._last_index is not None and tensor.sweep_index <= self._last_index:
            raise StreamError(
                f"sweep_index must be strictly increasing: "
                f"{tensor.sweep_index} after {self._last_index}"
            )
        self._last_index = tensor.sweep_index
        self._fh.write(_SWEEP_HEADER.pack(tensor.sweep_index, tensor.t_start_s))
        self._fh.write(
            np.ascontiguousarray(tensor.power, dtype="<f4").tobytes()
        )


def read_header(fh: BinaryIO):
    """Parse and validate the file header.

    Returns (n_range, tx_angles, rx_angles, bin_size_m, header_size).
    """
    raw = fh.read(_HEADER_FIXED.size)
    if len(raw) < _HEADER_FIXED.size:
        raise FormatError("truncated header", len(raw))
    magic, version, n_range, n_tx, n_rx, bin_size = _HEADER_FIXED.unpack(raw)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}", 0)
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", 4)
    offset = _HEADER_FIXED.size
    tables = []
    for count in (n_tx, n_rx):
        raw = fh.read(4 * count)
        if len(raw) < 4 * count:
            raise FormatError("truncated angle table", offset + len(raw))
        tables.append(tuple(float(a) for a in np.frombuffer(raw, dtype="<f4")))
        offset += 4 * count
    return n_range, tables[0], tables[1], bin_size, offset


def read_sweeps(fh: BinaryIO) -> Iterator[RaTensor]:
    """Stream tensors from an open binary file or pipe."""
    n_range, tx_angles, rx_angles, bin_size, offset = read_header(fh)
    payload_len = 4 * n_range * len(tx_angles) * len(rx_angles)
    last_index: int | None = None
    while True:
        raw = fh.read(_SWEEP_HEADER.size)
        if not raw:
            return
        if len(raw) < _SWEEP_HEADER.size:
            raise FormatError("truncated sweep header", offset + len(raw))
        sweep_index, t_start = _SWEEP_HEADER.unpack(raw)
        offset += _SWEEP_HEADER.size
        payload = fh.read(payload_len)
        if len(payload) < payload_len:
            raise FormatError(
                f"truncated payload for sweep {sweep_index}",
                offset + len(payload),
            )
        if last_index is not None and sweep_index <= last_index:
            raise FormatError(
                f"sweep_index not increasing at sweep {sweep_index}",
                offset - _SWEEP_HEADER.size,
            )
        last_index = sweep_index
        offset += payload_len
        power = np.frombuffer(payload, dtype="<f4").reshape(
            n_range, len(tx_angles), len(rx_angles)
        )
        yield RaTensor(
            power=power.copy(),
            tx_angles_deg=tx_angles,
            rx_angles_deg=rx_angles,
            sweep_index=sweep_index,
            t_start_s=t_start,
            bin_size_m=bin_size,
        )
