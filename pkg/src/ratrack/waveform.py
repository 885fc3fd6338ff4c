"""OFDM transmit grid generation and CP-OFDM (de)modulation.

The transmit payload is uniform random QPSK on every active subcarrier:
the sensing receiver only needs a *known* unit-magnitude grid to divide
out.  All DFTs use the unitary scaling convention (1/sqrt(N) both ways)
so energy bookkeeping is symmetric.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, FrameError

C_LIGHT = 299_792_458.0

QPSK_ALPHABET = np.array(
    [1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j], dtype=np.complex128
) / np.sqrt(2.0)


@dataclass(frozen=True)
class WaveformConfig:
    """OFDM numerology for one beam dwell.

    Defaults match a 400 MHz FR2 carrier: 275 resource blocks at
    120 kHz subcarrier spacing (3300 active subcarriers, 396 MHz
    occupied).
    """

    n_rb: int = 275
    scs_hz: float = 120e3
    n_symbols: int = 14
    fft_size: int = 4096
    cp_len: int = 288
    carrier_hz: float = 28e9
    seed: int = 0

    def __post_init__(self):
        if self.n_rb < 1 or self.n_symbols < 1 or self.fft_size < 1:
            raise ConfigError("n_rb, n_symbols and fft_size must be positive")
        if self.cp_len < 0:
            raise ConfigError("cp_len must be >= 0")
        if self.scs_hz <= 0:
            raise ConfigError("scs_hz must be > 0")
        if self.active_subcarriers > self.fft_size:
            raise ConfigError(
                f"12*n_rb = {self.active_subcarriers} exceeds fft_size {self.fft_size}"
            )

    @property
    def active_subcarriers(self) -> int:
        return 12 * self.n_rb

    @property
    def bandwidth_hz(self) -> float:
        return self.active_subcarriers * self.scs_hz

    @property
    def sample_rate_hz(self) -> float:
        return self.scs_hz * self.fft_size

    @property
    def range_bin_m(self) -> float:
        """Width of one range bin after the range IFFT."""
        return C_LIGHT / (2.0 * self.scs_hz * self.fft_size)


@dataclass(frozen=True)
class ResourceGrid:
    """Frequency-domain symbol grid, [active_subcarriers x n_symbols]."""

    data: np.ndarray
    config: WaveformConfig = field(repr=False)

    def __post_init__(self):
        expected = (self.config.active_subcarriers, self.config.n_symbols)
        if self.data.shape != expected:
            raise FrameError(f"grid shape {self.data.shape}, expected {expected}")


@dataclass(frozen=True)
class IqFrame:
    """Time-domain samples for one dwell: n_symbols * (fft_size + cp_len)."""

    samples: np.ndarray
    sample_rate_hz: float


def build_grid(cfg: WaveformConfig) -> ResourceGrid:
    """Draw a uniform random QPSK grid, deterministic per cfg.seed."""
    rng = np.random.default_rng(cfg.seed)
    idx = rng.integers(0, 4, size=(cfg.active_subcarriers, cfg.n_symbols))
    return ResourceGrid(data=QPSK_ALPHABET[idx], config=cfg)


def _subcarrier_map(cfg: WaveformConfig) -> np.ndarray:
    """FFT-bin index of each active subcarrier (centered around DC)."""
    k = np.arange(cfg.active_subcarriers) - cfg.active_subcarriers // 2
    return np.mod(k, cfg.fft_size)


def modulate(grid: ResourceGrid) -> IqFrame:
    """CP-OFDM modulation: per-symbol unitary IDFT plus cyclic prefix."""
    cfg = grid.config
    spectrum = np.zeros((cfg.fft_size, cfg.n_symbols), dtype=np.complex128)
    spectrum[_subcarrier_map(cfg), :] = grid.data
    body = np.fft.ifft(spectrum, axis=0, norm="ortho")
    if cfg.cp_len > 0:
        body = np.concatenate([body[-cfg.cp_len :, :], body], axis=0)
    return IqFrame(
        samples=body.T.reshape(-1), sample_rate_hz=cfg.sample_rate_hz
    )


def demodulate(frame: IqFrame, cfg: WaveformConfig) -> ResourceGrid:
    """Inverse of :func:`modulate`: strip CP, unitary DFT, extract actives."""
    sym_len = cfg.fft_size + cfg.cp_len
    expected = cfg.n_symbols * sym_len
    if frame.samples.shape != (expected,):
        raise FrameError(
            f"frame length {frame.samples.shape}, expected ({expected},)"
        )
    body = frame.samples.reshape(cfg.n_symbols, sym_len)[:, cfg.cp_len :].T
    spectrum = np.fft.fft(body, axis=0, norm="ortho")
    return ResourceGrid(data=spectrum[_subcarrier_map(cfg), :], config=cfg)
