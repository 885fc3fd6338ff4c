"""Static clutter suppression, CFAR detection and clustering.

The MTI filter runs in the amplitude domain along slow time and its
output is re-squared, so CFAR downstream always sees a power tensor.
CA-CFAR is 1-D along range, applied independently per beam pair; the
angle axes are clustered afterwards by DBSCAN.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, StreamError
from .receiver import RaTensor


@dataclass(frozen=True)
class CfarConfig:
    n_train: int = 8
    n_guard: int = 2
    pfa: float = 1e-3

    def __post_init__(self):
        if self.n_train < 1:
            raise ConfigError("n_train must be >= 1")
        if self.n_guard < 0:
            raise ConfigError("n_guard must be >= 0")
        if not 0.0 < self.pfa < 1.0:
            raise ConfigError("pfa must be in (0, 1)")


@dataclass(frozen=True)
class Detection:
    """One CFAR hit in tensor index space."""

    range_idx: int
    tx_idx: int
    rx_idx: int
    power: float


@dataclass(frozen=True)
class Cluster:
    members: tuple[Detection, ...]
    centroid_range_m: float
    centroid_angle_deg: float
    total_power: float


class MtiFilter:
    """Slow-time FIR clutter canceller over the sweep stream.

    Taps must sum to zero so static returns cancel exactly.  Until the
    history fills, the output is all-zero and flagged warm-up.
    """

    def __init__(self, taps=(1.0, -1.0)):
        taps = tuple(float(t) for t in taps)
        if len(taps) < 2:
            raise ConfigError("MTI needs at least 2 taps")
        if abs(sum(taps)) > 1e-12:
            raise ConfigError(f"MTI taps must sum to 0, got {sum(taps)}")
        self.taps = taps
        self._history: deque[np.ndarray] = deque(maxlen=len(taps) - 1)
        self._shape: tuple[int, ...] | None = None

    @property
    def settled(self) -> bool:
        return len(self._history) == len(self.taps) - 1

    def apply(self, tensor: RaTensor) -> tuple[RaTensor, bool]:
        """Filter one sweep; returns (filtered tensor, warm_up flag)."""
        if self._shape is None:
            self._shape = tensor.power.shape
        elif tensor.power.shape != self._shape:
            raise StreamError(
                f"tensor shape changed mid-stream: {tensor.power.shape} "
                f"vs {self._shape}"
            )
        amplitude = np.sqrt(tensor.power)
        if not self.settled:
            self._history.append(amplitude)
            out = np.zeros_like(tensor.power)
            return replace(tensor, power=out), True

        filtered = self.taps[0] * amplitude
        # history[-1] is the previous sweep: tap i pairs with sweep k-i
        for i, tap in enumerate(self.taps[1:], start=1):
            filtered = filtered + tap * self._history[-i]
        self._history.append(amplitude)
        out = (filtered * filtered).astype(tensor.power.dtype)
        return replace(tensor, power=out), False


def cfar_threshold_factor(n_total_train: int, pfa: float) -> float:
    """Cell-averaging CFAR scale factor alpha = n (pfa^(-1/n) - 1)."""
    if n_total_train < 1:
        raise ConfigError("training cell count must be >= 1")
    if not 0.0 < pfa < 1.0:
        raise ConfigError("pfa must be in (0, 1)")
    return n_total_train * (pfa ** (-1.0 / n_total_train) - 1.0)


def ca_cfar(tensor: RaTensor, cfg: CfarConfig) -> list[Detection]:
    """1-D CA-CFAR along range, independently per beam pair.

    Edge cells use only the training cells that exist, with the
    threshold factor recomputed for the reduced count so the design
    pfa holds there too.
    """
    n = tensor.n_range
    if 2 * (cfg.n_train + cfg.n_guard) + 1 > n:
        raise ConfigError(
            f"CFAR window {2 * (cfg.n_train + cfg.n_guard) + 1} exceeds "
            f"range axis length {n}"
        )
    power = tensor.power.astype(np.float64)
    # training sums via cumulative sum along range, one pass per cell index
    cs = np.concatenate(
        [np.zeros((1,) + power.shape[1:]), np.cumsum(power, axis=0)], axis=0
    )
    i = np.arange(n)
    left_lo = np.clip(i - cfg.n_guard - cfg.n_train, 0, n)
    left_hi = np.clip(i - cfg.n_guard, 0, n)  # exclusive
    right_lo = np.clip(i + cfg.n_guard + 1, 0, n)
    right_hi = np.clip(i + cfg.n_guard + cfg.n_train + 1, 0, n)  # exclusive
    counts = (left_hi - left_lo) + (right_hi - right_lo)
    train_sum = (cs[left_hi] - cs[left_lo]) + (cs[right_hi] - cs[right_lo])
    # threshold = alpha * mean = (pfa^(-1/cnt) - 1) * sum
    factor = cfg.pfa ** (-1.0 / counts) - 1.0
    threshold = factor[:, None, None] * train_sum
    hits = power > threshold
    r_idx, t_idx, x_idx = np.nonzero(hits)
    return [
        Detection(int(r), int(t), int(x), float(power[r, t, x]))
        for r, t, x in zip(r_idx, t_idx, x_idx)
    ]


@dataclass(frozen=True)
class DbscanConfig:
    eps: float = 3.0
    min_pts: int = 3
    range_scale: float = 1.0
    tx_scale: float = 2.0
    rx_scale: float = 2.0

    def __post_init__(self):
        if self.eps <= 0:
            raise ConfigError("eps must be > 0")
        if self.min_pts < 1:
            raise ConfigError("min_pts must be >= 1")


def dbscan(
    dets: list[Detection], cfg: DbscanConfig
) -> tuple[list[list[int]], list[int]]:
    """DBSCAN over scaled tensor indices.

    Returns (clusters as lists of indices into dets, noise indices).
    Points are processed in ascending index order, so labeling is
    deterministic; border points join the first core cluster that
    reaches them.
    """
    n = len(dets)
    if n == 0:
        return [], []
    pts = np.array(
        [
            (
                d.range_idx * cfg.range_scale,
                d.tx_idx * cfg.tx_scale,
                d.rx_idx * cfg.rx_scale,
            )
            for d in dets
        ]
    )
    d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
    neighbors = [np.nonzero(row <= cfg.eps**2)[0] for row in d2]
    is_core = np.array([len(nb) >= cfg.min_pts for nb in neighbors])

    labels = np.full(n, -1)
    cluster_id = 0
    for p in range(n):
        if labels[p] != -1 or not is_core[p]:
            continue
        # grow a new cluster from this core point
        labels[p] = cluster_id
        frontier = deque(neighbors[p])
        while frontier:
            q = frontier.popleft()
            if labels[q] != -1:
                continue
            labels[q] = cluster_id
            if is_core[q]:
                frontier.extend(neighbors[q])
        cluster_id += 1

    clusters = [
        [i for i in range(n) if labels[i] == c] for c in range(cluster_id)
    ]
    noise = [i for i in range(n) if labels[i] == -1]
    return clusters, noise


def cluster_detections(
    dets: list[Detection], cfg: DbscanConfig, tensor: RaTensor
) -> tuple[list[Cluster], list[Detection]]:
    """Run DBSCAN and build centroid measurements for each cluster."""
    member_lists, noise_idx = dbscan(dets, cfg)
    clusters = [
        make_cluster(tuple(dets[i] for i in members), tensor)
        for members in member_lists
    ]
    return clusters, [dets[i] for i in noise_idx]


def make_cluster(members: tuple[Detection, ...], tensor: RaTensor) -> Cluster:
    """Power-weighted centroid measurement for a detection group.

    The bearing of one detection is the mean of its tx and rx steering
    angles (colocated arrays see the same true bearing).
    """
    if not members:
        raise ConfigError("cluster must have at least one member")
    powers = np.array([d.power for d in members])
    ranges = np.array([d.range_idx * tensor.bin_size_m for d in members])
    angles = np.array(
        [
            0.5 * (tensor.tx_angles_deg[d.tx_idx] + tensor.rx_angles_deg[d.rx_idx])
            for d in members
        ]
    )
    total = float(powers.sum())
    return Cluster(
        members=members,
        centroid_range_m=float(np.dot(powers, ranges) / total),
        centroid_angle_deg=float(np.dot(powers, angles) / total),
        total_power=total,
    )


def cluster_to_measurement(cluster: Cluster) -> tuple[float, float, float]:
    """(range_m, angle_deg, power) measurement for the tracker."""
    return (
        cluster.centroid_range_m,
        cluster.centroid_angle_deg,
        cluster.total_power,
    )
