"""Scoring of tracker output against simulator ground truth."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tracker import TrackStatus, hungarian


@dataclass(frozen=True)
class TruthEntry:
    target_key: int
    x: float
    y: float
    vx: float
    vy: float


@dataclass(frozen=True)
class TrackEntry:
    track_id: int
    status: TrackStatus
    x: float
    y: float
    vx: float
    vy: float


# per sweep_index: list of entries
TruthLog = dict[int, list[TruthEntry]]
TracksLog = dict[int, list[TrackEntry]]


@dataclass
class RunReport:
    pos_rmse_m: float = float("nan")
    vel_rmse_mps: float = float("nan")
    id_switch_count: int = 0
    false_track_count: int = 0
    track_fragmentation: int = 0
    mean_confirm_delay_sweeps: float = float("nan")
    empirical_pfa: float | None = None
    latency_ms: dict[str, float] = field(default_factory=dict)
    n_confirmed_tracks: int = 0
    per_track_pos_rmse_m: dict[int, float] = field(default_factory=dict)

    def to_text(self) -> str:
        lines = [
            "run report",
            "----------",
            f"confirmed tracks:        {self.n_confirmed_tracks}",
            f"position RMSE [m]:       {self.pos_rmse_m:.4f}",
            f"velocity RMSE [m/s]:     {self.vel_rmse_mps:.4f}",
            f"ID switches:             {self.id_switch_count}",
            f"false tracks:            {self.false_track_count}",
            f"track fragmentation:     {self.track_fragmentation}",
            f"mean confirm delay [sw]: {self.mean_confirm_delay_sweeps:.2f}",
        ]
        if self.empirical_pfa is not None:
            lines.append(f"empirical pfa:           {self.empirical_pfa:.3e}")
        for name, ms in sorted(self.latency_ms.items()):
            lines.append(f"latency {name} [ms]:".ljust(25) + f"{ms:.2f}")
        for tid, rmse in sorted(self.per_track_pos_rmse_m.items()):
            lines.append(f"  track {tid} pos RMSE [m]: {rmse:.4f}")
        return "\n".join(lines) + "\n"

    def to_csv_line(self) -> str:
        header = (
            "n_confirmed,pos_rmse_m,vel_rmse_mps,id_switches,false_tracks,"
            "fragmentation,mean_confirm_delay,empirical_pfa"
        )
        pfa = "" if self.empirical_pfa is None else f"{self.empirical_pfa:.6e}"
        row = (
            f"{self.n_confirmed_tracks},{self.pos_rmse_m:.6f},"
            f"{self.vel_rmse_mps:.6f},{self.id_switch_count},"
            f"{self.false_track_count},{self.track_fragmentation},"
            f"{self.mean_confirm_delay_sweeps:.4f},{pfa}"
        )
        return header + "\n" + row + "\n"


def match_tracks_to_truth(
    tracks_log: TracksLog, truth_log: TruthLog, radius_m: float = 2.0
) -> dict[int, list[tuple[int, int, float]]]:
    """Per-sweep minimum-cost matching of confirmed tracks to truth.

    Returns {sweep_index: [(track_id, target_key, distance_m), ...]}.
    """
    correspondence: dict[int, list[tuple[int, int, float]]] = {}
    for k, truths in truth_log.items():
        confirmed = [
            t for t in tracks_log.get(k, [])
            if t.status is TrackStatus.CONFIRMED
        ]
        if not confirmed or not truths:
            correspondence[k] = []
            continue
        cost = np.array(
            [
                [np.hypot(t.x - g.x, t.y - g.y) for g in truths]
                for t in confirmed
            ]
        )
        sentinel = 1e6 * max(radius_m, 1.0)
        pairs, _ = hungarian(np.where(cost <= radius_m, cost, sentinel))
        correspondence[k] = [
            (confirmed[i].track_id, truths[j].target_key, float(cost[i, j]))
            for i, j in pairs
            if cost[i, j] <= radius_m
        ]
    return correspondence


def compute_report(
    correspondence: dict[int, list[tuple[int, int, float]]],
    tracks_log: TracksLog,
    truth_log: TruthLog,
    confirm_sweeps: dict[int, int] | None = None,
    first_detection_sweeps: dict[int, int] | None = None,
) -> RunReport:
    """Aggregate RMSE, identity and lifecycle metrics.

    confirm_sweeps maps track_id to the sweep it was confirmed;
    first_detection_sweeps maps target_key to the sweep a measurement
    first appeared near it.  Both are optional (confirm delay is NaN
    without them).
    """
    report = RunReport()

    track_pos = {
        (k, t.track_id): (t.x, t.y, t.vx, t.vy)
        for k, entries in tracks_log.items()
        for t in entries
    }
    truth_pos = {
        (k, g.target_key): (g.x, g.y, g.vx, g.vy)
        for k, entries in truth_log.items()
        for g in entries
    }

    pos_sq: list[float] = []
    vel_sq: list[float] = []
    per_track_sq: dict[int, list[float]] = {}
    matched_seq: dict[int, list[tuple[int, int]]] = {}  # target -> (sweep, id)
    ever_matched: set[int] = set()
    for k in sorted(correspondence):
        for tid, key, _dist in correspondence[k]:
            tx, ty, tvx, tvy = track_pos[(k, tid)]
            gx, gy, gvx, gvy = truth_pos[(k, key)]
            e2 = (tx - gx) ** 2 + (ty - gy) ** 2
            pos_sq.append(e2)
            vel_sq.append((tvx - gvx) ** 2 + (tvy - gvy) ** 2)
            per_track_sq.setdefault(tid, []).append(e2)
            matched_seq.setdefault(key, []).append((k, tid))
            ever_matched.add(tid)

    if pos_sq:
        report.pos_rmse_m = float(np.sqrt(np.mean(pos_sq)))
        report.vel_rmse_mps = float(np.sqrt(np.mean(vel_sq)))
        report.per_track_pos_rmse_m = {
            tid: float(np.sqrt(np.mean(v))) for tid, v in per_track_sq.items()
        }

    for key, seq in matched_seq.items():
        ids = [tid for _, tid in seq]
        report.id_switch_count += sum(
            1 for a, b in zip(ids, ids[1:]) if a != b
        )
        report.track_fragmentation += len(set(ids)) - 1

    confirmed_ids = {
        t.track_id
        for entries in tracks_log.values()
        for t in entries
        if t.status is TrackStatus.CONFIRMED
    }
    report.n_confirmed_tracks = len(confirmed_ids)
    report.false_track_count = len(confirmed_ids - ever_matched)

    if confirm_sweeps and first_detection_sweeps:
        delays = []
        for key, seq in matched_seq.items():
            first_det = first_detection_sweeps.get(key)
            tid = seq[0][1]
            confirmed_at = confirm_sweeps.get(tid)
            if first_det is not None and confirmed_at is not None:
                delays.append(confirmed_at - first_det)
        if delays:
            report.mean_confirm_delay_sweeps = float(np.mean(delays))
    return report
