"""Command-line surface: simulate, track, e2e, report.

Exit codes: 0 success, 2 configuration error, 3 tensor-file format
error.  Set RATRACK_LOG=debug|info|warning to control verbosity.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import config as config_mod
from . import pipeline, tensorfile
from .errors import ConfigError, FormatError, RatrackError

log = logging.getLogger("ratrack")


def _setup_logging():
    level = os.environ.get("RATRACK_LOG", "warning").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )


def _write_lines(path: Path, header: str, rows: list[str]) -> None:
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(row + "\n")


def cmd_simulate(args) -> int:
    cfg = config_mod.load(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    tensor_path = out / "tensors.ratn"
    truth_log: pipeline.TruthLog = {}
    try:
        with open(tensor_path, "wb") as fh:
            writer = None
            for tensor, truth in pipeline.simulate_sweeps(cfg):
                if writer is None:
                    writer = tensorfile.TensorWriter(
                        fh, tensor.n_range, tensor.tx_angles_deg,
                        tensor.rx_angles_deg, tensor.bin_size_m,
                    )
                writer.write(tensor)
                truth_log[tensor.sweep_index] = truth
                log.info("simulated sweep %d", tensor.sweep_index)
    except OSError as exc:
        print(f"I/O error writing {tensor_path}: {exc}", file=sys.stderr)
        return 1
    _write_lines(
        out / "truth.csv", pipeline.TRUTH_HEADER,
        pipeline.truth_log_to_rows(truth_log),
    )
    print(f"wrote {tensor_path} and {out / 'truth.csv'}")
    return 0


def _run_tracking_and_write(cfg, tensors, out: Path, truth_log) -> int:
    res = pipeline.run_tracking(tensors, cfg)
    report = pipeline.build_report(res, cfg, truth_log)
    out.mkdir(parents=True, exist_ok=True)
    _write_lines(out / "detections.csv", pipeline.DETECTIONS_HEADER,
                 res.detection_rows)
    _write_lines(out / "tracks.csv", pipeline.TRACKS_HEADER, res.track_rows)
    (out / "report.txt").write_text(report.to_text())
    (out / "report_summary.csv").write_text(report.to_csv_line())
    print(report.to_text(), end="")
    return 0


def cmd_track(args) -> int:
    cfg = config_mod.load(args.config)
    out = Path(args.out)
    truth_log = None
    if args.truth:
        with open(args.truth) as fh:
            truth_log = pipeline.truth_log_from_rows(fh)
    if args.tensors == "-":
        return _run_tracking_and_write(
            cfg, tensorfile.read_sweeps(sys.stdin.buffer), out, truth_log
        )
    with open(args.tensors, "rb") as fh:
        return _run_tracking_and_write(
            cfg, tensorfile.read_sweeps(fh), out, truth_log
        )


def cmd_e2e(args) -> int:
    cfg = config_mod.load(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    truth_log: pipeline.TruthLog = {}

    def tensors():
        for tensor, truth in pipeline.simulate_sweeps(cfg):
            truth_log[tensor.sweep_index] = truth
            yield tensor

    rc = _run_tracking_and_write(cfg, tensors(), out, truth_log)
    _write_lines(
        out / "truth.csv", pipeline.TRUTH_HEADER,
        pipeline.truth_log_to_rows(truth_log),
    )
    return rc


def cmd_report(args) -> int:
    path = Path(args.indir) / "report.txt"
    try:
        print(path.read_text(), end="")
    except OSError as exc:
        print(f"cannot read {path}: {exc}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ratrack",
        description="mmWave OFDM sensing simulator and tracking pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate sweeps to a tensor file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("track", help="run detection + tracking on tensors")
    p.add_argument("--tensors", required=True,
                   help="tensor file path, or - for stdin")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--truth", help="optional truth CSV for scoring")
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("e2e", help="simulate and track in one process")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_e2e)

    p = sub.add_parser("report", help="print a previously written report")
    p.add_argument("--in", dest="indir", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except FormatError as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return 3
    except RatrackError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
