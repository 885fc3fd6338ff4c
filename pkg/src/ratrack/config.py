"""YAML pipeline configuration.

Every paper-of-record parameter and every declared default from the
individual stages surfaces here so a single document drives a run.
Unknown keys are rejected to catch typos early.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np
import yaml

from .channel import BeamCodebook, SceneConfig, TargetTruth, default_codebook
from .detector import CfarConfig, DbscanConfig
from .errors import ConfigError
from .receiver import DEFAULT_N_RANGE
from .tracker import TrackerConfig
from .waveform import WaveformConfig


@dataclass(frozen=True)
class RunConfig:
    n_sweeps: int = 50
    n_range: int = DEFAULT_N_RANGE
    mti_taps: tuple[float, ...] = (1.0, -1.0)
    score_radius_m: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if self.n_sweeps < 1:
            raise ConfigError("n_sweeps must be >= 1")


@dataclass(frozen=True)
class PipelineConfig:
    waveform: WaveformConfig = field(default_factory=WaveformConfig)
    codebook: BeamCodebook = field(default_factory=default_codebook)
    scene: SceneConfig = field(default_factory=SceneConfig)
    cfar: CfarConfig = field(default_factory=CfarConfig)
    dbscan: DbscanConfig = field(default_factory=DbscanConfig)
    tracker: TrackerConfig = field(default_factory=TrackerConfig)
    run: RunConfig = field(default_factory=RunConfig)


def _build(cls, section: dict, name: str):
    allowed = {f.name for f in fields(cls)}
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in [{name}]: {sorted(unknown)}")
    try:
        return cls(**section)
    except TypeError as exc:
        raise ConfigError(f"invalid [{name}] section: {exc}")


def _build_codebook(section: dict) -> BeamCodebook:
    section = dict(section)
    span = section.pop("span_deg", None)
    step = section.pop("step_deg", None)
    if span is not None or step is not None:
        if "tx_angles_deg" in section or "rx_angles_deg" in section:
            raise ConfigError(
                "codebook: give span/step or explicit angle tables, not both"
            )
        angles = tuple(
            np.arange(-(span or 50.0), (span or 50.0) + (step or 5.0) / 2,
                      step or 5.0)
        )
        section["tx_angles_deg"] = angles
        section["rx_angles_deg"] = angles
    return _build(BeamCodebook, section, "codebook")


def _build_scene(section: dict) -> SceneConfig:
    section = dict(section)
    targets = tuple(
        TargetTruth(
            pos=tuple(t["pos"]),
            vel=tuple(t.get("vel", (0.0, 0.0))),
            reflectivity=float(t.get("reflectivity", 1.0)),
        )
        for t in section.pop("targets", [])
    )
    section["targets"] = targets
    return _build(SceneConfig, section, "scene")


def from_dict(doc: dict) -> PipelineConfig:
    doc = dict(doc or {})
    known = {"waveform", "codebook", "scene", "cfar", "dbscan", "tracker", "run"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown top-level sections: {sorted(unknown)}")
    run_section = dict(doc.get("run", {}))
    if "mti_taps" in run_section:
        run_section["mti_taps"] = tuple(run_section["mti_taps"])
    return PipelineConfig(
        waveform=_build(WaveformConfig, doc.get("waveform", {}), "waveform"),
        codebook=(
            _build_codebook(doc["codebook"])
            if "codebook" in doc
            else default_codebook()
        ),
        scene=_build_scene(doc.get("scene", {})),
        cfar=_build(CfarConfig, doc.get("cfar", {}), "cfar"),
        dbscan=_build(DbscanConfig, doc.get("dbscan", {}), "dbscan"),
        tracker=_build(TrackerConfig, doc.get("tracker", {}), "tracker"),
        run=_build(RunConfig, run_section, "run"),
    )


def load(path: str | Path) -> PipelineConfig:
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}")
    if doc is not None and not isinstance(doc, dict):
        raise ConfigError(f"config {path} must be a mapping")
    return from_dict(doc or {})
