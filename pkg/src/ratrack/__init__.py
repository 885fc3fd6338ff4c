"""mmWave OFDM sensing simulator and multi-target tracking pipeline."""

from .channel import (
    BeamCodebook,
    SceneConfig,
    TargetTruth,
    advance,
    array_factor,
    default_codebook,
    propagate,
)
from .detector import (
    CfarConfig,
    Cluster,
    DbscanConfig,
    Detection,
    MtiFilter,
    ca_cfar,
    cfar_threshold_factor,
    cluster_detections,
    cluster_to_measurement,
    dbscan,
)
from .errors import (
    ConfigError,
    FormatError,
    FrameError,
    NumericalError,
    RatrackError,
    SingularGeometryError,
    StreamError,
)
from .metrics import RunReport, compute_report, match_tracks_to_truth
from .receiver import RangeProfile, RaTensor, estimate_channel, range_profile, sweep
from .tracker import (
    Tracker,
    TrackerConfig,
    TrackState,
    TrackStatus,
    associate,
    ekf_predict,
    ekf_update,
    hungarian,
    measurement_model,
    polar_to_cartesian,
)
from .waveform import (
    IqFrame,
    ResourceGrid,
    WaveformConfig,
    build_grid,
    demodulate,
    modulate,
)

__version__ = "0.1.0"
