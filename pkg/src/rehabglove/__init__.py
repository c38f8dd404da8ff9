"""EMG-triggered soft pneumatic hand rehabilitation glove toolkit.

Pipeline: sEMG streams are rectified and segmented into gesture windows,
five time-domain features feed a binary grasp/release KNN, and matched
classifications drive a rate-limited pneumatic controller over a forward
model of the lobster-inspired hybrid actuators. Sessions are orchestrated
against instruction protocols, logged as NDJSON, and served to companion
UIs over a TCP NDJSON wire protocol.
"""

__version__ = "0.1.0"

from .actuator import (
    ActuatorSpec,
    ActuatorState,
    bend_angles,
    calibrate,
    default_spec,
    tip_force,
    trajectory,
)
from .classifier import (
    EvalReport,
    KnnModel,
    LabeledSample,
    distance,
    evaluate,
    fit,
    load_model,
    model_sha256,
    predict,
    save_model,
)
from .control import (
    ControlTick,
    FingerChannel,
    GloveState,
    command_from_intent,
    default_glove,
    glove_snapshot,
    step,
)
from .errors import (
    CalibrationError,
    ParseError,
    PressureRangeError,
    RehabGloveError,
    ValidationError,
)
from .features import FeatureVector, Scaler, extract, standardize
from .service import SessionServer, encode_wire, event_to_wire
from .session import (
    Protocol,
    SessionControl,
    ProtocolStep,
    SessionEvent,
    SessionLog,
    default_protocol,
    load_log,
    load_protocol,
    replay,
    run_session,
    save_log,
    save_protocol,
)
from .signal import (
    GestureWindow,
    SampleStream,
    SegmentationConfig,
    auto_segmentation_config,
    ingest_csv,
    quiet_baseline_mav,
    rectify,
    segment_gestures,
    synth_gesture_stream,
    write_csv,
)
