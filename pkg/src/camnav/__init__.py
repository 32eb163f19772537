"""Indoor robot navigation stack: overhead-camera positioning, anti-windup
PID motor control, goal steering and trajectory tracking, with a
deterministic simulation harness and live socket servers."""

from .geometry import PixelPoint, Pose2D, WorldPoint, angle_diff, wrap_angle
from .vision import (
    CameraModel,
    ImagePose,
    MarkerColor,
    MarkerLayout,
    MarkerPixelSet,
    SyntheticFrame,
    centroid,
    estimate_pose,
    image_pose,
    project,
    render_markers,
    segment_color,
    unproject,
    world_pose,
)
from .calibration import CalibrationResult, CalibrationSet, calibrate
from .plant import PlantState, RobotParams, Wheel, read_encoders, set_stall, step_plant
from .controller import (
    CommandKind,
    MotorCommand,
    PidConfig,
    PidState,
    command_to_setpoints,
    controller_tick,
    pid_step,
)
from .navigation import (
    GoalSteerConfig,
    NavPhase,
    SineKind,
    Track,
    TrackerConfig,
    gen_sine_track,
    nearest_track_point,
    steer_step,
    tracker_speeds,
    tracker_step,
)
from .netlink import MessageKind, WireMessage, decode, encode
from .harness import (
    Exp1Summary,
    Exp2Summary,
    GoalScenario,
    SimConfig,
    TrackScenario,
    TrialResult,
    experiment1,
    experiment2,
    run_sim,
)

__version__ = "0.1.0"
