# -*- coding: utf-8 -*-
"""
Shared constants: default hyperparameters, numerical floors and file-format names.
"""

# Degrees of freedom
DOF_PITCH = "pitch"
DOF_YAW = "yaw"
DOFS = (DOF_PITCH, DOF_YAW)

# Controller tags
CONTROLLER_MPPI = "mppi"
CONTROLLER_MPC = "mpc"
CONTROLLERS = (CONTROLLER_MPPI, CONTROLLER_MPC)

# Trajectory kinds
TRAJ_OVAL_HORIZONTAL = "oval_horizontal"
TRAJ_OVAL_VERTICAL = "oval_vertical"
TRAJ_INFINITY_HORIZONTAL = "infinity_horizontal"
TRAJ_INFINITY_VERTICAL = "infinity_vertical"
TRAJ_STAR = "star"
TRAJECTORY_KINDS = (
    TRAJ_OVAL_HORIZONTAL,
    TRAJ_OVAL_VERTICAL,
    TRAJ_INFINITY_HORIZONTAL,
    TRAJ_INFINITY_VERTICAL,
    TRAJ_STAR,
)
DEFAULT_AMPLITUDE_MAJOR_DEG = 10.0
DEFAULT_AMPLITUDE_MINOR_DEG = 5.0
DEFAULT_TRAJECTORY_POINTS = 200
STAR_TIPS = 5

# Ground-truth position map g(u) = A*tanh(B*u) + C*u
GROUND_TRUTH_A_DEG = 35.0
GROUND_TRUTH_B = {DOF_PITCH: 1.2, DOF_YAW: 1.0}
GROUND_TRUTH_C_DEG_PER_RAD = 3.0
DATASET_U_RANGE_RAD = 1.5
DATASET_SAMPLES = 2000
DATASET_NOISE_STD_DEG = 1.0

# GMM / EM
GMM_COMPONENTS = 15
GMM_MAX_ITER = 200
# Threshold on the change of the mean per-sample log-likelihood.
GMM_TOL = 1e-3
COVARIANCE_FLOOR = 1e-6
MIN_COMPONENT_MASS = 1e-8

# Plant
PROCESS_SCALE = 0.02
LOAD_GAIN = 0.03
LOAD_FREQUENCY = 10.0
MEASUREMENT_NOISE_STD_DEG = 0.05
OBSERVATION_GAIN = 1.0
STATE_CLAMP_DEG = 90.0
CONTROL_EPSILON_RAD = 1e-4

# RBF identifier / EKF
RBF_BASIS_COUNT = 10
P0_SCALE = 1.0
Q0_SCALE = 0.07
R0 = 0.1
OUTLIER_GATE_SIGMAS = 10.0
FALLBACK_WIDTH = 1.0
EXCITATION_STEPS = 50
EXCITATION_STEP_STD_RAD = 0.1
EXCITATION_U_LIMIT_RAD = 1.0
SNAPSHOT_EVERY = 50

# MPPI
MPPI_NUM_SAMPLES = 20
MPPI_HORIZON = 20
MPPI_TEMPERATURE = 0.01
MPPI_CONTROL_NOISE_STD = 0.005
STAGE_STATE_WEIGHT = 0.2
CONTROL_WEIGHT = 0.6
TERMINAL_WEIGHT = 17.0
CONTROL_BOUND_RAD = 1.5
DIVERGED_COST = 1e12

SAMPLING_NOMINAL = "nominal"
SAMPLING_RANDOM_WALK = "random_walk"
SAMPLING_MODES = (SAMPLING_NOMINAL, SAMPLING_RANDOM_WALK)

ROLLOUT_VECTORIZED = "vectorized"
ROLLOUT_SEQUENTIAL = "sequential"
ROLLOUT_PARALLEL = "parallel"
ROLLOUT_MODES = (ROLLOUT_VECTORIZED, ROLLOUT_SEQUENTIAL, ROLLOUT_PARALLEL)

# MPC
MPC_MAX_SOLVER_ITERS = 100
MPC_GRADIENT_STEP = 1e-4
MPC_CONVERGENCE_TOL = 1e-6
MPC_ARMIJO_C = 1e-4
MPC_MIN_STEP = 1e-12

# Experiment
REPEATS = 5
MASTER_SEED = 20240917
MPPI_SEED = 7

# Output layout
SCHEMA_VERSION = 1
LOGS_DIR = "logs"
TIMINGS_DIR = "timings"
PLOTS_DIR = "plots"
SNAPSHOTS_DIR = "identifier_snapshots"
REPORT_FILE = "report.csv"
TIMING_REPORT_FILE = "timing_report.csv"
REPORT_TABLE_FILE = "report.txt"
TIMING_PLOT_FILE = "timing.svg"

# Plot colours (reference red, MPC green, MPPI blue)
COLOR_REFERENCE = "red"
COLOR_BY_CONTROLLER = {CONTROLLER_MPC: "green", CONTROLLER_MPPI: "blue"}

# CLI exit codes
EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_RUNTIME_ERROR = 3
