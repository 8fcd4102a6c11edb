# Shared constants for the kinematics, verification and simulation layers

TOOL_NAME = "rigidsim"
TOOL_VERSION = "0.3.0"

# |det A| at or below this is treated as singular by lin3.solve3
SINGULAR_TOL = 1e-12

# |det S| at or below this aborts inversion and integration
GIMBAL_TOL = 1e-8

# chart_convert refuses QuatReduced attitudes this close to the eigenangle pi
QUAT_MIN_SCALAR = 1e-6

# Rejection threshold that keeps sampled Euler-chart points away from gimbal lock
SAMPLE_MIN_DET = 0.05

# Symmetry slack for inertia matrices, relative to max |J_ij|
INERTIA_SYMMETRY_TOL = 1e-12

# Central-difference step for the partials oracle
FD_STEP = 1e-6

# Defaults for `rigidsim verify`
DEFAULT_SAMPLES = 1000
DEFAULT_SEED = 42
DEFAULT_TOL = 1e-9

# `rigidsim compare` passes iff every pairwise max geodesic angle stays below this
COMPARE_MAX_ANGLE = 1e-6

TRAJECTORY_COLUMNS = (
    "t", "q1", "q2", "q3", "qd1", "qd2", "qd3", "w1", "w2", "w3",
    "R11", "R12", "R13", "R21", "R22", "R23", "R31", "R32", "R33",
    "energy", "hx", "hy", "hz",
)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_GIMBAL_LOCK = 3
EXIT_IO = 4
EXIT_INEXPRESSIBLE = 5
