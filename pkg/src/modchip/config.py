"""
Package-wide defaults.

Units are part of every name: frequencies in MHz unless suffixed GHZ,
times in ns unless suffixed US, fluxes in units of the flux quantum.
"""

# Transmon regime and spectrum oracle
TRANSMON_REGIME_MIN_RATIO = 20.0
CHARGE_CUTOFF = 30
DEFAULT_GAP_UEV = 180.0

# Coherence defaults for qubits without measured values
FIXED_T1_US = 73.0
FIXED_T2_US = 43.0
TUNABLE_T1_US = 18.0
TUNABLE_T2_US = 15.0

# Dispersive-shift guards
DISPERSIVE_RATIO_MIN = 5.0
DEGENERACY_FACTOR = 10.0

# Bump geometry as bonded
BUMP_HEIGHT_PRE_UM = 6.5
BUMP_DIAMETER_PRE_UM = 40.0

# Dynamics
LEVELS_PER_TRANSMON = 3
DEFAULT_RAMP_NS = 8.0
DEFAULT_SIDEBAND_ORDER = 2
DEFAULT_PHI_AC = 0.25
INITIAL_STEP_NS = 0.01
MIN_STEP_NS = 1e-5
PROPAGATOR_TOLERANCE = 1e-9
SIDEBAND_SAMPLES = 1024
SIDEBAND_WEIGHT_TOLERANCE = 1e-6
CHUNK_STEPS = 4096
CHEVRON_TOLERANCE = 1e-6
LINDBLAD_STEP_NS = 1.0

# Calibration
CONTROL_BAND_MHZ = (100.0, 1000.0)
RAMSEY_DETUNING_MHZ = 1.0
RAMSEY_SPAN_NS = 4000.0
RAMSEY_POINTS = 81
RAMSEY_MIN_VISIBILITY = 0.1
CALIBRATION_SHOTS = 500
MIN_TRANSFER = 0.5

# Benchmarking
RB_LENGTHS = (2, 4, 8, 16, 32, 64)
RB_SEQUENCES = 30
RB_SHOTS = 500
IRB_QUOTE_THRESHOLD = 0.92

# Bell test
BELL_RUNS = 100
BELL_SHOTS = 10_000
BELL_PAIRS = ("A0-B7", "B0-C7", "C1-D6")

# Command-line interface
OUTPUT_ROOT_ENV = "MODCHIP_OUTPUT_ROOT"
SCENARIO_SCHEMA_VERSION = 1
DEVICE_SCHEMA_VERSION = 1
