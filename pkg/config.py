import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

BASE_DIR = os.path.dirname(os.path.abspath(__file__))

def get_path(filename):
    return os.path.join(BASE_DIR, filename)

# ==========================================
# CONFIGURATION & CONSTANTS
# ==========================================

TOOL_VERSION = "1.3.0"

# File/Directory Paths
LOGS_DIR = get_path("Logs")
REPORTS_DIR = get_path("Reports")
FIXTURES_DIR = get_path("fixtures")
DATABASE_FILE = os.path.abspath(get_path("workbench.db"))

# --- CONVEXITY ---
# Smallest admissible principal radius of curvature on the validation grid.
EPS_CONVEX = 1e-8
# Odd-harmonic families must clear a wider margin before they count as convex.
HARMONIC_MARGIN = 1e-6

# --- QUADRATURE ---
# 2D: uniform angular nodes. 3D: Gauss-Legendre order in cos(theta),
# with twice as many azimuthal nodes.
QUAD_2D_NODES = 256
QUAD_3D_ORDER = 48
VALIDATION_2D_NODES = 128
VALIDATION_3D_ORDER = 24
FIBER_ORDER = 64
# Projection grids for batched Monte Carlo integrands
BATCH_2D_NODES = 32
BATCH_3D_ORDER = 12

# --- MONTE CARLO ---
MC_BLOCK_SIZE = 4096
MC_DEFAULT_SAMPLES = 100000
DEFAULT_SEED = 42
FRAME_RETRY_CAP = 100

# --- VERDICTS ---
SIGMA_BAND = 4.0
MC_FLOOR_REL = 1e-9
QUAD_REL_TOL = 1e-8
ORACLE_REL_TOL = 1e-9
CLOSED_FORM_REL_TOL = 1e-10
MEMBERSHIP_REL_TOL = 1e-2

# --- SYMBOLIC ---
EXPONENT_CAP = 64
SWEEP_N_MAX = 8

# Worker threads for suites and Monte Carlo blocks
DEFAULT_THREADS = os.cpu_count() or 1

# --- VARIABLES FROM WORKBENCH_CONFIG.TXT ---
# Defaults above; if workbench_config.txt exists we exec it to override.

try:
    with open(get_path("workbench_config.txt"), "r") as f:
        exec(f.read(), globals())
except FileNotFoundError:
    pass
except Exception as e:
    print(f"⚠️ Warning: Error loading workbench_config.txt: {e}")

# Overrides from ENV (take precedence over workbench_config.txt)
if os.getenv("WORKBENCH_THREADS"): DEFAULT_THREADS = int(os.getenv("WORKBENCH_THREADS"))
if os.getenv("WORKBENCH_SEED"): DEFAULT_SEED = int(os.getenv("WORKBENCH_SEED"))
if os.getenv("WORKBENCH_SAMPLES"): MC_DEFAULT_SAMPLES = int(os.getenv("WORKBENCH_SAMPLES"))
if os.getenv("WORKBENCH_QUAD_2D"): QUAD_2D_NODES = int(os.getenv("WORKBENCH_QUAD_2D"))
if os.getenv("WORKBENCH_QUAD_3D"): QUAD_3D_ORDER = int(os.getenv("WORKBENCH_QUAD_3D"))
if os.getenv("WORKBENCH_DB"): DATABASE_FILE = os.path.abspath(os.getenv("WORKBENCH_DB"))

# --- DATA SANITIZATION ---
try:
    DEFAULT_THREADS = max(1, int(DEFAULT_THREADS))
    MC_BLOCK_SIZE = max(1, int(MC_BLOCK_SIZE))
    MC_DEFAULT_SAMPLES = max(2, int(MC_DEFAULT_SAMPLES))
    QUAD_2D_NODES = max(8, int(QUAD_2D_NODES))
    QUAD_3D_ORDER = max(4, int(QUAD_3D_ORDER))
    DEFAULT_SEED = int(DEFAULT_SEED)
except Exception as e:
    print(f"⚠️ Warning: Failed to sanitize numeric settings: {e}")

# Ensure directories exist
os.makedirs(LOGS_DIR, exist_ok=True)
