"""Constants for covering-spectra."""
from typing import Final

DOMAIN: Final = "covering_spectra"
SCHEMA_VERSION: Final = 1

# Environment
ENV_CONFIG_PATH: Final = "COVERING_SPECTRA_CONFIG"

# Surface kinds
KIND_CYCLE: Final = "cycle"
KIND_PATH: Final = "path"
KIND_GRID_TORUS: Final = "grid_torus"
KIND_ANNULUS: Final = "annulus"
KIND_MOEBIUS: Final = "moebius"
KIND_GENUS_POLYGON: Final = "genus_g_polygon"
PRESET_KINDS: Final = (
    KIND_CYCLE,
    KIND_PATH,
    KIND_GRID_TORUS,
    KIND_ANNULUS,
    KIND_MOEBIUS,
    KIND_GENUS_POLYGON,
)

ORIENTABLE: Final = "orientable"
NON_ORIENTABLE: Final = "non_orientable"
GRAPH_ONLY: Final = "graph"
ORIENTATIONS: Final = (ORIENTABLE, NON_ORIENTABLE, GRAPH_ONLY)

# Laplacians
LAPLACE_GRAPH: Final = "graph"
LAPLACE_COTANGENT: Final = "cotangent"
LAPLACE_DIRICHLET: Final = "dirichlet"
DEGENERATE_AREA: Final = 1e-12

# Homology coefficients
COEFFS_Z: Final = "Z"
COEFFS_Z2: Final = "Z2"

# Count modes
MODE_CLOSED: Final = "closed"
MODE_OPEN: Final = "open"

# Verdicts
VERDICT_STABLE: Final = "I-stable"
VERDICT_STRICT: Final = "strictly-unstable"
VERDICT_WEAK: Final = "weakly-unstable"
VERDICT_AMBIGUOUS: Final = "ambiguous"
WEAK_GAP_RATIO: Final = 1e3

# Solver defaults
DEFAULT_EIG_COUNT: Final = 12
DEFAULT_TOL: Final = 1e-10
DEFAULT_SEED: Final = 7
DEFAULT_MAX_ITER: Final = 2000
DEFAULT_DENSE_LIMIT: Final = 2048  # above this, LOBPCG
DEFAULT_CLUSTER_RTOL: Final = 1e-7
CLUSTER_ATOL: Final = 1e-12
DEFAULT_COUNT_MARGIN: Final = 1e-8
DEFAULT_EPS_ZERO: Final = 1e-8
MAX_ZERO_FRACTION: Final = 0.5
CANONICAL_SAMPLES: Final = 256

# Enumeration bounds
DEFAULT_MAX_INDEX_FREE: Final = 6
DEFAULT_MAX_INDEX_RELATOR: Final = 4
DEFAULT_MAX_COSET_DEGREE: Final = 24
MAX_ABELIAN_ORDER: Final = 256
EXHAUSTIVE_ABELIAN_ORDER: Final = 32

# Experiments
DEFAULT_SIGMA_SEEDS: Final = 8
DEFAULT_SIGMA_MAX_SIZE: Final = 400
DEFAULT_INTEGRAL_SAMPLES: Final = 20
DEFAULT_RESPEC_DIM: Final = 50
RANK_TOL: Final = 1e-9
RANK_AMBIGUITY: Final = 100.0
TRANSFER_TOL: Final = 1e-12

# Output formats
FORMAT_JSON: Final = "json"
FORMAT_CSV: Final = "csv"

# Exit codes
EXIT_OK: Final = 0
EXIT_BOUND_VIOLATED: Final = 1
EXIT_USAGE: Final = 2
EXIT_AMBIGUOUS: Final = 3
