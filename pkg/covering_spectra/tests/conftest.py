"""Shared constants for covering-spectra tests."""
from math import cos, pi

# Cycle of length 12 and its connected double cover, the 24-cycle
MOCK_CYCLE_LENGTH = 12

# lambda_1 of the 12-cycle (multiplicity two)
MOCK_LAMBDA_1 = 2 - 2 * cos(pi / 6)

# lambda_1 of the 24-cycle, the first new eigenvalue of the double cover
MOCK_COVER_LAMBDA_1 = 2 - 2 * cos(pi / 12)

# Triangle as a plain JSON complex (graph only)
MOCK_TRIANGLE = {
    "name": "triangle",
    "vertices": 3,
    "edges": [[0, 1], [1, 2], [2, 0, 2.0]],
}

# Filled triangle: a disc with one face
MOCK_DISC = {
    "name": "disc",
    "vertices": 3,
    "edges": [[0, 1], [1, 2], [2, 0]],
    "faces": [[0, 1, 2]],
}

# Free group counts a(n) of index-n subgroups, rank 2
MOCK_HALL_F2 = [1, 3, 13, 71, 461, 3447]

# Closed genus-2 surface group: index-2 and index-3 subgroup counts
MOCK_GENUS2_INDEX_COUNTS = {2: 15, 3: 220}

# Batch job file
MOCK_JOB = {"id": "mu", "argv": ["group", "mu", "--factors", "2,4"]}
