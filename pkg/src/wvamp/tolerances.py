"""Central numerical tolerance table.

Two tiers: ATOL_ALGEBRA for single algebraic identities (norms, hermiticity,
unitarity) and ATOL_ACCUMULATED for quantities assembled from many floating
point operations (probability sums, spectral reconstructions).
"""

ATOL_ALGEBRA = 1e-12
ATOL_ACCUMULATED = 1e-10

# |<post|prep>| below this is treated as an orthogonal postselection: the weak
# value is reported as undefined rather than as a meaningless huge float.
ORTHOGONAL_OVERLAP = 1e-14

# Kept-branch probabilities below this count as underflow.
PROB_UNDERFLOW = 1e-300

# Linear-response guard rails used by the scan regime flags.
REGIME_N_PHI = 0.1
REGIME_PHI_AW = 0.1
