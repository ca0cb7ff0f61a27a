"""Values computed by tools/oracles.py (independent of tentkit) and frozen here."""

# seed 2024, 4x4 pair scaled to spectral norm 0.8, Y0 = ones, t_end = 1, RK4 with 1e6 steps
REF_FLOW_SEED = 2024
REF_FLOW_Y1 = [1.508147799224693, 1.2258519529606744, 1.367769709462654, 1.4207943155623899]

# Gaussian data, p = 2, ten uniform elements, adaptive quadrature
PROJ_ERR_P2_H01 = 0.0017734716478486254

# u(x, t) for flux u^2 / 2 by bracketing root finding: (x, t, u)
BURGERS_POINTS = [
    (0.55, 0.1, 0.916803192611347),
    (0.6, 0.1, 1.0),
    (0.3, 0.05, 0.11983600578636291),
    (0.7, 0.08, 0.1781532495851163),
]
