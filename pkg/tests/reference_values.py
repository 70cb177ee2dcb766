"""Published reference values used as test oracles.

Table rows: d -> (nu_max, E_d, bell (E, #E, sigma), cluster (E, #E, sigma)).
Decimals are rounded to three places in the source.
"""

TABLE1 = {
    2: (1, 1.0, (1.0, 1, 0.0), (1.0, 1, 0.0)),
    3: (2, 1.585, (1.195, 2, 0.276), (1.392, 1, 0.0)),
    4: (2, 2.0, (2.0, 1, 0.0), (2.0, 1, 0.0)),
    5: (3, 2.322, (1.881, 5, 0.354), (2.065, 3, 0.077)),
    6: (3, 2.585, (2.274, 4, 0.237), (2.372, 4, 0.106)),
    7: (3, 2.807, (2.617, 2, 0.078), (2.676, 1, 0.0)),
    8: (3, 3.0, (3.0, 1, 0.0), (3.0, 1, 0.0)),
    9: (4, 3.170, (2.765, 9, 0.432), (2.934, 10, 0.075)),
    10: (4, 3.322, (2.906, 9, 0.329), (3.055, 12, 0.079)),
    11: (4, 3.459, (3.072, 9, 0.239), (3.205, 10, 0.051)),
    12: (4, 3.585, (3.277, 8, 0.204), (3.377, 10, 0.050)),
    13: (4, 3.700, (3.444, 8, 0.118), (3.516, 9, 0.028)),
    14: (4, 3.807, (3.635, 6, 0.076), (3.672, 8, 0.032)),
    15: (4, 3.907, (3.814, 2, 0.025), (3.832, 1, 0.0)),
    16: (4, 4.0, (4.0, 1, 0.0), (4.0, 1, 0.0)),
}
TABLE_TOL = 5e-4

# Phase-optimized d = 3 run with the cluster resource and postselection
OPT_PHASES = (3.141592653589793, 0.575 * 3.141592653589793)
OPT_RATIO = 0.989
OPT_P = 0.258
OPT_P_NO_FIRST_POSTSELECT = 0.516

# Optimized unconditional <E> for d = 3 with Psi resources
OPT_E_PSI = 1.224

# Flip-flop correction
ZETA_NV = -1.2e-3
SHORTFALL_COEFF_D3 = 8.2
SHORTFALL_COEFF_D4 = 13.8
SHORTFALL_NV = 1.1e-5
SHORTFALL_NV_OPT = 9.3e-6

# V:SiC a^zz endpoints (MHz)
AZZ_UNSTRAINED = 232.0
AZZ_MIXED = 201.0
