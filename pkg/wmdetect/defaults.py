"""Numerical constants and desk-scale caps

Collects the tolerances, grid sizes and caps used throughout the package.
Functions read these as keyword defaults, so every value can be overridden
per call without touching this module.
"""
import math

# Method of types
ENUMERATION_CAP = 12        # longest sequence for exact enumeration
MAX_EXACT_ALPHABET = 3      # largest alphabet for exact attack enumeration
PMF_TOLERANCE = 1e-12       # |sum(pmf) - 1| accepted without error
TIE_TOLERANCE = 1e-12       # objectives closer than this are ties

# Gaussian case
CLAMP_TOLERANCE = 1e-12     # slack before arccos/sqrt arguments are clipped
DISTORTION_SLACK = 1e-9     # relative slack on ||y - x||^2 <= n*D_e
UNIT_CORRELATION = 1e-12    # 1 - rho_hat^2 below this counts as |rho_hat| = 1

# Exponents
SIN_FLOOR = 1e-300          # lower clamp on sin(Psi_1)
ZERO_BRANCH_TOLERANCE = 1e-12   # ratio <= sigma2*(1 + tol) gives a zero exponent
E1_GRID_POINTS = 10000
E1_TOLERANCE = 1e-8         # golden-section absolute tolerance in r
CURVE_SAMPLES = 400
CURVE_STRETCH = 1.2         # lambda_max = stretch * zero_exponent_lambda
HALF_LN2 = 0.5 * math.log(2.0)

# Worst-case attack inner minimization
FW_MAX_ITER = 10000
FW_GAP_TOLERANCE = 1e-8
GRID_FALLBACK_N = 8         # exact 1/n grid used up to this length
ATTACK_DEMO_MAX_N = 6
MAX_VERTICES = 100000       # assignments enumerated by the inner divergence solver
MAX_TYPE_PAIRS = 10 ** 7    # (y-type, z-type) pairs visited by the attack embedders

# Monte Carlo harness
MIN_TRIALS = 100
TRIAL_BLOCK = 2000          # trials per independent random stream
WILSON_Z = 1.96
SCHEMA_VERSION = "1"
