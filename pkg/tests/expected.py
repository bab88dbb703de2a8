"""Frozen reference values.

Each entry was fixed before the implementation was run against it. The
source tag says where the number comes from: ``closed`` for a closed form
evaluated by hand, ``hand`` for hand-solved small cases, ``published`` for
values printed in the original derivation.
"""
import math

LN2 = math.log(2.0)
SQRT_2PIE = math.sqrt(2.0 * math.pi * math.e)

# -- quadrature (closed) ----------------------------------------------------
QUAD_CASES = [
    # (name, a, b, exact, tol)
    ("x^2 on [0,1]", 0.0, 1.0, 1.0 / 3.0, 1e-10),
    ("normal pdf on [-8,8]", -8.0, 8.0, math.erf(8.0 / math.sqrt(2.0)), 1e-10),
    ("x exp(-x) on [0,40]", 0.0, 40.0, 1.0 - 41.0 * math.exp(-40.0), 1e-8),
]

# -- linear algebra (hand / published) ---------------------------------------
EIG_2X2 = ([[2.0, 1.0], [1.0, 2.0]], [1.0, 3.0])
TRIDIAG_HAND = ([2.0, 2.0], [-1.0], [1.0, 1.0], [1.0, 1.0])
TRACE_DIAG = ([1.0, 2.0], [3.0, 4.0], 11.0)
PSD_EXAMPLE_YES = [[2.0, -1.0, -1.0], [-1.0, 2.0, -1.0], [-1.0, -1.0, 2.0]]
PSD_EXAMPLE_NO = [[1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]]

# -- channels ---------------------------------------------------------------
AR1_COV_05_3 = [[1.0, 0.5, 0.25], [0.5, 1.0, 0.5], [0.25, 0.5, 1.0]]
RHO_GAMMA = [(0.0, 0.0), (-0.4, 0.5), (0.4, -0.5)]
MA1_GAMMA_HALF = (1.25, -0.5)  # diag, offdiag at rho = -0.4

# -- Fisher information (closed) ----------------------------------------------
AR1_FISHER_05_3 = [[x / 0.75 for x in row]
                   for row in [[1.0, -0.5, 0.0], [-0.5, 1.25, -0.5], [0.0, -0.5, 1.0]]]
GAMMA_J_2_1 = 2.0
GAMMA_J_1_275 = 1.0 / 27.5 ** 2

# -- capacities -------------------------------------------------------------
GAMMA_KAPPAS = (0.75, 1.0, 2.0, 4.5)


def gamma_c_high(kappa):
    """published: high-noise capacity of the gamma channel on [5/k, 50/k]."""
    return 81.0 / 242.0 * kappa


def gamma_c_low(kappa):
    """published: low-noise bound of the gamma channel on [5/k, 50/k]."""
    return math.log(math.sqrt(kappa) * math.log(10.0) / SQRT_2PIE)


def awgn_c_low(dt):
    """published: low-noise bound of AWGN (N=1) with amplitude dt."""
    return math.log(2.0 * dt / SQRT_2PIE)


def ar1_closed(P, rho):
    """published: high-noise capacity per use of AR(1) noise."""
    return 0.5 * P * (rho * rho + 1.0 + 2.0 * abs(rho)) / (1.0 - rho * rho)


AR1_MI_CASES = [
    # (P, rho, c, nats)  closed
    (1.0, 0.0, 0.3, 0.5),
    (1.0, 0.5, -1.0, 1.5),
    (1.0, 0.5, 1.0, 1.0 / 6.0),
]
AR1_CAP_05 = 1.5
WATERFILL_HAND = [
    # (levels, P, m, nu)
    ((1.0, 1.0), 2.0, (2.0, 2.0), 3.0),
    ((1.0, 3.0), 1.0, (2.0, 0.0), 3.0),
    ((1.0, 3.0), 3.0, (4.0, 2.0), 5.0),
]
REDUNDANCY_COEFF = 0.5   # J^2 / 2 for AWGN with N = 1
FIG2A_CHIGH_BITS_M20 = 0.005 / LN2
GAMMA_KAPPA_ONE_NAT = 242.0 / 81.0
