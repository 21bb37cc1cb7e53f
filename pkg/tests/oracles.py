"""Frozen reference values, produced independently of the package.

Lattice sums come from the polylogarithm, P_i(x) = Re Li_i(e^{ix}) and
Q_i(x) = Im Li_i(e^{ix}), evaluated by mpmath at 40 digits. The remaining
constants are closed forms worked out by hand.
"""

import math

P_VALUES = {
    (3, 1.0): 0.44857300728001739775,
    (5, 2.5): -0.79143329888499957772,
    (4, 0.7): 0.76410949401509767329,
    (2, 1.3): 0.02539884201486079058,
    (7, 3.0): -0.98286414914033476036,
    (3, 0.25): 1.1118466381793376191,
}

Q_VALUES = {
    (2, 1.0): 1.0139591323607685043,
    (4, 0.7): 0.71612750713870053676,
    (3, 1.3): 0.99417472409434005862,
    (6, 2.0): 0.89729098266368234461,
    (5, 0.3): 0.31781478557281770483,
}

# (n, x) -> (g, g', g'')
G_VALUES = {
    (5, 1.0): (0.5141069475012756832, 0.89580523867937996258, 0.44857300728001739775),
    (7, 2.0): (1.429180423402737611, 0.89729098266368234461, -0.43293380828731770315),
    (6, 0.5): (0.13140493259713341081, 0.51085256423059275494, 0.90812931549667023319),
}

# sum_{l=2}^{k} 1/(1 - cos theta_l) = (k^2 - 1)/6, so mu = 6/(k^2 - 1) when n = 4
def mu_n4(k):
    return 6.0 / (k * k - 1.0)


# int U^p over R^n = 2^{(n+2)/2} pi^{n/2} / Gamma(n/2 + 1); n = 4 gives 4 pi^2
U_POWER_N4 = 4.0 * math.pi**2

# Xi = gamma (n-2)/2 int U^p; n = 4 has gamma = 2, so Xi = 8 pi^2
XI_N4 = 8.0 * math.pi**2

# int U^{p-1} Z_0^2 over R^4: 16 * 2 pi^2 * (1/60)
Z0_MASS_N4 = 8.0 * math.pi**2 / 15.0

