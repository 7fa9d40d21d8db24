"""Physical constants shared across modules."""

from scipy import constants as _sc

C_LIGHT = _sc.c
MU0 = _sc.mu_0
EPS0 = _sc.epsilon_0
K_BOLTZMANN = _sc.k

# Free-space wave impedance, rounded as is customary for absorber design.
Z0 = 377.0
