"""
rigidsim: rigid-body attitude dynamics in generalized coordinates.

Euler's equation written through 3-2-1 / 3-1-3 Euler angles and reduced Euler
parameters, numerical checks of the kinematic identities behind it, and a
fixed-step integrator that compares the generalized-coordinate formulation with
the body-frame one.
"""

from rigidsim.constants import TOOL_VERSION as __version__
