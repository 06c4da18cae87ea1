"""diracflux: relativistic wavepacket scattering at desk scale.

Verifies numerically that the time-integrated probability flux through a
distant spherical detector cone converges to the momentum-space probability
of the outgoing state in the same cone, for free and weakly coupled Dirac
dynamics, along with the stationary-phase asymptotics the statement rests on.
"""

from ._kernels import HAVE_COMPILED, IMPL_NAME

__all__ = ["HAVE_COMPILED", "IMPL_NAME", "__version__"]
__version__ = "0.1.0"
