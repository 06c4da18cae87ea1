"""Hot-kernel dispatch: compiled Cython module when built, NumPy otherwise.

Set DIRACFLUX_FORCE_REF=1 to force the NumPy path (used by the benchmark and
by tests that compare the two implementations).
"""

import os

from . import _ref

if os.environ.get("DIRACFLUX_FORCE_REF") == "1":
    impl = _ref
    HAVE_COMPILED = False
else:
    try:
        from . import _fast as impl  # type: ignore[attr-defined]

        HAVE_COMPILED = True
    except ImportError:
        impl = _ref
        HAVE_COMPILED = False

IMPL_NAME = impl.IMPL_NAME

gauss_phi_avg = impl.gauss_phi_avg
plane_sum = impl.plane_sum
osc_gauss_sum = impl.osc_gauss_sum
trilinear = impl.trilinear
bump_radial = impl.bump_radial

reference = _ref
