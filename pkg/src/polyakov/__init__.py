"""Numerical companions to the Polyakov string measure on compact surfaces."""

__version__ = "0.1.0"

from .errors import PolyakovError, ValidationError  # noqa: E402
from .hyperbolic import bolza_group, build_group, explicit_group, load_group_config  # noqa: E402
from .spectrum import enumerate_spectrum  # noqa: E402
from .zeta import polyakov_density, z_prime_at_one, zeta_truncated  # noqa: E402
from .wp import quadratic_differential_basis, wp_gram, wp_volume_density  # noqa: E402

__all__ = [
    "PolyakovError",
    "ValidationError",
    "bolza_group",
    "build_group",
    "explicit_group",
    "load_group_config",
    "enumerate_spectrum",
    "zeta_truncated",
    "z_prime_at_one",
    "polyakov_density",
    "quadratic_differential_basis",
    "wp_gram",
    "wp_volume_density",
]
