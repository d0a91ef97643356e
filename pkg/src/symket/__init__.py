"""Exchange-symmetrized few-particle states: cloning, entanglement, densities."""
from .hilbert import (
    BasisLabel,
    NotSeparable,
    State,
    Statistics,
    ZeroNormState,
    combine_location,
    distance,
    exchange,
    factorize_location,
    inner,
    ket,
    same_ray,
    symmetrize,
    symmetrize_raw,
    tensor,
)

__version__ = "0.1.0"
