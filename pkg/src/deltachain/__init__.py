"""Transfer-matrix toolkit for chains of delta potentials on a 1D lattice.

The package covers periodic and Fibonacci-ordered chains built from two
inter-site spacings: closed-form matrix powers, substitution recursions,
band germs and bound states, Bloch and bound-state wavefunctions, and
scattering matrices with their commuting-energy structure.
"""

__version__ = "0.1.0"

from .core import (
    TAU,
    CellKind,
    ChainParams,
    Regime,
    TransferMatrix,
    cell_matrix,
    commutator,
    commutator_invariant,
    compose,
    delta_matrix,
    power_closed,
    tunnel_matrix,
)
from .errors import (
    BoundOutsideGerm,
    ChainError,
    DegenerateCell,
    GridTooCoarse,
    OrderTooLarge,
    OutOfBand,
    OverflowRisk,
    ParseError,
    ResonancePole,
)
from .scattering import (
    BackscatterPoint,
    CommutingPoint,
    SMatrix,
    backscatter_scan,
    band_edge_limit,
    bound_poles,
    commuting_points,
    fibonacci_periodic_equivalence,
    s_matrix,
)
from .spectra import (
    BandGerm,
    BoundState,
    DosSamples,
    EdgeKind,
    PartialBandCount,
    RationalLabel,
    band_germs,
    binding_equation_residual,
    bloch_label,
    bound_states,
    dos_estimate,
    energy_gauge,
    partial_band_census,
    rational_labels,
    supercell_label,
)
from .states import (
    BlochEigensystem,
    WaveSamples,
    bloch_eigensystem,
    bloch_wavefunction,
    bound_companion_pair,
    cell_coefficients,
    sample_wavefunction,
    scalar_product,
    scalar_product_samples,
)
from .substitution import (
    Word,
    RecursionRow,
    fibonacci_number,
    fibonacci_word,
    trace_map_sequence,
    word_counts,
    word_matrix,
)

__all__ = [
    "__version__",
    "TAU",
    "CellKind",
    "ChainParams",
    "Regime",
    "TransferMatrix",
    "cell_matrix",
    "commutator",
    "commutator_invariant",
    "compose",
    "delta_matrix",
    "power_closed",
    "tunnel_matrix",
    "BoundOutsideGerm",
    "ChainError",
    "DegenerateCell",
    "GridTooCoarse",
    "OrderTooLarge",
    "OutOfBand",
    "OverflowRisk",
    "ParseError",
    "ResonancePole",
    "BackscatterPoint",
    "CommutingPoint",
    "SMatrix",
    "backscatter_scan",
    "band_edge_limit",
    "bound_poles",
    "commuting_points",
    "fibonacci_periodic_equivalence",
    "s_matrix",
    "BandGerm",
    "BoundState",
    "DosSamples",
    "EdgeKind",
    "PartialBandCount",
    "RationalLabel",
    "band_germs",
    "binding_equation_residual",
    "bloch_label",
    "bound_states",
    "dos_estimate",
    "energy_gauge",
    "partial_band_census",
    "rational_labels",
    "supercell_label",
    "BlochEigensystem",
    "WaveSamples",
    "bloch_eigensystem",
    "bloch_wavefunction",
    "bound_companion_pair",
    "cell_coefficients",
    "sample_wavefunction",
    "scalar_product",
    "scalar_product_samples",
    "Word",
    "RecursionRow",
    "fibonacci_number",
    "fibonacci_word",
    "trace_map_sequence",
    "word_counts",
    "word_matrix",
]
