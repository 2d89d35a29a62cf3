"""Positive-energy analysis: S-matrix, poles, backscattering, commuting energies.

The S-matrix comes from the amplitude relation r = M l between the
exponential-basis coefficients on the two sides of the string, solved under
the two incidence boundary conditions and referenced with the free
propagation phases exp(-i beta h), exp(-2 i beta h) over the string length
h (in units of b) so that the free string gives S = identity exactly:

    s_pp = e^{-i beta h} / d      s_pm = b e^{-2 i beta h} / d
    s_mp = -c / d                 s_mm = e^{-i beta h} / d

In the scattering regime |d| = |a| = sqrt(1 + |b|^2) >= 1, so the
ResonancePole guard is defensive; poles live on the Bound-regime axis where
d(beta) = 0, which is exactly the bound-state condition.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    CellKind,
    ChainParams,
    Regime,
    TAU,
    TransferMatrix,
    cell_matrix,
    commutator,
    power_closed,
)
from .errors import ResonancePole
from .spectra import DEFAULT_BETA_RANGE, DEFAULT_GRID_STEPS, _cell_entries, bound_states
from .substitution import Word, fibonacci_number, fibonacci_word, word_matrix


@dataclass(frozen=True)
class SMatrix:
    """2x2 unitary scattering matrix plus the string length h (units of b)."""

    s_pp: complex
    s_pm: complex
    s_mp: complex
    s_mm: complex
    h_ratio: float

    def as_array(self) -> np.ndarray:
        return np.array([[self.s_pp, self.s_pm], [self.s_mp, self.s_mm]], dtype=complex)

    def unitarity_defect(self) -> float:
        S = self.as_array()
        return float(np.max(np.abs(S @ S.conj().T - np.eye(2))))


@dataclass(frozen=True)
class CommutingPoint:
    """beta(p) = tau*p*pi, where the S and L cell matrices are proportional."""

    p: int
    beta_p: float


@dataclass(frozen=True)
class BackscatterPoint:
    """One scan sample: |s_mp| for S^n at beta, with the Bloch label when in band.

    ``is_max`` tags discrete local maxima; ``mu`` is then the nearest
    reciprocal-lattice index round(beta/pi) labeling the band edge Kb = mu*pi.
    """

    beta: float
    s_mp_abs: float
    kb: float
    is_max: bool = False
    mu: int | None = None


def s_matrix(word: Word, params: ChainParams) -> SMatrix:
    """Scattering matrix of a string, from the rational transfer-matrix forms."""
    if params.regime is not Regime.SCATTERING:
        raise ValueError("s_matrix requires the Scattering regime")
    M = word_matrix(word, params)
    if abs(M.d) < 1e-12:
        raise ResonancePole(f"|d| = {abs(M.d):.3g} below threshold")
    h = word.total_ratio(params.q)
    ph = cmath.exp(-1j * params.beta * h)
    return SMatrix(
        s_pp=ph / M.d,
        s_pm=M.b * ph * ph / M.d,
        s_mp=-M.c / M.d,
        s_mm=ph / M.d,
        h_ratio=h,
    )


def bound_poles(
    word: Word,
    gamma: float,
    q: float,
    kappa_range=DEFAULT_BETA_RANGE,
    grid_steps: int = DEFAULT_GRID_STEPS,
):
    """Poles of the analytically continued S-matrix: the roots of d(kappa) = 0.

    Identical machinery to the Bound-regime bound-state scan, exposed here to
    document the pole/bound-state correspondence.
    """
    return bound_states(word, gamma, q, kappa_range, grid_steps)


def backscatter_scan(
    n: int,
    gamma: float,
    beta_range=DEFAULT_BETA_RANGE,
    grid_steps: int = DEFAULT_GRID_STEPS,
) -> list[BackscatterPoint]:
    """|s_mp| of S^n over a beta grid, local maxima tagged with mu = round(beta/pi).

    Powers are taken with the Chebyshev forms, which stay valid through the
    band edges and gaps (|x1| > 1).
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    lo, hi = beta_range
    if not (0.0 < lo < hi):
        raise ValueError(f"beta_range must satisfy 0 < lo < hi, got {beta_range}")
    betas = np.linspace(lo, hi, grid_steps + 1)
    a1, b1, c1, d1 = _cell_entries(gamma, betas, Regime.SCATTERING, 1.0)
    x = ((a1 + d1) / 2).real
    u_prev = np.ones_like(betas, dtype=complex)  # U_0
    u_cur = 2.0 * x + 0j  # U_1
    if n == 1:
        u_nm1, u_nm2 = u_prev, np.zeros_like(u_prev)
    else:
        for _ in range(n - 2):
            u_prev, u_cur = u_cur, 2.0 * x * u_cur - u_prev
        u_nm1, u_nm2 = u_cur, u_prev
    cn = u_nm1 * c1
    dn = u_nm1 * d1 - u_nm2
    s_mp_abs = np.abs(cn / dn)
    kb = np.where(np.abs(x) <= 1.0, np.arccos(np.clip(x, -1.0, 1.0)), np.nan)
    is_max = np.zeros(betas.shape, dtype=bool)
    interior = (s_mp_abs[1:-1] > s_mp_abs[:-2]) & (s_mp_abs[1:-1] >= s_mp_abs[2:])
    is_max[1:-1] = interior
    out = []
    for i, beta in enumerate(betas):
        mu = int(round(beta / math.pi)) if is_max[i] else None
        out.append(
            BackscatterPoint(float(beta), float(s_mp_abs[i]), float(kb[i]), bool(is_max[i]), mu)
        )
    return out


def band_edge_limit(n: int, delta: float) -> tuple[complex, complex]:
    """High-energy band-edge amplitudes (S_pp, S_mp) for S^n.

    S_pp = 1/(1 - i n delta/2), S_mp = i (n delta/2)/(1 - i n delta/2);
    |S_pp|^2 + |S_mp|^2 = 1 identically.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    denom = 1.0 - 0.5j * n * delta
    return 1.0 / denom, 0.5j * n * delta / denom


def commuting_points(
    p_max: int, gamma: float
) -> list[tuple[CommutingPoint, bool, bool]]:
    """(point, proportional, in_overlap) at beta(p) = tau*p*pi for p = 1..p_max.

    proportional: M2 = (-1)^p M1 within 1e-9 max-entry deviation.
    in_overlap: both half traces |x1|, |x2| <= 1 at this gamma (the point
    lies inside the overlap of the two cells' scattering bands).
    """
    if p_max < 1:
        raise ValueError(f"p_max must be >= 1, got {p_max}")
    out = []
    for p in range(1, p_max + 1):
        beta = TAU * p * math.pi
        params = ChainParams(beta, gamma, TAU, Regime.SCATTERING)
        m1 = cell_matrix(params, CellKind.S)
        m2 = cell_matrix(params, CellKind.L)
        sign = -1.0 if p % 2 else 1.0
        prop_dev = m2.max_abs_diff(m1.scaled(sign))
        in_overlap = abs(m1.x.real) <= 1.0 and abs(m2.x.real) <= 1.0
        out.append((CommutingPoint(p, beta), prop_dev <= 1e-9, in_overlap))
    return out


def commuting_deviations(p: int, gamma: float) -> tuple[float, float]:
    """(commutator deviation from identity, proportionality deviation) at beta(p)."""
    beta = TAU * p * math.pi
    params = ChainParams(beta, gamma, TAU, Regime.SCATTERING)
    m1 = cell_matrix(params, CellKind.S)
    m2 = cell_matrix(params, CellKind.L)
    K = commutator(m1, m2)
    sign = -1.0 if p % 2 else 1.0
    return (
        K.max_abs_diff(TransferMatrix.identity()),
        m2.max_abs_diff(m1.scaled(sign)),
    )


def fibonacci_periodic_equivalence(m: int, p: int, gamma: float) -> float:
    """Max-entry deviation of M_m from (-1)^(p f_{m-1}) M1^{f_m} at beta(p).

    Zero in exact arithmetic: at commuting energies a Fibonacci string is
    spectrally equivalent to a periodic string of f_m cells.
    """
    beta = TAU * p * math.pi
    params = ChainParams(beta, gamma, TAU, Regime.SCATTERING)
    lhs = word_matrix(fibonacci_word(m), params)
    f_m = fibonacci_number(m)
    f_m1 = fibonacci_number(m - 1) if m >= 2 else 0  # f_0 = 0
    sign = -1.0 if (p * f_m1) % 2 else 1.0
    rhs = power_closed(cell_matrix(params, CellKind.S), f_m).scaled(sign)
    return lhs.max_abs_diff(rhs)
