"""Negative-energy spectral analysis of finite chains.

Everything here scans the dimensionless energy variable beta at fixed
(gamma, q, word): the energy gauge, maximal band germs (|x| <= 1), bound
roots of d(beta) = 0, rational Bloch labels and partial bands, the binding
equation, and a density-of-states estimate for the single cell.

Root finding follows one policy throughout: a uniform grid scan brackets
sign changes, bisection refines them to |dbeta| <= 1e-10, and a one-level
x4 grid refinement re-censuses the sign changes; any disagreement raises
GridTooCoarse instead of silently returning a partial census.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import ChainParams, Regime, cell_matrix, CellKind
from .errors import GridTooCoarse, OutOfBand, OverflowRisk
from .substitution import Word, word_matrix

DEFAULT_BETA_RANGE = (0.05, 6.0)
DEFAULT_GRID_STEPS = 2000
ROOT_TOL = 1e-10

_trapezoid = getattr(np, "trapezoid", None) or np.trapz


class EdgeKind(Enum):
    """Which band-edge condition x = +1 or x = -1 terminates a germ."""

    X_PLUS_ONE = "XPlusOne"
    X_MINUS_ONE = "XMinusOne"


@dataclass(frozen=True)
class BandGerm:
    """Maximal beta interval with |x(beta)| <= 1 at fixed (word, gamma, q).

    A clipped edge means the germ reached the scan boundary while still in
    band; its edge kind then records the nearer of x = +1 / x = -1 rather
    than a refined root.
    """

    beta_lo: float
    beta_hi: float
    edge_kind_lo: EdgeKind
    edge_kind_hi: EdgeKind
    clipped_lo: bool = False
    clipped_hi: bool = False


@dataclass(frozen=True)
class BoundState:
    """A root of d(beta) = 0, refined to |dbeta| <= 1e-10."""

    beta_star: float
    index: int


@dataclass(frozen=True)
class RationalLabel:
    """Rational Bloch label n*Kb = mu*pi with its partial band.

    The mu = n label sits at the top band edge and has no partial band of
    its own, so partial_band is None there.
    """

    n: int
    mu: int
    kb: float
    partial_band: tuple[float, float] | None


@dataclass(frozen=True)
class PartialBandCount:
    """One partial band (in Kb and beta) and the number of bound roots inside."""

    mu: int
    kb_lo: float
    kb_hi: float
    beta_lo: float
    beta_hi: float
    count: int


@dataclass(frozen=True)
class DosSamples:
    """Density-of-states samples for the single cell over its band germ."""

    beta: np.ndarray
    energy: np.ndarray
    kb: np.ndarray
    density: np.ndarray


def _thread_count() -> int:
    try:
        n = int(os.environ.get("DELTACHAIN_THREADS", "1"))
    except ValueError:
        n = 1
    return max(1, n)


def _cell_entries(gamma: float, betas: np.ndarray, regime: Regime, ratio: float):
    """Vectorized cell-matrix entries over a beta grid."""
    de = gamma / betas
    if regime is Regime.BOUND:
        lam = np.exp(betas * ratio)
        de_eff = de.astype(complex)
    else:
        lam = np.exp(-1j * betas * ratio)
        de_eff = 1j * de
    a = (1 + de_eff / 2) / lam
    b = lam * de_eff / 2
    c = -(de_eff / 2) / lam
    d = lam * (1 - de_eff / 2)
    return a, b, c, d


def _word_grid(word: Word, gamma: float, q: float, betas: np.ndarray, regime: Regime):
    """Entries (a, b, c, d) of the word's transfer matrix over a beta grid."""
    cells = {}
    for ch in set(word.letters):
        cells[ch] = _cell_entries(gamma, betas, regime, 1.0 if ch == "S" else q)
    A = np.ones(betas.shape, dtype=complex)
    B = np.zeros(betas.shape, dtype=complex)
    C = np.zeros(betas.shape, dtype=complex)
    D = np.ones(betas.shape, dtype=complex)
    for ch in word.letters:
        a2, b2, c2, d2 = cells[ch]
        A, B, C, D = A * a2 + B * c2, A * b2 + B * d2, C * a2 + D * c2, C * b2 + D * d2
    return A, B, C, D


_CHUNK = 1 << 19


def _word_scan(word: Word, gamma: float, q: float, betas: np.ndarray, regime: Regime, which: str):
    """Real x(beta) or d(beta) of the word matrix over a grid, chunked.

    Chunking keeps only O(chunk) complex temporaries alive, so very fine
    verification grids stay within a few tens of megabytes.
    """
    n = _thread_count()
    pieces = max(n, (betas.size + _CHUNK - 1) // _CHUNK)
    chunks = np.array_split(betas, pieces) if pieces > 1 else [betas]

    def one(chunk: np.ndarray) -> np.ndarray:
        A, B, C, D = _word_grid(word, gamma, q, chunk, regime)
        return (0.5 * (A + D)).real if which == "x" else D.real

    if n > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=n) as pool:
            parts = list(pool.map(one, chunks))
    else:
        parts = [one(chunk) for chunk in chunks]
    return parts[0] if len(parts) == 1 else np.concatenate(parts)


def _guard_range(word: Word, q: float, beta_range, regime: Regime):
    lo, hi = beta_range
    if not (0.0 < lo < hi):
        raise ValueError(f"beta_range must satisfy 0 < lo < hi, got {beta_range}")
    if regime is Regime.BOUND and hi * word.total_ratio(q) > 300.0:
        raise OverflowRisk(
            f"beta*length = {hi * word.total_ratio(q):.3g} exceeds the exponent guard"
        )
    return lo, hi


def _sign_changes(values: np.ndarray) -> int:
    s = np.sign(values)
    return int(np.count_nonzero(s[1:] * s[:-1] < 0))


def _bisect(fn, lo, hi, flo, tol=ROOT_TOL) -> float:
    """Derivative-free sign-change bisection down to a beta bracket of width tol."""
    for _ in range(200):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if fm == 0.0:
            return mid
        if (fm > 0.0) == (flo > 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _scalar_x(word: Word, gamma: float, q: float, regime: Regime):
    def fx(beta: float) -> float:
        return word_matrix(word, ChainParams(beta, gamma, q, regime)).x.real

    return fx


def energy_gauge(word: Word, gamma: float, q: float, beta: float) -> int:
    """0 if |x(beta)| <= 1 for the word's transfer matrix, else 1.

    Repetition-invariant: S^n has the same gauge as S, because |x| <= 1 holds
    for a power exactly when it holds for the base matrix.
    """
    params = ChainParams(beta, gamma, q, Regime.BOUND)
    x = word_matrix(word, params).x.real
    return 0 if abs(x) <= 1.0 else 1


def band_germs(
    word: Word,
    gamma: float,
    q: float,
    beta_range=DEFAULT_BETA_RANGE,
    grid_steps: int = DEFAULT_GRID_STEPS,
    regime: Regime = Regime.BOUND,
) -> list[BandGerm]:
    """Maximal beta intervals with |x| <= 1, edges refined by bisection.

    The x4-refined scan must reproduce the base grid's edge-crossing census
    for both x = +1 and x = -1, else GridTooCoarse is raised.
    """
    if grid_steps < 100:
        raise ValueError(f"grid_steps must be >= 100, got {grid_steps}")
    lo, hi = _guard_range(word, q, beta_range, regime)

    betas = np.linspace(lo, hi, grid_steps + 1)
    x = _word_scan(word, gamma, q, betas, regime, "x")
    fine = np.linspace(lo, hi, 4 * grid_steps + 1)
    xf = _word_scan(word, gamma, q, fine, regime, "x")
    for target in (1.0, -1.0):
        if _sign_changes(x - target) != _sign_changes(xf - target):
            raise GridTooCoarse(
                f"x = {target:+g} crossings differ between {grid_steps} and "
                f"{4 * grid_steps} grid steps; increase grid_steps"
            )

    betas, x = fine, xf  # assemble germs from the finer, verified grid
    fx = _scalar_x(word, gamma, q, regime)

    # Refine every edge crossing first.  A band narrower than the grid
    # spacing leaves no in-band sample, but it still shows up as one x = +1
    # and one x = -1 crossing inside the same grid interval, so germs are
    # assembled from the refined crossings, not from in-band samples.
    edges: list[tuple[float, EdgeKind]] = []
    for target, kind in ((1.0, EdgeKind.X_PLUS_ONE), (-1.0, EdgeKind.X_MINUS_ONE)):
        g = x - target
        s = np.sign(g)
        for i in np.nonzero(s[1:] * s[:-1] < 0)[0]:
            root = _bisect(lambda b, t=target: fx(b) - t, betas[i], betas[i + 1], g[i])
            edges.append((root, kind))
    edges.sort(key=lambda e: e[0])

    # Between consecutive crossings the in-band predicate is constant;
    # classify each segment by its midpoint and emit maximal in-band runs.
    bounds = [betas[0]] + [e[0] for e in edges] + [betas[-1]]
    germs: list[BandGerm] = []
    open_lo: tuple[float, EdgeKind, bool] | None = None
    for k in range(len(bounds) - 1):
        inside = abs(fx(0.5 * (bounds[k] + bounds[k + 1]))) <= 1.0
        if inside and open_lo is None:
            if k == 0:
                kind = EdgeKind.X_PLUS_ONE if x[0] >= 0.0 else EdgeKind.X_MINUS_ONE
                open_lo = (float(betas[0]), kind, True)
            else:
                open_lo = (bounds[k], edges[k - 1][1], False)
        elif not inside and open_lo is not None:
            beta_lo, kind_lo, clipped_lo = open_lo
            germs.append(
                BandGerm(beta_lo, bounds[k], kind_lo, edges[k - 1][1], clipped_lo, False)
            )
            open_lo = None
    if open_lo is not None:
        beta_lo, kind_lo, clipped_lo = open_lo
        kind_hi = EdgeKind.X_PLUS_ONE if x[-1] >= 0.0 else EdgeKind.X_MINUS_ONE
        germs.append(BandGerm(beta_lo, float(betas[-1]), kind_lo, kind_hi, clipped_lo, True))
    return germs


def bound_states(
    word: Word,
    gamma: float,
    q: float,
    beta_range=DEFAULT_BETA_RANGE,
    grid_steps: int = DEFAULT_GRID_STEPS,
) -> list[BoundState]:
    """All sign-change roots of d(beta) in range, bisection-refined.

    Bound regime only: d = 0 is the decaying-boundary-condition equation.
    """
    if grid_steps < 100:
        raise ValueError(f"grid_steps must be >= 100, got {grid_steps}")
    lo, hi = _guard_range(word, q, beta_range, Regime.BOUND)

    betas = np.linspace(lo, hi, grid_steps + 1)
    d = _word_scan(word, gamma, q, betas, Regime.BOUND, "d")
    fine = np.linspace(lo, hi, 4 * grid_steps + 1)
    df = _word_scan(word, gamma, q, fine, Regime.BOUND, "d")
    if _sign_changes(d) != _sign_changes(df):
        raise GridTooCoarse(
            f"d = 0 crossings differ between {grid_steps} and {4 * grid_steps} "
            "grid steps; increase grid_steps"
        )

    def fd(beta: float) -> float:
        return word_matrix(word, ChainParams(beta, gamma, q, Regime.BOUND)).d.real

    roots = []
    s = np.sign(df)
    for i in np.nonzero(s[1:] * s[:-1] < 0)[0]:
        roots.append(_bisect(fd, fine[i], fine[i + 1], df[i]))

    # A narrow band can hide a whole dip of d through zero between adjacent
    # samples of the global grid.  Bound roots live inside band germs, so
    # rescan each germ on a local grid and merge the findings.
    for germ in band_germs(word, gamma, q, beta_range, grid_steps):
        local = np.linspace(germ.beta_lo, germ.beta_hi, 65)
        dl = np.array([fd(b) for b in local])
        sl = np.sign(dl)
        for i in np.nonzero(sl[1:] * sl[:-1] < 0)[0]:
            roots.append(_bisect(fd, local[i], local[i + 1], dl[i]))

    roots.sort()
    unique = [b for k, b in enumerate(roots) if k == 0 or b - roots[k - 1] > 1e-9]
    return [BoundState(b, k) for k, b in enumerate(unique)]


def bloch_label(x: float) -> float:
    """Kb = arccos(x) on the principal branch [0, pi]."""
    if abs(x) > 1.0 + 1e-12:
        raise OutOfBand(f"|x| = {abs(x):.6g} > 1")
    return math.acos(min(1.0, max(-1.0, x)))


def rational_labels(n: int) -> list[RationalLabel]:
    """Labels mu = 0..n at Kb = mu*pi/n with the n partial-band intervals."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    out = []
    for mu in range(n + 1):
        kb = mu * math.pi / n
        band = (kb, (mu + 1) * math.pi / n) if mu < n else None
        out.append(RationalLabel(n, mu, kb, band))
    return out


def supercell_label(kb: float, n: int) -> tuple[int, float]:
    """Fold Kb in [0, pi] into (mu, K_reduced) with K_reduced in [0, pi/n]."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if kb < -1e-12 or kb > math.pi + 1e-12:
        raise ValueError(f"Kb must lie in [0, pi], got {kb}")
    kb = min(math.pi, max(0.0, kb))
    mu = min(int(kb * n / math.pi), n - 1)
    return mu, kb - mu * math.pi / n


def _single_cell_x(gamma: float, beta: float) -> float:
    params = ChainParams(beta, gamma, 1.0, Regime.BOUND)
    return cell_matrix(params, CellKind.S).x.real


def binding_equation_residual(n: int, beta: float, gamma: float) -> tuple[float, float]:
    """(lhs, rhs) of tan(n*Kb) = sin(Kb)/y1 at the single-cell dispersion point.

    Bound states of S^n sit where lhs = rhs; rhs diverges at y1 = 0.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    params = ChainParams(beta, gamma, 1.0, Regime.BOUND)
    M = cell_matrix(params, CellKind.S)
    x1 = M.x.real
    if abs(x1) > 1.0 + 1e-12:
        raise OutOfBand(f"beta = {beta:.6g} lies outside the single-cell germ")
    kb = bloch_label(x1)
    y1 = M.y.real
    lhs = math.tan(n * kb)
    try:
        rhs = math.sin(kb) / y1
    except ZeroDivisionError:
        rhs = math.inf
    return lhs, rhs


def partial_band_census(
    n: int,
    gamma: float,
    beta_range=DEFAULT_BETA_RANGE,
    grid_steps: int = DEFAULT_GRID_STEPS,
) -> list[PartialBandCount]:
    """Bound-root count of S^n inside each of the n partial bands of the cell.

    Partial-band beta boundaries come from inverting the single-cell
    dispersion x1(beta) = cos(mu*pi/n) inside the germ; x1 must be monotone
    there (checked; violation raises ValueError).
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    word_s = Word("S")
    germs = band_germs(word_s, gamma, 1.0, beta_range, grid_steps)
    if len(germs) != 1:
        raise ValueError(f"expected one single-cell germ, found {len(germs)}")
    germ = germs[0]

    betas = np.linspace(germ.beta_lo, germ.beta_hi, grid_steps + 1)
    x = _word_scan(word_s, gamma, 1.0, betas, Regime.BOUND, "x")
    dx = np.diff(x)
    if not (np.all(dx > 0) or np.all(dx < 0)):
        raise ValueError("single-cell dispersion x1 is not monotone inside the germ")
    increasing = bool(dx[0] > 0)

    def beta_of_x(target: float) -> float:
        xs = x if increasing else x[::-1]
        bs = betas if increasing else betas[::-1]
        if target <= xs[0]:
            return float(bs[0])
        if target >= xs[-1]:
            return float(bs[-1])
        i = int(np.searchsorted(xs, target)) - 1
        lo_b, hi_b = sorted((bs[i], bs[i + 1]))
        return _bisect(
            lambda b: _single_cell_x(gamma, b) - target,
            lo_b,
            hi_b,
            _single_cell_x(gamma, lo_b) - target,
        )

    # beta boundary for each rational label Kb = j*pi/n, j = 0..n
    bounds = [beta_of_x(math.cos(j * math.pi / n)) for j in range(n + 1)]
    roots = bound_states(Word("S" * n), gamma, 1.0, beta_range, grid_steps)
    out = []
    for mu in range(n):
        kb_lo, kb_hi = mu * math.pi / n, (mu + 1) * math.pi / n
        b_lo, b_hi = sorted((bounds[mu], bounds[mu + 1]))
        pad = 1e-12 * max(1.0, abs(b_lo))
        count = sum(1 for r in roots if b_lo - pad < r.beta_star <= b_hi + pad)
        out.append(PartialBandCount(mu, kb_lo, kb_hi, b_lo, b_hi, count))
    return out


def dos_estimate(
    gamma: float,
    grid_steps: int = DEFAULT_GRID_STEPS,
    beta_range=DEFAULT_BETA_RANGE,
) -> DosSamples:
    """Density of states dN/dE ~ dK/dE over the single-cell band germ.

    E = -beta**2 is the dimensionless Bound-regime energy (the physical
    prefactor hbar^2/(2 m b^2) is a documented constant, not computed).
    Centered differences on the interior, one-sided at the germ edges;
    the returned density is normalized to unit integral over the band.
    """
    word_s = Word("S")
    germs = band_germs(word_s, gamma, 1.0, beta_range, grid_steps)
    if len(germs) != 1:
        raise ValueError(f"expected one single-cell germ, found {len(germs)}")
    germ = germs[0]
    betas = np.linspace(germ.beta_lo, germ.beta_hi, grid_steps + 2)[1:-1]
    x = _word_scan(word_s, gamma, 1.0, betas, Regime.BOUND, "x")
    kb = np.arccos(np.clip(x, -1.0, 1.0))
    energy = -betas * betas
    density = np.abs(np.gradient(kb, energy))
    norm = abs(float(_trapezoid(density, energy)))
    density = density / norm
    return DosSamples(beta=betas, energy=energy, kb=kb, density=density)
