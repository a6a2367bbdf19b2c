"""Finite-volume discretization of the diffusion generator, its low spectrum,
and mass-conserving forward evolution of densities.

The generator in divergence form, L f = (1/pi) d/dx[(sigma^2/2) pi df/dx]
with zero-flux ends, is discretized on cell centers with arithmetic face
averages of g = pi sigma^2/2. Conjugating by sqrt(pi_i h) makes the matrix
symmetric tridiagonal, so eigenvectors of unit Euclidean norm map directly to
pi-orthonormal eigenfunctions. The same face coefficients drive the forward
(Fokker-Planck) stepping, which therefore conserves discrete mass exactly and
holds the discrete pi stationary to machine precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import numerics
from .errors import GridTooCoarse, UnstableStep, ZeroDenominator
from .numerics import Grid, GridFunction
from .optimal import OptimalProcess


@dataclass(frozen=True)
class Discretization:
    grid: Grid
    diag: np.ndarray
    offdiag: np.ndarray
    weights: np.ndarray  # sqrt(pi_i h); v / weights is the eigenfunction
    pi: np.ndarray
    faces: np.ndarray  # g at interior cell faces, length n - 1


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: np.ndarray
    eigenfunctions: np.ndarray  # rows, pi-weighted orthonormal on the grid
    grid: Grid


@dataclass
class EvolutionState:
    grid: Grid
    density: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        vals = np.asarray(self.density, dtype=float)
        if vals.shape != self.grid.points.shape:
            raise ValueError("density shape does not match grid")
        self.density = vals

    def mass(self) -> float:
        return float(np.sum(self.density) * self.grid.h)


def _target_functions(target):
    if isinstance(target, OptimalProcess):
        return target.source._pdf, target.variance_fn
    pdf, var = target
    return pdf, var


def default_grid(proc: OptimalProcess, n: int) -> Grid:
    """Cell-center grid on [m1 - 8 s, m1 + 8 s] clipped to the support.

    A side whose density still exceeds 1e-10 at the window edge (heavy tails)
    is pushed out by doubling its distance from the mean.
    """
    mom = proc.moments
    s = math.sqrt(mom.variance)
    sup = proc.source.support
    pdf = proc.source._pdf

    def push(edge, direction):
        for _ in range(60):
            if not math.isfinite(edge):
                break
            bound = sup.lower if direction < 0 else sup.upper
            if (direction < 0 and edge <= bound) or \
                    (direction > 0 and edge >= bound):
                return max(edge, sup.lower) if direction < 0 else min(edge, sup.upper)
            if float(pdf(np.asarray(edge))) < 1e-10:
                return edge
            edge = mom.m1 + 2.0 * (edge - mom.m1)
        return edge

    lo = push(mom.m1 - 8.0 * s, -1)
    hi = push(mom.m1 + 8.0 * s, +1)
    lo = max(lo, sup.lower)
    hi = min(hi, sup.upper)
    return Grid.cell_centers(lo, hi, n)


def discretize_generator(target, grid: Grid) -> Discretization:
    """Symmetric tridiagonal of the (negated) generator on cell centers.

    target is an OptimalProcess or a (pdf, variance) pair of callables.
    """
    pdf, var = _target_functions(target)
    if grid.n < 50:
        raise GridTooCoarse("need at least 50 grid points, got %d" % grid.n)
    h = grid.h
    pts = grid.points
    pi = np.asarray(pdf(pts), dtype=float)
    if np.any(pi <= 0.0) or not np.all(np.isfinite(pi)):
        raise ValueError("density must be positive and finite on the grid")
    g = pi * np.asarray(var(pts), dtype=float)
    faces = 0.5 * (g[:-1] + g[1:])
    w_left = np.concatenate([[0.0], faces])   # zero-flux outer faces
    w_right = np.concatenate([faces, [0.0]])
    diag = (w_left + w_right) / (pi * h * h)
    offdiag = -faces / (h * h * np.sqrt(pi[:-1] * pi[1:]))
    weights = np.sqrt(pi * h)
    return Discretization(grid=grid, diag=diag, offdiag=offdiag,
                          weights=weights, pi=pi, faces=faces)


def spectrum(disc: Discretization, k: int) -> SpectrumResult:
    """k smallest eigenvalues with pi-orthonormal eigenfunctions."""
    pairs = numerics.tridiag_eigs(disc.diag, disc.offdiag, k)
    lams = np.array([lam for lam, _ in pairs])
    funcs = np.empty((k, disc.grid.n))
    for j, (_, vec) in enumerate(pairs):
        phi = vec / disc.weights
        if phi[np.argmax(np.abs(phi))] < 0:
            phi = -phi
        funcs[j] = phi
    return SpectrumResult(eigenvalues=lams, eigenfunctions=funcs,
                          grid=disc.grid)


def rayleigh_quotient(proc: OptimalProcess, q: GridFunction) -> float:
    """Dirichlet form over variance of q after re-centering to zero pi-mean."""
    grid = q.grid
    pts = grid.points
    h = grid.h
    pi = np.asarray(proc.source._pdf(pts), dtype=float)
    mass = float(np.sum(pi) * h)
    u = q.values - float(np.sum(pi * q.values) * h) / mass
    den = float(np.sum(pi * u * u) * h)
    scale = float(np.max(np.abs(q.values))) + 1.0
    if den <= 1e-24 * scale * scale * mass:
        raise ZeroDenominator("test function is pi-a.e. constant on the grid")
    du = np.gradient(u, h)
    half_sq = np.asarray(proc.variance_fn(pts), dtype=float)
    num = float(np.sum(half_sq * pi * du * du) * h)
    return num / den


def gaussian_bump(grid: Grid, center, width) -> np.ndarray:
    """Normalized (discrete unit mass) Gaussian bump on the grid."""
    z = (grid.points - float(center)) / float(width)
    p = np.exp(-0.5 * z * z)
    return p / (np.sum(p) * grid.h)


def evolve_fpe(proc: OptimalProcess, initial: EvolutionState, t_end, dt,
               record_every=1):
    """Crank-Nicolson forward evolution; returns (state, times, distances).

    distances[i] is the discrete L1 distance between the density at times[i]
    and the grid-stationary density scaled to the evolving mass, so it decays
    to roundoff rather than to a truncation floor.
    """
    grid = initial.grid
    h = grid.h
    n = grid.n
    disc = discretize_generator(proc, grid)
    pi = disc.pi
    faces = disc.faces
    # forward operator M: dp/dt = M p, columns of M sum to zero
    lower = np.concatenate([faces / pi[:-1], [0.0]]) / (h * h)
    upper = np.concatenate([[0.0], faces / pi[1:]]) / (h * h)
    w_left = np.concatenate([[0.0], faces])
    w_right = np.concatenate([faces, [0.0]])
    diag = -(w_left + w_right) / (pi * h * h)

    dt = float(dt)
    t_end = float(t_end)
    if dt <= 0 or t_end <= initial.time:
        raise ValueError("need dt > 0 and t_end > start time")
    n_steps = int(math.ceil((t_end - initial.time) / dt - 1e-12))

    # banded forms of I -+ dt/2 M (solve_banded layout: upper, diag, lower)
    a_band = np.zeros((3, n))
    a_band[0, 1:] = -0.5 * dt * upper[1:]
    a_band[1] = 1.0 - 0.5 * dt * diag
    a_band[2, :-1] = -0.5 * dt * lower[:-1]

    p = initial.density.copy()
    mass0 = float(np.sum(p) * h)
    target = pi * (mass0 / (float(np.sum(pi)) * h))
    times = [initial.time]
    dists = [float(np.sum(np.abs(p - target)) * h)]
    t = initial.time
    for step in range(n_steps):
        rhs = p + 0.5 * dt * (diag * p)
        rhs[:-1] += 0.5 * dt * upper[1:] * p[1:]
        rhs[1:] += 0.5 * dt * lower[:-1] * p[:-1]
        p = scipy.linalg.solve_banded((1, 1), a_band, rhs)
        t = initial.time + (step + 1) * dt
        if float(np.min(p)) < -1e-10:
            raise UnstableStep("density reached %g at t=%g"
                               % (float(np.min(p)), t))
        if (step + 1) % record_every == 0 or step == n_steps - 1:
            times.append(t)
            dists.append(float(np.sum(np.abs(p - target)) * h))
    state = EvolutionState(grid=grid, density=p, time=t)
    return state, np.asarray(times), np.asarray(dists)


def fit_decay_rate(times, dists, floor=1e-6, frac=0.1) -> numerics.RateEstimate:
    """Log-linear rate over the window dists in [floor, frac * dists[0]]."""
    t = np.asarray(times, dtype=float)
    d = np.asarray(dists, dtype=float)
    mask = (d >= floor) & (d <= frac * d[0])
    if int(mask.sum()) < 5:
        raise ValueError("fewer than 5 samples inside the fit window")
    return numerics.fit_exponential_decay(t[mask], d[mask])


def write_decay_csv(path, times, dists):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,d\n")
        for t, d in zip(times, dists):
            fh.write("%.17g,%.17g\n" % (t, d))


def write_spectrum_csv(path, eigenvalues):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("n,lambda\n")
        for i, lam in enumerate(np.asarray(eigenvalues, dtype=float)):
            fh.write("%d,%.17g\n" % (i, lam))
