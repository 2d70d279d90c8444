"""Transfer matrices of -f'' = z f across free intervals and jump points.

States are (f, f') pairs.  A free interval of length d at spectral
parameter z = k^2 acts by [[cos kd, sin(kd)/k], [-k sin kd, cos kd]]; an
atom with branching number b acts by diag(sqrt b, 1/sqrt b), implementing
f(t+) = sqrt(b) f(t-), f'(t+) = f'(t-)/sqrt(b).  Both have determinant 1.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .measures import AtomicMeasure

__all__ = [
    "EnergyPoint",
    "IntervalBound",
    "SimonStolzResult",
    "free_propagator",
    "jump_matrix",
    "simon_stolz_integral",
    "solution_eval",
    "spectral_norm",
    "transfer",
]


@dataclass(frozen=True)
class EnergyPoint:
    """Spectral parameter z together with its wavenumber k.

    k is the square root of z with Im k > 0 off the positive real axis and
    k = sqrt(E) > 0 for z = E > 0, continuous across the negative axis.
    """

    z: complex
    k: complex = field(init=False)

    def __post_init__(self):
        z = complex(self.z)
        if z == 0:
            k = 0j
        elif z.imag == 0.0 and z.real > 0.0:
            k = complex(math.sqrt(z.real), 0.0)
        else:
            k = cmath.sqrt(z)
            if k.imag < 0.0:
                k = -k
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "k", k)

    @classmethod
    def from_kappa(cls, kappa: float) -> "EnergyPoint":
        """The point z = -kappa**2 on the negative half axis."""
        return cls(complex(-float(kappa) ** 2, 0.0))

    @property
    def on_positive_axis(self) -> bool:
        return self.z.imag == 0.0 and self.z.real >= 0.0


def as_energy(z) -> EnergyPoint:
    return z if isinstance(z, EnergyPoint) else EnergyPoint(complex(z))


def spectral_norm(mat: np.ndarray) -> float:
    """Largest singular value of a 2x2 matrix, by the closed form.

    For real matrices this uses the subtraction-free split into the sums
    and differences of the diagonals, which keeps rotations at norm 1 to a
    few ulps.
    """
    a, b = complex(mat[0, 0]), complex(mat[0, 1])
    c, d = complex(mat[1, 0]), complex(mat[1, 1])
    if a.imag == b.imag == c.imag == d.imag == 0.0:
        p = math.hypot(a.real + d.real, b.real - c.real)
        q = math.hypot(a.real - d.real, b.real + c.real)
        return 0.5 * (p + q)
    fro = abs(a) ** 2 + abs(b) ** 2 + abs(c) ** 2 + abs(d) ** 2
    det = abs(a * d - b * c) ** 2
    disc = max(fro * fro - 4.0 * det, 0.0)
    return math.sqrt(max(0.5 * (fro + math.sqrt(disc)), 0.0))


def free_propagator(delta: float, z) -> np.ndarray:
    """Propagator of (f, f') across a free interval of length delta."""
    if delta < 0:
        raise ValueError("interval length must be nonnegative")
    e = as_energy(z)
    k = e.k
    if k == 0:
        return np.array([[1.0, delta], [0.0, 1.0]], dtype=complex)
    c = cmath.cos(k * delta)
    s = cmath.sin(k * delta) / k
    return np.array([[c, s], [-k * k * s, c]], dtype=complex)


def jump_matrix(b: float) -> np.ndarray:
    """diag(sqrt b, 1/sqrt b) for a finite branching number b > 1.

    Hard walls (b = inf) degenerate here; the projective m-function routes
    handle them instead.
    """
    if not (b > 1.0):
        raise ValueError(f"branching number must exceed 1, got {b}")
    if math.isinf(b):
        raise ValueError("b = inf has no transfer matrix; "
                         "use the projective m-function routes")
    r = math.sqrt(b)
    return np.array([[r, 0.0], [0.0, 1.0 / r]], dtype=complex)


def _atoms_between(mu: AtomicMeasure, y: float, x: float):
    atoms = [a for a in mu.atoms_up_to(x) if y < a.t < x]
    for bad in (y, x):
        if any(a.t == bad for a in mu.atoms_up_to(max(x, bad))):
            raise ValueError(f"endpoint {bad} lies on an atom")
    return atoms


def transfer(mu: AtomicMeasure, x: float, y: float, z) -> np.ndarray:
    """The matrix mapping (f(y), f'(y)) to (f(x), f'(x)), y <= x.

    Ordered product of free propagators and jump matrices over the atoms in
    (y, x); all of them must carry a finite branching number.
    """
    if y > x:
        raise ValueError("transfer needs y <= x")
    e = as_energy(z)
    atoms = _atoms_between(mu, y, x)
    if any(a.is_wall for a in atoms):
        raise ValueError("a hard wall (b = inf) inside (y, x) blocks the "
                         "matrix transfer; use the projective routes")
    if e.k == 0:
        mat = np.eye(2, dtype=complex)
        cur = y
        for a in atoms:
            mat = free_propagator(a.t - cur, e) @ mat
            s = math.sqrt(a.b)
            mat = np.array([[s, 0.0], [0.0, 1.0 / s]], dtype=complex) @ mat
            cur = a.t
        return free_propagator(x - cur, e) @ mat
    pts = [a.t for a in atoms]
    gaps = np.diff([y] + pts + [x])
    jumps = [math.sqrt(a.b) for a in atoms]
    a, b, c, d = _kernels.transfer_chain(gaps, jumps, e.k)
    return np.array([[a, b], [c, d]], dtype=complex)


def solution_eval(mu: AtomicMeasure, z, init, grid: Sequence[float]) -> np.ndarray:
    """(f, f') along ``grid`` for the solution with (f(0), f'(0)) = init.

    Grid points must be ascending, nonnegative and off the atoms; the jump
    conditions hold across every atom by construction.
    """
    e = as_energy(z)
    grid = [float(g) for g in grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be strictly increasing")
    if grid and grid[0] < 0:
        raise ValueError("grid starts before the base point 0")
    hi = grid[-1] if grid else 0.0
    atoms = [a for a in mu.atoms_up_to(hi) if 0.0 < a.t < hi]
    if any(a.is_wall for a in atoms):
        raise ValueError("a hard wall (b = inf) blocks solution transport")
    for g in grid:
        if any(a.t == g for a in atoms):
            raise ValueError(f"grid point {g} lies on an atom")
    events = sorted(
        [(g, 0, 0.0) for g in grid] + [(a.t, 1, math.sqrt(a.b)) for a in atoms],
        key=lambda ev: (ev[0], ev[1]))
    pos = [ev[0] for ev in events]
    codes = [ev[1] for ev in events]
    vals = [ev[2] for ev in events]
    states = _kernels.solution_sweep(pos, codes, vals, e.k, 0.0,
                                     complex(init[0]), complex(init[1]))
    return np.array(states, dtype=complex)


@dataclass(frozen=True)
class IntervalBound:
    """Quadrature and rigorous lower-bound data for one free interval."""

    index: int
    start: float
    end: float
    lower_bound: float
    numeric_integral: float
    sup_norm_sq: float
    cumulative: float


@dataclass(frozen=True)
class SimonStolzResult:
    energy: float
    upper: float
    step: float
    total: float
    intervals: tuple

    @property
    def lower_bound_partial_sums(self) -> np.ndarray:
        return np.cumsum([iv.lower_bound for iv in self.intervals])


def simon_stolz_integral(mu: AtomicMeasure, energy: float, upper: float,
                         step: Optional[float] = None) -> SimonStolzResult:
    """Quadrature of 1/||T(x,0,E)||^2 over [0, upper] with interval bounds.

    The integrand is sampled by the composite midpoint rule on each free
    interval.  Each interval also carries the rigorous lower bound
    (length)/(max(k, 1/k)**(2n+2) * prod b_m), which never exceeds its
    numeric contribution.  Divergence of the partial sums rules out square
    summable solutions at this energy.
    """
    if not (energy > 0):
        raise ValueError("energy must be positive")
    if not (upper > 0):
        raise ValueError("upper must be positive")
    k = math.sqrt(energy)
    if step is None:
        step = min(mu.separation, math.pi / (4.0 * k)) / 8.0
    if not (step > 0):
        raise ValueError("step must be positive")
    atoms = [a for a in mu.atoms_up_to(upper) if 0.0 < a.t < upper]
    if any(a.is_wall for a in atoms):
        raise ValueError("a hard wall (b = inf) has no bounded transfer")
    breaks = [0.0] + [a.t for a in atoms] + [upper]
    sqrtb = [math.sqrt(a.b) for a in atoms]
    integrals, sups = _kernels.simon_stolz_sweep(breaks, sqrtb, k, step)
    growth = max(k, 1.0 / k)
    intervals = []
    cumulative = 0.0
    prod_b = 1.0
    for i in range(len(integrals)):
        cumulative += integrals[i]
        bound = (breaks[i + 1] - breaks[i]) / (growth ** (2 * i + 2) * prod_b)
        intervals.append(IntervalBound(i, breaks[i], breaks[i + 1], bound,
                                       integrals[i], sups[i], cumulative))
        if i < len(sqrtb):
            prod_b *= sqrtb[i] * sqrtb[i]
    return SimonStolzResult(energy, upper, step, cumulative, tuple(intervals))
