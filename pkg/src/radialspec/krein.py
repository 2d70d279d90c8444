"""Resolvents and m-functions through the block boundary-trace system.

The resolvent of the jump operator differs from the free Dirichlet
resolvent by a finite-rank-per-atom correction: a block matrix indexed by
atom pairs, each block a 2x2 built from boundary traces of the free Green
kernel, plus a diagonal weight block per atom.  Inverting the (truncated)
block system yields the resolvent kernel and the m-function by explicit
sums, independently of the propagation route in :mod:`radialspec.weyl`.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import quad
from scipy.linalg import lu_factor, lu_solve

from .measures import AtomicMeasure
from .transfer import EnergyPoint, as_energy
from .weyl import MSample

__all__ = [
    "KreinSystem",
    "TraceVector",
    "TruncationError",
    "assemble_krein",
    "asymptotic_ratio",
    "boundary_trace",
    "free_green",
    "m_plus_krein",
    "resolvent_kernel",
    "trace_block",
    "weight_block",
]

# Empirical prefactor of the exponential tail estimate; tests assert only
# the exponential rate.
_TAIL_CONST = 2.0


class TruncationError(RuntimeError):
    """Raised when the requested tolerance needs a larger truncation."""

    def __init__(self, message: str, required_size: Optional[int] = None,
                 tail_bound: float = math.nan):
        super().__init__(message)
        self.required_size = required_size
        self.tail_bound = tail_bound


def _off_axis(z) -> EnergyPoint:
    e = as_energy(z)
    if e.on_positive_axis:
        raise ValueError(f"z = {e.z} lies on [0, inf)")
    return e


def free_green(t: float, u: float, z) -> complex:
    """Green kernel of the free Dirichlet half-line operator.

    (i/2k) (e^{ik|t-u|} - e^{ik(t+u)}) with Im k > 0; symmetric in (t, u)
    and vanishing on the boundary.
    """
    e = _off_axis(z)
    k = e.k
    return (0.5j / k) * (cmath.exp(1j * k * abs(t - u)) - cmath.exp(1j * k * (t + u)))


def _green_dt(t: float, u: float, k: complex) -> complex:
    # derivative of the kernel in its first slot; sign 0 at t = u
    sgn = math.copysign(1.0, t - u) if t != u else 0.0
    return -0.5 * (sgn * cmath.exp(1j * k * abs(t - u)) - cmath.exp(1j * k * (t + u)))


def trace_block(n: int, m: int, mu: AtomicMeasure, z) -> np.ndarray:
    """2x2 block of boundary traces of the free Green kernel at atoms n, m.

    Row index differentiates the first slot, column index the second one;
    the kink on the diagonal is resolved symmetrically (sign 0 at
    coinciding positions).  Indices are 0-based.
    """
    e = _off_axis(z)
    tn, tm = mu.atoms[n].t, mu.atoms[m].t
    return _trace_block_at(tn, tm, e.k)


def _trace_block_at(tn: float, tm: float, k: complex) -> np.ndarray:
    ed = cmath.exp(1j * k * abs(tn - tm))
    es = cmath.exp(1j * k * (tn + tm))
    sgn_mn = math.copysign(1.0, tm - tn) if tm != tn else 0.0
    return np.array([
        [(ed - es) / (2j * k), 0.5 * (sgn_mn * ed - es)],
        [0.5 * (-sgn_mn * ed - es), -0.5j * k * (ed + es)],
    ], dtype=complex)


def weight_block(beta: float) -> np.ndarray:
    """The diagonal coupling block (beta/2) [[0, 1], [1, 0]]."""
    if beta < 1.0:
        raise ValueError(f"weight must be at least 1, got {beta}")
    return np.array([[0.0, beta / 2.0], [beta / 2.0, 0.0]], dtype=float)


@dataclass(frozen=True)
class KreinSystem:
    """Truncated block system with its factorization and tail estimate.

    ``matrix`` is the 2N x 2N flattening of the N x N grid of 2x2 blocks;
    ``tail_bound`` estimates the operator norm of the discarded remainder
    (0 for an exactly represented finite measure); ``condition`` is the
    2-norm condition number of the truncation.
    """

    z: complex
    k: complex
    atoms: tuple
    matrix: np.ndarray
    lu: tuple
    tail_bound: float
    condition: float

    @property
    def size(self) -> int:
        return len(self.atoms)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return lu_solve(self.lu, rhs)

    def block(self, n: int, m: int) -> np.ndarray:
        return self.matrix[2 * n:2 * n + 2, 2 * m:2 * m + 2]

    def m_plus(self) -> complex:
        """ik plus the bilinear correction sum; equals ik + correction_sum()."""
        return 1j * self.k + self.correction_sum()

    def correction_sum(self) -> complex:
        """The double sum over atom pairs in the m-function formula."""
        if self.size == 0:
            return 0j
        w = np.empty(2 * self.size, dtype=complex)
        for n, a in enumerate(self.atoms):
            phase = cmath.exp(1j * self.k * a.t)
            w[2 * n] = phase
            w[2 * n + 1] = 1j * self.k * phase
        return complex(w @ self.solve(w))

    def resolvent(self, t: float, u: float) -> complex:
        """Resolvent kernel at (t, u), both off the represented atoms."""
        g = free_green(t, u, self.z)
        if self.size == 0:
            return g
        k = self.k
        row = np.empty(2 * self.size, dtype=complex)
        col = np.empty(2 * self.size, dtype=complex)
        for n, a in enumerate(self.atoms):
            row[2 * n] = free_green(t, a.t, self.z)
            row[2 * n + 1] = _green_dt(a.t, t, k)  # second-slot derivative, by symmetry
            col[2 * n] = free_green(a.t, u, self.z)
            col[2 * n + 1] = _green_dt(a.t, u, k)
        return g + complex(row @ self.solve(col))


@dataclass(frozen=True)
class TraceVector:
    """Values and derivatives of a smooth function at the atoms.

    For the free resolvent of a compactly supported function the per-atom
    2-norms decay like e^{-Im k * t_n} beyond the support, which keeps the
    block sums convergent.
    """

    z: complex
    entries: np.ndarray  # shape (N, 2)

    def norms(self) -> np.ndarray:
        return np.hypot(np.abs(self.entries[:, 0]), np.abs(self.entries[:, 1]))


def boundary_trace(mu: AtomicMeasure, z, f, support, size: Optional[int] = None,
                   quad_limit: int = 200) -> TraceVector:
    """Trace of the free resolvent of ``f`` at the atoms of ``mu``.

    ``f`` is a callable supported in the interval ``support``; entry n is
    ((A0 - z)^-1 f)(t_n) together with its derivative, computed by adaptive
    quadrature of the free kernel.
    """
    e = _off_axis(z)
    lo, hi = float(support[0]), float(support[1])
    atoms = mu.atoms if size is None else mu.atoms[:size]
    entries = np.empty((len(atoms), 2), dtype=complex)
    for n, a in enumerate(atoms):
        pieces = sorted({lo, hi, min(max(a.t, lo), hi)})
        val = 0j
        der = 0j
        for left, right in zip(pieces, pieces[1:]):
            if right <= left:
                continue
            for part, target in ((lambda u: free_green(a.t, u, e), 0),
                                 (lambda u: _green_dt(a.t, u, e.k), 1)):
                re = quad(lambda u: (part(u) * f(u)).real, left, right,
                          limit=quad_limit)[0]
                im = quad(lambda u: (part(u) * f(u)).imag, left, right,
                          limit=quad_limit)[0]
                if target == 0:
                    val += complex(re, im)
                else:
                    der += complex(re, im)
        entries[n, 0] = val
        entries[n, 1] = der
    return TraceVector(e.z, entries)


def _tail_bound(k: complex, next_t: float, eps: float) -> float:
    im = k.imag
    denom = -math.expm1(-im * eps)
    return _TAIL_CONST * abs(k) * math.exp(-im * next_t) / denom


def assemble_krein(mu: AtomicMeasure, z, size: Optional[int] = None,
                   rtol: float = 1e-9, max_atoms: int = 400) -> KreinSystem:
    """Assemble and factor the truncated block system at z off [0, inf).

    With ``size`` given, exactly that many atoms are used and the tail
    bound is recorded.  Otherwise the truncation grows until the tail
    bound, weighted by the squared inverse norm of the truncation, drops
    below ``rtol``; a measure whose tail cannot be silenced within
    ``max_atoms`` raises :class:`TruncationError`.
    """
    e = _off_axis(z)
    if size is not None:
        listed = _materialize(mu, size, max(size, max_atoms))
        if len(listed) < size:
            raise ValueError(f"measure has only {len(listed)} atoms, "
                             f"size {size} requested")
        return _assemble(mu, e, listed[:size], listed)
    if mu.tail.kind == "none":
        listed = list(mu.atoms)
        return _assemble(mu, e, listed, listed)
    listed = _materialize(mu, 8, max_atoms)
    n = min(len(listed), 8)
    while True:
        sys = _assemble(mu, e, listed[:n], listed)
        if sys.tail_bound == 0.0:
            return sys
        inv_norm = sys.condition / max(np.linalg.norm(sys.matrix, 2), 1e-300)
        if sys.tail_bound * inv_norm ** 2 <= rtol:
            return sys
        if n >= len(listed):
            if len(listed) >= max_atoms:
                raise TruncationError(
                    f"tail bound {sys.tail_bound:.3e} still above tolerance "
                    f"{rtol:.1e} at size {n}; increase max_atoms",
                    required_size=2 * n, tail_bound=sys.tail_bound)
            listed = _materialize(mu, 2 * len(listed), max_atoms)
            if n >= len(listed):
                return sys  # measure exhausted, tail bound is formal only
        n = min(2 * n, len(listed))


def _materialize(mu: AtomicMeasure, want: int, max_atoms: int) -> list:
    atoms = list(mu.atoms)
    if mu.tail.kind == "none" or not atoms:
        return atoms
    horizon = atoms[-1].t
    while len(atoms) < min(want, max_atoms):
        nxt = mu.next_atom_after(horizon)
        if nxt is None:
            break
        atoms.append(nxt)
        horizon = nxt.t
    return atoms


def _assemble(mu: AtomicMeasure, e: EnergyPoint, atoms: list, listed: list) -> KreinSystem:
    n = len(atoms)
    mat = np.zeros((2 * n, 2 * n), dtype=complex)
    for i in range(n):
        for j in range(n):
            mat[2 * i:2 * i + 2, 2 * j:2 * j + 2] = _trace_block_at(
                atoms[i].t, atoms[j].t, e.k)
        mat[2 * i:2 * i + 2, 2 * i:2 * i + 2] += weight_block(atoms[i].beta)
    if n == 0:
        return KreinSystem(e.z, e.k, (), mat, (np.zeros((0, 0)), np.zeros(0, dtype=int)),
                           0.0, 1.0)
    if len(listed) > n:
        tail = _tail_bound(e.k, listed[n].t, mu.separation)
    elif mu.tail.kind != "none":
        nxt = mu.next_atom_after(atoms[-1].t)
        tail = _tail_bound(e.k, nxt.t, mu.separation) if nxt is not None else 0.0
    else:
        tail = 0.0
    try:
        lu = lu_factor(mat)
    except np.linalg.LinAlgError as err:
        raise ArithmeticError(f"singular truncation at size {n}: {err}") from err
    condition = float(np.linalg.cond(mat, 2))
    if not math.isfinite(condition) or condition > 1e15:
        raise ArithmeticError(f"ill-conditioned truncation at size {n}: "
                              f"condition ~ {condition:.3e}")
    return KreinSystem(e.z, e.k, tuple(atoms), mat, lu, tail, condition)


def resolvent_kernel(mu: AtomicMeasure, z, t: float, u: float,
                     size: Optional[int] = None, rtol: float = 1e-9) -> complex:
    """Resolvent kernel G_z(t, u) of the jump operator, t, u off the atoms."""
    for x in (t, u):
        if any(a.t == x for a in mu.atoms):
            raise ValueError(f"{x} lies on an atom")
    sys = assemble_krein(mu, z, size=size, rtol=rtol)
    return sys.resolvent(t, u)


def m_plus_krein(mu: AtomicMeasure, z, size: Optional[int] = None,
                 rtol: float = 1e-9) -> MSample:
    """m_plus(z; 0) through the block system route."""
    if mu.whole_line and mu.atoms and mu.atoms[0].t <= 0:
        raise ValueError("the block route needs a half-line measure")
    sys = assemble_krein(mu, z, size=size, rtol=rtol)
    return MSample(sys.z, 0.0, "+", sys.m_plus(), "krein",
                   uncertainty=sys.tail_bound, truncation=sys.size)


def asymptotic_ratio(mu: AtomicMeasure, kappa: float, route: str = "krein",
                     size: Optional[int] = None) -> float:
    """Measured-over-predicted size of m_plus(-kappa^2; 0) + kappa.

    The prediction is the one-atom leading term
    -2 kappa e^{-2 kappa t_1} (b_1 - 1)/(b_1 + 1), with factor 1 when
    b_1 = inf; the ratio approaches 1 for large kappa.
    """
    if not mu.atoms:
        raise ValueError("the leading term needs at least one atom")
    if not (kappa > 0):
        raise ValueError("kappa must be positive")
    first = mu.atoms[0]
    b1 = first.b
    factor = 1.0 if math.isinf(b1) else (b1 - 1.0) / (b1 + 1.0)
    predicted = -2.0 * kappa * factor * math.exp(-2.0 * kappa * first.t)
    z = complex(-kappa * kappa, 0.0)
    if route == "krein":
        sys = assemble_krein(mu, z, size=size)
        excess = sys.correction_sum()
    elif route == "riccati":
        from .weyl import riccati_m_plus
        excess = riccati_m_plus(mu, z).value + kappa
    else:
        raise ValueError(f"unknown route {route!r}")
    if abs(complex(excess).imag) > 1e-8 * (1.0 + abs(excess)):
        raise ArithmeticError("m + kappa has a significant imaginary part")
    return float(complex(excess).real / predicted)
