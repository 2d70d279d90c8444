"""m-functions by projective transfer propagation and their consumers.

m_plus(z; t) = f'(z; t)/f(z; t) for the solution square integrable at
+inf, m_minus with the opposite sign for the solution decaying at -inf.
The propagation state is the projective pair [f : f'], renormalized after
every step, so hard walls (b = inf) and poles of m pass through exactly.
On top of the point evaluations sit the nested Weyl disks, boundary values
on the positive axis by Richardson extrapolation in the imaginary offset,
the spectral density and the reflectionless defect.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .measures import AtomicMeasure
from .transfer import EnergyPoint, as_energy, transfer

__all__ = [
    "DefectResult",
    "DensityResult",
    "MSample",
    "SpectralSet",
    "WeylDisk",
    "boundary_value",
    "m_minus",
    "period_monodromy",
    "reflectionless_defect",
    "riccati_m_plus",
    "spectral_density",
    "weyl_disk",
]

_TAIL_NEGLIGIBLE = 40.0  # e-foldings after which a tail atom is invisible


@dataclass(frozen=True)
class MSample:
    """One m-function value with its evaluation metadata."""

    z: complex
    t: float
    side: str  # "+" or "-"
    value: complex
    route: str  # "krein" or "riccati"
    uncertainty: float = 0.0
    truncation: Optional[int] = None
    converged: bool = True


@dataclass(frozen=True)
class WeylDisk:
    """Disk containing m_plus(z; 0) for every completion agreeing up to depth."""

    z: complex
    depth: float
    center: complex
    radius: float

    def contains(self, m: complex, slack: float = 1e-9) -> bool:
        return abs(complex(m) - self.center) <= self.radius + slack * (1.0 + self.radius)


def _require_valid_z(e: EnergyPoint, allow_boundary: bool):
    if e.z == 0:
        raise ValueError("z = 0 is not supported")
    if e.on_positive_axis and not allow_boundary:
        raise ValueError(f"z = {e.z} lies on [0, inf)")


def _check_base_point(mu: AtomicMeasure, t: float):
    for a in mu.atoms:
        if a.t == t:
            raise ValueError(f"base point {t} lies on an atom")


def _free_mat(k: complex, gap: float) -> np.ndarray:
    if k == 0:
        return np.array([[1.0, gap], [0.0, 1.0]], dtype=complex)
    c = cmath.cos(k * gap)
    s = cmath.sin(k * gap) / k
    return np.array([[c, s], [-k * k * s, c]], dtype=complex)


def _jump_mat(sqrt_b: float) -> np.ndarray:
    return np.array([[sqrt_b, 0.0], [0.0, 1.0 / sqrt_b]], dtype=complex)


def period_monodromy(mu: AtomicMeasure, z, anchor: Optional[float] = None) -> np.ndarray:
    """Transfer matrix over one period of a periodic-tail measure.

    Maps the state just right of the anchor atom to the state one period
    later.  Band and gap energies are told apart by |trace| below or above
    2 at real z.
    """
    if mu.tail.kind != "periodic":
        raise ValueError("measure has no periodic tail")
    period = mu.tail.period
    if anchor is None:
        anchor = mu.atoms[-1].t
    e = as_energy(z)
    cell = [a for a in mu.atoms if anchor - period < a.t <= anchor]
    if not cell or any(a.is_wall for a in cell):
        raise ValueError("period cell must be nonempty with finite branching")
    mat = np.eye(2, dtype=complex)
    cur = 0.0
    for a in cell:
        off = a.t + period - anchor
        mat = _jump_mat(math.sqrt(a.b)) @ _free_mat(e.k, off - cur) @ mat
        cur = off
    return mat


def _left_cell_monodromy(cell, start: float, period: float, k: complex) -> np.ndarray:
    # state just left of `start` to the state one period later, for a cell
    # of atoms inside [start, start + period)
    mat = np.eye(2, dtype=complex)
    cur = start
    for a in cell:
        mat = _jump_mat(math.sqrt(a.b)) @ _free_mat(k, a.t - cur) @ mat
        cur = a.t
    return _free_mat(k, start + period - cur) @ mat


def _floquet_candidates(mono: np.ndarray):
    tr = mono[0, 0] + mono[1, 1]
    disc = cmath.sqrt(tr * tr - 4.0)
    out = []
    for lam in ((tr + disc) / 2.0, (tr - disc) / 2.0):
        if abs(mono[0, 1]) >= abs(mono[1, 0]):
            vec = (mono[0, 1], lam - mono[0, 0])
        else:
            vec = (lam - mono[1, 1], mono[1, 0])
        scale = max(abs(vec[0]), abs(vec[1]))
        if scale == 0.0:
            raise ArithmeticError("degenerate period map")
        out.append((lam, vec[0] / scale, vec[1] / scale))
    return out


def _select_floquet(mono: np.ndarray, e: EnergyPoint, side: str):
    """Starting state for the periodic closure on the given side.

    Side "+" wants the direction contracted by the period map (square
    integrable towards +inf); side "-" the expanded one.  On the positive
    real axis inside a band both eigenvalues are unimodular and the limit
    from above is picked by the sign of Im m instead.
    """
    (l1, u1, v1), (l2, u2, v2) = _floquet_candidates(mono)
    split = abs(abs(l1) - abs(l2))
    if split > 1e-9 * max(abs(l1), abs(l2)):
        want_small = side == "+"
        if (abs(l1) < abs(l2)) == want_small:
            return u1, v1
        return u2, v2
    if e.on_positive_axis:
        # band energy: m_plus has Im >= 0, m_minus = -f'/f as well
        def im_m(u, v):
            if u == 0:
                return 0.0
            m = v / u if side == "+" else -v / u
            return m.imag
        if im_m(u1, v1) >= im_m(u2, v2):
            return u1, v1
        return u2, v2
    raise ArithmeticError("period map eigenvalues coincide; "
                          "move z off the band edge")


@dataclass(frozen=True)
class _TailStart:
    start: float
    u0: complex
    v0: complex
    atoms: list
    uncertainty: float = 0.0


def _resolve_tail(mu: AtomicMeasure, e: EnergyPoint, tail: str, t: float) -> str:
    if tail != "auto":
        return tail
    if mu.tail.kind == "none":
        return "free"
    if mu.tail.kind == "periodic":
        return "periodic"
    reach = max(t, mu.atoms[-1].t)
    nxt = mu.next_atom_after(reach)
    if nxt is not None and e.k.imag * (nxt.t - reach) > _TAIL_NEGLIGIBLE:
        return "free"
    return "disk"


def riccati_m_plus(mu: AtomicMeasure, z, t: float = 0.0, tail: str = "auto",
                   max_tail_atoms: int = 512) -> MSample:
    """m_plus(z; t) by leftward projective propagation from the tail.

    ``tail`` picks the closure beyond the listed window: "free" starts from
    the decaying free solution, "periodic" from the contracting Floquet
    direction, "disk" returns the Weyl disk center with the radius recorded
    as the uncertainty.  "auto" follows the measure's own tail rule.  Real
    z > 0 is accepted as the boundary value from above for free and
    periodic closures.
    """
    e = as_energy(z)
    _require_valid_z(e, allow_boundary=True)
    _check_base_point(mu, t)

    wall = next((a for a in mu.atoms if a.t > t and a.is_wall), None)
    if wall is not None:
        inner = [a for a in mu.atoms if t < a.t < wall.t]
        pos = [wall.t] + [a.t for a in reversed(inner)]
        sqrtb = [0.0] + [math.sqrt(a.b) for a in reversed(inner)]
        u, v = _kernels.riccati_left_sweep(pos, sqrtb, e.k, wall.t, t,
                                           0j, 1.0 + 0j)
        return _sample(e, t, "+", u, v, truncation=len(inner) + 1)

    mode = _resolve_tail(mu, e, tail, t)
    if mode == "free":
        atoms = [a for a in mu.atoms if a.t > t]
        start = atoms[-1].t if atoms else t
        state = _TailStart(start, 1.0 + 0j, 1j * e.k, atoms)
    elif mode == "periodic":
        state = _periodic_start(mu, e, t, max_tail_atoms)
    elif mode == "disk":
        if e.on_positive_axis:
            raise ValueError("an undetermined tail at real z >= 0 needs "
                             "a positive imaginary offset")
        return _disk_sample(mu, e, t)
    else:
        raise ValueError(f"unknown tail mode {tail!r}")

    if len(state.atoms) > max_tail_atoms:
        raise ValueError("too many atoms in the propagation window")
    pos = [a.t for a in reversed(state.atoms)]
    sqrtb = [0.0 if a.is_wall else math.sqrt(a.b) for a in reversed(state.atoms)]
    u, v = _kernels.riccati_left_sweep(pos, sqrtb, e.k, state.start, t,
                                       state.u0, state.v0)
    return _sample(e, t, "+", u, v, uncertainty=state.uncertainty,
                   truncation=len(state.atoms))


def _periodic_start(mu: AtomicMeasure, e: EnergyPoint, t: float,
                    max_tail_atoms: int) -> _TailStart:
    anchor = mu.atoms[-1].t
    hops = 0
    while anchor < t:
        anchor += mu.tail.period
        hops += 1
        if hops > max_tail_atoms:
            raise ValueError("base point too deep inside the periodic tail")
    mono = period_monodromy(mu, e)
    u0, v0 = _select_floquet(mono, e, "+")
    atoms = [a for a in mu.atoms_up_to(anchor) if t < a.t <= anchor]
    return _TailStart(anchor, u0, v0, atoms)


def _disk_sample(mu: AtomicMeasure, e: EnergyPoint, t: float) -> MSample:
    listed = [a for a in mu.atoms if a.t > t]
    depth = (listed[-1].t if listed else t) + min(1.0, mu.separation) / 2.0
    head = AtomicMeasure(mu.atoms, mu.separation, mu.whole_line)
    disk = weyl_disk(head, e, depth, base=t)
    return MSample(e.z, t, "+", disk.center, "riccati",
                   uncertainty=disk.radius, truncation=len(listed),
                   converged=False)


def _sample(e, t, side, u, v, uncertainty=0.0, truncation=None) -> MSample:
    if u == 0:
        value = complex(math.inf, 0.0)
    else:
        value = v / u if side == "+" else -v / u
    return MSample(e.z, t, side, value, "riccati",
                   uncertainty=uncertainty, truncation=truncation)


def m_minus(mu: AtomicMeasure, z, t: float = 0.0, left_tail: str = "free",
            period: Optional[float] = None) -> MSample:
    """m_minus(z; t) = -f'/f for the solution decaying at -inf.

    The part of the measure left of ``t`` is closed by ``left_tail``:
    "free" (nothing below the first listed atom) or "periodic" with the
    given period, anchored at the first listed atom.
    """
    e = as_energy(z)
    _require_valid_z(e, allow_boundary=True)
    _check_base_point(mu, t)

    atoms = [a for a in mu.atoms if a.t < t]
    wall_idx = max((i for i, a in enumerate(atoms) if a.is_wall), default=None)
    if wall_idx is not None:
        inner = atoms[wall_idx + 1:]
        pos = [atoms[wall_idx].t] + [a.t for a in inner]
        sqrtb = [0.0] + [math.sqrt(a.b) for a in inner]
        u, v = _kernels.riccati_right_sweep(pos, sqrtb, e.k,
                                            atoms[wall_idx].t, t,
                                            1.0 + 0j, 0j)
        return _sample(e, t, "-", u, v, truncation=len(inner) + 1)

    if left_tail == "free":
        start = atoms[0].t if atoms else t
        u0, v0 = 1.0 + 0j, -1j * e.k
    elif left_tail == "periodic":
        if period is None:
            raise ValueError("periodic left tail needs a period")
        if not atoms:
            raise ValueError("periodic left tail needs listed atoms below t")
        first = atoms[0].t
        cell = [a for a in atoms if a.t < first + period]
        if any(a.is_wall for a in cell):
            raise ValueError("period cell must carry finite branching")
        mono = _left_cell_monodromy(cell, first, period, e.k)
        u0, v0 = _select_floquet(mono, e, "-")
        start = first
    else:
        raise ValueError(f"unknown left tail {left_tail!r}")

    pos = [a.t for a in atoms]
    sqrtb = [0.0 if a.is_wall else math.sqrt(a.b) for a in atoms]
    u, v = _kernels.riccati_right_sweep(pos, sqrtb, e.k, start, t, u0, v0)
    return _sample(e, t, "-", u, v, truncation=len(pos))


def weyl_disk(mu: AtomicMeasure, z, depth: float, base: float = 0.0) -> WeylDisk:
    """The nested Weyl disk at the given depth.

    For Im z > 0 this is the image of the closed upper half plane under the
    inverse of the depth transfer acting as a Moebius map; every completion
    of the measure beyond ``depth`` has its m_plus(z; base) inside.  For
    z < 0 the admissible boundary data at the depth point are the
    nonpositive reals together with the point at infinity, and the image is
    a real interval reported as a degenerate disk.
    """
    e = as_energy(z)
    if e.on_positive_axis:
        raise ValueError("Weyl disks need Im z > 0 or z < 0")
    wall = next((a for a in mu.atoms if base < a.t < depth and a.is_wall), None)
    if wall is not None:
        m = riccati_m_plus(mu, e, t=base)
        return WeylDisk(e.z, depth, m.value, 0.0)
    mat = transfer(mu, depth, base, e)
    if e.z.imag > 0:
        center, radius = _halfplane_image(mat)
        return WeylDisk(e.z, depth, center, radius)
    mat = mat.real
    t11, t12, t21, t22 = mat[0, 0], mat[0, 1], mat[1, 0], mat[1, 1]
    if not (t12 > 0):
        raise ArithmeticError("unexpected sign in the depth transfer")
    pole = t22 / t12
    if pole <= 0:
        raise ArithmeticError("Moebius pole inside the admissible data")
    end_dirichlet = -t11 / t12   # boundary data f(depth) = 0
    end_neumann = -t21 / t22     # boundary data f'(depth) = 0
    lo, hi = sorted((end_dirichlet, end_neumann))
    return WeylDisk(e.z, depth, complex((lo + hi) / 2.0, 0.0), (hi - lo) / 2.0)


def _halfplane_image(mat: np.ndarray):
    """Center and radius of the Moebius image of Im w >= 0 under mat**-1."""
    t11, t12 = complex(mat[0, 0]), complex(mat[0, 1])
    t21, t22 = complex(mat[1, 0]), complex(mat[1, 1])
    alpha = (t22 * t12.conjugate()).imag
    if not (alpha < 0):
        raise ArithmeticError("Moebius image is not a bounded disk")
    u = t22 * t11.conjugate()
    v = t21 * t12.conjugate()
    bx = u.imag + v.imag
    by = u.real - v.real
    delta = (t21 * t11.conjugate()).imag
    cx = -bx / (2.0 * alpha)
    cy = -by / (2.0 * alpha)
    r_sq = (bx * bx + by * by) / (4.0 * alpha * alpha) - delta / alpha
    return complex(cx, cy), math.sqrt(max(r_sq, 0.0))


def boundary_value(mu: AtomicMeasure, energy: float, t: float = 0.0,
                   side: str = "+", eta0: Optional[float] = None,
                   tol: float = 1e-8, max_levels: int = 36,
                   **m_kwargs) -> MSample:
    """m(E + i0; t) by Richardson extrapolation along a halving eta schedule.

    Three-point extrapolants from m(E + i eta_j) are compared until
    successive ones differ by less than ``tol``; failure to converge is
    flagged (a candidate singular point), not raised.
    """
    if not (energy > 0):
        raise ValueError("energy must be positive")
    if side not in ("+", "-"):
        raise ValueError("side must be '+' or '-'")
    if eta0 is None:
        eta0 = 1e-2 * (1.0 + energy)
    evaluate = riccati_m_plus if side == "+" else m_minus
    values = []
    extrapolants = []
    best = None
    diff = math.inf
    converged = False
    for level in range(max_levels):
        eta = eta0 * 0.5 ** level
        sample = evaluate(mu, complex(energy, eta), t, **m_kwargs)
        values.append(sample.value)
        if len(values) >= 3:
            r = (8.0 * values[-1] - 6.0 * values[-2] + values[-3]) / 3.0
            if extrapolants:
                diff = abs(r - extrapolants[-1])
            extrapolants.append(r)
            best = r
            if diff < tol:
                converged = True
                break
    if best is None:
        best = values[-1]
    return MSample(complex(energy, 0.0), t, side, best, "riccati",
                   uncertainty=diff if math.isfinite(diff) else math.inf,
                   converged=converged)


@dataclass(frozen=True)
class SpectralSet:
    """Grid indicator of delta < Im m_plus < 1/delta."""

    energies: np.ndarray
    indicator: np.ndarray
    delta: float


@dataclass(frozen=True)
class DensityResult:
    energies: np.ndarray
    eta: float
    m_plus: np.ndarray
    density: np.ndarray
    spectral_set: SpectralSet


def spectral_density(mu: AtomicMeasure, energies: Sequence[float], eta: float,
                     delta: float = 1e-3, t: float = 0.0,
                     **m_kwargs) -> DensityResult:
    """Im m_plus(E + i eta; t)/pi on a grid, with the thresholded support.

    ``eta = 0`` requests extrapolated boundary values; energies whose
    extrapolation does not converge get density NaN.
    """
    energies = np.asarray(list(energies), dtype=float)
    m_vals = np.empty(len(energies), dtype=complex)
    for i, energy in enumerate(energies):
        if eta == 0.0:
            sample = boundary_value(mu, energy, t, side="+", **m_kwargs)
            m_vals[i] = sample.value if sample.converged else complex(math.nan, math.nan)
        else:
            m_vals[i] = riccati_m_plus(mu, complex(energy, eta), t, **m_kwargs).value
    density = np.imag(m_vals) / math.pi
    with np.errstate(invalid="ignore"):
        indicator = (np.imag(m_vals) > delta) & (np.imag(m_vals) < 1.0 / delta)
    return DensityResult(energies, eta, m_vals, density,
                         SpectralSet(energies, indicator, delta))


@dataclass(frozen=True)
class DefectResult:
    energies: np.ndarray
    defect: np.ndarray
    m_plus: np.ndarray
    m_minus: np.ndarray

    @property
    def sup(self) -> float:
        return float(np.max(self.defect))

    @property
    def mean(self) -> float:
        return float(np.mean(self.defect))


def reflectionless_defect(mu: AtomicMeasure, energies: Sequence[float],
                          t: float = 0.0, tol: float = 1e-8,
                          left_tail: str = "free",
                          period: Optional[float] = None) -> DefectResult:
    """|m_plus(E + i0; t) + conj(m_minus(E + i0; t))| on a grid.

    Vanishing defect almost everywhere on a set characterizes
    reflectionless behaviour there; the free whole line gives zero
    identically on (0, inf).
    """
    energies = np.asarray(list(energies), dtype=float)
    mp = np.empty(len(energies), dtype=complex)
    mm = np.empty(len(energies), dtype=complex)
    minus_kwargs = {"left_tail": left_tail}
    if period is not None:
        minus_kwargs["period"] = period
    for i, energy in enumerate(energies):
        mp[i] = boundary_value(mu, energy, t, side="+", tol=tol).value
        mm[i] = boundary_value(mu, energy, t, side="-", tol=tol,
                               **minus_kwargs).value
    defect = np.abs(mp + np.conj(mm))
    return DefectResult(energies, defect, mp, mm)
