"""Atomic jump measures on the half line and the whole line.

A branching sequence (t_n, b_n) is stored as the purely atomic measure
sum_n beta_n * delta(t_n) with beta = (sqrt(b) + 1)/(sqrt(b) - 1); b = inf
is admitted and corresponds to beta = 1 (a hard Dirichlet wall).  Infinite
measures are represented by a finite window of atoms plus a tail generator
(periodic repetition or a rapidly growing gap schedule), so every operation
can state exactly which window it consumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linprog

__all__ = [
    "Atom",
    "AtomicMeasure",
    "DiscreteBranchSequence",
    "MeasureClassBounds",
    "MembershipReport",
    "MeasureViolation",
    "PeriodicityResult",
    "RightLimitResult",
    "TailRule",
    "b_from_beta",
    "beta_from_b",
    "is_eventually_periodic",
    "measure_from_json",
    "measure_to_json",
    "right_limit",
    "sparsify",
    "validate_measure",
    "weak_distance",
]

_REL_TOL = 1e-12


def beta_from_b(b: float) -> float:
    """Weight of the atom attached to branching number ``b``.

    beta = (sqrt(b) + 1)/(sqrt(b) - 1); b = inf maps to beta = 1.
    """
    if b <= 1.0:
        raise ValueError(f"branching number must exceed 1, got {b}")
    if math.isinf(b):
        return 1.0
    r = math.sqrt(b)
    return (r + 1.0) / (r - 1.0)


def b_from_beta(beta: float) -> float:
    """Inverse of :func:`beta_from_b`; beta = 1 maps back to inf."""
    if beta < 1.0:
        raise ValueError(f"weight must be at least 1, got {beta}")
    if beta == 1.0:
        return math.inf
    r = (beta + 1.0) / (beta - 1.0)
    return r * r


@dataclass(frozen=True)
class Atom:
    """A single atom: position ``t`` and weight ``beta`` (>= 1)."""

    t: float
    beta: float

    def __post_init__(self):
        if not math.isfinite(self.t):
            raise ValueError("atom position must be finite")
        if not (self.beta >= 1.0):
            raise ValueError(f"atom weight must be >= 1, got {self.beta}")

    @classmethod
    def from_b(cls, t: float, b: float) -> "Atom":
        return cls(float(t), beta_from_b(float(b)))

    @property
    def b(self) -> float:
        return b_from_beta(self.beta)

    @property
    def sqrt_b(self) -> float:
        """sqrt of the branching number; inf for a hard wall."""
        return math.inf if self.beta == 1.0 else (self.beta + 1.0) / (self.beta - 1.0)

    @property
    def is_wall(self) -> bool:
        """True when b = inf (beta = 1), a Dirichlet decoupling point."""
        return self.beta == 1.0


@dataclass(frozen=True)
class TailRule:
    """How a measure continues past its last listed atom.

    kind ``"none"``: it does not.  kind ``"periodic"``: the atoms within one
    period of the last atom repeat with spacing ``period``.  kind
    ``"gaps"``: atoms of weight ``beta`` follow with the gap after the n-th
    output atom at least (n+1)**(2(n+1)).
    """

    kind: str = "none"
    period: Optional[float] = None
    beta: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("none", "periodic", "gaps"):
            raise ValueError(f"unknown tail kind {self.kind!r}")
        if self.kind == "periodic" and not (self.period and self.period > 0):
            raise ValueError("periodic tail needs a positive period")
        if self.kind == "gaps" and not (self.beta and self.beta >= 1.0):
            raise ValueError("gap tail needs a weight >= 1")

    @classmethod
    def none(cls) -> "TailRule":
        return cls("none")

    @classmethod
    def periodic(cls, period: float) -> "TailRule":
        return cls("periodic", period=float(period))

    @classmethod
    def gaps(cls, beta: float) -> "TailRule":
        return cls("gaps", beta=float(beta))


def _tail_gap_after(index: int) -> float:
    # gap leaving the index-th output atom (1-based); dominates n**(2n)
    n = index + 1
    return float(n) ** (2 * n)


@dataclass(frozen=True)
class AtomicMeasure:
    """Finite window of atoms plus a declared separation and tail rule.

    ``separation`` is the class parameter epsilon the measure claims to
    satisfy; :func:`validate_measure` checks the claim.  ``whole_line``
    distinguishes measures supported anywhere on the line (shifts and right
    limits) from half-line measures supported in [separation, inf).
    """

    atoms: tuple = ()
    separation: float = 1.0
    whole_line: bool = False
    tail: TailRule = field(default_factory=TailRule.none)

    def __post_init__(self):
        if not (self.separation > 0):
            raise ValueError("separation must be positive")
        atoms = tuple(self.atoms)
        object.__setattr__(self, "atoms", atoms)
        for a, b in zip(atoms, atoms[1:]):
            if not (b.t > a.t):
                raise ValueError("atom positions must be strictly increasing")
        if self.tail.kind != "none" and not atoms:
            raise ValueError("a tail rule needs at least one listed atom to anchor it")

    @classmethod
    def from_pairs(cls, pairs: Sequence, *, separation: float = 1.0,
                   whole_line: bool = False, tail: Optional[TailRule] = None) -> "AtomicMeasure":
        """Build from (t, b) pairs; b may be float('inf')."""
        atoms = tuple(Atom.from_b(t, b) for t, b in pairs)
        return cls(atoms, separation, whole_line, tail or TailRule.none())

    @property
    def is_empty(self) -> bool:
        return not self.atoms and self.tail.kind == "none"

    @property
    def positions(self) -> np.ndarray:
        return np.array([a.t for a in self.atoms], dtype=float)

    @property
    def weights(self) -> np.ndarray:
        return np.array([a.beta for a in self.atoms], dtype=float)

    def shift(self, s: float) -> "AtomicMeasure":
        """Translate every atom by -s; the result is whole-line class."""
        atoms = tuple(Atom(a.t - s, a.beta) for a in self.atoms)
        return replace(self, atoms=atoms, whole_line=True)

    def restrict(self, lo: float, hi: float) -> "AtomicMeasure":
        """The atoms inside the open window (lo, hi); the tail is dropped."""
        picked = tuple(a for a in self.atoms_up_to(hi) if lo < a.t < hi)
        return replace(self, atoms=picked, tail=TailRule.none())

    def atoms_up_to(self, x: float, max_count: int = 100000) -> list:
        """All atoms with t <= x, materializing the tail as needed."""
        listed = [a for a in self.atoms if a.t <= x]
        if self.tail.kind == "none" or not self.atoms or self.atoms[-1].t > x:
            return listed
        out = list(listed)
        if self.tail.kind == "periodic":
            period = self.tail.period
            anchor = self.atoms[-1].t
            cell = [a for a in self.atoms if a.t > anchor - period]
            j = 1
            while cell[0].t + j * period <= x:
                for a in cell:
                    t = a.t + j * period
                    if t <= x:
                        out.append(Atom(t, a.beta))
                if len(out) > max_count:
                    raise ValueError("tail materialization exceeded max_count")
                j += 1
        else:  # gaps
            n = len(self.atoms)
            t = self.atoms[-1].t
            while True:
                t = t + max(self.separation, _tail_gap_after(n))
                if t > x:
                    break
                out.append(Atom(t, self.tail.beta))
                n += 1
                if len(out) > max_count:
                    raise ValueError("tail materialization exceeded max_count")
        return out

    def next_atom_after(self, x: float) -> Optional[Atom]:
        """The first atom strictly beyond x, tail included."""
        for a in self.atoms:
            if a.t > x:
                return a
        if self.tail.kind == "none" or not self.atoms:
            return None
        if self.tail.kind == "periodic":
            period = self.tail.period
            anchor = self.atoms[-1].t
            cell = [a for a in self.atoms if a.t > anchor - period]
            j = 1
            while True:
                for a in cell:
                    t = a.t + j * period
                    if t > x:
                        return Atom(t, a.beta)
                j += 1
        n = len(self.atoms)
        t = self.atoms[-1].t
        while True:
            t = t + max(self.separation, _tail_gap_after(n))
            if t > x:
                return Atom(t, self.tail.beta)
            n += 1


@dataclass(frozen=True)
class MeasureClassBounds:
    """Class membership parameters: minimum gap epsilon and weight bound C.

    Membership requires gaps >= epsilon, first position >= epsilon on the
    half line, and 1 + 1/C <= beta <= C.
    """

    epsilon: float
    C: float

    def __post_init__(self):
        if not (self.epsilon > 0):
            raise ValueError("epsilon must be positive")
        if not (self.C >= 2):
            raise ValueError("C must be at least 2")


@dataclass(frozen=True)
class MeasureViolation:
    index: int  # 1-based atom index
    code: str
    message: str


@dataclass(frozen=True)
class MembershipReport:
    passed: bool
    violations: tuple
    epsilon: float
    C: float
    n_atoms: int


def validate_measure(mu: AtomicMeasure, bounds: MeasureClassBounds) -> MembershipReport:
    """Check class membership constraint by constraint; never raises."""
    eps = bounds.epsilon
    slack = _REL_TOL * max(1.0, eps)
    violations = []
    atoms = mu.atoms
    if atoms and not mu.whole_line and atoms[0].t + slack < eps:
        violations.append(MeasureViolation(
            1, "first_position", f"t_1 = {atoms[0].t} < epsilon = {eps}"))
    for i in range(1, len(atoms)):
        gap = atoms[i].t - atoms[i - 1].t
        if gap + slack < eps:
            violations.append(MeasureViolation(
                i + 1, "gap", f"gap {gap} < epsilon = {eps}"))
    lo = 1.0 + 1.0 / bounds.C
    wslack = _REL_TOL * bounds.C
    for i, a in enumerate(atoms):
        if a.beta + wslack < lo:
            violations.append(MeasureViolation(
                i + 1, "weight_low", f"beta = {a.beta} < 1 + 1/C = {lo}"))
        if a.beta - wslack > bounds.C:
            violations.append(MeasureViolation(
                i + 1, "weight_high", f"beta = {a.beta} > C = {bounds.C}"))
    return MembershipReport(not violations, tuple(violations),
                            bounds.epsilon, bounds.C, len(atoms))


def weak_distance(mu: AtomicMeasure, nu: AtomicMeasure, window: float) -> float:
    """Bounded-Lipschitz distance between window restrictions.

    Computed exactly (up to LP solver accuracy) as the maximum of
    |integral f d(mu - nu)| over test functions with |f| <= 1, Lipschitz
    constant <= 1 and support inside the window: [0, W] when both measures
    are half-line class, [-W, W] otherwise.  The maximum is a linear
    program over the merged atom positions; a feasible vector of values
    there always extends to an admissible test function.
    """
    if not (window > 0):
        raise ValueError("window must be positive")
    whole = mu.whole_line or nu.whole_line
    lo = -window if whole else 0.0
    hi = window
    signed = {}
    for a in mu.atoms_up_to(hi):
        if lo < a.t < hi:
            signed[a.t] = signed.get(a.t, 0.0) + a.beta
    for a in nu.atoms_up_to(hi):
        if lo < a.t < hi:
            signed[a.t] = signed.get(a.t, 0.0) - a.beta
    xs = sorted(t for t, w in signed.items() if w != 0.0)
    if not xs:
        return 0.0
    x = np.array(xs)
    w = np.array([signed[t] for t in xs])
    cap = np.minimum(1.0, np.minimum(hi - x, x - lo))
    n = len(xs)
    if n > 1:
        gaps = np.diff(x)
        rows = np.zeros((2 * (n - 1), n))
        for i in range(n - 1):
            rows[2 * i, i] = 1.0
            rows[2 * i, i + 1] = -1.0
            rows[2 * i + 1, i] = -1.0
            rows[2 * i + 1, i + 1] = 1.0
        b_ub = np.repeat(gaps, 2)
        res = linprog(-w, A_ub=rows, b_ub=b_ub,
                      bounds=list(zip(-cap, cap)), method="highs")
    else:
        res = linprog(-w, bounds=list(zip(-cap, cap)), method="highs")
    if not res.success:
        raise RuntimeError(f"weak distance LP failed: {res.message}")
    return float(max(-res.fun, 0.0))


@dataclass(frozen=True)
class RightLimitResult:
    """Outcome of a right-limit extraction along a finite shift sequence."""

    measure: Optional[AtomicMeasure]
    converged: bool
    stable_from: Optional[float]  # first shift from which all windows match
    window: float
    deviations: tuple  # per shift: max atom deviation vs the final window, inf on mismatch


def _atoms_match(a, b, pos_tol, w_tol):
    if len(a) != len(b):
        return math.inf
    dev = 0.0
    for p, q in zip(a, b):
        dp = abs(p.t - q.t)
        dw = abs(p.beta - q.beta)
        if dp > pos_tol or dw > w_tol:
            return math.inf
        dev = max(dev, dp, dw)
    return dev


def right_limit(mu: AtomicMeasure, shifts: Sequence[float], window: float,
                tol: float = 1e-9) -> RightLimitResult:
    """Candidate weak limit of the shifted measures on (-window, window).

    The windows of ``shift(mu, s_j)`` must agree atom by atom (positions
    within tol * separation, weights within tol * max observed weight) for
    every shift from some point on; otherwise the result reports
    non-convergence.
    """
    shifts = [float(s) for s in shifts]
    if len(shifts) < 2:
        raise ValueError("need at least two shifts")
    if any(b <= a for a, b in zip(shifts, shifts[1:])):
        raise ValueError("shifts must be strictly increasing")
    base = mu.atoms_up_to(shifts[-1] + window)
    snapshots = []
    for s in shifts:
        snap = tuple(Atom(a.t - s, a.beta)
                     for a in base if -window < a.t - s < window)
        snapshots.append(snap)
    betas = [a.beta for snap in snapshots for a in snap]
    pos_tol = tol * mu.separation
    w_tol = tol * max([1.0] + betas)
    final = snapshots[-1]
    deviations = tuple(_atoms_match(snap, final, pos_tol, w_tol)
                       for snap in snapshots)
    stable_idx = None
    for j in range(len(snapshots)):
        if all(math.isfinite(d) for d in deviations[j:]):
            stable_idx = j
            break
    converged = stable_idx is not None and stable_idx <= len(snapshots) - 2
    candidate = None
    if converged:
        candidate = AtomicMeasure(final, mu.separation, whole_line=True)
    return RightLimitResult(candidate, converged,
                            shifts[stable_idx] if stable_idx is not None else None,
                            window, deviations)


def sparsify(mu: AtomicMeasure, R: float, bounds: MeasureClassBounds,
             count: int = 4) -> AtomicMeasure:
    """Keep mu on [0, R] and continue with rapidly growing gaps.

    The gap leaving the n-th output atom is max(epsilon, (n+1)**(2(n+1))),
    so every appended gap dominates n**(2n).  Appended atoms copy the last
    kept weight, or use beta = C when nothing was kept.  The kept part must
    already satisfy ``bounds``.
    """
    if not (R > 0):
        raise ValueError("R must be positive")
    if not 0 <= count <= 32:
        raise ValueError("count must lie in [0, 32]")
    kept = tuple(a for a in mu.atoms_up_to(R) if a.t <= R)
    head = replace(mu, atoms=kept, tail=TailRule.none())
    report = validate_measure(head, bounds)
    if not report.passed:
        details = "; ".join(v.message for v in report.violations)
        raise ValueError(f"measure violates bounds on [0, R]: {details}")
    weight = kept[-1].beta if kept else bounds.C
    atoms = list(kept)
    n = len(kept)
    if kept:
        t = kept[-1].t + max(mu.separation, _tail_gap_after(n))
        t = max(t, R + max(mu.separation, 1.0))
    else:
        t = max(R, 0.0) + max(mu.separation, 1.0)
    for _ in range(count):
        atoms.append(Atom(t, weight))
        n += 1
        t = t + max(mu.separation, _tail_gap_after(n))
    return AtomicMeasure(tuple(atoms), mu.separation, mu.whole_line,
                         TailRule.gaps(weight))


@dataclass(frozen=True)
class DiscreteBranchSequence:
    """A window of an integer branching sequence.

    ``horizon`` is the number of leading entries considered reliable;
    ``max_value`` a declared bound on the entries.
    """

    values: tuple
    horizon: int = 0
    max_value: int = 0

    def __post_init__(self):
        values = tuple(int(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if any(v < 1 for v in values):
            raise ValueError("branching entries must be >= 1")
        horizon = self.horizon or len(values)
        if not 0 < horizon <= len(values):
            raise ValueError("horizon must lie in [1, len(values)]")
        object.__setattr__(self, "horizon", horizon)
        max_value = self.max_value or (max(values) if values else 1)
        if values and max(values) > max_value:
            raise ValueError("entries exceed the declared maximum")
        object.__setattr__(self, "max_value", max_value)


@dataclass(frozen=True)
class PeriodicityResult:
    start: int  # 1-based index of the first entry inside the periodic regime
    period: int
    horizon: int


def is_eventually_periodic(seq: DiscreteBranchSequence, max_start: int,
                           max_period: int) -> Optional[PeriodicityResult]:
    """Smallest (start, period) making the window eventually periodic.

    This is a semi-decision relative to the window: (start, period) is
    returned when b[n + period] == b[n] holds for every in-window n >=
    start, lexicographically smallest first.  The window must be longer
    than max_start + 2 * max_period.
    """
    vals = seq.values[:seq.horizon]
    length = len(vals)
    if length <= max_start + 2 * max_period:
        raise ValueError(
            f"window of length {length} is too short for max_start="
            f"{max_start}, max_period={max_period}")
    for start in range(1, max_start + 1):
        for period in range(1, max_period + 1):
            if all(vals[n - 1 + period] == vals[n - 1]
                   for n in range(start, length - period + 1)):
                return PeriodicityResult(start, period, length)
    return None


def measure_to_json(mu: AtomicMeasure, C: float) -> dict:
    """Serialize a measure with its class bound to the document schema."""
    atoms = []
    for a in mu.atoms:
        b = a.b
        atoms.append({"t": a.t, "b": "inf" if math.isinf(b) else b})
    tail = {"kind": mu.tail.kind}
    if mu.tail.kind == "periodic":
        tail["period"] = mu.tail.period
    elif mu.tail.kind == "gaps":
        tail["beta"] = mu.tail.beta
    doc = {"epsilon": mu.separation, "C": float(C), "atoms": atoms, "tail": tail}
    if mu.whole_line:
        doc["support"] = "whole_line"
    return doc


def measure_from_json(doc: dict):
    """Parse a measure document; returns (AtomicMeasure, MeasureClassBounds)."""
    eps = float(doc["epsilon"])
    bounds = MeasureClassBounds(eps, float(doc["C"]))
    atoms = []
    for i, rec in enumerate(doc.get("atoms", [])):
        has_b = "b" in rec
        has_beta = "beta" in rec
        if has_b == has_beta:
            raise ValueError(f"atom {i}: exactly one of b/beta is required")
        if has_b:
            raw = rec["b"]
            b = math.inf if raw == "inf" else float(raw)
            atoms.append(Atom.from_b(float(rec["t"]), b))
        else:
            atoms.append(Atom(float(rec["t"]), float(rec["beta"])))
    tail_doc = doc.get("tail", {"kind": "none"})
    kind = tail_doc.get("kind", "none")
    if kind == "none":
        tail = TailRule.none()
    elif kind == "periodic":
        tail = TailRule.periodic(float(tail_doc["period"]))
    elif kind == "gaps":
        tail = TailRule.gaps(float(tail_doc["beta"]))
    else:
        raise ValueError(f"unknown tail kind {kind!r}")
    whole = doc.get("support", "half_line") == "whole_line"
    mu = AtomicMeasure(tuple(atoms), eps, whole, tail)
    return mu, bounds
