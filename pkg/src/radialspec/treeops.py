"""Whole-tree assembly from the half-line components.

A radial metric tree decomposes unitarily into half-line jump operators
A_k, one per generation k, where component k sees the atoms beyond
generation k shifted to start at the origin and enters with multiplicity
b_1 ... b_{k-1} (b_k - 1) (multiplicity 1 for k = 0).  Spectral reports
aggregate per-component densities with these weights.  The discrete
companion assembles depth-truncated adjacency and graph-Laplacian matrices
for eyeballing finite trees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .measures import Atom, AtomicMeasure, beta_from_b
from .weyl import spectral_density

__all__ = [
    "ComponentSpec",
    "DiscreteSpectrum",
    "TreeReport",
    "TreeSpec",
    "decompose",
    "discrete_truncation_spectrum",
    "tree_spectral_report",
]


@dataclass(frozen=True)
class TreeSpec:
    """Radial tree data: vertex distances t_n and integer branchings b_n >= 2."""

    params: tuple  # ((t_1, b_1), (t_2, b_2), ...)
    epsilon: float
    C: float

    def __post_init__(self):
        params = tuple((float(t), int(b)) for t, b in self.params)
        object.__setattr__(self, "params", params)
        if not (self.epsilon > 0):
            raise ValueError("epsilon must be positive")
        if any(b < 2 for _, b in params):
            raise ValueError("branching numbers must be integers >= 2")
        prev = 0.0
        for t, _ in params:
            if t - prev + 1e-12 * max(1.0, self.epsilon) < self.epsilon:
                raise ValueError("vertex gaps must be at least epsilon")
            prev = t


@dataclass(frozen=True)
class ComponentSpec:
    """One summand of the direct-sum decomposition."""

    k: int
    multiplicity: int
    measure: AtomicMeasure


def decompose(tree: TreeSpec, K: int) -> list:
    """Components 0..K of the direct-sum decomposition.

    Component k carries the atoms (t_n - t_k, beta(b_n)) for n > k and
    multiplicity b_1 ... b_{k-1} (b_k - 1); the multiplicities of all
    components up to K together with 1 telescope to b_1 ... b_K.
    """
    if K < 0 or K > len(tree.params):
        raise ValueError(f"K must lie in [0, {len(tree.params)}]")
    out = []
    for k in range(K + 1):
        base = tree.params[k - 1][0] if k else 0.0
        atoms = tuple(Atom(t - base, beta_from_b(b))
                      for t, b in tree.params[k:])
        measure = AtomicMeasure(atoms, tree.epsilon)
        if k == 0:
            mult = 1
        else:
            mult = math.prod(b for _, b in tree.params[:k - 1]) * (tree.params[k - 1][1] - 1)
        out.append(ComponentSpec(k, mult, measure))
    return out


@dataclass(frozen=True)
class TreeReport:
    """Aggregated spectral report of a depth-K truncated decomposition.

    ``uncounted_multiplicity`` is the number of generation-K subtree copies
    whose components the truncation leaves out; the aggregation discloses
    the truncation instead of claiming convergence.
    """

    energies: np.ndarray
    eta: float
    K: int
    components: tuple  # (ComponentSpec, DensityResult) pairs
    total_density: np.ndarray
    uncounted_multiplicity: int


def tree_spectral_report(tree: TreeSpec, K: int, energies: Sequence[float],
                         eta: float, delta: float = 1e-3) -> TreeReport:
    """Multiplicity-weighted sum of the component densities on a grid."""
    comps = decompose(tree, K)
    energies = np.asarray(list(energies), dtype=float)
    total = np.zeros(len(energies))
    rows = []
    for comp in comps:
        dens = spectral_density(comp.measure, energies, eta, delta=delta)
        rows.append((comp, dens))
        total = total + comp.multiplicity * dens.density
    uncounted = math.prod(b for _, b in tree.params[:K]) if K else 1
    return TreeReport(energies, eta, K, tuple(rows), total, uncounted)


@dataclass(frozen=True)
class DiscreteSpectrum:
    adjacency: np.ndarray
    laplacian: np.ndarray
    n_vertices: int
    depth: int


def discrete_truncation_spectrum(values: Sequence[int], depth: int,
                                 cap: int = 4000) -> DiscreteSpectrum:
    """Eigenvalues of the depth-truncated radial tree, both conventions.

    ``values[d]`` children hang off every vertex at distance d; the graph
    is assembled explicitly, so the vertex count is capped.  Returned are
    the sorted spectra of the adjacency matrix and of the graph Laplacian
    (degree minus adjacency).
    """
    values = [int(v) for v in values]
    if depth < 0 or depth > len(values):
        raise ValueError(f"depth must lie in [0, {len(values)}]")
    if any(v < 1 for v in values[:depth]):
        raise ValueError("branching entries must be >= 1")
    sizes = [1]
    for d in range(depth):
        sizes.append(sizes[-1] * values[d])
    total = sum(sizes)
    if total > cap:
        raise ValueError(f"{total} vertices exceed the cap of {cap}")
    adj = np.zeros((total, total))
    offsets = np.cumsum([0] + sizes)
    for d in range(depth):
        b = values[d]
        for j in range(sizes[d + 1]):
            child = offsets[d + 1] + j
            parent = offsets[d] + j // b
            adj[child, parent] = 1.0
            adj[parent, child] = 1.0
    lap = np.diag(adj.sum(axis=1)) - adj
    return DiscreteSpectrum(np.sort(np.linalg.eigvalsh(adj)),
                            np.sort(np.linalg.eigvalsh(lap)),
                            total, depth)
