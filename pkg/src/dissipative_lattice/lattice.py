"""Lattice geometry: sites, bonds, pair-distance classes and z-field layout.

Sites are labelled 1..N throughout the public API.  The preset
``triangular7`` is a hexagon of six border sites around a central site 4::

        1   2
      3   4   5
        6   7

with border ring order 1-2-5-7-6-3.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "LatticeSpec",
    "FieldAssignment",
    "build_lattice",
    "build_triangular7",
    "lattice_preset",
    "assign_fields",
    "automorphisms",
    "PAIR_CLASSES",
]

PAIR_CLASSES = ("nn", "nnn", "nnnn")

TRIANGULAR7_RING = (1, 2, 5, 7, 6, 3)
TRIANGULAR7_CENTER = 4


def _pair(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class LatticeSpec:
    """Immutable description of a finite spin lattice.

    Attributes
    ----------
    n_sites : int
        Number of spin-1/2 sites.
    edges : frozenset of (int, int)
        Unordered nearest-neighbour bonds, stored as ``(i, j)`` with ``i < j``.
    ring_order : tuple of int
        Cyclic order of the border sites (empty for lattices without a ring).
    center : int or None
        The central site, which carries the field ``B2``.
    pair_class : mapping
        ``(i, j) -> 'nn' | 'nnn' | 'nnnn'`` for every unordered pair ``i < j``.
    """

    n_sites: int
    edges: frozenset
    ring_order: tuple = ()
    center: int | None = None
    pair_class: Mapping = field(default_factory=dict, compare=False)
    name: str = "custom"

    @property
    def sites(self) -> range:
        return range(1, self.n_sites + 1)

    @property
    def border(self) -> tuple[int, ...]:
        return tuple(s for s in self.sites if s != self.center)

    def neighbors(self, site: int) -> set[int]:
        self._check_site(site)
        out = set()
        for i, j in self.edges:
            if i == site:
                out.add(j)
            elif j == site:
                out.add(i)
        return out

    def degree(self, site: int) -> int:
        return len(self.neighbors(site))

    def classify(self, i: int, j: int) -> str:
        self._check_site(i)
        self._check_site(j)
        if i == j:
            raise ValueError("a pair needs two distinct sites")
        return self.pair_class[_pair(i, j)]

    def pairs(self) -> list[tuple[int, int]]:
        return list(itertools.combinations(self.sites, 2))

    def _check_site(self, site: int) -> None:
        if not 1 <= site <= self.n_sites:
            raise ValueError(f"site {site} outside 1..{self.n_sites}")


def _graph_distances(n_sites: int, edges: Iterable[tuple[int, int]]) -> np.ndarray:
    dist = np.full((n_sites + 1, n_sites + 1), np.inf)
    for s in range(1, n_sites + 1):
        dist[s, s] = 0
    for i, j in edges:
        dist[i, j] = dist[j, i] = 1
    # Floyd-Warshall; lattices here have a handful of sites
    for k in range(1, n_sites + 1):
        dist = np.minimum(dist, dist[:, [k]] + dist[[k], :])
    return dist


def _pair_classes(n_sites, edges, ring_order, center):
    classes = {}
    dist = _graph_distances(n_sites, edges)
    pos = {s: k for k, s in enumerate(ring_order)}
    m = len(ring_order)
    for i, j in itertools.combinations(range(1, n_sites + 1), 2):
        if (i, j) in edges:
            d = 1
        elif i in pos and j in pos:
            step = abs(pos[i] - pos[j])
            d = min(step, m - step)
        else:
            d = dist[i, j]
        if not np.isfinite(d):
            raise ValueError(f"sites {i} and {j} are disconnected")
        classes[(i, j)] = PAIR_CLASSES[min(int(d), 3) - 1]
    return classes


def build_lattice(
    n_sites: int,
    edges: Iterable[Sequence[int]],
    center: int | None = None,
    ring_order: Sequence[int] = (),
    name: str = "custom",
) -> LatticeSpec:
    """Build a lattice from an explicit edge list.

    Pair classes follow the ring distance for border pairs when a ring order
    is given, and the graph distance otherwise (capped at ``nnnn``).
    """
    if n_sites < 1:
        raise ValueError("n_sites must be positive")
    edge_set = set()
    for e in edges:
        i, j = (int(x) for x in e)
        if i == j:
            raise ValueError(f"self-loop on site {i}")
        for s in (i, j):
            if not 1 <= s <= n_sites:
                raise ValueError(f"edge {(i, j)} references site outside 1..{n_sites}")
        edge_set.add(_pair(i, j))
    if center is not None and not 1 <= center <= n_sites:
        raise ValueError(f"center {center} outside 1..{n_sites}")
    ring_order = tuple(int(s) for s in ring_order)
    edges_f = frozenset(edge_set)
    return LatticeSpec(
        n_sites=n_sites,
        edges=edges_f,
        ring_order=ring_order,
        center=center,
        pair_class=_pair_classes(n_sites, edges_f, ring_order, center),
        name=name,
    )


def build_triangular7() -> LatticeSpec:
    """Seven-site triangular flake: hexagonal ring plus central site 4."""
    ring = TRIANGULAR7_RING
    edges = [(ring[k], ring[(k + 1) % 6]) for k in range(6)]
    edges += [(TRIANGULAR7_CENTER, b) for b in ring]
    return build_lattice(7, edges, center=TRIANGULAR7_CENTER, ring_order=ring,
                         name="triangular7")


_PRESETS = {"triangular7": build_triangular7}


def lattice_preset(name: str) -> LatticeSpec:
    try:
        return _PRESETS[name]()
    except KeyError:
        raise ValueError(f"unknown lattice preset {name!r}; "
                         f"known: {sorted(_PRESETS)}") from None


@dataclass(frozen=True)
class FieldAssignment:
    """Per-site z-field strengths in units of omega (``h[0]`` is site 1)."""

    h: np.ndarray

    def __post_init__(self):
        h = np.array(self.h, dtype=float)
        h.setflags(write=False)
        object.__setattr__(self, "h", h)

    def __getitem__(self, site: int) -> float:
        return float(self.h[site - 1])

    def __len__(self) -> int:
        return len(self.h)

    def __eq__(self, other):
        return isinstance(other, FieldAssignment) and np.array_equal(self.h, other.h)

    def __hash__(self):
        return hash(self.h.tobytes())


def assign_fields(lattice: LatticeSpec, B1: float, B2: float) -> FieldAssignment:
    """Border sites get ``B1``, the central site gets ``B2``."""
    if B1 < 0 or B2 < 0:
        raise ValueError(f"field strengths must be non-negative, got ({B1}, {B2})")
    h = np.full(lattice.n_sites, float(B1))
    if lattice.center is not None:
        h[lattice.center - 1] = float(B2)
    return FieldAssignment(h)


def automorphisms(lattice: LatticeSpec, fields: FieldAssignment | None = None
                  ) -> list[tuple[int, ...]]:
    """All site permutations preserving the bond set (and the field layout).

    Each permutation is returned 0-based: ``perm[i]`` is the image of site
    ``i + 1`` minus one.  Brute force over ``N!`` candidates, so only meant
    for the small lattices this package handles.
    """
    n = lattice.n_sites
    if n > 9:
        raise ValueError("brute-force automorphism search limited to N <= 9")
    edges = {(i - 1, j - 1) for i, j in lattice.edges}
    h = None if fields is None else np.asarray(fields.h)
    out = []
    for perm in itertools.permutations(range(n)):
        if h is not None and not np.array_equal(h[list(perm)], h):
            continue
        if all(_pair(perm[i], perm[j]) in edges for i, j in edges):
            out.append(perm)
    return out
