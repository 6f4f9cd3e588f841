"""Aztec diamond domino tilings as a non-Hermitian projection DPP.

The order-n diamond is the cell set {(x, y) : |x - 1/2| + |y - 1/2| <= n}.
Cells are checkerboard colored by the parity of x + y + n; domino positions
(edges of the bipartite cell graph) carry Kasteleyn weight 1 (horizontal) or
i (vertical).  Kenyon's local-statistics formula turns the inverse Kasteleyn
matrix into the edge marginal kernel

    K[e, e'] = Kast(b_e, w_e) * Kast^{-1}(w_e, b_{e'}),

a non-Hermitian projection of rank n(n+1) with real diagonal, sampled by the
hybrid projection sampler.  Vertical dominoes are labeled W/E and horizontal
ones S/N by anchor-cell parity; the W/E/S line segments stitch into the n DR
paths.  The top path alone can be sampled partially: observe only the
candidate dominoes that extend the path, keeping O(n)-sized working state.
"""

import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import MalformedTiling, NumericalBreakdown, SingularKasteleyn
from .samplers import IncrementalObserver, sample_nonherm_proj


@dataclass(frozen=True, order=True)
class Domino:
    """A domino position, anchored at its left (horizontal) or bottom cell."""

    x: int
    y: int
    horizontal: bool

    @property
    def cells(self):
        if self.horizontal:
            return (self.x, self.y), (self.x + 1, self.y)
        return (self.x, self.y), (self.x, self.y + 1)


class AztecGraph:
    """Cells, domino positions, and the Kasteleyn matrix of an order-n diamond."""

    def __init__(self, n):
        if n < 1:
            raise ValueError("diamond order must be >= 1")
        self.n = int(n)
        self.cells = [
            (x, y)
            for y in range(1 - n, n + 1)
            for x in range(1 - n, n + 1)
            if self.in_region(x, y)
        ]
        self.edges = []
        for (x, y) in self.cells:
            if self.in_region(x + 1, y):
                self.edges.append(Domino(x, y, True))
            if self.in_region(x, y + 1):
                self.edges.append(Domino(x, y, False))
        self.edges.sort()
        self.edge_index = {e: i for i, e in enumerate(self.edges)}
        blacks = [c for c in self.cells if self.parity(*c)]
        whites = [c for c in self.cells if not self.parity(*c)]
        self._black_index = {c: i for i, c in enumerate(blacks)}
        self._white_index = {c: i for i, c in enumerate(whites)}

    def in_region(self, x, y):
        return abs(2 * x - 1) + abs(2 * y - 1) <= 2 * self.n

    def parity(self, x, y):
        """1 on the checkerboard class containing the westmost corner cells."""
        return (x + y + self.n) % 2

    def label(self, edge):
        """Domino label: vertical -> W/E, horizontal -> S/N by anchor parity."""
        odd = self.parity(edge.x, edge.y)
        if edge.horizontal:
            return "S" if odd else "N"
        return "W" if odd else "E"

    def edge_color_cells(self, edge):
        """(black cell, white cell) of a domino position."""
        c0, c1 = edge.cells
        return (c0, c1) if self.parity(*c0) else (c1, c0)

    def kasteleyn(self):
        """Weighted bipartite adjacency: rows black cells, columns white cells."""
        nb = len(self._black_index)
        k = np.zeros((nb, nb), dtype=complex)
        for e in self.edges:
            b, w = self.edge_color_cells(e)
            k[self._black_index[b], self._white_index[w]] = 1.0 if e.horizontal else 1j
        return k

    def kernel_parts(self):
        """(weights, white row indices, black column indices, inverse Kasteleyn)."""
        kast = self.kasteleyn()
        try:
            kinv = scipy.linalg.inv(kast, check_finite=False)
        except scipy.linalg.LinAlgError as exc:  # pragma: no cover - assertion
            raise SingularKasteleyn(str(exc)) from exc
        weights = np.array(
            [1.0 if e.horizontal else 1j for e in self.edges], dtype=complex
        )
        wrow = np.array(
            [self._white_index[self.edge_color_cells(e)[1]] for e in self.edges]
        )
        bcol = np.array(
            [self._black_index[self.edge_color_cells(e)[0]] for e in self.edges]
        )
        return weights, wrow, bcol, kinv


def build_kernel(n):
    """Edge-indexed marginal kernel of the uniform order-n tiling measure."""
    graph = AztecGraph(n)
    weights, wrow, bcol, kinv = graph.kernel_parts()
    kernel = weights[:, None] * kinv[np.ix_(wrow, bcol)]
    diag = np.diagonal(kernel)
    if np.abs(diag.imag).max() > 1e-10:
        raise SingularKasteleyn("kernel diagonal is not real")
    if float(np.trace(kernel).real) - n * (n + 1) > 1e-8 * n * (n + 1):
        raise SingularKasteleyn("kernel trace does not match n(n+1)")
    return kernel


@dataclass(frozen=True)
class Tiling:
    """A sampled tiling: domino positions with their N/S/E/W labels."""

    n: int
    dominoes: tuple
    labels: tuple

    def __post_init__(self):
        covered = {}
        for d in self.dominoes:
            for c in d.cells:
                if c in covered:
                    raise NumericalBreakdown(f"cell {c} covered twice")
                covered[c] = d
        if len(covered) != 2 * self.n * (self.n + 1):
            raise NumericalBreakdown(
                f"{len(covered)} cells covered, expected {2 * self.n * (self.n + 1)}"
            )


def sample_tiling(n, rng):
    """Draw a uniform tiling of the order-n diamond via the hybrid sampler."""
    graph = AztecGraph(n)
    kernel = build_kernel(n)
    chosen = sample_nonherm_proj(kernel, rng)
    dominoes = tuple(graph.edges[i] for i in chosen)
    labels = tuple(graph.label(d) for d in dominoes)
    return Tiling(n=n, dominoes=dominoes, labels=labels)


@dataclass(frozen=True)
class DRPath:
    """Lattice path: per-segment kinds and the visited points.

    Points use doubled y so that half-integer heights stay exact integers:
    (x, y2) stands for the geometric point (x, y2 / 2).
    """

    kinds: tuple
    points: tuple

    @property
    def start(self):
        return self.points[0]

    @property
    def end(self):
        return self.points[-1]


_SEGMENT_STEPS = {"flat": (2, 0), "rise": (1, 2), "fall": (1, -2)}


def _segment(kind, start):
    dx, dy2 = _SEGMENT_STEPS[kind]
    return (start[0] + dx, start[1] + dy2)


def _domino_segment(label, d):
    """(kind, start point) of the path segment through a W/E/S domino."""
    if label == "S":
        return "flat", (d.x, 2 * d.y + 1)
    if label == "W":
        return "rise", (d.x, 2 * d.y + 1)
    if label == "E":
        return "fall", (d.x, 2 * d.y + 3)
    raise ValueError("N dominoes carry no path segment")


def classify_and_extract_paths(tiling):
    """Stitch the W/E/S segments of a tiling into its n DR paths (top first)."""
    n = tiling.n
    by_start = {}
    segment_count = 0
    for d, label in zip(tiling.dominoes, tiling.labels):
        if label == "N":
            continue
        kind, start = _domino_segment(label, d)
        if start in by_start:
            raise MalformedTiling(f"two segments start at {start}")
        by_start[start] = kind
        segment_count += 1
    paths = []
    used = 0
    for row in range(0, -n, -1):
        point = (1 - n - row, 2 * row + 1)
        goal = (n + 1 + row, 2 * row + 1)
        kinds = []
        points = [point]
        while point != goal:
            kind = by_start.pop(point, None)
            if kind is None:
                raise MalformedTiling(f"path starting at row {row} breaks at {point}")
            kinds.append(kind)
            point = _segment(kind, point)
            points.append(point)
            used += 1
        paths.append(DRPath(kinds=tuple(kinds), points=tuple(points)))
    if used != segment_count:
        raise MalformedTiling("W/E/S dominoes left over after stitching")
    return paths


def sample_top_dr_path(n, rng):
    """Sample the top DR path without sampling the rest of the tiling.

    Walks from the westmost corner, observing only the (W, E, S) candidate
    dominoes that extend the current path; rejected candidates condition the
    kernel through the exclusion branch.  Working state stays O(n).
    """
    graph = AztecGraph(n)
    weights, wrow, bcol, kinv = graph.kernel_parts()

    def entry(i, j):
        return weights[i] * kinv[wrow[i], bcol[j]]

    observer = IncrementalObserver(entry, rng, dtype=complex)
    x, y2 = 1 - n, 1
    kinds = []
    points = [(x, y2)]
    while x < n + 1:
        y = (y2 - 1) // 2
        candidates = []
        up = Domino(x, y, False)
        if graph.in_region(x, y + 1):
            candidates.append(("rise", up))
        down = Domino(x, y - 1, False)
        if graph.in_region(x, y - 1):
            candidates.append(("fall", down))
        flat = Domino(x, y, True)
        if graph.in_region(x + 1, y):
            candidates.append(("flat", flat))
        for kind, d in candidates:
            if observer.observe(graph.edge_index[d]):
                x, y2 = _segment(kind, (x, y2))
                kinds.append(kind)
                points.append((x, y2))
                break
        else:
            raise MalformedTiling(f"no candidate domino extends the path at {(x, y2)}")
    if (x, y2) != (n + 1, 1):
        raise MalformedTiling(f"top path ended at {(x, y2)}")
    return DRPath(kinds=tuple(kinds), points=tuple(points))


def tiling_to_text(tiling):
    """One domino per line: `x y <h|v> <N|S|E|W>` under an `aztec n=` header."""
    lines = [f"aztec n={tiling.n}"]
    order = sorted(zip(tiling.dominoes, tiling.labels))
    for d, label in order:
        lines.append(f"{d.x} {d.y} {'h' if d.horizontal else 'v'} {label}")
    return "\n".join(lines) + "\n"


def tiling_from_text(text):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head = lines[0].split()
    if head[0] != "aztec" or not head[1].startswith("n="):
        raise ValueError("not a tiling file")
    n = int(head[1][2:])
    dominoes = []
    labels = []
    for ln in lines[1:]:
        xs, ys, orient, label = ln.split()
        dominoes.append(Domino(int(xs), int(ys), orient == "h"))
        labels.append(label)
    return Tiling(n=n, dominoes=tuple(dominoes), labels=tuple(labels))


def tiling_to_json(tiling):
    order = sorted(zip(tiling.dominoes, tiling.labels))
    return json.dumps(
        {
            "n": tiling.n,
            "dominoes": [
                {
                    "x": d.x,
                    "y": d.y,
                    "orient": "h" if d.horizontal else "v",
                    "label": label,
                }
                for d, label in order
            ],
        },
        indent=None,
        separators=(",", ":"),
    )


def path_to_json(path):
    """JSON array of segments with half-integer lattice coordinates."""
    segments = []
    for kind, start, end in zip(path.kinds, path.points, path.points[1:]):
        segments.append(
            {
                "kind": kind,
                "from": [start[0], start[1] / 2.0],
                "to": [end[0], end[1] / 2.0],
            }
        )
    return json.dumps(segments, indent=None, separators=(",", ":"))
