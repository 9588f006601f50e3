"""Granular-ball evolution over a pair of luminance planes.

Every pixel coordinate carries a two-element meta granular ball, the
pair of luminances (L_A, L_B) at that coordinate.  A single granular
ball (mu, r), an interval [mu - r, mu + r] on the 0..255 luminance
axis, is evolved across the whole axis by sliding, expanding and
splitting; each meta ball is eventually labelled either separable (POS,
the two elements end up distinguishable at the recorded scale) or
indistinguishable (BND).  Assignments are grouped into decision
domains, each homogeneous in label, which partition the universe.

The evolution itself runs in a compiled kernel when available and in a
NumPy fallback otherwise; both produce identical bits.  Meta balls are
deduplicated by their (L_A, L_B) value pair before the walk since the
trajectory depends only on values, never on coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _evolve_py
from .imaging import ImagePair

try:
    from . import _evolve_cy
    _kernel = _evolve_cy
    BACKEND = "compiled"
except ImportError:
    _kernel = _evolve_py
    BACKEND = "numpy"

BND = _evolve_py.BND
POS = _evolve_py.POS

__all__ = [
    "BACKEND",
    "BND",
    "POS",
    "EngineConfig",
    "GranularBall",
    "MetaGranularBall",
    "Universe",
    "DomainAssignment",
    "build_universe",
    "evolve",
    "fine_equivalent",
    "coarse_equivalent",
]


@dataclass(frozen=True)
class EngineConfig:
    """Evolution parameters: expansion step delta_d and split factor k.

    The ball splits once its radius reaches k * delta_d.  Defaults are
    the published operating point.
    """

    delta_d: float = 10.0
    k: int = 6

    def __post_init__(self):
        if not self.delta_d > 0:
            raise ValueError(f"delta_d must be > 0, got {self.delta_d}")
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be an integer >= 1, got {self.k}")


@dataclass(frozen=True)
class GranularBall:
    """A ball on the luminance axis: center mu, radius r, iteration t."""

    mu: float
    r: float
    t: int = 0

    @property
    def interval(self) -> tuple[float, float]:
        return (self.mu - self.r, self.mu + self.r)


@dataclass(frozen=True)
class MetaGranularBall:
    """One distinct (L_A, L_B) value pair and the coordinates sharing it."""

    l_a: int
    l_b: int
    coords: np.ndarray  # (n, 2) int array of (x, y)


class Universe:
    """All meta granular balls of a pair, deduplicated by value pair.

    Attributes
    ----------
    pair_la, pair_lb : int16 arrays, one entry per distinct (L_A, L_B).
    counts : pixel multiplicity of each distinct pair.
    inverse : int array of shape (height, width) mapping each pixel to
        its ball index.
    """

    def __init__(self, pair_la, pair_lb, counts, inverse, shape):
        self.pair_la = pair_la
        self.pair_lb = pair_lb
        self.counts = counts
        self.inverse = inverse
        self.height, self.width = shape
        self.n_balls = pair_la.shape[0]
        self.n_pixels = int(self.height) * int(self.width)
        # Residual set at the start of evolution: every ball.
        self.residual = np.arange(self.n_balls, dtype=np.intp)

    def meta_balls(self) -> list[MetaGranularBall]:
        """Materialize the meta balls with their coordinate lists."""
        order = np.argsort(self.inverse.ravel(), kind="stable")
        ys, xs = np.divmod(order, self.width)
        balls = []
        start = 0
        for b in range(self.n_balls):
            stop = start + int(self.counts[b])
            coords = np.stack([xs[start:stop], ys[start:stop]], axis=1)
            balls.append(MetaGranularBall(int(self.pair_la[b]),
                                          int(self.pair_lb[b]), coords))
            start = stop
        return balls


def build_universe(pair: ImagePair) -> Universe:
    """Group a pair's pixels into meta granular balls by (L_A, L_B)."""
    la = pair.a.data
    lb = pair.b.data
    if la.size == 0:
        raise ValueError("cannot build a universe from an empty image")
    code = la.astype(np.int32) * 256 + lb.astype(np.int32)
    values, inverse, counts = np.unique(code.ravel(), return_inverse=True,
                                        return_counts=True)
    pair_la = (values // 256).astype(np.int16)
    pair_lb = (values % 256).astype(np.int16)
    return Universe(pair_la, pair_lb, counts,
                    inverse.reshape(la.shape).astype(np.intp), la.shape)


class DomainAssignment:
    """Evolution output: label, recorded ball scale and decision domain.

    Per-ball arrays follow the universe's ball order; per-pixel views
    are materialized through the universe's inverse map.  Domains
    partition the universe and each domain is label-homogeneous.
    """

    def __init__(self, universe: Universe, labels, mu, r, domain, n_domains,
                 config: EngineConfig, trace=None):
        self.universe = universe
        self.ball_labels = labels
        self.ball_mu = mu
        self.ball_r = r
        self.ball_domain = domain
        self.n_domains = int(n_domains)
        self.config = config
        self.trace = trace
        self.height = universe.height
        self.width = universe.width

    @property
    def label_map(self) -> np.ndarray:
        """Per-pixel labels, POS (1) or BND (0), shape (height, width)."""
        return self.ball_labels[self.universe.inverse]

    @property
    def domain_map(self) -> np.ndarray:
        return self.ball_domain[self.universe.inverse]

    @property
    def mu_map(self) -> np.ndarray:
        return self.ball_mu[self.universe.inverse]

    @property
    def r_map(self) -> np.ndarray:
        return self.ball_r[self.universe.inverse]

    def _ball_at(self, p) -> int:
        x, y = p
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise IndexError(f"pixel {p!r} outside {self.width}x{self.height}")
        return int(self.universe.inverse[y, x])

    def label_at(self, p) -> int:
        return int(self.ball_labels[self._ball_at(p)])

    def domain_at(self, p) -> int:
        return int(self.ball_domain[self._ball_at(p)])

    def scale_at(self, p) -> GranularBall:
        b = self._ball_at(p)
        return GranularBall(float(self.ball_mu[b]), float(self.ball_r[b]))


def evolve(universe: Universe, config: EngineConfig | None = None,
           collect_trace: bool = False) -> DomainAssignment:
    """Run the evolution until every meta ball is labelled.

    With `collect_trace` the per-iteration event log (slide, expand,
    split, flush) is attached to the result as `.trace`.
    """
    if config is None:
        config = EngineConfig()
    if universe.n_balls == 0:
        raise ValueError("cannot evolve an empty universe")
    lo = np.minimum(universe.pair_la, universe.pair_lb).astype(np.float64)
    hi = np.maximum(universe.pair_la, universe.pair_lb).astype(np.float64)
    trace = [] if collect_trace else None
    labels, mu, r, domain, n_domains = _kernel.evolve_arrays(
        lo, hi, float(config.delta_d), int(config.k), trace)
    if (domain < 0).any():
        raise AssertionError("evolution left unassigned meta balls")
    return DomainAssignment(universe, labels, mu, r, domain, n_domains,
                            config, trace)


def fine_equivalent(p, q, assignment: DomainAssignment) -> bool:
    """True when two pixels landed in the same decision domain."""
    return assignment.domain_at(p) == assignment.domain_at(q)


def coarse_equivalent(p, q, assignment: DomainAssignment) -> bool:
    """True when two pixels carry the same POS/BND label.

    Fine equivalence implies coarse equivalence: domains are
    label-homogeneous by construction.
    """
    return assignment.label_at(p) == assignment.label_at(q)
