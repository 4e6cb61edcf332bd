"""Attackable regions, exact transferability ratios, and Monte Carlo checks.

The attackable region of a model version is the set of true-"-" points the
version classifies "+": everything a targeted attack on class "+" can use.
The "-" domain is the union of two bands, {x <= -delta} and {0 <= x < delta},
cut to the strip |y| <= y_lim.  Within one band, membership in a region is
membership in a single half-plane, so every union or intersection of regions
reduces to convex half-plane clipping per band:

* union area  = band area - area of the intersection of complements,
* intersection area = area of the intersection of the "+" half-planes.

That keeps every transferability ratio exact; the Monte Carlo estimator
exists as an independent, sampling-based cross-check of those exact numbers.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, GeometryError, UndefinedEstimateError
from .geometry import ConvexPolygon, HalfPlane, halfplane_intersection, polygon_area, rectangle
from .separators import DecisionBoundary, ScenarioConfig

# Fixed Monte Carlo block size: workers may split the block index range
# anywhere and the merged counts are identical to a single sequential pass.
MC_BLOCK = 1 << 17

MODE_ENSEMBLE = "ensemble"
MODE_CAUTIOUS = "cautious"

_MIN_ACCEPTANCE = 1e-6


@dataclass(frozen=True, slots=True)
class AttackableRegion:
    """Misclassified "-" territory of one boundary, one convex piece per band."""

    scenario: ScenarioConfig
    source_boundary: DecisionBoundary
    pieces: tuple[ConvexPolygon, ...]
    guard: float


@dataclass(frozen=True, slots=True)
class TransferabilityScore:
    value: float
    defined: bool

    @classmethod
    def undefined(cls) -> "TransferabilityScore":
        return cls(float("nan"), False)

    @classmethod
    def of(cls, value: float) -> "TransferabilityScore":
        if value < -1e-9 or value > 1.0 + 1e-9:
            raise GeometryError(f"transferability ratio {value} outside [0, 1]")
        return cls(min(1.0, max(0.0, value)), True)


@dataclass(frozen=True, slots=True)
class AttackSampleConfig:
    """Attacker mode and sampling budget; n_samples = 0 selects exact scoring."""

    mode: str
    n_samples: int
    seed: int

    def __post_init__(self):
        if self.mode not in (MODE_ENSEMBLE, MODE_CAUTIOUS):
            raise DomainError(f"unknown attacker mode {self.mode!r}")
        if self.n_samples < 0:
            raise DomainError("n_samples must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must fit in 64 bits")


@dataclass(frozen=True, slots=True)
class MonteCarloEstimate:
    value: float
    half_width: float
    accepted: int
    n_samples: int


def plus_halfplane(boundary: DecisionBoundary) -> HalfPlane:
    """The "+" side of a boundary as a closed half-plane."""
    ps = boundary.plus_sign
    if boundary.kind == "sloped":
        return HalfPlane(ps * boundary.k, -ps, -ps * boundary.b)
    return HalfPlane(-ps, 0.0, -ps * boundary.x0)


def minus_halfplane(boundary: DecisionBoundary) -> HalfPlane:
    """The "-" side (closed complement of :func:`plus_halfplane`)."""
    ps = boundary.plus_sign
    if boundary.kind == "sloped":
        return HalfPlane(-ps * boundary.k, ps, ps * boundary.b)
    return HalfPlane(ps, 0.0, ps * boundary.x0)


def guard_extent(scenario: ScenarioConfig, boundary: DecisionBoundary) -> float:
    """Left clipping depth G for the conceptually unbounded band {x <= -delta}.

    Every valid separator yields a bounded region well inside x >= -G; a
    region vertex landing on the guard is converted into a loud error.
    """
    c = scenario.c
    if boundary.kind == "sloped":
        return max(2.0 * c, (abs(boundary.b) + scenario.y_lim) / abs(boundary.k) + c)
    return max(2.0 * c, abs(boundary.x0) + c)


def band_rectangles(scenario: ScenarioConfig, guard: float) -> tuple[ConvexPolygon, ConvexPolygon]:
    """The two "-" bands cut to the strip and bounded on the left by the guard."""
    y = scenario.y_lim
    left = rectangle(-guard, -scenario.delta, -y, y)
    sliver = rectangle(0.0, scenario.delta, -y, y)
    return left, sliver


def build_attackable_region(scenario: ScenarioConfig, boundary: DecisionBoundary) -> AttackableRegion:
    """Exact attackable region of one boundary as convex pieces, one per band."""
    guard = guard_extent(scenario, boundary)
    plus = plus_halfplane(boundary)
    pieces = []
    for band in band_rectangles(scenario, guard):
        piece = halfplane_intersection([plus], band)
        for vert in piece.vertices:
            if vert.x <= -guard + 1e-9 * max(1.0, guard):
                raise GeometryError("attackable region reached the left guard; invalid separator")
        pieces.append(piece)
    return AttackableRegion(scenario, boundary, tuple(pieces), guard)


def region_area(region: AttackableRegion) -> float:
    return sum(polygon_area(p) for p in region.pieces)


def closed_form_ar_area(scenario: ScenarioConfig, k: float, b: float) -> float:
    """Area of the attackable region of y = k*x - b as triangle plus trapezoid.

    Valid for k > 0 and 0 < b <= y_lim - k*delta (at the upper end the
    triangle term vanishes continuously).  Must match the polygon route to
    1e-9 relative; callers outside this parameter range use the polygons.
    """
    d, y = scenario.delta, scenario.y_lim
    if k <= 0.0:
        raise DomainError("closed form requires k > 0")
    if not 0.0 < b <= y - k * d:
        raise DomainError(f"closed form requires 0 < b <= y_lim - k*delta = {y - k * d}")
    return (y - k * d - b) ** 2 / (2.0 * k) + d * (y - b + k * d / 2.0)


def _require_same_scenario(*regions: AttackableRegion) -> ScenarioConfig:
    scenario = regions[0].scenario
    for r in regions[1:]:
        if r.scenario != scenario:
            raise DomainError("regions built under different scenarios")
    return scenario


def directional_transferability(
    ar1: AttackableRegion, ar2: AttackableRegion
) -> TransferabilityScore:
    """Overlap of ar2 with ar1, relative to ar1: S(ar1 n ar2) / S(ar1)."""
    _require_same_scenario(ar1, ar2)
    denom = region_area(ar1)
    if denom == 0.0:
        return TransferabilityScore.undefined()
    plus2 = plus_halfplane(ar2.source_boundary)
    numer = sum(polygon_area(halfplane_intersection([plus2], piece)) for piece in ar1.pieces)
    return TransferabilityScore.of(numer / denom)


def _union_and_target_areas(
    priors: list[AttackableRegion], target: AttackableRegion | None
) -> tuple[float, float]:
    """(area of union of priors, area of target n union), both exact."""
    extra = [target] if target is not None else []
    scenario = _require_same_scenario(*priors, *extra)
    guard = max(r.guard for r in priors + extra)
    complements = [minus_halfplane(r.source_boundary) for r in priors]
    union_total = 0.0
    inter_total = 0.0
    for band in band_rectangles(scenario, guard):
        band_area = polygon_area(band)
        union_total += band_area - polygon_area(halfplane_intersection(complements, band))
        if target is not None:
            plus_t = [plus_halfplane(target.source_boundary)]
            t_area = polygon_area(halfplane_intersection(plus_t, band))
            t_outside = polygon_area(halfplane_intersection(plus_t + complements, band))
            inter_total += t_area - t_outside
    return union_total, inter_total


def compound_transferability(
    priors: list[AttackableRegion], target: AttackableRegion
) -> TransferabilityScore:
    """S(target n union of priors) / S(union of priors), exactly."""
    if not priors:
        raise DomainError("compound transferability requires at least one prior region")
    union_total, inter_total = _union_and_target_areas(list(priors), target)
    if union_total == 0.0:
        return TransferabilityScore.undefined()
    return TransferabilityScore.of(inter_total / union_total)


def cautious_transferability(
    priors: list[AttackableRegion], target: AttackableRegion
) -> TransferabilityScore:
    """S(target n intersection of priors) / S(intersection of priors)."""
    if not priors:
        raise DomainError("cautious transferability requires at least one prior region")
    scenario = _require_same_scenario(*priors, target)
    guard = max([r.guard for r in priors] + [target.guard])
    plus_priors = [plus_halfplane(r.source_boundary) for r in priors]
    plus_t = plus_halfplane(target.source_boundary)
    denom = 0.0
    numer = 0.0
    for band in band_rectangles(scenario, guard):
        core = halfplane_intersection(plus_priors, band)
        denom += polygon_area(core)
        numer += polygon_area(halfplane_intersection([plus_t], core))
    if denom == 0.0:
        return TransferabilityScore.undefined()
    return TransferabilityScore.of(numer / denom)


def union_area(priors: list[AttackableRegion]) -> float:
    """Exact area of the union of attackable regions."""
    if not priors:
        return 0.0
    area, _ = _union_and_target_areas(list(priors), None)
    return area


def check_zero_transfer(
    bd1: DecisionBoundary, bd2: DecisionBoundary, scenario: ScenarioConfig
) -> bool:
    """Slope-sign/crossing test guaranteeing zero directional transferability.

    True when the slopes have opposite signs and the boundaries intersect at
    x_I >= delta; whenever true, both exact directional scores are zero (the
    crossing at equality contributes only a measure-zero seam).
    """
    if bd1.kind != "sloped" or bd2.kind != "sloped":
        raise DomainError("zero-transfer test applies to sloped boundaries only")
    if bd1.k * bd2.k >= 0.0:
        return False
    x_i = (bd2.b - bd1.b) / (bd1.k - bd2.k)
    return x_i >= scenario.delta


def mc_block_counts(
    scenario: ScenarioConfig,
    priors: list[DecisionBoundary],
    target: DecisionBoundary,
    cfg: AttackSampleConfig,
    block_start: int,
    block_stop: int,
) -> tuple[int, int]:
    """(accepted, hits) over a contiguous range of sampling blocks.

    Block j draws its points from a Philox stream keyed (seed, j), so any
    partition of the block range across workers merges to exactly the counts
    of a single sequential pass.
    """
    guard = max(guard_extent(scenario, b) for b in list(priors) + [target])
    d, y = scenario.delta, scenario.y_lim
    area_left = (guard - d) * 2.0 * y
    area_sliver = d * 2.0 * y
    p_sliver = area_sliver / (area_left + area_sliver)

    accepted = 0
    hits = 0
    for j in range(block_start, block_stop):
        m = min(MC_BLOCK, cfg.n_samples - j * MC_BLOCK)
        if m <= 0:
            break
        rng = np.random.Generator(np.random.Philox(key=np.array([cfg.seed, j], dtype=np.uint64)))
        u = rng.random((m, 2))
        m_sliver = int(round(m * p_sliver))
        x = np.empty(m)
        x[:m_sliver] = u[:m_sliver, 0] * d
        x[m_sliver:] = -guard + u[m_sliver:, 0] * (guard - d)
        yv = -y + u[:, 1] * (2.0 * y)
        prior_hits = np.stack([b.signed_value(x, yv) >= 0.0 for b in priors])
        mask = prior_hits.any(axis=0) if cfg.mode == MODE_ENSEMBLE else prior_hits.all(axis=0)
        accepted += int(mask.sum())
        hits += int((mask & (target.signed_value(x, yv) >= 0.0)).sum())
    return accepted, hits


def mc_transferability(
    scenario: ScenarioConfig,
    priors: list[DecisionBoundary],
    target: DecisionBoundary,
    cfg: AttackSampleConfig,
) -> MonteCarloEstimate:
    """Sampled transferability with a 95% binomial interval half-width.

    Uniform points over the two "-" bands (stratified proportionally to band
    area) are filtered by the attacker mode: ensemble keeps points inside at
    least one prior region, cautious keeps points inside all of them.  The
    estimate is the kept fraction the target classifies "+".
    """
    if not priors:
        raise DomainError("Monte Carlo transferability requires at least one prior")
    if cfg.n_samples < 1:
        raise DomainError("Monte Carlo transferability requires n_samples >= 1")
    n_blocks = -(-cfg.n_samples // MC_BLOCK)
    accepted, hits = mc_block_counts(scenario, priors, target, cfg, 0, n_blocks)
    if accepted < max(1.0, _MIN_ACCEPTANCE * cfg.n_samples):
        raise UndefinedEstimateError(
            f"only {accepted} of {cfg.n_samples} samples satisfied the attacker mode"
        )
    value = hits / accepted
    half_width = 1.96 * math.sqrt(value * (1.0 - value) / accepted)
    return MonteCarloEstimate(value, half_width, accepted, cfg.n_samples)
