"""Monte Carlo logical error rates, pseudo-thresholds and thresholds."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .decoder import get_decoder
from .lattice import Distances, SurfaceCode, build_code
from .noise import (
    GENERATOR_NAME,
    ChannelParams,
    RngSeed,
    format_delta,
    kappa_to_p,
    make_channel,
    make_pure_channel,
    p_to_kappa,
    parse_delta,
    sample_errors,
)

log = logging.getLogger(__name__)

KAPPA_MIN = 1e-4
KAPPA_MAX = 5.5e-2
# Curve-family crossings sit at p ~ 0.25-0.5, beyond the default grid (p <= 0.364).
THRESHOLD_KAPPA_MIN = 2e-2
THRESHOLD_KAPPA_MAX = 1.2e-1
DEFAULT_POINTS = 25
DEFAULT_TRIALS = 50_000
CHUNK = 10_000  # trials per work unit; fixed so results do not depend on worker count
REFINE_STREAM = 1_000_000
FIT_WINDOW = 3  # grid points per side in curve-pair crossing fits
CROSSING_RESAMPLES = 200  # parametric bootstrap draws per curve-pair crossing


class NoCrossingError(RuntimeError):
    pass


@dataclass(frozen=True)
class SweepPoint:
    kappa: float
    p: float
    trials: int
    x_failures: int
    z_failures: int
    any_failures: int
    counted: str = "any"  # which failures define p_logical: "x", "z" or "any"

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 <= self.any_failures <= min(self.trials, self.x_failures + self.z_failures):
            raise ValueError("inconsistent failure counts")
        if max(self.x_failures, self.z_failures) > self.trials:
            raise ValueError("more failures than trials")

    @property
    def failures(self) -> int:
        return {"x": self.x_failures, "z": self.z_failures}.get(self.counted, self.any_failures)

    @property
    def p_logical(self) -> float:
        return self.failures / self.trials

    @property
    def stderr(self) -> float:
        q = self.p_logical
        return math.sqrt(q * (1 - q) / self.trials)

    def wilson(self, z: float = 1.96) -> tuple[float, float]:
        n, q = self.trials, self.p_logical
        denom = 1 + z * z / n
        centre = (q + z * z / (2 * n)) / denom
        half = z * math.sqrt(q * (1 - q) / n + z * z / (4 * n * n)) / denom
        return max(0.0, centre - half), min(1.0, centre + half)


@dataclass(frozen=True)
class ChannelSpec:
    """Channel family of a sweep: a bias for the biased channel, or a pure kind."""

    delta: float = 1.0
    kind: str = "biased"  # "biased", "x_only" or "z_only"

    def at(self, p: float) -> ChannelParams:
        if self.kind == "biased":
            return make_channel(p, self.delta)
        return make_pure_channel(p, self.kind)

    @property
    def label(self) -> str:
        return self.kind if self.kind != "biased" else f"delta={format_delta(self.delta)}"

    @property
    def counted(self) -> str:
        if self.kind == "x_only":
            return "x"
        if self.kind == "z_only" or math.isinf(self.delta):
            return "z"
        return "any"


@dataclass(frozen=True)
class SweepResult:
    d_x: int
    d_z: int
    channel: ChannelSpec
    points: tuple[SweepPoint, ...]
    master_seed: int
    trials: int
    generator: str = GENERATOR_NAME
    failure_rule: str = "any logical failure (x or z); pure channels count their own species"

    @property
    def code(self) -> SurfaceCode:
        return build_code(self.d_x, self.d_z)

    @property
    def kappas(self) -> np.ndarray:
        return np.array([pt.kappa for pt in self.points])

    @property
    def ps(self) -> np.ndarray:
        return np.array([pt.p for pt in self.points])

    @property
    def p_logical(self) -> np.ndarray:
        return np.array([pt.p_logical for pt in self.points])

    @property
    def stderr(self) -> np.ndarray:
        return np.array([pt.stderr for pt in self.points])

    @property
    def label(self) -> str:
        return f"[{self.d_x},{self.d_z}] {self.channel.label}"

    def metadata(self) -> dict:
        return {
            "dx": self.d_x,
            "dz": self.d_z,
            "delta": format_delta(self.channel.delta),
            "channel": self.channel.kind,
            "seed": self.master_seed,
            "trials": self.trials,
            "kappa_grid": [pt.kappa for pt in self.points],
            "generator": self.generator,
            "failure_rule": self.failure_rule,
        }

    def to_dict(self) -> dict:
        return {
            "metadata": self.metadata(),
            "points": [dict(asdict(pt), p_logical=pt.p_logical, stderr=pt.stderr) for pt in self.points],
        }

    @classmethod
    def from_dict(cls, d: dict) -> SweepResult:
        meta = d["metadata"]
        keys = ("kappa", "p", "trials", "x_failures", "z_failures", "any_failures", "counted")
        points = tuple(SweepPoint(**{k: pt[k] for k in keys}) for pt in d["points"])
        return cls(
            int(meta["dx"]),
            int(meta["dz"]),
            ChannelSpec(parse_delta(meta["delta"]), meta.get("channel", "biased")),
            points,
            int(meta["seed"]),
            int(meta["trials"]),
            meta.get("generator", GENERATOR_NAME),
            meta.get("failure_rule", cls.failure_rule),
        )


def default_kappa_grid(kappa_min: float = KAPPA_MIN, kappa_max: float = KAPPA_MAX, points: int = DEFAULT_POINTS) -> np.ndarray:
    if points < 1:
        raise ValueError("grid needs at least one point")
    if not 0 < kappa_min <= kappa_max <= 1:
        raise ValueError(f"need 0 < kappa_min <= kappa_max <= 1, got {kappa_min}, {kappa_max}")
    if points == 1:
        return np.array([kappa_min])
    if kappa_min == kappa_max:
        raise ValueError("a multi-point grid needs kappa_min < kappa_max")
    return np.geomspace(kappa_min, kappa_max, points)


def _count_chunk(args) -> tuple[int, int, int]:
    dist, ch, seed, start, stop = args
    code = build_code(dist)
    x_fail, z_fail = get_decoder(code).failures(*sample_errors(code, ch, seed, start, stop))
    return int(x_fail.sum()), int(z_fail.sum()), int((x_fail | z_fail).sum())


def count_failures(
    code: SurfaceCode, ch: ChannelParams, trials: int, seed: RngSeed, workers: int = 1
) -> tuple[int, int, int]:
    """(x, z, any) failure counts over trials ``0..trials-1``."""
    jobs = [(code.distances, ch, seed, a, min(a + CHUNK, trials)) for a in range(0, trials, CHUNK)]
    if workers == 1 or len(jobs) == 1:
        parts = map(_count_chunk, jobs)
        return tuple(int(v) for v in np.sum(list(parts), axis=0))
    with ProcessPoolExecutor(max_workers=workers or None) as pool:
        parts = list(pool.map(_count_chunk, jobs))
    return tuple(int(v) for v in np.sum(parts, axis=0))


def estimate_logical_rate(
    code: SurfaceCode, ch: ChannelParams, trials: int, seed: RngSeed, workers: int = 1
) -> SweepPoint:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    x, z, anyf = count_failures(code, ch, trials, seed, workers)
    return SweepPoint(p_to_kappa(ch.p), ch.p, trials, x, z, anyf, ch.counted_failures)


def _point_at_kappa(code, channel: ChannelSpec, kappa: float, trials: int, seed: RngSeed, workers: int) -> SweepPoint:
    p = kappa_to_p(float(kappa))
    pt = estimate_logical_rate(code, channel.at(p), trials, seed, workers)
    return SweepPoint(float(kappa), p, pt.trials, pt.x_failures, pt.z_failures, pt.any_failures, channel.counted)


def sweep_curve(
    code: SurfaceCode,
    channel: ChannelSpec | float | str,
    kappa_grid,
    trials: int,
    seed: int | RngSeed,
    workers: int = 1,
) -> SweepResult:
    """One point per kappa; point ``i`` draws from sub-stream ``(i,)`` of the seed."""
    if not isinstance(channel, ChannelSpec):
        channel = ChannelSpec(parse_delta(channel))
    seed = seed if isinstance(seed, RngSeed) else RngSeed(int(seed))
    grid = [float(k) for k in np.atleast_1d(kappa_grid)]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("kappa grid must be strictly increasing")
    points = []
    for i, kappa in enumerate(grid):
        points.append(_point_at_kappa(code, channel, kappa, trials, seed.child(i), workers))
        log.debug("%s kappa=%.3g P_L=%.4g", code, kappa, points[-1].p_logical)
    return SweepResult(code.d_x, code.d_z, channel, tuple(points), seed.master_seed, trials)


# --- crossing extraction -------------------------------------------------


@dataclass(frozen=True)
class Crossing:
    value: float
    stderr: float
    bracket: tuple[float, float]


def _log_rate(q: np.ndarray, se: np.ndarray, trials: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    with np.errstate(divide="ignore", invalid="ignore"):
        f = np.log(q)
        s = np.maximum(se, 0.5 / trials) / q
    return f, s


def _change_point(f: np.ndarray, sf: np.ndarray, orientation: int | None) -> tuple[int, int]:
    """Split index ``s`` (crossing between ``s-1`` and ``s``) and orientation.

    The split maximises the signed z-score sum ``o * (after - before)``, so an
    isolated noisy sign flip far from the crossing is not picked.
    ``orientation`` +1 means f goes from negative to positive.
    """
    z = f / np.where(sf > 0, sf, np.inf)
    z = np.where(np.isfinite(z), z, 0.0)
    csum = np.concatenate([[0.0], np.cumsum(z)])
    best = None
    for o in ((orientation,) if orientation else (1, -1)):
        scores = o * (csum[-1] - 2 * csum[1:-1])
        s = int(np.argmax(scores)) + 1
        if best is None or scores[s - 1] > best[0]:
            best = (scores[s - 1], s, o)
    return best[1], best[2]


def _find_crossing(
    p: np.ndarray, f: np.ndarray, sf: np.ndarray, orientation: int | None, window: int = 0
) -> Crossing:
    """Root of ``f`` over ``log p`` near its sign change.

    ``window=0`` interpolates linearly between the two bracketing points.
    ``window=w`` fits a weighted straight line through up to ``w`` points on
    each side of the sign change instead; this is what makes crossings of
    nearly parallel curves usable.
    """
    ok = np.isfinite(f) & np.isfinite(sf) & (p > 0)
    idx = np.flatnonzero(ok)
    if idx.size < 2:
        raise NoCrossingError("fewer than two usable points")
    if np.all(f[idx] == 0):
        raise NoCrossingError("curves coincide: no unique crossing")
    s, o = _change_point(f[idx], sf[idx], orientation)
    a, b = idx[s - 1], idx[s]
    fa, fb = o * f[a], o * f[b]
    if not (fa <= 0 <= fb) or fa == fb:
        raise NoCrossingError("curve does not cross inside the grid")
    if window > 1:
        sel = idx[max(0, s - window) : s + window]
        try:
            x, sx = _line_root(np.log(p[sel]), f[sel], np.maximum(sf[sel], 1e-12))
        except NoCrossingError:
            x = math.nan
        if math.log(p[sel[0]]) <= x <= math.log(p[sel[-1]]):
            return Crossing(math.exp(x), math.exp(x) * sx, (float(p[sel[0]]), float(p[sel[-1]])))
        # curves touch rather than cross here; fall back to the bracketing pair
    xa, xb = math.log(p[a]), math.log(p[b])
    x = xa + -fa / (fb - fa) * (xb - xa)
    dx_dfa = (xb - xa) * (-fb) / (fb - fa) ** 2
    dx_dfb = (xb - xa) * fa / (fb - fa) ** 2
    sx = math.hypot(dx_dfa * sf[a], dx_dfb * sf[b])
    return Crossing(math.exp(x), math.exp(x) * sx, (float(p[a]), float(p[b])))


def _line_root(x: np.ndarray, y: np.ndarray, sy: np.ndarray) -> tuple[float, float]:
    """Weighted least-squares line through (x, y); its root and delta-method error."""
    w = 1 / sy**2
    xc = np.sum(w * x) / np.sum(w)
    sxx = np.sum(w * (x - xc) ** 2)
    slope = np.sum(w * (x - xc) * y) / sxx
    inter = np.sum(w * y) / np.sum(w)  # value of the line at xc
    if slope == 0:
        raise NoCrossingError("flat difference: no unique crossing")
    root = xc - inter / slope
    var_inter, var_slope = 1 / np.sum(w), 1 / sxx
    sx = math.sqrt(var_inter / slope**2 + (inter**2 / slope**4) * var_slope)
    return float(root), sx


@dataclass(frozen=True)
class ThresholdEstimate:
    value: float
    stderr: float
    bracket: tuple[float, float]
    method: str
    curves: tuple[str, ...]
    pairwise: tuple[Crossing, ...] = field(default=())
    spread: float = 0.0

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "stderr": self.stderr,
            "bracket": list(self.bracket),
            "method": self.method,
            "curves": list(self.curves),
            "pairwise": [{"value": c.value, "stderr": c.stderr, "bracket": list(c.bracket)} for c in self.pairwise],
            "spread": self.spread,
        }


def _identity_crossing(curve: SweepResult) -> Crossing:
    trials = np.array([pt.trials for pt in curve.points], dtype=float)
    lq, sq = _log_rate(curve.p_logical, curve.stderr, trials)
    return _find_crossing(curve.ps, lq - np.log(curve.ps), sq, orientation=1)


def pseudo_threshold(
    curve: SweepResult,
    refine: bool = False,
    tol: float = 0.002,
    max_iter: int = 12,
    trials: int | None = None,
    workers: int = 1,
) -> ThresholdEstimate:
    """Where the P_L(p) curve meets P_L = p, by log-log interpolation.

    With ``refine`` the curve is re-sampled at the current estimate (fresh
    sub-streams) until the bracketing interval is narrower than ``tol``.
    """
    c = _identity_crossing(curve)
    method = "log-log interpolation"
    if refine:
        code = curve.code
        seed = RngSeed(curve.master_seed)
        trials = trials or curve.trials
        for it in range(max_iter):
            if c.bracket[1] - c.bracket[0] < tol:
                break
            kappa = p_to_kappa(c.value)
            if any(math.isclose(kappa, k, rel_tol=1e-12) for k in curve.kappas):
                break
            new = _point_at_kappa(code, curve.channel, kappa, trials, seed.child(REFINE_STREAM + it), workers)
            points = tuple(sorted(curve.points + (new,), key=lambda pt: pt.kappa))
            curve = SweepResult(curve.d_x, curve.d_z, curve.channel, points, curve.master_seed, curve.trials)
            c = _identity_crossing(curve)
        method += f" + refinement (tol={tol})"
    return ThresholdEstimate(c.value, c.stderr, c.bracket, method, (curve.label,), (c,))


def curve_crossing(a: SweepResult, b: SweepResult, window: int = FIT_WINDOW) -> Crossing:
    if not np.allclose(a.kappas, b.kappas):
        raise ValueError("curves must share the kappa grid")
    ta = np.array([pt.trials for pt in a.points], dtype=float)
    tb = np.array([pt.trials for pt in b.points], dtype=float)
    fa, sa = _log_rate(a.p_logical, a.stderr, ta)
    fb, sb = _log_rate(b.p_logical, b.stderr, tb)
    if np.array_equal(a.p_logical, b.p_logical):
        raise NoCrossingError(f"{a.label} and {b.label} coincide: no unique crossing")
    f, sf = fa - fb, np.hypot(sa, sb)
    c = _find_crossing(a.ps, f, sf, orientation=None, window=window)
    return replace(c, stderr=_resampled_stderr(a.ps, f, sf, window, c.stderr))


def _resampled_stderr(p: np.ndarray, f: np.ndarray, sf: np.ndarray, window: int, fallback: float) -> float:
    """Spread of the crossing when ``f`` is redrawn from N(f, sf), split search included.

    Curves that touch over several grid points (pure dephasing near p = 1/2)
    let the sign change wander across the whole flat stretch; the
    delta-method error of one line fit does not see that and is far too small.
    """
    rng = np.random.default_rng(0)
    finite = np.isfinite(f) & np.isfinite(sf)
    vals = []
    for _ in range(CROSSING_RESAMPLES):
        g = np.where(finite, f + rng.standard_normal(f.size) * np.where(finite, sf, 0), f)
        try:
            vals.append(_find_crossing(p, g, sf, orientation=None, window=window).value)
        except NoCrossingError:
            pass
    if len(vals) < CROSSING_RESAMPLES // 2:
        return fallback
    return float(np.std(vals))


def threshold(curves: list[SweepResult]) -> ThresholdEstimate:
    """Inverse-variance weighted mean of the crossings of adjacent curves."""
    if len(curves) < 2:
        raise ValueError("threshold needs at least two curves")
    if len({c.channel for c in curves}) != 1:
        raise ValueError("curves must share one channel")
    curves = sorted(curves, key=lambda c: (c.d_x, c.d_z))
    pairs = [curve_crossing(a, b) for a, b in zip(curves, curves[1:])]
    vals = np.array([c.value for c in pairs])
    errs = np.array([c.stderr for c in pairs])
    if np.all(errs > 0):
        w = 1 / errs**2
        value = float(np.sum(w * vals) / np.sum(w))
        stderr = float(1 / math.sqrt(np.sum(w)))
    else:
        value, stderr = float(np.mean(vals)), 0.0
    bracket = (min(c.bracket[0] for c in pairs), max(c.bracket[1] for c in pairs))
    return ThresholdEstimate(
        value,
        stderr,
        bracket,
        "inverse-variance mean of adjacent-curve log-log crossings",
        tuple(c.label for c in curves),
        tuple(pairs),
        float(vals.max() - vals.min()),
    )


TABLE_CODES = ((3, 3), (3, 5), (3, 7), (5, 5), (5, 7), (7, 7))


@dataclass(frozen=True)
class CrossoverScan:
    deltas: tuple[float, ...]
    codes: tuple[tuple[int, int], ...]
    estimates: dict  # (d_x, d_z, delta) -> ThresholdEstimate or None (no crossing)
    crossover: float | None

    def gamma(self, d_x: int, d_z: int, delta: float) -> float | None:
        est = self.estimates.get((d_x, d_z, delta))
        return None if est is None else est.value


def find_crossover(estimates: dict, deltas) -> float | None:
    """Smallest bias where [3,5] beats [5,5] and [3,7] beats [7,7]."""
    for delta in deltas:
        g = {code: estimates.get((*code, delta)) for code in ((3, 5), (5, 5), (3, 7), (7, 7))}
        if any(v is None for v in g.values()):
            continue
        if g[(3, 5)].value > g[(5, 5)].value and g[(3, 7)].value > g[(7, 7)].value:
            return delta
    return None


def crossover_scan(
    deltas=tuple(range(1, 11)),
    codes=TABLE_CODES,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    kappa_grid=None,
    workers: int = 1,
    refine: bool = False,
) -> CrossoverScan:
    grid = default_kappa_grid() if kappa_grid is None else kappa_grid
    estimates = {}
    for delta in deltas:
        for d_x, d_z in codes:
            curve = sweep_curve(build_code(Distances(d_x, d_z)), ChannelSpec(parse_delta(delta)), grid, trials, seed, workers)
            try:
                estimates[(d_x, d_z, delta)] = pseudo_threshold(curve, refine=refine, workers=workers)
            except NoCrossingError as exc:
                log.warning("[%d,%d] delta=%s: %s", d_x, d_z, delta, exc)
                estimates[(d_x, d_z, delta)] = None
    deltas = tuple(deltas)
    return CrossoverScan(deltas, tuple(codes), estimates, find_crossover(estimates, deltas))
