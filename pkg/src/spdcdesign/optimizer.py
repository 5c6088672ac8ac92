"""Real-coded genetic search over asymmetric-polynomial poling profiles.

Target: G = w_phase * <delta^2> + w_sym * sym + w_fwhm * ((FWHM - sigma) / sigma)^2,
each term dimensionless, under a minimum-domain fabrication constraint.
"""
from __future__ import annotations

import dataclasses
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import AnalysisError, SpectralGrid, grid_for_wavelength_span
from .dispersion import DispersionModel, bdl_phase_group_ratio, calibrate_period
from .interferometer import (InterferogramConfig, coincidence_rate, default_config, envelope_local_maxima)
from .jsa import amplitude, analyze, bandwidth, residual_phase, unwrap_phase
from .poling import (MIN_FEASIBLE_DOMAIN, AsymmetricPolynomial, ProfileError, ProfileSpec, check_constraints,
                     generate, profile_from_dict)

PENALTY = 1.0e6
RUN_SCHEMA = "spdcdesign-optimization-run/1"
REPORT_SCHEMA = "spdcdesign-candidate-report/1"
PHASE_WEIGHTINGS = ("overlap", "half_max")
OVERLAP_FLOOR = 0.1  # of the unit peak
EDGE_FRACTION = 0.05  # outer part of the grid on each side
EDGE_LEVEL = 0.01  # largest unit-peak intensity tolerated there


@dataclass(frozen=True)
class GaConfig:
    order: int = 11
    population: int = 96
    generations: int = 300
    tournament_size: int = 3
    crossover_rate: float = 0.9
    blend_alpha: float = 0.5
    mutation_rate: float = 0.2  # per-gene probability
    mutation_scale: float = 0.1  # fraction of the gene range
    mutation_halving: int = 100  # generations per halving of the mutation width
    elitism: int = 2
    seed: int = 0
    alpha_range: tuple = (-0.25, 0.25)
    beta_range: tuple = (0.0, 2.0)
    weights: tuple = (1.0, 1.0, 1.0)
    sigma_target_nm: float = 135.0
    stall_generations: int = 30
    stall_tolerance: float = 1e-8
    grid_count: int = 4097
    half_span_nm: float = 175.0
    total_length: float = 16500.0  # um
    min_domain: float = MIN_FEASIBLE_DOMAIN
    feasible_init: bool = True
    phase_weighting: str = "overlap"  # or "half_max"
    workers: int = 1

    def __post_init__(self):
        for name in ("alpha_range", "beta_range", "weights"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        errors = config_errors(self)
        if errors:
            raise ValueError("; ".join(f"{k}: {v}" for k, v in errors))

    @property
    def gene_count(self) -> int:
        return 2 * (self.order + 1)

    @property
    def bounds(self) -> np.ndarray:
        lo_hi = [self.alpha_range, self.beta_range] * (self.order + 1)
        return np.array(lo_hi, dtype=float)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        for k in ("alpha_range", "beta_range", "weights"):
            out[k] = list(out[k])
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "GaConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown GA settings: {sorted(unknown)}")
        return cls(**data)


def config_errors(cfg: GaConfig) -> list[tuple[str, str]]:
    errs = []
    if not isinstance(cfg.order, int) or cfg.order < 0:
        errs.append(("order", "must be a non-negative integer"))
    if not isinstance(cfg.population, int) or cfg.population < 4:
        errs.append(("population", "must be an integer >= 4"))
    if not isinstance(cfg.generations, int) or cfg.generations < 1:
        errs.append(("generations", "must be a positive integer"))
    if not 1 <= cfg.tournament_size <= max(cfg.population, 1):
        errs.append(("tournament_size", "must lie in [1, population]"))
    for name in ("crossover_rate", "mutation_rate", "mutation_scale", "blend_alpha"):
        if not 0.0 <= getattr(cfg, name) <= 1.0:
            errs.append((name, "must lie in [0, 1]"))
    if not 0 <= cfg.elitism < max(cfg.population, 1):
        errs.append(("elitism", "must lie in [0, population)"))
    for name in ("alpha_range", "beta_range"):
        r = getattr(cfg, name)
        if len(r) != 2 or not r[0] <= r[1]:
            errs.append((name, "must be [low, high] with low <= high"))
    if len(cfg.weights) != 3 or any(w < 0 for w in cfg.weights):
        errs.append(("weights", "must be three non-negative numbers"))
    if not cfg.sigma_target_nm > 0:
        errs.append(("sigma_target_nm", "must be positive"))
    if not cfg.total_length > 0:
        errs.append(("total_length", "must be positive"))
    if not cfg.min_domain > 0:
        errs.append(("min_domain", "must be positive"))
    if cfg.grid_count < 3 or cfg.grid_count % 2 == 0:
        errs.append(("grid_count", "must be an odd integer >= 3"))
    if cfg.phase_weighting not in PHASE_WEIGHTINGS:
        errs.append(("phase_weighting", f"must be one of {PHASE_WEIGHTINGS}"))
    if cfg.mutation_halving < 1 or cfg.stall_generations < 1 or cfg.workers < 1:
        errs.append(("mutation_halving/stall_generations/workers", "must be positive"))
    return errs


@dataclass(frozen=True)
class FitnessBreakdown:
    phase_term: float
    symmetry_term: float
    fwhm_term: float
    total: float
    feasible: bool
    fwhm_nm: float = float("nan")
    min_domain: float = float("nan")
    message: str = ""

    @property
    def rank_key(self) -> tuple:
        return (not self.feasible, self.total)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def genome_to_spec(genome, base_period: float, total_length: float) -> AsymmetricPolynomial:
    g = np.asarray(genome, dtype=float)
    pairs = tuple((float(g[2 * j]), float(g[2 * j + 1])) for j in range(len(g) // 2))
    return AsymmetricPolynomial(base_period, total_length, order=len(pairs) - 1, coefficients=pairs)


def spec_to_genome(spec: AsymmetricPolynomial) -> np.ndarray:
    return np.array([v for pair in spec.coefficients for v in pair], dtype=float)


def _infeasible(min_domain: float, cfg: GaConfig, message: str) -> FitnessBreakdown:
    excess = cfg.min_domain - min_domain if math.isfinite(min_domain) else cfg.min_domain
    return FitnessBreakdown(math.nan, math.nan, math.nan, PENALTY + max(excess, 0.0), False,
                            min_domain=min_domain, message=message)


def phase_penalty(intensity, delta, weights, mode: str = "overlap") -> float:
    """Mean squared residual phase.

    "half_max": plain average over samples where both I(W) and I(-W) reach 0.5.
    "overlap": average weighted by sqrt(I(W) I(-W)), the weight with which delta
    enters the interference term, over samples where that weight is at least
    OVERLAP_FLOOR (below it the unwrapped phase carries no usable information).
    """
    defined = np.isfinite(delta)
    overlap = np.sqrt(intensity * intensity[::-1])
    if mode == "half_max":
        sel = defined & (intensity >= 0.5) & (intensity[::-1] >= 0.5)
        wt = weights[sel]
    elif mode == "overlap":
        sel = defined & (overlap >= OVERLAP_FLOOR)
        wt = weights[sel] * overlap[sel]
    else:
        raise ValueError(f"unknown phase weighting {mode!r}")
    if not np.any(sel):
        raise AnalysisError("no samples in the residual-phase support")
    return float(np.sum(wt * delta[sel] ** 2) / np.sum(wt))


def edge_intensity(intensity) -> float:
    """Largest intensity in the outer EDGE_FRACTION of the grid; large values mean the grid is too narrow."""
    n = max(1, int(round(EDGE_FRACTION * len(intensity))))
    return float(max(intensity[:n].max(), intensity[-n:].max()))


def symmetry_penalty(intensity, weights) -> float:
    """integral (|f(W)| - |f(-W)|)^2 / integral |f|^2 for a unit-peak amplitude."""
    mag = np.sqrt(intensity)
    return float(np.sum(weights * (mag - mag[::-1]) ** 2) / np.sum(weights * mag ** 2))


def fitness(spec: ProfileSpec, d: DispersionModel, grid: SpectralGrid, cfg: GaConfig) -> FitnessBreakdown:
    """Evaluate one candidate; never raises for a bad profile."""
    try:
        seq = generate(spec, abort_below=cfg.min_domain)
    except ProfileError as exc:
        return _infeasible(getattr(exc, "domain_length", math.nan), cfg, str(exc))
    report = check_constraints(seq, cfg.min_domain)
    if not report.passed:
        return _infeasible(report.min_domain, cfg, "constraint violated")
    w = grid.trapezoid_weights()
    s = amplitude(seq, d, grid)
    symmetry_term = symmetry_penalty(s.intensity, w)
    try:
        edge = edge_intensity(s.intensity)
        if edge > EDGE_LEVEL:
            raise AnalysisError(f"spectrum reaches the grid edge (intensity {edge:.3g} there)")
        s = residual_phase(unwrap_phase(s))
        bw = bandwidth(s)
        if bw.truncated:
            raise AnalysisError("half maximum not reached inside the grid")
        phase_term = phase_penalty(s.intensity, s.delta_phase, w, cfg.phase_weighting)
    except AnalysisError as exc:
        # no usable mirror overlap: rank between constraint violators and analysable candidates
        return FitnessBreakdown(math.nan, symmetry_term, math.nan, PENALTY / 2 + symmetry_term, False,
                                min_domain=report.min_domain, message=str(exc))
    fwhm_term = ((bw.fwhm_nm - cfg.sigma_target_nm) / cfg.sigma_target_nm) ** 2
    w1, w2, w3 = cfg.weights
    total = w1 * phase_term + w2 * symmetry_term + w3 * fwhm_term
    return FitnessBreakdown(phase_term, symmetry_term, fwhm_term, float(total), True, bw.fwhm_nm,
                            report.min_domain)


def quick_feasible(genome, base_period: float, cfg: GaConfig, samples: int = 2001) -> bool:
    """Approximate constraint check on a dense z grid (used only to seed the population)."""
    L = cfg.total_length
    z = np.linspace(0.0, L, samples)
    s = np.ones_like(z)
    for j in range(len(genome) // 2):
        s += genome[2 * j] * ((z - genome[2 * j + 1] * L / 2) / L) ** (2 * j + 1)
    return bool(np.all(np.isfinite(s)) and (base_period / 2 * s).min() >= cfg.min_domain)


@dataclass(frozen=True)
class TraceEntry:
    generation: int
    best: float
    mean: float
    feasible_fraction: float
    best_feasible: bool


@dataclass
class OptimizationRun:
    config: GaConfig
    base_period: float
    best_genome: np.ndarray
    best_fitness: FitnessBreakdown  # at twice the search grid resolution
    search_fitness: FitnessBreakdown  # as ranked during the search
    trace: list = field(default_factory=list)
    evaluations: int = 0
    stop_reason: str = ""

    @property
    def best_spec(self) -> AsymmetricPolynomial:
        return genome_to_spec(self.best_genome, self.base_period, self.config.total_length)

    def to_dict(self) -> dict:
        return {
            "schema": RUN_SCHEMA,
            "config": self.config.to_dict(),
            "base_period_um": self.base_period,
            "best_genome": [float(v) for v in self.best_genome],
            "best_profile": self.best_spec.to_dict(),
            "best_fitness": self.best_fitness.to_dict(),
            "search_fitness": self.search_fitness.to_dict(),
            "trace": [dataclasses.asdict(t) for t in self.trace],
            "evaluations": self.evaluations,
            "stop_reason": self.stop_reason,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, data: dict) -> "OptimizationRun":
        if data.get("schema") != RUN_SCHEMA:
            raise ValueError(f"unsupported schema {data.get('schema')!r}")
        return cls(
            config=GaConfig.from_dict(data["config"]),
            base_period=float(data["base_period_um"]),
            best_genome=np.array(data["best_genome"], dtype=float),
            best_fitness=FitnessBreakdown(**data["best_fitness"]),
            search_fitness=FitnessBreakdown(**data["search_fitness"]),
            trace=[TraceEntry(**t) for t in data["trace"]],
            evaluations=int(data["evaluations"]),
            stop_reason=data["stop_reason"],
        )


def _rng(cfg: GaConfig, generation: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([cfg.seed & (2**64 - 1), generation, index]))


def initial_population(cfg: GaConfig, base_period: float, tries: int = 500) -> np.ndarray:
    lo, hi = cfg.bounds.T
    pop = np.empty((cfg.population, cfg.gene_count))
    for i in range(cfg.population):
        rng = _rng(cfg, 0, i)
        g = rng.uniform(lo, hi)
        if cfg.feasible_init:
            for _ in range(tries):
                if quick_feasible(g, base_period, cfg):
                    break
                g = rng.uniform(lo, hi)
        pop[i] = g
    return pop


def _tournament(rng, keys, size):
    picks = rng.integers(0, len(keys), size=size)
    return min(picks, key=lambda k: (keys[k], k))


def _offspring(cfg: GaConfig, rng, parents_pop, keys, generation: int) -> np.ndarray:
    lo, hi = cfg.bounds.T
    a = parents_pop[_tournament(rng, keys, cfg.tournament_size)]
    b = parents_pop[_tournament(rng, keys, cfg.tournament_size)]
    if rng.random() < cfg.crossover_rate:
        span = np.abs(a - b)
        low = np.minimum(a, b) - cfg.blend_alpha * span
        u = rng.random(len(a))
        child = low + u * (span * (1 + 2 * cfg.blend_alpha))
    else:
        child = a.copy()
    width = cfg.mutation_scale * (hi - lo) * 0.5 ** (generation // cfg.mutation_halving)
    mask = rng.random(len(child)) < cfg.mutation_rate
    child = child + mask * rng.normal(0.0, 1.0, len(child)) * width
    return np.clip(child, lo, hi)


class _Evaluator:
    def __init__(self, d, grid, cfg, base_period):
        self.d, self.grid, self.cfg, self.base_period = d, grid, cfg, base_period

    def __call__(self, genome):
        spec = genome_to_spec(genome, self.base_period, self.cfg.total_length)
        return fitness(spec, self.d, self.grid, self.cfg)


def optimize(cfg: GaConfig, d: DispersionModel, grid: SpectralGrid | None = None,
             base_period: float | None = None, initial=None, progress=None) -> OptimizationRun:
    """Seeded GA; identical inputs give identical runs for any number of workers.

    ``initial`` optionally replaces the random starting population.
    """
    grid = grid_for_wavelength_span(cfg.grid_count, cfg.half_span_nm, d.center_wavelength_nm) if grid is None else grid
    base_period = calibrate_period(d) if base_period is None else base_period
    evaluate = _Evaluator(d, grid, cfg, base_period)
    pop = initial_population(cfg, base_period) if initial is None else np.array(initial, dtype=float)
    if pop.shape != (cfg.population, cfg.gene_count):
        raise ValueError(f"initial population must have shape {(cfg.population, cfg.gene_count)}")
    cache: dict[bytes, FitnessBreakdown] = {}
    evaluations = 0
    trace: list[TraceEntry] = []
    pool = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    stop_reason = "generation cap"
    try:
        for gen in range(cfg.generations):
            todo = [g for g in pop if g.tobytes() not in cache]
            unique = list({g.tobytes(): g for g in todo}.values())
            results = list(pool.map(evaluate, unique, chunksize=4)) if pool else [evaluate(g) for g in unique]
            evaluations += len(unique)
            for g, r in zip(unique, results):
                cache[g.tobytes()] = r
            fits = [cache[g.tobytes()] for g in pop]
            keys = [f.rank_key for f in fits]
            order = sorted(range(len(pop)), key=lambda k: (keys[k], k))
            pop, fits, keys = pop[order], [fits[k] for k in order], [keys[k] for k in order]
            totals = np.array([f.total for f in fits])
            entry = TraceEntry(gen, float(totals[0]), float(totals.mean()),
                               float(np.mean([f.feasible for f in fits])), bool(fits[0].feasible))
            trace.append(entry)
            if progress is not None:
                progress(entry)
            if len(trace) > cfg.stall_generations:
                past = trace[-1 - cfg.stall_generations]
                if past.best_feasible and past.best - entry.best < cfg.stall_tolerance:
                    stop_reason = f"stalled for {cfg.stall_generations} generations"
                    break
            if gen == cfg.generations - 1:
                break
            nxt = [pop[k].copy() for k in range(cfg.elitism)]
            for i in range(cfg.elitism, cfg.population):
                nxt.append(_offspring(cfg, _rng(cfg, gen + 1, i), pop, keys, gen + 1))
            pop = np.array(nxt)
            if len(cache) > 20 * cfg.population:
                keep = {g.tobytes() for g in pop}
                cache = {k: v for k, v in cache.items() if k in keep}
    finally:
        if pool is not None:
            pool.shutdown()
    best = pop[0]
    refined = fitness(genome_to_spec(best, base_period, cfg.total_length), d, grid.refined(), cfg)
    return OptimizationRun(cfg, float(base_period), best.copy(), refined, fits[0], trace, evaluations, stop_reason)


@dataclass
class CandidateReport:
    profile: dict
    constraint_passed: bool
    min_domain_um: float
    domain_count: int
    fwhm_nm: float
    fwhm_truncated: bool
    symmetry_residual: float
    group_slope_fs: float
    visibility: float
    envelope_fwhm_fs: float
    envelope_maxima: int
    fringe_period_fs: float
    peak_delay_fs: float
    fitness: dict | None = None
    spectrum: object = field(default=None, repr=False, compare=False)
    interferogram: object = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        data = {f.name: getattr(self, f.name) for f in dataclasses.fields(self)
                if f.name not in ("spectrum", "interferogram")}
        return {"schema": REPORT_SCHEMA, **data}

    @classmethod
    def from_dict(cls, data: dict) -> "CandidateReport":
        data = dict(data)
        if data.pop("schema", None) != REPORT_SCHEMA:
            raise ValueError("unsupported candidate report schema")
        return cls(**data)


def evaluate_candidate_report(spec: ProfileSpec, d: DispersionModel, grid: SpectralGrid,
                              ig_config: InterferogramConfig | None = None, ratio: float | None = None,
                              ga: GaConfig | None = None) -> CandidateReport:
    """Spectrum, interferogram and constraint figures of merit for one profile."""
    seq = generate(spec)
    cons = check_constraints(seq)
    s = analyze(seq, d, grid)
    bw = bandwidth(s)
    ratio = bdl_phase_group_ratio(d) if ratio is None else ratio
    ig = coincidence_rate(s, default_config(s, ratio) if ig_config is None else ig_config)
    fit = fitness(spec, d, grid, ga).to_dict() if ga is not None else None
    return CandidateReport(
        profile=spec.to_dict(), constraint_passed=cons.passed, min_domain_um=cons.min_domain,
        domain_count=seq.count, fwhm_nm=bw.fwhm_nm, fwhm_truncated=bw.truncated,
        symmetry_residual=bw.symmetry_residual, group_slope_fs=float(s.group_slope),
        visibility=float(ig.visibility_peak), envelope_fwhm_fs=float(ig.envelope_fwhm_fs),
        envelope_maxima=int(len(envelope_local_maxima(ig))), fringe_period_fs=float(ig.fringe_period_fs),
        peak_delay_fs=float(ig.peak_delay_fs), fitness=fit, spectrum=s, interferogram=ig,
    )


def load_run(path) -> OptimizationRun:
    with open(path, encoding="utf-8") as fh:
        return OptimizationRun.from_dict(json.load(fh))


def spec_from_run_file(path) -> ProfileSpec:
    run = load_run(path)
    return profile_from_dict(run.to_dict()["best_profile"])
