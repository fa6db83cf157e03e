"""Monte Carlo sweeps, reference curves, and small combinatorial oracles.

The sweep protocol fixes a model and a grid of sampling rates; for each
rate it draws generic points and Bernoulli masks, asks for an
identifiability verdict, and reports success counts with Wilson 95%
intervals. Mask uniforms are keyed by the trial index only, so the masks
are coupled across the rate grid (mask(rho) = {i : u_i < rho}) and each
trial's success indicator is monotone in rho.
"""

from __future__ import annotations

import functools
import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._version import __version__
from .flats import Flat, leverage_scores
from .identify import contraction_norm, identifiable_mask
from .sampling import RNG_NAME, SampleMask, philox
from .varieties import Linear, coherence_formula, parse_model, sample_generic_point

_WILSON_Z = 1.959963984540054  # two-sided 95%
_POINT_STREAM = 0
_MASK_STREAM = 1

CSV_HEADER = "rho,trials,successes,success_rate,ci_low,ci_high"
THREADS_ENV = "COHLAB_THREADS"


def wilson_interval(successes: int, trials: int, z: float = _WILSON_Z) -> tuple[float, float]:
    """Wilson score 95% interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("need trials >= 1")
    if not 0 <= successes <= trials:
        raise ValueError("successes must lie in [0, trials]")
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


@dataclass(frozen=True)
class SweepConfig:
    """Inputs of one sweep: model descriptor, rate grid, trials, seeds."""

    model: str
    rho_grid: tuple
    trials_per_rho: int
    base_seed: int
    tol: float = 1e-8
    lam: float = 1.0  # reporting parameter for the rate curve

    def __post_init__(self):
        grid = tuple(float(r) for r in self.rho_grid)
        if not grid:
            raise ValueError("rho grid is empty")
        if any(not 0.0 < r <= 1.0 for r in grid):
            raise ValueError("rho grid values must lie in (0, 1]")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("rho grid must be strictly increasing")
        if self.trials_per_rho < 1:
            raise ValueError("need at least one trial per rho")
        if self.lam < 1.0:
            raise ValueError("lambda must be >= 1")
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")
        object.__setattr__(self, "rho_grid", grid)


@dataclass(frozen=True)
class SweepRecord:
    rho: float
    trials: int
    successes: int
    success_rate: float
    ci_low: float
    ci_high: float


@dataclass(frozen=True)
class ThresholdEstimate:
    rho_half: float | None
    method: str
    bracketed: bool


def resolve_workers(explicit: int | None = None) -> int:
    """Worker count: explicit argument, else COHLAB_THREADS (0 = auto), else 1."""
    if explicit is not None:
        return max(1, int(explicit))
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return 1
    value = int(raw)
    if value == 0:
        return os.cpu_count() or 1
    return max(1, value)


def _sweep_trial(model, n: int, base_seed: int, rho_index: int, rho: float, trial: int, tol: float) -> bool:
    point = sample_generic_point(model, philox(base_seed, rho_index, trial, _POINT_STREAM))
    u = philox(base_seed, trial, _MASK_STREAM).random(n)
    mask = SampleMask.from_indicator(u < rho)
    return identifiable_mask(model, point, mask, tol).identifiable


def run_sweep(config: SweepConfig, workers: int | None = None, progress=None) -> list[SweepRecord]:
    """Run the sweep; deterministic from the config regardless of workers."""
    model = parse_model(config.model)
    n = model.ambient_dim
    tasks = [
        (i, rho, t)
        for i, rho in enumerate(config.rho_grid)
        for t in range(config.trials_per_rho)
    ]
    nworkers = resolve_workers(workers)
    if nworkers > 1:
        with ThreadPoolExecutor(max_workers=nworkers) as pool:
            flags = list(
                pool.map(
                    lambda args: _sweep_trial(
                        model, n, config.base_seed, args[0], args[1], args[2], config.tol
                    ),
                    tasks,
                )
            )
    else:
        flags = [
            _sweep_trial(model, n, config.base_seed, i, rho, t, config.tol)
            for i, rho, t in tasks
        ]
    records = []
    for i, rho in enumerate(config.rho_grid):
        chunk = flags[i * config.trials_per_rho : (i + 1) * config.trials_per_rho]
        successes = int(sum(chunk))
        lo, hi = wilson_interval(successes, config.trials_per_rho)
        records.append(
            SweepRecord(
                rho=rho,
                trials=config.trials_per_rho,
                successes=successes,
                success_rate=successes / config.trials_per_rho,
                ci_low=lo,
                ci_high=hi,
            )
        )
        if progress is not None:
            progress(records[-1])
    return records


THRESHOLD_METHOD = "linear interpolation between bracketing grid points"


def estimate_threshold(records: list[SweepRecord]) -> ThresholdEstimate:
    """Sampling rate where the success curve crosses one half."""
    rates = [r.success_rate for r in records]
    rhos = [r.rho for r in records]
    for i in range(len(records) - 1):
        if rates[i] < 0.5 <= rates[i + 1]:
            t = (0.5 - rates[i]) / (rates[i + 1] - rates[i])
            return ThresholdEstimate(
                rho_half=rhos[i] + t * (rhos[i + 1] - rhos[i]),
                method=THRESHOLD_METHOD,
                bracketed=True,
            )
    return ThresholdEstimate(rho_half=None, method=THRESHOLD_METHOD, bracketed=False)


def theoretical_rate(model, lam: float = 1.0, c: float = 1.0, log_base: str = "e") -> float:
    """Sufficient sampling rate min(1, c * lambda * coh * log(ambient)).

    Uses the model's closed-form (or envelope) coherence; natural log by
    default, log_base in {"e", "2", "10"}.
    """
    if lam < 1.0:
        raise ValueError("lambda must be >= 1")
    if c <= 0:
        raise ValueError("rate constant must be positive")
    logs = {"e": math.log, "2": math.log2, "10": math.log10}
    if log_base not in logs:
        raise ValueError("log_base must be one of 'e', '2', '10'")
    coh = coherence_formula(model).value
    return min(1.0, c * lam * coh * logs[log_base](model.ambient_dim))


def coupon_reference(n: int, k: int, rho: float) -> float:
    """Exact success curve (1 - (1-rho)^(n/k))^k for the k-block flat in R^n."""
    if n < 1 or k < 1 or n % k != 0:
        raise ValueError("need k >= 1 dividing n")
    if not 0.0 <= rho <= 1.0:
        raise ValueError("rho must lie in [0, 1]")
    return (1.0 - (1.0 - rho) ** (n // k)) ** k


@dataclass(frozen=True)
class RudelsonRow:
    rho: float
    mean_norm: float
    max_leverage: float
    bound_shape: float  # sqrt(log n / rho) * max per-coordinate basis-row norm


def rudelson_probe(flat: Flat, rho_grid, trials: int, rng: np.random.Generator) -> list[RudelsonRow]:
    """Mean contraction norms against the sqrt(log n / rho) bound shape.

    Masks are coupled across the grid through shared per-trial uniforms.
    """
    if trials < 1:
        raise ValueError("need trials >= 1")
    grid = [float(r) for r in rho_grid]
    if any(not 0.0 < r <= 1.0 for r in grid):
        raise ValueError("rho grid values must lie in (0, 1]")
    model = Linear(flat=flat)
    point = sample_generic_point(model, rng)
    n = flat.ambient_dim
    uniforms = rng.random((trials, n))
    max_lev = float(np.max(leverage_scores(flat)))
    rows = []
    for rho in grid:
        norms = [
            contraction_norm(model, point, SampleMask.from_indicator(u < rho), rho)
            for u in uniforms
        ]
        rows.append(
            RudelsonRow(
                rho=rho,
                mean_norm=float(np.mean(norms)),
                max_leverage=max_lev,
                bound_shape=math.sqrt(math.log(n) / rho) * math.sqrt(max_lev),
            )
        )
    return rows


@functools.cache
def _laman_bases(n: int) -> tuple:
    """Bitmasks of all (2n-3)-edge subsets of K_n with hereditary sparsity.

    An edge set B qualifies iff every induced subgraph on n' >= 2 vertices
    spans at most 2n'-3 of its edges; it is enough to check vertex subsets
    of size 3..n-1 since |B| = 2n-3 handles the full set and simple graphs
    handle pairs.
    """
    pairs = list(itertools.combinations(range(n), 2))
    target = 2 * n - 3
    if target > len(pairs) or target < 1:
        return ()
    checks = []
    for size in range(3, n):
        for subset in itertools.combinations(range(n), size):
            members = set(subset)
            edge_mask = 0
            for e, (i, j) in enumerate(pairs):
                if i in members and j in members:
                    edge_mask |= 1 << e
            checks.append((edge_mask, 2 * size - 3))
    bases = []
    bits = [1 << e for e in range(len(pairs))]
    for combo in itertools.combinations(bits, target):
        mask = 0
        for b in combo:
            mask |= b
        if all((mask & em).bit_count() <= bound for em, bound in checks):
            bases.append(mask)
    return tuple(bases)


def laman_brute_oracle(n: int, edges) -> bool:
    """Generic rigidity in the plane by exhaustive hereditary-count check.

    True iff some subset of 2n-3 edges satisfies |E'| <= 2n'-3 on every
    induced subgraph. Exponential; guarded to n <= 7.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    if n > 7:
        raise ValueError("brute-force oracle is limited to n <= 7 vertices")
    pairs = list(itertools.combinations(range(n), 2))
    index = {p: e for e, p in enumerate(pairs)}
    graph_mask = 0
    seen = set()
    for edge in edges:
        i, j = int(edge[0]), int(edge[1])
        if i == j or not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"bad edge ({i}, {j}) for n={n}")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise ValueError(f"duplicate edge {key}")
        seen.add(key)
        graph_mask |= 1 << index[key]
    if n == 1:
        return True
    return any((graph_mask & base) == base for base in _laman_bases(n))


def write_csv(records: list[SweepRecord], path, metadata: dict | None = None) -> None:
    """Write sweep records with '#'-prefixed key=value metadata lines."""
    lines = []
    for key, value in (metadata or {}).items():
        text = f"{key}={value}"
        if "\n" in text:
            raise ValueError("metadata must be single-line")
        lines.append(f"# {text}")
    lines.append(CSV_HEADER)
    for r in records:
        lines.append(
            f"{r.rho!r},{r.trials},{r.successes},{r.success_rate!r},{r.ci_low!r},{r.ci_high!r}"
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path) -> tuple[list[SweepRecord], dict]:
    """Read a sweep CSV; rejects malformed rows with their line number."""
    metadata: dict[str, str] = {}
    records: list[SweepRecord] = []
    header_seen = False
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, value = body.partition("=")
                    metadata[key.strip()] = value.strip()
                continue
            if not header_seen:
                if line != CSV_HEADER:
                    raise ValueError(f"{path}:{lineno}: expected header {CSV_HEADER!r}")
                header_seen = True
                continue
            fields = line.split(",")
            if len(fields) != 6:
                raise ValueError(f"{path}:{lineno}: expected 6 fields")
            try:
                rho = float(fields[0])
                trials = int(fields[1])
                successes = int(fields[2])
                rate, lo, hi = (float(x) for x in fields[3:])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: malformed numeric field") from None
            if trials < 1 or successes < 0 or successes > trials:
                raise ValueError(f"{path}:{lineno}: successes must lie in [0, trials]")
            records.append(SweepRecord(rho, trials, successes, rate, lo, hi))
    if not header_seen:
        raise ValueError(f"{path}: missing header line {CSV_HEADER!r}")
    return records, metadata


def sweep_metadata(config: SweepConfig, extra: dict | None = None) -> dict:
    """Standard metadata header for a sweep CSV."""
    meta = {
        "model": config.model,
        "base_seed": config.base_seed,
        "trials_per_rho": config.trials_per_rho,
        "tol": repr(config.tol),
        "lambda": repr(config.lam),
        "rng": RNG_NAME,
        "code_version": __version__,
    }
    if extra:
        meta.update(extra)
    return meta
