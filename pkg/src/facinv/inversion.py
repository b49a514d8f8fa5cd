"""Bayesian latent-space inversion with parallel Metropolis chains.

Each chain walks the generator's latent space: propose a partial redraw of
the latent, decode it to a facies model, forward-model the seismic
response, score it against observed data (Gaussian seismic likelihood
plus a soft well-mismatch penalty), and accept or reject by the
Metropolis criterion.  The latent prior is uniform on [-1, 1] and
proposals never leave its support, so the prior contributes a constant
to the log-posterior.

Chains are independent, seeded as a deterministic function of
(base seed, chain index), and reproduce bit-identically whether run
sequentially or in parallel.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .forward import (
    FaciesPropertyTable,
    SeismicCube,
    Wavelet,
    default_property_table,
    facies_to_elastic,
    reflectivity,
    synthesize,
)
from .generator import GeneratorNetwork, LatentVector, binarize, generate, random_latent
from .grid import CHANNEL, FaciesGrid, RealGrid, WellSet, extract_patch

FORWARD_SEISMIC = "seismic"
FORWARD_IDENTITY = "identity"  # synthetic = cropped continuous output (calibration)


@dataclass(frozen=True)
class LikelihoodSpec:
    """Observed data plus noise model: diagonal Gaussian with SD sigma_d,
    and a per-cell well mismatch weight."""

    observed: SeismicCube
    sigma_d: float
    wells: WellSet | None = None
    well_weight: float = 0.0

    def __post_init__(self):
        if self.sigma_d <= 0:
            raise ValueError(f"sigma_d must be > 0, got {self.sigma_d}")
        if self.well_weight < 0:
            raise ValueError(f"well weight must be >= 0, got {self.well_weight}")
        if self.wells is not None:
            self.wells.validate_against(self.observed.dims)


@dataclass(frozen=True)
class InversionProblem:
    """Everything a chain needs: generator, crop mapping onto the survey
    grid, forward-model configuration, likelihood, and sampler settings."""

    network: GeneratorNetwork
    likelihood: LikelihoodSpec
    wavelet: Wavelet | None = None
    properties: FaciesPropertyTable | None = None
    crop_origin: tuple | None = None  # None: centered in generator output
    proposal_fraction: float = 0.1
    iterations: int = 1000
    chains: int = 1
    burn_in: float = 0.5
    thin: int = 10
    seed: int = 0
    threshold: float = 0.0
    forward_mode: str = FORWARD_SEISMIC
    elastic_seed: int = 0  # used only in uniform_sample property mode

    def __post_init__(self):
        if self.forward_mode not in (FORWARD_SEISMIC, FORWARD_IDENTITY):
            raise ValueError(f"unknown forward mode {self.forward_mode!r}")
        if not 0.0 < self.proposal_fraction <= 1.0:
            raise ValueError("proposal fraction must lie in (0, 1]")
        if self.iterations < 0 or self.chains < 1 or self.thin < 1:
            raise ValueError("iterations >= 0, chains >= 1 and thin >= 1 required")
        if not 0.0 <= self.burn_in < 1.0:
            raise ValueError("burn-in fraction must lie in [0, 1)")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        out_shape = self.network.output_shape()
        crop = self.crop_size
        if self.crop_origin is None:
            origin = tuple((o - c) // 2 for o, c in zip(out_shape, crop))
        else:
            origin = tuple(int(v) for v in self.crop_origin)
        if any(
            0 > org or org + c > o for org, c, o in zip(origin, crop, out_shape)
        ):
            raise ValueError(
                f"crop origin={origin} size={crop} does not fit in "
                f"generator output {out_shape}"
            )
        object.__setattr__(self, "crop_origin", origin)
        if self.properties is None:
            object.__setattr__(self, "properties", default_property_table())
        if self.forward_mode == FORWARD_SEISMIC:
            if self.wavelet is None:
                raise ValueError("seismic forward mode needs a wavelet")
            nz = self.likelihood.observed.dims.nz
            if self.wavelet.samples.size > 2 * nz + 1:
                raise ValueError("wavelet too long for the survey trace length")

    @property
    def crop_size(self):
        return self.likelihood.observed.dims.shape

    @property
    def latent_shape(self):
        return self.network.input_shape


@dataclass(frozen=True)
class ChainState:
    """Current position of one chain."""

    latent: LatentVector
    facies: FaciesGrid
    synthetic: SeismicCube
    log_posterior: float
    iteration: int
    accepted: int


@dataclass(frozen=True)
class ChainSample:
    """One retained posterior sample."""

    iteration: int
    latent: LatentVector
    facies: FaciesGrid
    log_posterior: float
    misfit_rms: float


@dataclass(frozen=True)
class ChainResult:
    """Thinned post-burn-in samples plus the per-iteration trace."""

    chain_index: int
    samples: tuple
    best: ChainSample  # best log-posterior over every evaluated candidate
    iterations: np.ndarray
    log_posterior: np.ndarray
    acceptance_rate: np.ndarray
    misfit_sd: np.ndarray
    best_log_posterior: np.ndarray  # running best; non-decreasing

    @property
    def final_acceptance_rate(self):
        return float(self.acceptance_rate[-1])


@dataclass(frozen=True)
class PosteriorStats:
    """Cell-wise posterior of the channel indicator plus the MAP model."""

    probability: RealGrid
    variance: RealGrid
    sd: RealGrid
    map_sample: ChainSample
    misfit_summary: dict  # chain index -> (min, mean, max) sample misfit RMS


# ---------------------------------------------------------------------------
# Likelihood terms

def log_likelihood_seismic(observed, synthetic, sigma_d):
    """Log of the diagonal-Gaussian data likelihood.

    -N/2 * ln(2 pi sigma^2) - sum((d - d(m))^2) / (2 sigma^2).
    """
    if sigma_d <= 0:
        raise ValueError("sigma_d must be > 0")
    if observed.dims.shape != synthetic.dims.shape:
        raise ValueError(
            f"observed dims {observed.dims.shape} != synthetic {synthetic.dims.shape}"
        )
    resid = observed.values - synthetic.values
    n = resid.size
    return float(
        -0.5 * n * math.log(2.0 * math.pi * sigma_d * sigma_d)
        - np.dot(resid.ravel(), resid.ravel()) / (2.0 * sigma_d * sigma_d)
    )


def log_likelihood_wells(grid, wells, weight):
    """Soft conditioning: -weight per observed well cell with the wrong facies."""
    i, j, k, f = wells.observation_arrays()
    if i.size == 0:
        return 0.0
    wells.validate_against(grid.dims)
    mismatches = int((grid.values[i, j, k] != f).sum())
    return -float(weight) * mismatches


def conditioning_accuracy(grid, wells):
    """Fraction of observed well cells whose facies matches the grid."""
    i, j, k, f = wells.observation_arrays()
    if i.size == 0:
        raise ValueError("well set has no observations")
    wells.validate_against(grid.dims)
    return float((grid.values[i, j, k] == f).sum() / i.size)


# ---------------------------------------------------------------------------
# Proposal and acceptance

def propose(latent, fraction, rng):
    """Redraw each latent entry from U(-1, 1) independently with
    probability `fraction`, keeping the rest.

    The kernel is symmetric: for any fixed changed-index set the forward
    and reverse densities are equal, so the Metropolis ratio needs no
    proposal correction.  fraction=0 is allowed as an explicit no-op.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("proposal fraction must lie in [0, 1]")
    shape = latent.shape
    mask = rng.random(shape) < fraction
    redraw = rng.uniform(-1.0, 1.0, size=shape)
    return LatentVector(np.where(mask, redraw, latent.values))


def metropolis_step(current_log_post, candidate_log_post, u):
    """Accept iff u < min(1, exp(candidate - current))."""
    if not math.isfinite(candidate_log_post):
        raise ValueError("candidate log-posterior must be finite")
    if candidate_log_post >= current_log_post:
        return True
    return u < math.exp(candidate_log_post - current_log_post)


# ---------------------------------------------------------------------------
# Chain driver

class _Evaluator:
    """Latent -> (log-posterior, cropped facies, synthetic cube, misfit RMS)."""

    def __init__(self, problem):
        self.problem = problem

    def __call__(self, latent):
        p = self.problem
        region = extract_patch(
            generate(p.network, latent), p.crop_origin, p.crop_size
        )
        facies = binarize(region, p.threshold)
        if p.forward_mode == FORWARD_IDENTITY:
            synthetic = SeismicCube(region.dims, region.values)
        else:
            elastic = facies_to_elastic(facies, p.properties, p.elastic_seed)
            synthetic = synthesize(reflectivity(elastic), p.wavelet)
        observed = p.likelihood.observed
        log_post = log_likelihood_seismic(observed, synthetic, p.likelihood.sigma_d)
        if p.likelihood.wells is not None and p.likelihood.well_weight > 0:
            log_post += log_likelihood_wells(
                facies, p.likelihood.wells, p.likelihood.well_weight
            )
        resid = observed.values - synthetic.values
        misfit = float(np.sqrt(np.mean(resid * resid)))
        return log_post, facies, synthetic, misfit


def chain_rng(seed, chain_index):
    """Deterministic per-chain generator derived from (base seed, index)."""
    return np.random.default_rng(np.random.SeedSequence((seed, chain_index)))


def run_chain(problem, chain_index):
    """Run one Metropolis chain; deterministic given (seed, chain_index).

    Per iteration: propose a latent, decode and forward-model it, then
    accept by the Metropolis criterion.  The trace records the current
    state after every iteration (row 0 is the initial state); samples are
    retained post burn-in every `thin` iterations.
    """
    p = problem
    evaluate = _Evaluator(p)
    rng = chain_rng(p.seed, chain_index)

    theta = random_latent(p.latent_shape, rng)
    log_post, facies, synthetic, misfit = evaluate(theta)
    state = ChainState(theta, facies, synthetic, log_post, 0, 0)

    iters = p.iterations
    burn_start = math.ceil(p.burn_in * iters)
    keep = lambda it: it >= burn_start and it % p.thin == 0

    samples = []
    best = ChainSample(0, theta, facies, log_post, misfit)
    if keep(0):
        samples.append(best)

    trace_lp = np.empty(iters + 1)
    trace_ar = np.empty(iters + 1)
    trace_mf = np.empty(iters + 1)
    trace_best = np.empty(iters + 1)
    trace_lp[0] = log_post
    trace_ar[0] = 0.0
    trace_mf[0] = misfit
    trace_best[0] = log_post

    for it in range(1, iters + 1):
        candidate = propose(state.latent, p.proposal_fraction, rng)
        cand_lp, cand_facies, cand_synth, cand_misfit = evaluate(candidate)
        if cand_lp > best.log_posterior:
            best = ChainSample(it, candidate, cand_facies, cand_lp, cand_misfit)
        u = rng.random()
        if metropolis_step(state.log_posterior, cand_lp, u):
            state = ChainState(candidate, cand_facies, cand_synth, cand_lp,
                               it, state.accepted + 1)
            misfit = cand_misfit
        else:
            state = ChainState(state.latent, state.facies, state.synthetic,
                               state.log_posterior, it, state.accepted)
        trace_lp[it] = state.log_posterior
        trace_ar[it] = state.accepted / it
        trace_mf[it] = misfit
        trace_best[it] = max(trace_best[it - 1], cand_lp)
        if keep(it):
            samples.append(ChainSample(it, state.latent, state.facies,
                                       state.log_posterior, misfit))

    return ChainResult(
        chain_index,
        tuple(samples),
        best,
        np.arange(iters + 1),
        trace_lp,
        trace_ar,
        trace_mf,
        trace_best,
    )


def _run_chain_task(args):
    problem, index = args
    return run_chain(problem, index)


def default_thread_count(chains):
    env = os.environ.get("FACINV_THREADS")
    if env:
        return max(1, min(int(env), chains))
    return max(1, min(os.cpu_count() or 1, chains))


def run_inversion(problem, threads=None):
    """Run all chains (in processes when threads > 1) and pool their samples.

    Results are aggregated in chain-index order, so the outcome is
    identical however the work was scheduled.
    """
    if threads is None:
        threads = default_thread_count(problem.chains)
    indices = list(range(problem.chains))
    if threads > 1 and problem.chains > 1:
        with ProcessPoolExecutor(max_workers=min(threads, problem.chains)) as pool:
            results = list(pool.map(_run_chain_task, [(problem, i) for i in indices]))
    else:
        results = [run_chain(problem, i) for i in indices]
    return posterior_stats(results), results


def posterior_stats(results_or_samples):
    """Cell-wise channel probability p, variance p(1-p), SD, and the MAP model.

    Accepts either ChainResults (keeping per-chain misfit summaries) or a
    flat sequence of ChainSamples.
    """
    items = list(results_or_samples)
    if not items:
        raise ValueError("no samples to summarize")
    if isinstance(items[0], ChainResult):
        samples = [s for r in items for s in r.samples]
        best = max((r.best for r in items), key=lambda s: s.log_posterior)
        misfit_summary = {
            r.chain_index: (
                float(min(s.misfit_rms for s in r.samples)),
                float(np.mean([s.misfit_rms for s in r.samples])),
                float(max(s.misfit_rms for s in r.samples)),
            )
            for r in items
            if r.samples
        }
    else:
        samples = items
        best = max(samples, key=lambda s: s.log_posterior)
        misfit_summary = {}
    if not samples:
        raise ValueError("no retained samples to summarize")

    dims = samples[0].facies.dims
    acc = np.zeros(dims.shape)
    for s in samples:
        acc += s.facies.values == CHANNEL
    prob = acc / len(samples)
    var = prob * (1.0 - prob)
    return PosteriorStats(
        RealGrid(dims, prob),
        RealGrid(dims, var),
        RealGrid(dims, np.sqrt(var)),
        best,
        misfit_summary,
    )
