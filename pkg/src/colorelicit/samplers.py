"""The four elicitation methods, driven against any respondent.

Each run_* function executes one chain: a strictly sequential loop that
issues queries, records full per-iteration provenance, and collects one
sample per iteration (Direct Sampling keeps only the positives). Chains
never share RNG state; an experiment derives one seed stream per
(object, chain) pair from the master seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .colors import (
    DIMENSIONS,
    HUE_PERIOD,
    HslColor,
    LIGHT_MAX,
    SAT_MAX,
    canonicalize,
    canonicalize_dimension,
)
from .errors import RespondentFailure, TransportError
from .queries import (
    Answer,
    DimensionFill,
    MatchJudgment,
    PairwiseChoice,
    Query,
    ReportColor,
    render_prompt,
)
from .respondents import Respondent

METHODS = ("direct_prompting", "direct_sampling", "mcmc", "gibbs")

Timestamper = Callable[[], str]
ProposeFn = Callable[[HslColor, np.random.Generator], tuple[HslColor, str]]


@dataclass(frozen=True)
class SamplerConfig:
    method: str = "mcmc"
    iterations: int = 500
    chains: int = 4
    proposal_variance: float = 30.0  # per-dimension variance (covariance 30*I)
    uniform_jump: float = 0.1
    gibbs_order: tuple[str, ...] = ("h", "s", "l")
    gibbs_counting: str = "dimension"  # dimension | sweep
    master_seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(
                f"unknown method {self.method!r}; expected one of {METHODS}"
            )
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if self.chains < 1:
            raise ValueError(f"chains must be >= 1, got {self.chains}")
        if self.proposal_variance < 0:
            raise ValueError(f"proposal variance must be >= 0, got {self.proposal_variance}")
        if not 0.0 <= self.uniform_jump <= 1.0:
            raise ValueError(f"uniform jump must be in [0, 1], got {self.uniform_jump}")
        if tuple(sorted(self.gibbs_order)) != tuple(sorted(DIMENSIONS)):
            raise ValueError(f"gibbs order must permute {DIMENSIONS}, got {self.gibbs_order}")
        if self.gibbs_counting not in ("dimension", "sweep"):
            raise ValueError(f"unknown gibbs counting {self.gibbs_counting!r}")
        object.__setattr__(self, "gibbs_order", tuple(self.gibbs_order))


@dataclass(frozen=True)
class ChainRecord:
    """Full provenance of one sampler step."""

    chain_id: int
    iteration: int
    method: str
    state: HslColor
    proposal: HslColor | None
    proposal_kind: str  # gaussian | uniform | n/a
    presented_first: str  # candidate | current | n/a (which option was shown as A)
    query: Query
    query_rendered: str
    raw_answer: str
    answer: Answer
    result: HslColor
    accepted: bool | None
    flags: tuple[str, ...] = ()
    timestamp: str | None = None
    extras: dict = field(default_factory=dict, compare=False)


@dataclass
class ChainOutput:
    object: str
    method: str
    chain_id: int
    samples: list[HslColor]
    sample_iterations: list[int]
    records: list[ChainRecord]
    accept_count: int | None
    complete: bool
    failure: str | None = None


def init_state(rng: np.random.Generator) -> HslColor:
    """Uniform draw over the full integer lattice."""
    return HslColor(
        int(rng.integers(0, HUE_PERIOD)),
        int(rng.integers(0, SAT_MAX + 1)),
        int(rng.integers(0, LIGHT_MAX + 1)),
    )


def gaussian_perturbation(
    current: HslColor, rng: np.random.Generator, variance: float
) -> np.ndarray:
    """Raw (pre-canonicalization) Gaussian step with covariance variance*I."""
    step = rng.normal(0.0, math.sqrt(variance), size=3)
    return np.array(current.as_tuple(), dtype=float) + step


def propose(
    current: HslColor, rng: np.random.Generator, cfg: SamplerConfig
) -> tuple[HslColor, str]:
    """Mixture proposal: mostly a local Gaussian step, sometimes a uniform jump.

    With probability ``1 - uniform_jump`` the candidate is a Gaussian
    perturbation of the current state (canonicalized back onto the
    lattice); otherwise it is drawn uniformly from the whole color space.
    """
    if rng.random() < cfg.uniform_jump:
        return init_state(rng), "uniform"
    raw = gaussian_perturbation(current, rng, cfg.proposal_variance)
    return canonicalize(*raw), "gaussian"


def _failed(out: ChainOutput, exc: Exception) -> ChainOutput:
    out.complete = False
    out.failure = f"{type(exc).__name__}: {exc}"
    return out


def run_mcmc(
    obj: str,
    respondent: Respondent,
    cfg: SamplerConfig,
    rng: np.random.Generator,
    chain_id: int = 0,
    propose_fn: ProposeFn | None = None,
    initial_state: HslColor | None = None,
    keep_records: bool = True,
    timestamper: Timestamper | None = None,
) -> ChainOutput:
    """Pairwise-choice Markov chain (Barker acceptance via the respondent).

    Every iteration proposes a candidate, presents {current, candidate} in
    randomized positions, and moves to whichever option the respondent
    picks. The state is recorded every iteration, accepted or not.
    """
    state = initial_state if initial_state is not None else init_state(rng)
    out = ChainOutput(obj, "mcmc", chain_id, [], [], [], 0, True)
    for t in range(cfg.iterations):
        if propose_fn is not None:
            candidate, kind = propose_fn(state, rng)
        else:
            candidate, kind = propose(state, rng, cfg)
        candidate_first = bool(rng.random() < 0.5)
        a, b = (candidate, state) if candidate_first else (state, candidate)
        query = PairwiseChoice(obj, a, b)
        try:
            answer, raw = respondent.answer(query)
        except (RespondentFailure, TransportError) as exc:
            return _failed(out, exc)
        accepted = answer.option == ("A" if candidate_first else "B")
        result = candidate if accepted else state
        if accepted:
            out.accept_count += 1
        if keep_records:
            out.records.append(
                ChainRecord(
                    chain_id=chain_id,
                    iteration=t,
                    method="mcmc",
                    state=state,
                    proposal=candidate,
                    proposal_kind=kind,
                    presented_first="candidate" if candidate_first else "current",
                    query=query,
                    query_rendered=render_prompt(query),
                    raw_answer=raw,
                    answer=answer,
                    result=result,
                    accepted=accepted,
                    timestamp=timestamper() if timestamper else None,
                )
            )
        state = result
        out.samples.append(state)
        out.sample_iterations.append(t)
    return out


def run_gibbs(
    obj: str,
    respondent: Respondent,
    cfg: SamplerConfig,
    rng: np.random.Generator,
    chain_id: int = 0,
    initial_state: HslColor | None = None,
    keep_records: bool = True,
    timestamper: Timestamper | None = None,
) -> ChainOutput:
    """Cyclic dimension-fill chain.

    By default one iteration updates one dimension (H, S, L cyclically)
    and contributes one sample; with ``gibbs_counting='sweep'`` an
    iteration is a full three-dimension sweep. Out-of-range fill answers
    are wrapped/clamped rather than re-queried, and flagged.
    """
    state = initial_state if initial_state is not None else init_state(rng)
    out = ChainOutput(obj, "gibbs", chain_id, [], [], [], None, True)
    per_iteration = len(cfg.gibbs_order) if cfg.gibbs_counting == "sweep" else 1
    step = 0
    for t in range(cfg.iterations):
        for _ in range(per_iteration):
            dim = cfg.gibbs_order[step % len(cfg.gibbs_order)]
            step += 1
            query = DimensionFill.from_state(obj, state, dim)
            try:
                answer, raw = respondent.answer(query)
            except (RespondentFailure, TransportError) as exc:
                return _failed(out, exc)
            value, out_of_range = canonicalize_dimension(dim, answer.value)
            result = state.with_value(dim, value)
            if keep_records:
                out.records.append(
                    ChainRecord(
                        chain_id=chain_id,
                        iteration=t,
                        method="gibbs",
                        state=state,
                        proposal=None,
                        proposal_kind="n/a",
                        presented_first="n/a",
                        query=query,
                        query_rendered=render_prompt(query),
                        raw_answer=raw,
                        answer=answer,
                        result=result,
                        accepted=None,
                        flags=("fill_out_of_range",) if out_of_range else (),
                        timestamp=timestamper() if timestamper else None,
                    )
                )
            state = result
        out.samples.append(state)
        out.sample_iterations.append(t)
    return out


def run_direct_sampling(
    obj: str,
    respondent: Respondent,
    cfg: SamplerConfig,
    rng: np.random.Generator,
    chain_id: int = 0,
    keep_records: bool = True,
    timestamper: Timestamper | None = None,
) -> ChainOutput:
    """Uniform proposals filtered by the respondent's match judgments.

    Each iteration draws one uniform color and keeps it iff the answer is
    yes, so the retained set can be smaller than ``iterations``.
    """
    out = ChainOutput(obj, "direct_sampling", chain_id, [], [], [], None, True)
    for t in range(cfg.iterations):
        color = init_state(rng)
        query = MatchJudgment(obj, color)
        try:
            answer, raw = respondent.answer(query)
        except (RespondentFailure, TransportError) as exc:
            return _failed(out, exc)
        if keep_records:
            out.records.append(
                ChainRecord(
                    chain_id=chain_id,
                    iteration=t,
                    method="direct_sampling",
                    state=color,
                    proposal=None,
                    proposal_kind="n/a",
                    presented_first="n/a",
                    query=query,
                    query_rendered=render_prompt(query),
                    raw_answer=raw,
                    answer=answer,
                    result=color,
                    accepted=None,
                    timestamp=timestamper() if timestamper else None,
                )
            )
        if answer.value:
            out.samples.append(color)
            out.sample_iterations.append(t)
    return out


def run_direct_prompting(
    obj: str,
    respondent: Respondent,
    cfg: SamplerConfig,
    chain_id: int = 0,
    keep_records: bool = True,
    timestamper: Timestamper | None = None,
) -> ChainOutput:
    """Independent full-color reports, one per iteration."""
    out = ChainOutput(obj, "direct_prompting", chain_id, [], [], [], None, True)
    query = ReportColor(obj)
    rendered = render_prompt(query)
    for t in range(cfg.iterations):
        try:
            answer, raw = respondent.answer(query)
        except (RespondentFailure, TransportError) as exc:
            return _failed(out, exc)
        color = answer.color
        if keep_records:
            out.records.append(
                ChainRecord(
                    chain_id=chain_id,
                    iteration=t,
                    method="direct_prompting",
                    state=color,
                    proposal=None,
                    proposal_kind="n/a",
                    presented_first="n/a",
                    query=query,
                    query_rendered=rendered,
                    raw_answer=raw,
                    answer=answer,
                    result=color,
                    accepted=None,
                    timestamp=timestamper() if timestamper else None,
                )
            )
        out.samples.append(color)
        out.sample_iterations.append(t)
    return out


def chain_seed_sequence(master_seed: int, object_index: int, chain_index: int) -> np.random.SeedSequence:
    """Deterministic per-chain seed stream (master, object, chain)."""
    return np.random.SeedSequence([int(master_seed), int(object_index), int(chain_index)])


RespondentFactory = Callable[[str, int, np.random.Generator], Respondent]


def run_chain(
    obj: str,
    respondent: Respondent,
    cfg: SamplerConfig,
    rng: np.random.Generator,
    chain_id: int = 0,
    keep_records: bool = True,
    timestamper: Timestamper | None = None,
) -> ChainOutput:
    """Dispatch one chain of the configured method."""
    if cfg.method == "mcmc":
        return run_mcmc(
            obj, respondent, cfg, rng, chain_id,
            keep_records=keep_records, timestamper=timestamper,
        )
    if cfg.method == "gibbs":
        return run_gibbs(
            obj, respondent, cfg, rng, chain_id,
            keep_records=keep_records, timestamper=timestamper,
        )
    if cfg.method == "direct_sampling":
        return run_direct_sampling(
            obj, respondent, cfg, rng, chain_id,
            keep_records=keep_records, timestamper=timestamper,
        )
    return run_direct_prompting(
        obj, respondent, cfg, chain_id,
        keep_records=keep_records, timestamper=timestamper,
    )


def run_experiment(
    objects: Sequence[str],
    cfg: SamplerConfig,
    respondent_factory: RespondentFactory,
    on_chain: Callable[[ChainOutput], None] | None = None,
    keep_records: bool = True,
    timestamper: Timestamper | None = None,
) -> list[ChainOutput]:
    """Run ``cfg.chains`` chains per object; failed chains are kept, flagged.

    Chain seeds derive from (master seed, object index, chain index), so
    the whole experiment replays bit-identically from one master seed. The
    sampler and the respondent get separate child streams. ``on_chain``
    fires after each chain (e.g. to persist its log).
    """
    if not objects:
        raise ValueError("objects must be nonempty")
    outputs: list[ChainOutput] = []
    for oi, obj in enumerate(objects):
        for ci in range(cfg.chains):
            ss = chain_seed_sequence(cfg.master_seed, oi, ci)
            sampler_ss, respondent_ss = ss.spawn(2)
            rng = np.random.default_rng(sampler_ss)
            respondent = respondent_factory(obj, ci, np.random.default_rng(respondent_ss))
            output = run_chain(
                obj, respondent, cfg, rng, chain_id=ci,
                keep_records=keep_records, timestamper=timestamper,
            )
            outputs.append(output)
            if on_chain is not None:
                on_chain(output)
    return outputs
