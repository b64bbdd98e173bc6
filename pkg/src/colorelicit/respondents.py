"""Respondents: the agents that answer queries inside a sampling loop.

Three implementations share one interface: a synthetic oracle with a known
target distribution, a chat-completion HTTP client, and a deterministic
replay of previously recorded exchanges. ``answer`` returns both the
parsed answer and the raw reply text so chains can log full transcripts.
"""

from __future__ import annotations

import os
import threading
from dataclasses import dataclass
from typing import Iterable, Protocol, Sequence

import numpy as np
import requests

from .errors import (
    DegenerateTarget,
    MalformedAnswer,
    ReplayDivergence,
    ReplayExhausted,
    RespondentFailure,
    TransportError,
)
from .queries import (
    Answer,
    Choice,
    ColorCode,
    DimensionFill,
    DimensionValue,
    MatchJudgment,
    PairwiseChoice,
    Query,
    ReportColor,
    YesNo,
    canonical_answer_text,
    parse_answer,
    render_prompt,
)
from .targets import LatticeTarget


class Respondent(Protocol):
    def answer(self, query: Query) -> tuple[Answer, str]:
        """Answer a query, returning (parsed answer, raw reply text)."""
        ...


@dataclass
class RespondentConfig:
    """Settings for constructing a respondent.

    ``kind`` selects the implementation; the endpoint/model fields only
    matter for the llm kind. ``api_key_env`` names the environment variable
    holding the bearer token (never stored here, never logged).
    """

    kind: str = "oracle"  # oracle | llm | replay
    endpoint: str | None = None
    model: str | None = None
    temperature: float = 1.0
    max_retries: int = 3
    timeout: float = 60.0
    api_key_env: str | None = None
    max_concurrent: int = 4
    seed: int | None = None
    match_mode: str = "graded"  # graded | threshold (oracle MatchJudgment)
    match_threshold: float = 0.5

    def __post_init__(self):
        if self.kind not in ("oracle", "llm", "replay"):
            raise ValueError(f"unknown respondent kind {self.kind!r}")
        if self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")
        if self.max_retries < 0:
            raise ValueError(f"max retries must be >= 0, got {self.max_retries}")
        if self.match_mode not in ("graded", "threshold"):
            raise ValueError(f"unknown match mode {self.match_mode!r}")


def oracle_answer(
    q: Query,
    target: LatticeTarget,
    rng: np.random.Generator,
    match_mode: str = "graded",
    match_threshold: float = 0.5,
) -> Answer:
    """Ideal answer under a known target distribution.

    ReportColor draws an exact lattice sample. MatchJudgment says yes with
    probability density/max-density, so keeping the yeses is an exact
    rejection sampler (the threshold mode answers a hard indicator
    density >= fraction * max instead). PairwiseChoice picks option B with
    the Barker probability density(b) / (density(a) + density(b)).
    DimensionFill draws from the exact enumerated conditional.
    """
    if isinstance(q, ReportColor):
        return ColorCode(target.sample(rng))
    if isinstance(q, MatchJudgment):
        m = target.max_density()
        if not m > 0:
            raise DegenerateTarget("target has zero maximum density")
        d = target.density(q.color)
        if match_mode == "threshold":
            return YesNo(d >= match_threshold * m)
        return YesNo(rng.random() < d / m)
    if isinstance(q, PairwiseChoice):
        da = target.density(q.option_a)
        db = target.density(q.option_b)
        if da == 0.0 and db == 0.0:
            # Barker's rule is 0/0 here; a uniform pick preserves detailed
            # balance on the zero-density set.
            return Choice("B" if rng.random() < 0.5 else "A")
        return Choice("B" if rng.random() < db / (da + db) else "A")
    if isinstance(q, DimensionFill):
        fixed = {d: v for d, v in q.known}
        probs = target.conditional(q.missing, fixed)
        cdf = np.cumsum(probs)
        idx = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
        return DimensionValue(min(idx, probs.size - 1))
    raise TypeError(f"not a query: {q!r}")


class OracleRespondent:
    """Synthetic respondent drawing ideal answers from a known target."""

    def __init__(
        self,
        target: LatticeTarget,
        rng: np.random.Generator,
        match_mode: str = "graded",
        match_threshold: float = 0.5,
    ):
        self.target = target
        self.rng = rng
        self.match_mode = match_mode
        self.match_threshold = match_threshold

    def answer(self, query: Query) -> tuple[Answer, str]:
        ans = oracle_answer(
            query, self.target, self.rng, self.match_mode, self.match_threshold
        )
        return ans, canonical_answer_text(ans)


class LlmRespondent:
    """Chat-completion client speaking the plain messages wire format.

    Each query is one stateless completion: a single user message holding
    the rendered prompt. Malformed replies are re-asked with the identical
    prompt; ``max_retries`` counts total attempts, and exhausting them
    raises RespondentFailure. Transport problems raise TransportError
    immediately (the run supervisor decides whether to retry those).
    """

    def __init__(self, config: RespondentConfig, session: requests.Session | None = None):
        if config.kind != "llm":
            raise ValueError(f"LlmRespondent needs kind='llm', got {config.kind!r}")
        if not config.endpoint:
            raise ValueError("LlmRespondent needs an endpoint URL")
        if not config.model:
            raise ValueError("LlmRespondent needs a model name")
        self.config = config
        self.session = session or requests.Session()
        self._slots = threading.Semaphore(max(1, config.max_concurrent))

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.config.api_key_env:
            key = os.environ.get(self.config.api_key_env, "")
            if key:
                headers["Authorization"] = f"Bearer {key}"
        return headers

    def _complete(self, prompt: str) -> str:
        payload = {
            "model": self.config.model,
            "temperature": self.config.temperature,
            "messages": [{"role": "user", "content": prompt}],
        }
        with self._slots:
            try:
                resp = self.session.post(
                    self.config.endpoint,
                    json=payload,
                    headers=self._headers(),
                    timeout=self.config.timeout,
                )
            except requests.RequestException as exc:
                raise TransportError(f"request failed: {exc}") from exc
        if resp.status_code != 200:
            raise TransportError(f"endpoint returned HTTP {resp.status_code}")
        try:
            body = resp.json()
            content = body["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"unexpected completion payload: {exc}") from exc
        if not isinstance(content, str):
            raise TransportError("completion content is not text")
        return content

    def answer(self, query: Query) -> tuple[Answer, str]:
        prompt = render_prompt(query)
        attempts = self.config.max_retries
        last_raw = ""
        for _ in range(attempts):
            last_raw = self._complete(prompt)
            try:
                return parse_answer(query, last_raw), last_raw
            except MalformedAnswer:
                continue
        raise RespondentFailure(
            f"no parseable reply in {attempts} attempts; last reply: {last_raw!r}"
        )


@dataclass(frozen=True)
class ReplayEntry:
    query: Query
    answer: Answer
    raw: str


class ReplayRespondent:
    """Deterministic respondent replaying a recorded exchange sequence.

    Queries must arrive in the recorded order and match structurally;
    anything else is a divergence, not a guess.
    """

    def __init__(self, entries: Iterable[ReplayEntry]):
        self.entries: Sequence[ReplayEntry] = list(entries)
        self.cursor = 0

    def answer(self, query: Query) -> tuple[Answer, str]:
        if self.cursor >= len(self.entries):
            raise ReplayExhausted(f"replay log exhausted after {self.cursor} entries")
        entry = self.entries[self.cursor]
        if entry.query != query:
            raise ReplayDivergence(
                f"entry {self.cursor}: recorded {entry.query!r}, got {query!r}"
            )
        self.cursor += 1
        return entry.answer, entry.raw


def build_respondent(
    config: RespondentConfig,
    target: LatticeTarget | None = None,
    rng: np.random.Generator | None = None,
    entries: Iterable[ReplayEntry] | None = None,
) -> Respondent:
    """Construct the respondent named by a config."""
    if config.kind == "oracle":
        if target is None:
            raise ValueError("oracle respondent needs a target")
        if rng is None:
            rng = np.random.default_rng(config.seed)
        return OracleRespondent(target, rng, config.match_mode, config.match_threshold)
    if config.kind == "llm":
        return LlmRespondent(config)
    if entries is None:
        raise ValueError("replay respondent needs recorded entries")
    return ReplayRespondent(entries)
