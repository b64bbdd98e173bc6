"""Recovering color representations from black-box respondents.

The package embeds a respondent (synthetic oracle, chat-completion
endpoint, or replay log) in four elicitation procedures over the integer
HSL color space, and measures what came back: convergence diagnostics and
distribution/mode alignment against a reference.
"""

from .colors import (
    GridHistogram,
    HslColor,
    KdeEstimate,
    bin_index,
    canonicalize,
    histogram,
    hsl_to_rgb,
    kde,
)
from .config import RunConfig, load_config
from .diagnostics import (
    AlignmentReport,
    RhatTrace,
    build_alignment_report,
    cumulative_rhat,
    gelman_rubin,
    hellinger,
    mode_distance,
    mode_of,
    rhat_vector,
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
    parse_answer,
    render_prompt,
)
from .respondents import (
    LlmRespondent,
    OracleRespondent,
    ReplayRespondent,
    RespondentConfig,
    oracle_answer,
)
from .samplers import (
    ChainOutput,
    ChainRecord,
    SamplerConfig,
    init_state,
    propose,
    run_direct_prompting,
    run_direct_sampling,
    run_experiment,
    run_gibbs,
    run_mcmc,
)
from .targets import LatticeTarget, MixtureComponent, TargetSpec

__version__ = "0.1.0"

__all__ = [
    "AlignmentReport",
    "Answer",
    "ChainOutput",
    "ChainRecord",
    "Choice",
    "ColorCode",
    "DimensionFill",
    "DimensionValue",
    "GridHistogram",
    "HslColor",
    "KdeEstimate",
    "LatticeTarget",
    "LlmRespondent",
    "MatchJudgment",
    "MixtureComponent",
    "OracleRespondent",
    "PairwiseChoice",
    "Query",
    "ReplayRespondent",
    "ReportColor",
    "RespondentConfig",
    "RhatTrace",
    "RunConfig",
    "SamplerConfig",
    "TargetSpec",
    "YesNo",
    "bin_index",
    "build_alignment_report",
    "canonicalize",
    "cumulative_rhat",
    "gelman_rubin",
    "hellinger",
    "histogram",
    "hsl_to_rgb",
    "init_state",
    "kde",
    "load_config",
    "mode_distance",
    "mode_of",
    "oracle_answer",
    "parse_answer",
    "propose",
    "render_prompt",
    "rhat_vector",
    "run_direct_prompting",
    "run_direct_sampling",
    "run_experiment",
    "run_gibbs",
    "run_mcmc",
]
