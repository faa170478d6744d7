"""Subject-verb number agreement evaluation for language models.

Scores templated minimal pairs with three metrics — the classic correct/
incorrect indicator over a dataset's own verbs (TSE), the same indicator
averaged over a large verb-lemma lexicon (EW, systematicity), and the
correct-inflection probability mass ratio (MW, likely behavior) — plus
percentile-restricted top-p/bottom-p variants with boundary interpolation
and coverage diagnostics. Model probabilities arrive through a backend
contract (dump files, HTTP scoring endpoints, or synthetic toy
distributions), so no model runtime is required in-process.
"""

__version__ = "0.1.0"

from .backend import (
    DumpBackend,
    HttpBackend,
    SyntheticBackend,
    TemplateDistribution,
    TokenProbRecord,
    read_dump,
    write_dump,
)
from .lexicon import InflectionPair, Lexicon, filter_by_vocabulary, inflect, load_lemma_list
from .metrics import (
    ScoreReport,
    TemplateScore,
    aggregate,
    classic_tse_score,
    ew_score,
    mw_score,
    score_template,
    tse_indicator,
)
from .report import RunConfig, run_score, run_sweep, run_topk
from .templates import (
    NormalizationPolicy,
    TemplateInstance,
    load_minimal_pairs,
    load_template_file,
    normalize,
)
from .truncation import PercentileCutoff, membership, sweep, truncated_scores

__all__ = [
    "DumpBackend",
    "HttpBackend",
    "InflectionPair",
    "Lexicon",
    "NormalizationPolicy",
    "PercentileCutoff",
    "RunConfig",
    "ScoreReport",
    "SyntheticBackend",
    "TemplateDistribution",
    "TemplateInstance",
    "TemplateScore",
    "TokenProbRecord",
    "aggregate",
    "classic_tse_score",
    "ew_score",
    "filter_by_vocabulary",
    "inflect",
    "load_lemma_list",
    "load_minimal_pairs",
    "load_template_file",
    "membership",
    "mw_score",
    "normalize",
    "read_dump",
    "run_score",
    "run_sweep",
    "run_topk",
    "score_template",
    "sweep",
    "truncated_scores",
    "tse_indicator",
    "write_dump",
]
