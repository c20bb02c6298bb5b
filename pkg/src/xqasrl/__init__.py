"""Cross-lingual QA-SRL projection toolkit.

Projects English predicate-argument questions and answers onto target-language
corpora through translation and word alignment, emits training / prompting
datasets from the result, scores predictions with span- and question-level
metrics, and hosts a curation service for building gold evaluation sets.
"""

__version__ = "0.1.0"

from .corpus import (  # noqa: F401
    ConlluParseError,
    PredicateInstance,
    PredicatePolicy,
    Sentence,
    Token,
    TokenSpan,
    candidate_predicates,
    parse_conllu,
)
from .dataset import (  # noqa: F401
    DatasetError,
    compute_stats,
    emit_icl_prompt,
    emit_training_examples,
    read_records,
    split_dataset,
    write_records,
)
from .evaluation import (  # noqa: F401
    EvalConfig,
    EvalError,
    EvalSummary,
    aggregate,
    evaluate_predicate,
    evaluate_records,
    match_arguments,
    token_iou,
)
from .projection import (  # noqa: F401
    ProjectedQA,
    ProjectedRecord,
    ProjectionConfig,
    project_corpus,
    project_record,
)
