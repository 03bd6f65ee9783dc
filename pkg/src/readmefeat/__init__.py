"""Build README corpora and score functionality lists extracted from them."""

from .agree import RatingSheet, cohen_kappa, rating_distribution
from .align import (
    MatchResult,
    Scheme,
    SchemeScores,
    SimilarityGraph,
    build_similarity_graph,
    graph_from_matrix,
    match_many_to_one,
    match_one_to_one,
    scheme_scores,
    weight_many_to_one,
)
from .corpus import (
    CorpusRecord,
    FeatureList,
    License,
    SplitSpec,
    load_corpus,
    make_inference_prompt,
    make_training_example,
    parse_feature_list,
    save_corpus,
    scrub_pii,
    split_corpus,
    strip_markdown,
)
from .embed import EmbedderSpec, HashEmbedder, HttpEmbedder, cosine, make_embedder
from .evaluate import EvalConfig, MetricReport, evaluate_records, render_report, run_evaluation
from .textmetrics import rouge_l, rouge_n, semantic_score, tokenize

__version__ = "0.1.0"
