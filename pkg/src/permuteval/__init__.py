"""Word-order perturbation harness for measuring how a translation system
trades robustness against faithfulness."""

from .corpus import (ConlluError, ParallelExample, PosClass, Sentence, Token,
                     detokenize, load_parallel, parse_conllu, parse_conllu_file,
                     pos_class)
from .deptree import DepNode, DepTree, Traversal, build_tree, mirror, rightmost_spine, traverse
from .evaluate import (AggregateRow, Excluded, ScoreRecord, aggregate, correlations,
                       find_flips, gap_distribution, length_buckets,
                       perturbation_similarity_matrix, score_corpus, score_example)
from .metrics import bleu4, levenshtein_distance, levenshtein_sim, spearman
from .perturb import (DETERMINISTIC_PERTURBATIONS, PerturbationId, PerturbationOutcome,
                      apply, apply_derived, derive_seed)
from .translate import (CacheMissError, TranslationError, TranslatorConfig,
                        cache_key, cache_lookup, cache_store, translate_batch)

__version__ = "0.1.0"
