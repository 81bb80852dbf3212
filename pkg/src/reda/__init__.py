"""Random text perturbation (REDA) for text-pair corpora."""

__version__ = "0.1.0"

from .engine import (EditOp, RedaConfig, apply_op, augment, derive_rng, make_rng, num_edits,
                     random_deletion, random_insertion, random_mix, random_swap,
                     synonym_replacement)
from .errors import (EmptyCorpus, EmptyText, IndexOutOfRange, InsufficientExamples, OddSize,
                     ParseError, RedaError)
from .lexicon import SynonymLexicon, eligible_positions, load_lexicon, synonyms_of
from .pipeline import (AugmentationReport, Corpus, PairExample, augment_corpus, augment_pair,
                       balanced_split, corpus_stats, read_corpus, write_corpus)
from .text import LanguageMode, TokenSeq, detokenize, register_words, tokenize
