"""Measure agreement between dictionary definitions, LLM definitions and embeddings."""

__version__ = "0.1.0"

from .consistency import (ConsistencyGrid, ConsistencyReport, consistency_matrix,
                          distance_vector, pearson, space_consistency)
from .ingest import (DefinitionRecord, EmbeddingTable, SourceId, SourceKind, VectorFormat,
                     clean_intersection, dump_vectors, load_definitions, load_vectors)
from .lexicon import (LexiconEntry, Pos, Tier, TierConfig, assign_pos, load_lexicon,
                      sample_tiers)
from .report import Format, Stratum, StratumTable, emit, stratify
from .surface import (LengthStats, MatchHistogram, MatchResult, edit_distance, lcs,
                      length_correlation, length_stats, match_histogram, norm_edit_distance)
from .vectorspace import (DistanceKind, PairDistanceTable, cosine_distance,
                          euclidean_distance, pair_distances, topk_outliers)
