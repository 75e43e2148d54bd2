"""Metadata pair matching: column similarity triples, domain search spaces,
threshold clustering, annealed meta-centers and pointer pooling."""
from importlib import resources
from pathlib import Path

from .catalog import (
    CatalogError,
    ColumnDescriptor,
    DatasetRef,
    MetadataKind,
    MetadataRecord,
    load_dataset,
    normalize_text,
    profile_column,
)
from .centers import AnnealingSchedule, MetaCenter, anneal_medoid, center_cost, exact_medoid
from .cognate import (
    AttributePair,
    ConnectionEvidence,
    FeatureVector,
    RegressionWeights,
    SimilarityTriple,
    cognate_map,
    generate_pairs,
    normalized_levenshtein,
    regression_similarity,
    token_jaccard,
    trigram_dice,
)
from .grouping import MetaCollection, MetaNode, SimilarityMatrix, build_similarity_matrix, stream_insert, threshold_cluster
from .partition import BulkingId, SearchSpace, assign_bulking_ids, divide, infer_domain_tags
from .pooling import (
    DomainChannel,
    LinearPointer,
    SearchCycleLog,
    VisitGraph,
    VisitRecord,
    export_graph,
    pool_centers,
    record_cycle,
    traverse,
)

__version__ = "0.1.0"


def corpus_paths() -> list[Path]:
    """Paths of the bundled synthetic CSV corpus."""
    root = resources.files("metapair").joinpath("data/corpus")
    return sorted(Path(str(p)) for p in root.iterdir() if p.name.endswith(".csv"))
