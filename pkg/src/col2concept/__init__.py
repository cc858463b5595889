"""col2concept: maximum-likelihood semantic concept annotation for table columns.

Annotates each column of a tabular dataset with ranked concepts (city,
population, email, ...) by likelihood estimation over an ensemble of
reference data sources, backed by four purpose-built indexes for
categorical, numeric, mixed, and co-occurring data.
"""

from .belief import (
    ConceptRelations,
    SharedBelief,
    load_embeddings,
    load_hierarchy_edges,
    load_synonym_sets,
    share,
)
from .cooccur_index import CooccurrenceIndex
from .entity_index import EntityConceptIndex
from .errors import (
    AllEmpty,
    BothNumeric,
    C2Error,
    CorruptIndex,
    CyclicHierarchy,
    DataError,
    EmptyCaseSet,
    EmptySample,
    EmptyTable,
    EmptyUniverse,
    IndexStoreError,
    InvalidEpsilon,
    InvalidRange,
    MalformedFile,
    MalformedLine,
    NoEvidence,
    NoParseableValues,
    UnknownSource,
)
from .estimator import (
    AnnotationResult,
    Annotator,
    ColumnAnnotation,
    ColumnCandidates,
    EstimatorConfig,
    annotate,
)
from .evaluate import EvaluationCase, evaluate_cases, load_cases, load_synonym_lookup
from .ingest import (
    CorpusManifest,
    EntityMention,
    IndexRecord,
    ManifestSource,
    NumericColumnRange,
    PatternColumn,
    TupleMention,
    build_concept_universe,
    ingest_kg_file,
    ingest_manifest,
    ingest_table_file,
    read_table,
)
from .model import (
    Column,
    ColumnKind,
    ConceptDistribution,
    SourceId,
    Table,
    classify_column,
    normalize_concept,
    normalize_entity,
    parse_number,
)
from .numeric_index import IntervalCountStructure
from .pattern_index import PatternTree, generalize_pattern, symbol_signature
from .store import BuildSummary, IndexBundle, build_indexes, load_bundle, save_bundle

__version__ = "0.1.0"

__all__ = [
    "AllEmpty",
    "AnnotationResult",
    "Annotator",
    "BothNumeric",
    "BuildSummary",
    "C2Error",
    "Column",
    "ColumnAnnotation",
    "ColumnCandidates",
    "ColumnKind",
    "ConceptDistribution",
    "ConceptRelations",
    "CooccurrenceIndex",
    "CorpusManifest",
    "CorruptIndex",
    "CyclicHierarchy",
    "DataError",
    "EmptyCaseSet",
    "EmptySample",
    "EmptyTable",
    "EmptyUniverse",
    "EntityConceptIndex",
    "EntityMention",
    "EstimatorConfig",
    "EvaluationCase",
    "IndexBundle",
    "IndexRecord",
    "IndexStoreError",
    "IntervalCountStructure",
    "InvalidEpsilon",
    "InvalidRange",
    "MalformedFile",
    "MalformedLine",
    "ManifestSource",
    "NoEvidence",
    "NoParseableValues",
    "NumericColumnRange",
    "PatternColumn",
    "PatternTree",
    "SharedBelief",
    "SourceId",
    "Table",
    "TupleMention",
    "UnknownSource",
    "annotate",
    "build_concept_universe",
    "build_indexes",
    "classify_column",
    "evaluate_cases",
    "generalize_pattern",
    "ingest_kg_file",
    "ingest_manifest",
    "ingest_table_file",
    "load_bundle",
    "load_cases",
    "load_embeddings",
    "load_hierarchy_edges",
    "load_synonym_lookup",
    "load_synonym_sets",
    "normalize_concept",
    "normalize_entity",
    "parse_number",
    "read_table",
    "save_bundle",
    "share",
    "symbol_signature",
]
