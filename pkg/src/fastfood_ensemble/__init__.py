"""Fastfood-projected random-subspace ensembles for deep-feature fusion.

Concatenated deep-feature vectors are projected into N low-dimensional
subspaces by structured Fastfood blocks (Hadamard, permutation and
diagonal factors applied via the fast Walsh-Hadamard transform), one
simple CART tree is trained per subspace, and predictions are fused by a
weighted average of member class probabilities. Dense random-kitchen-sink
oracles and a benchmark harness back the speed/memory claims.
"""

from .dataio import (
    FeatureMatrix,
    ProvenanceSpan,
    SplitSpec,
    concat_features,
    read_features,
    read_features_csv,
    slice_by_provenance,
    split_features,
    stratified_subsample,
    synth_mixture,
    write_features,
    write_features_csv,
)
from .ensemble import (
    EnsembleConfig,
    EnsembleMember,
    EnsembleModel,
    ensemble_predict,
    ensemble_predict_proba,
    load_model,
    member_weights,
    save_model,
    train_ensemble,
)
from .errors import (
    ConsistencyError,
    CorruptionError,
    DimensionError,
    FfelError,
    FormatError,
    InputError,
    InsufficientSamplesError,
    OracleSizeError,
    ParameterError,
    ParseError,
    SplitError,
)
from .fastfood import (
    DENSE_ORACLE_CAP,
    FastfoodBlock,
    FastfoodStack,
    NonlinearityMode,
    apply_nonlinearity,
    dense_materialize,
    dense_rks,
    exact_rbf,
    fwht,
    hadamard_matrix,
    next_pow2,
    project,
    sample_block,
    sample_phases,
)
from .evalbench import (
    BenchReport,
    EvalReport,
    GridCellResult,
    GridSearchResult,
    GridSpec,
    bench_projection,
    evaluate,
    grid_search,
    stratified_kfold,
)
from .rng import Stream, derive_seed, mix64
from .tree import (
    DecisionTree,
    TreeParams,
    fit_tree,
    gini_impurity,
    tree_apply,
    tree_predict,
    tree_predict_proba,
)

__version__ = "0.1.0"
