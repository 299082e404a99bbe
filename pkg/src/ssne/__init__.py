"""Link prediction with sparse structural network embeddings (SSNE) and classic similarity baselines."""

from .embedding import (FeatureMatrix, SvdFactors, TargetMatrix, embed, feature_matrix,
                        shifted_log, truncated_svd)
from .errors import NumericalError, ParseError, ResourceError, SSNEError, ValidationError
from .evaluation import (AucResult, auc, compare_methods, exact_auc, grid_experiment)
from .generators import generate_ba, generate_ws
from .graph_core import (Graph, GraphStats, TrainTestSplit, graph_stats, load_edge_list,
                         read_edge_list, sample_nonexistent_edge, split_train_test)
from .scoring import SCORER_NAMES, make_scorer, ssne_score
from .snham import SnhamMatrix, row_normalize, snham_matrix

__version__ = "0.1.0"
