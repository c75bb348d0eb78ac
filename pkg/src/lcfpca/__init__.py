"""lcfpca: cluster periodic light curves via penalized splines and functional PCA."""

__version__ = "0.1.0"

from .catalog import (RawLightCurve, StarRecord, cluster_summary,
                      load_catalog, load_lightcurves, save_catalog)
from .phase_fold import (PhasedCurve, extend, fold, linear_resample,
                         phase_grid, process_all)
from .bspline_basis import (BasisSystem, build_basis, eval_basis,
                            gram_matrix, penalty_matrix)
from .smoother import (FunctionalDataSet, PenalizedSmoother, SmoothFit,
                       default_lambda_grid, fit_penalized, gcv_score,
                       select_lambda, smooth_all)
from .fpca import FpcaResult, fpca, project, variance_explained
from .cluster import (ClusterAssignment, Dendrogram, cut, export_dendrogram,
                      import_dendrogram, ward_linkage)
from .validity import (ConnectivityReport, ConfusionTable, confusion_matrix,
                       connectivity, percent_correct, select_k)
from .simgen import SimGroup, SimScenario, generate, group_mean_curves, scenario
from .pipeline import PipelineConfig, run_pipeline, run_simulate

__all__ = [
    "RawLightCurve", "StarRecord", "cluster_summary", "load_catalog",
    "load_lightcurves", "save_catalog",
    "PhasedCurve", "fold", "extend", "linear_resample", "phase_grid",
    "process_all",
    "BasisSystem", "build_basis", "eval_basis", "gram_matrix",
    "penalty_matrix",
    "FunctionalDataSet", "PenalizedSmoother", "SmoothFit",
    "default_lambda_grid", "fit_penalized", "gcv_score", "select_lambda",
    "smooth_all",
    "FpcaResult", "fpca", "project", "variance_explained",
    "ClusterAssignment", "Dendrogram", "cut", "export_dendrogram",
    "import_dendrogram", "ward_linkage",
    "ConnectivityReport", "ConfusionTable", "confusion_matrix",
    "connectivity", "percent_correct", "select_k",
    "SimGroup", "SimScenario", "generate", "group_mean_curves", "scenario",
    "PipelineConfig", "run_pipeline", "run_simulate",
    "__version__",
]
