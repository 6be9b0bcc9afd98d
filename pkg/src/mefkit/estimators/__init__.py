"""Statistical MEF estimation: regime switching, time-varying regression,
and series diagnostics."""
from .diagnostics import DiagnosticsReport, diagnostics, normality_test, unit_root_test
from .dlr import DlrFit, FilterDivergence, dlr_mef, fit_dlr
from .msdr import RegimeFit, fit_msdr, kim_smoother, msdr_mef, select_k
from .prep import DiffPair, prepare_series
from .rolling import rolling_estimate, window_tiles

__all__ = [
    "DiagnosticsReport", "DiffPair", "DlrFit", "FilterDivergence", "RegimeFit",
    "diagnostics", "dlr_mef", "fit_dlr", "fit_msdr", "kim_smoother", "msdr_mef",
    "normality_test", "prepare_series", "rolling_estimate", "select_k",
    "unit_root_test", "window_tiles",
]
