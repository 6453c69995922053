"""
Relative p-norm error reports, cross-discriminator analysis and figures.
"""
from evaluation.metrics import NORMS, mean_relative_error, relative_error
from evaluation.reports import (
    ErrorReport,
    ErrorRow,
    evaluate_report,
    load_report,
    parse_table_csv,
    render_table,
    save_report,
)
from evaluation.cross import (
    CrossAnalysisRecord,
    cross_discriminator_analysis,
    load_cross_records,
    save_cross_records,
)
from evaluation.plots import plot_discriminator_outputs, plot_error_curves

__all__ = [
    "NORMS",
    "CrossAnalysisRecord",
    "ErrorReport",
    "ErrorRow",
    "cross_discriminator_analysis",
    "evaluate_report",
    "load_cross_records",
    "load_report",
    "mean_relative_error",
    "parse_table_csv",
    "plot_discriminator_outputs",
    "plot_error_curves",
    "relative_error",
    "render_table",
    "save_cross_records",
    "save_report",
]
