from .cli import run_cli
from .report import AnalysisReport, render_report

__all__ = ["AnalysisReport", "render_report", "run_cli"]
