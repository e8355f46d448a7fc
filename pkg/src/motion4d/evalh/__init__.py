from .protocol import EvalReport, eval_geometry, eval_rec_mse
from .report import report_read, report_write

__all__ = ["EvalReport", "eval_geometry", "eval_rec_mse", "report_read", "report_write"]
