from .log import debug, log
from .paths import curves_dir, data_dir, project_root, reports_dir

__all__ = ["debug", "log", "curves_dir", "data_dir", "project_root", "reports_dir"]
