"""Configuration, persistence, report emission and the command-line surface."""

from .config import RunConfig, dump_config, load_config, parse_config
from .report import read_report, report_lines, write_report
from .snapshots import load_snapshot, load_table, save_snapshot, save_table

__all__ = [
    "RunConfig",
    "load_config",
    "parse_config",
    "dump_config",
    "save_snapshot",
    "load_snapshot",
    "save_table",
    "load_table",
    "write_report",
    "read_report",
    "report_lines",
]
