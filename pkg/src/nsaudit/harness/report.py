"""Report emission: CSV rows with a fixed header, 17 significant digits,
config echo at the top and K / A0 / verdict comments at the bottom."""

import numpy as np

from ..audit import AuditRecord

HEADER = ",".join(AuditRecord.CSV_FIELDS)


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def report_lines(report) -> list:
    lines = []
    for key, val in sorted(report.config_echo.items()):
        lines.append(f"# cfg:{key}={val}")
    lines.append(HEADER)
    for rec in report.records:
        lines.append(",".join(_fmt(getattr(rec, f)) for f in AuditRecord.CSV_FIELDS))
    lines.append(f"# K={_fmt(report.K) if np.isfinite(report.K) else 'NOT-CONTRACTIVE'}")
    lines.append(f"# A0={_fmt(report.A0)}")
    lines.append(f"# verdicts={report.verdict_string()}")
    return lines


def write_report(path, report):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(report_lines(report)) + "\n")


def read_report(path):
    """Returns (header comments, column dict of float arrays, footer comments)."""
    head, rows, tail = [], [], []
    columns = None
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                (tail if columns is not None else head).append(line)
            elif columns is None:
                columns = line.split(",")
            else:
                rows.append([float(v) for v in line.split(",")])
    if columns is None:
        raise ValueError(f"no header row in {path}")
    data = {c: np.array([r[i] for r in rows]) for i, c in enumerate(columns)}
    return head, data, tail
