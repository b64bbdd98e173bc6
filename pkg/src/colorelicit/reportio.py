"""Alignment report export: machine CSV plus a human-readable table."""

from __future__ import annotations

import csv
from pathlib import Path

from .diagnostics import AlignmentReport


def export_report(
    report: AlignmentReport,
    csv_path: str | Path,
    text_path: str | Path | None = None,
) -> Path:
    """Write one row per object, one (hellinger, mode) column pair per method.

    The CSV keeps full float precision. The text rendering rounds to two
    decimals for the distributional metric and one for the mode distance,
    formats cells as "hellinger (mode)", and stars the per-row minimum of
    each metric.
    """
    if not report.rows:
        raise ValueError("cannot export an empty report")
    objects = report.objects()
    methods = report.methods()
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with csv_path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        header = ["object"]
        for method in methods:
            header += [f"hellinger_{method}", f"mode_distance_{method}"]
        writer.writerow(header)
        for obj in objects:
            row: list[str] = [obj]
            for method in methods:
                try:
                    r = report.row(obj, method)
                    row += [repr(r.hellinger), repr(r.mode_distance)]
                except KeyError:
                    row += ["", ""]
            writer.writerow(row)
    if text_path is not None:
        _write_text_table(report, objects, methods, Path(text_path))
    return csv_path


def _write_text_table(
    report: AlignmentReport,
    objects: list[str],
    methods: list[str],
    path: Path,
) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    col_width = max([len(m) for m in methods] + [14]) + 2
    name_width = max([len(o) for o in objects] + [6]) + 2
    lines = ["".ljust(name_width) + "".join(m.ljust(col_width) for m in methods)]
    for obj in objects:
        cells = []
        values = {}
        for method in methods:
            try:
                r = report.row(obj, method)
                values[method] = (r.hellinger, r.mode_distance)
            except KeyError:
                values[method] = None
        present = {m: v for m, v in values.items() if v is not None}
        best_h = min((v[0] for v in present.values()), default=None)
        best_m = min((v[1] for v in present.values()), default=None)
        for method in methods:
            v = values[method]
            if v is None:
                cells.append("-".ljust(col_width))
                continue
            h_txt = f"{v[0]:.2f}"
            m_txt = f"{v[1]:.1f}"
            # A star marks the per-row minimum of each metric.
            if len(present) > 1 and v[0] == best_h:
                h_txt += "*"
            if len(present) > 1 and v[1] == best_m:
                m_txt += "*"
            cells.append(f"{h_txt} ({m_txt})".ljust(col_width))
        lines.append(obj.ljust(name_width) + "".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
