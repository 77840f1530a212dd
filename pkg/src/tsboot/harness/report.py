"""Report container and deterministic file emission.

Layout under ``output_dir``::

    manifest.json            seed, version, config echo, exclusions, warnings, file list
    report.md                every table in markdown
    <table>.csv              every table as CSV
    pivots/<label>.csv       replicate,param,pivot at full precision
    density/<label>_<param>.csv   x,density
    estimates/<label>.csv    raw fitted parameters (when a table is built from them)

Numbers in tables are written with 6 significant digits.  Wall time is kept
on the report object only, so repeated runs give byte-identical files.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..bootstrap import PivotSample, write_pivots_csv
from ..stats import DensityCurve, write_density_csv


@dataclass
class Table:
    name: str
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)

    def add(self, *row):
        if len(row) != len(self.columns):
            raise ValueError(f"table {self.name}: expected {len(self.columns)} cells, got {len(row)}")
        self.rows.append(tuple(row))


@dataclass
class ExperimentReport:
    experiment: str
    seed: int
    version: str
    config: dict
    tables: list[Table] = field(default_factory=list)
    samples: dict[str, PivotSample] = field(default_factory=dict)
    densities: dict[str, DensityCurve] = field(default_factory=dict)
    estimates: dict[str, Table] = field(default_factory=dict)
    exclusions: dict[str, int] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    wall_time: float = 0.0
    files: list[str] = field(default_factory=list)

    def table(self, name: str) -> Table:
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(name)


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if v == 0:
            return "0"  # avoid "-0"
        return f"{v:.6g}"
    return str(v)


def _write_table_csv(table: Table, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(table.columns)
        for row in table.rows:
            w.writerow([fmt(v) for v in row])


def _markdown(table: Table) -> str:
    lines = [f"## {table.name}", "", "| " + " | ".join(table.columns) + " |"]
    lines.append("|" + "---|" * len(table.columns))
    lines += ["| " + " | ".join(fmt(v) for v in row) + " |" for row in table.rows]
    return "\n".join(lines) + "\n"


def emit_report(report: ExperimentReport, output_dir: str | Path, formats=("csv", "markdown")) -> list[str]:
    """Write the report; returns the emitted paths relative to ``output_dir``."""
    bad = set(formats) - {"csv", "markdown"}
    if bad:
        raise ValueError(f"unknown report formats {sorted(bad)}")
    out = Path(output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise OSError(f"output directory {out} is not writable: {exc}") from None

    files: list[str] = []

    def rel(p: Path) -> str:
        files.append(p.relative_to(out).as_posix())
        return files[-1]

    (out / "pivots").mkdir(exist_ok=True)
    for label in sorted(report.samples):
        path = out / "pivots" / f"{label}.csv"
        write_pivots_csv(report.samples[label], path)
        rel(path)
    if report.densities:
        (out / "density").mkdir(exist_ok=True)
    for label in sorted(report.densities):
        path = out / "density" / f"{label}.csv"
        write_density_csv(report.densities[label], path)
        rel(path)
    if report.estimates:
        (out / "estimates").mkdir(exist_ok=True)
    for label in sorted(report.estimates):
        t = report.estimates[label]
        path = out / "estimates" / f"{label}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(t.columns)
            for row in t.rows:
                w.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
        rel(path)

    if "csv" in formats:
        for t in report.tables:
            path = out / f"{t.name}.csv"
            _write_table_csv(t, path)
            rel(path)
    if "markdown" in formats:
        path = out / "report.md"
        head = f"# {report.experiment}\n\nmaster_seed: {report.seed}  \nversion: {report.version}\n\n"
        body = "\n".join(_markdown(t) for t in report.tables)
        warn = "".join(f"- {w}\n" for w in report.warnings)
        path.write_text(head + body + ("\n## warnings\n\n" + warn if warn else ""))
        rel(path)

    manifest = {
        "experiment": report.experiment,
        "master_seed": report.seed,
        "version": report.version,
        "config": report.config,
        "exclusions": dict(sorted(report.exclusions.items())),
        "warnings": report.warnings,
        "files": files + ["manifest.json"],
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    files.append("manifest.json")
    report.files = files
    return files
