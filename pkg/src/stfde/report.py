"""Report records and their CSV/JSON serialization."""
import csv
import json
from dataclasses import asdict, dataclass
from typing import Optional

BENCHMARK_COLUMNS = ("m", "n", "method", "ell", "restart", "tol",
                     "avg_iterations", "sup_error", "wall_time_s", "converged")
SPECTRUM_COLUMNS = ("matrix", "re", "im")


@dataclass
class BenchmarkRecord:
    m: int
    n: int
    method: str
    ell: int
    restart: int
    tol: float
    avg_iterations: float
    sup_error: Optional[float]
    wall_time_s: float
    converged: bool


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _parse_float(text):
    return None if text == "" else float(text)


def write_benchmark_csv(path, records):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(BENCHMARK_COLUMNS)
        for rec in records:
            writer.writerow([_fmt(getattr(rec, c)) for c in BENCHMARK_COLUMNS])


def read_benchmark_csv(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != BENCHMARK_COLUMNS:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return [
            BenchmarkRecord(
                m=int(row["m"]),
                n=int(row["n"]),
                method=row["method"],
                ell=int(row["ell"]),
                restart=int(row["restart"]),
                tol=float(row["tol"]),
                avg_iterations=float(row["avg_iterations"]),
                sup_error=_parse_float(row["sup_error"]),
                wall_time_s=float(row["wall_time_s"]),
                converged=row["converged"] == "true",
            )
            for row in reader
        ]


def write_benchmark_json(path, records, metadata=None):
    with open(path, "w") as fh:
        json.dump({"metadata": metadata or {}, "records": [asdict(r) for r in records]}, fh, indent=2)


def read_benchmark_json(path):
    with open(path) as fh:
        data = json.load(fh)
    return [BenchmarkRecord(**r) for r in data["records"]]


def write_spectrum_csv(path, eigenvalues):
    """``eigenvalues`` maps a matrix tag to an array of complex eigenvalues."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SPECTRUM_COLUMNS)
        for tag, values in eigenvalues.items():
            for z in values:
                writer.writerow([tag, _fmt(float(z.real)), _fmt(float(z.imag))])


def read_spectrum_csv(path):
    out = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.setdefault(row["matrix"], []).append(complex(float(row["re"]), float(row["im"])))
    return out


def write_summary_csv(path, rows):
    if not rows:
        open(path, "w").close()
        return
    columns = list(rows[0])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])


def format_table(records):
    """Aligned plain-text rendering of benchmark records."""
    header = ("m", "n", "method", "ell", "avg_iter", "sup_error", "time_s", "ok")
    lines = [header]
    for r in records:
        lines.append((
            str(r.m), str(r.n), r.method, str(r.ell), f"{r.avg_iterations:.3f}",
            "-" if r.sup_error is None else f"{r.sup_error:.4e}",
            f"{r.wall_time_s:.3f}", "yes" if r.converged else "NO",
        ))
    widths = [max(len(row[i]) for row in lines) for i in range(len(header))]
    return "\n".join("  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in lines)
