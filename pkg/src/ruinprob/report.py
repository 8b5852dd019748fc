"""Writers for the output bundle: curve CSVs, validation table and certificate JSON.

Numbers are written with ``%.12g`` so reruns of the same configuration give
byte-identical files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .grid import GridSolution
from .montecarlo import write_validation_csv
from .pipeline import BoundResult, SolveResult, ValidationResult, curve_points


def _fmt(v) -> str:
    return f"{float(v):.12g}"


def _write_rows(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(header)
        for row in rows:
            out.writerow([_fmt(v) for v in row])


def write_bound(out: Path, b: BoundResult) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / "bound.json"
    path.write_text(json.dumps(b.to_dict(), indent=2, sort_keys=True) + "\n")
    return path


def band_rows(result: SolveResult):
    """Rows ``z, i, psi_tilde, lower, upper, tail_bound`` on the curve grid, per interest node."""
    z = curve_points(result)
    eps = result.certificate.total_error
    bound = np.asarray(result.bound.bound(z))
    for i in result.interest_nodes:
        psi = np.atleast_1d(result.psi(z, float(i)))
        for zz, p, tb in zip(z, psi, bound):
            yield zz, i, p, max(0.0, p - eps), min(1.0, p + eps), tb


def write_solution(out: Path, result: SolveResult) -> list[Path]:
    """Solution files, band curves and the certificate (without validation)."""
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "solution.csv", out / "solution.json", out / "band.csv"]
    sol = result.solution
    if isinstance(sol, GridSolution):
        sol.to_csv(paths[0])
        sol.to_json(paths[1])
    else:
        sol.to_csv(paths[0], curve_points(result))
        sol.to_json(paths[1], result.report)
    _write_rows(paths[2], ("z", "i", "psi_tilde", "lower", "upper", "tail_bound"), band_rows(result))
    paths.append(write_certificate(out, result))
    return paths


def write_certificate(out: Path, result: SolveResult, validation: ValidationResult | None = None) -> Path:
    doc = {
        "certificate": result.certificate.to_dict(),
        "bound": result.bound.to_dict(),
        "config": {k: v for k, v in result.cfg.to_dict().items() if k != "out"},
    }
    if validation is not None:
        doc["validation"] = validation.to_dict()
    path = out / "certificate.json"
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path


def write_validation(out: Path, result: SolveResult, validation: ValidationResult) -> list[Path]:
    """MC table in the shared schema plus a comparison table with the pass/fail verdicts."""
    out.mkdir(parents=True, exist_ok=True)
    mc = out / "validation.csv"
    write_validation_csv(mc, [r.estimate for r in validation.rows])
    cmp_path = out / "comparison.csv"
    with open(cmp_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["z", "i", "psi_tilde", "p_hat", "lo", "hi", "band", "deviation", "pass"])
        for r in validation.rows:
            e = r.estimate
            w.writerow([_fmt(r.z), _fmt(r.i), _fmt(r.psi_tilde), _fmt(e.p_hat), _fmt(e.lower),
                        _fmt(e.upper), _fmt(r.band), _fmt(r.deviation), int(r.passed)])
    return [mc, cmp_path, write_certificate(out, result, validation)]
