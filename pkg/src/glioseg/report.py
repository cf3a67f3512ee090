"""Report document assembly and serialization (JSON and CSV).

Scores are printed at 6 significant digits in JSON and 6 decimal places in
CSV; serialization is byte-stable under serialize -> parse -> serialize.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .metrics import AggregateReport, CaseScores, LesionwiseParams, RegionScores, aggregate_cases, metric_row_names

TOOL_NAME = "glioseg"
TOOL_VERSION = "0.1.0"

REGION_TITLES = {"ET": "Enhancing Tumor", "TC": "Tumor Core", "WT": "Whole Tumor"}


def _sig6(x: float) -> float:
    return float(f"{x:.6g}")


def _tol_key(tol: float) -> str:
    return f"{tol:g}"


@dataclass(frozen=True)
class ReportDocument:
    cases: tuple[CaseScores, ...]
    aggregate: AggregateReport
    tolerances: tuple[float, ...]
    lw_params: LesionwiseParams

    @classmethod
    def from_cases(cls, cases, tolerances, lw_params: LesionwiseParams) -> "ReportDocument":
        cases = tuple(sorted(cases, key=lambda c: c.case_id))
        return cls(
            cases=cases,
            aggregate=aggregate_cases(list(cases)),
            tolerances=tuple(sorted(float(t) for t in tolerances)),
            lw_params=lw_params,
        )

    def to_json_bytes(self) -> bytes:
        doc = {
            "tool": TOOL_NAME,
            "version": TOOL_VERSION,
            "config": {
                "tolerances_mm": list(self.tolerances),
                "connectivity": self.lw_params.connectivity,
                "dilation_radius_vox": self.lw_params.dilation_radius_vox,
                "min_lesion_size_vox": self.lw_params.min_lesion_size_vox,
            },
            "cases": [
                {
                    "case_id": c.case_id,
                    "regions": {
                        tag: {
                            "dice": _sig6(rs.dice),
                            "lw_dice": _sig6(rs.lw_dice),
                            "nsd": {_tol_key(t): _sig6(rs.nsd[t]) for t in self.tolerances},
                            "lw_nsd": {_tol_key(t): _sig6(rs.lw_nsd[t]) for t in self.tolerances},
                        }
                        for tag, rs in c.regions.items()
                    },
                }
                for c in self.cases
            ],
            "aggregate": {
                "case_count": self.aggregate.case_count,
                "rows": {
                    row: {
                        tag: (
                            {"mean": _sig6(self.aggregate.means[row][tag]), "std": _sig6(self.aggregate.stds[row][tag])}
                            if row in self.aggregate.stds
                            else {"mean": _sig6(self.aggregate.means[row][tag])}
                        )
                        for tag in REGION_TITLES
                    }
                    for row in metric_row_names(self.tolerances)
                },
            },
        }
        return (json.dumps(doc, indent=2) + "\n").encode()

    @classmethod
    def from_json_bytes(cls, data: bytes) -> "ReportDocument":
        doc = json.loads(data.decode())
        tolerances = tuple(float(t) for t in doc["config"]["tolerances_mm"])
        lw = LesionwiseParams(
            connectivity=doc["config"]["connectivity"],
            dilation_radius_vox=doc["config"]["dilation_radius_vox"],
            min_lesion_size_vox=doc["config"]["min_lesion_size_vox"],
        )
        cases = []
        for c in doc["cases"]:
            regions = {
                tag: RegionScores(
                    dice=r["dice"],
                    lw_dice=r["lw_dice"],
                    nsd={float(k): v for k, v in r["nsd"].items()},
                    lw_nsd={float(k): v for k, v in r["lw_nsd"].items()},
                )
                for tag, r in c["regions"].items()
            }
            cases.append(CaseScores(case_id=c["case_id"], regions=regions))
        agg = doc["aggregate"]
        means = {row: {tag: cell["mean"] for tag, cell in cells.items()} for row, cells in agg["rows"].items()}
        stds = {
            row: {tag: cell["std"] for tag, cell in cells.items()}
            for row, cells in agg["rows"].items()
            if all("std" in cell for cell in cells.values())
        }
        aggregate = AggregateReport(case_count=agg["case_count"], means=means, stds=stds)
        return cls(cases=tuple(cases), aggregate=aggregate, tolerances=tolerances, lw_params=lw)

    def to_csv_bytes(self) -> bytes:
        rows = metric_row_names(self.tolerances)
        lines = ["case_id,region," + ",".join(rows)]
        for c in self.cases:
            for tag in REGION_TITLES:
                rs = c.regions[tag]
                values = []
                for row in rows:
                    if row == "Dice coefficient":
                        v = rs.dice
                    elif row == "LW Dice":
                        v = rs.lw_dice
                    else:
                        tol = min(self.tolerances, key=lambda t: abs(t - float(row.split()[-2])))
                        v = rs.lw_nsd[tol] if row.startswith("LW") else rs.nsd[tol]
                    values.append(f"{v:.6f}")
                lines.append(f"{c.case_id},{tag}," + ",".join(values))
        lines.append("")
        lines.append("Metric," + ",".join(REGION_TITLES.values()))
        for row in rows:
            cells = []
            for tag in REGION_TITLES:
                mean = self.aggregate.means[row][tag]
                if row in self.aggregate.stds:
                    cells.append(f"{mean:.6f}±{self.aggregate.stds[row][tag]:.6f}")
                else:
                    cells.append(f"{mean:.6f}")
            lines.append(f"{row}," + ",".join(cells))
        return ("\n".join(lines) + "\n").encode("utf-8")


def emit_report(doc: ReportDocument, format: str = "json") -> bytes:
    if format == "json":
        return doc.to_json_bytes()
    if format == "csv":
        return doc.to_csv_bytes()
    raise ValueError(f"format must be 'json' or 'csv', got {format!r}")
