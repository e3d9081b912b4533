# src/interface/report.py
"""Analysis reports and their JSON / aligned-text renderings."""

import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np
from rich.console import Console
from rich.table import Table

from src import __version__
from src.mediation.analysis import UNTESTABLE_ASSUMPTIONS

logger = logging.getLogger(__name__)

TOOL_NAME = "pathmed"


@dataclass
class AnalysisReport:
    """Everything one CLI run produced, as plain JSON-ready data."""

    command: str
    inputs: Dict[str, Any] = field(default_factory=dict)
    settings: Dict[str, Any] = field(default_factory=dict)
    sections: Dict[str, Any] = field(default_factory=dict)
    version: str = __version__

    def to_data(self) -> Dict[str, Any]:
        """Plain JSON-ready data with the tool header first."""
        data = {
            "tool": TOOL_NAME,
            "version": self.version,
            "command": self.command,
            "inputs": self.inputs,
            "settings": self.settings,
        }
        data.update(self.sections)
        return _plain(data)


def _plain(value):
    """Convert dataclasses, enums and numpy values to JSON-ready Python."""
    if hasattr(value, "__dataclass_fields__"):
        return _plain(asdict(value))
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    return value


def _dump(value, indent: int, depth: int) -> str:
    pad = " " * (indent * (depth + 1))
    end = " " * (indent * depth)
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            return "null"
        return format(value, ".17g")
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [
            f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {_dump(value[k], indent, depth + 1)}"
            for k in sorted(value)
        ]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(value, list):
        if not value:
            return "[]"
        items = [f"{pad}{_dump(v, indent, depth + 1)}" for v in value]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def to_json(data: Dict[str, Any]) -> str:
    """Key-sorted JSON with 17 significant digits for every float."""
    return _dump(_plain(data), 2, 0) + "\n"


# --- report builders ------------------------------------------------------


def interval_entry(ci) -> Dict[str, Any]:
    """One row of the confidence-limit table."""
    return {
        "method": ci.method.value,
        "point": ci.point,
        "lower": ci.lower,
        "upper": ci.upper,
        "level": ci.level,
        "se": ci.se,
        "meta": dict(ci.meta),
    }


def mediation_section(fit, data, dec, verdict, assumptions, advisories) -> Dict[str, Any]:
    """Mediation section: paths, effects, causal steps and diagnostics."""
    return {
        "variables": {"x": fit.x, "m": fit.m, "y": fit.y},
        "n": fit.n,
        "coefficients": fit.coefficients(),
        "r2": {"eq1": fit.eq1.r2, "eq2": fit.eq2.r2, "eq3": fit.eq3.r2},
        "standardized": fit.standardized(data),
        "effects": asdict(dec),
        "causal_steps": {
            "steps": list(verdict.step_results),
            "alpha": verdict.alpha,
            "outcome": verdict.outcome.value,
            "failed_step": verdict.failed_step,
            "note": verdict.note,
        },
        "consistency": verdict.consistency.value,
        "diagnostics": {
            "interaction": {
                "estimate": assumptions.interaction_coef,
                "se": assumptions.interaction_se,
                "t": assumptions.interaction_t,
                "p": assumptions.interaction_p,
                "significant": assumptions.interaction_significant,
            },
            "residual_correlation": assumptions.residual_correlation,
        },
        "advisories": list(advisories),
        "untestable_assumptions": list(UNTESTABLE_ASSUMPTIONS),
    }


def pathfit_section(result, null_stats, indices, verdicts) -> Dict[str, Any]:
    """Path-fit section: estimates, statistics, indices and effects."""
    return {
        "estimates": [asdict(e) for e in result.estimates],
        "statistics": asdict(result.statistics),
        "null_model": asdict(null_stats),
        "indices": indices.as_dict(),
        "verdicts": [
            {
                "index": v.index,
                "value": v.value,
                "verdict": v.verdict.value,
                "threshold": v.threshold,
                "note": v.note,
            }
            for v in verdicts
        ],
        "effects": result.effects,
        "implied_covariance": {
            "variables": list(result.matrices.variables),
            "matrix": result.implied.tolist(),
        },
        "sample_covariance": {
            "variables": list(result.moments.columns),
            "matrix": result.moments.cov.tolist(),
        },
    }


def model_section(spec, roles, canonical: str) -> Dict[str, Any]:
    """Model section: variables, roles and canonical text."""
    return {
        "variables": list(spec.variables),
        "roles": {name: role.value for name, role in roles.items()},
        "regressions": [
            {"outcome": r.outcome, "predictors": list(r.predictors)} for r in spec.regressions
        ],
        "covariances": [list(pair) for pair in spec.covariances],
        "canonical": canonical,
    }


# --- text rendering -------------------------------------------------------


def _fmt(value, digits=4) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        if not math.isfinite(value):
            return "n/a"
        return f"{value:.{digits}f}" if abs(value) >= 1e-3 or value == 0 else f"{value:.3e}"
    return str(value)


def _kv_table(title: str, rows: Dict[str, Any]) -> Table:
    table = Table(title=title, title_justify="left", show_header=False, box=None, pad_edge=False)
    table.add_column("name", style="bold")
    table.add_column("value", justify="right")
    for key, value in rows.items():
        table.add_row(str(key), _fmt(value))
    return table


def _render_mediation(console: Console, data: Dict[str, Any]):
    med = data["mediation"]
    coeffs = Table(title="Regression paths", title_justify="left")
    for col in ("path", "estimate", "se", "t", "p"):
        coeffs.add_column(col, justify="left" if col == "path" else "right")
    for name, row in med["coefficients"].items():
        coeffs.add_row(name, *(_fmt(row[k]) for k in ("estimate", "se", "t", "p")))
    console.print(coeffs)
    console.print(_kv_table("Effects", med["effects"]))
    steps = med["causal_steps"]
    console.print(
        _kv_table(
            "Causal steps",
            {
                "step 1 (X -> Y)": steps["steps"][0],
                "step 2 (X -> M)": steps["steps"][1],
                "step 3 (M -> Y | X)": steps["steps"][2],
                "step 4 (|total| > |direct|)": steps["steps"][3],
                "outcome": steps["outcome"],
                "consistency": med["consistency"],
            },
        )
    )
    if steps["note"]:
        console.print(f"  {steps['note']}")
    diag = med["diagnostics"]
    console.print(
        _kv_table(
            "Diagnostics",
            {
                "X*M interaction estimate": diag["interaction"]["estimate"],
                "X*M interaction p": diag["interaction"]["p"],
                "residual correlation (eq2, eq3)": diag["residual_correlation"],
            },
        )
    )
    for msg in med["advisories"]:
        console.print(f"[warning] {msg}")
    console.print("Assumptions that cannot be tested from these data:")
    for item in med["untestable_assumptions"]:
        console.print(f"  - {item}")


def _render_inference(console: Console, data: Dict[str, Any]):
    inf = data["inference"]
    console.print(_kv_table("Mediated effect", inf["sobel"]))
    table = Table(title="Confidence limits", title_justify="left")
    for col in ("method", "point", "lower", "upper", "level", "se"):
        table.add_column(col, justify="left" if col == "method" else "right")
    for entry in inf["intervals"]:
        table.add_row(
            entry["method"],
            *(_fmt(entry[k]) for k in ("point", "lower", "upper", "level", "se")),
        )
    console.print(table)


def _render_pathfit(console: Console, data: Dict[str, Any]):
    fit = data["pathfit"]
    est = Table(title="Parameter estimates", title_justify="left")
    for col in ("parameter", "kind", "estimate", "se", "z", "p"):
        est.add_column(col, justify="left" if col in ("parameter", "kind") else "right")
    for row in fit["estimates"]:
        est.add_row(
            row["label"], row["kind"], *(_fmt(row[k]) for k in ("estimate", "se", "z", "p_value"))
        )
    console.print(est)
    stats = fit["statistics"]
    console.print(
        _kv_table(
            "Model chi-square",
            {
                "chi-square": stats["chi_square"],
                "df": stats["df"],
                "p": stats["p_value"],
                "null chi-square": fit["null_model"]["chi_square"],
                "null df": fit["null_model"]["df"],
                "iterations": stats["iterations"],
            },
        )
    )
    verdicts = Table(title="Fit indices", title_justify="left")
    for col in ("index", "value", "verdict", "threshold", "note"):
        verdicts.add_column(col, justify="right" if col == "value" else "left")
    for v in fit["verdicts"]:
        verdicts.add_row(v["index"], _fmt(v["value"]), v["verdict"], v["threshold"], v["note"])
    console.print(verdicts)
    if fit["effects"]:
        eff = Table(title="Effects", title_justify="left")
        for col in ("from", "to", "direct", "indirect", "total"):
            eff.add_column(col, justify="left" if col in ("from", "to") else "right")
        for row in fit["effects"]:
            eff.add_row(row["from"], row["to"], *(_fmt(row[k]) for k in ("direct", "indirect", "total")))
        console.print(eff)


def _render_model(console: Console, data: Dict[str, Any]):
    model = data["model"]
    roles = Table(title="Variable roles", title_justify="left")
    roles.add_column("variable")
    roles.add_column("role")
    for name in model["variables"]:
        roles.add_row(name, model["roles"][name])
    console.print(roles)
    console.print("Canonical model:")
    console.print(model["canonical"].rstrip("\n"))


def _render_simulation(console: Console, data: Dict[str, Any]):
    sim = data["simulation"]
    console.print(
        _kv_table(
            "Study",
            {
                "true effect": sim["true_effect"],
                "replications used": sim["replications_used"],
                "skipped": sim["skipped"],
                "Sobel rejection rate": sim["sobel_rejection_rate"],
                "max identity error": sim["max_identity_error"],
            },
        )
    )
    est = Table(title="Estimators", title_justify="left")
    for col in ("estimator", "mean", "bias", "empirical sd", "mean se", "se rel. bias"):
        est.add_column(col, justify="left" if col == "estimator" else "right")
    for name, row in sim["estimators"].items():
        est.add_row(
            name,
            *(_fmt(row[k]) for k in ("mean", "bias", "empirical_sd", "mean_se", "se_relative_bias")),
        )
    console.print(est)
    meth = Table(title="Interval methods", title_justify="left")
    for col in ("method", "coverage", "miss below", "miss above", "rejection", "mean width"):
        meth.add_column(col, justify="left" if col == "method" else "right")
    for name, row in sim["methods"].items():
        meth.add_row(
            name,
            *(_fmt(row[k]) for k in ("coverage", "miss_below", "miss_above", "rejection_rate", "mean_width")),
        )
    console.print(meth)


def render_report(report: AnalysisReport, fmt: str = "json") -> str:
    """Render as key-sorted JSON or aligned text tables."""
    data = report.to_data()
    if fmt == "json":
        return to_json(data)
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    buffer = io.StringIO()
    # cell values are file paths and labels, never markup or emoji codes
    console = Console(
        file=buffer,
        width=110,
        color_system=None,
        force_terminal=False,
        soft_wrap=False,
        markup=False,
        emoji=False,
        highlight=False,
    )
    console.print(f"{TOOL_NAME} {data['version']} - {data['command']}")
    if data["inputs"]:
        console.print(_kv_table("Inputs", _flatten(data["inputs"])))
    if "model" in data:
        _render_model(console, data)
    if "mediation" in data:
        _render_mediation(console, data)
    if "inference" in data:
        _render_inference(console, data)
    if "pathfit" in data:
        _render_pathfit(console, data)
    if "simulation" in data:
        _render_simulation(console, data)
    return buffer.getvalue()


def _flatten(mapping: Dict[str, Any], prefix: str = "") -> Dict[str, Any]:
    flat: Dict[str, Any] = {}
    for key, value in mapping.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, prefix=f"{name}."))
        elif isinstance(value, list):
            flat[name] = ", ".join(str(v) for v in value)
        else:
            flat[name] = value
    return flat
