"""Report emission and loading: CSV matrices, JSON reports, run manifests.

Every number is written with the shortest round-trip decimal representation,
so re-running a scenario from a manifest's resolved configuration reproduces
all data files byte for byte.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from . import __version__ as _version
from .squeeze_core import StateReport

__all__ = [
    "ConfigError",
    "resolved_config_dict",
    "scenario_config_from_dict",
    "emit_result",
    "load_report",
    "report_to_dict",
    "report_from_dict",
    "read_matrix_csv",
]


class ConfigError(ValueError):
    """Configuration rejected; the message names the offending key path."""


def _fmt(x) -> str:
    return repr(float(x))


def _write_rows(path: Path, rows) -> None:
    # mode labels contain commas, so write real CSV with minimal quoting
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    path.write_text(buf.getvalue(), encoding="utf-8")


def _write_matrix_csv(path: Path, matrix: np.ndarray, labels) -> None:
    matrix = np.asarray(matrix)
    rows = [["mode"] + list(labels)]
    for label, row in zip(labels, matrix):
        rows.append([label] + [_fmt(v) for v in row])
    _write_rows(path, rows)


def _write_long_csv(path: Path, matrix: np.ndarray, labels) -> None:
    matrix = np.asarray(matrix)
    rows = [["row", "col", "value"]]
    for i, li in enumerate(labels):
        for j, lj in enumerate(labels):
            rows.append([li, lj, _fmt(matrix[i, j])])
    _write_rows(path, rows)


def read_matrix_csv(path):
    """Read a matrix CSV back as (matrix, labels)."""
    with open(path, newline="", encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    labels = rows[0][1:]
    matrix = np.array([[float(v) for v in row[1:]] for row in rows[1:]])
    return matrix, labels


def _complex_to_lists(matrix: np.ndarray):
    matrix = np.asarray(matrix, dtype=complex)
    return {
        "re": [[float(v.real) for v in row] for row in matrix],
        "im": [[float(v.imag) for v in row] for row in matrix],
    }


def _complex_from_lists(obj) -> np.ndarray:
    return np.array(obj["re"], dtype=float) + 1j * np.array(obj["im"], dtype=float)


def report_to_dict(report: StateReport) -> dict:
    return {
        "mode_labels": list(report.mode_labels),
        "var_X1": _complex_to_lists(report.var_X1),
        "var_X2": _complex_to_lists(report.var_X2),
        "scalar_var": [float(report.scalar_var[0]), float(report.scalar_var[1])],
        "cross_cov": _complex_to_lists(report.cross_cov),
        "nbar_matrix": _complex_to_lists(report.nbar_matrix),
        "nbar_total": float(report.nbar_total),
        "number_variance": float(report.number_variance),
        "number_covariance": float(report.number_covariance),
        "pair_matrix": _complex_to_lists(report.pair_matrix),
        "squeezing_db_per_mode": [float(v) for v in report.squeezing_db_per_mode],
    }


def report_from_dict(data: dict) -> StateReport:
    return StateReport(
        var_X1=_complex_from_lists(data["var_X1"]),
        var_X2=_complex_from_lists(data["var_X2"]),
        scalar_var=(data["scalar_var"][0], data["scalar_var"][1]),
        cross_cov=_complex_from_lists(data["cross_cov"]),
        nbar_matrix=_complex_from_lists(data["nbar_matrix"]),
        nbar_total=data["nbar_total"],
        number_variance=data["number_variance"],
        number_covariance=data["number_covariance"],
        pair_matrix=_complex_from_lists(data["pair_matrix"]),
        squeezing_db_per_mode=np.array(data["squeezing_db_per_mode"], dtype=float),
        mode_labels=list(data["mode_labels"]),
    )


def _geometry_dict(geom) -> dict:
    return {
        "wavelength": float(geom.wavelength),
        "waist_w0": float(geom.waist_w0),
        "focus_z": float(geom.focus_z),
        "rayleigh_zR": float(geom.rayleigh_zR),
    }


def resolved_config_dict(cfg) -> dict:
    """Fully-materialized scenario configuration as a JSON-ready dict."""
    coupling = cfg.coupling
    pump1 = {
        "geometry": _geometry_dict(coupling.pump1.geometry),
        "coefficients": None
        if coupling.pump1.coefficients is None
        else _complex_to_lists(np.atleast_2d(coupling.pump1.coefficients)),
    }
    pump2 = None
    if not coupling.single_pump and coupling.pump2 is not coupling.pump1:
        pump2 = {
            "geometry": _geometry_dict(coupling.pump2.geometry),
            "coefficients": None
            if coupling.pump2.coefficients is None
            else _complex_to_lists(np.atleast_2d(coupling.pump2.coefficients)),
        }
    out = {
        "scenario": cfg.name,
        "n_target": float(cfg.n_target),
        "seed_gain": None if cfg.seed_gain is None else float(cfg.seed_gain),
        "convergence_check": bool(cfg.convergence_check),
        "basis": {"ell_max": coupling.basis.ell_max, "p_max": coupling.basis.p_max},
        "coupling": {
            "interaction": coupling.interaction.value,
            "single_pump": bool(coupling.single_pump),
            "medium": {
                "cell_length": float(coupling.medium.cell_length),
                "center_z": float(coupling.medium.center_z),
                "chi_profile": coupling.medium.chi_profile,
                "strength": float(coupling.medium.strength),
                "gain_scale": float(coupling.medium.gain_scale),
            },
            "pump": pump1,
            "pump2": pump2,
            "collection": _geometry_dict(coupling.collection),
        },
    }
    if cfg.scan_grid is not None:
        out["grid"] = {
            "pump": [float(v) for v in cfg.scan_grid["pump"]],
            "collection": [float(v) for v in cfg.scan_grid["collection"]],
            "points": int(cfg.scan_grid.get("points", 8)),
        }
    return out


def _require_keys(obj: dict, allowed, path: str) -> None:
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"unknown key {path}{key}")


def _geometry_from_dict(data: dict, default, path: str):
    from .modes import BeamGeometry

    _require_keys(data, {"wavelength", "waist_w0", "focus_z", "rayleigh_zR"}, path)
    kwargs = {
        "wavelength": data.get("wavelength", default.wavelength),
        "waist_w0": data.get("waist_w0", default.waist_w0),
        "focus_z": data.get("focus_z", default.focus_z),
    }
    if "rayleigh_zR" in data:
        kwargs["rayleigh_zR"] = data["rayleigh_zR"]
    try:
        return BeamGeometry(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{path[:-1]}: {exc}") from exc


def scenario_config_from_dict(data: dict):
    """Build a fully-resolved ScenarioConfig from a (partial) JSON dict.

    Unknown keys are rejected with the path of the offending key; omitted
    fields take the named scenario's stock values.
    """
    from .coupling import CouplingConfig, InteractionType, MediumConfig, PumpSpec
    from .modes import build_basis
    from .scenarios import SCENARIO_NAMES, default_config

    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    _require_keys(
        data,
        {"scenario", "n_target", "seed_gain", "convergence_check", "basis",
         "coupling", "grid"},
        "",
    )
    name = data.get("scenario")
    if name not in SCENARIO_NAMES:
        raise ConfigError(f"unknown scenario {name!r} (key: scenario)")

    basis_spec = data.get("basis", {})
    _require_keys(basis_spec, {"ell_max", "p_max"}, "basis.")
    cfg = default_config(
        name,
        ell_max=int(basis_spec.get("ell_max", 1)),
        p_max=int(basis_spec.get("p_max", 2)),
    )
    if "n_target" in data:
        if not data["n_target"] > 0:
            raise ConfigError("n_target must be > 0 (key: n_target)")
        cfg.n_target = float(data["n_target"])
    if data.get("seed_gain") is not None:
        cfg.seed_gain = float(data["seed_gain"])
    if "convergence_check" in data:
        cfg.convergence_check = bool(data["convergence_check"])

    coupling_spec = data.get("coupling", {})
    _require_keys(
        coupling_spec,
        {"interaction", "single_pump", "medium", "pump", "pump2", "collection"},
        "coupling.",
    )
    base = cfg.coupling
    interaction = base.interaction
    if "interaction" in coupling_spec:
        try:
            interaction = InteractionType(coupling_spec["interaction"])
        except ValueError as exc:
            raise ConfigError(
                f"unknown interaction {coupling_spec['interaction']!r} "
                "(key: coupling.interaction)"
            ) from exc
    med_spec = coupling_spec.get("medium", {})
    _require_keys(
        med_spec,
        {"cell_length", "center_z", "chi_profile", "strength", "gain_scale"},
        "coupling.medium.",
    )
    try:
        medium = MediumConfig(
            cell_length=float(med_spec.get("cell_length", base.medium.cell_length)),
            center_z=float(med_spec.get("center_z", base.medium.center_z)),
            chi_profile=med_spec.get("chi_profile", base.medium.chi_profile),
            strength=float(med_spec.get("strength", base.medium.strength)),
            gain_scale=float(med_spec.get("gain_scale", base.medium.gain_scale)),
        )
    except ValueError as exc:
        raise ConfigError(f"coupling.medium: {exc}") from exc

    pump_geom = _geometry_from_dict(
        coupling_spec.get("pump", {}).get("geometry", coupling_spec.get("pump", {})),
        base.pump1.geometry,
        "coupling.pump.",
    ) if "pump" in coupling_spec else base.pump1.geometry
    pump1 = PumpSpec(geometry=pump_geom, coefficients=base.pump1.coefficients)

    pump2 = None
    if coupling_spec.get("pump2") is not None:
        pump2 = PumpSpec(
            geometry=_geometry_from_dict(
                coupling_spec["pump2"].get("geometry", coupling_spec["pump2"]),
                base.pump1.geometry,
                "coupling.pump2.",
            )
        )

    collection = (
        _geometry_from_dict(
            coupling_spec["collection"], base.collection, "coupling.collection."
        )
        if "collection" in coupling_spec
        else base.collection
    )
    cfg.coupling = CouplingConfig(
        interaction=interaction,
        medium=medium,
        pump1=pump1,
        pump2=pump2,
        collection=collection,
        basis=base.basis,
        single_pump=bool(coupling_spec.get("single_pump", base.single_pump)),
    )

    if "grid" in data:
        grid = data["grid"]
        _require_keys(grid, {"pump", "collection", "points"}, "grid.")
        if name != "WaistScan":
            raise ConfigError("grid is only valid for the WaistScan scenario (key: grid)")
        for axis in ("pump", "collection"):
            rng = grid.get(axis)
            if (
                not isinstance(rng, (list, tuple))
                or len(rng) != 2
                or not 0 < rng[0] < rng[1]
            ):
                raise ConfigError(f"grid.{axis} must be [low, high] with 0 < low < high")
        points = int(grid.get("points", 8))
        if points < 2:
            raise ConfigError("grid.points must be >= 2 (key: grid.points)")
        cfg.scan_grid = {
            "pump": [float(grid["pump"][0]), float(grid["pump"][1])],
            "collection": [float(grid["collection"][0]), float(grid["collection"][1])],
            "points": points,
        }
    return cfg


def _scan_csv(path: Path, scan: dict) -> None:
    rows = [["pump_waist", "collection_waist", "metric"]]
    for i, wp in enumerate(scan["pump_waists"]):
        for j, wc in enumerate(scan["collection_waists"]):
            rows.append([_fmt(wp), _fmt(wc), _fmt(scan["metric"][i][j])])
    _write_rows(path, rows)


def emit_result(result, cfg, out_dir, wall_time_s: float = 0.0) -> list:
    """Write CSV matrices, the JSON report and the run manifest.

    Returns the list of files written.  The manifest is the only file
    carrying timing information, so all data files are reproducible byte
    for byte from the resolved configuration it embeds.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = result.report
    labels = report.mode_labels
    written = []

    matrices = {
        "var_x1": np.asarray(report.var_X1).real,
        "var_x2": np.asarray(report.var_X2).real,
        "cross_covariance": np.asarray(report.cross_cov).real,
        "nbar_matrix": np.asarray(report.nbar_matrix).real,
        "pair_abs": np.abs(report.pair_matrix),
        "pair_arg": np.angle(report.pair_matrix),
    }
    for stem, matrix in matrices.items():
        _write_matrix_csv(out / f"{stem}.csv", matrix, labels)
        _write_long_csv(out / f"{stem}_long.csv", matrix, labels)
        written += [f"{stem}.csv", f"{stem}_long.csv"]

    report_doc = {
        "scenario": result.name,
        "gain": float(result.gain),
        "report": report_to_dict(report),
        "metrics": {k: _json_safe(v) for k, v in result.metrics.items()},
    }
    if result.eigen_rows is not None:
        report_doc["eigenmodes"] = [
            {
                "lambda": row.lam,
                "variance_minus": row.variance_minus,
                "variance_plus": row.variance_plus,
                "nbar": row.nbar,
                "theta": row.theta,
            }
            for row in result.eigen_rows
        ]
    if result.scan is not None:
        report_doc["scan"] = _json_safe(result.scan)
        _scan_csv(out / "scan_grid.csv", result.scan)
        written.append("scan_grid.csv")
    if result.convergence is not None:
        report_doc["convergence_check"] = _json_safe(result.convergence)
    (out / "report.json").write_text(
        json.dumps(report_doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    written.append("report.json")

    manifest = {
        "scenario": result.name,
        "tool_version": _version,
        "wall_time_s": float(wall_time_s),
        "resolved_config": resolved_config_dict(cfg),
        "outputs": sorted(written),
        "convergence_check": _json_safe(result.convergence),
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    written.append("manifest.json")
    return written


def _json_safe(value):
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    return value


def load_report(out_dir) -> StateReport:
    """Load the StateReport back from an output directory (exact round trip)."""
    data = json.loads((Path(out_dir) / "report.json").read_text(encoding="utf-8"))
    return report_from_dict(data["report"])
