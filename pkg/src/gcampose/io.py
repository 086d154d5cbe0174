"""Dataset and report file formats (strict JSON schema, CSV metrics)."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .geometry import AffineCorrespondence, PointCorrespondence, Pose, Rig, RigCamera


class SchemaError(ValueError):
    """Correspondence file violates the expected schema."""


def _require_keys(obj: dict, required, optional=(), where="document"):
    keys = set(obj)
    missing = set(required) - keys
    unknown = keys - set(required) - set(optional)
    if missing:
        raise SchemaError(f"{where}: missing keys {sorted(missing)}")
    if unknown:
        raise SchemaError(f"{where}: unknown keys {sorted(unknown)}")


def _vec(obj, n, where):
    if not isinstance(obj, (list, tuple)) or len(obj) != n:
        raise SchemaError(f"{where}: expected {n} numbers")
    try:
        return [float(v) for v in obj]
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{where}: non-numeric entry") from exc


def correspondence_file_to_dict(rig: Rig, correspondences, ground_truth: Pose | None = None) -> dict:
    doc = {
        "rig": [{"Q": [float(v) for v in c.Q.ravel()], "s": [float(v) for v in c.s]} for c in rig.cameras],
        "correspondences": [],
    }
    for c in correspondences:
        entry = {
            "type": "ac" if isinstance(c, AffineCorrespondence) else "pc",
            "x": [float(v) for v in c.x],
            "xp": [float(v) for v in c.xp],
            "cam_i": int(c.cam_first),
            "cam_j": int(c.cam_second),
        }
        if isinstance(c, AffineCorrespondence):
            entry["A"] = [float(v) for v in c.A.ravel()]
        doc["correspondences"].append(entry)
    if ground_truth is not None:
        doc["ground_truth"] = {
            "R": [float(v) for v in ground_truth.R.ravel()],
            "t": [float(v) for v in ground_truth.t],
        }
    return doc


def parse_correspondence_file(doc: dict):
    """Strict parse: (rig, correspondences, ground_truth | None)."""
    if not isinstance(doc, dict):
        raise SchemaError("top level must be an object")
    _require_keys(doc, ("rig", "correspondences"), ("ground_truth",))
    cams = []
    if not isinstance(doc["rig"], list) or not doc["rig"]:
        raise SchemaError("rig: expected a non-empty list")
    for k, cam in enumerate(doc["rig"]):
        _require_keys(cam, ("Q", "s"), (), f"rig[{k}]")
        Q = np.array(_vec(cam["Q"], 9, f"rig[{k}].Q")).reshape(3, 3)
        s = np.array(_vec(cam["s"], 3, f"rig[{k}].s"))
        cams.append(RigCamera(Q, s))
    rig = Rig(tuple(cams))
    corr = []
    if not isinstance(doc["correspondences"], list):
        raise SchemaError("correspondences: expected a list")
    for k, c in enumerate(doc["correspondences"]):
        where = f"correspondences[{k}]"
        if not isinstance(c, dict) or c.get("type") not in ("ac", "pc"):
            raise SchemaError(f"{where}: type must be 'ac' or 'pc'")
        is_ac = c["type"] == "ac"
        _require_keys(
            c, ("type", "x", "xp", "cam_i", "cam_j") + (("A",) if is_ac else ()), (), where
        )
        x = _vec(c["x"], 3, f"{where}.x")
        xp = _vec(c["xp"], 3, f"{where}.xp")
        if abs(x[2] - 1.0) > 1e-9 or abs(xp[2] - 1.0) > 1e-9:
            raise SchemaError(f"{where}: third coordinate must be 1")
        ci, cj = int(c["cam_i"]), int(c["cam_j"])
        if not (0 <= ci < len(rig) and 0 <= cj < len(rig)):
            raise SchemaError(f"{where}: camera index out of range")
        if is_ac:
            A = np.array(_vec(c["A"], 4, f"{where}.A")).reshape(2, 2)
            corr.append(AffineCorrespondence(x, xp, ci, cj, A))
        else:
            corr.append(PointCorrespondence(x, xp, ci, cj))
    gt = None
    if "ground_truth" in doc:
        g = doc["ground_truth"]
        _require_keys(g, ("R", "t"), (), "ground_truth")
        gt = Pose(np.array(_vec(g["R"], 9, "ground_truth.R")).reshape(3, 3),
                  np.array(_vec(g["t"], 3, "ground_truth.t")))
    return rig, corr, gt


def dump_json(doc: dict, path) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def load_json(path) -> dict:
    return json.loads(Path(path).read_text())


REPORT_HEADER = ("trial", "solver", "eps_R_deg", "eps_t", "eps_t_dir_deg", "eps_R_chordal", "runtime_us")


def write_report_csv(path, rows) -> None:
    """rows: iterables matching REPORT_HEADER."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(REPORT_HEADER)
        for row in rows:
            w.writerow(row)


def write_report_sidecar(csv_path, config: dict, seed: int) -> None:
    side = Path(str(csv_path) + ".json")
    side.write_text(json.dumps({"config": config, "seed": seed}, indent=2, sort_keys=True) + "\n")
