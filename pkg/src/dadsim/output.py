"""CSV and plain-text emission of trajectories and reports."""

from __future__ import annotations

import dataclasses
from pathlib import Path

import numpy as np

__all__ = ["csv_header", "emit_csv", "format_summary"]


def csv_header(traj) -> list[str]:
    plant = traj.scenario.plant
    cols = ["t"] + [f"y{i + 1}" for i in range(plant.n)]
    if traj.kind == "dads":
        cols += ["rho", "z"]
    elif traj.kind == "sigma_mod":
        cols += ["thetahat1", "thetahat2", "rho"]
    cols += [f"u{i + 1}" for i in range(plant.m)] + ["V"]
    if traj.rho_dot is not None:
        cols.append("rho_dot")
    cols += [f"d{i + 1}" for i in range(plant.q)]
    cols += [f"theta{i + 1}" for i in range(plant.p)]
    cols += [f"b{i + 1}" for i in range(plant.m)]
    return cols


def _columns(traj, sl):
    cols = [traj.t[sl, None], traj.y[sl]]
    if traj.kind == "dads":
        cols += [traj.rho[sl, None], traj.z[sl, None]]
    elif traj.kind == "sigma_mod":
        cols += [traj.thetahat[sl], traj.rho[sl, None]]
    cols += [traj.u[sl], traj.V[sl, None]]
    if traj.rho_dot is not None:
        cols.append(traj.rho_dot[sl, None])
    cols += [traj.d[sl], traj.theta[sl], traj.b[sl]]
    return np.hstack(cols)


def _fmt_value(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.ndarray):
        return "[" + ", ".join(repr(float(x)) for x in v.ravel()) + "]"
    return str(v)


def format_summary(traj, reports: dict) -> str:
    """Plain-text ``key = value`` summary of a run and its reports."""
    sc = traj.scenario
    lines = ["[scenario]", f"name = {sc.name or '-'}", f"controller = {sc.kind}"]
    if sc.controller is not None:
        for f in dataclasses.fields(sc.controller):
            lines.append(f"{f.name} = {_fmt_value(getattr(sc.controller, f.name))}")
    if sc.clf is not None:
        lines.append(f"clf = {sc.clf.name}")
        for k, v in sc.clf.params:
            lines.append(f"clf.{k} = {_fmt_value(v)}")
    lines += [
        f"T = {_fmt_value(sc.T)}",
        f"dt = {_fmt_value(sc.dt)}",
        f"samples = {len(traj.t)}",
    ]
    for title, rep in reports.items():
        lines.append("")
        lines.append(f"[{title}]")
        if dataclasses.is_dataclass(rep):
            items = [(f.name, getattr(rep, f.name)) for f in dataclasses.fields(rep)]
        else:
            items = list(dict(rep).items())
        lines += [f"{k} = {_fmt_value(v)}" for k, v in items]
    return "\n".join(lines) + "\n"


def emit_csv(traj, reports: dict, out_dir, stride: int = 100) -> tuple[Path, Path]:
    """Write ``trajectory.csv`` (every ``stride``-th sample) and ``summary.txt``."""
    if stride < 1:
        raise ValueError("stride must be >= 1")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / "trajectory.csv"
        data = _columns(traj, slice(None, None, stride))
        with open(csv_path, "w", newline="\n") as fh:
            fh.write(",".join(csv_header(traj)) + "\n")
            for row in data.tolist():
                fh.write(",".join(map(repr, row)) + "\n")
        summary_path = out / "summary.txt"
        summary_path.write_text(format_summary(traj, reports))
    except OSError as exc:
        raise OSError(f"cannot write output under {out}: {exc}") from exc
    return csv_path, summary_path
