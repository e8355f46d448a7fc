"""Evaluation report file: line-delimited JSON, one header record with the
config echo and registration transform, then one record per frame."""

from __future__ import annotations

import json
from pathlib import Path

from ..geometry import SimilarityTransform
from .protocol import EvalReport


def report_write(report: EvalReport, path) -> Path:
    if report.num_frames == 0:
        raise ValueError("refusing to write a report for an empty sequence")
    path = Path(path)
    lines = [json.dumps({
        "record": "header",
        "tau": report.tau,
        "samples": report.samples,
        "chamfer_variant": "squared" if report.chamfer_squared else "l2",
        "seed": report.seed,
        "mean_cd": report.mean_cd,
        "mean_fscore": report.mean_fscore,
        "rec_mse": report.rec_mse,
        "transform": report.transform.to_dict(),
        **report.extra,
    })]
    for t in range(report.num_frames):
        lines.append(json.dumps({
            "record": "frame",
            "index": t,
            "cd": report.per_frame_cd[t],
            "fscore": report.per_frame_fscore[t],
        }))
    path.write_text("\n".join(lines) + "\n")
    return path


def report_read(path) -> EvalReport:
    lines = [json.loads(line) for line in Path(path).read_text().splitlines() if line]
    header = lines[0]
    if header.get("record") != "header":
        raise ValueError(f"{path}: first record is not a header")
    frames = [rec for rec in lines[1:] if rec.get("record") == "frame"]
    frames.sort(key=lambda r: r["index"])
    cds = [r["cd"] for r in frames]
    fss = [r["fscore"] for r in frames]
    extra = {k: v for k, v in header.items()
             if k not in ("record", "tau", "samples", "chamfer_variant", "seed",
                          "mean_cd", "mean_fscore", "rec_mse", "transform")}
    return EvalReport(
        per_frame_cd=cds, per_frame_fscore=fss,
        mean_cd=header["mean_cd"], mean_fscore=header["mean_fscore"],
        transform=SimilarityTransform.from_dict(header["transform"]),
        tau=header["tau"], samples=header["samples"],
        chamfer_squared=header["chamfer_variant"] == "squared",
        seed=header["seed"], rec_mse=header.get("rec_mse"), extra=extra,
    )
