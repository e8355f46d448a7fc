"""Command-line entry point.

Subcommands: gen-data, train, infer, eval, export, gradcheck. Every command
echoes its effective configuration (file + overrides + seed) into the output
directory before doing work. Exit codes: 0 success, 1 usage, 2 data error,
3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .dataset import PRESETS, SequenceDir, gen_dataset, read_png, read_tracks
from .dataset.trackio import TrackIOError
from .evalh import eval_geometry, eval_rec_mse, report_write
from .geometry import GeometryError, load_mesh, normalize_to_cube, sample_surface
from .inference import animate_mesh, export_sequence, motion_tokens_for_frames
from .model import build_model
from .nn import checkpoint
from .nn.tensor import NonFiniteError
from .training import TrainConfig, apply_overrides, load_config, save_config, train_loop

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_DATA):
        super().__init__(message)
        self.code = code


def _parse_overrides(pairs: list[str]) -> dict[str, str]:
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise CliError(f"override {pair!r} is not key=value", EXIT_USAGE)
        key, val = pair.split("=", 1)
        out[key.strip()] = val.strip()
    return out


def _effective_config(args) -> TrainConfig:
    cfg = load_config(args.config) if args.config else (
        TrainConfig.desk() if args.profile == "desk" else TrainConfig())
    overrides = _parse_overrides(args.set or [])
    if args.seed is not None:
        overrides["seed"] = str(args.seed)
    try:
        return apply_overrides(cfg, overrides)
    except (ValueError, TypeError) as e:
        raise CliError(str(e), EXIT_USAGE) from e


def _echo_config(out_dir: Path, cfg: TrainConfig, command: str, extra: dict | None = None):
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {"command": command, **cfg.to_dict()}
    if extra:
        payload.update(extra)
    (out_dir / "effective_config.json").write_text(
        json.dumps(payload, indent=1, sort_keys=True) + "\n")


def _load_frames_dir(path: Path) -> np.ndarray:
    pngs = sorted(path.glob("frame_*.png"))
    if not pngs:
        pngs = sorted(path.glob("*.png"))
    if not pngs:
        raise CliError(f"no PNG frames in {path}")
    return np.stack([read_png(p) for p in pngs])


def cmd_gen_data(args) -> int:
    cfg = _effective_config(args)
    out = Path(args.out)
    _echo_config(out, cfg, "gen-data", {
        "preset": args.preset, "count": args.count, "frames": args.frames,
        "points": args.points, "width": args.width, "height": args.height,
        "curation_threshold": args.curation_threshold,
    })
    if args.preset not in PRESETS:
        raise CliError(f"unknown preset {args.preset!r}; choose from {sorted(PRESETS)}", EXIT_USAGE)
    kept, rejected = gen_dataset(out, args.preset, args.count, seed=cfg.seed,
                                 frames=args.frames, points=args.points,
                                 width=args.width, height=args.height,
                                 curation_threshold=args.curation_threshold)
    print(f"kept {kept} sequence(s), rejected {rejected} (trivial motion)")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _effective_config(args)
    out = Path(args.out)
    dataset = Path(args.dataset)
    if not dataset.exists():
        raise CliError(f"dataset directory {dataset} does not exist")
    _echo_config(out, cfg, "train", {"dataset": str(dataset),
                                     "resume": str(args.resume) if args.resume else None})
    save_config(out / "train_config.json", cfg)
    try:
        final, stats = train_loop(dataset, cfg, out, resume=args.resume)
    except TrackIOError as e:
        raise CliError(str(e)) from e
    if stats:
        print(f"final step {stats[-1].step}: loss {stats[-1].loss:.6g}, "
              f"grad_norm {stats[-1].grad_norm:.4g}")
    print(f"checkpoint: {final}")
    return EXIT_OK


def _model_from_checkpoint(ckpt_path, cfg: TrainConfig):
    model = build_model(cfg.to_model_config(), seed=cfg.seed)
    try:
        leftover = checkpoint.load_model(ckpt_path, model)
    except checkpoint.CheckpointError as e:
        raise CliError(f"checkpoint does not match the configured model: {e}") from e
    return model, leftover


def cmd_infer(args) -> int:
    cfg = _effective_config(args)
    out = Path(args.out)
    _echo_config(out, cfg, "infer", {
        "checkpoint": str(args.checkpoint), "mesh": str(args.mesh),
        "frames": str(args.frames), "format": args.format, "chunk": args.chunk,
        "window": args.window,
    })
    model, _ = _model_from_checkpoint(args.checkpoint, cfg)

    frames_path = Path(args.frames)
    if frames_path.is_dir() and (frames_path / "manifest.json").exists():
        seq = SequenceDir(frames_path)
        frames = seq.load_frames()
    elif frames_path.is_dir():
        frames = _load_frames_dir(frames_path)
    else:
        raise CliError(f"{frames_path} is not a frame directory")
    if frames.shape[1] != cfg.image_size or frames.shape[2] != cfg.image_size:
        raise CliError(f"frames are {frames.shape[1]}x{frames.shape[2]}, "
                       f"model expects {cfg.image_size}x{cfg.image_size}")

    try:
        mesh = load_mesh(args.mesh)
    except GeometryError as e:
        raise CliError(str(e)) from e
    span = mesh.vertices.max(axis=0) - mesh.vertices.min(axis=0)
    if span.max() > 1.0 + 1e-6:
        mesh, _ = normalize_to_cube(mesh)

    samples = sample_surface(mesh, cfg.encoder_points, seed=cfg.seed)
    try:
        tokens = motion_tokens_for_frames(model, samples, frames, window_size=args.window)
        verts = animate_mesh(model, mesh, tokens, chunk=args.chunk)
    except NonFiniteError as e:
        raise CliError(str(e), EXIT_NUMERIC) from e
    written = export_sequence(verts, mesh, out, fmt=args.format)
    print(f"wrote {len(written)} file(s) to {out}")
    return EXIT_OK


def _load_eval_side(path: Path):
    """A sequence for evaluation: directory of OBJ/PLY frames, a sequence
    directory, or an M4TK track file. Returns (frames_or_none, tracks_or_none)."""
    if path.is_file() and path.suffix == ".m4tk":
        _, positions = read_tracks(path)
        return None, positions.astype(np.float64)
    if path.is_dir() and (path / "manifest.json").exists():
        seq = SequenceDir(path)
        _, positions = seq.load_tracks()
        return None, positions.astype(np.float64)
    if path.is_dir():
        meshes = sorted(list(path.glob("*.obj")) + list(path.glob("*.ply")))
        if not meshes:
            raise CliError(f"no mesh frames in {path}")
        return [load_mesh(p) for p in meshes], None
    raise CliError(f"cannot interpret {path} as a sequence")


def cmd_eval(args) -> int:
    cfg = _effective_config(args)
    out = Path(args.out)
    _echo_config(out, cfg, "eval", {
        "pred": str(args.pred), "gt": str(args.gt), "tau": args.tau,
        "samples": args.samples, "chamfer_squared": args.chamfer_squared,
    })
    pred_meshes, pred_tracks = _load_eval_side(Path(args.pred))
    gt_meshes, gt_tracks = _load_eval_side(Path(args.gt))

    report = None
    rec = None
    if pred_meshes is not None and gt_meshes is not None:
        if len(pred_meshes) != len(gt_meshes):
            raise CliError(f"frame count mismatch: {len(pred_meshes)} vs {len(gt_meshes)}")
        report = eval_geometry(pred_meshes, gt_meshes, samples=args.samples,
                               tau=args.tau, chamfer_squared=args.chamfer_squared,
                               seed=cfg.seed)
    if pred_tracks is not None and gt_tracks is not None:
        if pred_tracks.shape != gt_tracks.shape:
            raise CliError(f"track shape mismatch: {pred_tracks.shape} vs {gt_tracks.shape}")
        rec = eval_rec_mse(pred_tracks, gt_tracks)
    if report is None and rec is None:
        raise CliError("inputs do not pair up: need mesh-dir vs mesh-dir or tracks vs tracks")

    if report is not None:
        report.rec_mse = rec
        report_write(report, out / "report.jsonl")
        print(f"mean CD {report.mean_cd:.6g}  mean F-score {report.mean_fscore:.6g}  "
              f"(tau={report.tau}, samples={report.samples}, "
              f"variant={'squared' if report.chamfer_squared else 'l2'})")
    if rec is not None:
        (out / "rec_mse.json").write_text(json.dumps({"rec_mse": rec}) + "\n")
        print(f"rec MSE {rec:.6g}")
    return EXIT_OK


def cmd_export(args) -> int:
    cfg = _effective_config(args)
    out = Path(args.out)
    _echo_config(out, cfg, "export", {"tracks": str(args.tracks), "mesh": str(args.mesh),
                                      "format": args.format})
    if args.format == "obj":
        if args.mesh is None:
            raise CliError("--mesh is required to export OBJ frames", EXIT_USAGE)
        mesh = load_mesh(args.mesh)
        _, positions = read_tracks(args.tracks)
        if positions.shape[1] != mesh.num_vertices:
            raise CliError(f"track width {positions.shape[1]} != mesh vertices {mesh.num_vertices}")
        written = export_sequence(positions.astype(np.float64), mesh, out, fmt="obj")
    else:
        meshes = sorted(Path(args.tracks).glob("mesh_*.obj"))
        if not meshes:
            raise CliError(f"no mesh_*.obj frames in {args.tracks}")
        loaded = [load_mesh(p) for p in meshes]
        verts = np.stack([m.vertices for m in loaded])
        written = export_sequence(verts, loaded[0], out, fmt="m4tk")
    print(f"wrote {len(written)} file(s) to {out}")
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    from .gradcheck import full_pipeline_gradcheck

    cfg = _effective_config(args)
    out = Path(args.out)
    _echo_config(out, cfg, "gradcheck", {"double": args.double,
                                         "negative_control": args.negative_control})
    bound = 1e-5 if args.double else 1e-3
    worst, worst_name = full_pipeline_gradcheck(
        seed=cfg.seed, h=args.h, order=4 if args.double else 2,
        negative_control=args.negative_control)
    print(f"worst relative gradient error {worst:.3e} ({worst_name}); bound {bound:g}")
    if not np.isfinite(worst) or worst >= bound:
        print("gradcheck FAILED")
        return EXIT_NUMERIC
    print("gradcheck passed")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="motion4d",
        description="Feed-forward 4D synthesis: dataset generation, training, "
                    "inference, evaluation, export, verification.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_required=True):
        p.add_argument("--config", type=Path, default=None, help="JSON config file")
        p.add_argument("--profile", choices=("desk", "full"), default="desk",
                       help="base profile when no config file is given")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="config override (repeatable)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", type=Path, required=out_required, help="output directory")

    p = sub.add_parser("gen-data", help="generate a procedural 4D dataset")
    common(p)
    p.add_argument("--preset", default="bend-box")
    p.add_argument("--count", type=int, default=4)
    p.add_argument("--frames", type=int, default=24)
    p.add_argument("--points", type=int, default=1024)
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--height", type=int, default=64)
    p.add_argument("--curation-threshold", type=float, default=0.02)
    p.set_defaults(fn=cmd_gen_data)

    p = sub.add_parser("train", help="train on a generated dataset")
    common(p)
    p.add_argument("--dataset", type=Path, required=True)
    p.add_argument("--resume", type=Path, default=None)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("infer", help="animate a mesh from video frames")
    common(p)
    p.add_argument("--checkpoint", type=Path, required=True)
    p.add_argument("--mesh", type=Path, required=True,
                   help="reference mesh (may be unrelated to the video: motion transfer)")
    p.add_argument("--frames", type=Path, required=True,
                   help="directory of frame_*.png or a sequence directory")
    p.add_argument("--format", choices=("obj", "m4tk"), default="obj")
    p.add_argument("--chunk", type=int, default=4096)
    p.add_argument("--window", type=int, default=256)
    p.set_defaults(fn=cmd_infer)

    p = sub.add_parser("eval", help="geometric evaluation of a predicted sequence")
    common(p)
    p.add_argument("--pred", type=Path, required=True)
    p.add_argument("--gt", type=Path, required=True)
    p.add_argument("--tau", type=float, default=0.05)
    p.add_argument("--samples", type=int, default=50000)
    p.add_argument("--chamfer-squared", action="store_true")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("export", help="convert tracks to OBJ frames or back")
    common(p)
    p.add_argument("--tracks", type=Path, required=True,
                   help="M4TK file (obj export) or directory of mesh_*.obj (m4tk export)")
    p.add_argument("--mesh", type=Path, default=None)
    p.add_argument("--format", choices=("obj", "m4tk"), default="obj")
    p.set_defaults(fn=cmd_export)

    p = sub.add_parser("gradcheck", help="full-pipeline finite-difference check")
    common(p)
    p.add_argument("--double", action="store_true",
                   help="enforce the tighter 1e-5 bound")
    p.add_argument("--h", type=float, default=1e-3, help="finite-difference step")
    p.add_argument("--negative-control", action="store_true",
                   help="inject a wrong gradient; the check must fail")
    p.set_defaults(fn=cmd_gradcheck)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    try:
        return args.fn(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except (GeometryError, TrackIOError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    except NonFiniteError as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
