"""Command-line interface: simulate, track, activity, eval, downsample."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import io as dio
from .activity import frame_activities, moving_std, render_activity_map
from .evaluation import PenaltyWeights, aogm_score, match_vertices, tra
from .linking import LinkConfig
from .model import LabelMaskStack, apply_min_area
from .pipeline import track_stack
from .synthgen import DIVISION_MODES, SimParams, downsample_graph, simulate

log = logging.getLogger("actrack")

__all__ = ["cli", "main"]


def _parse_size(text: str) -> tuple[int, int]:
    try:
        x, y = text.lower().split("x")
        return int(x), int(y)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WIDTHxHEIGHT, got {text!r}") from None


def _parse_weights(text: str) -> PenaltyWeights:
    parts = text.split(",")
    if len(parts) != 6:
        raise argparse.ArgumentTypeError("expected 6 comma-separated weights")
    values = [float(p) for p in parts]
    return PenaltyWeights(*values)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="actrack",
        description="Activity-prioritized cell tracking for time-lapse microscopy",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_track = sub.add_parser("track", help="link cells across frames and emit a lineage")
    p_track.add_argument("--images", required=True, type=Path)
    p_track.add_argument("--masks", required=True, type=Path)
    p_track.add_argument("--out", required=True, type=Path)
    p_track.add_argument("--k", type=float, default=2.5, help="activity-to-sigma scaling")
    p_track.add_argument("--g-cutoff", type=float, default=0.01, help="candidate cutoff")
    p_track.add_argument("--sigma-floor", type=float, default=0.5, help="minimum sigma, px")
    p_track.add_argument("--min-area", type=int, default=0, help="drop smaller instances")
    p_track.add_argument(
        "--frame-interval", type=float, default=1.0, help="minutes per frame (metadata)"
    )

    p_act = sub.add_parser("activity", help="write per-frame activity maps and CSV")
    p_act.add_argument("--images", required=True, type=Path)
    p_act.add_argument("--masks", required=True, type=Path)
    p_act.add_argument("--out", required=True, type=Path)
    p_act.add_argument("--n-minus", type=int, default=0, help="window frames before t")
    p_act.add_argument("--n-plus", type=int, default=1, help="window frames after t")
    p_act.add_argument("--min-area", type=int, default=0)

    p_eval = sub.add_parser("eval", help="score a tracking result against ground truth")
    p_eval.add_argument("--gt", required=True, type=Path)
    p_eval.add_argument("--res", required=True, type=Path)
    p_eval.add_argument(
        "--weights",
        type=_parse_weights,
        default=PenaltyWeights(),
        help="NS,FN,FP,ED,EA,EC penalties (default 5,10,1,1,1.5,1)",
    )

    p_sim = sub.add_parser("simulate", help="generate a synthetic colony dataset")
    p_sim.add_argument("--out", required=True, type=Path)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--frames", type=int, default=10)
    p_sim.add_argument("--size", type=_parse_size, default=(256, 256))
    p_sim.add_argument("--cells", type=int, default=1)
    p_sim.add_argument("--initial-length", type=float, default=12.0)
    p_sim.add_argument("--elongation", type=float, default=2.0)
    p_sim.add_argument("--division-length", type=float, default=24.0)
    p_sim.add_argument("--mode", choices=DIVISION_MODES, default="symmetric")
    p_sim.add_argument("--snap-angle", type=float, default=25.0)
    p_sim.add_argument("--drift", type=float, default=0.0)
    p_sim.add_argument("--noise", type=float, default=2.0)

    p_down = sub.add_parser("downsample", help="keep every factor-th frame of a dataset")
    p_down.add_argument("--dataset", required=True, type=Path, help="dir with img/ and gt/")
    p_down.add_argument("--out", required=True, type=Path)
    p_down.add_argument("--factor", required=True, type=int)

    return parser


def _cmd_track(args: argparse.Namespace) -> int:
    config = LinkConfig(k=args.k, g_cutoff=args.g_cutoff, sigma_floor=args.sigma_floor)
    log.info(
        "tracking with k=%g, g_cutoff=%g, sigma_floor=%g, min_area=%d",
        config.k, config.g_cutoff, config.sigma_floor, args.min_area,
    )
    stack, masks = dio.read_dataset(
        dio.DatasetLayout(args.images, args.masks), frame_interval=args.frame_interval
    )
    result = track_stack(stack, masks, config=config, min_area=args.min_area)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dio.write_image_dir(
        out, [dio.mask_to_uint16(m) for m in result.relabeled.masks], prefix="mask"
    )
    dio.write_track_file(result.graph, out / "res_track.txt")
    dio.write_run_meta(
        out / "run_meta.json",
        {
            "k": config.k,
            "g_cutoff": config.g_cutoff,
            "sigma_floor": config.sigma_floor,
            "min_area": args.min_area,
            "frame_interval": args.frame_interval,
            "intensity_range": list(result.intensity_range),
            "frames": stack.count,
            "tracks": len(result.graph.tracks),
        },
    )
    log.info("wrote %d tracks over %d frames to %s", len(result.graph.tracks), stack.count, out)
    return 0


def _cmd_activity(args: argparse.Namespace) -> int:
    if args.n_minus < 0 or args.n_plus < 0:
        raise ValueError("window extents must be >= 0")
    stack, masks = dio.read_dataset(dio.DatasetLayout(args.images, args.masks))
    masks = apply_min_area(masks, args.min_area)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    maps = []
    per_frame = []
    for t in range(1, stack.count + 1):
        instances = frame_activities(stack, masks, t, args.n_minus, args.n_plus)
        per_frame.append(instances)
        maps.append(render_activity_map(instances, masks.masks[t - 1]))
    dio.write_image_dir(out, maps, prefix="activity_map")
    dio.write_activity_csv(out / "activity.csv", per_frame)
    log.info("wrote %d activity maps to %s", len(maps), out)
    return 0


def _load_tracked_dir(directory: Path):
    masks = LabelMaskStack(
        [m.astype(np.int32) for m in dio.read_image_dir(directory, dio.MASK_PREFIXES)]
    )
    graph = dio.parse_track_file(dio.find_track_file(directory), frame_count=masks.count)
    return masks, graph


def _cmd_eval(args: argparse.Namespace) -> int:
    gt_masks, gt_graph = _load_tracked_dir(args.gt)
    res_masks, res_graph = _load_tracked_dir(args.res)
    match = match_vertices(gt_masks, res_masks)
    diff = aogm_score(gt_graph, res_graph, match, args.weights)
    score = tra(gt_graph, res_graph, match, args.weights)
    print(f"NS {diff.ns}")
    print(f"FN {diff.fn}")
    print(f"FP {diff.fp}")
    print(f"ED {diff.ed}")
    print(f"EA {diff.ea}")
    print(f"EC {diff.ec}")
    print(f"AOGM {diff.aogm:.6f}")
    print(f"AOGM_EMPTY {diff.aogm_empty:.6f}")
    print(f"TRA {score:.6f}")
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    params = SimParams(
        seed=args.seed,
        frame_count=args.frames,
        image_size=args.size,
        initial_cells=args.cells,
        initial_length=args.initial_length,
        elongation_rate=args.elongation,
        division_length=args.division_length,
        division_mode=args.mode,
        snap_angle_deg=args.snap_angle,
        drift_noise=args.drift,
        noise_sigma=args.noise,
    )
    stack, masks, graph = simulate(params)
    out = Path(args.out)
    images = [np.rint(np.clip(f, 0, 255)).astype(np.uint8) for f in stack.frames]
    dio.write_image_dir(out / "img", images, prefix="t")
    dio.write_image_dir(
        out / "gt", [dio.mask_to_uint16(m) for m in masks.masks], prefix="man_track"
    )
    dio.write_track_file(graph, out / "gt" / "man_track.txt")
    log.info(
        "simulated %d frames, %d tracks (seed %d) into %s",
        params.frame_count, len(graph.tracks), params.seed, out,
    )
    return 0


def _cmd_downsample(args: argparse.Namespace) -> int:
    dataset = Path(args.dataset)
    if args.factor < 1:
        raise ValueError("factor must be >= 1")
    images = dio.read_image_dir(dataset / "img", ("t",))
    masks = dio.read_image_dir(dataset / "gt", dio.MASK_PREFIXES)
    if len(images) != len(masks):
        raise ValueError(f"{len(images)} frames but {len(masks)} masks in {dataset}")
    graph = dio.parse_track_file(
        dio.find_track_file(dataset / "gt"), frame_count=len(images)
    )
    kept = range(0, len(images), args.factor)
    out = Path(args.out)
    dio.write_image_dir(out / "img", [images[i] for i in kept], prefix="t")
    dio.write_image_dir(out / "gt", [masks[i] for i in kept], prefix="man_track")
    contracted = downsample_graph(graph, args.factor)
    dio.write_track_file(contracted, out / "gt" / "man_track.txt")
    log.info("kept %d of %d frames into %s", len(kept), len(images), out)
    return 0


_COMMANDS = {
    "track": _cmd_track,
    "activity": _cmd_activity,
    "eval": _cmd_eval,
    "simulate": _cmd_simulate,
    "downsample": _cmd_downsample,
}


def cli(argv: list[str] | None = None) -> int:
    """Run one subcommand; returns the process exit code."""
    if not logging.getLogger().handlers:
        logging.basicConfig(
            level=logging.INFO, format="%(levelname)s %(message)s", stream=sys.stderr
        )
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        log.error("%s", exc)
        return 1


def main() -> None:
    sys.exit(cli(sys.argv[1:]))
