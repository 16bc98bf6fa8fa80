"""Command line front end.

Three subcommands:

    saff synth     write synthetic scene directories plus an index.csv
    saff segment   run the pipeline on one image or a directory of scenes
    saff evaluate  score confidence maps against ground-truth masks

Exit codes: 0 success, 2 unreadable or malformed files (E_IO), 3 missing
or unmatched inputs (E_MATCH), 4 a computation rejected its inputs
(E_PIPELINE). Every failure prints one machine-readable ``E_*: detail``
line on stderr. Verbosity comes from the SAFF_LOG env var
(error/info/debug, default error).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict

import numpy as np

from . import evaluation, synth, tensor_io
from .pipeline import RunConfig, segment_image

log = logging.getLogger(__name__)

EXIT_IO = 2
EXIT_MATCH = 3
EXIT_PIPELINE = 4

_SCENE_FILES = ("image.ppm", "semantic.sft", "saliency.sft", "edge.sft")


class CliError(Exception):
    def __init__(self, code, tag, message):
        super().__init__(message)
        self.code = code
        self.tag = tag


def _classify(exc) -> CliError:
    if isinstance(exc, CliError):
        return exc
    if isinstance(exc, (tensor_io.SftError, tensor_io.PnmError, OSError)):
        return CliError(EXIT_IO, "E_IO", str(exc))
    return CliError(EXIT_PIPELINE, "E_PIPELINE", str(exc))


def _setup_logging():
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    raw = os.environ.get("SAFF_LOG", "error").strip().lower()
    logging.basicConfig(
        level=levels.get(raw, logging.ERROR),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if raw not in levels:
        log.error("unknown SAFF_LOG value %r, using 'error'", raw)


def _atomic_bytes(path, data: bytes):
    tensor_io._atomic_write(path, data)


# ---------------------------------------------------------------- synth


def _parse_size(text):
    try:
        h, w = text.lower().split("x")
        return int(h), int(w)
    except ValueError:
        raise argparse.ArgumentTypeError(f"size must look like 96x96, got {text!r}")


def cmd_synth(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    rows = ["name,seed,height,width,channels,noise,fg_fraction"]
    for i in range(args.count):
        seed = args.seed + i
        scene = synth.generate(
            seed,
            size=args.size,
            d_channels=args.channels,
            noise=args.noise,
            area_bounds=(args.area_min, args.area_max),
        )
        name = f"scene_{i:04d}"
        synth.write_scene(scene, os.path.join(args.out, name))
        rows.append(
            "%s,%d,%d,%d,%d,%g,%.6f"
            % (name, seed, *scene.gt.shape, args.channels, args.noise, scene.gt.mean())
        )
        log.info("wrote %s (seed %d)", name, seed)
    _atomic_bytes(os.path.join(args.out, "index.csv"), ("\n".join(rows) + "\n").encode())
    return 0


# -------------------------------------------------------------- segment


def _write_outputs(result, out_dir, config):
    os.makedirs(out_dir, exist_ok=True)
    tensor_io.write_tensor(
        result.confidence.astype(np.float32), os.path.join(out_dir, "confidence.sft")
    )
    tensor_io.write_gray(result.mask, os.path.join(out_dir, "mask.pgm"))
    if not config.dump_intermediates:
        return
    aff = result.affinities
    dumps = {
        "labels.sft": result.labels,
        "features.sft": result.features.astype(np.float32),
        "prior.sft": result.prior.astype(np.float32),
        "m_s.sft": aff.m_s.astype(np.float32),
        "m_a.sft": aff.m_a.astype(np.float32),
        "m_s_norm.sft": aff.m_s_norm.astype(np.float32),
        "m_a_norm.sft": aff.m_a_norm.astype(np.float32),
        "edge_dist.sft": aff.edge_dist.astype(np.float32),
    }
    for name, tensor in dumps.items():
        tensor_io.write_tensor(tensor, os.path.join(out_dir, name))
    record = result.model.to_dict()
    record.update(
        n_segments=int(result.scores.size),
        n_fg=int(result.pseudo.fg.size),
        n_bg=int(result.pseudo.bg.size),
        config=asdict(config),
    )
    payload = json.dumps(record, sort_keys=True, indent=2) + "\n"
    _atomic_bytes(os.path.join(out_dir, "model.json"), payload.encode())


def _segment_one(paths, out_dir, config):
    image = tensor_io.read_image(paths["image"])
    semantic = tensor_io.read_tensor(paths["semantic"])
    saliency = tensor_io.read_tensor(paths["saliency"])
    edge = tensor_io.read_tensor(paths["edge"])
    result = segment_image(image, semantic, saliency, edge, config)
    _write_outputs(result, out_dir, config)


def _segment_job(task):
    """Worker for the process pool; returns (stem, error-or-None)."""
    stem, paths, out_dir, config = task
    try:
        _segment_one(paths, out_dir, config)
        return stem, None
    except Exception as exc:  # noqa: BLE001 - reported to the parent
        err = _classify(exc)
        return stem, (err.code, err.tag, str(err))


def _scene_tasks(scenes_root, out_root, config):
    try:
        entries = sorted(os.listdir(scenes_root))
    except OSError as exc:
        raise CliError(EXIT_IO, "E_IO", str(exc))
    tasks = []
    for name in entries:
        scene_dir = os.path.join(scenes_root, name)
        if not os.path.isdir(scene_dir):
            continue
        if not os.path.exists(os.path.join(scene_dir, "image.ppm")):
            continue
        paths = {
            "image": os.path.join(scene_dir, "image.ppm"),
            "semantic": os.path.join(scene_dir, "semantic.sft"),
            "saliency": os.path.join(scene_dir, "saliency.sft"),
            "edge": os.path.join(scene_dir, "edge.sft"),
        }
        tasks.append((name, paths, os.path.join(out_root, name), config))
    if not tasks:
        raise CliError(EXIT_MATCH, "E_MATCH", f"no scene directories under {scenes_root}")
    return tasks


def cmd_segment(args) -> int:
    config = RunConfig(
        k_target=args.superpixels,
        compactness=args.compactness,
        w_e=args.we,
        th_bg=args.th_bg,
        th_fg=args.th_fg,
        binarize_threshold=args.binarize,
        balance=args.balance,
        dump_intermediates=args.dump_intermediates,
        seed=args.seed,
    )
    config.validate()

    if args.image is not None:
        paths = {
            "image": args.image,
            "semantic": args.semantic,
            "saliency": args.saliency,
            "edge": args.edge,
        }
        _segment_one(paths, args.out, config)
        return 0

    tasks = _scene_tasks(args.scenes, args.out, config)
    failures = []
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            outcomes = list(pool.map(_segment_job, tasks))
    else:
        outcomes = map(_segment_job, tasks)

    done = set()
    for stem, error in outcomes:
        if error is None:
            done.add(stem)
            log.info("segmented %s", stem)
            continue
        code, tag, message = error
        if not args.keep_going:
            raise CliError(code, tag, f"{stem}: {message}")
        log.error("%s failed: %s", stem, message)
        failures.append((stem, code, tag, message))

    manifest = ["image,mask"]
    for stem, paths, out_dir, _ in tasks:
        if stem in done:
            manifest.append(
                os.path.abspath(paths["image"]) + "," + os.path.abspath(os.path.join(out_dir, "mask.pgm"))
            )
    _atomic_bytes(os.path.join(args.out, "manifest.csv"), ("\n".join(manifest) + "\n").encode())

    if failures:
        stem, code, tag, message = failures[0]
        raise CliError(code, tag, f"{len(failures)} image(s) failed; first: {stem}: {message}")
    return 0


# ------------------------------------------------------------- evaluate


def _collect_predictions(pred_dir):
    try:
        entries = sorted(os.listdir(pred_dir))
    except OSError as exc:
        raise CliError(EXIT_IO, "E_IO", str(exc))
    preds = {}
    for name in entries:
        path = os.path.join(pred_dir, name)
        if name.endswith(".sft") and os.path.isfile(path):
            stem, found = name[: -len(".sft")], path
        elif os.path.isdir(path) and os.path.isfile(os.path.join(path, "confidence.sft")):
            stem, found = name, os.path.join(path, "confidence.sft")
        else:
            continue
        if stem in preds:
            raise CliError(EXIT_MATCH, "E_MATCH", f"ambiguous prediction stem {stem!r}")
        preds[stem] = found
    if not preds:
        raise CliError(EXIT_MATCH, "E_MATCH", f"no predictions under {pred_dir}")
    return preds


def _find_gt(gt_dir, stem):
    for cand in (os.path.join(gt_dir, stem + ".pgm"), os.path.join(gt_dir, stem, "gt.pgm")):
        if os.path.isfile(cand):
            return cand
    return None


def cmd_evaluate(args) -> int:
    preds = _collect_predictions(args.pred)
    missing = [s for s in preds if _find_gt(args.gt, s) is None]
    if missing:
        raise CliError(
            EXIT_MATCH, "E_MATCH", "no ground truth for: " + ", ".join(sorted(missing))
        )
    quantized, gts, names = [], [], []
    for stem in sorted(preds):
        conf = tensor_io.read_tensor(preds[stem])
        if conf.ndim != 2:
            raise CliError(EXIT_PIPELINE, "E_PIPELINE", f"{preds[stem]}: expected a 2-D map")
        quantized.append(evaluation.quantize(np.asarray(conf, dtype=np.float64)))
        gts.append(tensor_io.read_gray(_find_gt(args.gt, stem)) >= 128)
        names.append(stem)
    curve, n_used, n_skipped = evaluation.evaluate_maps(quantized, gts, names)
    evaluation.write_pr_csv(curve, args.out)
    log.info("evaluated %d image(s), skipped %d empty", n_used, n_skipped)
    print(f"max_f {curve.max_f:.6f}")
    return 0


# ----------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="saff",
        description="Unsupervised foreground segmentation from semantic, "
        "saliency and edge maps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate synthetic scenes")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--count", type=int, default=1, help="number of scenes")
    p.add_argument("--seed", type=int, default=0, help="seed of the first scene")
    p.add_argument("--size", type=_parse_size, default=(96, 96), help="HxW, default 96x96")
    p.add_argument("--channels", type=int, default=8, help="semantic channels")
    p.add_argument("--noise", type=float, default=0.25, help="difficulty in [0,1)")
    p.add_argument("--area-min", type=float, default=0.05, help="min foreground fraction")
    p.add_argument("--area-max", type=float, default=0.6, help="max foreground fraction")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("segment", help="segment one image or a scene directory")
    src = p.add_argument_group("inputs (single image or batch)")
    src.add_argument("--image", help="P6 PNM image")
    src.add_argument("--semantic", help="H'xW'xD real32 SFT")
    src.add_argument("--saliency", help="H'xW' real32 SFT in [0,1]")
    src.add_argument("--edge", help="H'xW' real32 SFT in [0,1]")
    src.add_argument("--scenes", help="directory of scene subdirectories")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--superpixels", type=int, default=256, help="target segment count")
    p.add_argument("--compactness", type=float, default=10.0)
    p.add_argument("--we", type=float, default=3.5, help="edge distance scale")
    p.add_argument("--th-bg", type=float, default=0.2, help="background pseudo-label cut")
    p.add_argument("--th-fg", type=float, default=0.6, help="foreground pseudo-label cut")
    p.add_argument("--binarize", type=float, default=0.5, help="mask threshold")
    p.add_argument(
        "--balance",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="equalize pseudo-label class weight",
    )
    p.add_argument("--dump-intermediates", action="store_true")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers (batch mode)")
    p.add_argument("--seed", type=int, default=0, help="recorded in the model dump")
    p.add_argument("--keep-going", action="store_true", help="do not stop on a failed image")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("evaluate", help="PR/F-measure over prediction and gt directories")
    p.add_argument("--pred", required=True, help="directory of confidence maps")
    p.add_argument("--gt", required=True, help="directory of ground-truth masks")
    p.add_argument("--out", required=True, help="CSV path")
    p.set_defaults(func=cmd_evaluate)
    return parser


def _check_segment_args(parser, args):
    if args.command != "segment":
        return
    single = [args.image, args.semantic, args.saliency, args.edge]
    if args.scenes is not None:
        if any(v is not None for v in single):
            parser.error("--scenes cannot be combined with single-image inputs")
    elif not all(v is not None for v in single):
        parser.error("provide --scenes, or all of --image/--semantic/--saliency/--edge")
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    _check_segment_args(parser, args)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - single reporting point
        err = _classify(exc)
        print(f"{err.tag}: {err}", file=sys.stderr)
        log.debug("failure detail", exc_info=True)
        return err.code


if __name__ == "__main__":
    sys.exit(main())
