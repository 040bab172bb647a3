"""Command-line entry point: ``uwcolor {simulate,estimate,correct,correct-sparse,evaluate}``.

Exit codes: 0 success, 2 validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .chart import ChartLayout, reference_chart, render_chart, sample_patches
from .errors import NumericalError, ValidationError
from .estimation import FitData, estimate_closed_form, refine_least_squares, refine_pooled
from .experiments import chart_frame_layout
from .formation import AttenuationCoeffs, VeilingLight, background_veiling_estimate, veiling_light
from .imaging import read_image, write_image
from .pipeline import (
    FrameJob,
    SceneParams,
    correct_frame,
    correct_sparse_job,
    evaluate,
    load_coefficients,
    sidecar_path,
    simulate,
)

EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

log = logging.getLogger("uwcolor")


def _add_scene_args(p):
    g = p.add_argument_group("scene")
    g.add_argument("--water-type", default="IA")
    g.add_argument("--depth", type=float, help="water depth d in metres")
    g.add_argument("--exposure-k", type=float, help="exposure scalar k (default: auto)")
    g.add_argument("--e0", type=float, default=1.0, help="surface ambient light")
    g.add_argument("--rho", type=float, default=1.0, help="object reflectance")
    g.add_argument("--ambient-model", choices=("exponential", "as_written"), default="exponential")
    g.add_argument("--camera", help="camera response CSV (wavelength_nm,r,g,b)")
    g.add_argument("--data-dir", help="directory with water-type CSVs")


def _scene(args, depth=None) -> SceneParams:
    return SceneParams(
        water_type=args.water_type,
        depth_m=depth if depth is not None else args.depth,
        exposure_k=args.exposure_k,
        surface_light_e0=args.e0,
        reflectance_rho=args.rho,
        ambient_model=args.ambient_model,
        camera_file=args.camera,
        data_dir=args.data_dir,
    )


def _parse_size(text):
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"size must look like 640x480, got {text!r}") from None
    return w, h


def cmd_simulate(args):
    if args.chart:
        width, height = args.size
        layout = chart_frame_layout(width, height)
        original = render_chart(reference_chart(), layout, height, width, (0.18, 0.18, 0.18))
        if args.layout_out:
            layout.save(args.layout_out)
    elif args.input:
        original = read_image(args.input, args.assume_linear)
    else:
        raise ValidationError("simulate needs --input or --chart")

    if args.z_map:
        z = np.load(args.z_map, allow_pickle=False)
    elif args.z is not None:
        z = args.z
    else:
        raise ValidationError("simulate needs --z or --z-map")

    coeffs = load_coefficients(args.coeffs) if args.coeffs else None
    b_inf = VeilingLight(args.b_inf) if args.b_inf else None
    ctx = None
    if coeffs is None or b_inf is None:
        ctx = _scene(args).context()
    degraded, sidecar = simulate(original, z, ctx, coeffs, b_inf, args.rho)
    write_image(args.output, degraded, args.assume_linear)
    sidecar["output"] = str(args.output)
    if args.chart and args.layout_out:
        sidecar["layout"] = str(args.layout_out)
    side = Path(args.sidecar) if args.sidecar else sidecar_path(args.output)
    side.write_text(json.dumps(sidecar, indent=2))
    return 0


def cmd_estimate(args):
    layout = ChartLayout.load(args.layout)
    ref = reference_chart()
    frames = []
    for frame_args in args.frame:
        if len(frame_args) not in (2, 3):
            raise ValidationError("--frame takes IMAGE Z [DEPTH]")
        try:
            z = float(frame_args[1])
            depth = float(frame_args[2]) if len(frame_args) == 3 else None
        except ValueError:
            raise ValidationError(f"--frame {' '.join(frame_args)}: Z and DEPTH must be numbers") from None
        image = read_image(frame_args[0], args.assume_linear)
        if args.b_inf:
            b_inf = VeilingLight(args.b_inf)
        elif args.background is not None:
            b_inf = background_veiling_estimate(image, args.background)
        else:
            b_inf = veiling_light(_scene(args, depth).context())
        obs = sample_patches(image, layout, args.trim)
        frames.append((obs, b_inf, z))

    per_frame = []
    for obs, b_inf, z in frames:
        c = estimate_closed_form(obs, ref, b_inf, z)
        if args.optimize and not args.pooled:
            c = refine_least_squares(obs, ref, b_inf, z, c)
        per_frame.append(c)

    if args.pooled:
        init = AttenuationCoeffs(np.mean([c.beta_d for c in per_frame], axis=0),
                                 np.mean([c.beta_b for c in per_frame], axis=0), "estimated")
        pooled = refine_pooled(FitData.pooled(frames, ref), init)
        out = pooled.to_dict()
    elif len(per_frame) == 1:
        out = per_frame[0].to_dict()
    else:
        out = [c.to_dict() for c in per_frame]

    text = json.dumps(out, indent=2)
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        print(text)
    return 0


def _job(args) -> FrameJob:
    job = FrameJob.load(args.job)
    if args.output:
        job.output = args.output
    return job


def cmd_correct(args):
    _, sidecar = correct_frame(_job(args))
    if not args.quiet:
        print(json.dumps(sidecar, indent=2))
    return 0


def cmd_correct_sparse(args):
    job = _job(args)
    if args.map:
        job.sparse_map = args.map
    if args.scale is not None:
        job.scale = args.scale
    if args.patch_px is not None:
        job.patch_px = args.patch_px
    _, sidecar = correct_sparse_job(job)
    if not args.quiet:
        print(json.dumps(sidecar, indent=2))
    return 0


def cmd_evaluate(args):
    layout = ChartLayout.load(args.layout)
    series = {}
    for label, *paths in args.method:
        if not paths:
            raise ValidationError(f"--method {label} lists no images")
        series[label] = [read_image(p, args.assume_linear) for p in paths]
    result = evaluate(series, layout, patches=args.patches, trim=args.trim,
                      accuracy_frame=args.accuracy_frame, normalization=args.normalization)
    result.write_accuracy_csv(args.accuracy_csv)
    if result.consistency or args.consistency_csv:
        default = Path(args.accuracy_csv).with_name("consistency.csv")
        result.write_consistency_csv(args.consistency_csv or default)
    for msg in result.messages:
        print(msg, file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uwcolor", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="degrade an image (or a synthetic chart) through water")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--input", help="clean image (.png/.jpg/.npy)")
    src.add_argument("--chart", action="store_true", help="render the reference chart as the clean image")
    p.add_argument("--size", type=_parse_size, default=(640, 480), help="chart frame size WxH")
    p.add_argument("--layout-out", help="write the chart layout JSON here (with --chart)")
    p.add_argument("--output", required=True)
    p.add_argument("--sidecar", help="ground-truth JSON (default: output with .json suffix)")
    zg = p.add_mutually_exclusive_group()
    zg.add_argument("--z", type=float, help="scalar range in metres")
    zg.add_argument("--z-map", help="per-pixel range map (.npy, H x W)")
    p.add_argument("--coeffs", help="coefficient JSON; default derives them from the water tables")
    p.add_argument("--b-inf", type=float, nargs=3, metavar=("R", "G", "B"))
    p.add_argument("--assume-linear", action="store_true")
    _add_scene_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="estimate attenuation coefficients from chart frames")
    p.add_argument("--frame", nargs="+", action="append", required=True, metavar="ARG",
                   help="IMAGE Z [DEPTH]; repeat for several frames")
    p.add_argument("--layout", required=True, help="chart layout JSON")
    p.add_argument("--trim", type=float, default=0.1)
    vg = p.add_mutually_exclusive_group()
    vg.add_argument("--b-inf", type=float, nargs=3, metavar=("R", "G", "B"))
    vg.add_argument("--background", type=float, nargs="?", const=0.1, metavar="PERCENTILE",
                    help="veiling light from the bluest pixels")
    p.add_argument("--optimize", action="store_true", help="refine by least squares")
    p.add_argument("--pooled", action="store_true", help="one least-squares fit over all frames")
    p.add_argument("--output", help="coefficient JSON (default: stdout)")
    p.add_argument("--assume-linear", action="store_true")
    _add_scene_args(p)
    p.set_defaults(func=cmd_estimate)

    for name, func, helptext in (("correct", cmd_correct, "correct a frame described by a job file"),
                                 ("correct-sparse", cmd_correct_sparse, "correct patches around keypoints")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--job", required=True, help="job JSON")
        p.add_argument("--output", help="override the job's output path")
        p.add_argument("-q", "--quiet", action="store_true")
        if name == "correct-sparse":
            p.add_argument("--map", help="keypoint CSV x,y,z (overrides the job)")
            p.add_argument("--scale", type=float)
            p.add_argument("--patch-px", type=int)
        p.set_defaults(func=func)

    p = sub.add_parser("evaluate", help="accuracy and consistency metrics against the chart")
    p.add_argument("--layout", required=True)
    p.add_argument("--method", nargs="+", action="append", required=True, metavar="ARG",
                   help="LABEL IMAGE [IMAGE ...] ordered by depth; repeat per method")
    p.add_argument("--accuracy-csv", default="accuracy.csv")
    p.add_argument("--consistency-csv", help="default: consistency.csv beside the accuracy CSV")
    p.add_argument("--patches", nargs="+")
    p.add_argument("--trim", type=float, default=0.1)
    p.add_argument("--accuracy-frame", type=int, default=-1)
    p.add_argument("--normalization", choices=("l2", "chromaticity"), default="l2")
    p.add_argument("--assume-linear", action="store_true")
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericalError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
