"""Benchmark CLI.

Subcommands:
    bench generate --sweep NAME --out DIR [--full] [--polarity -1|1]
    bench run --dataset DIR [--d0 F] [--tr F] [--tac DEG] [--report PATH]
    bench time [--sizes 128,256,512,1024] [--report PATH]
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import (IMAGE_SIDE, SWEEPS, evaluate, generate_synthetic,
                    read_ground_truth, timing_scene, timing_sweep)
from .config import Config
from .image_io import load_grayscale
from .pipeline import detect


def _cmd_generate(args) -> int:
    pairs = generate_synthetic(args.sweep, args.out, desk_scale=not args.full,
                               polarity=args.polarity)
    print(f"wrote {len(pairs)} image/ground-truth pairs to {args.out}")
    return 0


def _cmd_run(args) -> int:
    dataset = Path(args.dataset)
    image_paths = sorted(dataset.glob("*.pgm"))
    if not image_paths:
        print(f"error: no .pgm images in {dataset}", file=sys.stderr)
        return 1
    cfg = Config()
    if args.tr is not None:
        cfg.t_r = args.tr
    if args.tac is not None:
        cfg.t_ac_deg = args.tac

    all_dets = []
    all_gts = []
    canvas = (IMAGE_SIDE, IMAGE_SIDE)
    for img_path in image_paths:
        gt_path = img_path.with_suffix(".csv")
        if not gt_path.exists():
            continue
        img = load_grayscale(img_path)
        canvas = (img.width, img.height)
        detections, _ = detect(img, cfg)
        all_dets.append([d.geom for d in detections])
        all_gts.append(read_ground_truth(gt_path))

    report = evaluate(all_dets, all_gts, canvas, d0=args.d0)
    summary = report.as_dict()
    summary["images"] = len(all_dets)
    print(f"images={summary['images']} precision={report.precision:.4f} "
          f"recall={report.recall:.4f} f_measure={report.f_measure:.4f} "
          f"mor={report.mor:.4f}")
    if args.report:
        Path(args.report).write_text(json.dumps(summary, indent=2))
        print(f"report written to {args.report}")
    return 0


def _cmd_time(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",")]
    images = [timing_scene(side) for side in sizes]
    rows, slope = timing_sweep(images, Config(), repeats=args.repeats)
    for pixels, seconds in rows:
        print(f"{pixels:>10d} px  {seconds:.4f} s")
    print(f"log-log slope: {slope:.3f}")
    if args.report:
        Path(args.report).write_text(json.dumps(
            {"rows": rows, "slope": slope}, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bench",
                                     description="Synthetic evaluation bench.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a synthetic sweep dataset")
    gen.add_argument("--sweep", choices=SWEEPS, required=True)
    gen.add_argument("--out", type=Path, required=True)
    gen.add_argument("--full", action="store_true",
                     help="full-resolution grid instead of the desk-scale subsample")
    gen.add_argument("--polarity", type=int, choices=[-1, 1], default=-1)
    gen.set_defaults(func=_cmd_generate)

    run = sub.add_parser("run", help="detect over a dataset and score against GT")
    run.add_argument("--dataset", required=True)
    run.add_argument("--d0", type=float, default=0.8)
    run.add_argument("--tr", type=float, default=None)
    run.add_argument("--tac", type=float, default=None)
    run.add_argument("--report", type=Path, default=None)
    run.set_defaults(func=_cmd_run)

    tim = sub.add_parser("time", help="measure runtime scaling over image sizes")
    tim.add_argument("--sizes", default="128,256,512,1024")
    tim.add_argument("--repeats", type=int, default=3)
    tim.add_argument("--report", type=Path, default=None)
    tim.set_defaults(func=_cmd_time)
    return parser


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return args.func(args)


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
