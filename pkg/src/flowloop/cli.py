"""Command-line entry point for the cinemagraph toolchain.

Every subcommand is a thin wrapper over the library. Output files are
written to a temporary sibling and atomically renamed, so a failed run
never leaves a partially written artifact behind; reruns with unchanged
inputs produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import tempfile

from . import fields as flds
from .metrics import aepe, mse, ms_ssim, psnr
from .motionsynth import synthesize_field
from .splat import render_loop
from .streamline import extract_streamlines, rasterize_sketches, sketches_from_json, sketches_to_dict


def _atomic_write(path: str, data: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".flowloop-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _png_bytes(img: flds.RasterImage) -> bytes:
    buf = io.BytesIO()
    flds.image_to_png(img, buf)
    return buf.getvalue()


def _read_bytes(path: str) -> bytes:
    with open(path, "rb") as fh:
        return fh.read()


def _read_text(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _cmd_visualize(args) -> int:
    fld = flds.load_flo(_read_bytes(args.infile))
    max_radius = args.max_rad
    if max_radius != "auto":
        try:
            max_radius = float(max_radius)
        except ValueError:
            raise ValueError(f"--max-rad must be a number or 'auto', got {args.max_rad!r}")
    img = flds.visualize_flow(fld, max_radius)
    _atomic_write(args.outfile, _png_bytes(img))
    return 0


def _cmd_streamlines(args) -> int:
    fld = flds.load_flo(_read_bytes(args.infile))
    mask = flds.mask_from_png(args.mask)
    sketches = extract_streamlines(
        fld,
        mask,
        seed_spacing=args.seed_spacing,
        h=args.h,
        max_steps=args.max_steps,
        min_mean_speed=args.min_speed,
        min_length=args.min_length,
    )
    payload = json.dumps(sketches_to_dict(sketches), indent=2, sort_keys=True)
    _atomic_write(args.outfile, payload.encode("utf-8"))
    return 0


def _cmd_rasterize(args) -> int:
    sketches = sketches_from_json(_read_text(args.sketch))
    img = rasterize_sketches(sketches, thickness=args.thickness)
    _atomic_write(args.outfile, _png_bytes(img))
    return 0


def _cmd_sketchfield(args) -> int:
    sketches = sketches_from_json(_read_text(args.sketch))
    mask = flds.mask_from_png(args.mask)
    fld = synthesize_field(sketches, mask, sigma=args.sigma)
    _atomic_write(args.outfile, flds.save_flo(fld))
    return 0


def _cmd_animate(args) -> int:
    image = flds.image_from_png(args.image)
    mask = flds.mask_from_png(args.mask)
    fld = flds.load_flo(_read_bytes(args.field))
    seq = render_loop(image, fld, mask, args.frames, z_policy=args.z)
    os.makedirs(args.out_dir, exist_ok=True)
    for n, frame in enumerate(seq.frames):
        _atomic_write(os.path.join(args.out_dir, f"frame_{n:04d}.png"), _png_bytes(frame))
    return 0


def _json_number(value: float):
    return "inf" if math.isinf(value) else value


def _cmd_metrics(args) -> int:
    if not args.field and not args.image:
        raise ValueError("metrics needs --field and/or --image inputs")
    out = {}
    mask = flds.mask_from_png(args.mask) if args.mask else None
    if args.field:
        fa = flds.load_flo(_read_bytes(args.field[0]))
        fb = flds.load_flo(_read_bytes(args.field[1]))
        out["aepe"] = aepe(fa, fb, mask)
        out["mse"] = mse(fa, fb)
    if args.image:
        ia = flds.image_from_png(args.image[0])
        ib = flds.image_from_png(args.image[1])
        out["psnr"] = _json_number(psnr(ia, ib))
        out["ms_ssim"] = ms_ssim(ia, ib)
        if "mse" not in out:
            out["mse"] = mse(ia, ib)
    print(json.dumps(out, sort_keys=True))
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(data_dir=args.data_dir, studio_dir=args.studio_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flowloop",
        description="Loop a still image: fields, sketches, splatting, metrics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("visualize", help="render a .flo field with the flow color wheel")
    p.add_argument("infile", help="input .flo motion field")
    p.add_argument("outfile", help="output PNG")
    p.add_argument("--max-rad", default="auto", help="normalization radius or 'auto'")
    p.set_defaults(func=_cmd_visualize)

    p = sub.add_parser("streamlines", help="extract 20-point streamline sketches from a field")
    p.add_argument("infile", help="input .flo motion field")
    p.add_argument("mask", help="fluid mask PNG")
    p.add_argument("outfile", help="output sketch JSON")
    p.add_argument("--seed-spacing", type=float, default=32.0)
    p.add_argument("--h", type=float, default=0.5, help="RK4 step size")
    p.add_argument("--max-steps", type=int, default=200)
    p.add_argument("--min-speed", type=float, default=0.3, help="mean-speed filter, px/frame")
    p.add_argument("--min-length", type=float, default=24.0, help="arc-length filter, px")
    p.set_defaults(func=_cmd_streamlines)

    p = sub.add_parser("rasterize", help="draw sketches as gradient grey lines")
    p.add_argument("sketch", help="sketch JSON")
    p.add_argument("outfile", help="output PNG")
    p.add_argument("--thickness", type=float, default=3.0)
    p.set_defaults(func=_cmd_rasterize)

    p = sub.add_parser("sketchfield", help="synthesize a dense field from sketches")
    p.add_argument("sketch", help="sketch JSON")
    p.add_argument("mask", help="fluid mask PNG")
    p.add_argument("outfile", help="output .flo field")
    p.add_argument("--sigma", type=float, default=25.0, help="Gaussian falloff, px")
    p.set_defaults(func=_cmd_sketchfield)

    p = sub.add_parser("animate", help="render a seamless loop as a PNG frame sequence")
    p.add_argument("image", help="source image PNG")
    p.add_argument("mask", help="fluid mask PNG")
    p.add_argument("field", help=".flo motion field")
    p.add_argument("out_dir", help="output directory for frame_%%04d.png")
    p.add_argument("--frames", type=int, default=60)
    p.add_argument("--z", default="uniform", help="importance policy: uniform or mag[:gamma]")
    p.set_defaults(func=_cmd_animate)

    p = sub.add_parser("metrics", help="compare fields and/or images, JSON to stdout")
    p.add_argument("--field", nargs=2, metavar=("A.flo", "B.flo"))
    p.add_argument("--image", nargs=2, metavar=("A.png", "B.png"))
    p.add_argument("--mask", help="restrict aepe to a mask PNG")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("serve", help="run the interactive session service")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--data-dir", default=None, help="optional session snapshot directory")
    p.add_argument("--studio-dir", default=None, help="serve a built studio UI at /studio")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"flowloop: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
