"""Command-line front end: encode/decode, metrics, BD-Rate, break-even, and
the rate-distortion theory lab.

Exit codes: 0 success, 1 verification failed (rdlab inequality violation),
2 usage or I/O error.  Output files are written atomically (temp + rename);
failed commands leave no partial output.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from . import evalkit, rdtheory
from .codec import CodecConfig, ScalableBitstream, decode_sequence, encode_sequence
from .codec.container import ContainerError
from .codec.y4m import Y4MError, read_y4m, read_yuv420, write_y4m

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2


class CommandError(Exception):
    def __init__(self, message: str, code: int = EXIT_USAGE):
        super().__init__(message)
        self.code = code


def _atomic_write_bytes(path: str, data: bytes) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _atomic_write_text(path: str, text: str) -> None:
    _atomic_write_bytes(path, text.encode("utf-8"))


def _load_frames(args):
    if not os.path.exists(args.input):
        raise CommandError(f"input file not found: {args.input}")
    try:
        if args.input.endswith(".y4m"):
            frames, _ = read_y4m(args.input)
        else:
            if args.width is None or args.height is None:
                raise CommandError("raw YUV input needs --width and --height")
            frames = read_yuv420(args.input, args.width, args.height)
    except Y4MError as exc:
        raise CommandError(str(exc)) from exc
    if not frames:
        raise CommandError(f"{args.input}: no frames")
    return frames


def cmd_encode(args) -> int:
    frames = _load_frames(args)
    try:
        config = CodecConfig(quality=args.q, gop=args.gop, block=args.block,
                             search=args.search, fusion_weight=args.fusion_weight,
                             enhancement=(args.layers == "base+enh"))
    except ValueError as exc:
        raise CommandError(str(exc)) from exc
    stream, report = encode_sequence(frames, config)
    _atomic_write_bytes(args.output, stream.serialize())
    if args.report:
        _atomic_write_text(args.report, report.to_json())
    print(f"encoded {report.frame_count} frames -> {args.output} "
          f"({report.bpp():.4f} bpp, base {report.bpp('base'):.4f} bpp)")
    return EXIT_OK


def cmd_decode(args) -> int:
    if not os.path.exists(args.input):
        raise CommandError(f"input file not found: {args.input}")
    with open(args.input, "rb") as f:
        raw = f.read()
    try:
        stream = ScalableBitstream.deserialize(raw)
    except ContainerError as exc:
        raise CommandError(str(exc)) from exc
    frames, report = decode_sequence(stream, args.layers)
    if not frames:
        raise CommandError(f"no decodable frames: {report.error}")
    write_y4m(args.output + ".part", frames)
    os.replace(args.output + ".part", args.output)
    if args.report:
        _atomic_write_text(args.report, report.to_json())
    if report.error is not None:
        print(f"partial decode: {len(frames)} frames ({report.error})",
              file=sys.stderr)
        return EXIT_USAGE
    print(f"decoded {len(frames)} frames ({args.layers}) -> {args.output}")
    return EXIT_OK


def cmd_metrics(args) -> int:
    ref = _load_frames(argparse.Namespace(input=args.reference, width=args.width,
                                          height=args.height))
    test = _load_frames(argparse.Namespace(input=args.input, width=args.width,
                                           height=args.height))
    if len(ref) != len(test):
        raise CommandError(f"frame count mismatch: {len(ref)} vs {len(test)}")
    rows = []
    for a, b in zip(ref, test):
        entry = {"frame": a.index, "psnr": evalkit.psnr_rgb(a, b)}
        if args.msssim:
            entry["msssim"] = evalkit.msssim_rgb(a, b)
        rows.append(entry)
    finite = [r["psnr"] for r in rows if r["psnr"] != evalkit.PSNR_INF]
    out = {
        "frames": [{k: (None if v == evalkit.PSNR_INF else v) for k, v in r.items()}
                   for r in rows],
        "mean_psnr": float(np.mean(finite)) if finite else None,
        "all_identical": not finite,
    }
    if args.msssim:
        out["mean_msssim"] = float(np.mean([r["msssim"] for r in rows]))
    text = json.dumps(out, indent=2)
    if args.output:
        _atomic_write_text(args.output, text)
    else:
        print(text)
    return EXIT_OK


def cmd_bdrate(args) -> int:
    curves = {(c.label, c.metric): c for c in evalkit.read_rd_csv(args.curves)}
    try:
        anchor = curves[(args.anchor, args.metric)]
        test = curves[(args.test, args.metric)]
    except KeyError as exc:
        raise CommandError(f"curve not found in {args.curves}: {exc}") from exc
    try:
        bd = evalkit.bd_rate(anchor, test)
    except (evalkit.OverlapError, evalkit.CurveError) as exc:
        raise CommandError(str(exc)) from exc
    out = {"anchor": args.anchor, "test": args.test, "metric": args.metric,
           "bd_rate_percent": bd}
    text = json.dumps(out, indent=2)
    if args.output:
        _atomic_write_text(args.output, text)
    else:
        print(text)
    return EXIT_OK


def cmd_breakeven(args) -> int:
    if args.summary:
        rows = evalkit.read_bd_summary_csv(args.summary)
        try:
            report = evalkit.table_pipeline(rows, reference=args.reference)
        except ValueError as exc:
            raise CommandError(str(exc)) from exc
        text = report.to_json() if args.json else report.to_text()
    else:
        if args.a is None or args.b is None:
            raise CommandError("need either --summary or both --a and --b")
        try:
            result = evalkit.break_even(args.a, args.b)
        except ValueError as exc:
            raise CommandError(str(exc)) from exc
        text = json.dumps({"phi": result.phi, "regime": result.regime}, indent=2)
    if args.output:
        _atomic_write_text(args.output, text)
    else:
        print(text)
    return EXIT_OK


def cmd_rdlab(args) -> int:
    """Randomized sweep verifying that conditional coding never needs more
    rate than residual coding, at matched Lagrangian slope."""
    rng = np.random.default_rng(args.seed)
    slopes = [float(s) for s in np.geomspace(0.01, 10.0, args.slopes)]
    worst = []
    violations = 0
    for j in range(args.joints):
        joint = rdtheory.random_joint(rng)
        dmat = rdtheory.DistortionMatrix.squared_error(
            rdtheory.residual_alphabet(joint))
        results = rdtheory.verify_rd_inequality(joint, dmat, slopes,
                                                tol=args.tolerance,
                                                ba_max_iters=400_000)
        violations += sum(1 for r in results if not r.holds)
        worst.append({"joint": j,
                      "worst_margin": min(r.margin for r in results)})
    out = {
        "joints": args.joints,
        "slopes": args.slopes,
        "seed": args.seed,
        "tolerance": args.tolerance,
        "violations": violations,
        "all_hold": violations == 0,
        "per_joint_worst_margins": worst,
    }
    text = json.dumps(out, indent=2)
    if args.output:
        _atomic_write_text(args.output, text)
    else:
        print(text)
    return EXIT_OK if violations == 0 else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="svhm",
        description="Scalable human/machine video coding toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    enc = sub.add_parser("encode", help="encode Y4M/YUV to a scalable container")
    enc.add_argument("--in", dest="input", required=True, help="input .y4m or raw .yuv")
    enc.add_argument("--out", dest="output", required=True, help="output container path")
    enc.add_argument("--q", type=int, default=2, help="quality index 0..3 (coarse..fine)")
    enc.add_argument("--gop", type=int, default=32, help="intra period")
    enc.add_argument("--block", type=int, default=16, help="motion block size")
    enc.add_argument("--search", type=int, default=8, help="motion search range")
    enc.add_argument("--fusion-weight", type=float, default=0.5,
                     help="enhancement context blend toward the base frame")
    enc.add_argument("--layers", choices=["base", "base+enh"], default="base+enh",
                     help="'base' leaves enhancement sub-streams empty")
    enc.add_argument("--width", type=int, help="raw YUV width")
    enc.add_argument("--height", type=int, help="raw YUV height")
    enc.add_argument("--report", help="write rate report JSON here")
    enc.set_defaults(func=cmd_encode)

    dec = sub.add_parser("decode", help="decode a scalable container to Y4M")
    dec.add_argument("--in", dest="input", required=True)
    dec.add_argument("--out", dest="output", required=True)
    dec.add_argument("--layers", choices=["base", "base+enh"], default="base+enh")
    dec.add_argument("--report", help="write rate report JSON here")
    dec.set_defaults(func=cmd_decode)

    met = sub.add_parser("metrics", help="PSNR/MS-SSIM between two sequences")
    met.add_argument("--ref", dest="reference", required=True)
    met.add_argument("--in", dest="input", required=True)
    met.add_argument("--msssim", action="store_true", help="also compute MS-SSIM")
    met.add_argument("--width", type=int, help="raw YUV width")
    met.add_argument("--height", type=int, help="raw YUV height")
    met.add_argument("--out", dest="output", help="write JSON here instead of stdout")
    met.set_defaults(func=cmd_metrics)

    bdr = sub.add_parser("bdrate", help="BD-Rate between two curves in an RD CSV")
    bdr.add_argument("--curves", required=True, help="CSV: label,metric,bpp,quality")
    bdr.add_argument("--anchor", required=True)
    bdr.add_argument("--test", required=True)
    bdr.add_argument("--metric", default="PSNR")
    bdr.add_argument("--out", dest="output")
    bdr.set_defaults(func=cmd_bdrate)

    bev = sub.add_parser("breakeven", help="break-even point from bit factors or a BD summary CSV")
    bev.add_argument("--a", type=float, help="machine-task bits factor")
    bev.add_argument("--b", type=float, help="human-viewing bits factor")
    bev.add_argument("--summary", help="CSV: dataset,frames,codec,metric,bd_rate")
    bev.add_argument("--reference", default="vvenc")
    bev.add_argument("--json", action="store_true", help="JSON instead of a text table")
    bev.add_argument("--out", dest="output")
    bev.set_defaults(func=cmd_breakeven)

    lab = sub.add_parser("rdlab", help="randomized conditional-vs-residual rate check")
    lab.add_argument("--joints", type=int, default=100)
    lab.add_argument("--slopes", type=int, default=10)
    lab.add_argument("--seed", type=int, default=0)
    lab.add_argument("--tolerance", type=float, default=1e-6)
    lab.add_argument("--out", dest="output")
    lab.set_defaults(func=cmd_rdlab)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except CommandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
