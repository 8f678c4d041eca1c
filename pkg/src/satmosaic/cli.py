"""Command-line entry points: seam metric, region rendering, tile server."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .config import EngineConfig
from .geometry import Rect
from .metrics import MotConfig, mot_field, mot_summary, seam_verdict


def _load_config(path: str | None) -> EngineConfig:
    if path:
        return EngineConfig.from_json(path)
    return EngineConfig()


def _load_map(path: str):
    from .vectormap import parse_map

    return parse_map(Path(path).read_bytes())


def cmd_mot(args: argparse.Namespace) -> int:
    from .imaging import load_image

    image = load_image(args.image)
    field = mot_field(image, MotConfig(tile_width=args.tile_width))
    summary = mot_summary(field)
    verdict = seam_verdict(summary, args.threshold)
    ax, ay = field.argmax()
    if args.json:
        print(json.dumps({"summary": summary, "verdict": verdict, "argmax": [ax, ay]}))
    else:
        print(f"summary  {summary:.6f}")
        print(f"verdict  {verdict} (threshold {args.threshold})")
        print(f"argmax   x={ax} y={ay}")
    return 0


def cmd_render(args: argparse.Namespace) -> int:
    from .imaging import gray_png, save_image
    from .orchestrator import Orchestrator
    from .scalespace import Layer, tiles_covering

    cfg = _load_config(args.config)
    if args.provider:
        cfg = cfg.with_overrides(mask_provider=args.provider)
    vmap = _load_map(args.map)
    orch = Orchestrator(vmap, cfg)
    session = orch.create_session(args.style)
    x0, y0, x1, y1 = (float(v) for v in args.rect.split(","))
    rect = Rect(x0, y0, x1, y1)
    image = orch.render_region(session, args.z, rect, mode=args.mode)
    save_image(args.out, image)
    report = orch.cost_report(session)
    print(f"wrote {args.out} ({image.shape[1]}x{image.shape[0]} px, "
          f"{report.actual_generator_evals} generator evals, "
          f"{report.actual_blend_evals} blends)")
    if args.dump_masks:
        outdir = Path(args.dump_masks)
        outdir.mkdir(parents=True, exist_ok=True)
        for addr in tiles_covering(rect, args.z, cfg.scale, Layer.OUT):
            mask = orch.debug_mask(session, addr)
            path = outdir / f"mask_z{addr.z}_x{addr.x}_y{addr.y}.png"
            path.write_bytes(gray_png(mask))
        print(f"wrote masks to {outdir}")
    if args.mot_report:
        try:
            field = mot_field(image)
        except ValueError as exc:
            print(f"mot report unavailable: {exc}")
        else:
            summary = mot_summary(field)
            print(f"mot summary {summary:.6f} -> {seam_verdict(summary)}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .orchestrator import Orchestrator
    from .tileserver import create_app

    cfg = _load_config(args.config or os.environ.get("SATMOSAIC_CONFIG"))
    map_path = args.map or os.environ.get("SATMOSAIC_MAP")
    if not map_path:
        print("serve: no map given (use --map or SATMOSAIC_MAP)", file=sys.stderr)
        return 2
    orch = Orchestrator(_load_map(map_path), cfg)
    app = create_app(orch, ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    from .vectormap import serialize_map, synth_procedural_map

    extent = Rect(0.0, 0.0, float(args.size), float(args.size))
    vmap = synth_procedural_map(args.seed, extent, road_spacing=args.road_spacing)
    Path(args.out).write_text(serialize_map(vmap))
    print(f"wrote {args.out} ({len(vmap.polygons)} polygons, {args.size} m square)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="satmosaic")
    sub = p.add_subparsers(dest="command", required=True)

    mot = sub.add_parser("mot", help="seam metric over an image")
    mot.add_argument("image")
    mot.add_argument("--tile-width", type=int, default=256)
    mot.add_argument("--threshold", type=float, default=0.002)
    mot.add_argument("--json", action="store_true")
    mot.set_defaults(func=cmd_mot)

    render = sub.add_parser("render", help="render a world region to PNG")
    render.add_argument("--map", required=True)
    render.add_argument("--style", type=int, required=True, help="style seed")
    render.add_argument("--z", type=int, required=True)
    render.add_argument("--rect", required=True, help="x0,y0,x1,y1 in meters")
    render.add_argument("--out", required=True)
    render.add_argument("--provider", choices=["soft", "cut", "model"])
    render.add_argument("--mode", choices=["full", "naive_t", "naive_s"], default="full")
    render.add_argument("--mot-report", action="store_true")
    render.add_argument("--dump-masks", metavar="DIR")
    render.add_argument("--config")
    render.set_defaults(func=cmd_render)

    serve = sub.add_parser("serve", help="run the HTTP tile server")
    serve.add_argument("--map")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--config")
    serve.add_argument("--ui-dir", default=None)
    serve.set_defaults(func=cmd_serve)

    synth = sub.add_parser("synth", help="write a procedural test map")
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--size", type=float, default=4000.0, help="extent in meters")
    synth.add_argument("--road-spacing", type=float, default=200.0)
    synth.add_argument("--out", required=True)
    synth.set_defaults(func=cmd_synth)

    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
