"""Command-line entry point tying the evaluation modules together.

Exit codes: 0 success, 1 data/validation error, 2 usage error.  Failures
print a single machine-parseable line ``error: <Type>: <message>`` on
stderr.  ``--seed`` is accepted by every subcommand that uses randomness;
``R2S_THREADS`` caps worker threads.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from pathlib import Path

from . import __version__
from .agreement import (
    AgreementConfig,
    agreement_range_curve,
    detection_agreement_detail,
    map_agreement_detail,
)
from .analysis import correlate_metric, gap_table
from .augment import AugmentConfig, augment_image, plan_mixing, write_mixing_plans
from .deteval import DetEvalConfig, evaluate_detections
from .errors import ParseError, Real2SimError, UsageError, ValidationError
from .fvec import load_feature_set
from .geom import EgoPerturbation, transform_manifest
from .imageio import load_image, save_image
from .imgmetrics import (
    aggregate_scene,
    compare_pair,
    frechet_distance,
    read_lpips_csv,
    write_scene_metrics_csv,
)
from .manifest import load_manifest, save_manifest
from .mapeval import MapEvalConfig, evaluate_map
from .parallel import parallel_map

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


def _dump_json(obj, out: str | None) -> None:
    text = json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _config_from_json(cls, path: str | None):
    if path is None:
        return cls()
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read config {path}: {exc}") from exc
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(obj) - known
    if unknown:
        raise ValidationError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    coerced = {
        key: tuple(value) if isinstance(value, list) else value for key, value in obj.items()
    }
    try:
        return cls(**coerced)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"bad {cls.__name__} in {path}: {exc}") from exc


def _list_images(root: Path) -> list[Path]:
    return sorted(
        p.relative_to(root) for p in root.rglob("*") if p.suffix.lower() in IMAGE_SUFFIXES
    )


def _cmd_eval_det(args) -> int:
    config = _config_from_json(DetEvalConfig, args.config)
    preds = load_manifest(args.a).boxes_by_frame()
    gts = load_manifest(args.b).boxes_by_frame()
    report = evaluate_detections(preds, gts, config)
    _dump_json(report.to_json(), args.out)
    return 0


def _cmd_eval_map(args) -> int:
    config = _config_from_json(MapEvalConfig, args.config)
    preds = load_manifest(args.a).polylines_by_frame()
    gts = load_manifest(args.b).polylines_by_frame()
    report = evaluate_map(preds, gts, config)
    _dump_json(report.to_json(), args.out)
    return 0


def _cmd_agreement(args) -> int:
    config = _config_from_json(AgreementConfig, args.config)
    ma, mb = load_manifest(args.a), load_manifest(args.b)
    if args.map:
        result = map_agreement_detail(ma.polylines_by_frame(), mb.polylines_by_frame(), config)
    else:
        result = detection_agreement_detail(ma.boxes_by_frame(), mb.boxes_by_frame(), config)
    print(f"da = {result.da}")
    if args.out:
        _dump_json(result.to_json(), args.out)
    return 0


def _cmd_range_curve(args) -> int:
    config = _config_from_json(AgreementConfig, args.config)
    if args.fractions:
        fractions = tuple(float(f) for f in args.fractions.split(","))
        config = dataclasses.replace(config, range_fractions=fractions)
    ma, mb = load_manifest(args.a), load_manifest(args.b)
    curve = agreement_range_curve(ma.boxes_by_frame(), mb.boxes_by_frame(), config)
    lines = ["fraction,da"] + [f"{frac!r},{da!r}" for frac, da in curve]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_augment(args) -> int:
    config = _config_from_json(AugmentConfig, args.config)
    in_path = Path(getattr(args, "in"))
    out_root = Path(args.out)

    if in_path.is_dir():
        rel_paths = [str(p) for p in _list_images(in_path)]
        root = in_path
    else:
        manifest = load_manifest(in_path)
        root = in_path.parent
        rel_paths = sorted(
            {path for frame in manifest.frames for path in frame.images.values()}
        )
        for rel in rel_paths:
            if Path(rel).is_absolute() or ".." in Path(rel).parts:
                raise ValidationError(f"manifest image path {rel!r} must be relative")
    if not rel_paths:
        raise ValidationError(f"no images found under {in_path}")

    def work(rel: str) -> str:
        img = load_image(root / rel)
        result = augment_image(img, config, args.seed, rel, epoch=args.epoch)
        dest = out_root / rel
        dest.parent.mkdir(parents=True, exist_ok=True)
        save_image(result, dest)
        return rel

    done = parallel_map(work, rel_paths)
    print(f"augmented {len(done)} images -> {out_root}")
    return 0


def _cmd_mix_plan(args) -> int:
    try:
        samples = json.loads(Path(args.samples).read_text(encoding="utf-8"))
        rendered = json.loads(Path(args.rendered).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read mixing inputs: {exc}") from exc
    plans = plan_mixing(samples, rendered, args.p, args.seed, args.epochs)
    write_mixing_plans(plans, args.out)
    total = sum(len(p.entries) for p in plans)
    print(f"planned {total} entries over {len(plans)} epochs -> {args.out}")
    return 0


def _cmd_transform(args) -> int:
    pert = EgoPerturbation.parse(args.pert)
    manifest = load_manifest(getattr(args, "in"))
    transformed, messages = transform_manifest(manifest, pert)
    for message in messages:
        print(f"warning: {message}", file=sys.stderr)
    save_manifest(transformed, args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_img_metrics(args) -> int:
    root_a, root_b = Path(args.a), Path(args.b)
    rel_a = set(map(str, _list_images(root_a)))
    rel_b = set(map(str, _list_images(root_b)))
    shared = sorted(rel_a & rel_b)
    for rel in sorted((rel_a | rel_b) - (rel_a & rel_b)):
        print(f"warning: unpaired image {rel}", file=sys.stderr)
    if not shared:
        raise ValidationError("no image pairs with matching relative paths")

    lpips = read_lpips_csv(args.lpips) if args.lpips else {}

    def work(rel: str):
        return compare_pair(load_image(root_a / rel), load_image(root_b / rel), rel, lpips.get(rel))

    pairs = parallel_map(work, shared)
    lines = ["image_id,psnr,ssim,lpips"]
    for m in pairs:
        lp = "" if m.lpips is None else repr(m.lpips)
        lines.append(f"{m.image_id},{m.psnr!r},{m.ssim!r},{lp}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)

    if args.scene_out:
        feats_real = load_feature_set(args.feats_a) if args.feats_a else None
        feats_sim = load_feature_set(args.feats_b) if args.feats_b else None
        scene = aggregate_scene(args.scene_id, pairs, feats_real, feats_sim, args.da)
        write_scene_metrics_csv([scene], args.scene_out)
    return 0


def _cmd_frechet(args) -> int:
    value = frechet_distance(load_feature_set(args.a), load_feature_set(args.b), args.eps)
    print(f"frechet = {value}")
    if args.out:
        _dump_json({"frechet": value, "eps": args.eps}, args.out)
    return 0


def _cmd_correlate(args) -> int:
    path = Path(getattr(args, "in"))
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ParseError(f"{path}: no data rows")
    if args.metric not in rows[0] or "da" not in rows[0]:
        raise ValidationError(f"{path}: need columns {args.metric!r} and 'da'")

    def to_points(subset):
        return [
            (float(r[args.metric]), float(r["da"]))
            for r in subset
            if r[args.metric] not in ("", None) and r["da"] not in ("", None)
        ]

    group_col = args.group_col if args.group_col in rows[0] else None
    results = []
    svg_points = []
    if args.pool or group_col is None:
        points = to_points(rows)
        results.append(correlate_metric(args.metric, points))
        svg_points = [(x, y, "all") for x, y in points]
    else:
        groups = []
        for row in rows:
            if row[group_col] not in groups:
                groups.append(row[group_col])
        for group in groups:
            points = to_points([r for r in rows if r[group_col] == group])
            result = correlate_metric(args.metric, points)
            results.append(
                dataclasses.replace(result, metric_name=f"{args.metric}[{group}]")
            )
            svg_points.extend((x, y, group) for x, y in points)

    _dump_json([r.to_json() for r in results], args.out)
    if args.svg:
        from .svgplot import scatter_svg

        Path(args.svg).write_text(
            scatter_svg(svg_points, (args.metric, "da")), encoding="utf-8"
        )
    return 0


def _cmd_report(args) -> int:
    try:
        entries = json.loads(Path(getattr(args, "in")).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read results: {exc}") from exc
    triples = [(e["method"], e["eval_data"], e["metrics"]) for e in entries]
    table = gap_table(triples, baseline=args.baseline)
    Path(args.out).write_text(table.to_markdown(), encoding="utf-8")
    if args.csv:
        Path(args.csv).write_text(table.to_csv(), encoding="utf-8")
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="r2s", description="real-to-sim perception gap toolkit"
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval-det", help="detection evaluation (a=predictions, b=labels)")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--config")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_eval_det)

    p = sub.add_parser("eval-map", help="online-mapping evaluation")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--config")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_eval_map)

    p = sub.add_parser("agreement", help="detection/map agreement between two result sets")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--map", action="store_true", help="use map elements instead of boxes")
    p.add_argument("--config")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_agreement)

    p = sub.add_parser("range-curve", help="agreement vs. evaluation-range fraction")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--fractions", help="comma-separated fractions in (0, 1]")
    p.add_argument("--config")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_range_curve)

    p = sub.add_parser("augment", help="apply the artifact-emulation pipeline to images")
    p.add_argument("--config")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epoch", type=int, default=0)
    p.add_argument("--in", required=True, help="image directory or scene manifest")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(fn=_cmd_augment)

    p = sub.add_parser("mix-plan", help="plan real/rendered sample mixing per epoch")
    p.add_argument("--samples", required=True, help="JSON array of sample ids")
    p.add_argument("--rendered", required=True, help="JSON object sample id -> rendered path")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_mix_plan)

    p = sub.add_parser("transform", help="perturb a scene's ego poses and annotations")
    p.add_argument("--pert", required=True, help="lateral:+2.0 or rot:-30")
    p.add_argument("--in", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_transform)

    p = sub.add_parser("img-metrics", help="PSNR/SSIM (+ingested LPIPS) over paired folders")
    p.add_argument("--a", required=True, help="reference image folder")
    p.add_argument("--b", required=True, help="comparison image folder")
    p.add_argument("--lpips", help="CSV image_id,lpips from the feature-dump helper")
    p.add_argument("--out")
    p.add_argument("--scene-id", default="scene")
    p.add_argument("--scene-out", help="also write a scene-level CSV")
    p.add_argument("--feats-a", help="FVEC features of side a (for FID)")
    p.add_argument("--feats-b", help="FVEC features of side b (for FID)")
    p.add_argument("--da", type=float)
    p.set_defaults(fn=_cmd_img_metrics)

    p = sub.add_parser("frechet", help="Fréchet distance between two FVEC feature files")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_frechet)

    p = sub.add_parser("correlate", help="correlate a per-scene metric against DA")
    p.add_argument("--in", required=True, help="scene metrics CSV")
    p.add_argument("--metric", required=True, help="metric column name (e.g. fid)")
    p.add_argument("--group-col", default="group")
    p.add_argument("--pool", action="store_true", help="pool all groups into one correlation")
    p.add_argument("--out")
    p.add_argument("--svg", help="also emit a scatter plot")
    p.set_defaults(fn=_cmd_correlate)

    p = sub.add_parser("report", help="real/sim/gap table from per-method metrics")
    p.add_argument("--in", required=True, help="JSON list of {method, eval_data, metrics}")
    p.add_argument("--baseline", help="baseline method (default: first)")
    p.add_argument("--out", required=True, help="markdown output path")
    p.add_argument("--csv", help="CSV output path")
    p.set_defaults(fn=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except Real2SimError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
