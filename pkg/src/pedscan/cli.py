"""Command-line entry point: ``pedscan {segment,analyze,synth,batch}``.

Exit codes: 0 success, 2 I/O problem, 3 invalid configuration,
4 image content the pipeline cannot handle (e.g. a single foot).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Any, Optional, Sequence

from . import __version__
from .asymmetry import CATEGORIES, corpus_metrics
from .errors import ConfigError, GeometryError, ImageFormatError, SegmentationError
from .ga import GAConfig, segment
from .imaging import load_image, save_annotated, save_image, save_mask
from .pipeline import (BOTH, METHOD_CHOICES, PipelineConfig, analyze, grid_overlay,
                       report_overlay, segment_image)
from .radial import ScanConfig
from .synth import GroundTruth, corpus_categories, corpus_spec, generate

log = logging.getLogger("pedscan")

EXIT_OK = 0
EXIT_IO = 2
EXIT_CONFIG = 3
EXIT_CONTENT = 4

SEED_ENV = "PEDSCAN_SEED"
MANIFEST_NAME = "manifest.json"


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _fixed(value: Any) -> Any:
    if isinstance(value, float):
        return round(value, 6)
    if isinstance(value, dict):
        return {str(k): _fixed(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_fixed(v) for v in value]
    return value


def dumps(payload: Any) -> str:
    """Stable JSON: sorted keys, floats rounded to 6 decimals, trailing newline."""
    return json.dumps(_fixed(payload), sort_keys=True, indent=2) + "\n"


def _write_json(payload: Any, path: Path) -> None:
    path.write_text(dumps(payload))


def _seed(args: argparse.Namespace) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError as exc:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from exc


def _ga_config(args: argparse.Namespace) -> GAConfig:
    return GAConfig(population_size=args.population, cross_rate=args.cross_rate,
                    mutation_rate=args.mutation_rate, max_generations=args.generations,
                    rng_seed=_seed(args))


def _pipeline_config(args: argparse.Namespace) -> PipelineConfig:
    scan = ScanConfig(lines=args.lines, step_l=args.step, compare_threshold=args.threshold,
                      exclude_edge_margin=args.edge_margin)
    return PipelineConfig(ga=_ga_config(args), scan=scan, method=args.method,
                          heel_direction=math.radians(args.heel_direction),
                          calibration=args.calibration, exhaustive=args.exhaustive)


def _add_ga_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("segmentation")
    g.add_argument("--seed", type=int, default=None,
                   help=f"GA random seed (default: ${SEED_ENV} or 0)")
    g.add_argument("--population", type=int, default=GAConfig.population_size)
    g.add_argument("--generations", type=int, default=GAConfig.max_generations)
    g.add_argument("--cross-rate", type=float, default=GAConfig.cross_rate)
    g.add_argument("--mutation-rate", type=float, default=GAConfig.mutation_rate)
    g.add_argument("--exhaustive", action="store_true",
                   help="score all 256 thresholds instead of running the GA")


def _add_scan_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("comparison")
    g.add_argument("--lines", type=int, default=ScanConfig.lines,
                   help="radial lines per foot (at least 72, i.e. at most 5 degrees apart)")
    g.add_argument("--step", type=int, default=ScanConfig.step_l,
                   help="pixels between comparison points on the left foot")
    g.add_argument("--threshold", type=int, default=ScanConfig.compare_threshold,
                   help="intensity difference above which a point is abnormal; "
                        "about 11 levels match a 2.2 degC difference at 0.2 degC/level")
    g.add_argument("--edge-margin", type=int, default=ScanConfig.exclude_edge_margin,
                   help="samples nearest the foot edge left out of the scan comparison")
    g.add_argument("--method", choices=METHOD_CHOICES, default=BOTH)
    g.add_argument("--heel-direction", type=float, default=90.0,
                   help="direction of the heel from the centroid, degrees (90 = image bottom)")
    g.add_argument("--calibration", type=float, default=None,
                   help="degrees Celsius per intensity level for report labels")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pedscan", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("segment", help="threshold an image with the genetic algorithm")
    p.add_argument("image")
    _add_ga_flags(p)
    p.add_argument("--out", default=".", help="output directory")

    p = sub.add_parser("analyze", help="detect left/right thermal asymmetries in one image")
    p.add_argument("image")
    _add_ga_flags(p)
    _add_scan_flags(p)
    p.add_argument("--out", default=".", help="output directory")

    p = sub.add_parser("synth", help="write the 140-image synthetic corpus and its manifest")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--noise", type=int, default=1, help="uniform noise amplitude, levels")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("batch", help="analyze every image of a manifest with both methods")
    p.add_argument("manifest")
    _add_ga_flags(p)
    _add_scan_flags(p)
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--out", default=None, help="metrics JSON file (default: stdout)")
    return parser


def cmd_segment(args: argparse.Namespace) -> int:
    path = Path(args.image)
    image = load_image(path)
    config = PipelineConfig(ga=_ga_config(args), exhaustive=args.exhaustive)
    result = segment_image(image, config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_mask(segment(image, result.threshold), out / f"{path.stem}_mask.png")
    stats = result.stats
    _write_json({
        "image": path.name,
        "threshold": result.threshold,
        "fitness": stats.fitness,
        "num_foreground": stats.num_f,
        "num_background": stats.num_b,
        "mean_foreground": stats.m_f,
        "mean_background": stats.m_b,
        "generations_run": result.generations_run,
        "method": "exhaustive" if args.exhaustive else "genetic",
        "ga_config": config.ga.to_dict(),
    }, out / f"{path.stem}_threshold.json")
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    path = Path(args.image)
    config = _pipeline_config(args)
    image = load_image(path)
    if config.calibration is not None:
        image = replace(image, calibration=config.calibration)
    analysis = analyze(image, config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = path.stem
    summary = {
        "image": path.name,
        "segmentation_threshold": analysis.segmentation.threshold,
        "celsius_per_level": image.celsius_per_level,
        "compare_threshold_celsius": config.scan.compare_threshold * image.celsius_per_level,
        "feet": {r.side: {k: v for k, v in r.to_dict().items() if k != "edge"}
                 for r in (analysis.left, analysis.right)},
        "reports": {m: r.to_dict() for m, r in analysis.reports.items()},
    }
    for method, report in analysis.reports.items():
        _write_json(report.to_dict(), out / f"{stem}_{method}.json")
        save_annotated(image, [report_overlay(report)], out / f"{stem}_{method}.png")
    if analysis.grids is not None:
        save_annotated(image, [grid_overlay(analysis)], out / f"{stem}_grid.png")
        _write_json({"left": analysis.grids[0].to_dict(), "right": analysis.grids[1].to_dict()},
                    out / f"{stem}_grids.json")
    _write_json(summary, out / f"{stem}_analysis.json")
    for method, report in sorted(analysis.reports.items()):
        counts = report.per_side_counts
        print(f"{path.name}: {method}: {len(report.points)} abnormal points "
              f"(left {counts['left']}, right {counts['right']})")
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    seed = _seed(args)
    if args.noise < 0:
        raise ConfigError("--noise must be non-negative")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for index, category in enumerate(corpus_categories()):
        image, truth = generate(corpus_spec(seed, index, args.noise))
        name = f"img_{index:03d}.pgm"
        save_image(image, out / name)
        entries.append({"file": name, "category": category, "ground_truth": truth.to_dict()})
    _write_json({"seed": seed, "noise": args.noise, "images": entries}, out / MANIFEST_NAME)
    log.info("wrote %d images to %s", len(entries), out)
    return EXIT_OK


def _load_manifest(path: Path) -> list[dict]:
    try:
        payload = json.loads(path.read_text())
    except ValueError as exc:
        raise ConfigError(f"{path}: manifest is not valid JSON ({exc})") from exc
    images = payload.get("images", []) if isinstance(payload, dict) else payload
    if not isinstance(images, list):
        raise ConfigError(f"{path}: manifest 'images' must be a list")
    for entry in images:
        if not isinstance(entry, dict) or "file" not in entry or "category" not in entry:
            raise ConfigError(f"{path}: every manifest entry needs 'file' and 'category'")
        if entry["category"] not in CATEGORIES:
            raise ConfigError(f"{path}: unknown category {entry['category']!r}")
    return images


def _analyze_entry(task: tuple[str, str, dict, PipelineConfig]):
    file, category, truth, config = task
    try:
        image = load_image(file)
        analysis = analyze(image, config)
    except (SegmentationError, GeometryError) as exc:
        raise type(exc)(f"{file}: {exc}") from exc
    hotspots = GroundTruth.hotspots_from_dict(truth)
    return [(category, report, hotspots) for _, report in sorted(analysis.reports.items())]


def cmd_batch(args: argparse.Namespace) -> int:
    manifest = Path(args.manifest)
    entries = _load_manifest(manifest)
    config = _pipeline_config(args)
    if config.method != BOTH:
        config = replace(config, method=BOTH)
    tasks = []
    for entry in entries:
        file = manifest.parent / entry["file"]
        if not file.is_file():
            raise FileNotFoundError(f"{file}: no such image file")
        tasks.append((str(file), entry["category"], entry.get("ground_truth", {}), config))
    if args.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_analyze_entry, tasks))
    else:
        results = [_analyze_entry(t) for t in tasks]
    metrics = corpus_metrics(item for per_image in results for item in per_image)
    payload = {
        "images": len(tasks),
        "config": {"ga": config.ga.to_dict(), "scan": config.scan.to_dict()},
        **metrics.to_dict(),
    }
    text = dumps(payload)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {"segment": cmd_segment, "analyze": cmd_analyze, "synth": cmd_synth, "batch": cmd_batch}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors, --help and --version
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (OSError, ImageFormatError) as exc:
        print(f"pedscan: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConfigError as exc:
        print(f"pedscan: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SegmentationError, GeometryError) as exc:
        print(f"pedscan: cannot analyze image: {exc}", file=sys.stderr)
        return EXIT_CONTENT


if __name__ == "__main__":
    sys.exit(main())
