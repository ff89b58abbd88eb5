"""Configuration-driven command line for codebook builds and experiments.

Subcommands: ``codebook`` (export weights + sidecar), ``pattern`` (rasterize
one beam), ``sweep`` (Monte Carlo alignment rate versus SNR), ``worstcase``
(closed form versus brute force per codebook kind).  All parameters come from
a flat ``key=value`` config file plus command-line overrides (flags win).
Angles in output files are radians; every output embeds the resolved config
so reruns with the same inputs are byte-identical.  Exit codes: 0 on success,
2 for configuration errors, 3 for numerical synthesis failures.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from .channel import SECTOR_ELEMENT_GAIN, ElementGainModel
from .codebook import (
    ALL_KINDS,
    CodebookConfig,
    HIERARCHICAL_KINDS,
    SynthesisError,
    build_codebook,
    build_codebook_set,
    export_codebook_csv,
    export_codebook_sidecar,
)
from .geometry import ArrayGeometry
from .metrics import (
    alignment_rate_sweep,
    beam_pattern,
    worst_case_gain_bruteforce,
    worst_case_gain_closed_form,
    write_raster_csv,
    write_sweep_json,
)

DEFAULT_SNR_DB = (10.0, 20.0, 30.0, 40.0, 50.0, 60.0)
DEFAULT_N_SWEEP = (2, 4, 8)


class ConfigError(ValueError):
    """Bad or missing configuration; maps to exit code 2."""


@dataclass
class ExperimentConfig:
    """Resolved experiment parameters; only geometry and n_beams lack defaults."""

    n_y: int
    n_z: int
    n_beams: int
    buffer_width: int = 1
    buffer_gain: float = 0.5
    pinv_tolerance: float = 1e-2
    gain_model: str = "ideal_sector"
    sector_gain: float = SECTOR_ELEMENT_GAIN
    snr_db: tuple[float, ...] = DEFAULT_SNR_DB
    trials: int = 200
    seed: int = 1
    codebooks: tuple[str, ...] | None = None
    output_dir: str = "out"
    resolution: int = 512
    n_sweep: tuple[int, ...] = DEFAULT_N_SWEEP
    figures: bool = True
    phase1_power_split: bool = False

    def codebook_config(self, n_beams: int | None = None) -> CodebookConfig:
        try:
            return CodebookConfig(
                geom=ArrayGeometry(self.n_y, self.n_z),
                n_beams=self.n_beams if n_beams is None else n_beams,
                buffer_width=self.buffer_width,
                buffer_gain=self.buffer_gain,
                pinv_tolerance=self.pinv_tolerance,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def element_gain(self) -> ElementGainModel:
        try:
            return ElementGainModel(kind=self.gain_model, sector_gain=self.sector_gain)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def kinds(self, default: tuple[str, ...]) -> tuple[str, ...]:
        kinds = self.codebooks if self.codebooks is not None else default
        for kind in kinds:
            if kind not in ALL_KINDS:
                raise ConfigError(f"unknown codebook kind {kind!r}; choose from {ALL_KINDS}")
        return tuple(kinds)

    def to_dict(self) -> dict:
        doc = {}
        for f in fields(self):
            value = getattr(self, f.name)
            doc[f.name] = list(value) if isinstance(value, tuple) else value
        return doc


_PARSERS = {
    "n_y": int,
    "n_z": int,
    "n_beams": int,
    "buffer_width": int,
    "buffer_gain": float,
    "pinv_tolerance": float,
    "gain_model": str,
    "sector_gain": float,
    "snr_db": lambda s: tuple(float(x) for x in s.split(",") if x.strip()),
    "trials": int,
    "seed": int,
    "codebooks": lambda s: tuple(x.strip() for x in s.split(",") if x.strip()),
    "output_dir": str,
    "resolution": int,
    "n_sweep": lambda s: tuple(int(x) for x in s.split(",") if x.strip()),
    "figures": lambda s: s.strip().lower() in ("1", "true", "yes", "on"),
    "phase1_power_split": lambda s: s.strip().lower() in ("1", "true", "yes", "on"),
}


def parse_config_file(path: str) -> dict:
    """Read a flat key=value file; '#' starts a comment, blank lines ignored."""
    raw: dict = {}
    text = Path(path).read_text()
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line.strip()!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            raw[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {value!r}") from exc
    return raw


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    raw = parse_config_file(args.config) if args.config else {}
    for key in _PARSERS:
        override = getattr(args, key, None)
        if override is not None:
            raw[key] = _PARSERS[key](override) if isinstance(override, str) else override
    missing = [k for k in ("n_y", "n_z", "n_beams") if k not in raw]
    if missing:
        raise ConfigError(f"missing required config keys: {', '.join(missing)}")
    try:
        return ExperimentConfig(**raw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _out_dir(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _config_comment(cfg: ExperimentConfig) -> str:
    return "config: " + json.dumps(cfg.to_dict(), separators=(",", ":"))


def cmd_codebook(cfg: ExperimentConfig, args: argparse.Namespace) -> int:
    kind = args.kind or cfg.kinds(("proposed",))[0]
    books = build_codebook_set(kind, cfg.codebook_config())
    out = _out_dir(cfg)
    csv_path = out / f"codebook_{kind}.csv"
    json_path = out / f"codebook_{kind}.json"
    export_codebook_csv(csv_path, books, config_comment=_config_comment(cfg))
    export_codebook_sidecar(json_path, books, extra={"config": cfg.to_dict()})
    print(f"wrote {csv_path} and {json_path}")
    return 0


def cmd_pattern(cfg: ExperimentConfig, args: argparse.Namespace) -> int:
    kind = args.kind or cfg.kinds(("proposed",))[0]
    book = build_codebook(kind, cfg.codebook_config(), args.upa)
    stages = book.stages if hasattr(book, "stages") else [book.narrow_stage]
    stage_lookup = {s[0].stage: s for s in stages}
    if args.stage not in stage_lookup:
        raise ConfigError(f"stage {args.stage} not in codebook (kind {kind!r})")
    stage = stage_lookup[args.stage]
    if not 1 <= args.index <= len(stage):
        raise ConfigError(f"index {args.index} outside 1..{len(stage)} for stage {args.stage}")
    raster = beam_pattern(stage[args.index - 1], cfg.codebook_config().geom, cfg.resolution)
    out = _out_dir(cfg)
    base = f"pattern_{kind}_u{args.upa}_s{args.stage}_i{args.index}"
    write_raster_csv(out / f"{base}.csv", raster, config_comment=_config_comment(cfg))
    print(f"wrote {out / (base + '.csv')}")
    if cfg.figures:
        from .plotting import save_raster_figure

        save_raster_figure(raster, out / f"{base}.png")
        print(f"wrote {out / (base + '.png')}")
    return 0


def cmd_sweep(cfg: ExperimentConfig, args: argparse.Namespace) -> int:
    if cfg.trials < 1:
        raise ConfigError("trials must be >= 1")
    kinds = cfg.kinds(HIERARCHICAL_KINDS)
    for kind in kinds:
        if kind not in HIERARCHICAL_KINDS:
            raise ConfigError(
                f"codebook kind {kind!r} has no hierarchy; sweep accepts {HIERARCHICAL_KINDS}"
            )
    gain = cfg.element_gain()
    results = alignment_rate_sweep(
        cfg.codebook_config(),
        list(kinds),
        list(cfg.snr_db),
        cfg.trials,
        cfg.seed,
        tx_gain_model=gain,
        rx_gain_model=gain,
        split_power=cfg.phase1_power_split,
    )
    out = _out_dir(cfg)
    json_path = out / "sweep.json"
    write_sweep_json(json_path, results, config_doc=cfg.to_dict())
    print(f"wrote {json_path}")
    if cfg.figures:
        from .plotting import save_sweep_figure

        save_sweep_figure(results, out / "sweep.png")
        print(f"wrote {out / 'sweep.png'}")
    return 0


def cmd_worstcase(cfg: ExperimentConfig, args: argparse.Namespace) -> int:
    kinds = cfg.kinds(("proposed", "uniform_real", "uniform_virtual"))
    rows = []
    for n in cfg.n_sweep:
        for kind in kinds:
            book = build_codebook(kind, cfg.codebook_config(n_beams=n), upa=1)
            crossover = worst_case_gain_bruteforce(book, cfg.resolution, region="crossover")
            sector = worst_case_gain_bruteforce(book, cfg.resolution, region="sector")
            closed = worst_case_gain_closed_form(n, cfg.n_y, cfg.n_z) if kind == "proposed" else math.nan
            rows.append(
                {
                    "codebook": kind,
                    "n_beams": n,
                    "worst_case_crossover": crossover,
                    "worst_case_sector": sector,
                    "closed_form": closed,
                }
            )
    header = f"{'codebook':<18}{'N':>4}{'crossover':>14}{'sector':>14}{'closed form':>14}"
    print(header)
    for row in rows:
        closed = "" if math.isnan(row["closed_form"]) else f"{row['closed_form']:.6f}"
        print(
            f"{row['codebook']:<18}{row['n_beams']:>4}"
            f"{row['worst_case_crossover']:>14.6f}{row['worst_case_sector']:>14.6f}{closed:>14}"
        )
    out = _out_dir(cfg)
    csv_path = out / "worstcase.csv"
    lines = [f"# {_config_comment(cfg)}"]
    lines.append("codebook,n_beams,worst_case_crossover,worst_case_sector,closed_form")
    for row in rows:
        closed = "" if math.isnan(row["closed_form"]) else f"{row['closed_form']:.17g}"
        lines.append(
            f"{row['codebook']},{row['n_beams']},"
            f"{row['worst_case_crossover']:.17g},{row['worst_case_sector']:.17g},{closed}"
        )
    csv_path.write_text("\n".join(lines) + "\n")
    print(f"wrote {csv_path}")
    if cfg.figures:
        from .plotting import save_worstcase_figure

        save_worstcase_figure(rows, out / "worstcase.png")
        print(f"wrote {out / 'worstcase.png'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quadbeam",
        description="Quad-UPA hierarchical beam training toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="flat key=value config file")
        for key in _PARSERS:
            p.add_argument(f"--{key.replace('_', '-')}", dest=key, help=f"override {key}")

    p_codebook = sub.add_parser("codebook", help="build and export a codebook set")
    add_common(p_codebook)
    p_codebook.add_argument("--kind", choices=ALL_KINDS, help="codebook kind to export")

    p_pattern = sub.add_parser("pattern", help="rasterize one beam pattern")
    add_common(p_pattern)
    p_pattern.add_argument("--kind", choices=ALL_KINDS)
    p_pattern.add_argument("--upa", type=int, default=1)
    p_pattern.add_argument("--stage", type=int, required=True)
    p_pattern.add_argument("--index", type=int, required=True)

    p_sweep = sub.add_parser("sweep", help="alignment rate versus SNR")
    add_common(p_sweep)

    p_worst = sub.add_parser("worstcase", help="worst-case gain per codebook kind")
    add_common(p_worst)

    return parser


_COMMANDS = {
    "codebook": cmd_codebook,
    "pattern": cmd_pattern,
    "sweep": cmd_sweep,
    "worstcase": cmd_worstcase,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        return _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SynthesisError as exc:
        print(f"synthesis error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
