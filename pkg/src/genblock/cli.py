"""Command line front end.

Settings come from an optional key=value file (``--config``) and from flags;
flags win. Keys in the file are the flag names without leading dashes.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import dataclass, field, fields
from pathlib import Path

from .criterion import Approach, ModelSpec
from .data import builtin
from .inconsistency import BlockType, RowColFunction
from .io import FormatError, read_network
from .network import DiagonalPolicy, ValuedNetwork
from .report import dumps, report_files, write_files
from .search import SearchConfig, optimize
from .summaries import suggest_m
from .workflow import workflow_preset

log = logging.getLogger("genblock")


class ConfigError(ValueError):
    pass


def parse_blocks_matrix(text: str) -> tuple:
    """"null,reg;null|com,reg" -> rows split by ';', cells by ',', alternatives by '|'."""
    rows = [r for r in text.split(";") if r.strip()]
    return tuple(tuple(c.strip() for c in r.split(",")) for r in rows)


def _positive_int(v: str) -> int:
    i = int(v)
    if i < 1:
        raise ValueError("must be a positive integer")
    return i


def _positive_float(v: str) -> float:
    x = float(v)
    if not x > 0:
        raise ValueError("must be positive")
    return x


def _bool(v: str) -> bool:
    low = v.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected true or false")


def _choice(*options):
    def conv(v: str) -> str:
        if v not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return v
    return conv


def _blocks(v: str) -> str:
    for part in v.replace("|", ",").split(","):
        if part.strip():
            BlockType(part.strip())
    return v


def _blocks_matrix(v: str) -> str:
    rows = parse_blocks_matrix(v)
    if not rows or any(len(r) != len(rows) for r in rows):
        raise ValueError("must describe a square k x k matrix")
    for row in rows:
        for cell in row:
            _blocks(cell)
    return v


# key -> converter; the order is the order of the echo in summaries
KEYS = {
    "input": str,
    "format": _choice("dense", "edges"),
    "approach": _choice(*(a.value for a in Approach)),
    "blocks": _blocks,
    "blocks-matrix": _blocks_matrix,
    "f": _choice(*(f.value for f in RowColFunction)),
    "m": _positive_float,
    "k": _positive_int,
    "slice": _positive_float,
    "censor": _positive_float,
    "restarts": _positive_int,
    "seed": int,
    "normalize": _bool,
    "diagonal": _choice(*(d.value for d in DiagonalPolicy)),
    "out": str,
    "preset-workflow": _bool,
    "suggest-m": _bool,
    "exhaustive": _bool,
}


@dataclass
class AnalysisConfig:
    input: str | None = None
    format: str = "dense"
    approach: str | None = None
    blocks: str | None = None
    blocks_matrix: str | None = None
    f: str = "max"
    m: float | None = None
    k: int | None = None
    slice: float | None = None
    censor: float | None = None
    restarts: int = 100
    seed: int = 0
    normalize: bool = False
    diagonal: str = "ignore"
    out: str = "genblock-out"
    preset_workflow: bool = False
    suggest_m: bool = False
    exhaustive: bool = False
    # where each explicitly set value came from, for error messages
    origin: dict = field(default_factory=dict, repr=False)

    def set(self, key: str, raw: str, origin: str) -> None:
        key = key.strip().replace("_", "-")
        if key not in KEYS:
            raise ConfigError(f"{origin}: unknown setting {key!r}")
        try:
            value = KEYS[key](raw.strip())
        except ValueError as e:
            raise ConfigError(f"{origin}: invalid value {raw.strip()!r} for {key}: {e}") from None
        setattr(self, key.replace("-", "_"), value)
        self.origin[key] = origin

    def where(self, key: str) -> str:
        return self.origin.get(key, f"--{key}")

    def echo(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != "origin"}

    @property
    def resolved_approach(self) -> Approach:
        if self.approach is not None:
            return Approach(self.approach)
        # slicing produces a binary network
        return Approach.BINARY if self.slice is not None else Approach.SS

    @property
    def resolved_k(self) -> int | None:
        if self.blocks_matrix is not None:
            size = len(parse_blocks_matrix(self.blocks_matrix))
            if self.k is not None and self.k != size:
                raise ConfigError(f"{self.where('k')}: k={self.k} but the blocks matrix "
                                  f"({self.where('blocks-matrix')}) is {size}x{size}")
            return size
        return self.k

    def model_spec(self) -> ModelSpec:
        approach = self.resolved_approach
        if self.blocks_matrix is not None and self.blocks is not None:
            raise ConfigError(f"{self.where('blocks')}: give either blocks or blocks-matrix, not both")
        if self.blocks_matrix is not None:
            allowed = parse_blocks_matrix(self.blocks_matrix)
        elif self.blocks is not None:
            allowed = self.blocks
        else:
            allowed = "null|com|rre|cre|reg" if approach.is_homogeneity else "null|com|reg"
        if approach is Approach.VALUED and self.m is None:
            raise ConfigError(f"{self.where('approach')}: valued blockmodeling needs m")
        if approach is not Approach.VALUED and self.m is not None:
            raise ConfigError(f"{self.where('m')}: m only applies to the valued approach")
        try:
            return ModelSpec(approach, allowed, f=self.f, m=self.m,
                             normalize=self.normalize, diagonal=self.diagonal)
        except ValueError as e:
            key = "blocks-matrix" if self.blocks_matrix is not None else "blocks"
            raise ConfigError(f"{self.where(key)}: {e}") from None


def read_config_file(path, config: AnalysisConfig | None = None) -> AnalysisConfig:
    config = config or AnalysisConfig()
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"{path}: cannot read config file: {e.strerror}") from None
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{ln}: expected key=value")
        key, raw = line.split("=", 1)
        config.set(key, raw, f"{path}:{ln}")
    return config


def load_input(config: AnalysisConfig) -> ValuedNetwork:
    if config.input is None:
        raise ConfigError("no input given (use --input PATH or --input builtin:students)")
    relevant = config.diagonal != DiagonalPolicy.IGNORE.value
    if config.input.startswith("builtin:"):
        try:
            net = builtin(config.input.split(":", 1)[1])
        except KeyError as e:
            raise ConfigError(f"{config.where('input')}: {e.args[0]}") from None
        return net.with_diagonal(relevant) if relevant else net
    try:
        return read_network(config.input, config.format, relevant)
    except OSError as e:
        raise ConfigError(f"{config.input}: cannot read input: {e.strerror}") from None


def prepare(net: ValuedNetwork, config: AnalysisConfig) -> ValuedNetwork:
    if config.censor is not None:
        if config.m is not None and config.censor < config.m:
            log.warning("censoring at %g, below m=%g, hides differences m relies on",
                        config.censor, config.m)
        net = net.censored(config.censor)
    if config.slice is not None:
        net = net.sliced(config.slice)
    return net


def _m_files(net, partition, config: AnalysisConfig, spec: ModelSpec | None) -> dict[str, str]:
    regular = spec is None or any(
        t in (BlockType.RRE, BlockType.CRE, BlockType.REG)
        for i in range(partition.k if partition else 1)
        for j in range(partition.k if partition else 1)
        for t in spec.allowed_at(i, j)
    )
    s = suggest_m(net, partition, config.f, blocks_regular=regular, slice_threshold=config.slice)
    return {"m_suggestion.json": dumps(s.to_dict()), "m_histogram.csv": s.histogram.to_csv()}


def run_analysis(config: AnalysisConfig) -> int:
    """Run one configured analysis; all files are written only after it succeeds."""
    started = time.perf_counter()
    net = prepare(load_input(config), config)
    k = config.resolved_k
    files: dict[str, str] = {}

    if config.preset_workflow:
        if k is None:
            raise ConfigError("the workflow preset needs k")
        rep = workflow_preset(net, k, config.f, config.restarts, config.seed,
                              config.exhaustive, diagonal=config.diagonal)
        files["workflow.json"] = dumps({"config": config.echo(), **rep.to_dict(net)})
        for name, res in rep.homogeneity.items():
            for fname, text in report_files(net, res, config.echo()).items():
                files[f"{name}/{fname}"] = text
        for m, res in sorted(rep.valued.items()):
            for fname, text in report_files(net, res, config.echo()).items():
                files[f"valued_m{m:g}/{fname}"] = text
    elif k is None:
        if not config.suggest_m:
            raise ConfigError("k is required (--k or a blocks matrix)")
        files.update(_m_files(net, None, config, None))
    else:
        spec = config.model_spec()
        search = SearchConfig(k, restarts=config.restarts, seed=config.seed,
                              collect_all_optima=True)
        result = optimize(net, spec, search, exhaustive=config.exhaustive)
        files.update(report_files(net, result, config.echo(), spec.label_free))
        if config.suggest_m:
            files.update(_m_files(net, result.best.partition, config, spec))

    files["timing.json"] = dumps({"seconds": round(time.perf_counter() - started, 3)})
    write_files(config.out, files)
    log.info("wrote %d files to %s", len(files), config.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="genblock", description="Generalized blockmodeling of valued networks.")
    p.add_argument("--config", help="key=value settings file; flags override it")
    p.add_argument("--input", help="matrix or edge list file, or builtin:students")
    p.add_argument("--format", choices=["dense", "edges"])
    p.add_argument("--approach", choices=[a.value for a in Approach])
    p.add_argument("--blocks", help="allowed block types for every position, e.g. null|reg")
    p.add_argument("--blocks-matrix", help="per-position types: rows ';', cells ',', alternatives '|'")
    p.add_argument("--f", choices=[f.value for f in RowColFunction])
    p.add_argument("--m", help="threshold for valued blockmodeling")
    p.add_argument("--k", help="number of clusters")
    p.add_argument("--slice", help="binarize at this threshold first")
    p.add_argument("--censor", help="cap tie values at this ceiling first")
    p.add_argument("--restarts")
    p.add_argument("--seed")
    p.add_argument("--normalize", action="store_const", const="true")
    p.add_argument("--diagonal", choices=[d.value for d in DiagonalPolicy])
    p.add_argument("--out", help="output directory")
    p.add_argument("--preset-workflow", action="store_const", const="true")
    p.add_argument("--suggest-m", action="store_const", const="true")
    p.add_argument("--exhaustive", action="store_const", const="true")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(args: argparse.Namespace) -> AnalysisConfig:
    config = read_config_file(args.config) if args.config else AnalysisConfig()
    for key in KEYS:
        value = getattr(args, key.replace("-", "_"), None)
        if value is not None:
            config.set(key, str(value), f"--{key}")
    return config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return run_analysis(config_from_args(args))
    except (ConfigError, FormatError) as e:
        print(f"genblock: error: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"genblock: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
