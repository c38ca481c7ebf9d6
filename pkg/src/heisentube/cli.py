"""Batch front-end: config parsing, campaign dispatch, report emission.

Config files are plain ``key = value`` lines with ``#`` comments and an
optional ``[quadrature]`` section; unknown keys are rejected with their
line number.  Every run executes exactly one campaign and exits 0 iff no
verdict failed and no unexpected quadrature budget flag was raised.
"""

import argparse
import sys
import time
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .campaigns import COMMANDS, run_campaign
from .reporting import format_number, write_report

__all__ = ["RunConfig", "ConfigError", "parse_config", "emit_config", "run", "main"]


class ConfigError(ValueError):
    pass


def _parse_float_list(text):
    items = [s.strip() for s in str(text).split(",") if s.strip()]
    return tuple(float(v) for v in items)


def _parse_bool(text):
    t = str(text).strip().lower()
    if t in ("true", "1", "yes", "on"):
        return True
    if t in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass(frozen=True)
class RunConfig:
    """One deterministic campaign run; equal configs give byte-equal reports."""

    command: str = "gauge-check"
    model: str = "heisenberg"
    abelian_dim: int = 2
    epsilon: float = 0.1
    delta: float = 0.4
    tau: float = 1.0
    p: float = 2.0
    k: int = 3
    m: int = 8
    grid: int = 10_000
    levels: int = 10
    trials: int = 20
    taus: tuple = (0.5, 1.0, 1.5, 2.5, 3.0)
    expect_divergent: tuple = (2.5, 3.0)
    seed: int = 0
    out_dir: str = "runs"
    figures: bool = True
    # [quadrature]
    mode: str = "adaptive"
    abs_tol: float = 1e-8
    rel_tol: float = 1e-6
    max_subdivisions: int = 2**16
    mc_samples: int = 1_000_000


# (section, key) -> (field name, parser)
_KEYS = {
    ("", "command"): ("command", str),
    ("", "model"): ("model", str),
    ("", "abelian_dim"): ("abelian_dim", int),
    ("", "epsilon"): ("epsilon", float),
    ("", "delta"): ("delta", float),
    ("", "tau"): ("tau", float),
    ("", "p"): ("p", float),
    ("", "k"): ("k", int),
    ("", "m"): ("m", int),
    ("", "grid"): ("grid", int),
    ("", "levels"): ("levels", int),
    ("", "trials"): ("trials", int),
    ("", "taus"): ("taus", _parse_float_list),
    ("", "expect_divergent"): ("expect_divergent", _parse_float_list),
    ("", "seed"): ("seed", int),
    ("", "out_dir"): ("out_dir", str),
    ("", "figures"): ("figures", _parse_bool),
    ("quadrature", "mode"): ("mode", str),
    ("quadrature", "abs_tol"): ("abs_tol", float),
    ("quadrature", "rel_tol"): ("rel_tol", float),
    ("quadrature", "max_subdivisions"): ("max_subdivisions", int),
    ("quadrature", "mc_samples"): ("mc_samples", int),
}

_QUAD_FIELDS = {name for (sec, _), (name, _) in _KEYS.items() if sec == "quadrature"}


def validate_config(config):
    if config.command not in COMMANDS:
        raise ConfigError(
            f"unknown command {config.command!r}; choose from {sorted(COMMANDS)}"
        )
    if config.model not in ("heisenberg", "abelian-n"):
        raise ConfigError(f"unknown model {config.model!r}")
    if config.epsilon <= 0:
        raise ConfigError("epsilon must be positive")
    if config.model == "heisenberg" and config.epsilon >= 1:
        raise ConfigError(
            f"epsilon = {config.epsilon:g} violates the validated range: the "
            "thickened gauge is strongly pseudoconvex only for epsilon < 1"
        )
    if config.model == "abelian-n" and config.abelian_dim < 2:
        raise ConfigError("abelian_dim must be at least 2")
    if config.delta <= 0:
        raise ConfigError("delta must be positive")
    if config.tau < 0:
        raise ConfigError("tau must be nonnegative")
    if config.p < 1:
        raise ConfigError("p must be at least 1")
    if not 0 <= config.k <= 3:
        raise ConfigError("derivative order k must be in 0..3")
    if config.m < 1:
        raise ConfigError("m must be at least 1")
    if config.seed < 0 or config.seed >= 2**64:
        raise ConfigError("seed must fit in an unsigned 64-bit integer")
    if config.abs_tol <= 0 or config.rel_tol <= 0:
        raise ConfigError("tolerances must be positive")
    if config.mode not in ("adaptive", "monte-carlo"):
        raise ConfigError(f"unknown quadrature mode {config.mode!r}")
    if config.max_subdivisions < 16:
        raise ConfigError("max_subdivisions too small")
    if config.mc_samples < 1000:
        raise ConfigError("mc_samples must be at least 1000")
    return config


def parse_config(text):
    """Parse the key-value grammar into a validated RunConfig."""
    values = {}
    section = ""
    for lineno, raw in enumerate(str(text).splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section != "quadrature":
                raise ConfigError(f"line {lineno}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        try:
            field_name, parser = _KEYS[(section, key)]
        except KeyError:
            where = f"[{section}] " if section else ""
            raise ConfigError(f"line {lineno}: unknown key {where}{key!r}") from None
        try:
            values[field_name] = parser(value)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
    return validate_config(RunConfig(**values))


def emit_config(config):
    """Canonical text form; parse(emit(c)) == c."""
    lines = []
    for f in fields(RunConfig):
        if f.name in _QUAD_FIELDS:
            continue
        v = getattr(config, f.name)
        if isinstance(v, tuple):
            v = ", ".join(format_number(x) for x in v)
        else:
            v = format_number(v)
        lines.append(f"{f.name} = {v}")
    lines.append("")
    lines.append("[quadrature]")
    for f in fields(RunConfig):
        if f.name not in _QUAD_FIELDS:
            continue
        lines.append(f"{f.name} = {format_number(getattr(config, f.name))}")
    return "\n".join(lines) + "\n"


def run(config, out_dir=None):
    """Execute the configured campaign and write its report."""
    validate_config(config)
    out = Path(out_dir if out_dir is not None else config.out_dir)
    started = time.perf_counter()
    result = run_campaign(config)
    elapsed = time.perf_counter() - started
    return write_report(result, emit_config(config), out, elapsed, config.figures)


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="heisentube",
        description="Verification campaigns on Grauert tubes of the Heisenberg group.",
    )
    parser.add_argument("--config", type=Path, help="config file (key = value lines)")
    parser.add_argument("--command", help="campaign to run (overrides config)")
    parser.add_argument("--seed", type=int, help="seed override (u64)")
    parser.add_argument("--out", type=Path, help="output directory (overrides config)")
    args = parser.parse_args(argv)

    text = args.config.read_text() if args.config else ""
    try:
        config = parse_config(text)
        overrides = {}
        if args.command is not None:
            overrides["command"] = args.command
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.out is not None:
            overrides["out_dir"] = str(args.out)
        if overrides:
            config = validate_config(replace(config, **overrides))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    report = run(config)
    status = "FAIL" if report.failed else "PASS"
    print(f"{config.command}: {status} (report in {report.out_dir})")
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
