"""Command-line driver: parameter sweeps written as CSV.

Config files are flat ``key = value`` text with ``[section]`` headers::

    [params]        any SystemParams field, e.g. F = inf, sigma_macro = 12
    [profile]       spec = none | uniform:<L> | ra | ht | tu | <path>
    [sweep]         axis = F | L_p | L ; values = 0.1, 1, inf
    [budget]        placements, fading_draws, selections, samples, resamples
    [multicell]     m, n
    [run]           seed, output, workers, stats

Command-line flags override the config file. Exit codes: 0 success,
2 configuration error, 3 runtime error.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import math
import re
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import analytic, channel, multicell, twocell
from .params import SystemParams

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3
AXES = ("F", "L_p", "L")
CSV_COLUMNS = ("N_star_sim", "N_star_analytic", "outage_at_N_star", "v_product", "seed")


class ConfigError(ValueError):
    pass


@dataclass
class Budget:
    placements: int = 200
    fading_draws: int = 200
    selections: int = 24
    samples: int = 100_000
    resamples: int = 100_000


@dataclass
class ExperimentConfig:
    params: SystemParams = field(default_factory=SystemParams)
    profile: str = "none"
    axis: str | None = None
    values: list = field(default_factory=list)
    budget: Budget = field(default_factory=Budget)
    seed: int = 0
    output: str | None = None
    workers: int = 1
    stats: str | None = None
    m: int = 1
    n: int = 5


def parse_number(text: str) -> float:
    text = text.strip()
    if text.lower() in ("inf", "+inf", "infinity"):
        return math.inf
    return float(text)


def format_number(x) -> str:
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    if isinstance(x, float) and x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x) if isinstance(x, float) else str(x)


def _line_of(text: str, section: str, key: str) -> int | None:
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        m = re.match(r"\[(.+)\]$", line)
        if m:
            current = m.group(1).strip()
        elif current == section and re.match(rf"{re.escape(key)}\s*[=:]", line, re.IGNORECASE):
            return lineno
    return None


_SECTION_KEYS = {
    "params": set(SystemParams.field_names()),
    "profile": {"spec"},
    "sweep": {"axis", "values"},
    "budget": set(Budget.__dataclass_fields__),
    "multicell": {"m", "n"},
    "run": {"seed", "output", "workers", "stats"},
}


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, str(path))


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None

    def fail(section, key, msg):
        line = _line_of(text, section, key)
        where = f"{source}:{line}" if line else source
        raise ConfigError(f"{where}: [{section}] {key}: {msg}")

    cfg = ExperimentConfig()
    for section in parser.sections():
        if section not in _SECTION_KEYS:
            lines = text.splitlines()
            line = next((i for i, raw in enumerate(lines, 1) if raw.strip() == f"[{section}]"), "?")
            raise ConfigError(f"{source}:{line}: unknown section [{section}]")
        for key in parser[section]:
            if key not in _SECTION_KEYS[section]:
                fail(section, key, "unknown key")

    if parser.has_section("params"):
        changes = {}
        for key, value in parser["params"].items():
            try:
                changes[key] = None if key == "d_max" and value.strip().lower() == "none" else parse_number(value)
            except ValueError:
                fail("params", key, f"not a number: {value!r}")
        try:
            cfg.params = SystemParams(**changes)
        except ValueError as exc:
            raise ConfigError(f"{source}: [params] {exc}") from None
    if parser.has_option("profile", "spec"):
        cfg.profile = parser["profile"]["spec"].strip()
    if parser.has_section("sweep"):
        sw = parser["sweep"]
        if "axis" in sw:
            cfg.axis = sw["axis"].strip()
            if cfg.axis not in AXES:
                fail("sweep", "axis", f"must be one of {AXES}")
        if "values" in sw:
            try:
                cfg.values = [parse_number(v) for v in sw["values"].split(",") if v.strip()]
            except ValueError:
                fail("sweep", "values", "values must be numbers or inf")
            if any(not v > 0 for v in cfg.values):
                fail("sweep", "values", "values must be positive")
        if cfg.values and cfg.axis is None:
            fail("sweep", "values", "values given without an axis")
    for section, target in (("budget", cfg.budget), ("multicell", cfg)):
        if parser.has_section(section):
            for key, value in parser[section].items():
                try:
                    setattr(target, key, int(value))
                except ValueError:
                    fail(section, key, f"not an integer: {value!r}")
    if parser.has_section("run"):
        run = parser["run"]
        for key in ("seed", "workers"):
            if key in run:
                try:
                    setattr(cfg, key, int(run[key]))
                except ValueError:
                    fail("run", key, f"not an integer: {run[key]!r}")
        for key in ("output", "stats"):
            if key in run:
                setattr(cfg, key, run[key].strip() or None)
    return cfg


def parse_budget(text: str, budget: Budget) -> Budget:
    """``placements[xfading_draws[xselections]]``, e.g. ``200x200`` or ``100x50x8``."""
    parts = text.lower().split("x")
    try:
        nums = [int(p) for p in parts]
    except ValueError:
        raise ConfigError(f"bad --budget {text!r}; expected e.g. 200x200 or 100x50x8") from None
    if not 1 <= len(nums) <= 3 or any(n < 1 for n in nums):
        raise ConfigError(f"bad --budget {text!r}")
    names = ("placements", "fading_draws", "selections")
    return replace(budget, **dict(zip(names, nums)))


# experiment runners


def _stats_for(cfg: ExperimentConfig) -> analytic.MeanStats:
    if cfg.stats and Path(cfg.stats).is_file():
        return analytic.MeanStats.load(cfg.stats)
    return analytic.estimate_mean_stats(cfg.params, cfg.budget.samples, cfg.seed)


def _profile(spec) -> channel.DelayProfile | None:
    return channel.parse_profile_spec(spec)


def _closed_form(K, v, profile):
    if profile is None:
        return analytic.capacity_infinite(K, v)
    return analytic.capacity_by_df(K, v, profile)


def _two_cell_row(cfg, stats, params, profile, value):
    b = cfg.budget
    # both scans walk up or down from the start, so starting near K saves steps
    start = int(params.pole_capacity)
    sim = twocell.capacity_search(params, profile, b.placements, b.fading_draws, cfg.seed,
                                  cfg.workers, n_start=start)
    an = analytic.capacity_analytic(stats, params, profile, b.resamples, n_start=start)
    closed = _closed_form(params.pole_capacity, stats.v_product, profile)
    return [value, sim.n_star, an.n_star, sim.outage_at_n_star, stats.v_product, cfg.seed, closed]


def run_capacity(cfg: ExperimentConfig) -> tuple[list[str], list[list]]:
    stats = _stats_for(cfg)
    profile = _profile(cfg.profile)
    header = ["point", *CSV_COLUMNS, "N_closed_form"]
    return header, [_two_cell_row(cfg, stats, cfg.params, profile, "base")]


def run_sweep(cfg: ExperimentConfig) -> tuple[list[str], list[list]]:
    if cfg.axis not in ("F", "L_p"):
        raise ConfigError("sweep needs axis F or L_p (use multicell-sweep for L)")
    if not cfg.values:
        raise ConfigError("sweep needs a list of values")
    stats = _stats_for(cfg)
    rows = []
    for value in cfg.values:
        if cfg.axis == "F":
            params, profile = replace(cfg.params, F=value), _profile(cfg.profile)
        else:
            params = cfg.params
            profile = None if math.isinf(value) else channel.DelayProfile.uniform(int(value))
        rows.append(_two_cell_row(cfg, stats, params, profile, value))
    return [cfg.axis, *CSV_COLUMNS, "N_closed_form"], rows


def run_multicell_sweep(cfg: ExperimentConfig) -> tuple[list[str], list[list]]:
    if cfg.axis != "L":
        raise ConfigError("multicell-sweep needs axis L")
    if not cfg.values:
        raise ConfigError("multicell-sweep needs a list of values")
    if any(not float(v).is_integer() for v in cfg.values):
        raise ConfigError("L values must be integers")
    stats = _stats_for(cfg)
    profile = _profile(cfg.profile)
    K = cfg.params.pole_capacity
    M = cfg.m * cfg.m
    b = cfg.budget
    rows = []
    for value in cfg.values:
        L = int(value)
        res = multicell.multicell_capacity_mc(cfg.params, cfg.m, cfg.n, L, profile, b.selections,
                                              b.placements, b.fading_draws, cfg.seed, cfg.workers)
        if profile is None:
            closed = multicell.capacity_multicell_analytic(K, stats.v_product, L, M)
        else:
            closed = multicell.capacity_multicell_df(K, stats.v_product, L, M, profile.diversity_factor)
        outage = sum(r.outage_at_n_star for r in res.results) / len(res.results)
        rows.append([L, res.mean, math.floor(closed), outage, stats.v_product, cfg.seed, closed,
                     res.std])
    return ["L", *CSV_COLUMNS, "N_closed_form", "N_star_sim_std"], rows


def write_csv(header, rows, stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(x) for x in row])


def _emit(cfg, header, rows):
    if cfg.output:
        with open(cfg.output, "w", newline="") as fh:
            write_csv(header, rows, fh)
    else:
        buf = io.StringIO()
        write_csv(header, rows, buf)
        sys.stdout.write(buf.getvalue())


# argument handling


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config file")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--budget", help="placements[xfading_draws[xselections]]")
    common.add_argument("--outage", type=float, help="target outage probability (default 0.05)")
    common.add_argument("--workers", type=int, help="worker processes")
    common.add_argument("--output", "-o", help="output file (CSV; cache file for estimate-v)")
    common.add_argument("--profile", help="none | uniform:<L> | ra | ht | tu | <file>")
    common.add_argument("--F", dest="F", help="power parameter F (number or inf)")
    common.add_argument("--stats", help="mean-stats cache file to reuse")

    parser = argparse.ArgumentParser(prog="hotspot-cdma", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("estimate-v", parents=[common], help="estimate and cache the mean single-term statistics")
    sub.add_parser("capacity", parents=[common], help="simulated and approximate capacity at one point")
    sp = sub.add_parser("sweep", parents=[common], help="two-cell sweep over F or L_p")
    sp.add_argument("--axis", choices=("F", "L_p"))
    sp.add_argument("--values", help="comma-separated sweep values")
    mp = sub.add_parser("multicell-sweep", parents=[common], help="multicell sweep over L")
    mp.add_argument("--values", help="comma-separated numbers of microcells")
    mp.add_argument("-m", type=int, help="macro grid side (M = m*m)")
    mp.add_argument("-n", type=int, help="sub-grid side per macrocell")
    dp = sub.add_parser("df", help="diversity factor of a delay profile")
    dp.add_argument("profile_file", help="profile file or builtin name (ra, ht, tu)")
    return parser


def _apply_flags(cfg: ExperimentConfig, args) -> ExperimentConfig:
    if args.seed is not None:
        cfg.seed = args.seed
    if args.budget:
        cfg.budget = parse_budget(args.budget, cfg.budget)
    if args.workers is not None:
        cfg.workers = args.workers
    if args.output:
        cfg.output = args.output
    if args.profile:
        cfg.profile = args.profile
    if args.stats:
        cfg.stats = args.stats
    changes = {}
    if args.outage is not None:
        changes["outage"] = args.outage
    if args.F is not None:
        try:
            changes["F"] = parse_number(args.F)
        except ValueError:
            raise ConfigError(f"bad --F {args.F!r}") from None
    if changes:
        try:
            cfg.params = replace(cfg.params, **changes)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    if getattr(args, "axis", None):
        cfg.axis = args.axis
    if getattr(args, "values", None):
        try:
            cfg.values = [parse_number(v) for v in args.values.split(",") if v.strip()]
        except ValueError:
            raise ConfigError(f"bad --values {args.values!r}") from None
    if args.command == "multicell-sweep":
        cfg.axis = "L"
        if args.m is not None:
            cfg.m = args.m
        if args.n is not None:
            cfg.n = args.n
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "df":
            prof = channel.parse_profile_spec(args.profile_file)
            if prof is None:
                raise ConfigError("df needs a finite delay profile")
            print(f"{prof.diversity_factor:.4f}")
            return EXIT_OK
        cfg = load_config(args.config) if args.config else ExperimentConfig()
        cfg = _apply_flags(cfg, args)
        if cfg.workers < 1:
            raise ConfigError("workers must be >= 1")
        _profile(cfg.profile)
        if args.command == "estimate-v":
            stats = analytic.estimate_mean_stats(cfg.params, cfg.budget.samples, cfg.seed)
            out = cfg.output or cfg.stats
            if out:
                stats.save(out)
            print(f"v_macro={stats.v_macro!r} v_micro={stats.v_micro!r} "
                  f"v_product={stats.v_product!r} p={stats.p!r}")
            return EXIT_OK
        runner = {"capacity": run_capacity, "sweep": run_sweep,
                  "multicell-sweep": run_multicell_sweep}[args.command]
        header, rows = runner(cfg)
        _emit(cfg, header, rows)
        return EXIT_OK
    except (ConfigError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
