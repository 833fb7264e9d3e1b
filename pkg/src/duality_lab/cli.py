"""Batch driver: ``duality-lab <suite> [--config FILE] [overrides]``.

Exit status is 0 when every check in the selected suites passes, 1 when
any fails and 2 for configuration errors.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import checks
from .errors import ConfigError

SUITES = {
    "evolve": (1, 2, 3, 4),
    "phase": (5,),
    "movers": (6, 7, 8),
    "kernels": (9,),
    "spectra": (10, 11),
    "mapping": (12,),
}
SUITE_NAMES = tuple(SUITES) + ("all",)


@dataclass
class RunConfig:
    suite: str = "all"
    L: Optional[int] = None
    K: Optional[int] = None
    lam: float = 1e-3
    Lam: float = 10.0
    s_max: int = 2
    grid: int = 101
    torus_grid: int = 64
    n_terms: int = 10_000
    seed: int = 0
    out: str = "duality-lab-out"
    jobs: int = 1

    def validate(self):
        if self.suite not in SUITE_NAMES:
            raise ConfigError(f"unknown suite {self.suite!r}", field="suite")
        if self.L is not None and self.L < 3:
            raise ConfigError("L must be at least 3", field="L")
        if self.K is not None and self.K < 1:
            raise ConfigError("K must be positive", field="K")
        if not 0 < self.lam < 0.1:
            raise ConfigError("lambda must lie in (0, 0.1)", field="lambda")
        if not self.Lam > 1:
            raise ConfigError("Lambda must exceed 1", field="Lambda")
        if self.s_max < 0:
            raise ConfigError("s_max must be non-negative", field="s_max")
        if self.grid < 3:
            raise ConfigError("grid must be at least 3", field="grid")
        if self.torus_grid < 32:
            raise ConfigError("torus_grid must be at least 32", field="torus_grid")
        if self.n_terms < 1:
            raise ConfigError("n_terms must be positive", field="n_terms")
        if self.jobs < 1:
            raise ConfigError("jobs must be positive", field="jobs")
        return self


# config-file spelling -> RunConfig attribute
_KEYS = {
    "suite": "suite", "L": "L", "K": "K", "lambda": "lam", "Lambda": "Lam",
    "s_max": "s_max", "grid": "grid", "torus_grid": "torus_grid",
    "n_terms": "n_terms", "seed": "seed", "out": "out", "jobs": "jobs",
}


def _coerce(attr, raw, line=None, key=None):
    ftype = {f.name: f.type for f in dataclasses.fields(RunConfig)}[attr]
    try:
        if "int" in str(ftype):
            return int(raw)
        if "float" in str(ftype):
            return float(raw)
        return str(raw)
    except ValueError:
        raise ConfigError(f"cannot parse {raw!r}", line=line, field=key) from None


def parse_config(text: str, base: Optional[RunConfig] = None) -> RunConfig:
    """Read flat ``key = value`` lines; ``#`` starts a comment."""
    cfg = dataclasses.replace(base) if base else RunConfig()
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=n)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError("unknown key", line=n, field=key)
        attr = _KEYS[key]
        setattr(cfg, attr, _coerce(attr, value, n, key))
        try:
            _validate_field(cfg, key)
        except ConfigError as exc:
            raise ConfigError(str(exc).split("] ", 1)[-1], line=n, field=key) from None
    return cfg


def _validate_field(cfg, key):
    try:
        cfg.validate()
    except ConfigError as exc:
        if exc.field == key:
            raise


def suite_kwargs(cfg: RunConfig) -> dict:
    """Per-criterion keyword overrides drawn from the config."""
    kw = {
        1: {"seed": cfg.seed},
        2: {"seed": cfg.seed + 1},
        3: {"seed": cfg.seed + 2},
        5: {"n": cfg.grid},
        8: {"G": cfg.torus_grid},
        9: {},
        10: {"N_terms": cfg.n_terms},
        11: {"lam": cfg.lam, "s_max": cfg.s_max},
        12: {},
    }
    if cfg.L is not None:
        kw[1]["sizes"] = (cfg.L,)
        kw[3]["L"] = cfg.L
    if cfg.K is not None:
        kw[8]["K"] = cfg.K
        kw[12]["K"] = cfg.K
    return kw


def run_criteria(numbers, cfg: RunConfig):
    kw = suite_kwargs(cfg)
    return [checks.CRITERIA[n](**kw.get(n, {})) for n in numbers]


def _run_suite(args):
    name, cfg = args
    return name, run_criteria(SUITES[name], cfg)


def run_suite(cfg: RunConfig):
    """Run the configured suite(s); returns ``[(suite, [CriterionResult])]``."""
    names = list(SUITES) if cfg.suite == "all" else [cfg.suite]
    if cfg.jobs > 1 and len(names) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            done = dict(pool.map(_run_suite, [(n, cfg) for n in names]))
        return [(n, done[n]) for n in names]
    return [_run_suite((n, cfg)) for n in names]


def emit_report(results, cfg: Optional[RunConfig] = None) -> tuple[str, dict]:
    """Text report plus CSV files keyed by name.  Deterministic: no timings."""
    out = ["# duality-lab report"]
    if cfg is not None:
        settings = ", ".join(f"{k}={getattr(cfg, v)}" for k, v in _KEYS.items() if k not in ("out", "jobs"))
        out.append(f"# config: {settings}")
    rows = ["suite,criterion,check,identity,measured,tolerance,passed"]
    files = {}
    for suite, crits in results:
        out.append("")
        out.append(f"## {suite}")
        for c in crits:
            out.append(f"criterion {c.number} ({c.title}): {'PASS' if all(k.passed for k in c.checks if k.asserted) else 'FAIL'}")
            for k in c.checks:
                mark = "info" if not k.asserted else "ok  " if k.passed else "FAIL"
                ident = f" [{k.identity}]" if k.identity else ""
                note = f"  ({k.note})" if k.note else ""
                out.append(f"  {mark} {k.name}{ident}: measured {k.measured:.6e}, tolerance {k.tolerance:.3e}{note}")
                rows.append(f"{suite},{c.number},{k.name},{k.identity},{k.measured:.17g},{k.tolerance:.17g},{int(k.passed)}")
            for fname, text in c.artifacts.items():
                files[fname] = text
    files["checks.csv"] = "\n".join(rows) + "\n"
    return "\n".join(out) + "\n", files


def _all_passed(results) -> bool:
    return all(k.passed for _, crits in results for c in crits for k in c.checks if k.asserted)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="duality-lab", description=__doc__.splitlines()[0])
    p.add_argument("suite", choices=SUITE_NAMES)
    p.add_argument("--config", type=Path)
    p.add_argument("--L", type=int)
    p.add_argument("--K", type=int)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--Lambda", dest="Lam", type=float)
    p.add_argument("--s-max", dest="s_max", type=int)
    p.add_argument("--grid", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", type=str)
    p.add_argument("--jobs", type=int, help="run suites in parallel processes")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig()
        if args.config is not None:
            try:
                text = args.config.read_text()
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}") from None
            cfg = parse_config(text, cfg)
        cfg.suite = args.suite
        for attr in ("L", "K", "lam", "Lam", "s_max", "grid", "seed", "out", "jobs"):
            val = getattr(args, attr)
            if val is not None:
                setattr(cfg, attr, val)
        cfg.validate()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    results = run_suite(cfg)
    report, files = emit_report(results, cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.txt").write_text(report)
    for name, text in files.items():
        with open(out / name, "w", newline="\n") as fh:
            fh.write(text)
    sys.stdout.write(report)
    return 0 if _all_passed(results) else 1


if __name__ == "__main__":
    sys.exit(main())
