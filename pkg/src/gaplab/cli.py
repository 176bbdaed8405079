"""Reproducible experiment runner.

One experiment per invocation, driven by a single JSON config document.
Each run writes a human-readable summary, a machine record (CSV key/value
rows or a key = value document), and, for sequence-valued outputs,
plot-ready columns.  Identical configs produce byte-identical report
bodies: every random choice is seeded from the config and no timestamps
enter the files.  Exit status is 0 iff every inequality/flag asserted by
the experiment passed, 2 for config errors.
"""

from __future__ import annotations

import argparse
import copy
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .actions import ActionSpace, build_action
from .certificates import run_certificate
from .errors import GaplabError
from .groups import GroupDescriptor, power_set
from .koopman import (
    character_line_scan,
    character_norm,
    discrepancy,
    verify_lower_bound,
)
from .measures import GroupMeasure
from .nets import greedy_maximal_net, net_ratio_study, verify_net_bounds
from .regular_norm import (
    amenable_norm,
    berg_christensen_estimate,
    fourier_norm_abelian,
)

ENV_OUT_DIR = "GAPLAB_OUT"

EXPERIMENTS = (
    "regular-norm",
    "koopman-norm",
    "verify-bound",
    "certificate",
    "nets",
    "margulis-demo",
    "sweep",
)


class ConfigError(GaplabError):
    def __init__(self, fieldpath: str, message: str):
        super().__init__(f"{fieldpath}: {message}")
        self.fieldpath = fieldpath


def _fmt(value) -> str:
    """Fixed rendering: floats at 12 significant digits."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


# -- config parsing ---------------------------------------------------------


def _require(cfg: dict, field: str, path: str):
    if field not in cfg:
        raise ConfigError(f"{path}.{field}", "required field is missing")
    return cfg[field]


def build_group(cfg: dict, path: str = "group") -> GroupDescriptor:
    kind = _require(cfg, "kind", path)
    aliases = {"z": "lattice", "zd": "lattice", "lattice": "lattice",
               "free": "free", "real-grid": "real-grid",
               "torus-grid": "torus-grid"}
    if kind not in aliases:
        raise ConfigError(f"{path}.kind", f"unknown group kind {kind!r}")
    kind = aliases[kind]
    dim = int(cfg.get("dimension", cfg.get("rank", 1)))
    kwargs = {"kind": kind, "dimension": dim}
    if kind == "real-grid":
        if "resolution" not in cfg:
            raise ConfigError(f"{path}.resolution", "real-grid needs a resolution q")
        kwargs["resolution"] = int(cfg["resolution"])
    if kind == "torus-grid":
        if "size" not in cfg:
            raise ConfigError(f"{path}.size", "torus-grid needs a size N")
        kwargs["size"] = int(cfg["size"])
    try:
        return GroupDescriptor(**kwargs)
    except (GaplabError, ValueError) as err:
        raise ConfigError(path, str(err))


def build_measure(group: GroupDescriptor, cfg: dict, path: str = "measure") -> GroupMeasure:
    kind = _require(cfg, "kind", path)
    try:
        if kind == "atoms":
            pairs = []
            for i, rec in enumerate(_require(cfg, "atoms", path)):
                if isinstance(rec, dict):
                    pairs.append((tuple(rec["element"]), float(rec["weight"])))
                else:
                    pairs.append((tuple(rec[:-1]), float(rec[-1])))
            return GroupMeasure.from_atoms(group, pairs)
        if kind == "point":
            return GroupMeasure.point_mass(
                group, tuple(cfg.get("element", group.identity())),
                float(cfg.get("mass", 1.0)),
            )
        if kind == "srw":
            return GroupMeasure.simple_random_walk(group, step=int(cfg.get("step", 1)))
        if kind == "uniform-interval":
            return GroupMeasure.uniform_interval(
                group, float(_require(cfg, "lo", path)), float(_require(cfg, "hi", path)),
                total=float(cfg.get("total", 1.0)), closed=bool(cfg.get("closed", True)),
            )
        if kind == "uniform-generators":
            return GroupMeasure.simple_random_walk(group)
        if kind == "uniform-ball":
            return GroupMeasure.uniform_on(
                group, group.ball(float(_require(cfg, "radius", path)))
            )
    except (GaplabError, KeyError, ValueError) as err:
        raise ConfigError(path, str(err))
    raise ConfigError(f"{path}.kind", f"unknown measure kind {kind!r}")


def build_space(group: GroupDescriptor, cfg: dict, path: str = "action") -> ActionSpace:
    cfg = dict(cfg)
    kind = cfg.pop("kind", None)
    if kind is None:
        raise ConfigError(f"{path}.kind", "required field is missing")
    if kind in ("torus-translation", "circle-rotation") and "N" not in cfg:
        raise ConfigError(f"{path}.N", f"{kind} needs a grid size N")
    try:
        if "step" in cfg:
            cfg["step"] = tuple(cfg["step"])
        if "permutation" in cfg:
            cfg["permutation"] = list(cfg["permutation"])
        return build_action(kind, group=group, **cfg)
    except (GaplabError, TypeError, ValueError) as err:
        raise ConfigError(path, str(err))


def validate_config(cfg: dict) -> dict:
    if not isinstance(cfg, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    experiment = _require(cfg, "experiment", "<root>")
    if experiment not in EXPERIMENTS:
        raise ConfigError("experiment",
                          f"unknown experiment {experiment!r}; pick one of {EXPERIMENTS}")
    return cfg


# -- experiment runners -------------------------------------------------------


class RunResult:
    def __init__(self, experiment: str):
        self.experiment = experiment
        self.record: list[tuple[str, str]] = [("experiment", experiment)]
        self.sequence_columns: list[str] = []
        self.sequence_rows: list[list] = []
        self.assertions: list[tuple[str, bool]] = []
        self.summary: list[str] = []

    def put(self, key: str, value):
        self.record.append((key, _fmt(value)))

    def check(self, name: str, ok: bool):
        self.assertions.append((name, bool(ok)))
        self.summary.append(f"[{'PASS' if ok else 'FAIL'}] {name}")

    def note(self, line: str):
        self.summary.append(line)

    @property
    def passed(self) -> bool:
        return all(ok for _, ok in self.assertions)


def _params(cfg: dict) -> dict:
    params = cfg.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("params", "must be an object")
    return params


def run_regular_norm(cfg: dict) -> RunResult:
    res = RunResult("regular-norm")
    group = build_group(_require(cfg, "group", "<root>"))
    mu = build_measure(group, _require(cfg, "measure", "<root>"))
    p = _params(cfg)
    method = p.get("method", "berg-christensen")
    if method in ("berg-christensen", "free-radial"):
        est = berg_christensen_estimate(mu, n_max=int(p.get("n_max", 50)))
    elif method == "amenable-mass":
        est = amenable_norm(mu)
    elif method == "fourier-abelian":
        est = fourier_norm_abelian(
            mu, freq_bound=float(p.get("freq_bound", 0.5)),
            freq_samples=int(p.get("freq_samples", 1001)),
        )
    else:
        raise ConfigError("params.method", f"unknown method {method!r}")
    res.put("method", est.method)
    res.put("value", est.value)
    res.put("total_mass", mu.total_mass)
    if est.note:
        res.put("note", est.note)
    if est.sequence:
        res.sequence_columns = ["n", "value"]
        res.sequence_rows = [[n, _fmt(v)] for n, v in est.sequence]
    res.note(f"regular-representation norm estimate: {_fmt(est.value)} "
             f"({est.method})")
    res.check("estimate <= total mass + 1e-10",
              est.value <= mu.total_mass + 1e-10)
    if est.sequence:
        nondecreasing = all(
            b >= a - 1e-10
            for (_, a), (_, b) in zip(est.sequence, est.sequence[1:])
        )
        res.check("convolution-power sequence nondecreasing", nondecreasing)
    return res


def run_koopman_norm(cfg: dict) -> RunResult:
    res = RunResult("koopman-norm")
    group = build_group(_require(cfg, "group", "<root>"))
    mu = build_measure(group, _require(cfg, "measure", "<root>"))
    space = build_space(group, _require(cfg, "action", "<root>"))
    p = _params(cfg)
    tol = float(p.get("tol", 1e-8))
    seed = int(p.get("seed", 7))
    disc = discrepancy(space, mu, tol=tol, seed=seed,
                       max_iter=int(p.get("max_iter", 200_000)))
    res.put("discrepancy", disc.value)
    res.put("residual", disc.residual)
    res.put("iterations", disc.iterations)
    res.note(f"discrepancy = {_fmt(disc.value)} (residual {_fmt(disc.residual)})")
    res.check("discrepancy <= total mass + tol",
              disc.value <= mu.total_mass + tol)
    if space.is_translation:
        cutoff = int(p.get("freq_cutoff", max(space.grid_shape) // 2))
        char = character_norm(space, mu, cutoff)
        res.put("character_norm", char)
        res.put("freq_cutoff", cutoff)
        res.note(f"character oracle = {_fmt(char)} at cutoff {cutoff}")
        if cutoff >= max(space.grid_shape) // 2:
            res.check("power iteration agrees with the character oracle (1e-6)",
                      abs(disc.value - char) <= max(1e-6, 2 * tol))
    slope = getattr(space, "slope_target", None)
    if slope is not None:
        line_cutoff = int(p.get("line_freq_cutoff", 10_000))
        value, witness = character_line_scan(mu, slope, line_cutoff)
        res.put("line_scan_value", value)
        res.put("line_scan_witness", f"({witness[0]};{witness[1]})")
        res.note(f"continuum line scan at slope {_fmt(slope)}: "
                 f"{_fmt(value)} at frequency {witness}")
    return res


def run_verify_bound(cfg: dict) -> RunResult:
    res = RunResult("verify-bound")
    group = build_group(_require(cfg, "group", "<root>"))
    mu = build_measure(group, _require(cfg, "measure", "<root>"))
    space = build_space(group, _require(cfg, "action", "<root>"))
    p = _params(cfg)
    report = verify_lower_bound(
        space, mu,
        regular_norm_method=p.get("regular_norm_method", "auto"),
        tol=float(p.get("tol", 1e-3)),
        seed=int(p.get("seed", 7)),
        n_max=int(p.get("n_max", 50)),
        max_iter=int(p.get("max_iter", 200_000)),
    )
    res.put("delta", report.delta)
    res.put("regular_norm", report.regular_norm)
    res.put("regular_method", report.regular_method)
    res.put("tol", report.tol)
    res.put("hypothesis_ok", report.hypothesis_ok)
    res.put("asserted", report.asserted)
    if report.passed is not None:
        res.put("passed", report.passed)
    res.note(f"delta = {_fmt(report.delta)}, lambda = {_fmt(report.regular_norm)} "
             f"({report.regular_method})")
    for line in report.notes:
        res.note(line)
    if report.passed is None:
        res.note("hypotheses violated; the lower bound is not asserted")
    else:
        res.check("delta >= lambda - tol", report.passed)
    return res


def run_certificate_experiment(cfg: dict) -> RunResult:
    res = RunResult("certificate")
    group = build_group(_require(cfg, "group", "<root>"))
    mu = build_measure(group, _require(cfg, "measure", "<root>"))
    space = build_space(group, _require(cfg, "action", "<root>"))
    p = _params(cfg)
    n_max = int(p.get("n_max", 10))
    slack = float(p.get("slack", 0.02))
    tol = float(p.get("tol", 1e-3))
    report = run_certificate(space, mu, x0=int(p.get("x0", 0)),
                             n_max=n_max, slack=slack)
    res.put("n_max", n_max)
    res.put("slack", slack)
    res.put("norm_lower_bound", report.norm_lower_bound)
    res.put("max_ratio_root", report.max_ratio_root)
    res.put("cond1_all", report.cond1_all)
    res.put("cond2_all", report.cond2_all)
    res.put("cond3_flag", report.cond3_flag)
    res.sequence_columns = [
        "n", "nu_B", "nu_SnB", "ratio", "ratio_root", "rayleigh",
        "chain_bound", "rayleigh_root", "chain_root",
    ]
    for row in report.rows:
        res.sequence_rows.append([
            row.n, _fmt(row.nu_B), _fmt(row.nu_SnB), _fmt(row.ratio),
            _fmt(row.ratio_root), _fmt(row.rayleigh), _fmt(row.chain_bound),
            _fmt(row.rayleigh_root), _fmt(row.chain_root),
        ])
    res.check("condition (1): every B_n has positive mass", report.cond1_all)
    res.check("condition (2): nu(S^n B_n) < 1/2 for every n", report.cond2_all)
    res.check(f"condition (3) flag: max ratio_n^(1/n) >= 1 - {slack}",
              report.cond3_flag)
    chain_rows = [r for r in report.rows if r.chain_asserted]
    res.check("chain inequality on every asserted row",
              all(r.rayleigh >= r.chain_bound - 1e-10 for r in chain_rows))
    if bool(p.get("cross_check_discrepancy", True)):
        disc = discrepancy(space, mu, tol=tol, seed=int(p.get("seed", 7)),
                           max_iter=int(p.get("max_iter", 200_000)))
        res.put("discrepancy", disc.value)
        res.check("certificate bound <= discrepancy + 2 tol",
                  report.norm_lower_bound <= disc.value + 2 * tol)
    res.note(f"certified lower bound: {_fmt(report.norm_lower_bound)}")
    return res


def run_nets(cfg: dict) -> RunResult:
    import numpy as np

    res = RunResult("nets")
    p = _params(cfg)
    count = int(p.get("count", 100))
    seed = int(p.get("seed", 20250809))
    rng = np.random.default_rng(seed)
    res.put("count", count)
    res.put("seed", seed)
    res.sequence_columns = ["instance", "dim", "n", "net_size",
                            "packing_ok", "covering_ok"]
    all_ok = True
    for i in range(count):
        dim = int(rng.integers(1, 3))
        group = GroupDescriptor(kind="lattice", dimension=dim)
        a_rad = int(rng.integers(1, 3))
        b_rad = int(rng.integers(1, 3))
        n = int(rng.integers(1, 6 // dim + 2))
        a_box = _box(dim, a_rad)
        b_box = _box(dim, b_rad)
        span = power_set(group, b_box, n)
        inst = greedy_maximal_net(group, span, a_box, B=b_box, n=n)
        report = verify_net_bounds(inst)
        all_ok &= report.all_ok
        res.sequence_rows.append([
            i, dim, n, report.net_size,
            _fmt(report.packing_ok), _fmt(report.covering_ok),
        ])
    res.check("packing and covering inequalities on every instance", all_ok)
    group = GroupDescriptor(kind="lattice", dimension=1)
    study = net_ratio_study(
        group, A1=[(0,), (1,)], A2=[(0,), (1,)], B=[(-1,), (0,), (1,)],
        n_range=range(3, int(p.get("ratio_n_max", 10)) + 1),
    )
    res.put("ratio_c1", study.c1)
    res.put("ratio_c2", study.c2)
    res.put("ratio_min", min(study.ratios.values()))
    res.put("ratio_max", max(study.ratios.values()))
    res.check("net ratios within [c1, c2]", study.within_bounds)
    return res


def _box(dim: int, radius: int):
    import itertools

    return [t for t in itertools.product(range(-radius, radius + 1), repeat=dim)]


def run_margulis_demo(cfg: dict) -> RunResult:
    res = RunResult("margulis-demo")
    p = _params(cfg)
    n = int(p.get("N", 1024))
    group = GroupDescriptor(kind="real-grid", dimension=1, resolution=n)
    mu = GroupMeasure.uniform_interval(group, 0.0, 1.0, closed=False)
    space = build_action("circle-rotation", group=group, N=n, cells_per_step=1)
    char = character_norm(space, mu, n // 2)
    disc = discrepancy(space, mu, tol=float(p.get("tol", 1e-9)),
                       seed=int(p.get("seed", 7)))
    lam = amenable_norm(mu)
    report = verify_lower_bound(space, mu, regular_norm_method="amenable",
                                tol=float(p.get("tol", 1e-3)),
                                seed=int(p.get("seed", 7)))
    res.put("N", n)
    res.put("max_nonzero_character", char)
    res.put("discrepancy", disc.value)
    res.put("regular_norm", lam.value)
    res.put("hypothesis_ok", report.hypothesis_ok)
    res.note(f"averaging the full rotation orbit kills every nonzero character: "
             f"max |eigenvalue| = {_fmt(char)}")
    res.note(f"delta = {_fmt(disc.value)} < lambda = {_fmt(lam.value)}: the "
             "lower bound genuinely fails here")
    for line in report.notes:
        res.note(line)
    res.check("every nonzero character eigenvalue <= 1e-10", char <= 1e-10)
    res.check("discrepancy <= 1e-8", disc.value <= 1e-8)
    res.check("amenable oracle gives exactly 1", lam.value == 1.0)
    res.check("hypothesis violation detected (inequality not asserted)",
              not report.hypothesis_ok and report.passed is None)
    return res


RUNNERS = {
    "regular-norm": run_regular_norm,
    "koopman-norm": run_koopman_norm,
    "verify-bound": run_verify_bound,
    "certificate": run_certificate_experiment,
    "nets": run_nets,
    "margulis-demo": run_margulis_demo,
}


# -- sweep ---------------------------------------------------------------------


def _set_path(cfg: dict, dotted: str, value):
    node = cfg
    parts = dotted.split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
    node[parts[-1]] = value


def run_sweep(cfg: dict, jobs: int = 1) -> tuple[RunResult, list[RunResult]]:
    template = _require(cfg, "template", "<root>")
    grid = cfg.get("grid", {})
    validate_config(template)
    if template.get("experiment") == "sweep":
        raise ConfigError("template.experiment", "sweeps cannot nest")
    keys = sorted(grid)
    combos: list[dict] = [{}]
    for key in keys:
        values = grid[key]
        if not isinstance(values, list):
            raise ConfigError(f"grid.{key}", "grid values must be lists")
        combos = [dict(c, **{key: v}) for c in combos for v in values]

    def child(combo: dict) -> RunResult:
        instance = copy.deepcopy(template)
        for dotted, value in combo.items():
            _set_path(instance, dotted, value)
        return RUNNERS[instance["experiment"]](instance)

    if jobs > 1 and len(combos) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            children = list(pool.map(child, combos))
    else:
        children = [child(c) for c in combos]

    agg = RunResult("sweep")
    agg.put("children", len(children))
    if children:
        value_keys = [k for k, _ in children[0].record if k != "experiment"]
        agg.sequence_columns = ["child", *keys, *value_keys, "passed"]
        for i, (combo, child_res) in enumerate(zip(combos, children)):
            rec = dict(child_res.record)
            agg.sequence_rows.append(
                [i, *(_fmt(combo[k]) for k in keys),
                 *(rec.get(k, "") for k in value_keys),
                 _fmt(child_res.passed)]
            )
    agg.check("all sweep children passed",
              all(c.passed for c in children) if children else True)
    return agg, children


# -- output ----------------------------------------------------------------------


def _write_outputs(res: RunResult, out_dir: Path, prefix: str, fmt: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = [f"gaplab experiment: {res.experiment}", ""]
    summary.extend(res.summary)
    summary.append("")
    summary.append(f"result: {'PASS' if res.passed else 'FAIL'}")
    (out_dir / f"{prefix}summary.txt").write_text("\n".join(summary) + "\n")
    if fmt == "csv":
        lines = ["key,value"]
        lines += [f"{k},{v}" for k, v in res.record]
        lines += [f"assert:{name},{_fmt(ok)}" for name, ok in res.assertions]
        (out_dir / f"{prefix}record.csv").write_text("\n".join(lines) + "\n")
    else:
        lines = [f"{k} = {v}" for k, v in res.record]
        lines += [f"assert:{name} = {_fmt(ok)}" for name, ok in res.assertions]
        (out_dir / f"{prefix}record.kv").write_text("\n".join(lines) + "\n")
    if res.sequence_rows:
        lines = [",".join(res.sequence_columns)]
        lines += [",".join(str(x) for x in row) for row in res.sequence_rows]
        (out_dir / f"{prefix}sequence.csv").write_text("\n".join(lines) + "\n")


# -- entry point -------------------------------------------------------------------


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="gaplab",
        description="discrepancy lower-bound laboratory: reproducible experiments",
    )
    parser.add_argument("--config", required=True, help="path to the JSON config")
    parser.add_argument("--out", default="gaplab-out",
                        help=f"output directory (env {ENV_OUT_DIR} overrides)")
    parser.add_argument("--jobs", type=int, default=1,
                        help="parallel children for sweeps")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    parser.add_argument("--format", choices=("csv", "kv"), default="csv")
    args = parser.parse_args(argv)

    try:
        cfg = json.loads(Path(args.config).read_text())
    except FileNotFoundError:
        print(f"config not found: {args.config}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as err:
        print(f"config is not valid JSON: {err}", file=sys.stderr)
        return 2

    out_dir = Path(os.environ.get(ENV_OUT_DIR, args.out))
    try:
        validate_config(cfg)
        if args.seed is not None:
            cfg.setdefault("params", {})["seed"] = args.seed
            if cfg["experiment"] == "sweep":
                cfg.get("template", {}).setdefault("params", {})["seed"] = args.seed
        experiment = cfg["experiment"]
        prefix = cfg.get("output", {}).get("prefix", experiment + "_")
        if experiment == "sweep":
            agg, children = run_sweep(cfg, jobs=args.jobs)
            for i, child_res in enumerate(children):
                _write_outputs(child_res, out_dir, f"{prefix}child{i:03d}_",
                               args.format)
            _write_outputs(agg, out_dir, prefix, args.format)
            result = agg
        else:
            result = RUNNERS[experiment](cfg)
            _write_outputs(result, out_dir, prefix, args.format)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except GaplabError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1

    for line in result.summary:
        print(line)
    print(f"result: {'PASS' if result.passed else 'FAIL'} "
          f"(reports in {out_dir})")
    return 0 if result.passed else 1


if __name__ == "__main__":
    raise SystemExit(main())
