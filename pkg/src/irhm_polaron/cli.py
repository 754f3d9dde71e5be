"""Config-driven experiment runner: ``irhm-polaron {verify,run,sweep} --config cfg.json``.

Every run writes ``manifest.json`` (the effective config plus library
versions), ``report.json`` (one entry per check with value, threshold and
pass flag), one or more CSV tables and ``timings.json``.  Wall-clock timings
live in their own file so that the other outputs are byte-reproducible.

Exit codes: 0 all checks pass, 1 a numerical check failed, 2 invalid config.
"""
from __future__ import annotations

import argparse
import csv
import itertools
import json
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import jsonschema
import numba
import numpy as np
import scipy

from . import _kernels, analysis, dynamics, hilbert, models, perturbation
from .errors import InsufficientCutoffError, StepSizeError, UnsupportedConfigurationError

SCHEMA_VERSION = 1
DEFAULT_BUDGET = 64

EXPERIMENTS = (
    "verify-identities",
    "verify-split",
    "verify-h2",
    "verify-h3",
    "markovian-run",
    "exact-vs-markovian",
    "two-qubit-demo",
    "sweep",
)
VERIFY_EXPERIMENTS = tuple(e for e in EXPERIMENTS if e.startswith("verify-"))

_positive_number = {"type": "number", "exclusiveMinimum": 0}
_int_list = {"type": "array", "items": {"type": "integer", "minimum": 0}}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "experiment"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "experiment": {"enum": list(EXPERIMENTS)},
        "model": {
            "type": "object",
            "required": ["n_sites", "j_star"],
            "additionalProperties": False,
            "properties": {
                "n_sites": {"type": "integer", "minimum": 2, "maximum": 6},
                "j_star": _positive_number,
                "delta": {"type": "number", "minimum": 0},
                "g": {"type": "number", "minimum": 0},
                "omega": _positive_number,
                "phonon_cutoff": {"type": "integer", "minimum": 0},
            },
        },
        "grid": {
            "type": "object",
            "required": ["t_end", "n_steps"],
            "additionalProperties": False,
            "properties": {
                "t_start": {"type": "number"},
                "t_end": {"type": "number"},
                "n_steps": {"type": "integer", "minimum": 1},
                "sample_stride": {"type": "integer", "minimum": 1},
            },
        },
        "cutoff_ladder": _int_list,
        "sizes": {"type": "array", "items": {"type": "integer", "minimum": 3, "maximum": 6}, "minItems": 1},
        "initial_state": {"enum": ["random-phase", "singlet-triplet"]},
        "seed": {"type": "integer", "minimum": 0},
        "output_dir": {"type": "string"},
        "parallelism": {"type": "integer", "minimum": 1},
        "sweep": {
            "type": "object",
            "required": ["g", "phonon_cutoff"],
            "additionalProperties": False,
            "properties": {
                "g": {"type": "array", "items": {"type": "number", "minimum": 0}},
                "j_star": {"type": "array", "items": _positive_number},
                "phonon_cutoff": _int_list,
                "budget": {"type": "integer", "minimum": 1},
            },
        },
    },
}


class ConfigError(ValueError):
    """Invalid configuration; maps to exit code 2."""


# ---------------------------------------------------------------------------
# config handling
# ---------------------------------------------------------------------------

def load_config(path: str | Path) -> dict:
    """Read a config file, or the ``config`` section of a previous manifest."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if isinstance(data, dict) and "config" in data and "versions" in data:
        data = data["config"]
    return data


def _require(cfg: dict, *keys: str):
    missing = [k for k in keys if k not in cfg]
    if missing:
        raise ConfigError(f"experiment {cfg['experiment']!r} requires {', '.join(missing)}")


def _params(cfg: dict, **changes) -> models.ModelParams:
    fields = dict(cfg["model"])
    fields.update(changes)
    try:
        return models.ModelParams(**fields)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _grid(cfg: dict) -> dynamics.TimeGrid:
    g = cfg["grid"]
    try:
        return dynamics.TimeGrid(g.get("t_start", 0.0), g["t_end"], g["n_steps"], g.get("sample_stride", 1))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def validate_config(cfg) -> dict:
    """Schema plus experiment-specific checks, all before any computation.

    Returns the config with defaults filled in.
    """
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{path}: {exc.message}") from exc
    cfg = dict(cfg)
    cfg.setdefault("seed", 0)
    cfg.setdefault("parallelism", 1)
    exp = cfg["experiment"]

    if exp == "verify-identities":
        cfg.setdefault("sizes", [4, 5])
        too_small = [n for n in cfg["sizes"] if n < 4]
        if too_small:
            raise ConfigError(f"sizes {too_small}: the hopping-string identities need n_sites >= 4")
        return cfg

    _require(cfg, "model")
    params = _params(cfg)

    if exp in ("verify-split", "verify-h2"):
        _require(cfg, "cutoff_ladder")
        ladder = cfg["cutoff_ladder"]
        floor = 1 if exp == "verify-split" else 2
        if len(ladder) < 2 or any(b <= a for a, b in zip(ladder, ladder[1:])) or ladder[0] < floor:
            raise ConfigError(f"cutoff_ladder must be strictly increasing with at least 2 entries >= {floor}")
    elif exp == "verify-h3":
        if params.phonon_cutoff < 3:
            raise ConfigError("verify-h3 needs model.phonon_cutoff >= 3")
        if params.n_sites > 4:
            raise ConfigError("verify-h3 supports n_sites <= 4")
    elif exp == "markovian-run":
        _require(cfg, "grid")
        _grid(cfg)
        cfg.setdefault("initial_state", "random-phase")
        if cfg["initial_state"] == "singlet-triplet" and params.n_sites != 2:
            raise ConfigError("initial_state 'singlet-triplet' needs n_sites == 2")
    elif exp in ("exact-vs-markovian", "two-qubit-demo"):
        if params.n_sites != 2:
            raise ConfigError(f"{exp} needs n_sites == 2")
        if params.phonon_cutoff < 2:
            raise ConfigError(f"{exp} needs model.phonon_cutoff >= 2")
        _require(cfg, "grid")
        _grid(cfg)
    elif exp == "sweep":
        _require(cfg, "sweep", "grid")
        _grid(cfg)
        sw = dict(cfg["sweep"])
        sw.setdefault("j_star", [params.j_star])
        sw.setdefault("budget", DEFAULT_BUDGET)
        empty = [k for k in ("g", "j_star", "phonon_cutoff") if not sw[k]]
        if empty:
            raise ConfigError(f"empty sweep range: {', '.join(empty)}")
        if min(sw["phonon_cutoff"]) < 2:
            raise ConfigError("sweep phonon_cutoff values must be >= 2")
        count = len(sw["g"]) * len(sw["j_star"]) * len(sw["phonon_cutoff"])
        if count > sw["budget"]:
            raise ConfigError(f"sweep has {count} points, exceeding the budget of {sw['budget']}")
        cfg["sweep"] = sw
    return cfg


# ---------------------------------------------------------------------------
# results
# ---------------------------------------------------------------------------

class Result:
    def __init__(self):
        self.checks: list[dict] = []
        self.observations: dict = {}
        self.tables: dict[str, tuple[list[str], list[list]]] = {}
        self.documents: dict[str, object] = {}

    def check(self, name: str, value: float, threshold: float, passed: bool | None = None, relation: str = "<"):
        if passed is None:
            passed = bool(value < threshold) if relation == "<" else bool(value == threshold)
        self.checks.append({
            "name": name,
            "value": _jsonable(value),
            "threshold": _jsonable(threshold),
            "relation": relation,
            "passed": bool(passed),
        })

    def table(self, name: str, header: list[str], rows: list[list]):
        self.tables[name] = (header, rows)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)


def _jsonable(value):
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if np.isfinite(value) else repr(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return value


def _strictly_decreasing(values) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))


def _ripple(values: np.ndarray) -> float:
    return float(np.max(values) - np.min(values))


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

def run_identities(cfg: dict) -> Result:
    res = Result()
    reports = perturbation.verify_identities(tuple(cfg["sizes"]))
    rows = [[r.identity_name, r.n_sites, r.particle_number, r.max_abs_deviation] for r in reports]
    res.table("identities", ["identity", "n_sites", "particle_number", "max_abs_deviation"], rows)
    res.documents["identities"] = [r.to_dict() for r in reports]
    worst = max(r.max_abs_deviation for r in reports)
    res.check("identities_max_abs_deviation", worst, 0.0, passed=all(r.exact for r in reports), relation="==")
    return res


def run_split(cfg: dict) -> Result:
    res = Result()
    ladder = cfg["cutoff_ladder"]
    errs = [models.split_residual(_params(cfg, phonon_cutoff=m)) for m in ladder]
    res.table("split_ladder", ["phonon_cutoff", "relative_residual"], [[m, e] for m, e in zip(ladder, errs)])
    res.check("split_residual_at_top_cutoff", errs[-1], 1e-5)
    res.check("split_residual_decreasing", float(_strictly_decreasing(errs)), 1.0, relation="==")
    return res


def _h2_deviation(params: models.ModelParams) -> float:
    closed = perturbation.build_h2_closed(params)
    sw = perturbation.build_h2_sw(params)
    return float(np.max(np.abs(sw - closed)) / np.max(np.abs(closed)))


def run_h2(cfg: dict) -> Result:
    res = Result()
    ladder = cfg["cutoff_ladder"]
    devs = [_h2_deviation(_params(cfg, phonon_cutoff=m)) for m in ladder]
    res.table("h2_ladder", ["phonon_cutoff", "relative_max_deviation"], [[m, d] for m, d in zip(ladder, devs)])
    closed = perturbation.build_h2_closed(_params(cfg))
    res.check("h2_sw_vs_closed_at_top_cutoff", devs[-1], 1e-3)
    res.check("h2_deviation_decreasing", float(_strictly_decreasing(devs)), 1.0, relation="==")
    res.check("h2_closed_commutes_with_irhm", hilbert.commutator_norm(closed, models.build_irhm(_params(cfg))), 1e-12)
    return res


def run_h3(cfg: dict) -> Result:
    res = Result()
    params = _params(cfg)
    h3 = perturbation.build_h3_sw(params)
    h = models.build_irhm(params)
    rel = hilbert.commutator_norm(h3, h) / np.linalg.norm(h3)
    res.check("h3_relative_commutator_with_irhm", rel, 1e-8)
    res.check("h3_hermiticity", perturbation.hermitian_part_error(h3), 1e-12)
    res.check("h3_number_commutator", perturbation.number_commutator(h3, params.n_sites) / np.linalg.norm(h3), 1e-12)
    ds = h3.shape[0]
    rows = [[i, j, h3[i, j].real, h3[i, j].imag] for i in range(ds) for j in range(ds) if h3[i, j] != 0]
    res.table("h3_elements", ["row", "col", "re", "im"], rows)
    return res


def _initial_rho(cfg: dict, basis) -> np.ndarray:
    if cfg.get("initial_state") == "singlet-triplet":
        singlet, triplet = analysis.singlet_triplet()
        return dynamics.pure_state(singlet + triplet)
    rng = np.random.default_rng(cfg["seed"])
    b = analysis.basis_matrix(basis)
    phases = np.exp(2j * np.pi * rng.random(b.shape[1]))
    return dynamics.pure_state(b @ phases)


def run_markovian(cfg: dict) -> Result:
    res = Result()
    params = _params(cfg, phonon_cutoff=0)
    grid = _grid(cfg)
    basis = analysis.irhm_eigenbasis(params)
    rho0 = _initial_rho(cfg, basis)
    traj = dynamics.evolve_markovian(rho0, params, grid)
    h2 = perturbation.build_h2_closed(params)
    b = analysis.basis_matrix(basis)
    energies = np.real(np.einsum("in,ij,jn->n", b.conj(), h2, b))

    pairs = [(n, m) for n in range(len(basis)) for m in range(n + 1, len(basis))]
    if cfg.get("initial_state") == "singlet-triplet":
        singlet, triplet = analysis.singlet_triplet()
        pairs = [(_index_of(basis, singlet), _index_of(basis, triplet))]
    header, cols, summary = ["t"], [traj.times], []
    drift = resid = 0.0
    for n, m in pairs:
        series = analysis.coherence_profile(traj, basis, (n, m))
        elem = series.magnitudes * np.exp(1j * series.phases)
        header += [f"re_{n}_{m}", f"im_{n}_{m}"]
        cols += [elem.real, elem.imag]
        d = _ripple(series.magnitudes)
        r = analysis.phase_residual(series, energies[n] - energies[m])
        drift, resid = max(drift, d), max(resid, r)
        summary.append([n, m, energies[n] - energies[m], series.magnitudes[0], d, r])
    res.table("trajectory", header, [list(row) for row in zip(*cols)])
    res.table("coherence", ["n", "m", "gap", "magnitude_t0", "magnitude_drift", "phase_residual"], summary)
    res.documents["eigenbasis"] = [
        dict(label.to_dict(), index=k, h2_energy=float(energies[k])) for k, (label, _) in enumerate(basis)
    ]
    res.check("markovian_magnitude_drift", drift, 1e-8)
    res.check("markovian_phase_residual", resid, 1e-6)
    res.check("trace_deviation", traj.max_trace_deviation, 1e-10)
    return res


def _index_of(basis, vec: np.ndarray) -> int:
    overlaps = [abs(np.vdot(v, vec)) for _, v in basis]
    return int(np.argmax(overlaps))


def _singlet_triplet_magnitudes(states: np.ndarray) -> np.ndarray:
    singlet, triplet = analysis.singlet_triplet()
    return np.abs(np.einsum("i,tij,j->t", singlet.conj(), states, triplet))


def exact_ripples(params: models.ModelParams, times: np.ndarray) -> dict[str, float]:
    """Singlet-triplet magnitude ripple under the exact LF-frame evolution, for both initial conventions."""
    singlet, triplet = analysis.singlet_triplet()
    psi = (singlet + triplet) / np.sqrt(2)
    split = models.build_split(params)
    out = {}
    for convention in ("lf_vacuum", "bare_vacuum"):
        states = dynamics.exact_reduced_trajectory(params, psi, times, convention, split=split)
        out[convention] = _ripple(_singlet_triplet_magnitudes(states))
    return out


def run_exact_vs_markovian(cfg: dict) -> Result:
    res = Result()
    params = _params(cfg)
    grid = _grid(cfg)
    singlet, triplet = analysis.singlet_triplet()
    rho0 = dynamics.pure_state(singlet + triplet)
    traj = dynamics.evolve_markovian(rho0, params.replace(phonon_cutoff=0), grid)
    split = models.build_split(params)
    psi = (singlet + triplet) / np.sqrt(2)
    mags = {"markovian": _singlet_triplet_magnitudes(traj.states)}
    for convention in ("lf_vacuum", "bare_vacuum"):
        states = dynamics.exact_reduced_trajectory(params, psi, traj.times, convention, split=split)
        mags[convention] = _singlet_triplet_magnitudes(states)
    keys = list(mags)
    res.table("singlet_triplet", ["t"] + [f"abs_{k}" for k in keys],
              [list(row) for row in zip(traj.times, *(mags[k] for k in keys))])
    res.observations = {f"ripple_{k}": _ripple(v) for k, v in mags.items()}
    res.check("markovian_magnitude_drift", res.observations["ripple_markovian"], 1e-8)
    return res


def run_two_qubit(cfg: dict) -> Result:
    res = Result()
    params = _params(cfg)
    rng = np.random.default_rng(cfg["seed"])
    dim = params.space.dim_total
    vec = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    rho = dynamics.pure_state(vec)
    via_sum = analysis.two_qubit_polaron_element(params, rho)
    via_lf = analysis.lf_frame_element(params, rho)
    res.check("two_qubit_route_agreement", abs(via_sum - via_lf), 1e-8)

    grid = _grid(cfg)
    singlet, triplet = analysis.singlet_triplet()
    traj = dynamics.evolve_markovian(dynamics.pure_state(singlet + triplet), params.replace(phonon_cutoff=0), grid)
    mags = _singlet_triplet_magnitudes(traj.states)
    res.check("two_qubit_markovian_magnitude_drift", _ripple(mags), 1e-8)
    res.table("element", ["route", "re", "im"], [["phonon_sum", via_sum.real, via_sum.imag],
                                                 ["lf_frame", via_lf.real, via_lf.imag]])
    res.table("markovian_magnitude", ["t", "abs_singlet_triplet"], [list(r) for r in zip(traj.times, mags)])
    return res


def sweep_point(model: dict, grid: dict, g: float, j_star: float, cutoff: int) -> list:
    """Summary metrics for one sweep point (module level so worker processes can import it)."""
    params = models.ModelParams(**dict(model, g=g, j_star=j_star, phonon_cutoff=cutoff))
    dev = _h2_deviation(params)
    first = dynamics.first_order_term_check(params)
    if params.n_sites == 2:
        tg = dynamics.TimeGrid(grid.get("t_start", 0.0), grid["t_end"], grid["n_steps"], grid.get("sample_stride", 1))
        ripple = exact_ripples(params, tg.sample_times)
    else:
        ripple = {"lf_vacuum": float("nan"), "bare_vacuum": float("nan")}
    return [g, j_star, cutoff, dev, first, ripple["lf_vacuum"], ripple["bare_vacuum"]]


def run_sweep(cfg: dict) -> Result:
    res = Result()
    sw = cfg["sweep"]
    points = list(itertools.product(sw["g"], sw["j_star"], sw["phonon_cutoff"]))
    args = [(cfg["model"], cfg["grid"], g, j, m) for g, j, m in points]
    if cfg["parallelism"] > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=cfg["parallelism"]) as pool:
            rows = list(pool.map(sweep_point, *zip(*args)))
    else:
        rows = [sweep_point(*a) for a in args]
    header = ["g", "j_star", "phonon_cutoff", "h2_sw_deviation", "first_order_norm",
              "ripple_lf_vacuum", "ripple_bare_vacuum"]
    res.table("sweep", header, rows)
    for g, j in itertools.product(sw["g"], sw["j_star"]):
        devs = [r[3] for r in rows if r[0] == g and r[1] == j]
        if len(devs) > 1 and g > 0:
            res.check(f"h2_deviation_decreasing_g{g:g}_jstar{j:g}", float(_strictly_decreasing(devs)), 1.0,
                      relation="==")
    res.check("first_order_norm_max", max(r[4] for r in rows), 1e-10)
    return res


RUNNERS = {
    "verify-identities": run_identities,
    "verify-split": run_split,
    "verify-h2": run_h2,
    "verify-h3": run_h3,
    "markovian-run": run_markovian,
    "exact-vs-markovian": run_exact_vs_markovian,
    "two-qubit-demo": run_two_qubit,
    "sweep": run_sweep,
}


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % value
    return str(value)


def write_csv(path: Path, header: list[str], rows: list[list]):
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_json(path: Path, data):
    text = json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False, default=_jsonable)
    path.write_text(text + "\n", encoding="utf-8")


def versions() -> dict:
    from . import __version__

    return {
        "irhm_polaron": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
        "python": platform.python_version(),
        "kernel_backend": _kernels.BACKEND,
    }


def write_outputs(out_dir: Path, cfg: dict, result: Result, elapsed: float):
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest_cfg = {k: v for k, v in cfg.items() if k != "output_dir"}
    write_json(out_dir / "manifest.json", {"config": manifest_cfg, "versions": versions()})
    write_json(out_dir / "report.json", {
        "experiment": cfg["experiment"],
        "passed": result.passed,
        "checks": result.checks,
        "observations": {k: _jsonable(v) for k, v in result.observations.items()},
    })
    for name, (header, rows) in result.tables.items():
        write_csv(out_dir / f"{name}.csv", header, rows)
    for name, doc in result.documents.items():
        write_json(out_dir / f"{name}.json", doc)
    write_json(out_dir / "timings.json", {"wall_seconds": elapsed})


def execute(cfg: dict, out_dir: Path) -> int:
    start = time.perf_counter()
    try:
        result = RUNNERS[cfg["experiment"]](cfg)
    except (UnsupportedConfigurationError, InsufficientCutoffError, StepSizeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    write_outputs(out_dir, cfg, result, time.perf_counter() - start)
    failed = [c["name"] for c in result.checks if not c["passed"]]
    for c in result.checks:
        print(f"{'PASS' if c['passed'] else 'FAIL'} {c['name']}: {c['value']} ({c['relation']} {c['threshold']})")
    if failed:
        print("failing checks: " + ", ".join(failed), file=sys.stderr)
        return 1
    return 0


DEFAULT_VERIFY_SUITE = (
    {"schema_version": 1, "experiment": "verify-identities", "sizes": [4, 5]},
    {"schema_version": 1, "experiment": "verify-split",
     "model": {"n_sites": 2, "j_star": 0.1, "g": 1.0}, "cutoff_ladder": [4, 6, 8, 10]},
    {"schema_version": 1, "experiment": "verify-h2",
     "model": {"n_sites": 2, "j_star": 0.1, "g": 1.0}, "cutoff_ladder": [4, 6, 8, 10]},
    {"schema_version": 1, "experiment": "verify-h3",
     "model": {"n_sites": 3, "j_star": 0.1, "g": 1.0, "phonon_cutoff": 8}},
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="irhm-polaron", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb, help_text in (("verify", "run a verify-* experiment, or the default suite without --config"),
                            ("run", "run one experiment"),
                            ("sweep", "run a parameter sweep")):
        p = sub.add_parser(verb, help=help_text)
        p.add_argument("--config", required=verb != "verify", help="JSON config (or a previous manifest.json)")
        p.add_argument("--output", help="output directory; overrides output_dir")
        p.add_argument("--parallelism", type=int, help="worker count; overrides parallelism")
    return parser


def _prepare(raw, args) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    raw = dict(raw)
    if args.output is not None:
        raw["output_dir"] = args.output
    if args.parallelism is not None:
        raw["parallelism"] = args.parallelism
    cfg = validate_config(raw)
    if "output_dir" not in cfg:
        raise ConfigError("no output directory: set output_dir or pass --output")
    exp = cfg["experiment"]
    if args.verb == "verify" and exp not in VERIFY_EXPERIMENTS:
        raise ConfigError(f"verb 'verify' expects a verify-* experiment, got {exp!r}")
    if args.verb == "sweep" and exp != "sweep":
        raise ConfigError(f"verb 'sweep' expects experiment 'sweep', got {exp!r}")
    if args.verb == "run" and exp == "sweep":
        raise ConfigError("use the 'sweep' verb for sweep configs")
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config is None:
            if args.output is None:
                raise ConfigError("the default verification suite needs --output")
            jobs = [
                (_prepare(dict(c, output_dir=str(Path(args.output) / c["experiment"])), args_no_output(args)))
                for c in DEFAULT_VERIFY_SUITE
            ]
        else:
            jobs = [_prepare(load_config(args.config), args)]
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 2
    codes = [execute(cfg, Path(cfg["output_dir"])) for cfg in jobs]
    return max(codes)


def args_no_output(args: argparse.Namespace) -> argparse.Namespace:
    return argparse.Namespace(verb=args.verb, output=None, parallelism=args.parallelism)


if __name__ == "__main__":
    sys.exit(main())
