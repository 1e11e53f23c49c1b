"""Command-line front end: ``dscatter {classify,scatter,evolve,asymptotics,selftest}``.

Configuration comes from an optional TOML file (``--config``) with command
line flags taking precedence.  Curves are written as CSV and structured
results as JSON, every float with 17 significant digits so that 64-bit
values round-trip.  Each CSV ends with ``# key=value`` lines recording the
grid, tolerances and package version.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3
BUILTINS = ("zero", "square_well_pair", "gaussian", "odd_resonance_well")

EPILOG = """exit codes:
  0  success (selftest: every check passed)
  1  configuration error (bad flag, config file or potential)
  2  numerical guard tripped (selftest: at least one check failed)
  3  input/output error

environment:
  DSCATTER_THREADS  caps the worker threads of the numerical libraries
"""

_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS")


def _apply_thread_cap() -> None:
    """Honour DSCATTER_THREADS; must run before numpy is first imported."""
    n = os.environ.get("DSCATTER_THREADS")
    if n:
        for var in _THREAD_VARS:
            os.environ[var] = n


def _is_pow2_plus_one(n: int) -> bool:
    m = n - 1
    return m >= 2 and (m & (m - 1)) == 0


# ------------------------------------------------------------------ configuration


@dataclass(frozen=True)
class GridConfig:
    L: float = 20.0
    N_x: int = 2049
    N_k: int = 1025
    k_max: float = 8.0

    def validate(self) -> None:
        from .errors import ConfigError

        if not (self.L > 0 and math.isfinite(self.L)):
            raise ConfigError("grid.L must be positive")
        if not (self.k_max > 0 and math.isfinite(self.k_max)):
            raise ConfigError("grid.k_max must be positive")
        for name in ("N_x", "N_k"):
            if not _is_pow2_plus_one(getattr(self, name)):
                raise ConfigError(f"grid.{name} must be a power of two plus one")


@dataclass(frozen=True)
class EvolveConfig:
    lam: float = 1.0
    epsilon: float = 0.05
    parity: str = "odd"
    t_max: float = 100.0
    dt: float | str = "adaptive"
    dt_rel: float = 0.05
    dt_min: float = 0.05
    dt_max: float = 20.0
    mass_tol: float = 1e-5
    filter_frac: float = 2.0 / 3.0


@dataclass(frozen=True)
class RunConfig:
    potential: dict = field(default_factory=lambda: {"kind": "square_well_pair", "A": "auto"})
    grid: GridConfig = field(default_factory=GridConfig)
    evolve: EvolveConfig = field(default_factory=EvolveConfig)
    output: str = "."
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "potential": dict(self.potential),
            "grid": vars(self.grid).copy(),
            "evolve": vars(self.evolve).copy(),
            "output": self.output,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        from .errors import ConfigError

        unknown = set(d) - {"potential", "grid", "evolve", "output", "seed"}
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        try:
            grid = GridConfig(**{k: _coerce(GridConfig, k, v) for k, v in d.get("grid", {}).items()})
            evolve = EvolveConfig(**{k: _coerce(EvolveConfig, k, v) for k, v in d.get("evolve", {}).items()})
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        pot = d.get("potential", cls().potential)
        if isinstance(pot, str):
            pot = {"kind": pot}
        cfg = cls(dict(pot), grid, evolve, str(d.get("output", ".")), int(d.get("seed", 0)))
        cfg.validate()
        return cfg

    def validate(self) -> None:
        self.grid.validate()
        self.potential_spec()

    def potential_spec(self):
        from .potential import builtin, load_potential, potential_from_dict

        p = self.potential
        if "file" in p:
            return load_potential(p["file"])
        if len(p) == 1 and p.get("kind") in BUILTINS:
            return builtin(p["kind"])
        return potential_from_dict(p)


def _coerce(cls, key: str, value):
    from .errors import ConfigError

    fields = cls.__dataclass_fields__
    if key not in fields:
        raise ConfigError(f"unknown {cls.__name__} field {key!r}")
    default = fields[key].default
    if isinstance(default, bool) or value == "adaptive":
        return value
    if isinstance(default, int):
        if float(value) != int(value):
            raise ConfigError(f"{key} must be an integer")
        return int(value)
    if isinstance(default, float):
        return float(value)
    return value


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    from .errors import ConfigError

    if sys.version_info >= (3, 11):
        import tomllib
    else:
        import tomli as tomllib
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError:
        raise
    except Exception as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc


def _potential_arg(value: str) -> dict:
    """A builtin name or a path to a JSON/TOML potential file."""
    if os.path.exists(value) or value.endswith((".json", ".toml")):
        return {"file": value}
    return {"kind": value}


def build_config(args: argparse.Namespace) -> RunConfig:
    d = load_config(getattr(args, "config", None))
    d.setdefault("grid", {})
    d.setdefault("evolve", {})
    if getattr(args, "potential", None):
        d["potential"] = _potential_arg(args.potential)
    for key in ("L", "N_x", "N_k", "k_max"):
        v = getattr(args, key, None)
        if v is not None:
            d["grid"][key] = v
    for flag, key in (("lam", "lam"), ("epsilon", "epsilon"), ("parity", "parity"), ("tmax", "t_max"),
                      ("dt", "dt")):
        v = getattr(args, flag, None)
        if v is not None:
            d["evolve"][key] = v
    if getattr(args, "out", None):
        d["output"] = args.out
    if getattr(args, "seed", None) is not None:
        d["seed"] = args.seed
    return RunConfig.from_dict(d)


# ------------------------------------------------------------------ serialization


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def _json_value(v) -> str:
    import numpy as np

    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return "null"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_float(v) if math.isfinite(v) else "null"
    if isinstance(v, (complex, np.complexfloating)):
        return _json_value([v.real, v.imag])
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json_value(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def dumps_json(obj) -> str:
    """JSON text with every float written to 17 significant digits."""
    return _json_value(obj) + "\n"


def csv_text(header: list, columns: list, meta: dict) -> str:
    rows = [",".join(header)]
    n = len(columns[0]) if columns else 0
    for i in range(n):
        rows.append(",".join(fmt_float(c[i]) for c in columns))
    for k, v in meta.items():
        rows.append(f"# {k}={v}")
    return "\n".join(rows) + "\n"


def read_csv(path) -> tuple[list, list, dict]:
    """Inverse of :func:`csv_text`: (header, columns, metadata)."""
    header, data, meta = None, [], {}
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            k, _, v = line[1:].strip().partition("=")
            meta[k] = v
        elif header is None:
            header = line.split(",")
        elif line:
            data.append([float(s) for s in line.split(",")])
    cols = [list(c) for c in zip(*data)] if data else [[] for _ in header or []]
    return header, cols, meta


def _meta(cfg: RunConfig, **extra) -> dict:
    from . import __version__

    m = {
        "version": __version__,
        "potential": json.dumps(cfg.potential, sort_keys=True),
        "L": fmt_float(cfg.grid.L),
        "N_x": cfg.grid.N_x,
        "N_k": cfg.grid.N_k,
        "k_max": fmt_float(cfg.grid.k_max),
        "seed": cfg.seed,
    }
    m.update({k: (fmt_float(v) if isinstance(v, float) else v) for k, v in extra.items()})
    return m


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


# ------------------------------------------------------------------ commands


def _sampled(cfg: RunConfig):
    from .potential import sample

    return sample(cfg.potential_spec(), cfg.grid.L, cfg.grid.N_x)


def _half_kgrid(cfg: RunConfig):
    from .transform import make_kgrid

    k = make_kgrid(cfg.grid.k_max, cfg.grid.N_k)
    return k[k >= 0]


def run_classify(cfg: RunConfig) -> dict:
    """Zero-energy classification report."""
    from .jost import MINUS, PLUS, compute_jost
    from .scattering import Classification, classify, exact_zero_limits

    p = _sampled(cfg)
    k = _half_kgrid(cfg)[:3]
    jp, jm = compute_jost(p, k, PLUS), compute_jost(p, k, MINUS)
    cls, w0, a = classify(jp, jm)
    T0, R0, _ = exact_zero_limits(cls, a)
    report = {
        "classification": cls.value,
        "wronskian0": [w0.real, w0.imag],
        "a": a if cls == Classification.EXCEPTIONAL else None,
        "T0": [float(T0), 0.0],
        "R0": [float(R0), 0.0],
    }
    _write(Path(cfg.output) / "classify.json", dumps_json(report))
    return report


def run_scatter(cfg: RunConfig, tol: float = 1e-6, dump_psi: str | None = None) -> Path:
    """T, R+, R- on k >= 0 as CSV; the k = 0 row holds the zero-energy limits."""
    import numpy as np

    from .errors import UnitarityDefect
    from .jost import MINUS, PLUS, compute_jost
    from .scattering import scattering_data

    p = _sampled(cfg)
    k = _half_kgrid(cfg)
    s = scattering_data(compute_jost(p, k, PLUS), compute_jost(p, k, MINUS), check=False)
    defect = s.unitarity_defect()
    cols = [s.k, s.T.real, s.T.imag, s.Rp.real, s.Rp.imag, s.Rm.real, s.Rm.imag, np.abs(s.T) ** 2, defect]
    header = ["k", "T_re", "T_im", "Rp_re", "Rp_im", "Rm_re", "Rm_im", "abs_T2", "unitarity_defect"]
    path = Path(cfg.output) / "scatter.csv"
    meta = _meta(cfg, unitarity_tol=tol, classification=s.classification.value if s.classification else "none")
    _write(path, csv_text(header, cols, meta))
    if dump_psi:
        from .transform import build_basis

        build_basis(p, cfg.grid.k_max, cfg.grid.N_k, check=False).dump_psi(dump_psi)
    # the k = 0 row is an extrapolation, so the guard covers computed rows only
    worst = float(np.max(defect[s.k > 0], initial=0.0))
    if worst > tol:
        raise UnitarityDefect(f"max unitarity defect {worst:.3e} exceeds {tol:g} (written to {path})")
    return path


def _nls_setup(cfg: RunConfig):
    from .nls import NlsConfig, even_data, odd_data
    from .transform import build_basis

    p = _sampled(cfg)
    b = build_basis(p, cfg.grid.k_max, cfg.grid.N_k)
    e = cfg.evolve
    ncfg = NlsConfig(lam=e.lam, epsilon=e.epsilon, dt=e.dt, t_max=e.t_max, parity=e.parity, dt_rel=e.dt_rel,
                     dt_min=e.dt_min, dt_max=e.dt_max, mass_tol=e.mass_tol, filter_frac=e.filter_frac)
    u0 = odd_data(b, e.epsilon) if e.parity == "odd" else even_data(b, e.epsilon)
    return b, ncfg, u0


def run_evolve(cfg: RunConfig):
    """Split-step run; writes norms.csv and paired snapshot CSVs."""
    from .nls import solve_nls

    b, ncfg, u0 = _nls_setup(cfg)
    traj = solve_nls(b, u0, ncfg)
    out = Path(cfg.output)
    meta = _meta(cfg, lam=ncfg.lam, epsilon=ncfg.epsilon, parity=ncfg.parity.value, t_max=float(ncfg.t_max),
                 dt=str(ncfg.dt), mass_tol=ncfg.mass_tol, steps=traj.steps)
    tab = traj.as_table()
    _write(out / "norms.csv", csv_text(list(tab), list(tab.values()), meta))
    for t, w, u in zip(traj.snap_times, traj.w_snapshots, traj.u_snapshots):
        tag = f"t{t:.6g}"
        _write(out / f"snapshot_x_{tag}.csv",
               csv_text(["x", "re", "im"], [u.x, u.values.real, u.values.imag], dict(meta, t=fmt_float(t))))
        _write(out / f"snapshot_k_{tag}.csv",
               csv_text(["k", "re", "im"], [w.k, w.values.real, w.values.imag], dict(meta, t=fmt_float(t))))
    return traj, b, ncfg


def run_asymptotics(cfg: RunConfig) -> dict:
    """Evolve, then extract the modified final state; writes profile.json."""
    from .nls import extract_profile

    traj, b, ncfg = run_evolve(cfg)
    prof = extract_profile(traj, ncfg, b.scattering, box_length=b.L)
    d = prof.to_dict()
    d["modulus_defect"] = prof.modulus_defect()
    d["mass_drift"] = traj.mass_drift()
    _write(Path(cfg.output) / "profile.json", dumps_json(d))
    return d


def run_selftest(numbers=None, coarse_N: int | None = None, echo=print) -> int:
    """Run the acceptance checks; 0 if every one passes, 2 otherwise."""
    from .acceptance import CHECKS, run_check

    results = []
    for n in numbers or sorted(CHECKS):
        kw = {"N": coarse_N} if (coarse_N is not None and n == 1) else {}
        r = run_check(n, **kw)
        echo(r.line())
        results.append(r)
    passed = sum(r.passed for r in results)
    echo(f"{passed}/{len(results)} checks passed")
    return EXIT_OK if passed == len(results) else EXIT_NUMERIC


# ------------------------------------------------------------------ argument parsing


def _add_common(p: argparse.ArgumentParser, grid: bool = True) -> None:
    p.add_argument("--config", help="TOML run configuration; flags override it")
    p.add_argument("--potential", help="builtin name (zero, square_well_pair, gaussian, odd_resonance_well) "
                                       "or a JSON/TOML potential file")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int)
    if grid:
        p.add_argument("--L", type=float, help="half-width of the box [-L, L]")
        p.add_argument("--N-x", dest="N_x", type=int, help="x points (power of two plus one)")
        p.add_argument("--N-k", dest="N_k", type=int, help="k points (power of two plus one)")
        p.add_argument("--k-max", dest="k_max", type=float)


def _add_evolve(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lambda", dest="lam", type=float, help="nonlinearity sign/strength")
    p.add_argument("--epsilon", type=float, help="data size ||u0||_H1 + ||u0||_H01")
    p.add_argument("--parity", choices=["odd", "even"])
    p.add_argument("--tmax", type=float)
    p.add_argument("--dt", type=lambda s: s if s == "adaptive" else float(s), help="step or 'adaptive'")


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dscatter", description=__doc__.splitlines()[0],
                                 epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("classify", help="generic/exceptional classification as JSON",
                       epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    _add_common(p)
    p = sub.add_parser("scatter", help="T and R on the k-grid as CSV",
                       epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    _add_common(p)
    p.add_argument("--tol", type=float, default=1e-6, help="unitarity tolerance (exit 2 above it)")
    p.add_argument("--dump-psi", help="also write the distorted-wave matrix as raw complex128")
    for name, text in (("evolve", "cubic NLS run: norms.csv and snapshots"),
                       ("asymptotics", "evolve, then write the modified final state to profile.json")):
        p = sub.add_parser(name, help=text, epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
        _add_common(p)
        _add_evolve(p)
    p = sub.add_parser("selftest", help="run the acceptance checks",
                       epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--only", type=int, nargs="+", help="check numbers to run (default: all)")
    p.add_argument("--coarse-N", type=int, help="force N_x for the unitarity check (guard demonstration)")
    return ap


def main(argv=None) -> int:
    _apply_thread_cap()
    args = make_parser().parse_args(argv)
    from .errors import ConfigError, NumericalGuardError

    try:
        if args.command == "selftest":
            return run_selftest(args.only, args.coarse_N)
        cfg = build_config(args)
        if args.command == "classify":
            print(dumps_json(run_classify(cfg)), end="")
        elif args.command == "scatter":
            print(run_scatter(cfg, args.tol, args.dump_psi))
        elif args.command == "evolve":
            traj, _, _ = run_evolve(cfg)
            print(f"{traj.steps} steps, mass drift {traj.mass_drift():.3e}, written to {cfg.output}")
        elif args.command == "asymptotics":
            d = run_asymptotics(cfg)
            print(f"profile.json written to {cfg.output}; modulus defect {d['modulus_defect']:.3e}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalGuardError as exc:
        print(f"numerical guard: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
