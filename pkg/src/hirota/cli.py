"""Command-line driver: ``hirota {verify, wedge-scan, kernel-check, dynamics, mps-export}``.

Settings come from built-in defaults, then an optional config file
(``key = value`` lines or a JSON object, same names as the long flags with
dashes or underscores), then the command line. Exit codes: 0 success,
1 a check failed, 2 invalid configuration, 3 memory cap exceeded.
"""
from __future__ import annotations

import argparse
import configparser
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import dynamics as dyn
from . import mps
from . import quasilocality as ql
from . import records
from .checks import run_suite
from .transfer import transfer, trivial_charges
from .weyl import ChainGeometry, RootOfUnity, Tolerances, clock_shift, hs_inner

__all__ = ["RunConfig", "ConfigError", "load_config_file", "build_parser", "main"]

log = logging.getLogger("hirota")

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_MEMORY = 0, 1, 2, 3


class ConfigError(ValueError):
    """Invalid configuration; the message names the field (and line for key=value files)."""


@dataclass
class RunConfig:
    ell: int = 2
    m: int = 3
    kappa_re: float = 2.0
    kappa_im: float = 0.0
    n_half: int = 2
    lambdas: list = field(default_factory=lambda: [0.5 + 0j])
    r_list: list = field(default_factory=lambda: [1.5])
    phi_count: int = 72
    n_list: list = field(default_factory=lambda: [2, 3])
    steps: int = 10
    r_max: int = 4
    out: str | None = None
    format: str = "csv"
    eps_local: float = 1e-12
    eps_chain: float = 1e-9
    mem_cap_bytes: int = 1 << 30
    workers: int = 1
    seed: int = 7

    @property
    def kappa(self) -> complex:
        return complex(self.kappa_re, self.kappa_im)

    @property
    def root(self) -> RootOfUnity:
        return RootOfUnity(self.ell, self.m)

    @property
    def tolerances(self) -> Tolerances:
        return Tolerances(self.eps_local, self.eps_chain)

    def validate(self):
        try:
            self.root
        except ValueError as exc:
            raise ConfigError(f"field ell/m: {exc}") from None
        if self.n_half < 1:
            raise ConfigError(f"field n_half: must be positive, got {self.n_half}")
        if self.kappa == 0:
            raise ConfigError("field kappa: must be nonzero")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"field format: expected csv or json, got {self.format!r}")
        if self.workers < 1:
            raise ConfigError("field workers: must be at least 1")
        if self.eps_local <= 0 or self.eps_chain <= 0:
            raise ConfigError("field eps_local/eps_chain: must be positive")
        if any(n < 1 for n in self.n_list) or list(self.n_list) != sorted(self.n_list):
            raise ConfigError(f"field n_list: must be positive and ascending, got {self.n_list}")
        if self.phi_count < 1:
            raise ConfigError("field phi_count: must be at least 1")
        return self

    def as_dict(self) -> dict:
        d = asdict(self)
        d["lambdas"] = [[z.real, z.imag] for z in self.lambdas]
        return d


def _parse_complex(text: str) -> complex:
    return complex(str(text).replace(" ", "").replace("i", "j"))


def _parse_list(text, conv):
    if isinstance(text, (list, tuple)):
        return [conv(x) if not isinstance(x, list) else complex(*x) for x in text]
    return [conv(x) for x in str(text).split(",") if x.strip()]


_CONVERTERS = {
    "ell": int, "m": int, "kappa_re": float, "kappa_im": float, "n_half": int,
    "lambdas": lambda v: _parse_list(v, _parse_complex),
    "r_list": lambda v: _parse_list(v, float),
    "phi_count": int,
    "n_list": lambda v: _parse_list(v, int),
    "steps": int, "r_max": int, "out": str, "format": str,
    "eps_local": float, "eps_chain": float, "mem_cap_bytes": int, "workers": int, "seed": int,
}


def _normalize_key(key: str) -> str:
    key = key.strip().lower().replace("-", "_")
    return "lambdas" if key == "lambda" else key


def load_config_file(path: str) -> dict:
    """Read a ``key = value`` file (optional ``[run]`` section) or a JSON object."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if path.endswith(".json") or text.lstrip().startswith("{"):
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from None
        lines = {}
    else:
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        body = text if text.lstrip().startswith("[") else "[run]\n" + text
        offset = 0 if text.lstrip().startswith("[") else 1
        try:
            parser.read_string(body, source=path)
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from None
        raw = {}
        for section in parser.sections():
            raw.update(parser[section])
        lines = {}
        for n, line in enumerate(body.splitlines(), start=1 - offset):
            if "=" in line:
                lines[line.split("=", 1)[0].strip()] = n
    out = {}
    for key, value in raw.items():
        name = _normalize_key(key)
        where = f"{path}: line {lines[key]}" if key in lines else path
        if name not in _CONVERTERS:
            raise ConfigError(f"{where}: unknown field {key!r}")
        try:
            out[name] = _CONVERTERS[name](value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{where}: field {key!r}: {exc}") from None
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="config file (key = value lines or JSON)")
    common.add_argument("--ell", type=int)
    common.add_argument("--m", type=int)
    common.add_argument("--kappa-re", type=float)
    common.add_argument("--kappa-im", type=float)
    common.add_argument("--n-half", type=int, help="number of two-site cells N")
    common.add_argument("--lambda", dest="lambdas", help="comma-separated spectral parameters, e.g. 0.5,0.4+0.1j")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--eps-local", type=float)
    common.add_argument("--eps-chain", type=float)
    common.add_argument("--mem-cap-bytes", type=int, help="largest dense chain operator allowed, in bytes")
    common.add_argument("--workers", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="hirota", description="Checks and data tables for quasilocal charges of the quantum Hirota model.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="run the invariant suite")
    ws = sub.add_parser("wedge-scan", parents=[common], help="leading-eigenvalue map on a polar grid")
    ws.add_argument("--r-list", help="comma-separated radii")
    ws.add_argument("--phi-count", type=int, help="number of angles in [0, 2 pi)")
    kc = sub.add_parser("kernel-check", parents=[common], help="brute-force norms against N K(lambda, lambda)")
    kc.add_argument("--n-list", help="comma-separated N values, ascending")
    dy = sub.add_parser("dynamics", parents=[common], help="evolve the dynamical variables")
    dy.add_argument("--steps", type=int)
    me = sub.add_parser("mps-export", parents=[common], help="matrix product coefficient table as JSON")
    me.add_argument("--r-max", type=int)
    return p


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if getattr(args, "config", None):
        values.update(load_config_file(args.config))
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            try:
                values[f.name] = _CONVERTERS[f.name](v) if isinstance(v, str) and f.name != "out" else v
            except ValueError as exc:
                raise ConfigError(f"flag --{f.name.replace('_', '-')}: {exc}") from None
    return RunConfig(**values).validate()


def _emit(cfg: RunConfig, table: str, rows: list[dict], extra: dict | None = None):
    if cfg.format == "json":
        text = records.to_json(table, cfg.as_dict(), rows, extra)
    else:
        text = records.to_csv(table, rows)
    records.write_output(text, cfg.out)


def cmd_verify(cfg: RunConfig) -> int:
    geom = ChainGeometry(cfg.n_half, cfg.m)
    geom.check_memory(cfg.mem_cap_bytes)
    results = run_suite(cfg.root, cfg.kappa, geom, cfg.tolerances, cfg.lambdas[0], cfg.seed)
    _emit(cfg, "verify", [r.row() for r in results])
    failed = [r.check for r in results if not r.passed]
    for name in failed:
        log.error("check failed: %s", name)
    return EXIT_CHECK if failed else EXIT_OK


def _scan_row(rec: ql.ScanRecord, root: RootOfUnity) -> dict:
    row = {"r": rec.r, "phi": rec.phi, "error": rec.error}
    evs = [abs(z) for z in rec.eigenvalues] + [math.nan] * (6 - len(rec.eigenvalues))
    for i, v in enumerate(evs[:6]):
        row[f"abs_ev{i + 1}"] = float(v)
    row["abs_tau"] = abs(rec.tau) if rec.eigenvalues else math.nan
    row["leading"] = rec.leading if rec.leading is not None else ""
    row["observable"] = rec.observable if rec.observable is not None else math.nan
    z = rec.lam
    row["predicted"] = ql.wedge_predicate(z, root) if z != 0 else False
    return row


def cmd_wedge_scan(cfg: RunConfig) -> int:
    root = cfg.root
    phis = [2 * math.pi * k / cfg.phi_count for k in range(cfg.phi_count)]
    recs = ql.wedge_scan(root, cfg.kappa, cfg.r_list, phis, workers=cfg.workers)
    _emit(cfg, "wedge-scan", [_scan_row(r, root) for r in recs],
          {"half_angle": ql.wedge_half_angle(root)} if cfg.format == "json" else None)
    return EXIT_OK


def _kernel_rows(args):
    lam, cfg_dict = args
    cfg = RunConfig(**cfg_dict)
    root = cfg.root
    kern = ql.hs_kernel(lam, lam, cfg.kappa, root.q).real
    try:
        kern_aux = ql.hs_kernel_from_aux(lam, lam, cfg.kappa, root).real
    except np.linalg.LinAlgError:
        kern_aux = math.nan
    inside = ql.wedge_predicate(lam, root)
    rows = []
    for n in cfg.n_list:
        geom = ChainGeometry(n, cfg.m)
        x = ql.build_charge(lam, cfg.kappa, root, geom, cfg.mem_cap_bytes)
        norm2 = hs_inner(x, x).real
        del x
        aux_val = ql.finite_chain_overlap(lam, lam, cfg.kappa, root, n).real
        rows.append({"lambda_re": lam.real, "lambda_im": lam.imag, "n_half": n, "norm2": norm2,
                     "norm2_aux": aux_val, "n_kernel": n * kern, "abs_diff": abs(norm2 - n * kern),
                     "kernel_aux": kern_aux, "in_wedge": inside})
    return rows


def cmd_kernel_check(cfg: RunConfig) -> int:
    for n in cfg.n_list:
        ChainGeometry(n, cfg.m).check_memory(cfg.mem_cap_bytes)
    cfg_dict = asdict(cfg)
    tasks = [(complex(lam), cfg_dict) for lam in cfg.lambdas]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            chunks = list(pool.map(_kernel_rows, tasks))
    else:
        chunks = [_kernel_rows(t) for t in tasks]
    _emit(cfg, "kernel-check", [row for chunk in chunks for row in chunk])
    return EXIT_OK


def cmd_dynamics(cfg: RunConfig) -> int:
    if cfg.kappa.imag != 0:
        raise ConfigError("field kappa_im: unitary evolution needs real kappa")
    geom = ChainGeometry(cfg.n_half, cfg.m)
    geom.check_memory(cfg.mem_cap_bytes)
    root, pair = cfg.root, clock_shift(cfg.root)
    prop = dyn.build_propagator(geom, pair, cfg.kappa.real)
    u = prop.full
    unitarity = float(np.linalg.norm(u.conj().T @ u - np.eye(geom.dim_total)))
    rng = np.random.default_rng(cfg.seed)
    samples = [transfer(complex(*rng.normal(size=2)), cfg.kappa, geom, pair) for _ in range(2)]
    t_res = max(float(np.linalg.norm(np.linalg.solve(u, t @ u) - t)) for t in samples)
    ws = dyn.all_w(geom, pair)
    ie0, io0 = trivial_charges(geom, pair)
    closed, conj = ws, ws
    rows = []
    worst = 0.0
    for step in range(cfg.steps + 1):
        if step:
            closed = dyn.step_closed_form(closed, cfg.kappa.real, root)
            conj = [dyn.step_conjugate(w, prop) for w in conj]
        ie = np.linalg.multi_dot(closed[1::2]) if len(closed) > 2 else closed[1]
        io = np.linalg.multi_dot(closed[0::2]) if len(closed) > 2 else closed[0]
        row = {"step": step,
               "closed_vs_conj": max(float(np.linalg.norm(a - b)) for a, b in zip(closed, conj)),
               "i_even": float(np.linalg.norm(ie - ie0)), "i_odd": float(np.linalg.norm(io - io0)),
               "transfer": t_res, "unitarity": unitarity}
        worst = max(worst, row["closed_vs_conj"], row["i_even"], row["i_odd"], t_res)
        rows.append(row)
    _emit(cfg, "dynamics", rows)
    return EXIT_OK if worst <= cfg.eps_chain * 10 and unitarity <= cfg.eps_local * geom.dim_total else EXIT_CHECK


def cmd_mps_export(cfg: RunConfig) -> int:
    lam = complex(cfg.lambdas[0])
    root = cfg.root
    if not ql.wedge_predicate(lam, root):
        raise ConfigError(f"field lambda: {lam} lies outside the wedge")
    table = mps.coefficient_table(lam, cfg.kappa, root, cfg.r_max)
    profile = mps.decay_profile(lam, cfg.kappa, root, max(cfg.r_max, 8))
    extra = {
        "config": cfg.as_dict(),
        "decay_profile": [[r, w] for r, w in profile],
        "decay_rate": mps.fit_decay_rate(profile),
        "kernel": ql.hs_kernel(lam, lam, cfg.kappa, root.q).real,
    }
    geom = ChainGeometry(cfg.n_half, cfg.m)
    if cfg.r_max <= cfg.n_half and geom.matrix_bytes() <= cfg.mem_cap_bytes:
        x = ql.build_charge(lam, cfg.kappa, root, geom, cfg.mem_cap_bytes)
        x -= np.trace(x) / geom.dim_total * np.eye(geom.dim_total)
        assembled = mps.assemble_truncated(table, geom)
        extra["oracle"] = {"n_half": cfg.n_half,
                           "relative_deviation": float(np.linalg.norm(assembled - x) / np.linalg.norm(x))}
    records.write_output(mps.table_to_json(table, extra) + "\n", cfg.out)
    return EXIT_OK


COMMANDS = {
    "verify": cmd_verify,
    "wedge-scan": cmd_wedge_scan,
    "kernel-check": cmd_kernel_check,
    "dynamics": cmd_dynamics,
    "mps-export": cmd_mps_export,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"hirota: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MemoryError as exc:
        print(f"hirota: refused: {exc}", file=sys.stderr)
        return EXIT_MEMORY


if __name__ == "__main__":
    sys.exit(main())
