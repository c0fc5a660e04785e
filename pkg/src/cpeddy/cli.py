"""Configuration loading, figure-reproduction sweeps and CSV output.

All physics parameters live in a JSON config; the command line carries only
the command name, config path, output path and worker count.  Output tables
are deterministic byte-for-byte for a given config, independent of the
thread count.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import math
import sys
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .material import (ALPHA_FS, KB, DissipationModel, MaterialParams,
                       scales)
from .numerics import QuadSettings
from .response import AtomParams, mode_density, mode_density_dc
from .surface import reflection_on_cut
from .thermo import (MatsubaraSettings, entropy, free_energy,
                     free_energy_asym, residual_entropy)
from .eddy import (SingleMode, branch_point_local, branch_point_nonlocal,
                   branch_point_small_gamma, eddy_mode_density, lambda_e_bar,
                   single_mode_free_energy, single_mode_partition)

COMMANDS = ("scales", "free-energy", "entropy", "mode-density",
            "branch-point", "cut-reflection", "single-mode")


class ConfigError(ValueError):
    """Invalid or missing configuration entry; carries the field path."""


@dataclass(frozen=True)
class SweepRange:
    lo: float
    hi: float
    points: int
    spacing: str = "log"

    def __post_init__(self):
        if not (0.0 < self.lo < self.hi):
            raise ConfigError("sweep range must satisfy 0 < min < max")
        if self.points < 2:
            raise ConfigError("sweep needs at least 2 points")
        if self.spacing not in ("log", "linear"):
            raise ConfigError("spacing must be 'log' or 'linear'")

    def grid(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.lo, self.hi, self.points)
        return np.linspace(self.lo, self.hi, self.points)


@dataclass(frozen=True)
class RunConfig:
    material: MaterialParams
    atom: AtomParams
    z: float | SweepRange
    temperature: float | SweepRange
    quad: QuadSettings
    matsubara: MatsubaraSettings
    options: dict = field(default_factory=dict)
    output_path: Optional[str] = None
    normalization: str = "raw"
    raw: dict = field(default_factory=dict)


@dataclass
class SweepTable:
    column_names: list
    rows: list
    metadata: list


def _require(d, key, path):
    if key not in d:
        raise ConfigError(f"missing required key {path}.{key}")
    return d[key]


def _check_keys(d, allowed, path):
    for k in d:
        if k not in allowed:
            raise ConfigError(f"unknown key {path}.{k}")


def _parse_material(d) -> MaterialParams:
    _check_keys(d, {"preset", "omega_p_eV", "v_F_c", "response", "gamma"},
                "material")
    response = d.get("response", "local_drude")
    if "preset" in d:
        if d["preset"] != "gold":
            raise ConfigError("material.preset: only 'gold' is defined")
        omega_p = 9.0
        v_f = ALPHA_FS
        gamma = DissipationModel("constant", 0.03)
    else:
        omega_p = float(_require(d, "omega_p_eV", "material"))
        v_f = float(d.get("v_F_c", ALPHA_FS))
        gamma = DissipationModel("constant", 0.0)
    if "gamma" in d:
        g = d["gamma"]
        _check_keys(g, {"kind", "gamma_ref_eV", "exponent", "T_ref_K"},
                    "material.gamma")
        kind = _require(g, "kind", "material.gamma")
        if kind == "constant":
            gamma = DissipationModel("constant",
                                     float(_require(g, "gamma_ref_eV",
                                                    "material.gamma")))
        elif kind == "power_law":
            gamma = DissipationModel("power_law",
                                     float(_require(g, "gamma_ref_eV",
                                                    "material.gamma")),
                                     float(_require(g, "exponent",
                                                    "material.gamma")),
                                     float(_require(g, "T_ref_K",
                                                    "material.gamma")))
        else:
            raise ConfigError("material.gamma.kind must be constant|power_law")
    if response == "local_plasma":
        gamma = DissipationModel("constant", 0.0)
    try:
        return MaterialParams(omega_p, gamma, v_f, response)
    except ValueError as exc:
        raise ConfigError(f"material: {exc}") from exc


def _parse_atom(d) -> AtomParams:
    _check_keys(d, {"omega_a_eV", "mu_bohr", "orientation"}, "atom")
    omega_a = float(_require(d, "omega_a_eV", "atom"))
    mu = d.get("mu_bohr", 1.0)
    if isinstance(mu, (int, float)):
        mu = (float(mu), 0.0, 0.0)
    else:
        mu = tuple(float(m) for m in mu)
        if len(mu) != 3:
            raise ConfigError("atom.mu_bohr must be a number or 3-vector")
    try:
        return AtomParams(omega_a, mu, d.get("orientation", "parallel_xy"))
    except ValueError as exc:
        raise ConfigError(f"atom: {exc}") from exc


def _parse_axis(d, path, scalar_key, lo_key, hi_key):
    if scalar_key in d:
        v = float(d[scalar_key])
        if v <= 0.0:
            raise ConfigError(f"{path}.{scalar_key} must be > 0")
        return v
    lo = _require(d, lo_key, path)
    hi = _require(d, hi_key, path)
    try:
        return SweepRange(float(lo), float(hi), int(d.get("points", 2)),
                          d.get("spacing", "log"))
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def parse_config(doc: dict) -> RunConfig:
    _check_keys(doc, {"material", "atom", "geometry", "temperature", "quad",
                      "matsubara", "options", "output_path", "normalization"},
                "config")
    material = _parse_material(_require(doc, "material", "config"))
    atom = _parse_atom(_require(doc, "atom", "config"))
    geo = doc.get("geometry", {"z_um": 1.0})
    _check_keys(geo, {"z_um", "z_min_um", "z_max_um", "points", "spacing"},
                "geometry")
    z = _parse_axis(geo, "geometry", "z_um", "z_min_um", "z_max_um")
    temp = doc.get("temperature", {"T_K": atom.T_a})
    _check_keys(temp, {"T_K", "T_min_K", "T_max_K", "points", "spacing"},
                "temperature")
    t = _parse_axis(temp, "temperature", "T_K", "T_min_K", "T_max_K")
    q = doc.get("quad", {})
    _check_keys(q, {"rel_tol", "abs_tol", "max_subdivisions",
                    "tail_decay_scale"}, "quad")
    try:
        quad = QuadSettings(float(q.get("rel_tol", 1e-8)),
                            float(q.get("abs_tol", 0.0)),
                            int(q.get("max_subdivisions", 400)),
                            float(q.get("tail_decay_scale", 1.0)))
    except ValueError as exc:
        raise ConfigError(f"quad: {exc}") from exc
    m = doc.get("matsubara", {})
    _check_keys(m, {"n_max", "tail_tolerance", "temperature_step"},
                "matsubara")
    n_max = m.get("n_max", "auto")
    try:
        if n_max == "auto":
            ms = MatsubaraSettings("auto", 0,
                                   float(m.get("tail_tolerance", 1e-9)),
                                   float(m.get("temperature_step", 1e-2)))
        else:
            ms = MatsubaraSettings("fixed", int(n_max),
                                   float(m.get("tail_tolerance", 1e-9)),
                                   float(m.get("temperature_step", 1e-2)))
    except ValueError as exc:
        raise ConfigError(f"matsubara: {exc}") from exc
    norm = doc.get("normalization", "raw")
    if norm not in ("raw", "paper_figure"):
        raise ConfigError("normalization must be 'raw' or 'paper_figure'")
    options = doc.get("options", {})
    if not isinstance(options, dict):
        raise ConfigError("options must be an object")
    return RunConfig(material, atom, z, t, quad, ms, options,
                     doc.get("output_path"), norm, doc)


def load_config(path: str) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return parse_config(doc)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _variant(mat: MaterialParams, response: str) -> MaterialParams:
    gm = mat.gamma_model
    if response == "local_plasma":
        gm = DissipationModel("constant", 0.0)
    return MaterialParams(mat.omega_p, gm, mat.v_F, response)


def _metadata(cfg: RunConfig, extra=()):
    sc = scales(cfg.material, cfg.atom,
                cfg.z if isinstance(cfg.z, float) else cfg.z.lo,
                cfg.temperature if isinstance(cfg.temperature, float)
                else cfg.temperature.lo)
    md = [f"version: {__version__}",
          "config: " + json.dumps(cfg.raw, sort_keys=True),
          f"lambda_p_bar_um: {sc.lambda_p_bar!r}",
          f"lambda_TF_um: {sc.lambda_TF!r}",
          f"T_a_K: {sc.T_a!r}", f"T_c_K: {sc.T_c!r}",
          f"nu_nl_eV: {sc.nu_nl!r}"]
    for name, val in (("D_eV_um2", sc.D), ("delta_a_um", sc.delta_a),
                      ("ell_um", sc.ell), ("lambda_e_bar_um", sc.lambda_e_bar),
                      ("nu_lc_eV", sc.nu_lc)):
        md.append(f"{name}: {val!r}" if val is not None else f"{name}: absent")
    md.extend(extra)
    return md


def _parallel_rows(worker, items, threads):
    if threads <= 1:
        return [worker(it) for it in items]
    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(worker, items))


def run_command(cmd: str, cfg: RunConfig, threads: int = 1) -> SweepTable:
    if cmd not in COMMANDS:
        raise ConfigError(f"unknown command {cmd!r}")
    fn = {
        "scales": _cmd_scales,
        "free-energy": _cmd_free_energy,
        "entropy": _cmd_entropy,
        "mode-density": _cmd_mode_density,
        "branch-point": _cmd_branch_point,
        "cut-reflection": _cmd_cut_reflection,
        "single-mode": _cmd_single_mode,
    }[cmd]
    return fn(cfg, threads)


def _cmd_scales(cfg: RunConfig, threads: int) -> SweepTable:
    z = cfg.z if isinstance(cfg.z, float) else cfg.z.lo
    T = cfg.temperature if isinstance(cfg.temperature, float) \
        else cfg.temperature.lo
    sc = scales(cfg.material, cfg.atom, z, T)
    cols = ["z_um", "lambda_p_bar_um", "D_eV_um2", "delta_a_um", "ell_um",
            "lambda_TF_um", "lambda_e_bar_um", "nu_lc_eV", "nu_nl_eV",
            "T_a_K", "T_c_K", "converged"]
    row = [z, sc.lambda_p_bar,
           sc.D if sc.D is not None else math.nan,
           sc.delta_a if sc.delta_a is not None else math.nan,
           sc.ell if sc.ell is not None else math.nan,
           sc.lambda_TF,
           sc.lambda_e_bar if sc.lambda_e_bar is not None else math.nan,
           sc.nu_lc if sc.nu_lc is not None else math.nan,
           sc.nu_nl, sc.T_a, sc.T_c, 1.0]
    return SweepTable(cols, [row], _metadata(cfg))


def _z_grid(cfg: RunConfig) -> np.ndarray:
    if isinstance(cfg.z, float):
        raise ConfigError("this command needs a geometry sweep (z_min/z_max)")
    return cfg.z.grid()

def _t_grid(cfg: RunConfig) -> np.ndarray:
    if isinstance(cfg.temperature, float):
        raise ConfigError("this command needs a temperature sweep")
    return cfg.temperature.grid()


def _cmd_free_energy(cfg: RunConfig, threads: int) -> SweepTable:
    zg = _z_grid(cfg)
    T = cfg.temperature if isinstance(cfg.temperature, float) \
        else cfg.temperature.lo
    local = _variant(cfg.material, "local_drude") \
        if cfg.material.response != "local_plasma" else cfg.material
    scib = _variant(cfg.material, "scib")

    def worker(z):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            fl = free_energy(local, cfg.atom, z, T, cfg.matsubara, cfg.quad)
            fs = free_energy(scib, cfg.atom, z, T, cfg.matsubara, cfg.quad)
            fla = free_energy_asym(local, cfg.atom, z, T, "local_short",
                                   cfg.quad)
            fsa = free_energy_asym(scib, cfg.atom, z, T, "nonlocal_short",
                                   cfg.quad)
        return [z, fl.value, fs.value, fla, fsa,
                1.0 if (fl.converged and fs.converged) else 0.0]

    rows = _parallel_rows(worker, list(zg), threads)
    cols = ["z_um", "F_local_eV", "F_scib_eV", "F_local_asym_eV",
            "F_scib_asym_eV", "converged"]
    if cfg.normalization == "paper_figure":
        zref = 100.0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            fref = free_energy(local, cfg.atom, zref, T, cfg.matsubara,
                               cfg.quad).value * zref ** 3
        rows = [[r[0]] + [v * r[0] ** 3 / fref for v in r[1:5]] + [r[5]]
                for r in rows]
        cols = ["z_um", "Fz3_local_norm", "Fz3_scib_norm",
                "Fz3_local_asym_norm", "Fz3_scib_asym_norm", "converged"]
    return SweepTable(cols, rows, _metadata(cfg, (f"T_K: {T!r}",)))


def _cmd_entropy(cfg: RunConfig, threads: int) -> SweepTable:
    tg = _t_grid(cfg)
    z = cfg.z if isinstance(cfg.z, float) else cfg.z.lo
    gm = cfg.material.gamma_model
    g_const = DissipationModel("constant", gm.gamma_ref)
    if gm.kind == "power_law":
        g_power = gm
    else:
        sc = scales(cfg.material, cfg.atom, z, tg[0])
        g_power = DissipationModel("power_law", gm.gamma_ref, 5.0, sc.T_c)
    mats = {
        "S_local_constG": MaterialParams(cfg.material.omega_p, g_const,
                                         cfg.material.v_F, "local_drude"),
        "S_local_powerG": MaterialParams(cfg.material.omega_p, g_power,
                                         cfg.material.v_F, "local_drude"),
        "S_scib_constG": MaterialParams(cfg.material.omega_p, g_const,
                                        cfg.material.v_F, "scib"),
        "S_scib_powerG": MaterialParams(cfg.material.omega_p, g_power,
                                        cfg.material.v_F, "scib"),
    }
    s0 = residual_entropy(cfg.material, cfg.atom, z)

    def worker(T):
        out = [T]
        ok = True
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            for mat in mats.values():
                r = entropy(mat, cfg.atom, z, T, cfg.matsubara, cfg.quad)
                out.append(r.value)
                ok = ok and r.converged
        out.append(s0)
        out.append(1.0 if ok else 0.0)
        return out

    rows = _parallel_rows(worker, list(tg), threads)
    cols = ["T_K"] + list(mats) + ["S0_reference", "converged"]
    if cfg.normalization == "paper_figure":
        rows = [[r[0]] + [v / s0 for v in r[1:5]] + [r[5], r[6]] for r in rows]
        cols = ["T_K"] + [c + "_over_S0" for c in mats] + \
            ["S0_reference", "converged"]
    return SweepTable(cols, rows, _metadata(cfg, (f"z_um: {z!r}",)))


def _cmd_mode_density(cfg: RunConfig, threads: int) -> SweepTable:
    opts = dict(cfg.options)
    _check_keys(opts, {"omega_min_eV", "omega_max_eV", "points"}, "options")
    z = cfg.z if isinstance(cfg.z, float) else cfg.z.lo
    T = cfg.temperature if isinstance(cfg.temperature, float) \
        else cfg.temperature.lo
    local = _variant(cfg.material, "local_drude")
    scib = _variant(cfg.material, "scib")
    sc = scales(local, cfg.atom, z, T)
    lo = float(opts.get("omega_min_eV", 1e-3 * (sc.nu_lc or cfg.atom.omega_a)))
    hi = float(opts.get("omega_max_eV", 10.0 * cfg.atom.omega_a))
    n = int(opts.get("points", 16))
    grid = np.geomspace(lo, hi, n)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        dc_local = mode_density_dc(local, cfg.atom, z, T)
        dc_scib = mode_density_dc(scib, cfg.atom, z, T)

    def worker(w):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            rl = mode_density(local, cfg.atom, z, w, T, cfg.quad)
            rsb = mode_density(scib, cfg.atom, z, w, T, cfg.quad)
            et = eddy_mode_density(local, cfg.atom, z, w, T, cfg.quad)
        ok = rl.converged and rsb.converged and et.converged
        return [w, rl.value, rsb.value, et.value, dc_local, dc_scib,
                1.0 if ok else 0.0]

    rows = _parallel_rows(worker, list(grid), threads)
    cols = ["omega_eV", "rho_local", "rho_scib", "eta_local",
            "rho_dc_local", "rho_dc_scib", "converged"]
    if cfg.normalization == "paper_figure":
        rows = [[r[0]] + [v / dc_local for v in r[1:6]] + [r[6]]
                for r in rows]
        cols = ["omega_eV", "rho_local_norm", "rho_scib_norm",
                "eta_local_norm", "rho_dc_local_norm", "rho_dc_scib_norm",
                "converged"]
    return SweepTable(cols, rows, _metadata(cfg, (f"z_um: {z!r}",)))


def _cmd_branch_point(cfg: RunConfig, threads: int) -> SweepTable:
    opts = dict(cfg.options)
    _check_keys(opts, {"p_min_per_um", "p_max_per_um", "points"}, "options")
    T = cfg.temperature if isinstance(cfg.temperature, float) \
        else cfg.temperature.lo
    mat = cfg.material
    lam_e = lambda_e_bar(mat, T)
    p_lo = float(opts.get("p_min_per_um", 0.01 / mat.lambda_p_bar))
    p_hi = min(float(opts.get("p_max_per_um", 1.0 / lam_e)), 1.0 / lam_e)
    n = int(opts.get("points", 32))
    grid = np.geomspace(p_lo, p_hi, n)
    grid[-1] = 1.0 / lam_e

    def worker(p):
        xl = branch_point_local(mat, p, T).xi0
        xp = branch_point_nonlocal(mat, p, T).xi0
        xs = branch_point_small_gamma(mat, p).xi0
        return [p, xl, xp, xs, 1.0]

    rows = _parallel_rows(worker, list(grid), threads)
    return SweepTable(["p_per_um", "xi0_local_eV", "xi0_param_eV",
                       "xi0_smallGamma_eV", "converged"],
                      rows, _metadata(cfg))


def _cmd_cut_reflection(cfg: RunConfig, threads: int) -> SweepTable:
    opts = dict(cfg.options)
    _check_keys(opts, {"p_per_um", "xi_over_gamma_min", "xi_over_gamma_max",
                       "points"}, "options")
    T = cfg.temperature if isinstance(cfg.temperature, float) \
        else cfg.temperature.lo
    p = float(opts.get("p_per_um", 1.0))
    hg = cfg.material.gamma(T)
    if hg <= 0.0:
        raise ConfigError("cut-reflection requires Gamma > 0")
    lo = float(opts.get("xi_over_gamma_min", 1e-3))
    hi = float(opts.get("xi_over_gamma_max", 1.0))
    n = int(opts.get("points", 24))
    grid = np.geomspace(lo, hi, n)
    local = _variant(cfg.material, "local_drude")
    scib = _variant(cfg.material, "scib")

    def worker(x):
        rl = reflection_on_cut(local, x * hg, p, settings=cfg.quad, T=T)
        rsb = reflection_on_cut(scib, x * hg, p, settings=cfg.quad, T=T)
        ok = rl.converged and rsb.converged
        return [x, rl.value.imag, rsb.value.imag, 1.0 if ok else 0.0]

    rows = _parallel_rows(worker, list(grid), threads)
    return SweepTable(["xi_over_Gamma", "Im_rTE_local", "Im_rTE_scib",
                       "converged"], rows, _metadata(cfg))


def _cmd_single_mode(cfg: RunConfig, threads: int) -> SweepTable:
    opts = dict(cfg.options)
    _check_keys(opts, {"xi_eV", "Lambda_eV", "gamma_eV"}, "options")
    tg = _t_grid(cfg)
    xi = float(opts.get("xi_eV", 1e-6))
    lam = float(opts.get("Lambda_eV", 1e6 * xi))
    gam = float(opts.get("gamma_eV", 4.0 * xi))
    mode = SingleMode(xi, lam)

    def worker(T):
        e0, df = single_mode_free_energy(mode, T, cfg.quad)
        h = 1e-2 * T
        _, dfp = single_mode_free_energy(mode, T + h, cfg.quad)
        _, dfm = single_mode_free_energy(mode, T - h, cfg.quad)
        s = -(dfp - dfm) / (2.0 * h)
        z = single_mode_partition(mode, T, True, gam, cfg.quad)
        return [T, df, s, z, 1.0]

    rows = _parallel_rows(worker, list(tg), threads)
    return SweepTable(["T_K", "dF_eV", "S_eVperK", "Z_rescaled", "converged"],
                      rows, _metadata(cfg, (f"Lambda_eV: {lam!r}",
                                            f"xi_eV: {xi!r}")))


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def write_table(table: SweepTable, path: str) -> None:
    """CSV with '#' metadata lines, 17-significant-digit values."""
    lines = [f"# {m}" for m in table.metadata]
    lines.append(",".join(table.column_names))
    for row in table.rows:
        lines.append(",".join("%.17g" % v for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="cpeddy",
        description="Magnetic Casimir-Polder sweeps for local and nonlocal "
                    "metals; emits deterministic CSV tables.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="JSON config path")
    ap.add_argument("--out", default=None, help="output CSV (default from config)")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args(argv)

    try:
        cfg = load_config(args.config)
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            table = run_command(args.command, cfg, max(1, args.threads))
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
            table.metadata.append(f"warning: {w.message}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    out = args.out or cfg.output_path
    if out is None:
        print("no output path given (use --out or output_path)", file=sys.stderr)
        return 1
    if not table.rows:
        print("warning: empty table", file=sys.stderr)
    try:
        write_table(table, out)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    idx = table.column_names.index("converged")
    if any(row[idx] != 1.0 for row in table.rows):
        print("warning: some rows did not converge", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
