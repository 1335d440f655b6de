"""
Command-line driver.

Usage::

    jcdimer <verb> [--config run.ini] [--out DIR] [--jobs N] [--seed S]

Verbs: fixed-points, phase-diagram, bifurcation, evolve, quench,
phase-space, thermal-compare.  The INI file has a ``[model]`` section
(``omega``, ``omega0``, ``g``, ``u``, ``m``) and one section per verb; keys
not given take the defaults listed in :data:`OPTIONS`.  Every output file
carries the fully resolved configuration and the library version in its
metadata line, and contains nothing time- or host-dependent, so equal
configurations give byte-identical files.

Exit codes: 0 success, 2 configuration error, 3 solver or propagation
error, 4 some scan cells unresolved.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import semiclassical as sc
from .core import BRANCH_SIGNS, BranchLabel, ModelParams
from .errors import DomainError, JCDimerError
from .experiments import Perturbation, prepare_initial, run_classical, run_quantum, run_quench
from .io import write_table, write_timeseries
from .observables import thermal_reference
from .phasespace import (default_grid, husimi, husimi_angular_average, make_cat_state,
                         make_incoherent_mixture, wigner)
from .quantum import DensityMatrix, coherent_amplitudes
from .scans import bifurcation_scan, decode_mask, phase_diagram

__all__ = ["main", "RunConfig", "ConfigError", "load_config", "OPTIONS", "COMMANDS"]

log = logging.getLogger("jcdimer")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_PARTIAL = 0, 2, 3, 4

MODEL_KEYS = {"omega": ("omega", float, 2.0), "omega0": ("omega0", float, 2.0),
              "g": ("g_scaled", float, 1.0), "u": ("u_scaled", float, 0.0),
              "m": ("excitations", int, 30)}

_GRID = {"grid_extent": (float, 1.6), "grid_points": (int, 201)}
_QUENCH = {"branch": (str, "FP-pi"), "u_initial": (float, 0.5), "u_final": (float, 6.5),
           "t_final": (float, 200.0), "dt": (float, 0.5), "n_max": (int, 0),
           "snapshot_times": (list, "0,50,100,150,200"), "transient": (float, 50.0),
           "recenter": (bool, False), **_GRID}

OPTIONS = {
    "fixed-points": {"xi1": (int, 1), "xi2": (int, 1), "y_samples": (int, 400),
                     "seeding": (str, "exact")},
    "phase-diagram": {"class": (str, "ferro"), "g_min": (float, 0.25), "g_max": (float, 6.0),
                      "g_points": (int, 40), "u_min": (float, 0.0), "u_max": (float, 6.0),
                      "u_points": (int, 40), "g_min_cutoff": (float, 0.25)},
    "bifurcation": {"xi1": (int, -1), "xi2": (int, 1), "control": (str, "U"),
                    "start": (float, 0.5), "stop": (float, 6.0), "steps": (int, 56),
                    "mirror": (bool, False)},
    "evolve": {"variant": (str, "both"), "branch": (str, "FP-F"),
               "perturbation": (str, "gaussian"), "scale": (float, 1e-2),
               "t_final": (float, 20.0), "dt": (float, 0.05), "n_max": (int, 0),
               "snapshot_times": (list, ""), "phase": (bool, True), "recenter": (bool, False),
               "wigner": (bool, False), **_GRID},
    "quench": dict(_QUENCH),
    "phase-space": {"state": (str, "cat"), "alpha_re": (float, math.sqrt(10.0)),
                    "alpha_im": (float, 0.0), "nbar": (float, 1.0), "n_max": (int, 63),
                    "function": (str, "both"), **_GRID},
    "thermal-compare": dict(_QUENCH),
}
COMMANDS = tuple(OPTIONS)


class ConfigError(JCDimerError, ValueError):
    """Invalid run configuration."""


@dataclass
class RunConfig:
    """Fully resolved configuration of one run."""

    command: str
    params: ModelParams
    options: dict = field(default_factory=dict)
    out: Path = Path(".")
    seed: int = 0
    jobs: int = 1

    def as_dict(self) -> dict:
        p = self.params
        return {"command": self.command, "seed": self.seed,
                "model": {"omega": p.omega, "omega0": p.omega0, "g": p.g_scaled,
                          "u": p.u_scaled, "m": p.excitations},
                "options": dict(self.options)}


def _parse(kind, text: str, key: str):
    try:
        if kind is bool:
            low = text.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if kind is list:
            return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
        return kind(text.strip())
    except ValueError as exc:
        raise ConfigError(f"cannot parse {key} = {text!r}") from exc


def load_config(command: str, path: str | None, out: str, seed: int, jobs: int) -> RunConfig:
    """Read an INI file (optional) and merge it with the defaults of ``command``."""
    parser = configparser.ConfigParser(interpolation=None)
    if path is not None:
        if not Path(path).is_file():
            raise ConfigError(f"config file {path} not found")
        try:
            parser.read(path, encoding="utf-8")
        except configparser.Error as exc:
            raise ConfigError(str(exc)) from exc
    model = {}
    if parser.has_section("model"):
        for key, text in parser.items("model"):
            if key not in MODEL_KEYS:
                raise ConfigError(f"unknown key {key!r} in [model]")
            name, kind, _ = MODEL_KEYS[key]
            model[name] = _parse(kind, text, key)
    values = {name: default for name, _, default in MODEL_KEYS.values()}
    values.update(model)
    try:
        params = ModelParams(**values)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    schema = OPTIONS[command]
    options = {key: (_parse(kind, default, key) if isinstance(default, str) and kind is list
                     else default) for key, (kind, default) in schema.items()}
    if parser.has_section(command):
        for key, text in parser.items(command):
            if key not in schema:
                raise ConfigError(f"unknown key {key!r} in [{command}]")
            options[key] = _parse(schema[key][0], text, key)
    _validate(command, options)
    out_dir = Path(out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out_dir}: {exc}") from exc
    if jobs < 1:
        raise ConfigError("--jobs must be at least 1")
    return RunConfig(command, params, options, out_dir, seed, jobs)


def _validate(command: str, opt: dict):
    for key in ("t_final", "dt", "scale", "grid_extent"):
        if key in opt and not opt[key] > 0 and not (key == "scale" and opt[key] == 0):
            raise ConfigError(f"{key} must be positive")
    for key in ("xi1", "xi2"):
        if key in opt and opt[key] not in (1, -1):
            raise ConfigError(f"{key} must be +1 or -1")
    if "branch" in opt:
        try:
            opt["branch"] = BranchLabel.from_name(opt["branch"]).name
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc
    choices = {"seeding": ("exact", "small_eta"), "class": ("ferro", "antiferro"),
               "control": ("g", "U"), "variant": ("classical", "quantum", "both"),
               "perturbation": ("none", "gaussian", "imbalance"),
               "state": ("cat", "mixture", "coherent", "thermal"),
               "function": ("husimi", "wigner", "both")}
    for key, allowed in choices.items():
        if key in opt and opt[key] not in allowed:
            raise ConfigError(f"{key} must be one of {allowed}")
    if command == "bifurcation" and opt["steps"] < 2:
        raise ConfigError("steps must be at least 2")
    if "transient" in opt:
        if not 0 <= opt["transient"] < opt["t_final"]:
            raise ConfigError("transient must lie in [0, t_final)")
        if command == "thermal-compare" and not any(
                opt["transient"] <= t <= opt["t_final"] for t in opt["snapshot_times"]):
            raise ConfigError("thermal-compare needs a snapshot time after the transient")
    if command == "phase-diagram" and min(opt["g_points"], opt["u_points"]) < 8:
        raise ConfigError("phase diagrams need at least 8 points per axis")


def _meta(cfg: RunConfig, **extra) -> dict:
    out = {"version": __version__, "config": cfg.as_dict()}
    out.update(extra)
    return out


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

FP_COLUMNS = ["name", "xi1", "xi2", "f", "n_L", "n_R", "z_L", "z_R", "mu", "energy",
              "Z_p", "Z_a", "stable", "omega0_min", "residual"]


def _fp_row(fp):
    return [fp.branch.name, fp.branch.xi1, fp.branch.xi2, fp.f, fp.n_star[0], fp.n_star[1],
            fp.z_star[0], fp.z_star[1], fp.mu_star, fp.energy, fp.photon_imbalance,
            fp.atomic_imbalance, fp.stable, fp.omega0_min, fp.residual]


def cmd_fixed_points(cfg: RunConfig) -> int:
    opt, p = cfg.options, cfg.params
    label = BranchLabel.symmetric(opt["xi1"], opt["xi2"])
    f = np.geomspace(1e-4, 1.0, opt["y_samples"])
    write_table(cfg.out / "y_function.tsv", ["f", "Y_small_eta", "Y_exact"],
                zip(f, sc.y_function(f, p, label), sc.y_exact(f, p, label)),
                _meta(cfg, content="steady-state function samples"))
    finder = sc.find_roots_exact if opt["seeding"] == "exact" else sc.find_roots_y
    roots = finder(p, label)
    write_table(cfg.out / "roots.tsv", ["f"], [[r] for r in roots],
                _meta(cfg, content="roots of the steady-state function"))
    errors: list = []
    fps = sc.steady_states(p, opt["xi1"], opt["xi2"], errors=errors, seeding=opt["seeding"])
    for exc in errors:
        log.warning("root solve failed: %s", exc)
    write_table(cfg.out / "fixed_points.tsv", FP_COLUMNS, [_fp_row(fp) for fp in fps],
                _meta(cfg, content="exact steady states with stability"))
    eig_rows = []
    for k, fp in enumerate(fps):
        for w in fp.eigenfrequencies:
            eig_rows.append([k, fp.branch.name, complex(w).real, complex(w).imag])
    write_table(cfg.out / "eigenfrequencies.tsv", ["index", "name", "re", "im"], eig_rows,
                _meta(cfg, content="linear stability frequencies lambda / i"))
    log.info("%d roots, %d steady states", len(roots), len(fps))
    if roots and not fps:
        return EXIT_SOLVER
    return EXIT_OK


def cmd_phase_diagram(cfg: RunConfig) -> int:
    opt = cfg.options
    g = np.linspace(opt["g_min"], opt["g_max"], opt["g_points"])
    u = np.linspace(opt["u_min"], opt["u_max"], opt["u_points"])
    pd = phase_diagram(cfg.params, g, u, opt["class"], opt["g_min_cutoff"], jobs=cfg.jobs)
    rows = [(gg, uu, mask, "+".join(decode_mask(mask)) or "-", exc, unres)
            for gg, uu, mask, exc, unres in pd.rows()]
    write_table(cfg.out / f"phase_diagram_{opt['class']}.tsv",
                ["g", "U", "mask", "regions", "excluded", "unresolved"], rows,
                _meta(cfg, content="stable steady states per cell (bitmask)"))
    n_bad = int(pd.unresolved.sum())
    log.info("%d cells, %d unresolved", pd.masks.size, n_bad)
    return EXIT_PARTIAL if n_bad else EXIT_OK


def cmd_bifurcation(cfg: RunConfig) -> int:
    opt = cfg.options
    values = np.linspace(opt["start"], opt["stop"], opt["steps"])
    branches = bifurcation_scan(cfg.params, opt["xi1"], opt["xi2"], opt["control"], values,
                                mirror=opt["mirror"], jobs=cfg.jobs)
    rows = []
    for k, br in enumerate(branches):
        for c, f, zp, stable in br.rows():
            rows.append([k, br.label.name, int(br.mirrored), c, f, zp, stable,
                         int(br.terminated)])
    write_table(cfg.out / "bifurcation.tsv",
                ["branch", "name", "mirrored", opt["control"], "f", "Z_p", "stable",
                 "terminated"], rows, _meta(cfg, content="steady-state branches"))
    log.info("%d branches", len(branches))
    return EXIT_OK


def _write_grid(path, grid, cfg, time_value, extra=None):
    meta = _meta(cfg, content=grid.kind, time=time_value, excitations=grid.excitations,
                 x_range=[grid.x[0], grid.x[-1], grid.x.size],
                 p_range=[grid.p[0], grid.p[-1], grid.p.size])
    meta.update(extra or {})
    write_table(path, ["x", "p", grid.kind], grid.rows(), meta)


def _snapshots(cfg, snaps, prefix, with_wigner=False):
    grid = default_grid(cfg.params.excitations, cfg.options["grid_extent"],
                        cfg.options["grid_points"])
    out = {}
    for t, rho in sorted(snaps.items()):
        q = husimi(rho, grid)
        _write_grid(cfg.out / f"{prefix}_husimi_t{t:g}.tsv", q, cfg, t)
        if with_wigner:
            _write_grid(cfg.out / f"{prefix}_wigner_t{t:g}.tsv", wigner(rho, grid), cfg, t)
        out[t] = q
    return out


def cmd_evolve(cfg: RunConfig) -> int:
    opt, p = cfg.options, cfg.params
    pert = Perturbation(opt["perturbation"], opt["scale"], cfg.seed)
    fp, state0 = prepare_initial(p, opt["branch"], pert)
    info = {"initial_state": state0.to_array(), "fixed_point_f": fp.f,
            "fixed_point_stable": fp.stable, "omega0_min": fp.omega0_min}
    if opt["variant"] in ("classical", "both"):
        series = run_classical(p, state0, opt["t_final"], opt["dt"])
        write_timeseries(cfg.out / "classical.tsv", series, _meta(cfg, **info))
    if opt["variant"] in ("quantum", "both"):
        series, snaps = run_quantum(p, state0, opt["t_final"], opt["dt"],
                                    n_max=opt["n_max"] or None,
                                    snapshot_times=opt["snapshot_times"],
                                    phase=opt["phase"], recenter=opt["recenter"])
        write_timeseries(cfg.out / "quantum.tsv", series, _meta(cfg, **info))
        _snapshots(cfg, snaps, "photon_L", opt["wigner"])
    return EXIT_OK


def _quench_run(cfg: RunConfig):
    opt = cfg.options
    return run_quench(cfg.params, opt["u_initial"], opt["u_final"], opt["t_final"], opt["dt"],
                      n_max=opt["n_max"] or None, branch=opt["branch"],
                      snapshot_times=opt["snapshot_times"], recenter=opt["recenter"])


def _ring_radius(cfg: RunConfig) -> float:
    post = sc.find_fixed_point(cfg.params.with_(u_scaled=cfg.options["u_final"]),
                               cfg.options["branch"])
    return math.sqrt(2.0 * post.n_star[0])


def cmd_quench(cfg: RunConfig) -> int:
    opt = cfg.options
    series, snaps, fp = _quench_run(cfg)
    window = series.window(opt["transient"])
    nbar = float(np.mean(window["n_L"]))
    th = thermal_reference(nbar)
    summary = [
        ["mean_n_L", nbar],
        ["photon_entropy_mean", float(np.mean(window["S_ph_L"]))],
        ["photon_entropy_final", float(series["S_ph_L"][-1])],
        ["thermal_entropy", th.entropy],
        ["phase_fluctuation_mean", float(np.mean(window["dpsi2_L"]))],
        ["phase_fluctuation_max", float(np.max(series["dpsi2_L"]))],
        ["pe_ke_relative_mean", float(np.mean(np.abs(window["PE_L"] - window["KE_L"])
                                              / (window["PE_L"] + window["KE_L"])))],
        ["number_variance_ratio_mean", float(np.mean(window["nvar_ratio_L"]))],
        ["ring_radius", _ring_radius(cfg)],
    ]
    write_timeseries(cfg.out / "quench.tsv", series, _meta(cfg, pre_quench_f=fp.f))
    write_table(cfg.out / "quench_summary.tsv", ["quantity", "value"], summary,
                _meta(cfg, content="post-transient averages"))
    _snapshots(cfg, snaps, "photon_L")
    return EXIT_OK


def cmd_thermal_compare(cfg: RunConfig) -> int:
    opt = cfg.options
    series, snaps, _ = _quench_run(cfg)
    window = series.window(opt["transient"])
    nbar = float(np.mean(window["n_L"]))
    th = thermal_reference(nbar)
    grid = default_grid(cfg.params.excitations, opt["grid_extent"], opt["grid_points"])
    late = [rho for t, rho in sorted(snaps.items()) if t >= opt["transient"]]
    if not late:
        raise ConfigError("no snapshot time lies after the transient")
    rho_avg = DensityMatrix(sum(r.matrix for r in late) / len(late), "photon-L")
    radii, qbar = husimi_angular_average(husimi(rho_avg, grid))
    qbar_th = th.husimi_radial(radii, cfg.params.excitations)
    write_table(cfg.out / "radial_profiles.tsv", ["r", "Qbar", "Qbar_thermal"],
                zip(radii, qbar, qbar_th),
                _meta(cfg, nbar=nbar, snapshots_used=len(late),
                      content="angle-integrated Husimi of the time-averaged photon state"))
    peaks = [radii[i] for i in range(1, radii.size - 1)
             if qbar[i] > qbar[i - 1] and qbar[i] >= qbar[i + 1]]
    summary = [["nbar", nbar], ["thermal_entropy", th.entropy],
               ["photon_entropy_mean", float(np.mean(window["S_ph_L"]))],
               ["ring_radius", _ring_radius(cfg)],
               ["profile_peaks", ",".join("%.6g" % r for r in peaks) or "-"]]
    write_table(cfg.out / "thermal_summary.tsv", ["quantity", "value"], summary,
                _meta(cfg, content="comparison with the matched thermal photon state"))
    return EXIT_OK


def cmd_phase_space(cfg: RunConfig) -> int:
    opt = cfg.options
    alpha = complex(opt["alpha_re"], opt["alpha_im"])
    n_max = opt["n_max"]
    if opt["state"] == "cat":
        rho = make_cat_state(alpha, n_max).density()
    elif opt["state"] == "mixture":
        rho = make_incoherent_mixture(alpha, n_max)
    elif opt["state"] == "coherent":
        v = coherent_amplitudes(alpha, n_max)
        rho = DensityMatrix(np.outer(v, v.conj()), "photon")
    else:
        th = thermal_reference(opt["nbar"], n_max)
        rho = th.density_matrix
    grid = default_grid(cfg.params.excitations, opt["grid_extent"], opt["grid_points"])
    extra = {"state": opt["state"], "alpha": [alpha.real, alpha.imag]}
    if opt["function"] in ("husimi", "both"):
        _write_grid(cfg.out / f"{opt['state']}_husimi.tsv", husimi(rho, grid), cfg, 0.0, extra)
    if opt["function"] in ("wigner", "both"):
        w = wigner(rho, grid)
        extra.update(w_min=float(w.values.min()), w_max=float(w.values.max()))
        _write_grid(cfg.out / f"{opt['state']}_wigner.tsv", w, cfg, 0.0, extra)
    return EXIT_OK


HANDLERS = {"fixed-points": cmd_fixed_points, "phase-diagram": cmd_phase_diagram,
            "bifurcation": cmd_bifurcation, "evolve": cmd_evolve, "quench": cmd_quench,
            "phase-space": cmd_phase_space, "thermal-compare": cmd_thermal_compare}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jcdimer", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"jcdimer {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", default=None, help="INI run configuration")
        cmd.add_argument("--out", default=".", help="output directory")
        cmd.add_argument("--jobs", type=int, default=1, help="worker processes for scans")
        cmd.add_argument("--seed", type=int, default=0, help="seed for perturbations")
        cmd.add_argument("--log-level", default="INFO")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.INFO),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args.command, args.config, args.out, args.seed, args.jobs)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    log.info("running %s into %s", cfg.command, cfg.out)
    try:
        return HANDLERS[cfg.command](cfg)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except JCDimerError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
