"""Scenario-driven command line: parse a JSON config, run, write artifacts.

Every run writes its data files atomically plus a `manifest.json` holding
the fully resolved configuration, derived constants and SHA-256 digests of
the outputs, so a run can be replayed byte-identically.  SI conversions
happen only here; the physics modules speak recoil units.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .analysis import fit_beat, fit_piecewise
from .errors import ConfigError, PhysicsError
from .lattice import (LatticeParams, band_structure, bloch_phase,
                      derive_params, dispersion, hubbard_J, hubbard_U)
from .master_equation import (SiteRegister, compute_couplings, evolve_master,
                              observables_master, visibility)
from .rates import (DriveParams, TimedDickeSpec, gamma_collective,
                    gamma_single, retardation)
from .single_excitation import (KGrid, Localized, TimedDicke, build_model,
                                directional_populations, evolve,
                                excited_fraction, momentum_distribution,
                                position_distribution, sweep_emission_map)
from .spectral import evolve_spectral, find_poles

MODES = ("rates", "evolve", "sweep", "master", "spectrum", "fit", "render")


# --------------------------------------------------------------------------
# config schema
# --------------------------------------------------------------------------

_LATTICE_DEFAULTS = {"s_z": 8.0, "s_perp": 50.0, "lambda_z": None,
                     "lambda_perp": None, "mass": None, "omega_z_si": None}
_DRIVE_DEFAULTS = {"omega_over_omega_r": 1.0, "delta_over_omega_r": 4.0,
                   "phi": 0.0, "pulse_ms": 0.2}
_MODEL_DEFAULTS = {"sites": 3, "initial": "timed_dicke", "q": 0.0, "site": 0,
                   "k_cutoff_over_kr": None, "box_length_sites": None}
_OUTPUT_DEFAULTS = {"precision": 12, "figures": True}

_SCHEMA = {
    "rates": {"lattice": _LATTICE_DEFAULTS, "drive": _DRIVE_DEFAULTS,
              "model": _MODEL_DEFAULTS, "output": _OUTPUT_DEFAULTS},
    "evolve": {"lattice": _LATTICE_DEFAULTS, "drive": _DRIVE_DEFAULTS,
               "model": _MODEL_DEFAULTS, "output": _OUTPUT_DEFAULTS,
               "evolve": {"method": "single_excitation", "t_max_ms": 0.5,
                          "n_t": 201}},
    "sweep": {"lattice": _LATTICE_DEFAULTS, "drive": _DRIVE_DEFAULTS,
              "model": _MODEL_DEFAULTS, "output": _OUTPUT_DEFAULTS,
              "sweep": {"delta_min": 0.5, "delta_max": 6.5, "n_delta": 13,
                        "n_phi": 9, "t_pulse_ms": 0.2}},
    "master": {"lattice": _LATTICE_DEFAULTS, "drive": _DRIVE_DEFAULTS,
               "output": _OUTPUT_DEFAULTS,
               "master": {"register": ["pi/2", "pi/2", "empty"],
                          "t_max_ms": 0.5, "n_t": 101, "delta_g": 0.0,
                          "include_self_shift": True}},
    "spectrum": {"lattice": _LATTICE_DEFAULTS, "drive": _DRIVE_DEFAULTS,
                 "output": _OUTPUT_DEFAULTS,
                 "spectrum": {"search": None, "tol": 1e-10}},
    "fit": {"output": _OUTPUT_DEFAULTS,
            "lattice": _LATTICE_DEFAULTS, "drive": _DRIVE_DEFAULTS,
            "fit": {"kind": "piecewise", "input": None, "time_column": "t_ms",
                    "value_column": "p_excited", "window_ms": None,
                    "form": "dissipative_vs_bound", "gamma": None}},
    "render": {"output": _OUTPUT_DEFAULTS,
               "render": {"input": None, "style": "sweep",
                          "v_g": None, "sites": 3}},
}


def load_config(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}")
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    return cfg


def resolve_config(cfg, mode):
    """Validate against the per-mode schema and materialize all defaults."""
    if mode not in _SCHEMA:
        raise ConfigError(f"unknown mode {mode!r}")
    schema = _SCHEMA[mode]
    resolved = {"schema_version": 1, "mode": mode}
    version = cfg.get("schema_version", 1)
    if version != 1:
        raise ConfigError(f"unsupported schema_version {version}")
    declared = cfg.get("mode")
    if declared is not None and declared != mode:
        raise ConfigError(
            f"config declares mode {declared!r} but the subcommand is {mode!r}")
    for key in cfg:
        if key in ("schema_version", "mode"):
            continue
        if key not in schema:
            raise ConfigError(f"unknown config key {key!r} for mode {mode!r}")
    for block, defaults in schema.items():
        given = cfg.get(block, {})
        if not isinstance(given, dict):
            raise ConfigError(f"config block {block!r} must be an object")
        for key in given:
            if key not in defaults:
                raise ConfigError(f"unknown config key {block}.{key}")
        resolved[block] = {k: given.get(k, v) for k, v in defaults.items()}
    return resolved


def _build_params(cfg) -> LatticeParams:
    lat = cfg["lattice"]
    overrides = {k: lat[k] for k in
                 ("lambda_z", "lambda_perp", "mass", "omega_z_si")
                 if lat[k] is not None}
    return derive_params(lat["s_z"], lat["s_perp"], **overrides)


def _build_drive(cfg, params) -> DriveParams:
    d = cfg["drive"]
    return DriveParams(omega_rabi=d["omega_over_omega_r"],
                       delta=d["delta_over_omega_r"],
                       phase_lag=d["phi"],
                       pulse_duration=params.si.time_internal(d["pulse_ms"] * 1e-3))


def _build_grid(cfg) -> KGrid | None:
    m = cfg["model"]
    kw = {}
    if m["box_length_sites"] is not None:
        kw["box_sites"] = float(m["box_length_sites"])
    if m["k_cutoff_over_kr"] is not None:
        kw["cutoff"] = float(m["k_cutoff_over_kr"])
    return KGrid(**kw) if kw else None


# --------------------------------------------------------------------------
# deterministic artifact writing
# --------------------------------------------------------------------------

def _fmt(x, precision):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return f"{float(x):.{precision - 1}e}"


def _atomic_write(path, data):
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".",
                               prefix=".tmp-")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, header, rows, precision=12):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(x, precision) for x in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir, resolved, derived, files):
    manifest = {
        "tool": "mwqed",
        "version": __version__,
        "config": resolved,
        "derived_constants": derived,
        "outputs": {os.path.basename(f): _sha256(f) for f in sorted(files)},
    }
    _atomic_write(os.path.join(out_dir, "manifest.json"),
                  json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _derived_constants(params, drive):
    out = {"omega_r_hz": params.si.omega_r / (2 * math.pi),
           "d_m": params.si.d, "a_ho_over_kr_inv": params.a_ho}
    if drive.delta > 0:
        g1 = gamma_single(params, drive)
        disp = dispersion(drive.delta)
        out.update({
            "gamma_1_omega_r": g1,
            "gamma_1_khz": params.si.rate_hz(g1) / 1e3,
            "k_resonant_kr": disp.k_resonant,
            "k_tilde_kr": disp.k_tilde,
            "v_g_omega_r_over_kr": disp.v_g,
            "d_over_v_g_us": params.si.time_s(math.pi / disp.v_g) * 1e6,
            "eta": retardation(params, drive),
        })
    return out


def _maybe_figure(cfg, args):
    if args.no_figures or not cfg["output"]["figures"]:
        return None
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
        return plt
    except Exception as exc:  # renderer optional; degrade to data-only
        print(f"warning: figure rendering unavailable ({exc})", file=sys.stderr)
        return None


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_rates(cfg, out_dir, args):
    params = _build_params(cfg)
    drive = _build_drive(cfg, params)
    prec = cfg["output"]["precision"]
    derived = _derived_constants(params, drive)
    band = band_structure(cfg["lattice"]["s_z"])
    j_t = hubbard_J(band)
    u = hubbard_U(params)
    tau_b = bloch_phase(0.0, params).tau_B
    g1 = derived.get("gamma_1_omega_r")
    rows = [
        ("J_omega_r", j_t), ("J_khz", params.si.rate_hz(j_t) / 1e3),
        ("U_omega_r", u), ("U_over_J", u / j_t),
        ("tau_B_ms", tau_b * 1e3),
    ]
    if g1 is not None:
        tds = TimedDickeSpec(M=cfg["model"]["sites"], q=drive.q)
        gcoll = gamma_collective(params, drive, tds)
        rows += [
            ("gamma_1_omega_r", g1),
            ("gamma_1_khz", derived["gamma_1_khz"]),
            ("gamma_collective_omega_r", gcoll),
            ("eta", derived["eta"]),
            ("k_resonant_kr", derived["k_resonant_kr"]),
            ("v_g_omega_r_over_kr", derived["v_g_omega_r_over_kr"]),
            ("d_over_v_g_us", derived["d_over_v_g_us"]),
        ]
        print(f"Gamma_1 = 2pi x {derived['gamma_1_khz']:.3f} kHz "
              f"({g1:.6f} omega_r)")
        print(f"eta = d Gamma_1 / v_g = {derived['eta']:.4f}")
        print(f"d / v_g = {derived['d_over_v_g_us']:.2f} us")
    print(f"U / J = {u / j_t:.3f}   (J = 2pi x {params.si.rate_hz(j_t):.1f} Hz)")
    print(f"tau_B = {tau_b * 1e3:.4f} ms")
    path = os.path.join(out_dir, "rates.csv")
    write_csv(path, ["quantity", "value"], rows, prec)
    return derived, [path]


def cmd_evolve(cfg, out_dir, args):
    params = _build_params(cfg)
    drive = _build_drive(cfg, params)
    prec = cfg["output"]["precision"]
    ev = cfg["evolve"]
    t_ms = np.linspace(0.0, ev["t_max_ms"], int(ev["n_t"]))
    t = params.si.time_internal(t_ms * 1e-3)
    files = []
    derived = _derived_constants(params, drive)

    if ev["method"] == "spectral":
        result = evolve_spectral(params, drive, t)
        pops = np.abs(result.amplitudes) ** 2  # (3, nt)
        header = ["t_ms", "p_excited"] + [f"p_site_{j:+d}" for j in (-1, 0, 1)]
        rows = [(t_ms[i], result.excited_fraction[i], pops[0, i], pops[1, i],
                 pops[2, i]) for i in range(len(t))]
        path = os.path.join(out_dir, "trajectory.csv")
        write_csv(path, header, rows, prec)
        files.append(path)
        return derived, files
    if ev["method"] != "single_excitation":
        raise ConfigError(f"unknown evolve.method {ev['method']!r}")

    model = build_model(params, drive, m_sites=cfg["model"]["sites"],
                        grid=_build_grid(cfg))
    init_name = cfg["model"]["initial"]
    if init_name == "timed_dicke":
        init = TimedDicke(q=cfg["model"]["q"])
    elif init_name == "localized":
        init = Localized(site=cfg["model"]["site"])
    else:
        raise ConfigError(f"unknown model.initial {init_name!r}")
    traj = evolve(model, init, t)
    p_exc = excited_fraction(traj)
    pops = directional_populations(traj)
    p_plus, p_minus = pops["P_plus"], pops["P_minus"]
    header = (["t_ms", "p_excited", "p_plus", "p_minus"]
              + [f"p_site_{j:+d}" for j in traj.sites])
    rows = []
    for i in range(len(t)):
        rows.append([t_ms[i], p_exc[i], p_plus[i], p_minus[i]]
                    + list(np.abs(traj.A[:, i]) ** 2))
    path = os.path.join(out_dir, "trajectory.csv")
    write_csv(path, header, rows, prec)
    files.append(path)

    final = traj.state(len(t) - 1)
    dist = momentum_distribution(final)
    path = os.path.join(out_dir, "momentum_final.csv")
    write_csv(path, ["k_over_kr", "n_k"], zip(dist["k"], dist["n_k"]), prec)
    files.append(path)

    plt = _maybe_figure(cfg, args)
    if plt is not None:
        z = None
        density = []
        for i in range(len(t)):
            pos = position_distribution(traj.state(i))
            z, density = pos["z"], density + [pos["n_z"]]
        density = np.array(density)
        fig, ax = plt.subplots(figsize=(6, 4))
        extent = [z[0] / math.pi, z[-1] / math.pi, t_ms[0], t_ms[-1]]
        ax.imshow(density, origin="lower", aspect="auto", extent=extent,
                  cmap="magma")
        if drive.delta > 0:
            vg = dispersion(drive.delta).v_g
            t_int = t
            for j in traj.sites:
                for sgn in (+1, -1):
                    ax.plot((j * math.pi + sgn * vg * t_int) / math.pi, t_ms,
                            "w--", lw=0.6)
        ax.set_xlim(extent[0], extent[1])
        ax.set_xlabel("z / d")
        ax.set_ylabel("t (ms)")
        path = os.path.join(out_dir, "spacetime.png")
        fig.savefig(path, dpi=160)
        plt.close(fig)
        files.append(path)
    return derived, files


def cmd_sweep(cfg, out_dir, args):
    params = _build_params(cfg)
    drive = _build_drive(cfg, params)
    prec = cfg["output"]["precision"]
    sw = cfg["sweep"]
    deltas = np.linspace(sw["delta_min"], sw["delta_max"], int(sw["n_delta"]))
    phis = 2 * math.pi * np.arange(1, int(sw["n_phi"]) + 1) / int(sw["n_phi"])
    t_pulse = params.si.time_internal(sw["t_pulse_ms"] * 1e-3)
    emap = sweep_emission_map(params, deltas, phis,
                              m_sites=cfg["model"]["sites"],
                              omega_rabi=cfg["drive"]["omega_over_omega_r"],
                              t_pulse=t_pulse, grid=_build_grid(cfg),
                              workers=args.threads)
    files = []
    rows = []
    for i, dlt in enumerate(emap.deltas):
        for j, phi in enumerate(emap.phis):
            for m, k in enumerate(emap.k):
                rows.append((dlt, phi, k, emap.n_k[i, j, m]))
    path = os.path.join(out_dir, "sweep_nk.csv")
    write_csv(path, ["delta_over_omega_r", "phi", "k_over_kr", "n_k"],
              rows, prec)
    files.append(path)
    rows = [(dlt, phi, emap.p_plus[i, j], emap.p_minus[i, j],
             emap.excited[i, j])
            for i, dlt in enumerate(emap.deltas)
            for j, phi in enumerate(emap.phis)]
    path = os.path.join(out_dir, "sweep_directional.csv")
    write_csv(path, ["delta_over_omega_r", "phi", "p_plus", "p_minus",
                     "p_excited"], rows, prec)
    files.append(path)

    plt = _maybe_figure(cfg, args)
    if plt is not None:
        files.append(_render_sweep(plt, emap.deltas, emap.phis, emap.k,
                                   emap.n_k, out_dir))
    return _derived_constants(params, drive), files


def _render_sweep(plt, deltas, phis, k, n_k, out_dir):
    """One panel per detuning, each normalized independently."""
    n = len(deltas)
    ncol = min(n, 5)
    nrow = (n + ncol - 1) // ncol
    fig, axes = plt.subplots(nrow, ncol, figsize=(2.2 * ncol, 2.0 * nrow),
                             squeeze=False, sharex=True, sharey=True)
    for i, dlt in enumerate(deltas):
        ax = axes[i // ncol][i % ncol]
        panel = n_k[i]
        top = panel.max()
        ax.imshow(panel / (top if top > 0 else 1.0), origin="lower",
                  aspect="auto", cmap="viridis", vmin=0.0, vmax=1.0,
                  extent=[k[0], k[-1], phis[0], phis[-1]])
        ax.set_title(f"$\\Delta = {dlt:g}$", fontsize=8)
    for i in range(n, nrow * ncol):
        axes[i // ncol][i % ncol].axis("off")
    fig.supxlabel("k / k_r")
    fig.supylabel("phase lag")
    path = os.path.join(out_dir, "sweep_map.png")
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)
    return path


_REGISTER_STATES = {"pi/2": (1 / math.sqrt(2), 1 / math.sqrt(2))}


def cmd_master(cfg, out_dir, args):
    params = _build_params(cfg)
    drive = _build_drive(cfg, params)
    prec = cfg["output"]["precision"]
    ms = cfg["master"]
    sites = tuple(_REGISTER_STATES.get(s, s) for s in ms["register"])
    register = SiteRegister(sites=sites)
    couplings = compute_couplings(params, drive,
                                  max_separation=register.n_sites - 1)
    t_ms = np.linspace(0.0, ms["t_max_ms"], int(ms["n_t"]))
    t = params.si.time_internal(t_ms * 1e-3)
    traj = evolve_master(register, couplings, t, delta_g=ms["delta_g"],
                         include_self_shift=ms["include_self_shift"])
    obs = observables_master(traj)
    vis = visibility(obs["q"], obs["n_g"])
    files = []
    header = ["t_ms", "N_r", "N_g", "c0", "c1", "c0_minus_c1"]
    rows = [(t_ms[i], obs["N_r"][i], obs["N_g"][i],
             np.atleast_1d(vis["c0"])[i], np.atleast_1d(vis["c1"])[i],
             np.atleast_1d(vis["c0_minus_c1"])[i]) for i in range(len(t))]
    path = os.path.join(out_dir, "master_populations.csv")
    write_csv(path, header, rows, prec)
    files.append(path)

    rows = [(t_ms[i], q, obs["n_g"][i, m], obs["n_r"][i, m])
            for i in range(len(t)) for m, q in enumerate(obs["q"])]
    path = os.path.join(out_dir, "master_nq.csv")
    write_csv(path, ["t_ms", "q_over_kr", "n_g", "n_r"], rows, prec)
    files.append(path)

    plt = _maybe_figure(cfg, args)
    if plt is not None:
        fig, ax = plt.subplots(figsize=(5, 4))
        ax.imshow(obs["n_g"], origin="lower", aspect="auto", cmap="inferno",
                  extent=[obs["q"][0], obs["q"][-1], t_ms[0], t_ms[-1]])
        ax.set_xlabel("q / k_r")
        ax.set_ylabel("t (ms)")
        path = os.path.join(out_dir, "master_nq.png")
        fig.savefig(path, dpi=160)
        plt.close(fig)
        files.append(path)
    return _derived_constants(params, drive), files


def cmd_spectrum(cfg, out_dir, args):
    params = _build_params(cfg)
    drive = _build_drive(cfg, params)
    prec = cfg["output"]["precision"]
    sp = cfg["spectrum"]
    kwargs = {"tol": sp["tol"]}
    if sp["search"] is not None:
        kwargs["search"] = tuple(sp["search"])
    modes = find_poles(params, drive, **kwargs)
    rows = []
    for m in modes:
        rate_khz = params.si.rate_hz(2 * abs(m.omega_p.imag)) / 1e3
        rows.append((m.mode_class, m.omega_p.real, m.omega_p.imag,
                     m.zeta.real, m.zeta.imag, m.weight, rate_khz,
                     m.amplitudes[0].real, m.amplitudes[0].imag,
                     m.amplitudes[1].real, m.amplitudes[1].imag))
        print(f"{m.mode_class:>5s}: omega_p = {m.omega_p.real:+.4f}"
              f"{m.omega_p.imag:+.4f}i omega_r   weight {m.weight:.4f}")
    path = os.path.join(out_dir, "poles.csv")
    write_csv(path, ["class", "re_omega", "im_omega", "re_zeta", "im_zeta",
                     "weight", "decay_khz", "re_a_edge", "im_a_edge",
                     "re_a_center", "im_a_center"], rows, prec)
    return _derived_constants(params, drive), [path]


def cmd_fit(cfg, out_dir, args):
    params = _build_params(cfg)
    ft = cfg["fit"]
    if not ft["input"]:
        raise ConfigError("fit.input (CSV path) is required")
    try:
        table = np.genfromtxt(ft["input"], delimiter=",", names=True)
    except OSError:
        raise ConfigError(f"fit input not found: {ft['input']}")
    for col in (ft["time_column"], ft["value_column"]):
        if col not in (table.dtype.names or ()):
            raise ConfigError(f"column {col!r} not in {ft['input']}")
    t_ms = np.asarray(table[ft["time_column"]], dtype=float)
    y = np.asarray(table[ft["value_column"]], dtype=float)
    t = params.si.time_internal(t_ms * 1e-3)
    to_khz = params.si.omega_r / (2 * math.pi) / 1e3

    if ft["kind"] == "piecewise":
        window = None
        if ft["window_ms"] is not None:
            window = tuple(params.si.time_internal(w * 1e-3)
                           for w in ft["window_ms"])
        fit = fit_piecewise(t, y, window=window)
        report = {
            "kind": "piecewise",
            "gamma_early_omega_r": fit.gamma_early,
            "gamma_late_omega_r": fit.gamma_late,
            "ratio": fit.ratio,
            "t_c_ms": params.si.time_s(fit.t_c) * 1e3,
            "t_c_unconstrained": fit.t_c_unconstrained,
            "residual": fit.residual,
        }
        print(f"gamma_early = {fit.gamma_early:.5f} omega_r, "
              f"gamma_late = {fit.gamma_late:.5f} omega_r, "
              f"ratio = {fit.ratio:.3f}, t_c = {report['t_c_ms']:.4f} ms")
    elif ft["kind"] == "beat":
        fit = fit_beat(t, y, form=ft["form"], gamma=ft["gamma"])
        report = {
            "kind": "beat", "form": fit.form,
            "alpha0": fit.alpha0, "alpha_inf": fit.alpha_inf,
            "omega_omega_r": fit.omega, "omega_khz": fit.omega * to_khz,
            "gamma_omega_r": fit.gamma, "residual": fit.residual,
            "omega_unidentifiable": fit.omega_unidentifiable,
        }
        print(f"omega = {fit.omega:.5f} omega_r = 2pi x "
              f"{fit.omega * to_khz:.3f} kHz, |alpha0|^2 = {fit.alpha0**2:.3f}")
    else:
        raise ConfigError(f"unknown fit.kind {ft['kind']!r}")
    path = os.path.join(out_dir, "fit.json")
    _atomic_write(path, json.dumps(report, indent=2, sort_keys=True) + "\n")
    return {}, [path]


def cmd_render(cfg, out_dir, args):
    rd = cfg["render"]
    if not rd["input"]:
        raise ConfigError("render.input (CSV path) is required")
    plt = _maybe_figure(cfg, args)
    if plt is None:
        raise ConfigError("render requires figures enabled")
    try:
        table = np.genfromtxt(rd["input"], delimiter=",", names=True)
    except OSError:
        raise ConfigError(f"render input not found: {rd['input']}")
    files = []
    if rd["style"] == "sweep":
        needed = ("delta_over_omega_r", "phi", "k_over_kr", "n_k")
        if any(c not in (table.dtype.names or ()) for c in needed):
            raise ConfigError(f"sweep render needs columns {needed}")
        deltas = np.unique(table["delta_over_omega_r"])
        phis = np.unique(table["phi"])
        k = np.unique(table["k_over_kr"])
        if len(table) == 0 or len(deltas) * len(phis) * len(k) != len(table):
            print("warning: empty or ragged sweep grid, nothing to render",
                  file=sys.stderr)
            return {}, []
        n_k = table["n_k"].reshape(len(deltas), len(phis), len(k))
        files.append(_render_sweep(plt, deltas, phis, k, n_k, out_dir))
    else:
        raise ConfigError(f"unknown render.style {rd['style']!r}")
    return {}, files


_COMMANDS = {"rates": cmd_rates, "evolve": cmd_evolve, "sweep": cmd_sweep,
             "master": cmd_master, "spectrum": cmd_spectrum, "fit": cmd_fit,
             "render": cmd_render}


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="mwqed",
        description="Quantum emitter arrays radiating matter waves: "
                    "rates, dynamics, spectra and fits.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in MODES:
        p = sub.add_parser(name)
        p.add_argument("--config", required=False, default=None,
                       help="JSON scenario config (defaults apply if omitted)")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads for sweep cells")
        p.add_argument("--no-figures", action="store_true")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else {}
        resolved = resolve_config(cfg, args.command)
        os.makedirs(args.out, exist_ok=True)
        derived, files = _COMMANDS[args.command](resolved, args.out, args)
        write_manifest(args.out, resolved, derived, files)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except PhysicsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
