"""Scenario orchestration: plain-text config, named experiments, CSV/JSON out.

Config grammar is line oriented, ``section.key = value`` with ``#`` comments;
unknown keys are hard errors.  ``diracflux --print-defaults`` lists every key
with its default.  Scenario assertions are evaluated here and the process
exits 0 only if all of them pass.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

SCENARIOS = ("free-fas", "potential-fas", "cones-scaling", "statphase-bench",
             "continuity-suite")

DEFAULTS = {
    "run.scenario": "free-fas",
    "run.threads": "1",
    "run.out_dir": ".",
    "packet.k0": "2 0 0",
    "packet.sigma": "0.5",
    "packet.m": "1.0",
    "packet.spin_mix": "1 0 0 0",       # re1 im1 re2 im2
    "grid.n": "48",
    "grid.half_width_sigmas": "6",
    "cone.axis": "1 0 0",
    "cone.half_angle": "0.3",
    "detector.r_list": "30 60 120",
    "detector.n_theta": "16",
    "detector.n_phi": "8",
    "detector.k_min": "auto",
    "detector.full_sphere": "true",
    "cones.lambda_list": "25 50 100 200",
    "cones.k": "2 0 0",
    "statphase.a": "0",
    "statphase.y": "0.6 0 0",
    "statphase.mu_list": "25 50 100 200",
    "statphase.chi_center": "0.75 0 0",
    "statphase.chi_sigma": "0.35",
    "statphase.cut_radius": "1.6",
    "statphase.cut_width": "0.45",
    "statphase.y_nostat": "1.5 0 0",
    "statphase.mu_list_nostat": "20 40 80 160",
    "continuity.n_points": "50",
    "continuity.h": "1e-3",
    "continuity.seed": "7",
    "potential.coupling": "0.05",
    "potential.width": "1.0",
    "bank.n_r": "10",
    "bank.n_u": "6",
    "bank.n_phi": "8",
    "bank.lmax": "4",
    "bank.box_n": "32",
    "bank.box_half": "4.65",
    "bank.k_lo": "0.05",
    "bank.k_hi": "4.2",
    "bank.tol": "1e-6",
    "bank.cache": "true",
    "tol.sub_identity": "1e-6",
    "tol.fas_cone_rel": "0.05",
    "tol.fas_potential_rel": "0.10",
    "tol.fullsphere_lo": "0.97",
    "tol.fullsphere_hi": "1.01",
    "tol.spacelike_frac": "0.01",
    "tol.cones_err_slope": "-1.7",
    "tol.leading_slope_tol": "0.02",
    "tol.statphase_slope_lo": "-2.6",
    "tol.statphase_slope_hi": "-1.7",
    "tol.continuity_ratio_lo": "3.5",
    "tol.continuity_ratio_hi": "4.5",
}


@dataclass
class ScenarioConfig:
    values: dict

    def get(self, key):
        return self.values[key]

    def floats(self, key):
        return [float(v) for v in self.values[key].split()]

    def vec3(self, key):
        v = self.floats(key)
        if len(v) != 3:
            raise ConfigError(f"{key} must have 3 components")
        return np.array(v)

    def num(self, key):
        return float(self.values[key])

    def int_(self, key):
        return int(self.values[key])

    def flag(self, key):
        return self.values[key].lower() in ("true", "1", "yes")


def parse_config(text) -> ScenarioConfig:
    """Parse the ``section.key = value`` grammar; unknown keys are errors."""
    values = dict(DEFAULTS)
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'section.key = value'", line=ln)
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in DEFAULTS:
            raise ConfigError(f"unknown key {key!r}", line=ln)
        if not val:
            raise ConfigError(f"empty value for {key!r}", line=ln)
        values[key] = val
    cfg = ScenarioConfig(values=values)
    _validate(cfg)
    return cfg


def _validate(cfg):
    if cfg.get("run.scenario") not in SCENARIOS:
        raise ConfigError(f"run.scenario must be one of {SCENARIOS}")
    if cfg.num("packet.sigma") <= 0:
        raise ConfigError("packet.sigma must be positive")
    if cfg.num("packet.m") <= 0:
        raise ConfigError("packet.m must be positive")
    if not 0.0 < cfg.num("cone.half_angle") <= np.pi:
        raise ConfigError("cone.half_angle must lie in (0, pi]")
    for key in ("detector.r_list", "cones.lambda_list", "statphase.mu_list",
                "statphase.mu_list_nostat"):
        vals = cfg.floats(key)
        if not vals or any(np.diff(vals) <= 0) or vals[0] <= 0:
            raise ConfigError(f"{key} must be positive and increasing")
    if cfg.int_("run.threads") < 1:
        raise ConfigError("run.threads must be >= 1")
    if cfg.num("statphase.a") < 0:
        raise ConfigError("statphase.a must be >= 0")


@dataclass
class RunReport:
    scenario: str
    assertions: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    files: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    def check(self, name, passed, measured, threshold):
        self.assertions.append({
            "name": name, "passed": bool(passed),
            "measured": measured, "threshold": threshold,
        })
        return bool(passed)

    @property
    def all_passed(self):
        return all(a["passed"] for a in self.assertions)

    def to_json(self):
        return {
            "scenario": self.scenario,
            "assertions": self.assertions,
            "timings": self.timings,
            "files": self.files,
            **({"results": self.extras} if self.extras else {}),
        }


def _packet(cfg):
    from .momentum import cartesian_grid, gaussian_packet

    k0 = cfg.vec3("packet.k0")
    sigma = cfg.num("packet.sigma")
    m = cfg.num("packet.m")
    mix = cfg.floats("packet.spin_mix")
    spin_mix = (mix[0] + 1j * mix[1], mix[2] + 1j * mix[3])
    half = cfg.num("grid.half_width_sigmas") * sigma
    grid = cartesian_grid(k0, half, cfg.int_("grid.n"))
    return gaussian_packet(grid, k0, sigma, m, spin_mix)


def _cone(cfg):
    from .momentum import ConeSpec

    return ConeSpec(axis=cfg.vec3("cone.axis"),
                    half_angle=cfg.num("cone.half_angle"))


def _k_min(cfg, amp):
    from .detector import default_k_min

    raw = cfg.get("detector.k_min")
    return default_k_min(amp) if raw == "auto" else float(raw)


def _fas_common(cfg, state, report, out_dir, label, rel_tol):
    from .detector import fas_sweep, write_fas_csv
    from .momentum import ConeSpec

    amp = state if not hasattr(state, "amplitude") else state.amplitude
    cone = _cone(cfg)
    r_list = cfg.floats("detector.r_list")
    t0 = time.time()
    rep = fas_sweep(state, cone, r_list, n_theta=cfg.int_("detector.n_theta"),
                    n_phi=cfg.int_("detector.n_phi"), k_min=_k_min(cfg, amp))
    report.timings[f"{label}_cone_sweep_s"] = round(time.time() - t0, 3)
    path = os.path.join(out_dir, "fas_convergence.csv")
    write_fas_csv(rep, path)
    report.files.append(path)

    disc = rep.column("abs_disc")
    pside = rep.column("momentum_side")[-1]
    report.check(f"{label}: abs_disc non-increasing over R",
                 bool(np.all(np.diff(disc) <= 1e-12)), disc.tolist(), "monotone")
    report.check(f"{label}: abs_disc(R_max)/momentum_side",
                 disc[-1] / pside < rel_tol, disc[-1] / pside, rel_tol)
    sub = rep.column("crossing_substituted")
    direct = rep.column("crossing_direct")
    sub_rel = float(np.max(np.abs(sub - direct) / np.abs(direct)))
    report.check(f"{label}: substitution identity (relative)",
                 sub_rel < cfg.num("tol.sub_identity"), sub_rel,
                 cfg.num("tol.sub_identity"))
    report.extras[f"{label}_cone"] = {
        "R": rep.column("R").tolist(),
        "crossing": direct.tolist(),
        "abs_disc": disc.tolist(),
        "momentum_side": float(pside),
        "warnings": rep.metadata["warnings"],
        "alignment": rep.metadata["alignment"],
    }
    return rep


def run_free_fas(cfg, report, out_dir):
    from .detector import fas_sweep, write_fas_csv
    from .momentum import ConeSpec

    amp = _packet(cfg)
    _fas_common(cfg, amp, report, out_dir, "free-fas",
                cfg.num("tol.fas_cone_rel"))

    if cfg.flag("detector.full_sphere"):
        t0 = time.time()
        full = ConeSpec(axis=cfg.vec3("cone.axis"), half_angle=np.pi)
        rep2 = fas_sweep(amp, full, cfg.floats("detector.r_list"),
                         n_phi=cfg.int_("detector.n_phi"),
                         k_min=_k_min(cfg, amp))
        report.timings["fullsphere_sweep_s"] = round(time.time() - t0, 3)
        path2 = os.path.join(out_dir, "fas_fullsphere.csv")
        write_fas_csv(rep2, path2)
        report.files.append(path2)
        cr = rep2.column("crossing_direct")
        lo, hi = cfg.num("tol.fullsphere_lo"), cfg.num("tol.fullsphere_hi")
        report.check("free-fas: full-sphere crossing in band",
                     bool(np.all((cr >= lo) & (cr <= hi))), cr.tolist(),
                     [lo, hi])
        frac = abs(rep2.rows[-1].spacelike_part) / abs(rep2.rows[-1].crossing_direct)
        report.check("free-fas: space-like part at R_max",
                     frac < cfg.num("tol.spacelike_frac"), frac,
                     cfg.num("tol.spacelike_frac"))


def run_potential_fas(cfg, report, out_dir):
    from .detector import sphere_quadrature
    from .lippmann import (ScatteringState, SpatialGrid, build_farfield_bank,
                           gaussian_potential, load_farfield_bank,
                           save_farfield_bank)

    amp = _packet(cfg)
    cone = _cone(cfg)
    pot = gaussian_potential(cfg.num("potential.coupling"),
                             cfg.num("potential.width"))
    surf = sphere_quadrature(cfg.floats("detector.r_list")[0], cone,
                             cfg.int_("detector.n_theta"),
                             cfg.int_("detector.n_phi"))
    bank_dir = os.path.join(out_dir, "eigen_bank")
    bank = None
    if cfg.flag("bank.cache") and os.path.exists(
            os.path.join(bank_dir, "bank_manifest.json")):
        try:
            bank = load_farfield_bank(bank_dir)
            if (bank.xdirs.shape != surf.normals.shape
                    or not np.allclose(bank.xdirs, surf.normals)):
                bank = None
        except Exception:
            bank = None
    if bank is None:
        t0 = time.time()
        bank = build_farfield_bank(
            pot, amp.m, surf.normals, k_lo=cfg.num("bank.k_lo"),
            k_hi=cfg.num("bank.k_hi"), n_r=cfg.int_("bank.n_r"),
            n_u=cfg.int_("bank.n_u"), n_phi=cfg.int_("bank.n_phi"),
            grid=SpatialGrid(L=cfg.num("bank.box_half"), n=cfg.int_("bank.box_n")),
            tol=cfg.num("bank.tol"), lmax=cfg.int_("bank.lmax"))
        report.timings["bank_build_s"] = round(time.time() - t0, 3)
        if cfg.flag("bank.cache"):
            save_farfield_bank(bank, bank_dir)
            report.files.append(os.path.join(bank_dir, "bank_manifest.json"))
    state = ScatteringState(amp, bank)
    _fas_common(cfg, state, report, out_dir, "potential-fas",
                cfg.num("tol.fas_potential_rel"))


def run_cones_scaling(cfg, report, out_dir):
    from .farfield import FarFieldEvaluator
    from .fitting import loglog_fit
    from .spinor import snorm
    from .statphase import cones_asymptotic

    amp = _packet(cfg)
    k = cfg.vec3("cones.k")
    lams = cfg.floats("cones.lambda_list")
    Ek = np.sqrt(float(k @ k) + amp.m ** 2)
    pts = np.array([lam * k for lam in lams])
    ev = FarFieldEvaluator(amp, pts, time_horizon=lams[-1] * Ek)
    rows = []
    for i, lam in enumerate(lams):
        psi = ev.psi_at_times([lam * Ek], point_sel=[i])[0, 0]
        lead = cones_asymptotic(amp, lam, k)
        rows.append((lam, float(snorm(psi - lead)), float(snorm(lead)),
                     float(snorm(psi))))
    path = os.path.join(out_dir, "cones_scaling.csv")
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("lambda,err_norm,leading_norm,wave_norm\n")
        for row in rows:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    report.files.append(path)
    err_slope, _ = loglog_fit(lams, [r[1] for r in rows])
    lead_slope, _ = loglog_fit(lams, [r[2] for r in rows])
    report.check("cones: error slope <= threshold",
                 err_slope <= cfg.num("tol.cones_err_slope"), err_slope,
                 cfg.num("tol.cones_err_slope"))
    tol = cfg.num("tol.leading_slope_tol")
    report.check("cones: leading-term slope = -1.5 +- tol",
                 abs(lead_slope + 1.5) <= tol, lead_slope, [-1.5 - tol, -1.5 + tol])
    report.extras["cones"] = {"err_slope": err_slope, "leading_slope": lead_slope}


def run_statphase_bench(cfg, report, out_dir):
    from .statphase import (GaussianBumpChi, PhaseParams, error_scaling,
                            k_stationary, phase_gradient, write_statphase_csv)

    m = cfg.num("packet.m")
    a = cfg.num("statphase.a")
    y = cfg.vec3("statphase.y")
    chi = GaussianBumpChi(center=cfg.vec3("statphase.chi_center"),
                          sigma=cfg.num("statphase.chi_sigma"),
                          cut_radius=cfg.num("statphase.cut_radius"),
                          cut_width=cfg.num("statphase.cut_width"))
    t0 = time.time()
    res = error_scaling(a, y, m, cfg.floats("statphase.mu_list"), chi)
    report.timings["statphase_sweep_s"] = round(time.time() - t0, 3)
    path = os.path.join(out_dir, "statphase.csv")
    write_statphase_csv(path, res["rows"])
    report.files.append(path)
    lo, hi = cfg.num("tol.statphase_slope_lo"), cfg.num("tol.statphase_slope_hi")
    report.check("statphase: remainder slope in band",
                 lo <= res["slope"] <= hi, res["slope"], [lo, hi])

    ks = k_stationary(PhaseParams(a=a, y=y, m=m, mu=cfg.floats("statphase.mu_list")[0]))
    grad = float(np.linalg.norm(phase_gradient(
        PhaseParams(a=a, y=y, m=m, mu=1.0), ks)))
    report.check("statphase: stationary-point gradient residual",
                 grad <= 1e-10, grad, 1e-10)

    res2 = error_scaling(a, cfg.vec3("statphase.y_nostat"), m,
                         cfg.floats("statphase.mu_list_nostat"), chi)
    report.check("statphase: no-stationary-point decay slope",
                 res2["slope"] <= hi, res2["slope"], hi)
    report.extras["statphase"] = {"slope": res["slope"],
                                  "slope_nostat": res2["slope"]}


def run_continuity_suite(cfg, report, out_dir):
    from .propagate import continuity_residual_signed

    amp = _packet(cfg)
    rng = np.random.default_rng(cfg.int_("continuity.seed"))
    h = cfg.num("continuity.h")
    n = cfg.int_("continuity.n_points")
    pts = rng.uniform(-3.0, 3.0, size=(n, 3))
    ts = rng.uniform(0.0, 3.0, size=n)
    res = {h: [], h / 2: []}
    minus_larger = 0
    for p, t in zip(pts, ts):
        for hh in (h, h / 2):
            plus, minus = continuity_residual_signed(amp, p, float(t), hh)
            res[hh].append(plus)
            if hh == h and minus > 10 * plus:
                minus_larger += 1
    r1 = max(res[h])
    r2 = max(res[h / 2])
    r1, r2 = float(r1), float(r2)
    ratio = r1 / r2
    lo, hi = cfg.num("tol.continuity_ratio_lo"), cfg.num("tol.continuity_ratio_hi")
    report.check("continuity: halving h divides residual by ~4",
                 lo <= ratio <= hi, ratio, [lo, hi])
    report.check("continuity: standard sign (+div j) is the vanishing one",
                 minus_larger == len(pts), minus_larger, len(pts))
    path = os.path.join(out_dir, "continuity.csv")
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("h,max_residual\n")
        fh.write(f"{float(h)!r},{float(r1)!r}\n{float(h / 2)!r},{float(r2)!r}\n")
    report.files.append(path)
    report.extras["continuity"] = {"max_residual": r1, "ratio": ratio}


_RUNNERS = {
    "free-fas": run_free_fas,
    "potential-fas": run_potential_fas,
    "cones-scaling": run_cones_scaling,
    "statphase-bench": run_statphase_bench,
    "continuity-suite": run_continuity_suite,
}


def run(cfg, out_dir=None) -> RunReport:
    """Execute the configured scenario; returns the report (also written as
    report.json next to the scenario's CSV outputs)."""
    scenario = cfg.get("run.scenario")
    out_dir = out_dir or cfg.get("run.out_dir")
    os.makedirs(out_dir, exist_ok=True)
    report = RunReport(scenario=scenario)
    t0 = time.time()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        _RUNNERS[scenario](cfg, report, out_dir)
    report.timings["total_s"] = round(time.time() - t0, 3)
    path = os.path.join(out_dir, "report.json")
    with open(path, "w") as fh:
        json.dump(report.to_json(), fh, indent=1, sort_keys=True)
    report.files.append(path)
    return report


def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="diracflux",
        description="flux-across-surfaces numerical laboratory")
    ap.add_argument("--config", help="scenario config file")
    ap.add_argument("--scenario", choices=SCENARIOS,
                    help="scenario name (overrides the config)")
    ap.add_argument("--out-dir", default=None,
                    help="output directory (fallback: DFL_OUT_DIR, then cwd)")
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--print-defaults", action="store_true")
    args = ap.parse_args(argv)

    if args.print_defaults:
        for key in sorted(DEFAULTS):
            print(f"{key} = {DEFAULTS[key]}")
        return 0

    text = ""
    if args.config:
        with open(args.config) as fh:
            text = fh.read()
    try:
        cfg = parse_config(text)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.scenario:
        cfg.values["run.scenario"] = args.scenario
    if args.threads is not None:
        cfg.values["run.threads"] = str(args.threads)
    out_dir = args.out_dir or os.environ.get("DFL_OUT_DIR") or cfg.get("run.out_dir")

    nthreads = int(cfg.get("run.threads"))
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:  # pragma: no cover
        threadpool_limits = None
    from . import _kernels
    if hasattr(_kernels.impl, "set_num_threads"):
        _kernels.impl.set_num_threads(nthreads)

    try:
        if threadpool_limits is not None:
            with threadpool_limits(limits=nthreads):
                report = run(cfg, out_dir)
        else:
            report = run(cfg, out_dir)
    except Exception as exc:
        print(f"scenario {cfg.get('run.scenario')} failed: "
              f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    for a in report.assertions:
        status = "PASS" if a["passed"] else "FAIL"
        print(f"[{status}] {a['name']}: measured={a['measured']} "
              f"threshold={a['threshold']}")
    return 0 if report.all_passed else 1


if __name__ == "__main__":
    sys.exit(main())
