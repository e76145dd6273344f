"""Command line front end: ``lgswe run | eoc | sweep-c0``.

Configuration files are flat INI files::

    [scenario]
    id = ex3e          ; ex1 ex2 ex3a..ex3e case1 bay bay_extended custom
    N = 50             ; square scenarios
    mesh = path.smf    ; bay / custom (optional for bay)
    order = 2
    c0 = 0.9
    dt = 0.05          ; optional override
    T = 100            ; optional override
    tbc_data = exact   ; ex2 only: exact | numerical
    perturbation = 0.2 ; square mesh jitter, fraction of h
    seed = 0
    active = 1, 2, 3   ; bay / custom: open-sea labels kept as transmission
    center = 559.56, 430.02

    [physics]          ; optional overrides of the case constants
    rho = 1e12
    mu = 1
    g = 9.8e-3
    zeta = 2
    amplitude = 0.01
    decay = 0.04

    [output]
    out_dir = out
    snapshot_every = 0
    deterministic = false

Errors are reported on stderr as one JSON object and a nonzero exit status.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import json
import sys
from pathlib import Path

from .diagnostics import eoc
from .errors import InputError, LgsweError
from .io import SnapshotWriter, design_metadata, params_dict, write_run_json
from .scenarios import build_scenario, is_unimodal, scenario_case, sweep_c0

SCENARIOS = ("ex1", "ex2", "ex3a", "ex3b", "ex3c", "ex3d", "ex3e", "case1", "bay", "bay_extended", "custom")
DEFAULT_C0_VALUES = (0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2)

# case fields that may be overridden from a [physics] section
PHYSICS_KEYS = ("rho", "mu", "g", "zeta", "amplitude", "decay")


class RunConfig:
    """Resolved configuration of one command."""

    def __init__(self, scenario, N=None, mesh=None, order=2, c0=0.9, dt=None, T=None,
                 perturbation=0.2, snapshot_every=0, out_dir="out", deterministic=False,
                 seed=0, active=None, physics=None, center=None, tbc_data=None):
        if scenario not in SCENARIOS:
            raise InputError(f"unknown scenario {scenario!r}; expected one of {', '.join(SCENARIOS)}")
        if order not in (1, 2):
            raise InputError("order must be 1 or 2")
        square = scenario.startswith("ex") or scenario == "case1"
        if square and N is None:
            raise InputError(f"scenario {scenario} needs N")
        if scenario == "custom" and not mesh:
            raise InputError("custom scenario needs a mesh path")
        if snapshot_every < 0:
            raise InputError("snapshot_every must be non-negative")
        self.scenario = scenario
        self.N = N
        self.mesh = mesh
        self.order = order
        self.c0 = c0
        self.dt = dt
        self.T = T
        self.perturbation = perturbation
        self.snapshot_every = snapshot_every
        self.out_dir = Path(out_dir)
        self.deterministic = deterministic
        self.seed = seed
        self.active = active
        self.physics = dict(physics or {})
        self.center = center
        if tbc_data is not None and scenario != "ex2":
            raise InputError("tbc_data applies to scenario ex2 only")
        self.tbc_data = tbc_data

    def case(self):
        kw = dict(self.physics)
        if self.tbc_data is not None:
            kw["tbc_data"] = self.tbc_data
        if self.center is not None:
            kw["center"] = tuple(self.center)
        if self.scenario in ("bay", "bay_extended", "custom"):
            if self.active is not None:
                kw["active"] = tuple(self.active)
            if self.scenario == "custom":
                kw["mesh_path"] = self.mesh
        try:
            return scenario_case(self.scenario, **kw)
        except (TypeError, ValueError) as exc:
            raise InputError(str(exc)) from exc

    def build(self, **changes):
        opts = dict(
            N=self.N, mesh_path=self.mesh if self.scenario != "custom" else None,
            order=self.order, c0=self.c0, dt=self.dt, T=self.T,
            perturbation=self.perturbation, seed=self.seed,
        )
        opts.update(changes)
        try:
            return build_scenario(self.case(), **opts)
        except ValueError as exc:
            raise InputError(str(exc)) from exc

    def as_dict(self):
        return {
            "scenario": self.scenario, "N": self.N, "mesh": self.mesh, "order": self.order,
            "c0": self.c0, "dt": self.dt, "T": self.T, "perturbation": self.perturbation,
            "snapshot_every": self.snapshot_every, "deterministic": self.deterministic,
            "seed": self.seed, "active": self.active, "physics": self.physics, "center": self.center,
            "tbc_data": self.tbc_data,
        }


def _floats(text):
    return [float(v) for v in text.replace(",", " ").split()]


def load_config(path=None, overrides=None) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    if path is not None:
        if not Path(path).is_file():
            raise InputError(f"config file not found: {path}")
        try:
            cp.read(path)
        except configparser.Error as exc:
            raise InputError(f"cannot parse config: {exc}") from exc
    sc = cp["scenario"] if cp.has_section("scenario") else {}
    out = cp["output"] if cp.has_section("output") else {}
    phys = cp["physics"] if cp.has_section("physics") else {}

    def get(section, key, conv, default=None):
        raw = section.get(key) if section else None
        if raw is None or str(raw).strip() == "":
            return default
        try:
            return conv(raw)
        except ValueError as exc:
            raise InputError(f"bad value for {key}: {raw!r}") from exc

    def flag(raw):
        low = str(raw).strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(raw)

    kw = dict(
        scenario=get(sc, "id", str, "ex1").strip(),
        N=get(sc, "N", int),
        mesh=get(sc, "mesh", str),
        order=get(sc, "order", int, 2),
        c0=get(sc, "c0", float, 0.9),
        dt=get(sc, "dt", float),
        T=get(sc, "T", float),
        perturbation=get(sc, "perturbation", float, 0.2),
        seed=get(sc, "seed", int, 0),
        active=get(sc, "active", lambda s: [int(v) for v in _floats(s)]),
        center=get(sc, "center", _floats),
        tbc_data=get(sc, "tbc_data", lambda v: v.strip()),
        snapshot_every=get(out, "snapshot_every", int, 0),
        out_dir=get(out, "out_dir", str, "out"),
        deterministic=get(out, "deterministic", flag, False),
        physics={k: get(phys, k, float) for k in PHYSICS_KEYS if get(phys, k, float) is not None},
    )
    for key, val in (overrides or {}).items():
        if val is not None:
            kw[key] = val
    return RunConfig(**kw)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_run(cfg: RunConfig) -> int:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    sc = cfg.build()
    mon = sc.diagnostics_monitor()
    observers = [mon]
    snaps = None
    if cfg.snapshot_every:
        snaps = SnapshotWriter(sc.mesh, cfg.out_dir, cfg.snapshot_every)
        observers.append(snaps)
    report = sc.run(observers)
    mon.series.write_csv(cfg.out_dir / "timeseries.csv")
    s = mon.series
    write_run_json(cfg.out_dir / "run.json", {
        "command": "run",
        "config": cfg.as_dict(),
        "scenario": sc.name,
        "params": params_dict(sc.params),
        "design": design_metadata(sc.params),
        "mesh": {"vertices": sc.mesh.n_vertices, "triangles": sc.mesh.n_triangles, "h": sc.mesh.h, **sc.meta},
        "initial": {"t": s.t[0], "l2_eta": s.l2_eta[0], "mass_eta": s.mass_eta[0],
                    "kinetic": s.kinetic[0], "potential": s.potential[0]},
        "steps": report.n_steps,
        "clipped_feet": int(sum(s.clipped)),
        "snapshots": [p.name for p in snaps.written] if snaps else [],
    })
    return 0


EOC_FIELDS = (("E0", "eta"), ("E0", "u"), ("E1", "eta"), ("E1", "u"))


def cmd_eoc(cfg: RunConfig, n_list, orders=(1, 2)) -> int:
    if cfg.scenario not in ("ex1", "ex2"):
        raise InputError("eoc needs a scenario with an exact solution (ex1 or ex2)")
    n_list = sorted(int(n) for n in n_list)
    if len(n_list) < 1:
        raise InputError("empty N list")
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    header = ["scheme", "N", "dt"]
    for mode, key in EOC_FIELDS:
        header += [f"{mode}_{key}", f"EOC_{mode}_{key}"]
    rows, records = [], []
    for order in orders:
        prev = None
        for N in n_list:
            sc = cfg.build(N=N, order=order, dt=None)
            mon = sc.error_monitor()
            sc.run([mon])
            rec = mon.record(N, sc.params.dt)
            row = ["LG2" if order == 2 else "LG1", N, "%.17g" % rec.dt]
            for mode, key in EOC_FIELDS:
                e = getattr(rec, f"{mode}_{key}")
                rate = "" if prev is None else "%.6f" % eoc(getattr(prev, f"{mode}_{key}"), e, prev.dt, rec.dt)
                row += ["%.17g" % e, rate]
            rows.append(row)
            records.append({"order": order, **rec.__dict__})
            prev = rec
    with open(cfg.out_dir / "eoc.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    sc = cfg.build(N=n_list[0])
    write_run_json(cfg.out_dir / "run.json", {
        "command": "eoc", "config": cfg.as_dict(), "N_list": n_list, "orders": list(orders),
        "dt_rule": "0.25 * sqrt(1 / N)", "design": design_metadata(sc.params), "records": records,
    })
    return 0


def cmd_sweep_c0(cfg: RunConfig, values) -> int:
    values = [float(v) for v in values]
    if not values:
        raise InputError("no c0 values given")
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    res = sweep_c0(lambda c0: cfg.build(c0=c0), values)
    with open(cfg.out_dir / "c0_sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["c0", "l2l2_eta"])
        for c0, norm in res.rows():
            w.writerow(["%.17g" % c0, "%.17g" % norm])
    sc = cfg.build(c0=values[0])
    write_run_json(cfg.out_dir / "run.json", {
        "command": "sweep-c0", "config": cfg.as_dict(), "params": params_dict(sc.params),
        "design": design_metadata(sc.params), "values": values, "norms": res.norms,
        "argmin": res.argmin, "unimodal": is_unimodal(res.norms) if len(values) > 2 else None,
    })
    print(f"argmin c0 = {res.argmin:g}")
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lgswe", description="Lagrange-Galerkin shallow water solver")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="INI configuration file")
        sp.add_argument("--out-dir", help="output directory (overrides the config)")
        sp.add_argument("--deterministic", action="store_true", default=None,
                        help="single-threaded, byte-reproducible outputs")
        sp.add_argument("--seed", type=int, help="mesh jitter seed")
        sp.add_argument("--scenario", choices=SCENARIOS, help="scenario id (overrides the config)")
        sp.add_argument("--N", type=int, help="divisions per side for square scenarios")
        sp.add_argument("--order", type=int, choices=(1, 2))
        sp.add_argument("--T", type=float, help="final time")
        sp.add_argument("--dt", type=float, help="time increment")
        sp.add_argument("--c0", type=float)

    r = sub.add_parser("run", help="run one simulation")
    common(r)
    r.add_argument("--snapshot-every", type=int, help="VTK snapshot interval in steps (0 = none)")
    e = sub.add_parser("eoc", help="convergence study with dt = 0.25 sqrt(1/N)")
    common(e)
    e.add_argument("--n-list", default="8,16,32", help="comma separated N values")
    e.add_argument("--orders", default="1,2", help="schemes to run: 1, 2 or 1,2")
    s = sub.add_parser("sweep-c0", help="space-time norm of eta against c0")
    common(s)
    s.add_argument("--values", default=",".join(str(v) for v in DEFAULT_C0_VALUES))
    return p


def _limit_threads():
    # BLAS pools are sized at import; this covers numba and threadpool-aware libraries
    try:
        import numba

        numba.set_num_threads(1)
    except (ImportError, ValueError):
        pass


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        N = args.N
        if args.command == "eoc":
            try:
                n_list = [int(v) for v in _floats(args.n_list)]
                orders = tuple(int(v) for v in _floats(args.orders))
            except ValueError as exc:
                raise InputError(f"bad list: {exc}") from exc
            if not set(orders) <= {1, 2} or not orders:
                raise InputError("orders must be drawn from 1, 2")
            if not n_list:
                raise InputError("empty N list")
            # the N list decides the meshes
            N = min(n_list)
        cfg = load_config(args.config, {
            "out_dir": args.out_dir, "deterministic": args.deterministic, "seed": args.seed,
            "scenario": args.scenario, "N": N, "order": args.order, "T": args.T,
            "dt": args.dt, "c0": args.c0,
            "snapshot_every": getattr(args, "snapshot_every", None),
        })
        if cfg.deterministic:
            _limit_threads()
        if args.command == "run":
            return cmd_run(cfg)
        if args.command == "eoc":
            return cmd_eoc(cfg, n_list, orders)
        try:
            values = _floats(args.values)
        except ValueError as exc:
            raise InputError(f"bad c0 list: {exc}") from exc
        return cmd_sweep_c0(cfg, values)
    except LgsweError as exc:
        err = exc.to_dict()
    except ValueError as exc:
        err = InputError(str(exc)).to_dict()
    except OSError as exc:
        err = {"error": "IO_ERROR", "message": str(exc)}
    print(json.dumps(err), file=sys.stderr)
    return 2


if __name__ == "__main__":
    sys.exit(main())
