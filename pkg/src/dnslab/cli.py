"""Command-line front end: JSON run configuration, subcommands and the
exit-code contract.

Exit codes: 0 success, 1 configuration error, 2 solver error, 3 time-step
floor reached (suspected finite-time blow-up; the abort time is printed).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

import numpy as np

from . import diagnostics, functionals, grid as g, initdata, model, picard
from .errors import ConfigError, DnsLabError, MaximalTimeError
from .linearized import State, StepConfig

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_BLOWUP = 3


def load_config(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc


def parse_params(cfg):
    sec = cfg.get("params", {})
    p = model.Params(
        A=sec.get("A", 1.0),
        gamma=sec.get("gamma", 2.0),
        alpha=sec.get("alpha", 1.0),
        beta=sec.get("beta", 0.0),
        delta=sec.get("delta", 1.5),
        rho_bar=sec.get("rho_bar", 0.0),
        eta=sec.get("eta", 1e-2),
    )
    violations = model.validate_params(p)
    if violations:
        raise ConfigError("parameter constraints violated: " + "; ".join(violations))
    return p


def parse_grid(cfg):
    sec = cfg.get("grid", {})
    try:
        return g.Grid(
            dim=sec.get("dim", 1),
            n=sec.get("n", 256),
            length=sec.get("length", 1.0),
            boundary=sec.get("boundary", g.PERIODIC),
            origin=sec.get("origin"),
        )
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}") from exc


def parse_profile(sec):
    kind = sec.get("kind", "gaussian")
    if kind == "gaussian":
        return initdata.GaussianProfile(sec.get("width", 0.25))
    if kind == "plateau":
        return initdata.PlateauProfile(sec.get("r_inner", 0.25),
                                       sec.get("r_outer", 0.75))
    if kind == "bump":
        return initdata.BumpProfile(sec.get("radius", 0.5))
    raise ConfigError(f"unknown profile kind {kind!r}")


def parse_velocity(sec, dim):
    if sec is None:
        raise ConfigError("analytic velocity object u0 missing")
    kind = sec.get("kind")
    if kind == "linear":
        return initdata.LinearVelocity(sec["matrix"], sec.get("constant"))
    if kind == "radial":
        return initdata.RadialScaledVelocity(
            sec.get("scale", -1.0),
            parse_profile(sec.get("profile", {})),
            center=sec.get("center"),
            dim=dim,
        )
    if kind == "shear":
        if dim != 2:
            raise ConfigError("shear velocity is 2D only")
        return initdata.ShearVelocity(parse_profile(sec.get("profile", {})),
                                      center=sec.get("center"))
    if kind == "rotation":
        if dim != 2:
            raise ConfigError("rotation velocity is 2D only")
        return initdata.RotationVelocity(sec.get("omega", 1.0),
                                         center=sec.get("center"))
    raise ConfigError(f"unknown velocity kind {kind!r}")


def parse_picard(cfg):
    sec = cfg.get("picard", {})
    try:
        step = StepConfig(
            dt=sec.get("dt", 1e-3),
            solver_tol=sec.get("solver_tol", 1e-10),
            solver_max_iter=sec.get("solver_max_iter", 2000),
            theta=sec.get("theta", 1.0),
        )
        pc = picard.PicardConfig(
            cfg=step,
            ticks_per_slab=sec.get("ticks_per_slab", 10),
            max_picard_iters=sec.get("max_picard_iters", 30),
            picard_tol=sec.get("picard_tol", 1e-8),
            eta_schedule=tuple(sec.get("eta_schedule", [1e-2])),
            dt_min=sec.get("dt_min", 1e-8),
            grad_resolution_limit=sec.get("grad_resolution_limit", 0.25),
        )
    except ValueError as exc:
        raise ConfigError(f"picard: {exc}") from exc
    t_end = sec.get("t_end", 1.0)
    return pc, t_end


def build_init(cfg, gr, p):
    """Returns (state0, region_A or None, u0-analytic or None)."""
    sec = cfg.get("init", {})
    kind = sec.get("kind", "smooth")
    if kind == "smooth":
        state = initdata.build_smooth_state(
            gr, p,
            rho_amplitude=sec.get("rho_amplitude", 0.0),
            rho_width=sec.get("rho_width", 0.25),
            u_amplitude=sec.get("u_amplitude", 0.0),
            u_width=sec.get("u_width", 0.25),
            center=sec.get("center"),
        )
        return state, None, None
    if kind == "pure_vacuum":
        u0 = parse_velocity(sec.get("u0"), gr.dim)
        return initdata.build_pure_vacuum_state(u0, gr), None, u0
    if kind == "isolated_mass_group":
        spec = initdata.IsolatedMassGroupSpec(
            center=sec.get("center", [0.0] * gr.dim),
            r_inner=sec.get("r_inner", 0.25),
            r_outer=sec.get("r_outer", 0.5),
            amplitude=sec.get("amplitude", 1.0),
            boundary_velocity=sec.get("boundary_velocity"),
            inner_velocity=(
                parse_velocity(sec["inner_velocity"], gr.dim)
                if "inner_velocity" in sec else None
            ),
        )
        try:
            state, region_a, _region_b = initdata.build_isolated_mass_group(
                spec, gr, p
            )
        except ValueError as exc:
            raise ConfigError(f"isolated_mass_group: {exc}") from exc
        region_a.initial_mass = g.integrate(
            model.phi_to_rho(state.phi, p), gr, region_a.mask
        )
        return state, region_a, None
    if kind == "hyperbolic_singularity":
        u0 = parse_velocity(sec.get("u0"), gr.dim)
        try:
            state, region_v, _pred = initdata.build_hyperbolic_singularity_data(
                sec.get("center", [0.0] * gr.dim),
                sec.get("radius", 0.5),
                u0, gr, p,
                rho_outside=sec.get("rho_outside", 0.0),
                rng=cfg.get("seed", 0),
            )
        except ValueError as exc:
            raise ConfigError(f"hyperbolic_singularity: {exc}") from exc
        return state, region_v, u0
    raise ConfigError(f"unknown init kind {kind!r}")


class RunWriter:
    """Streams per-tick diagnostics and region tracking for one run."""

    def __init__(self, out_dir, state0, region, p, gr, cfg):
        self.out_dir = out_dir
        self.p = p
        self.gr = gr
        self.region = region
        self.records = []
        self.every = cfg.get("output", {}).get("diagnostics_every", 10)
        self.snap_every = cfg.get("output", {}).get("snapshot_every", 0)
        self.mass0 = diagnostics.total_mass(state0, p, gr)
        self.bound_inputs = None
        if region is not None and np.isfinite(region.initial_mass):
            ms = functionals.moments(state0, region, p, gr)
            self.bound_inputs = (ms.functional_I, region.initial_volume)
        self.tick = 0
        os.makedirs(out_dir, exist_ok=True)

    def __call__(self, prev, state, stats, eta, dt):
        self.tick += 1
        if self.region is not None:
            self.region = functionals.advance_flow_map(
                self.region, state.u, dt, self.gr
            )
        if self.every and self.tick % self.every == 0:
            rec = diagnostics.record(
                state, prev, self.p, self.gr, dt, eta,
                mass0=self.mass0, region=self.region,
                bound_inputs=self.bound_inputs, solver_stats=stats,
            )
            self.records.append(rec)
        if self.snap_every and self.tick % self.snap_every == 0:
            path = os.path.join(self.out_dir, f"phi_{self.tick:08d}.dnsf")
            g.write_snapshot(path, state.phi, self.gr, state.t)
            for c in range(self.gr.dim):
                path = os.path.join(self.out_dir, f"u{c}_{self.tick:08d}.dnsf")
                g.write_snapshot(path, state.u[..., c], self.gr, state.t)

    def finish(self, result=None):
        diagnostics.write_csv(
            os.path.join(self.out_dir, "diagnostics.csv"), self.records
        )
        with open(os.path.join(self.out_dir, "bounds.csv"), "w") as fh:
            fh.write("t,I_expr1,jensen_lb,upper_ub\n")
            for rec in self.records:
                fh.write(f"{rec.t!r},{rec.I_expr1!r},{rec.jensen_lb!r},"
                         f"{rec.upper_ub!r}\n")
        with open(os.path.join(self.out_dir, "contraction.csv"), "w") as fh:
            fh.write("slab,iteration,gamma,weighted_grad_increment\n")
            if result is not None:
                for s, trace in enumerate(result.traces):
                    for k, (gam, wg) in enumerate(
                        zip(trace.gammas, trace.weighted_grad_increments)
                    ):
                        fh.write(f"{s},{k + 1},{gam!r},{wg!r}\n")
        with open(os.path.join(self.out_dir, "eta_gaps.csv"), "w") as fh:
            fh.write("eta_a,eta_b,sup_l2_gap\n")
            if result is not None:
                for ea, eb, gap in result.eta_gaps:
                    fh.write(f"{ea!r},{eb!r},{gap!r}\n")


def cmd_run(args):
    cfg = load_config(args.config)
    p = parse_params(cfg)
    gr = parse_grid(cfg)
    pc, t_end = parse_picard(cfg)
    state0, region, _u0 = build_init(cfg, gr, p)
    out_dir = args.out or cfg.get("output", {}).get("dir", "run_out")
    writer = RunWriter(out_dir, state0, region, p, gr, cfg)
    with open(os.path.join(out_dir, "config.json"), "w") as fh:
        json.dump(cfg, fh, indent=2, sort_keys=True)
    try:
        result = picard.solve(state0, t_end, pc, p, gr, observer=writer)
    except MaximalTimeError as exc:
        writer.finish()
        print(f"suspected blow-up: dt floor reached at t = {exc.time:.8g}")
        if exc.reason and not args.quiet:
            print(f"  reason: {exc.reason}")
        return EXIT_BLOWUP
    writer.finish(result)
    if not args.quiet:
        print(f"reached t_end = {t_end:g} "
              f"({writer.tick} ticks, {len(writer.records)} records)")
    return EXIT_OK


def cmd_check(args):
    cfg = load_config(args.config)
    report = []
    code = EXIT_OK
    try:
        p = parse_params(cfg)
        report.append("params: ok")
    except ConfigError as exc:
        report.append(f"params: FAIL ({exc})")
        print("\n".join(report))
        return EXIT_CONFIG
    try:
        gr = parse_grid(cfg)
        report.append(f"grid: ok (dim={gr.dim}, n={gr.n}, h={gr.h})")
    except ConfigError as exc:
        report.append(f"grid: FAIL ({exc})")
        print("\n".join(report))
        return EXIT_CONFIG
    try:
        state0, region, _ = build_init(cfg, gr, p)
        rho0 = model.phi_to_rho(state0.phi, p)
        back = model.rho_to_phi(rho0, p)
        sig = state0.phi > 1e-8
        if sig.any():
            err = np.max(np.abs(back[sig] - state0.phi[sig])
                         / np.abs(state0.phi[sig]))
            report.append(f"init: phi/rho round-trip rel err {err:.2e}")
        if np.any(state0.phi < 0):
            report.append("init: FAIL (negative phi)")
            code = EXIT_CONFIG
        else:
            report.append("init: ok")
        if region is not None:
            report.append(f"region: |A0| = {region.initial_volume:.6g}, "
                          f"m(0) = {region.initial_mass:.6g}")
    except ConfigError as exc:
        report.append(f"init: FAIL ({exc})")
        code = EXIT_CONFIG
    print("\n".join(report))
    return code


def cmd_vacuum_predict(args):
    cfg = load_config(args.config)
    p = parse_params(cfg)
    gr = parse_grid(cfg)
    kind = cfg.get("init", {}).get("kind")
    if kind not in ("hyperbolic_singularity", "pure_vacuum"):
        print(f"vacuum-predict needs a vacuum init mode, got {kind!r}",
              file=sys.stderr)
        return EXIT_CONFIG
    try:
        state0, region, u0 = build_init(cfg, gr, p)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    rng = np.random.default_rng(cfg.get("seed", 0))
    if region is not None:
        pts = region.markers
    else:
        nodes = gr.nodes().reshape(-1, gr.dim)
        idx = rng.choice(len(nodes), size=min(512, len(nodes)), replace=False)
        pts = nodes[np.sort(idx)]
    from .vacuum import predict_blowup
    pred = predict_blowup(u0, pts)
    print(f"min eigenvalue: {pred.min_eigenvalue:.8g}")
    print(f"location: {pred.location}")
    if np.isfinite(pred.predicted_time):
        print(f"predicted_time: {pred.predicted_time:.8g}")
    else:
        print("predicted_time: infinity")
    return EXIT_OK


def cmd_vacuum_check(args):
    cfg = load_config(args.config)
    p = parse_params(cfg)
    gr = parse_grid(cfg)
    pc, t_end = parse_picard(cfg)
    state0, _region, _u0 = build_init(cfg, gr, p)
    from .vacuum import vacuum_residual
    last = {"prev": None, "report": None}

    def observer(prev, state, stats, eta, dt):
        last["report"] = vacuum_residual(prev, state, p, gr)

    try:
        picard.solve(state0, t_end, pc, p, gr, observer=observer)
    except MaximalTimeError as exc:
        print(f"suspected blow-up at t = {exc.time:.8g}")
        return EXIT_BLOWUP
    rep = last["report"]
    if rep is None:
        print("no ticks executed")
        return EXIT_CONFIG
    print(f"vacuum fraction: {rep.fraction:.6g}")
    print(f"free-transport residual (Linf over vacuum): {rep.residual_linf:.6g}")
    return EXIT_OK


def cmd_eta_sweep(args):
    cfg = load_config(args.config)
    p = parse_params(cfg)
    gr = parse_grid(cfg)
    pc, t_end = parse_picard(cfg)
    if len(pc.eta_schedule) < 3:
        print("eta-sweep needs an eta_schedule with at least 3 entries",
              file=sys.stderr)
        return EXIT_CONFIG
    state0, _region, _ = build_init(cfg, gr, p)
    gaps = picard.eta_robustness(state0, t_end, pc, p, gr)
    out_dir = args.out or cfg.get("output", {}).get("dir", "run_out")
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "eta_gaps.csv")
    with open(path, "w") as fh:
        fh.write("eta_a,eta_b,sup_l2_gap\n")
        for ea, eb, gap in gaps:
            fh.write(f"{ea!r},{eb!r},{gap!r}\n")
    if not args.quiet:
        for ea, eb, gap in gaps:
            print(f"eta {ea:g} -> {eb:g}: sup L2 gap {gap:.6e}")
    return EXIT_OK


def cmd_blowup_scan(args):
    cfg = load_config(args.config)
    p = parse_params(cfg)
    gr = parse_grid(cfg)
    if cfg.get("init", {}).get("kind") != "isolated_mass_group":
        print("blowup-scan needs an isolated_mass_group init", file=sys.stderr)
        return EXIT_CONFIG
    state0, region, _ = build_init(cfg, gr, p)
    ms = functionals.moments(state0, region, p, gr)
    I0, area0, m0 = ms.functional_I, region.initial_volume, region.initial_mass

    gammas = np.linspace(args.gamma_min, args.gamma_max, args.points)
    deltas = np.linspace(args.delta_min, args.delta_max, args.points)
    rows = []
    for gm in gammas:
        for dl in deltas:
            trial = replace(p, gamma=gm, delta=dl)
            if model.validate_params(trial):
                continue
            cross = functionals.analytic_crossing_time(
                trial, I0, area0, region, m0=m0
            )
            abort_t = float("nan")
            if args.simulate:
                pc, t_end = parse_picard(cfg)
                try:
                    picard.solve(state0, t_end, pc, trial, gr)
                    abort_t = float("inf")
                except MaximalTimeError as exc:
                    abort_t = exc.time
            rows.append((gm, dl, cross, abort_t))
    out_dir = args.out or cfg.get("output", {}).get("dir", "run_out")
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "blowup_scan.csv"), "w") as fh:
        fh.write("gamma,delta,analytic_crossing_time,abort_time\n")
        for gm, dl, cross, abort_t in rows:
            fh.write(f"{gm!r},{dl!r},{cross!r},{abort_t!r}\n")
    if not args.quiet:
        finite = sum(1 for r in rows if np.isfinite(r[2]))
        print(f"{len(rows)} admissible points, {finite} finite crossing times")
    return EXIT_OK


def make_parser():
    ap = argparse.ArgumentParser(
        prog="dnslab",
        description="Numerical laboratory for degenerate-viscosity "
                    "compressible flow",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON run config")
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument(
        "--threads", type=int,
        default=int(os.environ.get("DNS_LAB_THREADS", "1")),
        help="worker threads (reductions stay ordered)",
    )
    common.add_argument("--quiet", action="store_true")

    sub.add_parser("run", parents=[common]).set_defaults(func=cmd_run)
    sub.add_parser("check", parents=[common]).set_defaults(func=cmd_check)
    sub.add_parser("vacuum-predict", parents=[common]).set_defaults(
        func=cmd_vacuum_predict)
    sub.add_parser("vacuum-check", parents=[common]).set_defaults(
        func=cmd_vacuum_check)
    sub.add_parser("eta-sweep", parents=[common]).set_defaults(
        func=cmd_eta_sweep)
    scan = sub.add_parser("blowup-scan", parents=[common])
    scan.add_argument("--gamma-min", type=float, default=1.2)
    scan.add_argument("--gamma-max", type=float, default=2.5)
    scan.add_argument("--delta-min", type=float, default=1.05)
    scan.add_argument("--delta-max", type=float, default=1.75)
    scan.add_argument("--points", type=int, default=10)
    scan.add_argument("--simulate", action="store_true",
                      help="also run the solver per grid point (slow)")
    scan.set_defaults(func=cmd_blowup_scan)
    return ap


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DnsLabError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
