"""Command-line entry point.

    fermion-emergence --command verify
    fermion-emergence --command trajectory --mu 1 --dt 1e-3 --out traj.csv
    fermion-emergence --command profile --grid "x=0,y=0,z=-4:4:81,t=1" --out prof.csv
    fermion-emergence --command boost-profile --velocity 0.6 --out boosted.csv
    fermion-emergence --command residual --velocity 0.6 --out residual.json

Values come from defaults, then ``--config`` (JSON), then explicit flags.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from . import bohm, emergence as em, spinors as sp, verify

COMMANDS = ("verify", "trajectory", "profile", "boost-profile", "residual")
DEFAULT_GRID = "x=0,y=0,z=-4:4:81,t=1"


@dataclass
class RunConfig:
    command: str = "verify"
    mu: float = 1.0
    box: float = 60.0
    velocity: float = 0.0
    dt: float = 1e-3
    horizon: float | None = None
    order: int = 32
    grid: str = DEFAULT_GRID
    out: str | None = None
    omega_sign: str = sp.ENERGY
    profile_variant: str = em.EQ37
    boost_variant: str = em.SUBSTITUTION
    residual_steps: tuple = (0.1, 0.05, 0.025)
    tolerances: dict | None = None

    def spec(self) -> em.ShellSpec:
        return em.ShellSpec(mu=self.mu, order=self.order, L=self.box)

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.omega_sign not in (sp.ENERGY, sp.PAPER):
            raise ValueError(f"unknown omega sign {self.omega_sign!r}")
        if self.profile_variant not in (em.EQ35, em.EQ37):
            raise ValueError(f"unknown profile variant {self.profile_variant!r}")
        if self.boost_variant not in (em.SUBSTITUTION, em.LITERAL):
            raise ValueError(f"unknown boost variant {self.boost_variant!r}")
        if not 0.0 <= self.velocity < 1.0:
            raise ValueError("velocity must lie in [0, 1)")
        self.residual_steps = tuple(float(h) for h in self.residual_steps)
        return self


def load_config(path) -> dict:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ValueError("config file must hold a JSON object")
    known = {f.name for f in fields(RunConfig)}
    data = {k.replace("-", "_"): v for k, v in data.items()}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")
    return data


def _open_out(path):
    """Fail early, with a clear message, if the output cannot be written."""
    p = Path(path)
    if p.is_dir():
        raise OSError(f"output path {p} is a directory")
    if not p.parent.exists():
        raise OSError(f"output directory {p.parent} does not exist")
    with p.open("a", encoding="utf-8"):
        pass
    return p


def _emit(text: str, out):
    if out is None:
        sys.stdout.write(text)
    else:
        _open_out(out).write_text(text, encoding="utf-8")


def sidecar_path(out) -> Path:
    return Path(out).with_suffix(".json")


# -- commands -------------------------------------------------------------------

def run_verify(cfg: RunConfig) -> int:
    tol = dict(verify.DEFAULT_TOLERANCES)
    tol.update(cfg.tolerances or {})
    settings = verify.VerifySettings(
        mu=cfg.mu, box=cfg.box, dt=cfg.dt, horizon=cfg.horizon, order=cfg.order,
        omega_sign=cfg.omega_sign, profile_variant=cfg.profile_variant,
        boost_variant=cfg.boost_variant, velocity=cfg.velocity or 0.6, tolerances=tol)
    if cfg.out is not None:
        _open_out(cfg.out)
    results = verify.run_checks(settings)
    for r in results:
        print(f"{r.status.upper():<8} {r.name:<38} measured={r.measured:.3e} tol={r.tolerance:.1e}"
              f"  {r.detail}", file=sys.stderr)
    if cfg.out is not None:
        _emit(verify.report_json(results) + "\n", cfg.out)
    return 0 if not any(r.blocking for r in results) else 1


def run_trajectory(cfg: RunConfig) -> int:
    spec = cfg.spec()
    T = cfg.horizon if cfg.horizon is not None else 10 * 2 * math.pi / spec.omega
    out = _open_out(cfg.out) if cfg.out else None
    traj = bohm.integrate_trajectory(bohm.amplitude(spec.omega), spec.omega, T, cfg.dt,
                                     k=(0.0, 0.0, spec.mu))
    err = float(abs(traj.q - traj.closed_form()).max())
    summary = {"omega": spec.omega, "horizon": T, "step": traj.step, "samples": len(traj.t),
               "max_error_vs_closed_form": err}
    if out is not None:
        traj.write_csv(out)
        sidecar_path(out).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n",
                                     encoding="utf-8")
    else:
        sys.stdout.write(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return 0


def run_profile(cfg: RunConfig) -> int:
    grid = em.parse_grid(cfg.grid)
    frame = None
    if cfg.command == "boost-profile" and cfg.velocity > 0:
        frame = em.BoostedFrame(cfg.velocity)
    prof = em.sample_profile(cfg.spec(), grid, frame, cfg.profile_variant, cfg.boost_variant)
    if cfg.out is None:
        raise ValueError("profile commands need --out")
    out = _open_out(cfg.out)
    prof.write_csv(out)
    prof.write_sidecar(sidecar_path(out))
    return 0


def run_residual(cfg: RunConfig) -> int:
    frame = em.BoostedFrame(cfg.velocity) if cfg.velocity > 0 else None
    if cfg.out is not None:
        _open_out(cfg.out)
    rep = em.residual_convergence(cfg.spec(), list(cfg.residual_steps), em.rest_region(frame),
                                  frame, cfg.profile_variant, cfg.boost_variant, relative=True)
    _emit(rep.to_json() + "\n", cfg.out)
    return 0


RUNNERS = {
    "verify": run_verify,
    "trajectory": run_trajectory,
    "profile": run_profile,
    "boost-profile": run_profile,
    "residual": run_residual,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fermion-emergence",
                                description="Grassmann vacuum, mode trajectories and emergent profiles.")
    p.add_argument("--command", choices=COMMANDS)
    p.add_argument("--config", help="JSON file with any of the options below")
    p.add_argument("--mu", type=float, help="shell radius |k| (default 1)")
    p.add_argument("--box", type=float, help="box side L (default 60)")
    p.add_argument("--velocity", type=float, help="boost speed v in [0, 1) (default 0)")
    p.add_argument("--dt", type=float, help="RK4 step (default 1e-3)")
    p.add_argument("--horizon", type=float, help="trajectory horizon (default 10 periods)")
    p.add_argument("--order", type=int, help="shell quadrature order (default 32)")
    p.add_argument("--grid", help=f"sample grid, e.g. {DEFAULT_GRID!r}")
    p.add_argument("--out", help="output file")
    p.add_argument("--omega-sign", choices=(sp.PAPER, sp.ENERGY))
    p.add_argument("--profile-variant", choices=(em.EQ35, em.EQ37))
    p.add_argument("--boost-variant", choices=(em.SUBSTITUTION, em.LITERAL))
    return p


def config_from_args(argv=None) -> RunConfig:
    args = vars(build_parser().parse_args(argv))
    values = asdict(RunConfig())
    config = args.pop("config")
    if config:
        values.update(load_config(config))
    values.update({k: v for k, v in args.items() if v is not None})
    return RunConfig(**values).validate()


def main(argv=None) -> int:
    try:
        cfg = config_from_args(argv)
        return RUNNERS[cfg.command](cfg)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
