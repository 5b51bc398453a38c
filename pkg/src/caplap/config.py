"""Run configuration: INI sections mapped onto dataclasses, parsed strictly.

Unknown sections or keys are errors, so every parameter that reaches a run
is one the reader can see in the file.
"""
from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .forcing import AffineForcing, ConstantForcing, ForcingModel
from .geometry import Interval, RadialAnnulus, RadialBall, build_grid
from .parabolic import AffineDecay, ProblemSpec, SolverConfig, ZeroSource


class ConfigError(ValueError):
    pass


@dataclass
class DomainSection:
    kind: str = "ball"
    n: int = 2
    R: float = 1.0
    R_in: float = 1.0
    R_out: float = 2.0
    x_left: float = 0.0
    x_right: float = 1.0

    def build(self):
        if self.kind == "interval":
            return Interval(self.x_left, self.x_right)
        if self.kind == "ball":
            return RadialBall(self.n, self.R)
        if self.kind == "annulus":
            return RadialAnnulus(self.n, self.R_in, self.R_out)
        raise ConfigError(f"unknown domain kind {self.kind!r}")


@dataclass
class GridSection:
    N: int = 64


@dataclass
class ProblemSection:
    p: float = 2.0
    eps: float = 1e-2
    f: str = "zero"        # zero | affine
    f_c: float = 0.0
    f_lam: float = 0.0
    phi_rhs: str = "0"     # a number, or "random" for a seeded smooth profile
    L: float = float("inf")


@dataclass
class BCSection:
    q: float = 1.0
    phi: str = "0"         # one number, or comma-separated per boundary node
    mode: str = "regularized"
    epsilon1: float = 0.1


@dataclass
class ForcingSection:
    model: str = "none"    # none | constant | affine
    a0: float = -20.0
    k: float = 0.0
    c1: float = 0.1
    C1: float = 1.0
    theta: float = 1.0


@dataclass
class SolverSection:
    dt: float = 1e-2
    t_end: float = 1.0
    theta: float = 1.0
    scheme: str = "theta"
    newton_tol: float = 1e-10
    newton_max_iter: int = 30
    monitor_stride: int = 1
    ut_stop: float = 0.0   # 0 disables the stopping test


@dataclass
class InitialSection:
    kind: str = "cosine"   # zero | cosine | quadratic | gaussian | eigen
    amplitude: float = 0.3
    offset: float = 0.0


@dataclass
class ConvolutionSection:
    eps_c: float = 0.1
    q_c: float = 2.0
    data: str = "abs"      # abs | negabs (u = |y| or -|y|)


@dataclass
class RunSection:
    scenario: str = ""
    out: str = "out"
    seed: int = 0


_SECTIONS = {
    "run": RunSection, "domain": DomainSection, "grid": GridSection,
    "problem": ProblemSection, "bc": BCSection, "forcing": ForcingSection,
    "solver": SolverSection, "initial": InitialSection, "convolution": ConvolutionSection,
}


@dataclass
class RunConfig:
    run: RunSection = field(default_factory=RunSection)
    domain: DomainSection = field(default_factory=DomainSection)
    grid: GridSection = field(default_factory=GridSection)
    problem: ProblemSection = field(default_factory=ProblemSection)
    bc: BCSection = field(default_factory=BCSection)
    forcing: ForcingSection = field(default_factory=ForcingSection)
    solver: SolverSection = field(default_factory=SolverSection)
    initial: InitialSection = field(default_factory=InitialSection)
    convolution: ConvolutionSection = field(default_factory=ConvolutionSection)

    def copy(self) -> "RunConfig":
        return RunConfig(**{k: dataclasses.replace(getattr(self, k)) for k in _SECTIONS})

    # -- builders ------------------------------------------------------------

    def make_grid(self):
        return build_grid(self.domain.build(), self.grid.N)

    def phi_bdry(self):
        vals = [float(s) for s in str(self.bc.phi).split(",") if s.strip()]
        if not vals:
            raise ConfigError("bc.phi is empty")
        return vals[0] if len(vals) == 1 else tuple(vals)

    def phi_rhs(self):
        txt = str(self.problem.phi_rhs).strip()
        if txt == "random":
            return random_profile(self.run.seed, self.domain.build())
        try:
            return float(txt)
        except ValueError:
            raise ConfigError(f"problem.phi_rhs must be a number or 'random', got {txt!r}")

    def forcing_model(self) -> ForcingModel | None:
        f = self.forcing
        if f.model == "none":
            return None
        if f.model == "constant":
            a = ConstantForcing(f.a0)
        elif f.model == "affine":
            a = AffineForcing(f.a0, f.k)
        else:
            raise ConfigError(f"unknown forcing model {f.model!r}")
        return ForcingModel(a, f.c1, f.C1, f.theta)

    def problem_spec(self) -> ProblemSpec:
        pr = self.problem
        if pr.f == "zero":
            fm = ZeroSource()
        elif pr.f == "affine":
            fm = AffineDecay(pr.f_c, pr.f_lam)
        else:
            raise ConfigError(f"unknown source model {pr.f!r}")
        if self.bc.mode != "regularized":
            raise ConfigError("runs integrate the regularized problem (bc.mode = regularized)")
        fmod = self.forcing_model()
        return ProblemSpec(p=pr.p, q=self.bc.q, eps=pr.eps, f_model=fm,
                           a_model=None if fmod is None else fmod.a_model,
                           phi_bdry=self.phi_bdry(), phi_rhs=self.phi_rhs(), L_bound=pr.L,
                           epsilon1=self.bc.epsilon1)

    def solver_config(self) -> SolverConfig:
        s = self.solver
        return SolverConfig(dt=s.dt, t_end=s.t_end, theta=s.theta, newton_tol=s.newton_tol,
                            newton_max_iter=s.newton_max_iter, monitor_stride=s.monitor_stride,
                            ut_stop=s.ut_stop if s.ut_stop > 0 else None, scheme=s.scheme)


def random_profile(seed: int, domain):
    """Smooth random source: four cosine modes with N(0,1) coefficients."""
    rng = np.random.default_rng(seed)
    c = rng.normal(size=4)
    if isinstance(domain, Interval):
        lo, L = domain.x_left, domain.volume
    elif isinstance(domain, RadialBall):
        lo, L = 0.0, domain.R
    else:
        lo, L = domain.R_in, domain.R_out - domain.R_in

    def fn(x):
        s = (np.asarray(x, dtype=float) - lo) / L
        return sum(c[k] * np.cos(k * np.pi * s) for k in range(4))

    return fn


def _coerce(cls, name, key, raw):
    types = {f.name: f.type for f in dataclasses.fields(cls)}
    if key not in types:
        raise ConfigError(f"unknown key {key!r} in section [{name}]")
    t = types[key]
    try:
        if t in (int, "int"):
            return int(raw)
        if t in (float, "float"):
            return float(raw)
    except ValueError:
        raise ConfigError(f"[{name}] {key} = {raw!r} is not a valid {t}")
    return str(raw).strip()


def apply_overrides(cfg: RunConfig, text: str) -> RunConfig:
    """Overlay INI text on an existing config."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as e:
        raise ConfigError(str(e)) from e
    out = cfg.copy()
    for name in cp.sections():
        if name not in _SECTIONS:
            raise ConfigError(f"unknown section [{name}]")
        sec = getattr(out, name)
        for key, raw in cp.items(name):
            setattr(sec, key, _coerce(_SECTIONS[name], name, key, raw))
    return out


def load_config(path, base: RunConfig | None = None) -> RunConfig:
    return apply_overrides(base or RunConfig(), Path(path).read_text())


def dump_config(cfg: RunConfig) -> str:
    lines = []
    for name in _SECTIONS:
        lines.append(f"[{name}]")
        for f in dataclasses.fields(_SECTIONS[name]):
            lines.append(f"{f.name} = {getattr(getattr(cfg, name), f.name)}")
        lines.append("")
    return "\n".join(lines)
