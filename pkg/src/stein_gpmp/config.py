"""Planner configuration files.

The format is INI-like: ``[section]`` headers followed by ``key = value``
lines, ``#`` comments, and comma-separated numeric lists. The ``circle``,
``box`` and ``sphere`` keys may repeat; every other key appears at most once.
A stock ``configparser`` rejects repeated keys and loses line numbers, hence
the small parser here.

Sections and keys (units in brackets)::

    [state]
    dof          configuration dimensions
    num_support  number of support states N+1
    dt           time between support states [s]

    [prior]
    start        start state, positions then velocities [m or rad, per s]
    goal         goal configuration [m or rad]
    q_c          acceleration white-noise power spectral density
    sigma_start  start pin standard deviation
    sigma_goal   goal pin standard deviation

    [world]
    bounds       xmin, ymin, xmax, ymax of the workspace [m]
    circle       cx, cy, r  (repeatable) [m]
    box          x0, y0, x1, y1  (repeatable) [m]

    [robot]
    kind          point | planar_arm
    radius        point robot radius [m]
    link_lengths  arm link lengths [m]
    base          arm base position [m]
    sphere        link, offset, radius  (repeatable) [-, m, m]

    [obstacle]
    eps          safety margin [m]
    sigma_obs    obstacle residual standard deviation [m]

    [planner]
    lambda       temperature
    step_size    update step size
    max_iters    iteration budget
    update_tol   convergence threshold on mean update norm
    bandwidth    median | positive number
    seed         RNG seed
    particles    number of particles
    init         prior | straight
    jitter       straight-line init jitter scale
    threads      worker threads for per-particle evaluation
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .environment import Box, Circle, CollisionSphere, ObstacleParams, RobotModel, World2D
from .planner import PlanRequest
from .prior import PriorSpec
from .trajectory import PlannerConfig, StateSpec

REPEATABLE = {("world", "circle"), ("world", "box"), ("robot", "sphere")}

SCHEMA = {
    "state": {"dof", "num_support", "dt"},
    "prior": {"start", "goal", "q_c", "sigma_start", "sigma_goal"},
    "world": {"bounds", "circle", "box"},
    "robot": {"kind", "radius", "link_lengths", "base", "sphere"},
    "obstacle": {"eps", "sigma_obs"},
    "planner": {"lambda", "step_size", "max_iters", "update_tol", "bandwidth", "seed",
                "particles", "init", "jitter", "threads"},
}

SCENARIO_DIR = Path(__file__).parent / "scenarios"


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str = "<config>"):
        self.line = line
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)


def parse_text(text: str, source: str = "<config>") -> dict:
    """Parse config text into ``{section: {key: [(value, line), ...]}}``."""
    sections: dict = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {raw.strip()!r}", lineno, source)
            current = line[1:-1].strip()
            if current not in SCHEMA:
                raise ConfigError(f"unknown section [{current}]", lineno, source)
            if current in sections:
                raise ConfigError(f"duplicate section [{current}]", lineno, source)
            sections[current] = {}
            continue
        if current is None:
            raise ConfigError("key outside of any section", lineno, source)
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno, source)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in SCHEMA[current]:
            raise ConfigError(f"unknown key {key!r} in [{current}]", lineno, source)
        entries = sections[current].setdefault(key, [])
        if entries and (current, key) not in REPEATABLE:
            raise ConfigError(f"duplicate key {key!r} in [{current}]", lineno, source)
        entries.append((value, lineno))
    return sections


class _Reader:
    def __init__(self, sections: dict, source: str):
        self.sections = sections
        self.source = source

    def _entries(self, section, key):
        return self.sections.get(section, {}).get(key, [])

    def _convert(self, section, key, value, line, conv):
        try:
            return conv(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[{section}] {key}: {exc}", line, self.source) from None

    def get(self, section, key, conv, default=None, required=False):
        entries = self._entries(section, key)
        if not entries:
            if required:
                raise ConfigError(f"missing required key {key!r} in [{section}]",
                                  source=self.source)
            return default
        value, line = entries[0]
        return self._convert(section, key, value, line, conv)

    def get_all(self, section, key, conv):
        return [self._convert(section, key, v, ln, conv) for v, ln in self._entries(section, key)]

    def line_of(self, section, key):
        entries = self._entries(section, key)
        return entries[0][1] if entries else None


def _floats(n=None):
    def conv(text):
        vals = [float(tok) for tok in text.split(",") if tok.strip()]
        if n is not None and len(vals) != n:
            raise ValueError(f"expected {n} numbers, got {len(vals)}")
        if not all(np.isfinite(vals)):
            raise ValueError("values must be finite")
        return vals
    return conv


def _int(text):
    try:
        return int(text)
    except ValueError:
        raise ValueError(f"expected an integer, got {text!r}") from None


def _bandwidth(text):
    text = text.strip()
    return "median" if text == "median" else float(text)


def _choice(*options):
    def conv(text):
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {text!r}")
        return text
    return conv


def _sphere(text):
    link, offset, radius = _floats(3)(text)
    if link != int(link):
        raise ValueError("sphere link index must be an integer")
    return CollisionSphere(int(link), offset, radius)


def request_from_sections(sections: dict, source: str = "<config>") -> PlanRequest:
    r = _Reader(sections, source)

    def build(section, key, factory):
        try:
            return factory()
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            line = r.line_of(section, key) if key else None
            raise ConfigError(f"[{section}] {exc}", line, source) from None

    spec = build("state", "dof", lambda: StateSpec(
        r.get("state", "dof", _int, required=True),
        r.get("state", "num_support", _int, required=True),
        r.get("state", "dt", float, required=True),
    ))
    start = r.get("prior", "start", _floats(spec.state_dim), required=True)
    prior_spec = build("prior", "goal", lambda: PriorSpec(
        goal_pos=r.get("prior", "goal", _floats(spec.dof), required=True),
        q_c=r.get("prior", "q_c", float, 1.0),
        sigma_start=r.get("prior", "sigma_start", float, 1e-3),
        sigma_goal=r.get("prior", "sigma_goal", float, 1e-2),
    ))

    obstacles = [build("world", "circle", lambda c=c: Circle(c[:2], c[2]))
                 for c in r.get_all("world", "circle", _floats(3))]
    obstacles += [build("world", "box", lambda b=b: Box(b[:2], b[2:]))
                  for b in r.get_all("world", "box", _floats(4))]
    world = World2D(tuple(obstacles), tuple(r.get("world", "bounds", _floats(4),
                                                  [-10.0, -10.0, 10.0, 10.0])))

    kind = r.get("robot", "kind", _choice("point", "planar_arm"), "point")
    if kind == "point":
        for key in ("link_lengths", "base", "sphere"):
            if r.line_of("robot", key) is not None:
                raise ConfigError(f"key {key!r} does not apply to a point robot",
                                  r.line_of("robot", key), source)
        model = build("robot", "radius", lambda: RobotModel.point(r.get("robot", "radius", float, 0.0)))
    else:
        if r.line_of("robot", "radius") is not None:
            raise ConfigError("use 'sphere' entries to give an arm collision geometry",
                              r.line_of("robot", "radius"), source)
        model = build("robot", "link_lengths", lambda: RobotModel(
            "planar_arm",
            tuple(r.get("robot", "link_lengths", _floats(), required=True)),
            tuple(r.get_all("robot", "sphere", _sphere)),
            tuple(r.get("robot", "base", _floats(2), [0.0, 0.0])),
        ))
    if model.dof != spec.dof:
        raise ConfigError(f"robot has {model.dof} dof but [state] dof = {spec.dof}",
                          r.line_of("state", "dof"), source)

    obstacle = build("obstacle", "eps", lambda: ObstacleParams(
        r.get("obstacle", "eps", float, 0.2), r.get("obstacle", "sigma_obs", float, 0.1)))

    config = build("planner", None, lambda: PlannerConfig(
        lam=r.get("planner", "lambda", float, 1.0),
        step_size=r.get("planner", "step_size", float, 1.0),
        max_iters=r.get("planner", "max_iters", _int, 100),
        update_tol=r.get("planner", "update_tol", float, 1e-6),
        bandwidth=r.get("planner", "bandwidth", _bandwidth, "median"),
        seed=r.get("planner", "seed", _int, 0),
    ))
    return build("planner", None, lambda: PlanRequest(
        spec=spec,
        prior_spec=prior_spec,
        start=np.array(start),
        world=world,
        model=model,
        obstacle=obstacle,
        config=config,
        n_particles=r.get("planner", "particles", _int, 8),
        init_mode=r.get("planner", "init", _choice("prior", "straight"), "prior"),
        init_jitter=r.get("planner", "jitter", float, 0.0),
        threads=r.get("planner", "threads", _int, 1),
    ))


def loads(text: str, source: str = "<config>") -> PlanRequest:
    return request_from_sections(parse_text(text, source), source)


def load(path) -> PlanRequest:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", source=str(path)) from None
    return loads(text, str(path))


def load_scenario(name: str) -> PlanRequest:
    """Load one of the bundled scenarios (``free2d``, ``one_circle``, ``three_circle``)."""
    return load(SCENARIO_DIR / f"{name}.cfg")


def fmt(x) -> str:
    """17 significant digits, enough to round-trip any double."""
    return format(float(x), ".17g")


def _join(vals) -> str:
    return ", ".join(fmt(v) for v in vals)


def dumps(req: PlanRequest) -> str:
    """Serialize a request back to config text; ``loads(dumps(r))`` reproduces ``r``."""
    s, p, cfg = req.spec, req.prior_spec, req.config
    lines = [
        "[state]",
        f"dof = {s.dof}",
        f"num_support = {s.num_support}",
        f"dt = {fmt(s.dt)}",
        "",
        "[prior]",
        f"start = {_join(req.start)}",
        f"goal = {_join(p.goal_pos)}",
        f"q_c = {fmt(p.q_c)}",
        f"sigma_start = {fmt(p.sigma_start)}",
        f"sigma_goal = {fmt(p.sigma_goal)}",
        "",
        "[world]",
        f"bounds = {_join(req.world.bounds)}",
    ]
    for obs in req.world.obstacles:
        if isinstance(obs, Circle):
            lines.append(f"circle = {_join(list(obs.center) + [obs.radius])}")
        else:
            lines.append(f"box = {_join(list(obs.lo) + list(obs.hi))}")
    lines += ["", "[robot]", f"kind = {req.model.kind}"]
    if req.model.kind == "point":
        lines.append(f"radius = {fmt(req.model.spheres[0].radius)}")
    else:
        lines.append(f"link_lengths = {_join(req.model.link_lengths)}")
        lines.append(f"base = {_join(req.model.base)}")
        for sph in req.model.spheres:
            lines.append(f"sphere = {sph.link}, {fmt(sph.offset)}, {fmt(sph.radius)}")
    bandwidth = cfg.bandwidth if cfg.bandwidth == "median" else fmt(cfg.bandwidth)
    lines += [
        "",
        "[obstacle]",
        f"eps = {fmt(req.obstacle.eps)}",
        f"sigma_obs = {fmt(req.obstacle.sigma_obs)}",
        "",
        "[planner]",
        f"lambda = {fmt(cfg.lam)}",
        f"step_size = {fmt(cfg.step_size)}",
        f"max_iters = {cfg.max_iters}",
        f"update_tol = {fmt(cfg.update_tol)}",
        f"bandwidth = {bandwidth}",
        f"seed = {cfg.seed}",
        f"particles = {req.n_particles}",
        f"init = {req.init_mode}",
        f"jitter = {fmt(req.init_jitter)}",
        f"threads = {req.threads}",
    ]
    return "\n".join(lines) + "\n"
