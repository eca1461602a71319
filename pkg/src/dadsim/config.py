"""Scenario files and the built-in benchmark presets.

Scenario files are INI documents::

    [plant]
    name = double_integrator

    [clf]
    name = double_integrator
    c = 0.5

    [controller]
    kind = dads            ; dads | sigma_mod | open_loop
    variant = simplified
    epsilon = 0.005
    gamma = 20.0
    C = 1.0
    kappa = 0.1

    [initial]
    y0 = 1.0, 0.0
    rho0 = 0.11

    [disturbance]
    d = sin 2.0 1.0 0.0 0.0
    theta = const 1.0, const 1.0
    b = const 0.01

    [sim]
    T = 100.0
    dt = 0.0001
    blowup_threshold = 100000000.0
    seed = 0

    [output]
    directory = out/dads-sin
    stride = 100

Keys are case-sensitive. Signal descriptors are ``zero``, ``const v``,
``sin amplitude [omega [phase [offset]]]`` and ``pwc t0:v0 t1:v1 ...``;
vector signals separate components with commas.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass
from pathlib import Path

from .baseline import SigmaModParams
from .clf import double_integrator_clf
from .dads import DadsParams
from .errors import ConfigurationError, DadsError
from .sim import Scenario
from .systems import (
    ConstantSignal,
    DisturbanceProfile,
    SinusoidSignal,
    ZeroSignal,
    double_integrator_plant,
    format_vector_signal,
    parse_vector_signal,
)

__all__ = [
    "PRESETS",
    "ScenarioFile",
    "run_preset",
    "parse_scenario",
    "load_scenario_file",
    "format_scenario",
    "write_scenario",
    "resolve_scenario",
]

PLANTS = {"double_integrator": double_integrator_plant}
CLFS = {"double_integrator": double_integrator_clf}

_SCHEMA = {
    "plant": ({"name"}, set()),
    "clf": ({"name"}, {"c"}),
    "controller": ({"kind"}, {"variant", "epsilon", "gamma", "C", "kappa", "sigma_bar"}),
    "initial": ({"y0"}, {"rho0", "thetahat0"}),
    "disturbance": ({"d", "theta", "b"}, set()),
    "sim": ({"T", "dt"}, {"blowup_threshold", "seed"}),
    "output": (set(), {"directory", "stride"}),
}
_REQUIRED_SECTIONS = ("plant", "controller", "initial", "disturbance", "sim")
_CONTROLLER_KEYS = {
    "dads": {"variant", "epsilon", "gamma", "C", "kappa"},
    "sigma_mod": {"sigma_bar", "gamma"},
    "open_loop": set(),
}

# benchmark constants
_C, _GAMMA, _EPS, _CDAMP, _KAPPA = 0.5, 20.0, 0.005, 1.0, 0.1
_SIGMA_LEAK = 0.2
PRESETS = ("c1-noleak-0", "c1-leak-0", "dads-0", "c1-noleak-sin", "c1-leak-sin", "dads-sin")


@dataclass(frozen=True)
class ScenarioFile:
    scenario: Scenario
    output_dir: str | None = None
    stride: int = 100


def run_preset(name: str) -> Scenario:
    """Scenario for one of the six double-integrator benchmark configurations."""
    if name not in PRESETS:
        raise ConfigurationError(f"unknown preset {name!r}; valid presets: {', '.join(PRESETS)}")
    ctrl_name, _, dist = name.rpartition("-")
    d = ZeroSignal() if dist == "0" else SinusoidSignal(2.0, 1.0, 0.0, 0.0)
    if ctrl_name == "dads":
        controller = DadsParams(_EPS, _GAMMA, _CDAMP, _KAPPA, "simplified")
        thetahat0 = None
    else:
        sigma_bar = 0.0 if ctrl_name == "c1-noleak" else _SIGMA_LEAK
        controller = SigmaModParams(sigma_bar, _GAMMA, _C)
        thetahat0 = (0.0, 0.0)
    return Scenario(
        plant=double_integrator_plant(),
        clf=double_integrator_clf(_C),
        controller=controller,
        y0=(1.0, 0.0),
        rho0=0.11,
        thetahat0=thetahat0,
        disturbance=DisturbanceProfile(
            d=(d,), theta=(ConstantSignal(1.0), ConstantSignal(1.0)), b=(ConstantSignal(0.01),)
        ),
        T=100.0,
        dt=1e-4,
        blowup_threshold=1e8,
        seed=0,
        name=name,
    )


def _float(section, key):
    raw = section[key]
    try:
        return float(raw)
    except ValueError:
        raise ConfigurationError(f"[{section.name}] {key} = {raw!r} is not a number") from None


def _floats(section, key):
    try:
        return tuple(float(v) for v in section[key].split(","))
    except ValueError:
        raise ConfigurationError(f"[{section.name}] {key} = {section[key]!r} is not a list of numbers") from None


def _check_keys(cp):
    for sec in cp.sections():
        if sec not in _SCHEMA:
            raise ConfigurationError(f"unknown section [{sec}]")
        required, optional = _SCHEMA[sec]
        keys = set(cp[sec])
        unknown = keys - required - optional
        if unknown:
            raise ConfigurationError(f"unknown key(s) in [{sec}]: {', '.join(sorted(unknown))}")
        missing = required - keys
        if missing:
            raise ConfigurationError(f"missing key(s) in [{sec}]: {', '.join(sorted(missing))}")
    for sec in _REQUIRED_SECTIONS:
        if not cp.has_section(sec):
            raise ConfigurationError(f"missing section [{sec}]")


def _controller(cp, clf):
    sec = cp["controller"]
    kind = sec["kind"]
    if kind not in _CONTROLLER_KEYS:
        raise ConfigurationError(
            f"unknown controller kind {kind!r}; expected one of {', '.join(_CONTROLLER_KEYS)}"
        )
    needed = _CONTROLLER_KEYS[kind]
    present = set(sec) - {"kind"}
    if needed - present:
        raise ConfigurationError(f"missing key(s) in [controller] for kind {kind}: {', '.join(sorted(needed - present))}")
    if present - needed:
        raise ConfigurationError(f"key(s) not used by kind {kind}: {', '.join(sorted(present - needed))}")
    if kind == "dads":
        return DadsParams(
            epsilon=_float(sec, "epsilon"),
            gamma=_float(sec, "gamma"),
            C=_float(sec, "C"),
            kappa=_float(sec, "kappa"),
            variant=sec["variant"],
        )
    if kind == "sigma_mod":
        if clf is None or clf.name != "double_integrator":
            raise ConfigurationError("kind sigma_mod takes its slope c from a double_integrator [clf] section")
        return SigmaModParams(_float(sec, "sigma_bar"), _float(sec, "gamma"), dict(clf.params)["c"])
    return None


def _read(text: str, origin: str) -> ScenarioFile:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    try:
        cp.read_string(text, source=origin)
    except configparser.Error as exc:
        raise ConfigurationError(f"{origin}: {exc}") from None
    _check_keys(cp)

    plant_name = cp["plant"]["name"]
    if plant_name not in PLANTS:
        raise ConfigurationError(f"unknown plant {plant_name!r}; available: {', '.join(PLANTS)}")
    plant = PLANTS[plant_name]()

    clf = None
    if cp.has_section("clf"):
        sec = cp["clf"]
        if sec["name"] not in CLFS:
            raise ConfigurationError(f"unknown clf {sec['name']!r}; available: {', '.join(CLFS)}")
        if "c" not in sec:
            raise ConfigurationError("missing key(s) in [clf]: c")
        clf = CLFS[sec["name"]](_float(sec, "c"))

    controller = _controller(cp, clf)
    init = cp["initial"]
    dist = cp["disturbance"]
    sim = cp["sim"]
    try:
        profile = DisturbanceProfile(
            d=parse_vector_signal(dist["d"]),
            theta=parse_vector_signal(dist["theta"]),
            b=parse_vector_signal(dist["b"]),
        )
        scenario = Scenario(
            plant=plant,
            clf=clf,
            controller=controller,
            y0=_floats(init, "y0"),
            rho0=_float(init, "rho0") if "rho0" in init else None,
            thetahat0=_floats(init, "thetahat0") if "thetahat0" in init else None,
            disturbance=profile,
            T=_float(sim, "T"),
            dt=_float(sim, "dt"),
            blowup_threshold=_float(sim, "blowup_threshold") if "blowup_threshold" in sim else 1e8,
            seed=int(sim.get("seed", "0")),
            name=Path(origin).stem,
        )
    except ConfigurationError:
        raise
    except (DadsError, ValueError) as exc:
        raise ConfigurationError(f"{origin}: {exc}") from None

    out_dir, stride = None, 100
    if cp.has_section("output"):
        out_dir = cp["output"].get("directory")
        if "stride" in cp["output"]:
            try:
                stride = int(cp["output"]["stride"])
            except ValueError:
                raise ConfigurationError("[output] stride must be an integer") from None
            if stride < 1:
                raise ConfigurationError("[output] stride must be >= 1")
    return ScenarioFile(scenario, out_dir, stride)


def load_scenario_file(path) -> ScenarioFile:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read scenario file {path}: {exc}") from None
    return _read(text, str(path))


def parse_scenario(path) -> Scenario:
    """Read and validate a scenario file."""
    return load_scenario_file(path).scenario


def _r(x):
    return repr(float(x))


def format_scenario(scenario: Scenario, output_dir=None, stride: int = 100) -> str:
    sc = scenario
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    cp["plant"] = {"name": sc.plant.name}
    if sc.clf is not None:
        cp["clf"] = {"name": sc.clf.name, **{k: _r(v) for k, v in sc.clf.params}}
    if sc.kind == "dads":
        p = sc.controller
        cp["controller"] = {
            "kind": "dads", "variant": p.variant, "epsilon": _r(p.epsilon),
            "gamma": _r(p.gamma), "C": _r(p.C), "kappa": _r(p.kappa),
        }
    elif sc.kind == "sigma_mod":
        p = sc.controller
        cp["controller"] = {"kind": "sigma_mod", "sigma_bar": _r(p.sigma_bar), "gamma": _r(p.gamma)}
    else:
        cp["controller"] = {"kind": "open_loop"}
    init = {"y0": ", ".join(_r(v) for v in sc.y0)}
    if sc.rho0 is not None:
        init["rho0"] = _r(sc.rho0)
    if sc.thetahat0 is not None:
        init["thetahat0"] = ", ".join(_r(v) for v in sc.thetahat0)
    cp["initial"] = init
    prof = sc.disturbance
    cp["disturbance"] = {
        "d": format_vector_signal(prof.d),
        "theta": format_vector_signal(prof.theta),
        "b": format_vector_signal(prof.b),
    }
    cp["sim"] = {
        "T": _r(sc.T), "dt": _r(sc.dt),
        "blowup_threshold": _r(sc.blowup_threshold), "seed": str(sc.seed),
    }
    out = {"stride": str(stride)}
    if output_dir is not None:
        out["directory"] = str(output_dir)
    cp["output"] = out
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def write_scenario(scenario: Scenario, path, output_dir=None, stride: int = 100) -> Path:
    path = Path(path)
    path.write_text(format_scenario(scenario, output_dir, stride))
    return path


def resolve_scenario(target: str) -> ScenarioFile:
    """Accept either a preset name or a path to a scenario file."""
    if target in PRESETS:
        return ScenarioFile(run_preset(target), None, 100)
    if Path(target).is_file():
        return load_scenario_file(target)
    raise ConfigurationError(
        f"{target!r} is neither a scenario file nor a preset; valid presets: {', '.join(PRESETS)}"
    )
