"""Experiment configuration: INI-style files with four named sections.

A config declares the problem by catalog names plus numeric parameters,
the solver controls, an optional stability block, and output settings::

    [problem]
    psi = identity
    alpha = 0.5
    beta = 1.0
    b = 1.0
    r = 0.5
    u0 = 1.0
    f = linear
    f_c1 = 0.05
    f_c2 = 0.05
    f_c3 = 0.05
    h = linear
    h_d1 = 0.1
    h_d2 = 0.1
    g = constant_lag
    g_lag = 0.5
    phi = cosine
    lip_f = 0.05
    lip_h = 0.1

    [solve]
    grid_size = 1000
    tol = 1e-10

    [stability]
    shapes = constant, sinusoid, square_wave
    epsilons = 1e-2, 1e-3

    [output]
    directory = out
    format = csv
    seed = 0

Catalog parameters use the ``<slot>_<name>`` key convention shown above.
Parse or validation failures raise :class:`ConfigError` with a
section/key diagnostic.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

from .catalog import make_f, make_g, make_h, make_phi, make_psi
from .errors import ConfigError
from .picard_solver import SolveConfig
from .problem_model import DelayFFIDE, FractionalOrder, validate_problem
from .stability_lab import Perturbation

_SOLVE_KEYS = {
    "grid_size",
    "inner_quad_nodes",
    "tol",
    "max_iter",
    "norm",
    "bielecki_delta",
    "uniform_in",
    "history_size",
}
_STABILITY_KEYS = {"shapes", "epsilons", "frequency", "modes"}
_OUTPUT_KEYS = {"directory", "format", "seed"}
_PROBLEM_SCALARS = {"alpha", "beta", "b", "r", "u0", "lip_f", "lip_h"}
_PROBLEM_SLOTS = ("psi", "f", "h", "g", "phi")


@dataclass
class ExperimentConfig:
    """Validated experiment description ready to run."""

    problem: DelayFFIDE
    solve: SolveConfig
    perturbations: list[Perturbation] = field(default_factory=list)
    out_dir: str = "out"
    out_format: str = "csv"
    seed: int = 0


def _float(section: configparser.SectionProxy, key: str, default=None) -> float:
    raw = section.get(key)
    if raw is None:
        if default is None:
            raise ConfigError(f"[{section.name}] missing required key '{key}'")
        return float(default)
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section.name}] {key}: expected a number, got {raw!r}") from exc


def _int(section: configparser.SectionProxy, key: str, default: int) -> int:
    raw = section.get(key)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section.name}] {key}: expected an integer, got {raw!r}") from exc


def _slot_params(section: configparser.SectionProxy, slot: str) -> dict:
    prefix = slot + "_"
    out = {}
    for key in section:
        if key.startswith(prefix) and key not in _PROBLEM_SCALARS:
            out[key[len(prefix):]] = _float(section, key)
    return out


def _check_unknown_keys(section: configparser.SectionProxy, allowed: set[str]) -> None:
    extra = sorted(set(section) - allowed)
    if extra:
        raise ConfigError(f"[{section.name}] unknown key(s): {extra}")


def _problem_from(section: configparser.SectionProxy) -> DelayFFIDE:
    slot_param_keys = {
        key for key in section
        if any(key.startswith(slot + "_") for slot in _PROBLEM_SLOTS)
        and key not in _PROBLEM_SCALARS
    }
    allowed = _PROBLEM_SCALARS | set(_PROBLEM_SLOTS) | slot_param_keys
    _check_unknown_keys(section, allowed)

    try:
        order = FractionalOrder(
            alpha=_float(section, "alpha"), beta=_float(section, "beta", 1.0)
        )
        psi = make_psi(section.get("psi", "identity"), **_slot_params(section, "psi"))
        f = make_f(section.get("f", "zero"), **_slot_params(section, "f"))
        h = make_h(section.get("h", "none"), **_slot_params(section, "h"))
        g = make_g(section.get("g", "no_delay"), **_slot_params(section, "g"))
        phi = make_phi(section.get("phi", "constant"), **_slot_params(section, "phi"))
        problem = DelayFFIDE(
            order=order,
            psi=psi,
            f=f,
            h_kernel=h,
            g=g,
            phi=phi,
            u0=_float(section, "u0"),
            b=_float(section, "b"),
            r=_float(section, "r"),
            lip_f=_float(section, "lip_f"),
            lip_h=_float(section, "lip_h", 0.0),
        )
        validate_problem(problem)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"[problem] {exc}") from exc
    return problem


def _solve_from(parser: configparser.ConfigParser) -> SolveConfig:
    if not parser.has_section("solve"):
        return SolveConfig()
    section = parser["solve"]
    _check_unknown_keys(section, _SOLVE_KEYS)
    norm = section.get("norm", "weighted")
    uniform_in = section.get("uniform_in", "psi")
    try:
        return SolveConfig(
            grid_size=_int(section, "grid_size", 1000),
            inner_quad_nodes=_int(section, "inner_quad_nodes", 64),
            tol=_float(section, "tol", 1e-10),
            max_iter=_int(section, "max_iter", 200),
            norm_kind=norm,
            bielecki_delta=_float(section, "bielecki_delta", 0.0),
            grid_uniform_in=uniform_in,
            history_size=_int(section, "history_size", 128),
        )
    except ValueError as exc:
        raise ConfigError(f"[solve] {exc}") from exc


def _split_list(section: configparser.SectionProxy, key: str) -> list[str]:
    raw = section.get(key, "")
    return [item.strip() for item in raw.split(",") if item.strip()]


def _perturbations_from(parser: configparser.ConfigParser, seed: int) -> list[Perturbation]:
    if not parser.has_section("stability"):
        return []
    section = parser["stability"]
    _check_unknown_keys(section, _STABILITY_KEYS)
    shapes = _split_list(section, "shapes")
    eps_raw = _split_list(section, "epsilons")
    if not shapes or not eps_raw:
        raise ConfigError("[stability] needs non-empty 'shapes' and 'epsilons' lists")
    frequency = _float(section, "frequency", 2.0 * 3.141592653589793)
    modes = _int(section, "modes", 4)
    perts = []
    for shape in shapes:
        for raw in eps_raw:
            try:
                eps = float(raw)
            except ValueError as exc:
                raise ConfigError(f"[stability] epsilons: bad number {raw!r}") from exc
            try:
                perts.append(
                    Perturbation(
                        epsilon=eps, shape=shape, frequency=frequency, seed=seed, modes=modes
                    )
                )
            except ValueError as exc:
                raise ConfigError(f"[stability] {exc}") from exc
    return perts


def parse_config(path: str) -> ExperimentConfig:
    """Read and validate an experiment config file."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path!r}")
    known = {"problem", "solve", "stability", "output"}
    extra = sorted(set(parser.sections()) - known)
    if extra:
        raise ConfigError(f"unknown section(s): {extra}; expected {sorted(known)}")
    if not parser.has_section("problem"):
        raise ConfigError("missing required section [problem]")

    out_dir, out_format, seed = "out", "csv", 0
    if parser.has_section("output"):
        section = parser["output"]
        _check_unknown_keys(section, _OUTPUT_KEYS)
        out_dir = section.get("directory", "out")
        out_format = section.get("format", "csv")
        if out_format not in ("csv", "json"):
            raise ConfigError(f"[output] format must be csv or json, got {out_format!r}")
        seed = _int(section, "seed", 0)

    problem = _problem_from(parser["problem"])
    solve_cfg = _solve_from(parser)
    perts = _perturbations_from(parser, seed)
    return ExperimentConfig(
        problem=problem,
        solve=solve_cfg,
        perturbations=perts,
        out_dir=out_dir,
        out_format=out_format,
        seed=seed,
    )
