"""Batch command-line front end.

Every command reads a :class:`RunConfig` (defaults, then an INI file, then
flags), writes ``result.json`` plus CSV data and an SVG plot under ``--out``,
and echoes the effective configuration as ``effective_config.ini``.

Exit status is 0 on success, 1 on a domain error (the JSON result then holds
an ``error`` field) and 2 on a usage or configuration error.
"""

from __future__ import annotations

import argparse
import configparser
import io as _stdio
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .connections import SearchConfig, find_homoclinic, find_tpoint, path_scan
from .core import Params, fixed_points
from .errors import ConfigError, LorenzLabError, NotPrimitive, SectionInvalid
from .integrator import IntegratorConfig, integrate
from .io import atomic_write_text, csv_text, dumps, write_json
from .knots import (
    as_word,
    axis_closure,
    find_periodic_orbit,
    find_periodic_orbits,
    gauss_linking,
    lorenz_braid,
    orbit_polyline,
    primitive_words,
    template_check,
)
from .manifolds import kneading_sequence, winding_numbers
from .section import SectionSpec, build_section, trapping_box, validate_transversality, validate_trapping

COMMANDS = ("simulate", "section-map", "kneading", "find-homoclinic", "find-tpoint", "periodic", "braid", "validate")

# ------------------------------------------------------------------ value parsers


def _positive(key, text):
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {text!r}") from None
    if not (math.isfinite(v) and v > 0):
        raise ConfigError(f"{key}: must be a positive finite number, got {text!r}")
    return v


def _optional_positive(key, text):
    if str(text).strip().lower() in ("", "none", "auto"):
        return None
    return _positive(key, text)


def _nonneg(key, text):
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {text!r}") from None
    if not (math.isfinite(v) and v >= 0):
        raise ConfigError(f"{key}: must be a non-negative finite number, got {text!r}")
    return v


def _count(key, text, lo=1):
    try:
        v = int(str(text).strip())
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {text!r}") from None
    if v < lo:
        raise ConfigError(f"{key}: must be >= {lo}, got {v}")
    return v


def _vector(n):
    def parse(key, text):
        parts = [t for t in str(text).replace(" ", "").split(",") if t]
        if len(parts) != n:
            raise ConfigError(f"{key}: expected {n} comma-separated numbers, got {text!r}")
        try:
            vals = tuple(float(t) for t in parts)
        except ValueError:
            raise ConfigError(f"{key}: expected {n} comma-separated numbers, got {text!r}") from None
        if not all(math.isfinite(v) for v in vals):
            raise ConfigError(f"{key}: values must be finite, got {text!r}")
        return vals

    return parse


def _side(key, text):
    v = str(text).strip().lower()
    if v not in ("plus", "minus"):
        raise ConfigError(f"{key}: must be 'plus' or 'minus', got {text!r}")
    return v


def _signature(key, text):
    v = str(text).strip().lower()
    if v not in ("section", "loop"):
        raise ConfigError(f"{key} must be 'section' or 'loop', got {text!r}")
    return v


def _word(key, text):
    v = str(text).strip().upper()
    if v and set(v) - {"A", "B"}:
        raise ConfigError(f"{key}: words use only the letters A and B, got {text!r}")
    return v


def _index(key, text):
    return _count(key, text, lo=0)


def _flag(key, text):
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {text!r}")


def _text(key, text):
    return str(text)


# section -> key -> (parser, default)
SCHEMA = {
    "params": {"sigma": (_positive, 10.0), "rho": (_positive, 28.0), "beta": (_positive, 8.0 / 3.0)},
    "integrator": {
        "rel_tol": (_positive, 1e-10),
        "abs_tol": (_positive, 1e-12),
        "max_step": (_positive, 0.05),
        "max_time": (_positive, 100.0),
        "event_tol": (_positive, 1e-12),
    },
    "section": {
        "epsilon": (_optional_positive, None),
        "ellipsoid_radius": (_positive, 1000.0),
        "tangency_margin": (_positive, 1e-6),
    },
    "search": {
        "param_tol": (_positive, 1e-6),
        "residual_tol": (_positive, 1e-6),
        "max_iters": (_count, 200),
        "match_factor": (_positive, 1e-2),
        "simplex_step": (_positive, 0.02),
        "fd_step": (_positive, 1e-6),
    },
    "output": {"out": (_text, "lorenz_lab_out"), "plot": (_flag, True)},
    "simulate": {"start": (_vector(3), (1.0, 1.0, 1.0)), "duration": (_positive, 50.0), "transient": (_nonneg, 0.0)},
    "section-map": {"grid_n": (_count, 200), "template": (_flag, True)},
    "kneading": {"n": (_count, 20), "side": (_side, "plus"), "scan_to_rho": (_optional_positive, None), "scan_n": (_count, 50)},
    "find-homoclinic": {
        "bracket": (_vector(2), (13.0, 15.0)), "side": (_side, "plus"),
        "crossing": (_count, 1),
        "signature": (_signature, "section"),
    },
    "find-tpoint": {"guess": (_vector(2), (30.8, 10.2)), "side": (_side, "plus")},
    "periodic": {
        "word": (_word, ""),
        "max_len": (_count, 5),
        "min_len": (_count, 2),
        "seed_time": (_positive, 500.0),
        "tol": (_positive, 1e-9),
    },
    "braid": {"word": (_word, "AB"), "linking": (_flag, False)},
    "validate": {"n_samples": (_count, 10000), "trapping_radius": (_positive, 1000.0), "seed": (_index, 0)},
}

# flag dest -> (section, key); command sections are resolved at parse time
FLAG_KEYS = {
    "sigma": ("params", "sigma"),
    "rho": ("params", "rho"),
    "beta": ("params", "beta"),
    "rtol": ("integrator", "rel_tol"),
    "atol": ("integrator", "abs_tol"),
    "max_step": ("integrator", "max_step"),
    "max_time": ("integrator", "max_time"),
    "epsilon": ("section", "epsilon"),
    "out": ("output", "out"),
}

COMMAND_FLAGS = {
    "simulate": ["start", "duration", "transient"],
    "section-map": ["grid_n", "template"],
    "kneading": ["n", "side", "scan_to_rho", "scan_n"],
    "find-homoclinic": ["bracket", "side", "crossing", "signature"],
    "find-tpoint": ["guess", "side"],
    "periodic": ["word", "max_len", "min_len", "seed_time", "tol"],
    "braid": ["word", "linking"],
    "validate": ["n_samples", "trapping_radius", "seed"],
}


def _parse_value(section, key, text):
    return SCHEMA[section][key][0](f"{section}.{key}", text)


def _format_value(v):
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ",".join(repr(float(x)) for x in v)
    return str(v)


# ------------------------------------------------------------------ RunConfig


@dataclass
class RunConfig:
    """Everything a run depends on; serializes to and from INI text."""

    command: str
    values: dict = field(default_factory=dict)

    @property
    def params(self):
        return Params(**self.values["params"])

    @property
    def integrator(self):
        return IntegratorConfig(**self.values["integrator"])

    @property
    def section_spec(self):
        v = self.values["section"]
        return SectionSpec(epsilon=v["epsilon"], ellipsoid_radius=v["ellipsoid_radius"], tangency_margin=v["tangency_margin"])

    @property
    def search(self):
        return SearchConfig(**self.values["search"])

    @property
    def out(self):
        return Path(self.values["output"]["out"])

    @property
    def options(self):
        return self.values[self.command]

    def to_ini(self):
        cp = configparser.ConfigParser(interpolation=None)
        for section in ("params", "integrator", "section", "search", "output", self.command):
            cp[section] = {k: _format_value(v) for k, v in self.values[section].items()}
        buf = _stdio.StringIO()
        buf.write(f"# effective configuration for: lorenz-lab {self.command}\n")
        cp.write(buf)
        return buf.getvalue()


def default_values():
    return {sec: {k: spec[1] for k, spec in keys.items()} for sec, keys in SCHEMA.items()}


def parse_config(command, path=None, overrides=None):
    """Merge defaults, an optional INI file and flag overrides into a RunConfig.

    ``overrides`` maps ``(section, key)`` to raw text (or already-typed)
    values. Unknown sections or keys and invalid values raise
    :class:`ConfigError`.
    """
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    values = default_values()
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        cp = configparser.ConfigParser(interpolation=None)
        try:
            cp.read(path, encoding="utf-8")
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from None
        for section in cp.sections():
            if section not in SCHEMA:
                raise ConfigError(f"unknown config section [{section}]")
            for key, text in cp[section].items():
                if key not in SCHEMA[section]:
                    raise ConfigError(f"unknown config key {section}.{key}")
                values[section][key] = _parse_value(section, key, text)
    for (section, key), raw in (overrides or {}).items():
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigError(f"unknown config key {section}.{key}")
        values[section][key] = _parse_value(section, key, raw) if isinstance(raw, str) else raw
    cfg = RunConfig(command, values)
    # constructing the typed objects surfaces cross-field problems early
    try:
        cfg.params, cfg.integrator, cfg.search
    except (ValueError, LorenzLabError) as exc:
        raise ConfigError(str(exc)) from None
    return cfg


# ------------------------------------------------------------------ plots


def _plot(path, p: Params, curves, title, points=None):
    """Static x-z and x-y projections with axes fixed by the trapping ellipsoid."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    lo, hi = trapping_box(p)
    with matplotlib.rc_context({"svg.hashsalt": "lorenz-lab", "svg.fonttype": "none"}):
        fig, axes = plt.subplots(1, 2, figsize=(10, 4.5))
        fps = fixed_points(p)
        for ax, (i, j), lab in zip(axes, [(0, 2), (0, 1)], [("x", "z"), ("x", "y")]):
            for k, (label, c) in enumerate(curves):
                c = np.asarray(c)
                ax.plot(c[:, i], c[:, j], lw=0.6, color=f"C{k}", label=label)
            if points is not None and len(points):
                pts = np.asarray(points)
                ax.plot(pts[:, i], pts[:, j], ".", ms=2, color="k")
            for c in (fps.origin, fps.p_plus, fps.p_minus):
                ax.plot(c[i], c[j], "+", color="r", ms=6)
            ax.set_xlim(lo[i], hi[i])
            ax.set_ylim(lo[j], hi[j])
            ax.set_xlabel(lab[0])
            ax.set_ylabel(lab[1])
        if curves:
            axes[0].legend(loc="upper right", fontsize=7)
        fig.suptitle(title, fontsize=9)
        buf = _stdio.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    atomic_write_text(path, buf.getvalue())


# ------------------------------------------------------------------ commands


def _params_record(p: Params):
    return {"sigma": p.sigma, "rho": p.rho, "beta": p.beta}


def _traj_csv(path, traj):
    rows = np.column_stack([traj.physical_times, traj.states])
    atomic_write_text(path, csv_text(["t", "x", "y", "z"], rows))


def cmd_simulate(cfg: RunConfig):
    p, icfg, opt = cfg.params, cfg.integrator, cfg.options
    start = np.array(opt["start"], dtype=float)
    if opt["transient"] > 0:
        start = integrate(p, start, (0.0, opt["transient"]), icfg.with_max_time(opt["transient"] + 1)).end
    dur = opt["duration"]
    traj = integrate(p, start, (0.0, dur), icfg.with_max_time(dur + 1))
    _traj_csv(cfg.out / "trajectory.csv", traj)
    result = {
        "command": "simulate",
        "params": _params_record(p),
        "start": start,
        "duration": dur,
        "steps": len(traj) - 1,
        "final_state": traj.end,
    }
    if cfg.values["output"]["plot"]:
        _, pts = traj.sample()
        _plot(cfg.out / "trajectory.svg", p, [("orbit", pts)], f"orbit from {tuple(opt['start'])}, t = {dur:g}")
    return result


def cmd_section_map(cfg: RunConfig):
    p, icfg, opt = cfg.params, cfg.integrator, cfg.options
    sec = build_section(p, cfg.section_spec, validate=False)
    rep = template_check(p, sec, opt["grid_n"], icfg)
    rows = []
    for side, img in sorted(rep.images.items()):
        for q in np.asarray(img):
            rows.append([side] + [format(float(v), ".17g") for v in q])
    width = len(rows[0]) - 1 if rows else 2
    header = ["side"] + ["x", "y", "z"][:width]
    atomic_write_text(cfg.out / "section_map.csv", "\n".join([",".join(header)] + [",".join(r) for r in rows]) + "\n")
    result = {"command": "section-map", "params": _params_record(p), "template": rep.to_record()}
    if cfg.values["output"]["plot"]:
        curves = []
        pts = np.vstack([np.asarray(v) for v in rep.images.values()]) if rep.images else None
        if pts is not None and pts.shape[1] == 2:
            pts = np.array([sec.lift(q) for q in pts])
        _plot(cfg.out / "section_map.svg", p, curves, "return-map images of both sides", points=pts)
    if opt["template"] and not rep.passed:
        result["error"] = "TemplateCheckFailed"
        result["message"] = "images overlap or miss a symbol"
    return result


def cmd_kneading(cfg: RunConfig):
    p, icfg, opt = cfg.params, cfg.integrator, cfg.options
    sec = build_section(p, cfg.section_spec, validate=False)
    seq, traj = kneading_sequence(p, sec, opt["n"], icfg, side=opt["side"], record=True)
    _traj_csv(cfg.out / "separatrix.csv", traj)
    result = {"command": "kneading", "params": _params_record(p), "side": opt["side"], "sequence": seq.to_record()}
    if opt["scan_to_rho"] is not None:
        r0, r1 = p.rho, opt["scan_to_rho"]
        samples, sign_changes, prefix_changes = path_scan(
            lambda s: p.replace(rho=r0 + s * (r1 - r0)), opt["scan_n"], icfg, spec=cfg.section_spec
        )
        rows = [[s.s, s.params.rho, s.signature, s.sign] for s in samples]
        atomic_write_text(cfg.out / "scan.csv", csv_text(["s", "rho", "signature", "sign"], rows))
        result["scan"] = {
            "rho_from": r0,
            "rho_to": r1,
            "samples": [{"rho": s.params.rho, "prefix": s.prefix, "terminal": s.terminal, "sign": s.sign} for s in samples],
            "sign_changes": [[a, b] for a, b in sign_changes],
            "prefix_changes": [[a, b] for a, b in prefix_changes],
        }
    if cfg.values["output"]["plot"]:
        _, pts = traj.sample()
        _plot(cfg.out / "separatrix.svg", p, [(f"separatrix {opt['side']}", pts)], f"kneading {seq.word}")
    return result


def _connection_outputs(cfg, res, name):
    if res.arc is not None:
        _traj_csv(cfg.out / f"{name}.csv", res.arc)
        if cfg.values["output"]["plot"]:
            _, pts = res.arc.sample()
            _plot(cfg.out / f"{name}.svg", res.params, [(res.kind, pts)], f"{res.kind} connection")


def cmd_find_homoclinic(cfg: RunConfig):
    p, opt = cfg.params, cfg.options
    res = find_homoclinic(
        p.beta,
        p.sigma,
        opt["bracket"],
        cfg.integrator,
        cfg.search,
        side=opt["side"],
        crossing=opt["crossing"],
        signature=opt["signature"],
        spec=cfg.section_spec,
    )
    _connection_outputs(cfg, res, "homoclinic")
    return {"command": "find-homoclinic", **res.to_record()}


def cmd_find_tpoint(cfg: RunConfig):
    p, opt = cfg.params, cfg.options
    res = find_tpoint(p.beta, opt["guess"], cfg.integrator, cfg.search, side=opt["side"], spec=cfg.section_spec)
    _connection_outputs(cfg, res, "heteroclinic")
    return {"command": "find-tpoint", **res.to_record()}


def _orbit_rows(orbits, icfg):
    rows, curves = [], []
    for orb in orbits:
        traj = orb.trajectory(icfg)
        for t, s in zip(traj.physical_times, traj.states):
            rows.append([orb.word.letters, format(float(t), ".17g")] + [format(float(v), ".17g") for v in s])
        curves.append((orb.word.letters, traj.sample()[1]))
    return rows, curves


def cmd_periodic(cfg: RunConfig):
    p, icfg, opt = cfg.params, cfg.integrator, cfg.options
    sec = build_section(p, cfg.section_spec, validate=False)
    kw = {"seed_time": opt["seed_time"], "tol": opt["tol"]}
    if opt["word"]:
        w = as_word(opt["word"])
        if not w.primitive:
            raise NotPrimitive(f"{w.letters!r} is a proper power of a shorter word")
        found = {w.letters: find_periodic_orbit(p, sec, w, icfg, **kw)}
    else:
        words = primitive_words(opt["max_len"], opt["min_len"])
        found = find_periodic_orbits(p, sec, words, icfg, **kw)
    orbits = [v for v in found.values() if not isinstance(v, Exception)]
    failures = [{"word": k, "error": v.code, "message": str(v)} for k, v in found.items() if isinstance(v, Exception)]
    rows, curves = _orbit_rows(orbits, icfg)
    atomic_write_text(cfg.out / "orbits.csv", "\n".join([",".join(["word", "t", "x", "y", "z"])] + [",".join(r) for r in rows]) + "\n")
    if cfg.values["output"]["plot"]:
        _plot(cfg.out / "orbits.svg", p, curves[:12], f"{len(orbits)} periodic orbits")
    return {
        "command": "periodic",
        "params": _params_record(p),
        "orbits": [o.to_record() for o in orbits],
        "failures": failures,
    }


def cmd_braid(cfg: RunConfig):
    p, icfg, opt = cfg.params, cfg.integrator, cfg.options
    if not opt["word"]:
        raise ConfigError("braid needs a non-empty word")
    b = lorenz_braid(opt["word"])
    result = {
        "command": "braid",
        "word": b.word,
        "strands": len(b.word),
        "permutation": list(b.permutation),
        "crossing_count": b.crossing_count,
        "generators": list(b.generators),
        "braid_word": b.braid_word,
        "components": b.closure_components(),
    }
    if opt["linking"]:
        sec = build_section(p, cfg.section_spec, validate=False)
        orb = find_periodic_orbit(p, sec, b.word, icfg)
        poly = orbit_polyline(orb, icfg)
        wn = winding_numbers(poly, p, close=False)
        result["params"] = _params_record(p)
        result["orbit"] = orb.to_record()
        result["winding"] = {"plus": wn.n_plus, "minus": wn.n_minus}
        result["linking"] = {
            "plus": gauss_linking(poly, axis_closure(p, "plus")),
            "minus": gauss_linking(poly, axis_closure(p, "minus")),
        }
        rows, curves = _orbit_rows([orb], icfg)
        atomic_write_text(cfg.out / "orbit.csv", "\n".join(["word,t,x,y,z"] + [",".join(r) for r in rows]) + "\n")
        if cfg.values["output"]["plot"]:
            _plot(cfg.out / "orbit.svg", p, curves, f"orbit {b.word}")
    return result


def cmd_validate(cfg: RunConfig):
    p, opt = cfg.params, cfg.options
    sec = build_section(p, cfg.section_spec, validate=False)
    trans = validate_transversality(p, sec, opt["n_samples"], seed=opt["seed"], raise_on_fail=False)
    trap = validate_trapping(p, opt["trapping_radius"], opt["n_samples"], seed=opt["seed"], raise_on_fail=False)
    rows = [[r["part"], r["n_samples"], r["min_margin"], len(r["failures"])] for r in trans + [trap]]
    atomic_write_text(
        cfg.out / "validate.csv",
        "part,n_samples,min_margin,failures\n"
        + "".join(f"{a},{n},{format(float(m), '.17g')},{f}\n" for a, n, m, f in rows),
    )
    def strip(r):
        return {k: v for k, v in r.items() if k != "failures"} | {"failures": len(r["failures"]), "passed": not r["failures"]}

    result = {
        "command": "validate",
        "params": _params_record(p),
        "transversality": [strip(r) for r in trans],
        "trapping": strip(trap),
    }
    result["passed"] = all(r["passed"] for r in result["transversality"]) and result["trapping"]["passed"]
    if not result["passed"]:
        result["error"] = SectionInvalid.__name__
        result["message"] = "a transversality or trapping sample failed"
    return result


HANDLERS = {
    "simulate": cmd_simulate,
    "section-map": cmd_section_map,
    "kneading": cmd_kneading,
    "find-homoclinic": cmd_find_homoclinic,
    "find-tpoint": cmd_find_tpoint,
    "periodic": cmd_periodic,
    "braid": cmd_braid,
    "validate": cmd_validate,
}


def run_command(name, cfg: RunConfig):
    """Run one command, write its artifacts and return the exit status."""
    out = cfg.out
    out.mkdir(parents=True, exist_ok=True)
    atomic_write_text(out / "effective_config.ini", cfg.to_ini())
    try:
        result = HANDLERS[name](cfg)
    except ConfigError:
        raise
    except LorenzLabError as exc:
        result = {"command": name, "error": exc.code, "message": str(exc)}
    except ValueError as exc:
        result = {"command": name, "error": type(exc).__name__, "message": str(exc)}
    write_json(out / "result.json", result)
    if "error" in result:
        print(dumps({"error": result["error"], "message": result["message"]}), end="", file=sys.stderr)
        return 1
    return 0


# ------------------------------------------------------------------ argparse


def _add_common(sp):
    g = sp.add_argument_group("shared settings")
    g.add_argument("--config", help="INI file with [params], [integrator], [section], [search], [output] and command sections")
    g.add_argument("--out", help="output directory (default lorenz_lab_out)")
    g.add_argument("--sigma")
    g.add_argument("--rho")
    g.add_argument("--beta")
    g.add_argument("--rtol", help="integrator relative tolerance")
    g.add_argument("--atol", help="integrator absolute tolerance")
    g.add_argument("--max-step", dest="max_step")
    g.add_argument("--max-time", dest="max_time")
    g.add_argument("--epsilon", help="height of the plane part of the section")
    g.add_argument("--no-plot", dest="no_plot", action="store_true", help="skip the SVG plot")


def build_parser():
    parser = argparse.ArgumentParser(prog="lorenz-lab", description="Numerical laboratory for the Lorenz equations.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    sp = sub.add_parser("simulate", help="integrate one orbit")
    sp.add_argument("--start", help="initial state x,y,z")
    sp.add_argument("--duration")
    sp.add_argument("--transient", help="time discarded before recording")

    sp2 = sub.add_parser("section-map", help="map a grid on the section one return forward and check the template")
    sp2.add_argument("--grid-n", dest="grid_n", help="grid points per side")

    sp3 = sub.add_parser("kneading", help="symbol sequence of a separatrix, optionally along a rho path")
    sp3.add_argument("--n", help="number of symbols")
    sp3.add_argument("--side", choices=["plus", "minus"])
    sp3.add_argument("--scan-to-rho", dest="scan_to_rho", help="scan rho from --rho to this value")
    sp3.add_argument("--scan-n", dest="scan_n", help="number of scan samples")

    sp4 = sub.add_parser("find-homoclinic", help="locate a homoclinic rho by bisection at fixed sigma, beta")
    sp4.add_argument("--bracket", help="rho interval lo,hi")
    sp4.add_argument("--side", choices=["plus", "minus"])
    sp4.add_argument("--crossing", help="which section crossing (or loop count) carries the signature")
    sp4.add_argument("--signature", choices=["section", "loop"], help="sign at a section crossing or after completed loops")

    sp5 = sub.add_parser("find-tpoint", help="locate (rho, sigma) of a heteroclinic connection at fixed beta")
    sp5.add_argument("--guess", help="starting rho,sigma")
    sp5.add_argument("--side", choices=["plus", "minus"])

    sp6 = sub.add_parser("periodic", help="periodic orbits for one word or all primitive words up to a length")
    sp6.add_argument("--word")
    sp6.add_argument("--max-len", dest="max_len")
    sp6.add_argument("--min-len", dest="min_len")
    sp6.add_argument("--seed-time", dest="seed_time")
    sp6.add_argument("--tol")

    sp7 = sub.add_parser("braid", help="Lorenz braid of a word, optionally with orbit linking numbers")
    sp7.add_argument("--word")
    sp7.add_argument("--linking", action="store_const", const="true", help="also compute the orbit and its linking with the axes")

    sp8 = sub.add_parser("validate", help="sample transversality of the section and trapping of the ellipsoid")
    sp8.add_argument("--n-samples", dest="n_samples")
    sp8.add_argument("--trapping-radius", dest="trapping_radius")
    sp8.add_argument("--seed")

    for p in (sp, sp2, sp3, sp4, sp5, sp6, sp7, sp8):
        _add_common(p)
    return parser


def _overrides(args):
    ov = {}
    for dest, key in FLAG_KEYS.items():
        v = getattr(args, dest, None)
        if v is not None:
            ov[key] = v
    for dest in COMMAND_FLAGS[args.command]:
        v = getattr(args, dest, None)
        if v is not None:
            ov[(args.command, dest)] = v
    if args.no_plot:
        ov[("output", "plot")] = "false"
    return ov


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = parse_config(args.command, args.config, _overrides(args))
        return run_command(args.command, cfg)
    except ConfigError as exc:
        print(dumps({"error": exc.code, "message": str(exc)}), end="", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
