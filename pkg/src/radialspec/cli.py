"""Batch driver: JSON config in, CSV/JSON artifacts out.

Every artifact embeds the SHA-256 of the effective config (the file content
with command-line overrides applied, canonically serialized), so stale
outputs are detectable.  Numbers are written with 17 significant digits;
a fixed config yields byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import jsonschema
import numpy as np

from . import krein, treeops, weyl
from .measures import (DiscreteBranchSequence, is_eventually_periodic,
                       measure_from_json, measure_to_json, right_limit,
                       sparsify)
from .transfer import simon_stolz_integral

__all__ = ["main", "run", "artifact_matches_config", "config_hash"]

COMMANDS = (
    "msweep", "density", "reflectionless", "sparse", "rightlimit",
    "sparsify", "periodicity", "decompose", "treereport",
    "resolvent-probe", "asymptotics",
)

_ATOM_SCHEMA = {
    "type": "object",
    "required": ["t"],
    "additionalProperties": False,
    "properties": {
        "t": {"type": "number"},
        "b": {"anyOf": [{"type": "number", "exclusiveMinimum": 1},
                        {"const": "inf"}]},
        "beta": {"type": "number", "minimum": 1},
    },
    "oneOf": [{"required": ["b"]}, {"required": ["beta"]}],
}

_MEASURE_SCHEMA = {
    "type": "object",
    "required": ["epsilon", "C", "atoms"],
    "additionalProperties": False,
    "properties": {
        "epsilon": {"type": "number", "exclusiveMinimum": 0},
        "C": {"type": "number", "minimum": 2},
        "support": {"enum": ["half_line", "whole_line"]},
        "atoms": {"type": "array", "items": _ATOM_SCHEMA},
        "tail": {
            "type": "object",
            "required": ["kind"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["none", "periodic", "gaps"]},
                "period": {"type": "number", "exclusiveMinimum": 0},
                "beta": {"type": "number", "minimum": 1},
            },
        },
    },
}

_TREE_SCHEMA = {
    "type": "object",
    "required": ["epsilon", "C", "params"],
    "additionalProperties": False,
    "properties": {
        "epsilon": {"type": "number", "exclusiveMinimum": 0},
        "C": {"type": "number", "minimum": 2},
        "params": {"type": "array", "items": {
            "type": "object",
            "required": ["t", "b"],
            "additionalProperties": False,
            "properties": {"t": {"type": "number"},
                           "b": {"type": "integer", "minimum": 2}},
        }},
    },
}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["command"],
    "additionalProperties": False,
    "properties": {
        "measure": _MEASURE_SCHEMA,
        "tree": _TREE_SCHEMA,
        "command": {
            "type": "object",
            "required": ["name"],
            "properties": {"name": {"enum": list(COMMANDS)}},
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "path": {"type": "string"},
                "format": {"enum": ["csv", "json", "gnuplot"]},
            },
        },
        "seed": {"type": "integer"},
        "rng": {"enum": ["pcg64"]},
        "threads": {"type": "integer", "minimum": 1},
    },
}


class ConfigError(ValueError):
    """A config field failed validation; ``path`` locates it."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def config_hash(config: dict) -> str:
    """SHA-256 of the content-determining config fields.

    The output location and the thread count do not affect the computed
    rows, so they are excluded; everything else is hashed canonically.
    """
    trimmed = {k: v for k, v in config.items()
               if k not in ("output", "threads")}
    blob = json.dumps(trimmed, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _validate_config(config: dict):
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(config), key=lambda e: e.json_path)
    if errors:
        err = errors[0]
        raise ConfigError(err.json_path, err.message)


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _need(cmd: dict, key: str, path="$.command"):
    if key not in cmd:
        raise ConfigError(f"{path}.{key}", "required parameter is missing")
    return cmd[key]


def _energy_grid(cmd: dict, key: str = "energies"):
    spec = _need(cmd, key)
    if isinstance(spec, list):
        grid = [float(v) for v in spec]
    elif isinstance(spec, dict):
        try:
            grid = np.linspace(float(spec["start"]), float(spec["stop"]),
                               int(spec["count"])).tolist()
        except KeyError as err:
            raise ConfigError(f"$.command.{key}", f"missing {err}") from err
    else:
        raise ConfigError(f"$.command.{key}", "expected a list or start/stop/count")
    if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError(f"$.command.{key}", "grid must be nonempty and increasing")
    return grid


def _measure_of(config: dict):
    if "measure" not in config:
        raise ConfigError("$.measure", "this command needs a measure document")
    return measure_from_json(config["measure"])


def _tree_of(config: dict) -> treeops.TreeSpec:
    if "tree" not in config:
        raise ConfigError("$.tree", "this command needs a tree document")
    doc = config["tree"]
    return treeops.TreeSpec(tuple((rec["t"], rec["b"]) for rec in doc["params"]),
                            doc["epsilon"], doc["C"])


def _pmap(fn, items, threads: int):
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


class _Artifact:
    """Accumulates one output file; deterministic serialization."""

    def __init__(self, command: str, config: dict, fmt: str):
        self.command = command
        self.hash = config_hash(config)
        self.fmt = fmt
        self.meta = {}
        self.columns = None
        self.rows = []
        self.payload = None

    def table(self, columns, rows):
        self.columns = list(columns)
        self.rows = rows

    def json_payload(self, payload):
        self.payload = payload

    def render(self) -> str:
        if self.payload is not None or self.fmt == "json":
            doc = {"command": self.command, "config_sha256": self.hash}
            doc.update(self.meta)
            if self.payload is not None:
                doc["result"] = self.payload
            else:
                doc["result"] = {"columns": self.columns,
                                 "rows": [[_json_number(v) for v in row]
                                          for row in self.rows]}
            return json.dumps(doc, sort_keys=True, indent=2) + "\n"
        sep = "," if self.fmt == "csv" else " "
        lines = [f"# radialspec {self.command}",
                 f"# config_sha256: {self.hash}"]
        for key in sorted(self.meta):
            lines.append(f"# {key}: {_fmt(self.meta[key])}")
        lines.append(sep.join(self.columns))
        for row in self.rows:
            lines.append(sep.join(_fmt(v) for v in row))
        return "\n".join(lines) + "\n"


def _json_number(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    return v


def artifact_matches_config(text: str, config: dict) -> bool:
    """True when the artifact's embedded hash matches the config."""
    want = config_hash(config)
    for line in text.splitlines():
        if line.startswith("# config_sha256:"):
            return line.split(":", 1)[1].strip() == want
        if '"config_sha256"' in line:
            return want in line
    return False


def _cmd_msweep(config, art, threads):
    mu, _ = _measure_of(config)
    cmd = config["command"]
    kappas = [float(v) for v in _need(cmd, "kappa")]
    size = cmd.get("size")
    rtol = float(cmd.get("rtol", 1e-9))

    def one(kappa):
        z = complex(-kappa * kappa, 0.0)
        mk = krein.m_plus_krein(mu, z, size=size, rtol=rtol).value
        mr = weyl.riccati_m_plus(mu, z).value
        dis = abs(mk - mr) / (1.0 + abs(mk))
        return (kappa, mk.real, mk.imag, mr.real, mr.imag, dis)

    art.meta["rtol"] = rtol
    art.table(["kappa", "re_m_krein", "im_m_krein",
               "re_m_riccati", "im_m_riccati", "rel_disagreement"],
              _pmap(one, kappas, threads))


def _cmd_density(config, art, threads):
    mu, _ = _measure_of(config)
    cmd = config["command"]
    grid = _energy_grid(cmd)
    eta = float(_need(cmd, "eta"))
    delta = float(cmd.get("delta", 1e-3))
    dens = weyl.spectral_density(mu, grid, eta, delta=delta)
    rows = [(e, eta, m.real, m.imag, d, bool(flag))
            for e, m, d, flag in zip(dens.energies, dens.m_plus,
                                     dens.density, dens.spectral_set.indicator)]
    art.meta["delta"] = delta
    art.table(["E", "eta", "re_m_plus", "im_m_plus", "density", "in_support"],
              rows)


def _cmd_reflectionless(config, art, threads):
    mu, _ = _measure_of(config)
    cmd = config["command"]
    grid = _energy_grid(cmd)
    t = float(cmd.get("t", 0.0))
    tol = float(cmd.get("tol", 1e-8))
    res = weyl.reflectionless_defect(mu, grid, t=t, tol=tol)
    rows = [(e, 0.0, p.real, p.imag, q.real, q.imag, d)
            for e, p, q, d in zip(res.energies, res.m_plus, res.m_minus,
                                  res.defect)]
    art.meta["tol"] = tol
    art.meta["defect_sup"] = res.sup
    art.meta["defect_mean"] = res.mean
    art.table(["E", "eta", "re_m_plus", "im_m_plus",
               "re_m_minus", "im_m_minus", "defect"], rows)


def _cmd_sparse(config, art, threads):
    mu, _ = _measure_of(config)
    cmd = config["command"]
    energy = float(_need(cmd, "energy"))
    upper = float(_need(cmd, "upper"))
    step = cmd.get("step")
    res = simon_stolz_integral(mu, energy, upper,
                               step=float(step) if step else None)
    rows = [(iv.index, iv.start, iv.lower_bound, iv.cumulative)
            for iv in res.intervals]
    art.meta["energy"] = energy
    art.meta["step"] = res.step
    art.meta["total"] = res.total
    art.table(["n", "t_n", "interval_lower_bound", "cumulative_integral"], rows)


def _cmd_rightlimit(config, art, threads):
    mu, _ = _measure_of(config)
    cmd = config["command"]
    shifts = [float(s) for s in _need(cmd, "shifts")]
    window = float(_need(cmd, "window"))
    tol = float(cmd.get("tol", 1e-9))
    res = right_limit(mu, shifts, window, tol=tol)
    payload = {
        "converged": res.converged,
        "window": res.window,
        "stable_from": res.stable_from,
        "deviations": [d if math.isfinite(d) else "mismatch"
                       for d in res.deviations],
        "atoms": None,
    }
    if res.measure is not None:
        payload["atoms"] = measure_to_json(res.measure, config["measure"]["C"])["atoms"]
    art.json_payload(payload)


def _cmd_sparsify(config, art, threads):
    mu, bounds = _measure_of(config)
    cmd = config["command"]
    out = sparsify(mu, float(_need(cmd, "R")), bounds,
                   count=int(cmd.get("count", 4)))
    art.json_payload(measure_to_json(out, bounds.C))


def _cmd_periodicity(config, art, threads):
    cmd = config["command"]
    values = [int(v) for v in _need(cmd, "sequence")]
    length = len(values)
    max_start = cmd.get("max_start")
    max_period = cmd.get("max_period")
    if max_start is None:
        max_start = max(1, length // 3)
    if max_period is None:
        max_period = max(1, (length - int(max_start) - 1) // 2)
    seq = DiscreteBranchSequence(tuple(values))
    res = is_eventually_periodic(seq, int(max_start), int(max_period))
    if res is None:
        art.json_payload({"start": None, "period": None, "horizon": length})
    else:
        art.json_payload({"start": res.start, "period": res.period,
                          "horizon": res.horizon})


def _cmd_decompose(config, art, threads):
    tree = _tree_of(config)
    cmd = config["command"]
    K = int(_need(cmd, "K"))
    comps = treeops.decompose(tree, K)
    payload = []
    for comp in comps:
        atoms = measure_to_json(comp.measure, tree.C)["atoms"]
        payload.append({"k": comp.k, "multiplicity": comp.multiplicity,
                        "atoms": atoms})
    art.json_payload(payload)


def _cmd_treereport(config, art, threads):
    tree = _tree_of(config)
    cmd = config["command"]
    K = int(_need(cmd, "K"))
    grid = _energy_grid(cmd)
    eta = float(_need(cmd, "eta"))
    report = treeops.tree_spectral_report(tree, K, grid, eta)
    columns = ["E", "total_density"] + [f"density_{c.k}" for c, _ in report.components]
    rows = []
    for i, e in enumerate(report.energies):
        rows.append((e, report.total_density[i],
                     *(dens.density[i] for _, dens in report.components)))
    art.meta["eta"] = eta
    art.meta["uncounted_multiplicity"] = report.uncounted_multiplicity
    art.table(columns, rows)


def _cmd_resolvent_probe(config, art, threads):
    mu, _ = _measure_of(config)
    cmd = config["command"]
    kappa = float(_need(cmd, "kappa"))
    z = complex(-kappa * kappa, 0.0)
    u = float(_need(cmd, "u"))
    ts = [float(v) for v in _need(cmd, "t")]
    size = cmd.get("size")
    rtol = float(cmd.get("rtol", 1e-9))
    h = float(cmd.get("h", 1e-3))
    sys_ = krein.assemble_krein(mu, z, size=size, rtol=rtol)

    taboo = [a.t for a in sys_.atoms] + [u]

    def one(t):
        g = sys_.resolvent(t, u)
        res = math.nan
        if t > 2 * h and all(abs(t - p) > 2 * h for p in taboo):
            lap = (sys_.resolvent(t - h, u) - 2 * g + sys_.resolvent(t + h, u)) / h ** 2
            res = abs(lap + z * g) / ((1.0 + abs(z)) * max(abs(g), 1e-300))
        return (t, u, g.real, g.imag, res)

    art.meta["kappa"] = kappa
    art.meta["tail_bound"] = sys_.tail_bound
    art.table(["t", "u", "re_G", "im_G", "residual"],
              _pmap(one, ts, threads))


def _cmd_asymptotics(config, art, threads):
    mu, _ = _measure_of(config)
    cmd = config["command"]
    kappas = [float(v) for v in _need(cmd, "kappa")]
    route = cmd.get("route", "krein")

    def one(kappa):
        ratio = krein.asymptotic_ratio(mu, kappa, route=route)
        return (kappa, ratio, abs(ratio - 1.0))

    art.meta["route"] = route
    art.table(["kappa", "ratio", "abs_ratio_minus_1"],
              _pmap(one, kappas, threads))


_HANDLERS = {
    "msweep": _cmd_msweep,
    "density": _cmd_density,
    "reflectionless": _cmd_reflectionless,
    "sparse": _cmd_sparse,
    "rightlimit": _cmd_rightlimit,
    "sparsify": _cmd_sparsify,
    "periodicity": _cmd_periodicity,
    "decompose": _cmd_decompose,
    "treereport": _cmd_treereport,
    "resolvent-probe": _cmd_resolvent_probe,
    "asymptotics": _cmd_asymptotics,
}


def run(command: str, config: dict, out: Optional[str] = None,
        fmt: Optional[str] = None, threads: Optional[int] = None) -> str:
    """Execute one command against a validated config; returns the artifact."""
    _validate_config(config)
    declared = config["command"].get("name")
    if declared is not None and declared != command:
        raise ConfigError("$.command.name",
                          f"config declares {declared!r}, got {command!r}")
    if command not in _HANDLERS:
        raise ConfigError("$.command.name", f"unknown command {command!r}")
    effective = dict(config)
    effective["command"] = dict(config["command"])
    effective["command"]["name"] = command
    output = dict(effective.get("output", {}))
    if out is not None:
        output["path"] = out
    if fmt is not None:
        output["format"] = fmt
    if output:
        effective["output"] = output
    nthreads = threads if threads is not None else int(effective.get("threads", 1))
    effective["threads"] = nthreads
    art = _Artifact(command, effective, output.get("format", "csv"))
    _HANDLERS[command](effective, art, nthreads)
    text = art.render()
    path = output.get("path")
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return text


def main(argv: Optional[list] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="radialspec",
        description="spectral reports for half-line jump operators and radial trees")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="JSON config path")
    parser.add_argument("--out", default=None, help="artifact path (default stdout)")
    parser.add_argument("--format", default=None, choices=["csv", "json", "gnuplot"])
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed (recorded in the hash)")
    args = parser.parse_args(argv)
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as err:
        print(f"error: cannot read config: {err}", file=sys.stderr)
        return 2
    if args.seed is not None:
        config["seed"] = args.seed
    try:
        text = run(args.command, config, out=args.out, fmt=args.format,
                   threads=args.threads)
    except ConfigError as err:
        print(f"config error at {err}", file=sys.stderr)
        return 2
    except jsonschema.ValidationError as err:
        print(f"config error at {err.json_path}: {err.message}", file=sys.stderr)
        return 2
    except krein.TruncationError as err:
        print(f"numeric refusal: {err} (required size {err.required_size})",
              file=sys.stderr)
        return 3
    if not args.out:
        sys.stdout.write(text)
    return 0
