"""Experiment configuration: one JSON file in, validated dataclass out."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from fractions import Fraction

from .classify import SequenceSpec
from .errors import ConfigError, ParseError
from .groups import FactorSpec, FreeProductGroup
from .lattice import LatticeChain
from .measures import StepMeasure

DEFAULT_STATE_CAP = 2_000_000

DEFAULT_TOLERANCES = {
    "same_green": 1e-6,
    "lambda_residual": 1e-10,
    "angular": 1e-8,
    "epsilon": 1,
    "window": 4,
    "floyd_radius": 6,
    "ancona_samples": 20,
    "ancona_radius_max": 4,
    "ancona_monotone_slack": 1e-9,
    "martin_test_radius": 2,
    "green_table_radius": 5,
    "lambda_grid_points": 41,
    "lambda_grid_halfwidth": 2.5,
}


@dataclass
class ExperimentConfig:
    """Validated experiment description backing every CLI subcommand.

    Exactly one of group+measure (walk experiments) or chain (synthetic
    lattice kernels) is populated; stages that need the missing side are
    skipped with a note instead of failing.
    """

    name: str
    group: FreeProductGroup | None
    measure: StepMeasure | None
    chain: LatticeChain | None
    parabolic: tuple[int, ...]
    floyd_ratio: float
    radius: int
    eta_list: tuple[int, ...]
    theta_grid: int
    state_cap: int
    seed: int
    sequences: tuple[SequenceSpec, ...]
    tolerances: dict
    output_dir: str
    raw: dict = field(repr=False, default_factory=dict)

    @property
    def is_synthetic(self) -> bool:
        return self.chain is not None


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def _parse_factor(obj: dict, i: int) -> FactorSpec:
    _require(isinstance(obj, dict), f"factor {i} must be an object")
    rank = obj.get("rank", 0)
    _require(isinstance(rank, int) and rank >= 0, f"factor {i}: rank must be an integer >= 0")
    table = obj.get("table", [[0]])
    _require(isinstance(table, list) and all(isinstance(r, list) for r in table),
             f"factor {i}: table must be a list of rows")
    lattice_names = obj.get("lattice_names", [])
    finite_names = obj.get("finite_names", [])
    return FactorSpec(rank=rank,
                      table=tuple(tuple(int(c) for c in row) for row in table),
                      lattice_names=tuple(str(s) for s in lattice_names),
                      finite_names=tuple(str(s) for s in finite_names))


def _parse_measure(obj: dict, group: FreeProductGroup) -> StepMeasure:
    _require(isinstance(obj, dict), "measure must be an object")
    kind = obj.get("kind", "uniform")
    if kind == "uniform":
        mu = StepMeasure.uniform(group)
    elif kind == "weights":
        weights = obj.get("weights")
        _require(isinstance(weights, list) and weights, "measure.weights must be a nonempty list")
        pairs = []
        for entry in weights:
            _require(isinstance(entry, list) and len(entry) == 2,
                     "each weight is a [word, value] pair")
            pairs.append((str(entry[0]), entry[1]))
        mu = StepMeasure.from_weights(group, pairs)
    else:
        raise ConfigError(f"unknown measure kind {kind!r}")
    if obj.get("lazy", False):
        mu = mu.lazy()
    return mu


def _parse_chain(obj: dict) -> LatticeChain:
    _require(isinstance(obj, dict), "chain must be an object")
    rank = obj.get("rank")
    fibers = obj.get("fibers", 1)
    entries_raw = obj.get("entries")
    _require(isinstance(rank, int) and rank >= 1, "chain.rank must be an integer >= 1")
    _require(isinstance(fibers, int) and fibers >= 1, "chain.fibers must be an integer >= 1")
    _require(isinstance(entries_raw, list) and entries_raw, "chain.entries must be a nonempty list")
    entries = []
    for row in entries_raw:
        _require(isinstance(row, list) and len(row) == 4,
                 "each chain entry is [j1, j2, [dz...], weight]")
        j1, j2, dz, w = row
        try:
            weight = float(Fraction(str(w)))
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"bad chain weight {w!r}")
        entries.append((int(j1), int(j2), tuple(int(c) for c in dz), weight))
    labels = tuple(str(s) for s in obj.get("labels", []))
    return LatticeChain.build(rank, fibers, entries, labels, provenance="config")


def _parse_sequences(items, group: FreeProductGroup | None) -> tuple[SequenceSpec, ...]:
    out = []
    for i, obj in enumerate(items):
        _require(isinstance(obj, dict), f"sequence {i} must be an object")
        templates = obj.get("templates")
        if templates is None and "template" in obj:
            templates = [obj["template"]]
        _require(isinstance(templates, list) and templates,
                 f"sequence {i}: need template or templates")
        spec = SequenceSpec(
            name=str(obj.get("name", f"seq{i}")),
            templates=tuple(str(t) for t in templates),
            start=int(obj.get("start", 1)),
            stop=int(obj.get("stop", 12)),
            mode=str(obj.get("mode", "alternate" if len(templates) > 1 else "single")))
        if group is not None:
            spec.element(group, spec.start)
            spec.element(group, spec.stop)
        out.append(spec)
    return tuple(out)


def load_config(path: str) -> ExperimentConfig:
    """Read, schema-check, and materialize one experiment JSON file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}")
    _require(isinstance(raw, dict), "config root must be a JSON object")

    name = str(raw.get("name", os.path.splitext(os.path.basename(path))[0]))
    has_group = "group" in raw
    has_chain = "chain" in raw
    _require(has_group != has_chain, "config needs exactly one of 'group' or 'chain'")

    group = None
    measure = None
    chain = None
    if has_group:
        gobj = raw["group"]
        _require(isinstance(gobj, dict) and isinstance(gobj.get("factors"), list),
                 "group.factors must be a list")
        try:
            factors = [_parse_factor(f, i) for i, f in enumerate(gobj["factors"])]
            group = FreeProductGroup(factors)
            measure = _parse_measure(raw.get("measure", {}), group)
        except (ConfigError, ParseError):
            raise
        except (TypeError, ValueError, KeyError) as exc:
            raise ConfigError(f"bad group or measure: {exc}")
    else:
        chain = _parse_chain(raw["chain"])

    parabolic = raw.get("parabolic", [])
    _require(isinstance(parabolic, list) and all(isinstance(i, int) for i in parabolic),
             "parabolic must be a list of factor indices")
    if group is not None:
        for i in parabolic:
            _require(0 <= i < len(group.factors), f"parabolic factor {i} does not exist")
        for i in parabolic:
            _require(group.factors[i].rank >= 1,
                     f"parabolic factor {i} has no lattice directions")
    else:
        _require(not parabolic, "synthetic chain configs take no parabolic list")

    radius = raw.get("radius", 10)
    _require(isinstance(radius, int) and radius >= 1, "radius must be an integer >= 1")
    floyd_ratio = float(raw.get("floyd_ratio", 0.5))
    _require(0.0 < floyd_ratio < 1.0, "floyd_ratio must lie in (0,1)")
    eta_list = raw.get("eta_list", [0])
    _require(isinstance(eta_list, list) and all(isinstance(h, int) and h >= 0 for h in eta_list),
             "eta_list must be a list of integers >= 0")
    for h in eta_list:
        _require(3 * h <= radius, f"eta {h} needs radius >= {3 * h}")
    theta_grid = raw.get("theta_grid", 16)
    _require(isinstance(theta_grid, int) and theta_grid >= 1, "theta_grid must be an integer >= 1")
    state_cap = raw.get("state_cap", DEFAULT_STATE_CAP)
    _require(isinstance(state_cap, int) and state_cap >= 1, "state_cap must be a positive integer")
    seed = raw.get("seed", 0)
    _require(isinstance(seed, int), "seed must be an integer")

    try:
        sequences = _parse_sequences(raw.get("sequences", []), group)
    except ParseError as exc:
        raise ConfigError(f"bad sequence template: {exc}")

    tolerances = dict(DEFAULT_TOLERANCES)
    extra = raw.get("tolerances", {})
    _require(isinstance(extra, dict), "tolerances must be an object")
    tolerances.update(extra)

    output_dir = str(raw.get("output_dir", os.path.join("out", name)))
    return ExperimentConfig(
        name=name, group=group, measure=measure, chain=chain,
        parabolic=tuple(parabolic), floyd_ratio=floyd_ratio, radius=radius,
        eta_list=tuple(eta_list), theta_grid=theta_grid, state_cap=state_cap,
        seed=seed, sequences=sequences, tolerances=tolerances,
        output_dir=output_dir, raw=raw)
