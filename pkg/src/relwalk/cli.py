"""Command-line harness: one subcommand per experiment stage.

Every stage reads the same JSON config, writes CSV/JSON (and SVG plots)
into the output directory, and never touches the clock or unseeded
randomness, so identical configs reproduce identical CSV/JSON bytes.
Exit codes: 0 success, 1 invalid configuration or resources, 2 numerical
tolerance failure (a diagnostic JSON is written next to the outputs).
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .balls import ball_elements
from .classify import (ancona_ratio, classify, martin_convergence,
                       separation_experiment)
from .config import ExperimentConfig, load_config
from .errors import (AssumptionError, BoundedSequenceError, ConfigError,
                     ConvergenceError, InvalidMeasureError, ParseError,
                     RelwalkError, StateCapError)
from .excursions import FreeProductEngine
from .floyd import (FloydFunction, TransitionParams, floyd_distance,
                    transition_points, word_geodesic)
from .induced import FiberIndex, induce_first_return, moment_growth, verify_same_green
from .lattice import ChainGreen, LatticeChain
from .perron import check_assumptions, level_set_point, minimize_lambda, perron
from .reports import svg_heatmap, svg_line_plot, write_csv, write_json


class _ToleranceFailure(Exception):
    def __init__(self, stage: str, payload: dict):
        super().__init__(f"{stage}: tolerance failure")
        self.stage = stage
        self.payload = payload


class RunContext:
    """Shared lazily built objects for one config run."""

    def __init__(self, cfg: ExperimentConfig, out_dir: str, threads: int):
        self.cfg = cfg
        self.out = out_dir
        self.threads = threads
        self._engine: FreeProductEngine | None = None
        self._chains: dict[tuple[int, int], LatticeChain] = {}

    def path(self, name: str) -> str:
        return os.path.join(self.out, name)

    def engine(self) -> FreeProductEngine:
        if self._engine is None:
            self._engine = FreeProductEngine(self.cfg.group, self.cfg.measure,
                                             radius=self.cfg.radius)
        return self._engine

    def chain(self, factor: int, eta: int) -> LatticeChain:
        key = (factor, eta)
        if key not in self._chains:
            self._chains[key] = induce_first_return(self.engine(), factor, eta)
        return self._chains[key]

    def chains(self) -> list[tuple[str, LatticeChain]]:
        """All lattice chains this config describes, with stable labels."""
        if self.cfg.is_synthetic:
            return [("chain", self.cfg.chain)]
        return [(f"f{fac}_eta{eta}", self.chain(fac, eta))
                for fac in self.cfg.parabolic for eta in self.cfg.eta_list]


def _skip(note: str) -> dict:
    return {"status": "skipped", "note": note, "files": []}


def _ok(files: list[str], **extra) -> dict:
    out = {"status": "ok", "files": sorted(os.path.basename(f) for f in files)}
    out.update(extra)
    return out


# -- stages ----------------------------------------------------------------

def stage_green(ctx: RunContext) -> dict:
    """Green's function tables and Martin kernels near the identity."""
    cfg = ctx.cfg
    table_radius = int(cfg.tolerances["green_table_radius"])
    if cfg.is_synthetic:
        chain = cfg.chain
        cg = ChainGreen(chain, radius=cfg.radius)
        zero = (0,) * chain.rank
        rows = []
        for z in _lattice_window(chain.rank, table_radius):
            for j1 in range(chain.fiber_count):
                for j2 in range(chain.fiber_count):
                    rows.append((" ".join(map(str, z)), j1, j2, cg.green(j1, z, j2)))
        files = [write_csv(ctx.path("green.csv"), ["z", "j_from", "j_to", "green"], rows),
                 write_json(ctx.path("green.json"), {
                     "green_00": cg.green(0, zero, 0),
                     "row_masses": chain.row_masses(),
                     "radius": cfg.radius})]
        return _ok(files)
    engine = ctx.engine()
    group = cfg.group
    e = group.identity
    eff_radius = min(table_radius, cfg.radius)
    ball = ball_elements(group, eff_radius, cfg.state_cap)
    rows = [(group.format(x), x.word_length, engine.green(e, x)) for x in ball]
    sphere = [x for x in ball if x.word_length == eff_radius]
    inner = ball_elements(group, 2, cfg.state_cap)
    krows = [(group.format(y), group.format(x), engine.martin_kernel(x, y))
             for y in sphere for x in inner]
    files = [write_csv(ctx.path("green.csv"), ["x", "word_length", "green"], rows),
             write_csv(ctx.path("martin.csv"), ["y", "x", "martin_kernel"], krows),
             write_json(ctx.path("green.json"), {
                 "green_ee": engine.green(e, e),
                 "factor_return_mass": list(engine.return_mass),
                 "radius": cfg.radius,
                 "identity_mass": cfg.measure.identity_mass})]
    return _ok(files)


def _lattice_window(rank: int, radius: int) -> list[tuple[int, ...]]:
    if rank == 1:
        return [(z,) for z in range(-radius, radius + 1)]
    out = [(z1, z2) for z1 in range(-radius, radius + 1)
           for z2 in range(-radius, radius + 1)
           if abs(z1) + abs(z2) <= radius]
    return sorted(out)


def stage_floyd(ctx: RunContext) -> dict:
    """Floyd lengths and transition annotations along sequence geodesics."""
    cfg = ctx.cfg
    if cfg.is_synthetic:
        return _skip("synthetic chain config has no group geometry")
    if not cfg.sequences:
        return _skip("no sequences configured")
    group = cfg.group
    e = group.identity
    f = FloydFunction(cfg.floyd_ratio)
    params = TransitionParams(epsilon=int(cfg.tolerances["epsilon"]),
                              window=int(cfg.tolerances["window"]))
    floyd_radius = int(cfg.tolerances["floyd_radius"])
    rows = []
    summary = {}
    for seq in cfg.sequences:
        target = seq.element(group, seq.stop)
        path = word_geodesic(e, target)
        transitions = set(transition_points(path, params, cfg.parabolic))
        for i, p in enumerate(path):
            reach = p.word_length <= floyd_radius
            dist = floyd_distance(f, e, e, p, floyd_radius) if reach else ""
            rows.append((seq.name, i, group.format(p), p.word_length,
                         1 if i in transitions else 0, dist))
        summary[seq.name] = {
            "path_length": len(path) - 1,
            "transition_count": len(transitions),
            "transition_indices": sorted(transitions)}
    files = [write_csv(ctx.path("floyd.csv"),
                       ["sequence", "i", "word", "level", "transition", "floyd_from_e"],
                       rows),
             write_json(ctx.path("floyd.json"), {
                 "floyd_ratio": cfg.floyd_ratio,
                 "epsilon": params.epsilon,
                 "window": params.window,
                 "diameter_bound": 2.0 * f.total,
                 "sequences": summary})]
    return _ok(files)


def stage_induce(ctx: RunContext) -> dict:
    """First-return chain dumps plus the same-Green consistency check."""
    cfg = ctx.cfg
    if cfg.is_synthetic:
        return _skip("config supplies the chain directly")
    if not cfg.parabolic:
        return _skip("no parabolic factors designated")
    engine = ctx.engine()
    rows = []
    report = {}
    for fac in cfg.parabolic:
        for eta in cfg.eta_list:
            chain = ctx.chain(fac, eta)
            fibers = FiberIndex.build(cfg.group, fac, eta)
            for j1, j2, dz, w in chain.entries:
                rows.append((fac, eta, j1, j2, " ".join(map(str, dz)), w))
            dev = verify_same_green(chain, engine, fibers)
            moments = moment_growth(engine, fac, [eta])
            report[f"f{fac}_eta{eta}"] = {
                "factor": fac, "eta": eta,
                "fiber_count": chain.fiber_count,
                "entry_count": len(chain.entries),
                "row_mass_max": max(chain.row_masses()),
                "same_green_dev": dev,
                "moment_reach": "bounded-support" if math.isinf(moments[eta])
                                else moments[eta]}
    files = [write_csv(ctx.path("induce.csv"),
                       ["factor", "eta", "j_from", "j_to", "dz", "weight"], rows),
             write_json(ctx.path("induce.json"), report)]
    worst = max(v["same_green_dev"] for v in report.values())
    if worst >= cfg.tolerances["same_green"]:
        raise _ToleranceFailure("induce", {
            "reason": "induced chain Green deviates from the walk Green",
            "max_deviation": worst,
            "tolerance": cfg.tolerances["same_green"],
            "detail": report})
    return _ok(files, max_same_green_dev=worst)


def stage_lambda_surface(ctx: RunContext) -> dict:
    """Perron value grids and structural assumption reports per chain."""
    cfg = ctx.cfg
    chains = ctx.chains()
    if not chains:
        return _skip("no chains available (no parabolic factors)")
    points = int(cfg.tolerances["lambda_grid_points"])
    halfwidth = float(cfg.tolerances["lambda_grid_halfwidth"])
    rows = []
    report = {}
    files = []
    for label, chain in chains:
        assume = check_assumptions(chain)
        entry = {
            "strictly_submarkov": assume.submarkov,
            "strongly_irreducible": assume.strongly_irreducible,
            "lambda_min": assume.lambda_min,
            "u_min": list(assume.u_min),
            "level_set_compact": assume.level_set_compact,
            "messages": list(assume.messages),
            "ok": assume.ok}
        if chain.rank == 1:
            us = np.linspace(assume.u_min[0] - halfwidth,
                             assume.u_min[0] + halfwidth, points)
            vals = [perron(chain, (float(u),)).value for u in us]
            for u, v in zip(us, vals):
                rows.append((label, "%.12g" % u, "", v))
            files.append(svg_line_plot(
                ctx.path(f"lambda_{label}.svg"),
                [("lambda(u)", list(us), vals)],
                f"Perron value, {label}", "u", "lambda", hline=1.0))
            if assume.ok and assume.lambda_min < 1.0:
                mn = perron(chain, assume.u_min)
                up = level_set_point(chain, (1.0,), minimum=mn)
                un = level_set_point(chain, (-1.0,), minimum=mn)
                entry["u_plus"] = up.u[0]
                entry["u_minus"] = un.u[0]
        elif chain.rank == 2:
            us0 = np.linspace(assume.u_min[0] - halfwidth,
                              assume.u_min[0] + halfwidth, points)
            us1 = np.linspace(assume.u_min[1] - halfwidth,
                              assume.u_min[1] + halfwidth, points)
            grid = [[perron(chain, (float(a), float(b))).value for a in us0]
                    for b in us1]
            for ib, b in enumerate(us1):
                for ia, a in enumerate(us0):
                    rows.append((label, "%.12g" % a, "%.12g" % b, grid[ib][ia]))
            files.append(svg_heatmap(
                ctx.path(f"lambda_{label}.svg"), list(us0), list(us1), grid,
                f"Perron value, {label}", "u1", "u2", level=1.0))
        report[label] = entry
    files.append(write_csv(ctx.path("lambda_surface.csv"),
                           ["chain", "u1", "u2", "lambda"], rows))
    files.append(write_json(ctx.path("lambda_surface.json"), report))
    bad = {k: v for k, v in report.items() if not v["ok"]}
    if bad:
        raise _ToleranceFailure("lambda-surface", {
            "reason": "assumption checks failed", "detail": bad})
    return _ok(files)


def _theta_grid(rank: int, count: int) -> list[tuple[float, ...]]:
    if rank == 1:
        return [(1.0,), (-1.0,)][:max(1, count)]
    return [(math.cos(2 * math.pi * i / count), math.sin(2 * math.pi * i / count))
            for i in range(count)]


def stage_boundary_map(ctx: RunContext) -> dict:
    """Direction-to-tilt table on the unit level set, with injectivity check."""
    cfg = ctx.cfg
    chains = ctx.chains()
    if not chains:
        return _skip("no chains available (no parabolic factors)")
    rows = []
    report = {}
    files = []
    for label, chain in chains:
        thetas = _theta_grid(chain.rank, cfg.theta_grid)
        points = []
        mn = minimize_lambda(chain)
        for th in thetas:
            bp = level_set_point(chain, th, minimum=mn)
            points.append(bp)
            rows.append((label,
                         " ".join("%.12g" % c for c in th),
                         " ".join("%.12g" % c for c in bp.u),
                         bp.lambda_residual, bp.angular_error))
        gaps = [float(np.linalg.norm(np.array(p.u) - np.array(q.u)))
                for i, p in enumerate(points) for q in points[i + 1:]]
        entry = {
            "count": len(points),
            "max_angular_error": max(p.angular_error for p in points),
            "max_lambda_residual": max(abs(p.lambda_residual) for p in points),
            "min_pairwise_u_gap": min(gaps) if gaps else None,
            "injective": bool(min(gaps) > 1e-12) if gaps else True}
        report[label] = entry
        if chain.rank == 2 and len(points) >= 3:
            xs = [p.u[0] for p in points] + [points[0].u[0]]
            ys = [p.u[1] for p in points] + [points[0].u[1]]
            files.append(svg_line_plot(
                ctx.path(f"boundary_{label}.svg"), [("level set", xs, ys)],
                f"Unit level set, {label}", "u1", "u2"))
    files.append(write_csv(ctx.path("boundary_map.csv"),
                           ["chain", "theta", "u", "lambda_residual", "angular_error"],
                           rows))
    files.append(write_json(ctx.path("boundary_map.json"), report))
    worst = max(v["max_angular_error"] for v in report.values())
    not_injective = [k for k, v in report.items() if not v["injective"]]
    if worst >= cfg.tolerances["angular"] or not_injective:
        raise _ToleranceFailure("boundary-map", {
            "reason": "sphere map round-trip out of tolerance",
            "max_angular_error": worst,
            "tolerance": cfg.tolerances["angular"],
            "non_injective": not_injective,
            "detail": report})
    return _ok(files, max_angular_error=worst)


def stage_classify(ctx: RunContext) -> dict:
    """Boundary labels for every configured sequence."""
    cfg = ctx.cfg
    if cfg.is_synthetic:
        return _skip("synthetic chain config has no group sequences")
    if not cfg.sequences:
        return _skip("no sequences configured")
    group = cfg.group
    rows = []
    report = {}
    for seq in cfg.sequences:
        try:
            cls = classify(group, seq, cfg.parabolic)
        except BoundedSequenceError as exc:
            rows.append((seq.name, "Bounded", "", "", str(exc)))
            report[seq.name] = {"tag": "Bounded", "note": str(exc)}
            continue
        coset_txt = ""
        if cls.coset is not None:
            rep = cls.coset.rep
            coset_txt = f"{group.format(rep) if rep.syllable_count else 'e'}" \
                        f"*F{cls.coset.factor}"
        direction_txt = " ".join("%.12g" % c for c in cls.direction) \
            if cls.direction else ""
        detail = ""
        if cls.tag == "Parabolic":
            detail = "projection norm %.6g" % cls.evidence["projection_norms"][-1]
        elif cls.tag == "Conical":
            detail = "gromov product %.6g" % cls.evidence["coned_gromov_products"][-1]
        rows.append((seq.name, cls.tag, coset_txt, direction_txt, detail))
        report[seq.name] = {
            "tag": cls.tag, "coset": coset_txt, "direction": direction_txt,
            "word_lengths": cls.evidence["word_lengths"],
            "coned_gromov_products": cls.evidence.get("coned_gromov_products", []),
            "projection_norms": cls.evidence.get("projection_norms", [])}
    files = [write_csv(ctx.path("classify.csv"),
                       ["sequence", "tag", "coset", "direction", "detail"], rows),
             write_json(ctx.path("classify.json"), report)]
    return _ok(files)


def _sample_ancona_pairs(ctx: RunContext, count: int):
    """Seeded (x, z) pairs whose geodesic has a transition midpoint at e.

    Each half-word reads lattice tail, junction block, short lattice stub,
    and the two stubs share an axis and sign, so the geodesic from x to z
    crosses e inside a lattice segment one step away from junctions on
    both sides.  The midpoint is then a transition point, yet detours
    around it inside the lattice plane survive whenever the parabolic
    factor has rank at least two.
    """
    cfg = ctx.cfg
    group = cfg.group
    rng = np.random.default_rng(cfg.seed)
    junctions = [i for i in range(len(group.factors)) if i not in cfg.parabolic]
    if not junctions:
        return None
    jfac = junctions[0]
    jspec = group.factors[jfac]
    params = TransitionParams(epsilon=int(cfg.tolerances["epsilon"]),
                              window=int(cfg.tolerances["window"]))
    para = [i for i in cfg.parabolic] or [i for i in range(len(group.factors))
                                          if i != jfac]
    pairs = []
    attempts = 0
    while len(pairs) < count and attempts < 40 * count:
        attempts += 1
        stub_fac = para[int(rng.integers(0, len(para)))]
        stub_spec = group.factors[stub_fac]
        if stub_spec.rank == 0:
            continue
        axis = int(rng.integers(0, stub_spec.rank))
        sign = 1 if rng.integers(0, 2) else -1
        depth = int(rng.integers(1, 3))
        stub_z = tuple(sign * depth if d == axis else 0
                       for d in range(stub_spec.rank))
        stub = group.syllable(stub_fac, stub_z, 0)

        def junction_block():
            jexp = int(rng.integers(1, 3)) * (1 if rng.integers(0, 2) else -1)
            if jspec.rank:
                return group.syllable(jfac, (jexp,) + (0,) * (jspec.rank - 1), 0)
            return group.syllable(jfac, (), 1 + int(rng.integers(0, len(jspec.table) - 1)))

        def tail():
            fac = para[int(rng.integers(0, len(para)))]
            spec = group.factors[fac]
            if spec.rank == 0:
                return group.syllable(fac, (), 1), 1
            z = tuple(int(rng.integers(-2, 3)) for _ in range(spec.rank))
            if not any(z):
                z = (1,) + z[1:]
            return group.syllable(fac, z, 0), sum(abs(c) for c in z)

        t1, len1 = tail()
        t2, len2 = tail()
        if len1 != len2:
            continue
        j1, j2 = junction_block(), junction_block()
        if j1.word_length != j2.word_length:
            continue
        w1 = t1 * j1 * stub
        w2 = stub * j2 * t2
        x = w1.inverse()
        z = w2
        if x == z or (x.inverse() * z).word_length != x.word_length + z.word_length:
            continue
        path = word_geodesic(x, z)
        mid = x.word_length
        if path[mid] != group.identity:
            continue
        if mid not in transition_points(path, params, cfg.parabolic):
            continue
        pairs.append((x, z))
    if len(pairs) < count:
        raise ConvergenceError(f"found only {len(pairs)} transition pairs "
                               f"in {attempts} attempts")
    return pairs


def stage_ancona(ctx: RunContext) -> dict:
    """Relative Green ratio profiles rho_R around transition midpoints."""
    cfg = ctx.cfg
    if cfg.is_synthetic:
        return _skip("synthetic chain config has no group walk")
    if not cfg.parabolic:
        return _skip("no parabolic factors designated")
    engine = ctx.engine()
    group = cfg.group
    count = int(cfg.tolerances["ancona_samples"])
    rmax = int(cfg.tolerances["ancona_radius_max"])
    slack = float(cfg.tolerances["ancona_monotone_slack"])
    pairs = _sample_ancona_pairs(ctx, count)
    if pairs is None:
        return _skip("every factor is parabolic; no transition junctions")
    rows = []
    profiles = []
    for i, (x, z) in enumerate(pairs):
        prof = [ancona_ratio(engine, x, z, group.identity, r) for r in range(rmax + 1)]
        profiles.append(prof)
        for r, rho in enumerate(prof):
            rows.append((i, group.format(x), group.format(z), r, rho))
    mean = [float(np.mean([p[r] for p in profiles])) for r in range(rmax + 1)]
    bad_monotone = [i for i, p in enumerate(profiles)
                    if any(b > a + slack for a, b in zip(p, p[1:]))]
    bad_drop = [i for i, p in enumerate(profiles)
                if p[0] > 0 and not p[-1] < p[0]]
    report = {
        "samples": len(profiles),
        "radius_max": rmax,
        "mean_profile": mean,
        "non_monotone_samples": bad_monotone,
        "no_strict_drop_samples": bad_drop,
        "zero_at_radius_0": sum(1 for p in profiles if p[0] == 0.0)}
    files = [write_csv(ctx.path("ancona.csv"),
                       ["sample", "x", "z", "radius", "rho"], rows),
             write_json(ctx.path("ancona.json"), report),
             svg_line_plot(ctx.path("ancona.svg"),
                           [("mean rho_R", list(range(rmax + 1)), mean)],
                           "Relative Green ratio vs forbidden radius",
                           "R", "rho", hline=1.0)]
    if bad_monotone or bad_drop:
        raise _ToleranceFailure("ancona", {
            "reason": "rho_R profile not decaying as required",
            "non_monotone_samples": bad_monotone,
            "no_strict_drop_samples": bad_drop,
            "detail": report})
    return _ok(files)


def stage_martin_seq(ctx: RunContext) -> dict:
    """Martin kernel tables along sequences with Cauchy and limit checks."""
    cfg = ctx.cfg
    if cfg.is_synthetic:
        return _skip("synthetic chain config has no group walk")
    if not cfg.sequences:
        return _skip("no sequences configured")
    engine = ctx.engine()
    group = cfg.group
    test_radius = int(cfg.tolerances["martin_test_radius"])
    rows = []
    report = {}
    for seq in cfg.sequences:
        elements = seq.elements(group)
        ns = list(range(seq.start, seq.stop + 1))
        try:
            cls = classify(group, seq, cfg.parabolic)
        except BoundedSequenceError as exc:
            report[seq.name] = {"tag": "Bounded", "note": str(exc)}
            continue
        boundary = None
        coset = None
        if cls.tag == "Parabolic" and cfg.eta_list:
            coset = cls.coset
            chain = ctx.chain(coset.factor, cfg.eta_list[0])
            boundary = level_set_point(chain, cls.direction)
            test_points = [coset.member(zc) for zc in
                           _lattice_window(group.factors[coset.factor].rank,
                                           test_radius)]
        else:
            test_points = ball_elements(group, min(2, test_radius), cfg.state_cap)[:9]
        rep = martin_convergence(engine, elements, test_points, ns=ns,
                                 boundary=boundary, coset=coset)
        for row in rep.rows:
            for x, k in zip(test_points, row.kernels):
                rows.append((seq.name, row.n, group.format(x), k))
        entry = {"tag": cls.tag,
                 "cauchy_deltas": [[n, d] for n, d in rep.cauchy_deltas]}
        if rep.max_ratio_deviation is not None:
            entry["max_ratio_deviation"] = rep.max_ratio_deviation
            entry["boundary_u"] = list(boundary.u)
        report[seq.name] = entry
    files = [write_csv(ctx.path("martin_seq.csv"),
                       ["sequence", "n", "x", "martin_kernel"], rows),
             write_json(ctx.path("martin_seq.json"), report)]
    return _ok(files)


def stage_separate(ctx: RunContext) -> dict:
    """Two-direction separation experiment on the first available chain."""
    cfg = ctx.cfg
    chains = ctx.chains()
    if not chains:
        return _skip("no chains available (no parabolic factors)")
    label, chain = chains[0]
    sep_cfg = cfg.raw.get("separation", {})
    if chain.rank == 1:
        theta0 = tuple(sep_cfg.get("theta0", (-1.0,)))
        theta1 = tuple(sep_cfg.get("theta1", (1.0,)))
    else:
        s = 1.0 / math.sqrt(2.0)
        theta0 = tuple(sep_cfg.get("theta0", (-1.0, 0.0)))
        theta1 = tuple(sep_cfg.get("theta1", (s, s)))
    ns = list(sep_cfg.get("ns", range(1, 13)))
    rep = separation_experiment(chain, theta0, theta1, ns=ns)
    rows = [(label, n, d, g) for n, d, g in zip(rep.ns, rep.decay, rep.grid_min)]
    files = [write_csv(ctx.path("separate.csv"),
                       ["chain", "n", "kernel_theta0", "grid_min_kernel"], rows),
             write_json(ctx.path("separate.json"), {
                 "chain": label,
                 "theta0": list(rep.theta0), "theta1": list(rep.theta1),
                 "u0": list(rep.u0), "u1": list(rep.u1),
                 "grid_thetas": [list(t) for t in rep.grid_thetas],
                 "decay": rep.decay, "grid_min": rep.grid_min,
                 "certified": rep.certified}),
             svg_line_plot(ctx.path("separate.svg"),
                           [("K_theta0 (decays)", [float(n) for n in rep.ns], rep.decay),
                            ("min K over grid (grows)", [float(n) for n in rep.ns],
                             rep.grid_min)],
                           "Boundary separation along the theta1 ray", "n", "kernel",
                           logy=True)]
    if not rep.certified:
        raise _ToleranceFailure("separate", {
            "reason": "separation not certified",
            "decay": rep.decay, "grid_min": rep.grid_min})
    return _ok(files, certified=rep.certified)


STAGES = {
    "green": stage_green,
    "floyd": stage_floyd,
    "induce": stage_induce,
    "lambda-surface": stage_lambda_surface,
    "boundary-map": stage_boundary_map,
    "classify": stage_classify,
    "ancona": stage_ancona,
    "martin-seq": stage_martin_seq,
    "separate": stage_separate,
}


def _run_stage(ctx: RunContext, name: str) -> tuple[int, dict]:
    try:
        return 0, STAGES[name](ctx)
    except _ToleranceFailure as exc:
        path = write_json(ctx.path(f"{exc.stage.replace('-', '_')}_diagnostic.json"),
                          exc.payload)
        return 2, {"status": "tolerance-failure", "note": exc.payload.get("reason", ""),
                   "files": [os.path.basename(path)]}
    except (AssumptionError, ConvergenceError) as exc:
        path = write_json(ctx.path(f"{name.replace('-', '_')}_diagnostic.json"),
                          {"reason": str(exc), "stage": name})
        return 2, {"status": "numerical-failure", "note": str(exc),
                   "files": [os.path.basename(path)]}


def _run_all(ctx: RunContext) -> int:
    names = [n for n in STAGES]
    if not ctx.cfg.is_synthetic:
        ctx.engine()
        ctx.chains()
    results: dict[str, tuple[int, dict]] = {}
    if ctx.threads > 1:
        with ThreadPoolExecutor(max_workers=ctx.threads) as pool:
            futures = {name: pool.submit(_run_stage, ctx, name) for name in names}
            for name in names:
                results[name] = futures[name].result()
    else:
        for name in names:
            results[name] = _run_stage(ctx, name)
    code = 0
    manifest = {}
    for name in names:
        stage_code, summary = results[name]
        code = max(code, stage_code)
        manifest[name] = summary
        print(f"{name}: {summary['status']}"
              + (f" ({summary['note']})" if summary.get("note") else ""))
    write_json(ctx.path("run.json"), {"config": ctx.cfg.name, "stages": manifest})
    return code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="relwalk",
        description="Random-walk boundary experiments on free products")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in list(STAGES) + ["all"]:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="experiment JSON file")
        p.add_argument("--out", default=None, help="output directory override")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--state-cap", type=int, default=None)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help and 2 for usage errors; usage errors
        # are invalid-arguments failures under this tool's exit contract.
        return 0 if not exc.code else 1

    try:
        cfg = load_config(args.config)
        if args.state_cap is not None:
            if args.state_cap < 1:
                raise ConfigError("--state-cap must be positive")
            cfg.state_cap = args.state_cap
        out_dir = args.out or os.environ.get("RELWALK_OUT") or cfg.output_dir
        os.makedirs(out_dir, exist_ok=True)
        ctx = RunContext(cfg, out_dir, max(1, args.threads))
        if args.command == "all":
            return _run_all(ctx)
        code, summary = _run_stage(ctx, args.command)
        print(f"{args.command}: {summary['status']}"
              + (f" ({summary['note']})" if summary.get("note") else ""))
        for fname in summary.get("files", []):
            print(f"  {os.path.join(out_dir, fname)}")
        if code:
            print(f"{args.command}: diagnostic written", file=sys.stderr)
        return code
    except (ConfigError, ParseError, InvalidMeasureError, StateCapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except RelwalkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
