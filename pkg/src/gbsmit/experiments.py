"""Reproducible experiments: the mitigation tables and figure datasets.

Each ``run_*`` takes a validated config dict and returns a :class:`Table`.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import io as gio
from .cancellation import cancel_loss, form_aware_estimate_tmsv, series_estimate
from .distributions import DiscreteDistribution, Orbit, Pattern, as_pattern, patterns_up_to
from .extrapolation import ExtrapolationPlan, PolePolynomials, extrapolate, improved_extrapolate
from .gaussian import apply_uniform_loss, encode_graph, graph_squeezing, tmsv_state
from .probability import orbit_probability, parallel_map, pattern_probabilities, pattern_probability, tmsv_exact_prob
from .sampling import EmpiricalDistribution, child_seed, run_loss_fluctuation, run_probability_fluctuation, trial_rng

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


@dataclass
class Table:
    name: str
    columns: list[str]
    rows: list[list[Any]]
    meta: dict = field(default_factory=dict)

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_fmt(v) for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        body = {"experiment": self.name, "columns": self.columns, "rows": self.rows, "meta": self.meta}
        return json.dumps(body, indent=1, sort_keys=True, default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not serialisable: {type(obj)}")


def pattern_label(p) -> str:
    return "[" + ",".join(str(c) for c in p) + "]"


# schema: key -> (type check, default)
_FLOAT = (float, int)
_FLOATS = "floats"
_INTS = "ints"

SCHEMAS: dict[str, dict[str, tuple[Any, Any]]] = {
    "table1": {"r": (_FLOAT, 1.0), "epsilons": (_FLOATS, [0.2, 0.5]), "c": (_FLOATS, [1.0, 1.2, 1.4, 1.6, 1.8]), "max_n": (int, 6)},
    "table2": {
        "rs": (_FLOATS, [0.5, 1.0]),
        "cutoffs": (_INTS, [7, 10]),
        "epsilons": (_FLOATS, [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8]),
        "target": (_INTS, [1, 1]),
    },
    "table3": {
        "r": (_FLOAT, 0.5),
        "epsilons": (_FLOATS, [0.2, 0.5, 0.6, 0.7, 0.8]),
        "trials": (int, 100),
        "N": (int, 100_000),
        "cutoff": (int, 7),
        "order": (int, 4),
        "seed": (int, 0),
        "source_cutoff": (int, 60),
    },
    "table4": {
        "graph": (dict, None),
        "c_graph": (_FLOAT, 0.25),
        "c": (_FLOATS, [1.0, 1.1, 1.2, 1.3, 1.4]),
        "epsilons": (_FLOATS, [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7]),
        "orbit": (_INTS, [1, 1, 1, 1]),
        "cutoff": (int, 7),
    },
    "fig2": {
        "r": (_FLOAT, 1.0),
        "epsilon": (_FLOAT, 0.3),
        "c": (_FLOATS, [1.0, 1.3, 1.6, 1.9, 2.2]),
        "trials": (int, 500),
        "N": ((int, type(None)), 100_000),
        "seed": (int, 0),
        "bins": (int, 30),
    },
    "fig3": {
        "r": (_FLOAT, 1.0),
        "epsilon": (_FLOAT, 0.3),
        "c": (_FLOATS, [1.0, 1.3, 1.6, 1.9, 2.2]),
        "trials": (int, 500),
        "loss_std": (_FLOAT, 0.01),
        "model": (str, "attenuator"),
        "seed": (int, 0),
        "bins": (int, 30),
    },
    "fig4": {
        "graph": (dict, None),
        "c_graph": (_FLOAT, 0.25),
        "c": (_FLOATS, [1.0, 1.1, 1.2, 1.3, 1.4]),
        "epsilons": (_FLOATS, [0.1, 0.2, 0.3, 0.4]),
        "max_photons": (int, 8),
    },
    "custom": {
        "graph": (dict, None),
        "c_graph": (_FLOAT, 0.25),
        "r": (_FLOAT, None),
        "pattern": (_INTS, None),
        "orbit": (_INTS, None),
        "epsilon": (_FLOAT, 0.1),
        "c": (_FLOATS, [1.0, 1.1, 1.2, 1.3, 1.4]),
        "cutoff": (int, None),
    },
}


def _check_value(key: str, kind, value):
    if kind == _FLOATS:
        ok = isinstance(value, list) and all(isinstance(v, _FLOAT) and not isinstance(v, bool) for v in value)
    elif kind == _INTS:
        ok = isinstance(value, list) and all(isinstance(v, int) and not isinstance(v, bool) for v in value)
    else:
        ok = isinstance(value, kind) and not isinstance(value, bool)
    if not ok:
        raise ConfigError(f"config key {key!r} has invalid value {value!r}")


def validate_config(experiment: str, overrides: dict | None) -> dict:
    """Defaults merged with type-checked overrides; unknown keys are rejected."""
    if experiment not in SCHEMAS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    schema = SCHEMAS[experiment]
    overrides = dict(overrides or {})
    unknown = set(overrides) - set(schema)
    if unknown:
        raise ConfigError(f"unknown config keys for {experiment}: {sorted(unknown)}")
    config = {}
    for key, (kind, default) in schema.items():
        if key in overrides:
            if overrides[key] is not None or default is not None:
                _check_value(key, kind, overrides[key])
            config[key] = overrides[key]
        else:
            config[key] = default
    return config


def _plan(epsilon: float, c) -> ExtrapolationPlan:
    try:
        return ExtrapolationPlan(float(epsilon), tuple(c))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def run_table1(config: dict, threads: int | None = None) -> Table:
    """Standard against pole-removed extrapolation for the two-mode squeezed vacuum."""
    r = config["r"]
    state = tmsv_state(r)
    poles = PolePolynomials((r, r))
    plans = [_plan(e, config["c"]) for e in config["epsilons"]]
    columns = ["pattern", "exact"]
    for e in config["epsilons"]:
        columns += [f"extrap_eps_{e:g}", f"imp_extrap_eps_{e:g}"]
    patterns = [(n, n) for n in range(config["max_n"] + 1)]
    lossy = {}
    for plan in plans:
        for e in plan.losses:
            lossy[e] = pattern_probabilities(apply_uniform_loss(state, float(e)), patterns, threads)
    rows = []
    for p in patterns:
        row: list[Any] = [pattern_label(p), pattern_probability(state, p)]
        for plan in plans:
            values = [lossy[e][p] for e in plan.losses]
            row += [extrapolate(values, plan), improved_extrapolate(values, plan, poles, sum(p))]
        rows.append(row)
    return Table("table1", columns, rows, {"config": config})


def run_table2(config: dict, threads: int | None = None) -> Table:
    """Loss cancellation of the two-mode squeezed vacuum at fixed photon cutoffs."""
    target = as_pattern(config["target"])
    if len(target) != 2:
        raise ConfigError("target must be a two-mode pattern")
    columns = ["epsilon"] + [f"cutoff_{k}_r_{r:g}" for k in config["cutoffs"] for r in config["rs"]]
    top = max(config["cutoffs"])

    def row(eps: float) -> list[Any]:
        out: list[Any] = [float(eps)]
        lossy = {}
        for r in config["rs"]:
            state = apply_uniform_loss(tmsv_state(r), eps)
            pats = [p for p in patterns_up_to(2, top) if p[0] >= target[0] and p[1] >= target[1]]
            lossy[r] = DiscreteDistribution(pattern_probabilities(state, pats), 2)
        for k in config["cutoffs"]:
            for r in config["rs"]:
                out.append(cancel_loss(lossy[r], eps, k, targets=[target])[target])
        return out

    rows = parallel_map(row, config["epsilons"], threads)
    meta = {"config": config, "lossless": {f"r_{r:g}": pattern_probability(tmsv_state(r), target) for r in config["rs"]}}
    return Table("table2", columns, rows, meta)


def _table3_row(eps: float, config: dict, row_seed: int, source: tuple[np.ndarray, np.ndarray]) -> dict:
    pats, probs = source
    chi = math.tanh(config["r"])
    est = {"no1": [], "no2": [], "no3": []}
    for t in range(config["trials"]):
        rng = trial_rng(row_seed, t)
        samples = pats[rng.choice(len(pats), size=config["N"], p=probs)]
        samples = rng.binomial(samples, 1 - eps)
        emp = EmpiricalDistribution.from_array(samples).to_distribution()
        est["no1"].append(cancel_loss(emp, eps, config["cutoff"], targets=[(1, 1)])[(1, 1)])
        est["no2"].append(series_estimate(emp, eps, (1, 1), config["order"]))
        est["no3"].append(form_aware_estimate_tmsv(emp, eps, chi, config["order"]))
    return est


def run_table3(config: dict, threads: int | None = None) -> Table:
    """Loss cancellation from finite samples: cut-off, series and form-aware estimators.

    Samples are drawn from the lossless distribution and thinned photon by
    photon. Row ``i`` uses master seed ``child_seed(seed, i)`` and trial ``t``
    within it ``child_seed(row_seed, t)``.
    """
    r = config["r"]
    lossless = [(n, n) for n in range(config["source_cutoff"] + 1)]
    probs = np.array([tmsv_exact_prob(r, n) for n, _ in lossless])
    source = (np.array(lossless, dtype=np.int64), probs / probs.sum())
    row_seeds = [child_seed(config["seed"], i) for i in range(len(config["epsilons"]))]
    results = parallel_map(lambda i: _table3_row(config["epsilons"][i], config, row_seeds[i], source), range(len(row_seeds)), threads)
    columns = ["epsilon", "no1_mean", "no1_std", "no2_mean", "no2_std", "no3_mean", "no3_std"]
    rows = []
    trials = {}
    for eps, seed, est in zip(config["epsilons"], row_seeds, results):
        row: list[Any] = [float(eps)]
        for k in ("no1", "no2", "no3"):
            row += [float(np.mean(est[k])), float(np.std(est[k], ddof=1))]
        rows.append(row)
        seeds = [child_seed(seed, t) for t in range(config["trials"])]
        trials[f"{eps:g}"] = {"row_seed": seed, "trial_seeds": seeds, **est}
    meta = {"config": config, "lossless": tmsv_exact_prob(r, 1), "row_seeds": row_seeds, "trials": trials}
    return Table("table3", columns, rows, meta)


def _graph_setup(config: dict):
    adj = gio.book_graph() if config["graph"] is None else _load_graph(config["graph"])
    try:
        state = encode_graph(adj, config["c_graph"])
    except ValueError as exc:
        raise ConfigError(f"graph encoding failed: {exc}") from exc
    return adj, state, PolePolynomials(tuple(graph_squeezing(adj, config["c_graph"])))


def _load_graph(data: dict) -> np.ndarray:
    try:
        return gio.load_graph(data)
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"invalid graph: {exc}") from exc


def _orbit_estimates(state, poles, orbit: Orbit, plan: ExtrapolationPlan, threads) -> tuple[float, float, float]:
    values = [orbit_probability(apply_uniform_loss(state, float(e)), orbit, threads) for e in plan.losses]
    return values[0], extrapolate(values, plan), improved_extrapolate(values, plan, poles, orbit.total)


def cancellation_support(targets: list[Pattern], cutoff: int) -> list[Pattern]:
    """Patterns ``n`` with ``|n| <= cutoff`` that dominate at least one target."""
    modes = len(targets[0])
    out = set()
    for t in targets:
        extra = cutoff - sum(t)
        for add in patterns_up_to(modes, extra):
            out.add(tuple(a + b for a, b in zip(t, add)))
    return sorted(out, key=lambda p: (sum(p), p))


def orbit_loss_cancellation(state, orbit: Orbit, eps: float, cutoff: int, threads=None) -> float:
    """Cancel loss on every orbit member separately, then sum."""
    members = orbit.members()
    if eps == 0:
        return orbit_probability(state, orbit, threads)
    lossy_state = apply_uniform_loss(state, eps)
    support = cancellation_support(members, cutoff)
    lossy = DiscreteDistribution(pattern_probabilities(lossy_state, support, threads), state.modes)
    est = cancel_loss(lossy, eps, cutoff, targets=members)
    return math.fsum(est[m] for m in members)


def run_table4(config: dict, threads: int | None = None) -> Table:
    """All mitigation schemes on one orbit probability of an encoded graph."""
    adj, state, poles = _graph_setup(config)
    orbit = Orbit(tuple(config["orbit"]), len(adj))
    columns = ["photon_loss", "no_mitigation", "extrapolation", "improved_extrapolation", "loss_cancellation"]
    rows = []
    for eps in config["epsilons"]:
        plan = _plan(eps, config["c"])
        poles.check(plan.losses)
        lossy, ext, imp = _orbit_estimates(state, poles, orbit, plan, threads)
        lc = orbit_loss_cancellation(state, orbit, float(eps), config["cutoff"], threads)
        rows.append([float(eps), lossy, ext, imp, lc])
        log.info("table4 eps=%g done", eps)
    return Table("table4", columns, rows, {"config": config, "orbit": orbit.label()})


def run_fig4(config: dict, threads: int | None = None) -> Table:
    """Lossless, lossy and extrapolated probabilities of the single-photon-per-mode orbits."""
    adj, state, poles = _graph_setup(config)
    m = len(adj)
    orbits = [Orbit((1,) * k, m) for k in range(min(config["max_photons"], m) + 1)]
    lossless = {o.label(): orbit_probability(state, o, threads) for o in orbits}
    columns = ["epsilon", "orbit", "lossless", "lossy", "extrapolation", "improved_extrapolation"]
    rows = []
    for eps in config["epsilons"]:
        plan = _plan(eps, config["c"])
        poles.check(plan.losses)
        lossy_states = [apply_uniform_loss(state, float(e)) for e in plan.losses]
        for o in orbits:
            values = [orbit_probability(s, o, threads) for s in lossy_states]
            rows.append([float(eps), o.label(), lossless[o.label()], values[0], extrapolate(values, plan), improved_extrapolate(values, plan, poles, o.total)])
    return Table("fig4", columns, rows, {"config": config})


def _histogram_table(name: str, report, config: dict) -> Table:
    counts, edges = np.histogram(report.trials, bins=config["bins"])
    seeds = [child_seed(config["seed"], t) for t in range(len(report.trials))]
    rows = [[t, str(s), float(v)] for t, (s, v) in enumerate(zip(seeds, report.trials))]
    meta = {
        "config": config,
        "mean": report.mean,
        "std": report.std,
        "histogram": {"counts": counts.tolist(), "edges": edges.tolist()},
    }
    return Table(name, ["trial", "seed", "value"], rows, meta)


def run_fig2(config: dict, threads: int | None = None) -> Table:
    """Extrapolated ``[1, 1]`` probability under binomial sampling noise."""
    _plan(config["epsilon"], config["c"])
    rep = run_probability_fluctuation(config["r"], config["epsilon"], config["c"], config["trials"], config["N"], config["seed"], threads=threads)
    return _histogram_table("fig2", rep, config)


def run_fig3(config: dict, threads: int | None = None) -> Table:
    """Extrapolated ``[1, 1]`` probability under fluctuating loss values."""
    _plan(config["epsilon"], config["c"])
    if config["model"] not in ("attenuator", "loss"):
        raise ConfigError(f"unknown loss-noise model {config['model']!r}")
    rep = run_loss_fluctuation(config["r"], config["epsilon"], config["c"], config["loss_std"], config["trials"], config["seed"], model=config["model"], threads=threads)
    return _histogram_table("fig3", rep, config)


def run_custom(config: dict, threads: int | None = None) -> Table:
    """All mitigation schemes for one pattern or orbit of a graph state or a squeezed pair."""
    if config["r"] is not None:
        if config["graph"] is not None:
            raise ConfigError("give either 'r' or 'graph', not both")
        try:
            state = tmsv_state(config["r"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        poles = PolePolynomials((config["r"],) * 2)
    else:
        _, state, poles = _graph_setup(config)
    if (config["pattern"] is None) == (config["orbit"] is None):
        raise ConfigError("give exactly one of 'pattern' or 'orbit'")
    if config["orbit"] is not None:
        orbit = Orbit(tuple(config["orbit"]), state.modes)
    else:
        if len(config["pattern"]) != state.modes:
            raise ConfigError(f"pattern must have {state.modes} entries")
        orbit = None
    members = orbit.members() if orbit else [as_pattern(config["pattern"])]
    total = sum(members[0])
    plan = _plan(config["epsilon"], config["c"])
    poles.check(plan.losses)
    values = []
    for e in plan.losses:
        probs = pattern_probabilities(apply_uniform_loss(state, float(e)), members, threads)
        values.append(math.fsum(probs[m] for m in members))
    exact = math.fsum(pattern_probabilities(state, members, threads).values())
    row: list[Any] = [pattern_label(members[0]) if orbit is None else orbit.label(), exact, values[0], extrapolate(values, plan), improved_extrapolate(values, plan, poles, total)]
    columns = ["target", "lossless", "no_mitigation", "extrapolation", "improved_extrapolation"]
    if config["cutoff"] is not None:
        cut = config["cutoff"]
        if cut < total:
            raise ConfigError("cutoff is below the target photon number")
        eps = plan.epsilon
        if eps == 0:
            lc = exact
        else:
            support = cancellation_support(members, cut)
            lossy = DiscreteDistribution(pattern_probabilities(apply_uniform_loss(state, eps), support, threads), state.modes)
            est = cancel_loss(lossy, eps, cut, targets=members)
            lc = math.fsum(est[m] for m in members)
        row.append(lc)
        columns.append("loss_cancellation")
    return Table("custom", columns, [row], {"config": config})


RUNNERS: dict[str, Callable[..., Table]] = {
    "table1": run_table1,
    "table2": run_table2,
    "table3": run_table3,
    "table4": run_table4,
    "fig2": run_fig2,
    "fig3": run_fig3,
    "fig4": run_fig4,
    "custom": run_custom,
}


def run(experiment: str, overrides: dict | None = None, threads: int | None = None) -> Table:
    config = validate_config(experiment, overrides)
    return RUNNERS[experiment](config, threads=threads)


def _fmt(v):
    if isinstance(v, float):
        s = f"{v:.6f}"
        return "0.000000" if s == "-0.000000" else s
    return v
