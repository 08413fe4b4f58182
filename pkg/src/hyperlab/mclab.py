"""Monte Carlo experiment harness.

An ExperimentSpec fixes the edge-probability family, the n grid, the trial
count, a master seed and the statistics to collect; run() executes the
trials on hierarchically derived seeds and aggregates them in trial order,
so the report is a pure function of the spec and parallel execution matches
serial execution byte for byte.

Default tolerances: event-probability checks pass within
max(se_mult * stderr, absolute floor); count distributions are compared to
their predicted Poisson law by total-variation distance.  Reports carry the
spec, seeds and schema version; no timestamps, so identical specs produce
identical reports.
"""
from __future__ import annotations

import csv
import json
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import IO, Mapping, Sequence

import numpy as np

from . import branching, butterfly, census, hypercore, predict, rng, sampler

__all__ = [
    "StatSelect",
    "ExperimentSpec",
    "ExperimentReport",
    "PoissonFit",
    "run",
    "poisson_fit",
    "sweep",
    "write_sweep_csv",
    "spec_from_json",
    "spec_to_json",
]

SCHEMA_VERSION = 1

DEFAULT_TOLERANCES: dict[str, float] = {
    "event_abs": 0.02,
    "event_se_mult": 3.0,
    "tv": 0.05,
    "mu_violation": 0.05,
}


@dataclass(frozen=True)
class StatSelect:
    """Which statistics each trial collects."""

    butterfly_orders: int | None = None
    marked: tuple[tuple[int, int], ...] = ()
    d_l: tuple[int, ...] = ()
    tilde_d_l: tuple[int, ...] = ()
    connectivity: bool = False
    mu: bool = False
    degree_le: int | None = None
    unicyclic_cores: bool = False
    local_limit: tuple[int, int, int] | None = None  # (r, s, roots)
    mu_side: tuple[int, str, float] | None = None  # (l, 'lower'|'upper', factor)

    def __post_init__(self):
        if not (
            self.butterfly_orders is not None
            or self.marked
            or self.d_l
            or self.tilde_d_l
            or self.connectivity
            or self.mu
            or self.degree_le is not None
            or self.unicyclic_cores
            or self.local_limit is not None
            or self.mu_side is not None
        ):
            raise ValueError("at least one statistic must be selected")
        if self.mu_side is not None and self.mu_side[1] not in ("lower", "upper"):
            raise ValueError("mu_side side must be 'lower' or 'upper'")


@dataclass(frozen=True)
class ExperimentSpec:
    family: predict.Family
    d: int
    n_grid: tuple[int, ...]
    trials: int
    seed: int
    stats: StatSelect
    tolerances: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.n_grid:
            raise ValueError("n grid must be nonempty")
        fam_d = getattr(self.family, "d", None)
        if fam_d is not None and fam_d != self.d:
            raise ValueError(f"family d={fam_d} disagrees with spec d={self.d}")

    def tolerance(self, name: str) -> float:
        return dict(DEFAULT_TOLERANCES, **dict(self.tolerances))[name]


@dataclass
class ExperimentReport:
    spec_json: dict
    results: dict
    checks: dict

    @property
    def all_pass(self) -> bool:
        return all(c.get("pass", True) for c in self.checks.values())

    def to_json_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "spec": self.spec_json,
            "results": self.results,
            "checks": self.checks,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2)


# ---------------------------------------------------------------------------
# per-trial work
# ---------------------------------------------------------------------------


def _trial_stats(args: tuple) -> dict:
    family, d, n, seed, sel = args
    p = family.evaluate(n)
    H = sampler.sample(sampler.SampleSpec(d=d, n=n, p=p, seed=seed))
    out: dict = {"edge_count": H.m}
    need_components = bool(
        sel.butterfly_orders is not None
        or sel.d_l
        or sel.tilde_d_l
        or sel.connectivity
        or sel.mu
        or sel.unicyclic_cores
        or sel.mu_side is not None
    )
    comp = hypercore.components(H) if need_components else None
    if sel.connectivity:
        out["connected"] = bool(comp.is_connected())
    if sel.mu or sel.mu_side is not None:
        out["mu"] = comp.mu() if n else 0
    if sel.d_l:
        out["d_l"] = {l: census.D_l(H, l, comp) for l in sel.d_l}
    if sel.tilde_d_l:
        out["tilde_d_l"] = {l: census.tilde_D_l(H, l, comp) for l in sel.tilde_d_l}
    if sel.butterfly_orders is not None:
        counts, _ = census.butterfly_component_counts(H, comp, sel.butterfly_orders)
        out["butterfly"] = {(l, code.hex()): c for (l, code), c in counts.items()}
    if sel.marked:
        l_max = max(l for l, _ in sel.marked)
        v_max = max(v for _, v in sel.marked)
        wanted = set(sel.marked)
        counts, _ = census.minimal_marked_copy_counts(H, l_max, v_max, wanted=wanted)
        out["marked"] = {
            (l, v, code.hex()): c for (l, v, code), c in counts.items()
        }
    if sel.unicyclic_cores:
        out["unicyclic"] = census.unicyclic_core_counts(H, comp)
    if sel.degree_le is not None:
        deg = H.degree_array()
        out["degree_le"] = int(np.count_nonzero(deg <= sel.degree_le)) if n else 0
        out["min_degree"] = int(deg.min()) if n else None
    if sel.local_limit is not None:
        r, s, roots = sel.local_limit
        mu_proc = p * float(n) ** d / math.factorial(d)
        out["local_tv"] = branching.local_limit_distance(
            H, r, s, mu_proc, roots, seed=rng.derive_seed(seed, 1)
        )
    return out


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------


def _freq_entry(hits: int, trials: int) -> dict:
    f = hits / trials
    return {
        "frequency": f,
        "stderr": math.sqrt(f * (1.0 - f) / trials),
        "trials": trials,
    }


def _count_entry(hist: Counter, trials: int) -> dict:
    values = sorted(hist)
    total = sum(hist.values())
    zeros = trials - total
    if zeros:
        hist = Counter(hist)
        hist[0] += zeros
        values = sorted(hist)
    mean = sum(k * c for k, c in hist.items()) / trials
    var = sum((k - mean) ** 2 * c for k, c in hist.items()) / trials
    return {
        "mean": mean,
        "stderr": math.sqrt(var / trials),
        "histogram": {str(k): hist[k] for k in values},
        "trials": trials,
    }


@dataclass
class PoissonFit:
    tv: float
    factorial_moments: list[dict]

    def to_json_dict(self) -> dict:
        return {"tv": self.tv, "factorial_moments": self.factorial_moments}


def poisson_fit(observed: Mapping[int, int] | Sequence[int], lam: float) -> PoissonFit:
    """TV distance to Poisson(lam) plus factorial-moment estimates r = 1..3."""
    if lam < 0:
        raise ValueError("lam must be >= 0")
    hist: Counter = Counter()
    if isinstance(observed, Mapping):
        for k, c in observed.items():
            hist[int(k)] += int(c)
    else:
        for k in observed:
            hist[int(k)] += 1
    total = sum(hist.values())
    if total == 0:
        raise ValueError("observed sample is empty")
    top = max(hist)
    diff = 0.0
    tail = 1.0
    for k in range(top + 1):
        pk = math.exp(-lam + k * math.log(lam) - math.lgamma(k + 1)) if lam > 0 else (
            1.0 if k == 0 else 0.0
        )
        tail -= pk
        diff += abs(hist.get(k, 0) / total - pk)
    tv = 0.5 * (diff + max(0.0, tail))
    moments = []
    for order in range(1, 4):
        per = {
            k: math.prod(range(k, k - order, -1)) for k in hist
        }
        est = sum(per[k] * c for k, c in hist.items()) / total
        var = sum((per[k] - est) ** 2 * c for k, c in hist.items()) / total
        moments.append(
            {
                "order": order,
                "estimate": est,
                "stderr": math.sqrt(var / total),
                "predicted": lam**order,
            }
        )
    return PoissonFit(tv=tv, factorial_moments=moments)


def _predicted_event(spec: ExperimentSpec, name: str, l: int | None) -> float | None:
    try:
        if name in ("connected", "d_l", "tilde_d_l"):
            return predict.prob_Dl_limit(spec.d, 0 if l is None else l, spec.family)
    except ValueError:
        return None
    return None


def _butterfly_lambda(spec: ExperimentSpec, btype: butterfly.ButterflyType) -> float | None:
    fam = spec.family
    if isinstance(fam, predict.ButterflyWindow) and fam.l == btype.order:
        return predict.bb_lambda(btype, fam.c)
    if isinstance(fam, predict.PowerLaw) and btype.order >= 1:
        thr = (1 + btype.order * spec.d) / btype.order
        if math.isclose(fam.alpha, thr, rel_tol=1e-12):
            return predict.bb_lambda(btype, fam.C)
    return None


def _marked_lambda(
    spec: ExperimentSpec, mtype: butterfly.MarkedButterflyType
) -> float | None:
    fam = spec.family
    if (
        isinstance(fam, predict.FineWindow)
        and fam.l == mtype.order
        and fam.v_star == mtype.v_star
        and mtype.v_star >= 1
    ):
        return predict.bc_lambda(mtype, fam.c)
    return None


def _aggregate(spec: ExperimentSpec, n: int, trials: list[dict]) -> dict:
    sel = spec.stats
    T = len(trials)
    p = spec.family.evaluate(n)
    out: dict = {"trials": T, "p": p}
    out["edge_count"] = _count_entry(
        Counter(t["edge_count"] for t in trials), T
    )
    del out["edge_count"]["histogram"]  # can be huge and is rarely useful

    events: dict = {}
    if sel.connectivity:
        hits = sum(1 for t in trials if t["connected"])
        entry = _freq_entry(hits, T)
        entry["predicted"] = _predicted_event(spec, "connected", 0)
        events["connected"] = entry
    for l in sel.d_l:
        hits = sum(1 for t in trials if t["d_l"][l])
        entry = _freq_entry(hits, T)
        entry["predicted"] = _predicted_event(spec, "d_l", l)
        events[f"D_{l}"] = entry
    for l in sel.tilde_d_l:
        hits = sum(1 for t in trials if t["tilde_d_l"][l])
        entry = _freq_entry(hits, T)
        entry["predicted"] = _predicted_event(spec, "tilde_d_l", l)
        events[f"tilde_D_{l}"] = entry
    for l in set(sel.d_l) & set(sel.tilde_d_l):
        hits = sum(1 for t in trials if t["d_l"][l] != t["tilde_d_l"][l])
        events[f"D_{l} xor tilde_D_{l}"] = _freq_entry(hits, T)
    if events:
        out["events"] = events

    if sel.mu or sel.mu_side is not None:
        out["mu"] = _count_entry(Counter(t["mu"] for t in trials), T)
        if sel.mu_side is not None:
            l, side, factor = sel.mu_side
            lower, upper = predict.mu_bounds(spec.d, l, n)
            cutoff = factor * (lower if side == "lower" else upper)
            if side == "lower":
                viol = sum(1 for t in trials if t["mu"] <= cutoff)
            else:
                viol = sum(1 for t in trials if t["mu"] >= cutoff)
            out["mu"]["bound"] = {
                "l": l,
                "side": side,
                "cutoff": cutoff,
                "violations": _freq_entry(viol, T),
            }

    if sel.butterfly_orders is not None:
        table: dict = {}
        hists: dict[tuple[int, str], Counter] = {}
        for t in trials:
            for key, c in t["butterfly"].items():
                hists.setdefault(key, Counter())[c] += 1
        # include every enumerated type of the requested orders, observed or not
        for l in range(sel.butterfly_orders + 1):
            for bt in butterfly.enumerate_types(spec.d, l):
                hists.setdefault((l, bt.code.hex()), Counter())
        for (l, code_hex), hist in sorted(hists.items()):
            entry = _count_entry(hist, T)
            bt = _type_by_code(spec.d, l, code_hex)
            if bt is not None:
                lam = _butterfly_lambda(spec, bt)
                entry["lambda"] = lam
                entry["expected"] = predict.expected_butterfly_components(bt, n, p)
                if lam is not None:
                    entry["poisson_fit"] = poisson_fit(
                        {int(k): v for k, v in entry["histogram"].items()}, lam
                    ).to_json_dict()
            table[f"{l}:{code_hex}"] = entry
        out["butterfly_counts"] = table

    if sel.marked:
        table = {}
        hists = {}
        for t in trials:
            for key, c in t["marked"].items():
                hists.setdefault(key, Counter())[c] += 1
        for l, v_star in sel.marked:
            for mt in butterfly.enumerate_marked_types(spec.d, l, v_star):
                hists.setdefault((l, v_star, mt.code.hex()), Counter())
        for (l, v_star, code_hex), hist in sorted(hists.items()):
            entry = _count_entry(hist, T)
            mt = _marked_type_by_code(spec.d, l, v_star, code_hex)
            if mt is not None:
                lam = _marked_lambda(spec, mt)
                entry["lambda"] = lam
                entry["expected"] = predict.expected_marked_copies(mt, n, p)
                if lam is not None:
                    entry["poisson_fit"] = poisson_fit(
                        {int(k): v for k, v in entry["histogram"].items()}, lam
                    ).to_json_dict()
            table[f"{l}:{v_star}:{code_hex}"] = entry
        out["marked_counts"] = table

    if sel.unicyclic_cores:
        hists = {}
        for t in trials:
            for sig, c in t["unicyclic"].items():
                hists.setdefault(sig, Counter())[c] += 1
        out["unicyclic"] = {
            sig: _count_entry(hist, T) for sig, hist in sorted(hists.items())
        }

    if sel.degree_le is not None:
        out["degree"] = {
            "k": sel.degree_le,
            "le_k": _count_entry(Counter(t["degree_le"] for t in trials), T),
            "min_degree": _count_entry(Counter(t["min_degree"] for t in trials), T),
        }

    if sel.local_limit is not None:
        tvs = [t["local_tv"] for t in trials]
        mean = sum(tvs) / T
        var = sum((x - mean) ** 2 for x in tvs) / T
        r, s, roots = sel.local_limit
        out["local_limit"] = {
            "r": r,
            "s": s,
            "roots": roots,
            "mu": p * float(n) ** spec.d / math.factorial(spec.d),
            "tv_mean": mean,
            "tv_stderr": math.sqrt(var / T),
        }
    return out


def _type_by_code(d: int, l: int, code_hex: str) -> butterfly.ButterflyType | None:
    for bt in butterfly.enumerate_types(d, l):
        if bt.code.hex() == code_hex:
            return bt
    return None


def _marked_type_by_code(
    d: int, l: int, v_star: int, code_hex: str
) -> butterfly.MarkedButterflyType | None:
    for mt in butterfly.enumerate_marked_types(d, l, v_star, minimal_only=False):
        if mt.code.hex() == code_hex:
            return mt
    return None


def _build_checks(spec: ExperimentSpec, results: dict) -> dict:
    checks: dict = {}
    abs_tol = spec.tolerance("event_abs")
    se_mult = spec.tolerance("event_se_mult")
    tv_tol = spec.tolerance("tv")
    mu_tol = spec.tolerance("mu_violation")
    for n_key, res in results.items():
        for name, entry in res.get("events", {}).items():
            pred = entry.get("predicted")
            if pred is None:
                continue
            gap = abs(entry["frequency"] - pred)
            tol = max(se_mult * entry["stderr"], abs_tol)
            checks[f"n={n_key}:{name}"] = {
                "frequency": entry["frequency"],
                "predicted": pred,
                "gap": gap,
                "tolerance": tol,
                "pass": gap <= tol,
            }
        for table_name in ("butterfly_counts", "marked_counts"):
            for key, entry in res.get(table_name, {}).items():
                fit = entry.get("poisson_fit")
                if fit is None:
                    continue
                checks[f"n={n_key}:{table_name}:{key}"] = {
                    "tv": fit["tv"],
                    "lambda": entry["lambda"],
                    "mean": entry["mean"],
                    "tolerance": tv_tol,
                    "pass": fit["tv"] <= tv_tol,
                }
        bound = res.get("mu", {}).get("bound")
        if bound is not None:
            freq = bound["violations"]["frequency"]
            checks[f"n={n_key}:mu_{bound['side']}"] = {
                "violation_frequency": freq,
                "cutoff": bound["cutoff"],
                "tolerance": mu_tol,
                "pass": freq <= mu_tol,
            }
        ll = res.get("local_limit")
        if ll is not None:
            checks[f"n={n_key}:local_limit"] = {
                "tv": ll["tv_mean"],
                "tolerance": tv_tol,
                "pass": ll["tv_mean"] <= tv_tol,
            }
    return checks


def run(spec: ExperimentSpec, workers: int = 1) -> ExperimentReport:
    """Execute the experiment; deterministic in the spec, parallel or not."""
    results: dict = {}
    for n_index, n in enumerate(spec.n_grid):
        seed_n = rng.derive_seed(spec.seed, n_index)
        args = [
            (spec.family, spec.d, n, rng.derive_seed(seed_n, t), spec.stats)
            for t in range(spec.trials)
        ]
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                trials = list(
                    pool.map(_trial_stats, args, chunksize=max(1, len(args) // (8 * workers)))
                )
        else:
            trials = [_trial_stats(a) for a in args]
        results[str(n)] = _aggregate(spec, n, trials)
    checks = _build_checks(spec, results)
    return ExperimentReport(spec_json=spec_to_json_dict(spec), results=results, checks=checks)


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

_SWEEP_PARAMS = {"c": "c", "C": "C", "lambda": "lam", "lam": "lam", "alpha": "alpha"}


def sweep(
    spec: ExperimentSpec, param: str, values: Sequence[float], workers: int = 1
) -> list[dict]:
    """Run the experiment per grid value of one family parameter.

    Emits one row per (value, n, event statistic) with frequency and stderr:
    the empirical threshold S-curve.
    """
    if not values:
        raise ValueError("sweep grid must be nonempty")
    attr = _SWEEP_PARAMS.get(param)
    if attr is None or not hasattr(spec.family, attr):
        raise ValueError(f"family {type(spec.family).__name__} has no parameter {param!r}")
    rows: list[dict] = []
    for value in values:
        fam = replace(spec.family, **{attr: value})
        sub = replace(spec, family=fam)
        report = run(sub, workers=workers)
        for n_key, res in report.results.items():
            for name, entry in res.get("events", {}).items():
                rows.append(
                    {
                        "param": param,
                        "value": value,
                        "n": int(n_key),
                        "statistic": name,
                        "frequency": entry["frequency"],
                        "stderr": entry["stderr"],
                    }
                )
    return rows


def write_sweep_csv(rows: Sequence[dict], stream: IO[str]) -> None:
    writer = csv.DictWriter(
        stream, fieldnames=["param", "value", "n", "statistic", "frequency", "stderr"]
    )
    writer.writeheader()
    for row in rows:
        writer.writerow(row)


# ---------------------------------------------------------------------------
# JSON round trip
# ---------------------------------------------------------------------------


def spec_to_json_dict(spec: ExperimentSpec) -> dict:
    sel = spec.stats
    stats = {
        "butterfly_orders": sel.butterfly_orders,
        "marked": [list(x) for x in sel.marked],
        "d_l": list(sel.d_l),
        "tilde_d_l": list(sel.tilde_d_l),
        "connectivity": sel.connectivity,
        "mu": sel.mu,
        "degree_le": sel.degree_le,
        "unicyclic_cores": sel.unicyclic_cores,
        "local_limit": list(sel.local_limit) if sel.local_limit else None,
        "mu_side": list(sel.mu_side) if sel.mu_side else None,
    }
    return {
        "schema_version": SCHEMA_VERSION,
        "family": predict.family_to_string(spec.family),
        "d": spec.d,
        "n_grid": list(spec.n_grid),
        "trials": spec.trials,
        "seed": spec.seed,
        "stats": stats,
        "tolerances": dict(spec.tolerances),
    }


def spec_to_json(spec: ExperimentSpec) -> str:
    return json.dumps(spec_to_json_dict(spec), sort_keys=True, indent=2)


def spec_from_json(data: str | dict) -> ExperimentSpec:
    obj = json.loads(data) if isinstance(data, str) else data
    stats_obj = obj.get("stats", {})
    sel = StatSelect(
        butterfly_orders=stats_obj.get("butterfly_orders"),
        marked=tuple((int(l), int(v)) for l, v in stats_obj.get("marked", [])),
        d_l=tuple(int(x) for x in stats_obj.get("d_l", [])),
        tilde_d_l=tuple(int(x) for x in stats_obj.get("tilde_d_l", [])),
        connectivity=bool(stats_obj.get("connectivity", False)),
        mu=bool(stats_obj.get("mu", False)),
        degree_le=stats_obj.get("degree_le"),
        unicyclic_cores=bool(stats_obj.get("unicyclic_cores", False)),
        local_limit=tuple(stats_obj["local_limit"]) if stats_obj.get("local_limit") else None,
        mu_side=tuple(stats_obj["mu_side"]) if stats_obj.get("mu_side") else None,
    )
    return ExperimentSpec(
        family=predict.parse_family(obj["family"]),
        d=int(obj["d"]),
        n_grid=tuple(int(x) for x in obj["n_grid"]),
        trials=int(obj["trials"]),
        seed=int(obj["seed"]),
        stats=sel,
        tolerances=dict(obj.get("tolerances", {})),
    )
