"""Seeded Monte Carlo campaigns, moment and tail estimators, CSV persistence.

Per-trial seeds come from SplitMix64: ``derive_seed(master, i)`` is the
SplitMix64 output for state ``master + (i + 1) * 0x9E3779B97F4A7C15`` (mod 2^64).
A trial depends only on its seed, so campaigns give the same records for any
worker count.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math

import mpmath
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

from . import __version__
from .binopt import BinDecisionInstance, adaptive_solve, brute_force_decide, default_b0, parse_structure
from .dist import Phi, coefficient_family
from .gaps import binomial_stderr, gap_table, lexicographic, sample_gap_values, scrambled
from .graphs import Graph, PerturbedGraphModel, color_decide, noclique_bound, perturb
from .scheme import Scheme, step_count

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
TARGETS = ("solve", "gapsim", "colorsim", "scheme-sim", "tailcheck")


def splitmix64(state: int) -> int:
    z = state & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, index: int) -> int:
    return splitmix64(master + (index + 1) * GOLDEN)


# ---------------------------------------------------------------------------
# records and configuration


@dataclass
class TrialRecord:
    index: int
    seed: int
    steps: int
    outcome: str
    payload: dict = field(default_factory=dict)


class ConfigError(ValueError):
    def __init__(self, problems: list[str]):
        super().__init__("invalid config: " + "; ".join(problems))
        self.problems = problems


@dataclass
class ExperimentConfig:
    target: str = "solve"
    structure: str = "subsets"
    n: int = 8
    W: int | None = None
    k: int = 3
    rho: int = 1
    phi_exp: int | None = None
    eps_flip: str | None = None
    t: int | None = None
    trials: int = 1000
    seed: int = 0
    delta_grid: list[int] | None = None
    deltas: list[str] = field(default_factory=lambda: ["1/2", "1/4", "1/8"])
    b0: int | None = None
    eps: str = "1/2"
    c: int = 3
    inner: str = "solve"
    ranking: str = "lex"
    centers: list[int] | None = None
    base: str | None = None
    additive: bool = False
    check_oracle: bool = True

    # not part of the experiment identity
    threads: int = 1
    out: str | None = None

    IDENTITY_EXCLUDES = ("threads", "out")

    def __post_init__(self):
        if self.W is None:
            self.W = self.n
        problems = self.validate()
        if problems:
            raise ConfigError(problems)

    def validate(self) -> list[str]:
        p = []
        if self.target not in TARGETS:
            p.append(f"target must be one of {TARGETS}")
        if self.n < 1:
            p.append("n must be positive")
        if self.W is not None and self.W < 1:
            p.append("W must be positive")
        if self.trials < 0:
            p.append("trials must be nonnegative")
        if not 0 <= self.seed <= MASK64:
            p.append("seed must be a 64-bit unsigned integer")
        if self.W is not None and not 1 <= self.rho <= 1 << (self.n * self.W):
            p.append("rho must lie in [1, 2^(n*W)]")
        if self.k < 1:
            p.append("k must be positive")
        if self.threads < 1:
            p.append("threads must be positive")
        if self.inner not in ("solve", "color"):
            p.append("inner must be solve or color")
        if self.ranking not in ("lex", "scrambled"):
            p.append("ranking must be lex or scrambled")
        try:
            e = Fraction(self.eps)
            if e <= 0:
                p.append("eps must be positive")
        except (ValueError, ZeroDivisionError):
            p.append(f"eps {self.eps!r} is not a rational number")
        try:
            parse_structure(self.structure)
        except ValueError as exc:
            p.append(str(exc))
        return p

    def identity(self) -> dict:
        d = dataclasses.asdict(self)
        for key in self.IDENTITY_EXCLUDES:
            d.pop(key)
        return d

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        data = json.loads(text)
        unknown = sorted(set(data) - {f.name for f in dataclasses.fields(cls)})
        if unknown:
            raise ConfigError([f"unknown field {k!r}" for k in unknown])
        return cls(**data)

    def config_hash(self) -> str:
        return hashlib.sha256(json.dumps(self.identity(), sort_keys=True).encode()).hexdigest()[:16]

    # derived quantities ------------------------------------------------

    def threshold(self) -> int:
        return self.t if self.t is not None else self.n << (self.W - 2) if self.W >= 2 else self.n // 2

    def coefficient_family(self):
        return coefficient_family(self.n, self.W, self.rho, self.centers)

    def graph_model(self) -> PerturbedGraphModel:
        base = self.base if self.base is not None else "0" * (self.n * (self.n - 1) // 2)
        if self.eps_flip is not None:
            return PerturbedGraphModel.from_eps(self.n, base, Fraction(self.eps_flip), self.additive)
        pairs = self.n * (self.n - 1) // 2
        e = self.phi_exp if self.phi_exp is not None else pairs
        return PerturbedGraphModel.from_phi(self.n, base, Phi(1, e), self.additive)

    def delta_values(self) -> list[int]:
        if self.delta_grid:
            return list(self.delta_grid)
        return default_delta_grid(self.n, self.W)


def default_delta_grid(n: int, W: int, points: int = 8) -> list[int]:
    """Log-spaced integer grid from 1 to about ``2**W / n``."""
    top = max(1, (1 << W) // n)
    grid = sorted({max(1, round(top ** (i / (points - 1)))) for i in range(points)})
    v = grid[-1]
    while len(grid) < points:
        v += 1
        grid.append(v)
    return grid


# ---------------------------------------------------------------------------
# per-trial work


def solve_trial(cfg: ExperimentConfig, family, index: int) -> TrialRecord:
    seed = derive_seed(cfg.seed, index)
    inst = BinDecisionInstance(cfg.n, cfg.W, parse_structure(cfg.structure), tuple(family.sample_values(seed)),
                               cfg.threshold())
    trace = adaptive_solve(inst, cfg.b0)
    payload = {"answer": int(trace.answer), "bits_revealed": trace.bits_revealed}
    if cfg.check_oracle and cfg.n <= 16:
        payload["oracle_agrees"] = int(brute_force_decide(inst)[0] == trace.answer)
    return TrialRecord(index, seed, trace.steps, "accept" if trace.answer else "reject", payload)


def color_trial(cfg: ExperimentConfig, model: PerturbedGraphModel, index: int) -> TrialRecord:
    seed = derive_seed(cfg.seed, index)
    res = color_decide(perturb(model, seed), cfg.k)
    payload = {"clique_found": int(res.clique_found), "answer": int(res.answer)}
    return TrialRecord(index, seed, res.steps, "accept" if res.answer else "reject", payload)


def inner_algorithm(cfg: ExperimentConfig):
    """Algorithm, sampler and ``N * phi`` for the scheme experiments."""
    if cfg.inner == "solve":
        family = cfg.coefficient_family()
        structure = parse_structure(cfg.structure)
        t = cfg.threshold()

        def make(seed):
            return BinDecisionInstance(cfg.n, cfg.W, structure, tuple(family.sample_values(seed)), t)

        def algorithm(inst, counter):
            return adaptive_solve(inst, cfg.b0, counter).answer

        return algorithm, make, Fraction(family.N) * family.phi.value
    model = cfg.graph_model()

    def make(seed):
        return perturb(model, seed)

    def algorithm(graph, counter):
        return color_decide(graph, cfg.k, counter).answer

    fam = model.family()
    return algorithm, make, Fraction(fam.N) * fam.phi.value


def scheme_trial(cfg: ExperimentConfig, parts, index: int) -> TrialRecord:
    algorithm, make, N_phi = parts
    seed = derive_seed(cfg.seed, index)
    item = make(seed)
    answer, steps = step_count(algorithm, item)
    scheme = Scheme(algorithm, Fraction(cfg.eps), cfg.n, N_phi)
    outcomes = {}
    errors = 0
    for d in cfg.deltas:
        out = scheme(item, Fraction(d))
        outcomes[d] = out.result
        if not out.is_bottom and out.answer != answer:
            errors += 1
    payload = {"answer": int(answer), "outcomes": outcomes, "errors": errors}
    return TrialRecord(index, seed, steps, "accept" if answer else "reject", payload)


def gap_trials(cfg: ExperimentConfig, family, indices: Sequence[int]) -> list[TrialRecord]:
    ranking = lexicographic if cfg.ranking == "lex" else scrambled(cfg.seed)
    seeds = [derive_seed(cfg.seed, i) for i in indices]
    gammas, lams = sample_gap_values(parse_structure(cfg.structure), family, cfg.threshold(), seeds, ranking)
    return [TrialRecord(i, s, 0, "gap", {"gamma": g, "lambda": v}) for i, s, g, v in zip(indices, seeds, gammas, lams)]


# ---------------------------------------------------------------------------
# campaigns


@dataclass
class CampaignResult:
    config: ExperimentConfig
    records: list[TrialRecord]
    summary: dict
    columns: list[str]
    rows: list[list]

    @property
    def ok(self) -> bool:
        return bool(self.summary.get("ok", True))

    def header(self) -> str:
        meta = {
            "config_hash": self.config.config_hash(),
            "master_seed": self.config.seed,
            "target": self.config.target,
            "tool": "smoothedp",
            "version": __version__,
        }
        return "# " + json.dumps(meta, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(self.header() + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        writer.writerows(self.rows)
        return buf.getvalue()

    def write(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())


def _parallel(fn: Callable[[int], TrialRecord], trials: int, threads: int) -> list[TrialRecord]:
    if threads <= 1 or trials <= 1:
        return [fn(i) for i in range(trials)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        records = list(pool.map(fn, range(trials), chunksize=max(1, trials // (threads * 8))))
    return sorted(records, key=lambda r: r.index)


def _chunked(fn: Callable[[Sequence[int]], list[TrialRecord]], trials: int, threads: int) -> list[TrialRecord]:
    size = max(1, -(-trials // max(threads, 1)))
    chunks = [range(lo, min(lo + size, trials)) for lo in range(0, trials, size)]
    if threads <= 1:
        parts = [fn(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(fn, chunks))
    return sorted((r for part in parts for r in part), key=lambda r: r.index)


def run_campaign(cfg: ExperimentConfig, threads: int | None = None) -> CampaignResult:
    threads = threads if threads is not None else cfg.threads
    if cfg.target in ("solve", "tailcheck"):
        family = cfg.coefficient_family()
        records = _parallel(lambda i: solve_trial(cfg, family, i), cfg.trials, threads)
        if cfg.target == "solve":
            return _summarize_solve(cfg, family, records)
        return _summarize_tail(cfg, family, records)
    if cfg.target == "gapsim":
        family = cfg.coefficient_family()
        records = _chunked(lambda idx: gap_trials(cfg, family, idx), cfg.trials, threads)
        return _summarize_gaps(cfg, family, records)
    if cfg.target == "colorsim":
        model = cfg.graph_model()
        records = _parallel(lambda i: color_trial(cfg, model, i), cfg.trials, threads)
        return _summarize_color(cfg, model, records)
    parts = inner_algorithm(cfg)
    records = _parallel(lambda i: scheme_trial(cfg, parts, i), cfg.trials, threads)
    return _summarize_scheme(cfg, parts[2], records)


def bits_tail(records: Sequence[TrialRecord], cfg: ExperimentConfig, family) -> list[dict]:
    """Fraction of trials revealing more than ``b`` bits against ``2^(W-b) phi^(1/n) n^2``."""
    root = family.phi.root_float(cfg.n)
    trials = len(records)
    b0 = cfg.b0 if cfg.b0 is not None else default_b0(cfg.n)
    rows = []
    for b in range(min(b0, cfg.W), cfg.W + 1):
        frac = sum(1 for r in records if r.payload["bits_revealed"] > b) / trials if trials else 0.0
        se = binomial_stderr(frac, trials)
        bound = math.nextafter(2.0 ** (cfg.W - b) * root * cfg.n ** 2, math.inf)
        rows.append({"b": b, "fraction": frac, "stderr": se, "bound": bound, "ok": frac <= bound + 3 * se})
    return rows


def _summarize_solve(cfg, family, records) -> CampaignResult:
    columns = ["trial", "seed", "answer", "bits_revealed", "steps"]
    rows = [[r.index, r.seed, r.payload["answer"], r.payload["bits_revealed"], r.steps] for r in records]
    summary: dict[str, Any] = {"trials": len(records)}
    if not records:
        summary.update(no_data=True, ok=True)
        return CampaignResult(cfg, records, summary, columns, rows)
    tail = bits_tail(records, cfg, family)
    agree = [r.payload["oracle_agrees"] for r in records if "oracle_agrees" in r.payload]
    summary.update(
        yes_rate=sum(r.payload["answer"] for r in records) / len(records),
        mean_bits=sum(r.payload["bits_revealed"] for r in records) / len(records),
        bits_tail=tail,
        oracle_checked=len(agree),
        oracle_agreement=sum(agree) / len(agree) if agree else None,
    )
    summary["ok"] = all(row["ok"] for row in tail) and all(agree)
    return CampaignResult(cfg, records, summary, columns, rows)


def _summarize_tail(cfg, family, records) -> CampaignResult:
    eps = Fraction(cfg.eps)
    N_phi = Fraction(family.N) * family.phi.value
    summary: dict[str, Any] = {"trials": len(records)}
    columns = ["T", "p_emp", "bound", "markov"]
    if not records:
        summary.update(no_data=True, ok=True)
        return CampaignResult(cfg, records, summary, columns, [])
    steps = [r.steps for r in records]
    curve = tail_curve(steps, eps, cfg.n, cfg.c, N_phi)
    moment = moment_estimate(steps, eps, cfg.n, N_phi)
    markov = markov_consistent(steps, eps, [row.T for row in curve])
    rows = [[row.T, row.p_emp, row.bound, row.markov] for row in curve]
    summary.update(
        moment=dataclasses.asdict(moment),
        tail_ok=all(row.p_emp <= row.bound for row in curve),
        markov_ok=markov,
    )
    summary["ok"] = summary["tail_ok"] and markov
    return CampaignResult(cfg, records, summary, columns, rows)


def _summarize_gaps(cfg, family, records) -> CampaignResult:
    columns = ["delta", "p_gamma_emp", "p_lambda_emp", "stderr", "bound", "trials"]
    summary: dict[str, Any] = {"trials": len(records)}
    if not records:
        summary.update(no_data=True, ok=True)
        return CampaignResult(cfg, records, summary, columns, [])
    report = family.mass_bound_check()
    if not report.ok:
        raise ValueError("coefficient distribution violates the per-coefficient density bound")
    table = gap_table([r.payload["gamma"] for r in records], [r.payload["lambda"] for r in records],
                      cfg.delta_values(), family.phi, cfg.n, monotone=cfg.ranking == "lex")
    rows = [[g.delta, g.p_gamma, g.p_lambda, g.stderr, g.bound, g.trials] for g in table]
    summary["ok"] = all(g.ok for g in table)
    return CampaignResult(cfg, records, summary, columns, rows)


def _summarize_color(cfg, model, records) -> CampaignResult:
    columns = ["trial", "seed", "clique_found", "answer", "steps"]
    rows = [[r.index, r.seed, r.payload["clique_found"], r.payload["answer"], r.steps] for r in records]
    summary: dict[str, Any] = {"trials": len(records), "eps": float(model.eps)}
    if not records:
        summary.update(no_data=True, ok=True)
        return CampaignResult(cfg, records, summary, columns, rows)
    exhaustive = sum(1 for r in records if not r.payload["clique_found"]) / len(records)
    se = binomial_stderr(exhaustive, len(records))
    summary.update(exhaustive_rate=exhaustive, stderr=se)
    if model.eps > 0 and not model.additive:
        bound = noclique_bound(cfg.n, cfg.k, float(model.eps))
        summary["bound"] = bound
        summary["ok"] = exhaustive <= bound + 3 * se
    else:
        summary["ok"] = True
    return CampaignResult(cfg, records, summary, columns, rows)


def _summarize_scheme(cfg, N_phi, records) -> CampaignResult:
    columns = ["delta", "bottom_rate", "stderr", "budget"]
    summary: dict[str, Any] = {"trials": len(records)}
    if not records:
        summary.update(no_data=True, ok=True)
        return CampaignResult(cfg, records, summary, columns, [])
    rows = []
    ok = all(r.payload["errors"] == 0 for r in records)
    summary["errorless"] = ok
    dummy = Scheme(lambda item, counter: True, Fraction(cfg.eps), cfg.n, N_phi)
    for d in cfg.deltas:
        rate = sum(1 for r in records if r.payload["outcomes"][d] == "bottom") / len(records)
        se = binomial_stderr(rate, len(records))
        rows.append([d, rate, se, dummy.budget(Fraction(d))])
        ok = ok and rate <= float(Fraction(d)) + 3 * se
    summary["ok"] = ok
    return CampaignResult(cfg, records, summary, columns, rows)


# ---------------------------------------------------------------------------
# estimators


def power(t: int, eps: Fraction | float) -> float:
    """``t ** eps`` as a float, evaluated with 30 significant digits.

    Works for arbitrarily large integers; results beyond float range are inf.
    """
    if t <= 0:
        return 0.0
    eps = Fraction(eps)
    with mpmath.workdps(30):
        return float(mpmath.power(mpmath.mpf(t), mpmath.mpf(eps.numerator) / eps.denominator))


@dataclass(frozen=True)
class MomentEstimate:
    mean: float
    stderr: float
    bound: float
    ratio: float
    trials: int


def moment_estimate(steps: Sequence[int], eps, n: int, N_phi) -> MomentEstimate:
    """Sample mean of ``t**eps`` next to ``n * N * phi``."""
    if not steps:
        raise ValueError("moment estimate needs at least one record")
    if float(eps) <= 0:
        raise ValueError("eps must be positive")
    vals = [power(t, eps) for t in steps]
    mean = math.fsum(vals) / len(vals)
    var = math.fsum((v - mean) ** 2 for v in vals) / (len(vals) - 1) if len(vals) > 1 else 0.0
    bound = n * float(N_phi)
    return MomentEstimate(mean, math.sqrt(var / len(vals)), bound, mean / bound, len(vals))


@dataclass(frozen=True)
class TailRow:
    T: int
    p_emp: float
    bound: float
    markov: float


def log_grid(top: int) -> list[int]:
    grid, T = [], 1
    while T <= 2 * max(top, 1):
        grid.append(T)
        T *= 2
    return grid


def tail_curve(steps: Sequence[int], eps, n: int, c: int, N_phi, grid: Sequence[int] | None = None) -> list[TailRow]:
    """Empirical ``Pr[t >= T]`` against ``min(1, n**c * N * phi / T**eps)``."""
    if float(eps) <= 0:
        raise ValueError("eps must be positive")
    if grid is None:
        grid = log_grid(max(steps) if steps else 1)
    trials = len(steps)
    vals = [power(t, eps) for t in steps]
    mean = math.fsum(vals) / trials if trials else 0.0
    rows = []
    for T in grid:
        p = sum(1 for t in steps if t >= T) / trials if trials else 0.0
        bound = min(1.0, n ** c * float(N_phi) / power(T, eps))
        rows.append(TailRow(T, p, bound, mean / power(T, eps)))
    return rows


def markov_consistent(steps: Sequence[int], eps, grid: Sequence[int]) -> bool:
    """Empirical tail never exceeds the Markov bound built from the sample moment."""
    if not steps:
        return True
    est = moment_estimate(steps, eps, 1, 1)
    for T in grid:
        p = sum(1 for t in steps if t >= T) / len(steps)
        scale = power(T, eps)
        if p > (est.mean + 3 * est.stderr) / scale + 1e-12:
            return False
    return True


def csv_body(text: str) -> str:
    """CSV text without the ``#`` header line."""
    return "".join(line for line in text.splitlines(keepends=True) if not line.startswith("#"))


def read_csv(path: str) -> tuple[dict, list[dict]]:
    with open(path) as fh:
        header = json.loads(fh.readline()[1:])
        rows = list(csv.DictReader(fh))
    return header, rows
