"""Sampling from vine copulas and the family-wise error rate experiment.

The consistency experiment plants a sparse Gaussian D-vine whose
dimension grows with the sample size, ``d = round(n ** exponent)``, fits
it with the true structure under BIC and under mBICV, and records how
often at least one independence edge is selected as dependent (type I)
or at least one dependent edge as independent (type II).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence, TextIO

import numpy as np

from . import bicop
from .bicop import BicopModel, FamilyId
from .criteria import CriterionConfig, CriterionKind
from .errors import ConfigError, DomainError, NumericError, StructureError, VineError
from .fit import FitConfig, VineModel, fit_vine
from .structure import RVineStructure, VineEdge, dvine

__all__ = [
    "sampling_order",
    "rvine_sample",
    "RegimeSpec",
    "planted_vine",
    "FwerRow",
    "FwerReport",
    "run_consistency_study",
    "predicted_rates",
    "regime_dimension",
    "DEFAULT_SIZES",
    "DEFAULT_EXPONENTS",
]

DEFAULT_SIZES = (500, 1000, 2000, 4000)
DEFAULT_EXPONENTS = (0.25, 0.45, 0.55)
PLANTED_RHO = 0.2


def sampling_order(structure: RVineStructure) -> list[tuple[int, list[VineEdge]]]:
    """Variables in sampling order, each with its edges from tree 1 upward.

    Peels off, from the top tree down, a variable that occurs in exactly
    one edge per tree (always as a conditioned variable); what remains is a
    vine on the other variables.
    """
    if not structure.is_complete:
        raise StructureError("sampling needs a complete tree sequence")
    remaining = {m: list(structure.edges(m)) for m in range(1, structure.d)}
    removed: list[tuple[int, list[VineEdge]]] = []
    for top in range(structure.d - 1, 0, -1):
        (edge,) = remaining[top]
        for x in edge.conditioned:
            chain = [[e for e in remaining[m] if x in e.union] for m in range(1, top + 1)]
            if all(len(c) == 1 and x in c[0].conditioned for c in chain):
                break
        else:
            raise StructureError(f"no removable variable at tree {top}; structure is not a regular vine")
        chain_edges = [c[0] for c in chain]
        for m, e in enumerate(chain_edges, start=1):
            remaining[m].remove(e)
        removed.append((x, chain_edges))
    (last,) = {v for v in range(structure.d)} - {x for x, _ in removed}
    return [(last, [])] + removed[::-1]


class _Conditionals:
    """Lazily evaluated G(var | cond) columns of a partially sampled vine."""

    def __init__(self, model: VineModel):
        self.model = model
        self.memo: dict = {}

    def set(self, var: int, cond: frozenset, col: np.ndarray) -> None:
        self.memo[(var, cond)] = col

    def get(self, var: int, cond: frozenset) -> np.ndarray:
        key = (var, cond)
        if key in self.memo:
            return self.memo[key]
        edge = self.model.structure.edge_by_union(len(cond), cond | {var})
        if edge is None or var not in edge.conditioned:
            raise StructureError(f"no edge yields the conditional of {var} given {sorted(cond)}")
        other = edge.conditioned[1] if edge.conditioned[0] == var else edge.conditioned[0]
        base = frozenset(edge.conditioning)
        pc = self.model.pair_copulas[edge]
        x = self.get(var, base)
        if pc.is_independence:
            out = x
        else:
            y = self.get(other, base)
            out = bicop.hfunc2(pc, x, y) if var < other else bicop.hfunc1(pc, y, x)
        self.memo[key] = out
        return out


def rvine_sample(model: VineModel, n: int, seed=None) -> np.ndarray:
    """Draw ``n`` rows from the vine copula by inverse Rosenblatt transform.

    Column ``k`` of the underlying uniform matrix drives variable ``k``, so
    an all-independence model returns those uniforms unchanged.
    """
    if int(n) < 1:
        raise ConfigError(f"sample size must be positive, got {n}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    d = model.d
    w = rng.random((int(n), d))
    cond = _Conditionals(model)
    out = np.empty_like(w)
    for x, chain in sampling_order(model.structure):
        val = w[:, x]
        for edge in reversed(chain):
            pc = model.pair_copulas[edge]
            other = edge.conditioned[1] if edge.conditioned[0] == x else edge.conditioned[0]
            base = frozenset(edge.conditioning)
            cond.set(x, base | {other}, val)
            if not pc.is_independence:
                y = cond.get(other, base)
                try:
                    val = bicop.hinv2(pc, y, val) if x < other else bicop.hinv1(pc, y, val)
                except NumericError as exc:
                    raise NumericError(f"sampling failed at edge ({edge}): {exc}") from exc
        cond.set(x, frozenset(), val)
        out[:, x] = val
    return out


# ---------------------------------------------------------------------------
# Consistency experiment
# ---------------------------------------------------------------------------


def regime_dimension(n: int, exponent: float) -> int:
    return int(math.floor(n**exponent + 0.5))


@dataclass(frozen=True)
class RegimeSpec:
    exponent: float
    sample_sizes: tuple[int, ...] = DEFAULT_SIZES
    replications: int = 100
    psi0: float = 0.9

    def __post_init__(self):
        object.__setattr__(self, "sample_sizes", tuple(int(s) for s in self.sample_sizes))
        if self.replications < 1:
            raise ConfigError(f"replications must be positive, got {self.replications}")
        for n in self.sample_sizes:
            if regime_dimension(n, self.exponent) < 2:
                raise ConfigError(f"n = {n} gives dimension < 2 for exponent {self.exponent}")
        if not 0.0 < self.psi0 < 1.0:
            raise ConfigError(f"psi0 must lie in (0, 1), got {self.psi0}")


def planted_vine(d: int, rho: float = PLANTED_RHO) -> VineModel:
    """Sparse Gaussian D-vine in natural order.

    Within each tree the edges at even 1-based positions of the
    lexicographic edge order are independence; the others are Gaussian
    with correlation ``rho``.
    """
    structure = dvine(d)
    dep = BicopModel(FamilyId.GAUSSIAN, 0, (rho,))
    pcs = {}
    for tree in structure.trees:
        for pos, e in enumerate(sorted(tree)):
            pcs[e] = bicop.INDEPENDENCE if pos % 2 == 1 else dep
    return VineModel(structure, pcs)


@dataclass(frozen=True)
class FwerRow:
    exponent: float
    n: int
    d: int
    criterion: str
    alpha_fwer: float
    beta_fwer: float
    se_alpha: float
    se_beta: float
    replications: int
    failures: int = 0


@dataclass
class FwerReport:
    rows: list[FwerRow] = field(default_factory=list)
    seed: int = 0

    COLUMNS = ("regime", "n", "d", "criterion", "alpha_fwer", "beta_fwer", "se_alpha", "se_beta", "reps", "failures")

    def get(self, exponent: float, n: int, criterion: str) -> FwerRow:
        for r in self.rows:
            if r.exponent == exponent and r.n == n and r.criterion == criterion:
                return r
        raise KeyError((exponent, n, criterion))

    def write(self, fh: TextIO) -> None:
        fh.write("# family-wise error rates of pair-copula selection in a planted sparse Gaussian vine\n")
        fh.write(f"# planted structure: D-vine in natural order, rho = {PLANTED_RHO}\n")
        fh.write("# independence edges: even 1-based positions of the lexicographic edge order in each tree\n")
        fh.write(f"# seed = {self.seed}\n")
        fh.write(",".join(self.COLUMNS) + "\n")
        for r in self.rows:
            fh.write(
                f"{r.exponent:g},{r.n},{r.d},{r.criterion},{r.alpha_fwer:.6f},{r.beta_fwer:.6f},"
                f"{r.se_alpha:.6f},{r.se_beta:.6f},{r.replications},{r.failures}\n"
            )


def _one_replication(args) -> dict[str, tuple[bool, bool] | None]:
    seed, regime_idx, n, rep, d, psi0 = args
    rng = np.random.default_rng(np.random.SeedSequence([seed, regime_idx, n, rep]))
    truth = planted_vine(d)
    u = rvine_sample(truth, n, rng)
    out = {}
    for kind in (CriterionKind.BIC, CriterionKind.MBICV):
        config = FitConfig(families=(FamilyId.GAUSSIAN,), criterion=CriterionConfig(kind, psi0))
        try:
            fitted = fit_vine(u, config, structure=truth.structure, taus=False)
        except VineError:
            out[kind.value] = None
            continue
        type1 = type2 = False
        for e, pc in truth.pair_copulas.items():
            chosen = fitted.pair_copulas[e]
            if pc.is_independence and not chosen.is_independence:
                type1 = True
            elif not pc.is_independence and chosen.is_independence:
                type2 = True
        out[kind.value] = (type1, type2)
    return out


def run_consistency_study(regimes: Sequence[RegimeSpec], seed: int = 0, threads: int = 1) -> FwerReport:
    """Type I and type II family-wise error rates for BIC and mBICV.

    Replication ``r`` of sample size ``n`` in regime ``i`` draws from its
    own stream seeded by ``(seed, i, n, r)``, so results do not depend on
    ``threads``.
    """
    jobs = []
    for i, reg in enumerate(regimes):
        for n in reg.sample_sizes:
            d = regime_dimension(n, reg.exponent)
            jobs.extend((seed, i, n, r, d, reg.psi0) for r in range(reg.replications))
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            results = list(ex.map(_one_replication, jobs))
    else:
        results = [_one_replication(j) for j in jobs]

    report = FwerReport(seed=seed)
    k = 0
    for i, reg in enumerate(regimes):
        for n in reg.sample_sizes:
            d = regime_dimension(n, reg.exponent)
            chunk = results[k : k + reg.replications]
            k += reg.replications
            for crit in (CriterionKind.BIC.value, CriterionKind.MBICV.value):
                ok = [r[crit] for r in chunk if r[crit] is not None]
                fails = len(chunk) - len(ok)
                reps = len(ok)
                a = sum(t1 for t1, _ in ok) / reps if reps else math.nan
                b = sum(t2 for _, t2 in ok) / reps if reps else math.nan
                se = lambda p: math.sqrt(p * (1.0 - p) / reps) if reps else math.nan
                report.rows.append(FwerRow(reg.exponent, n, d, crit, a, b, se(a), se(b), reps, fails))
    return report


def predicted_rates(n: int, m: int, psi0: float, mi: float) -> tuple[float, float]:
    """Orders of magnitude of the per-edge type I and type II error rates.

    ``psi0**m / sqrt(n ln n)`` and ``exp(-n mi**2) / (sqrt(n) mi)``; the
    second is ``nan`` when ``mi <= 0``.
    """
    if n < 2:
        raise DomainError(f"n must be at least 2, got {n}")
    if m < 1:
        raise DomainError(f"tree level must be >= 1, got {m}")
    if not 0.0 < psi0 < 1.0:
        raise DomainError(f"psi0 must lie in (0, 1), got {psi0}")
    alpha = psi0**m / math.sqrt(n * math.log(n))
    beta = math.exp(-n * mi * mi) / (math.sqrt(n) * mi) if mi > 0 else math.nan
    return alpha, beta
