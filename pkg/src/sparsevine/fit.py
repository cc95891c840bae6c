"""Sequential vine copula estimation with sparsity hyper-parameters.

Trees are selected one at a time by a maximum spanning tree on absolute
empirical Kendall's tau (Dissmann's algorithm).  Each edge gets either an
independence copula (when ``|tau| <= threshold`` or the tree lies above
the truncation level) or the family minimizing the configured per-edge
criterion.  The threshold and truncation level can be chosen
automatically; refits reuse earlier pair-copula fits through a cache
keyed by fingerprints of the pseudo-observations.
"""

from __future__ import annotations

import enum
import hashlib
import math
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import bicop, criteria
from .bicop import BicopModel, FamilyId
from .criteria import CriterionConfig, CriterionKind, ModelTally
from .errors import ConfigError, InputError
from .structure import RVineStructure, VineEdge, allowed_pairs, max_spanning_tree, validate

__all__ = [
    "AUTO",
    "MemoryMode",
    "FitConfig",
    "VineModel",
    "FitCache",
    "ThresholdStep",
    "ThresholdTrace",
    "TruncationStep",
    "Evaluation",
    "cache_fingerprint",
    "fit_vine",
    "fit",
    "select_threshold",
    "select_truncation",
    "select_joint",
    "next_threshold",
    "evaluate",
    "edge_logliks",
    "cross_validate",
    "check_data",
]

AUTO = "auto"
MIN_NOBS = 30


class MemoryMode(str, enum.Enum):
    FULL = "full"
    LEAN = "lean"


def _normalize_families(families) -> tuple[tuple[FamilyId, int], ...]:
    out = []
    for item in families:
        if isinstance(item, (tuple, list)):
            fam, rot = FamilyId(item[0]), int(item[1])
            if fam is not FamilyId.INDEPENDENCE:
                out.append((fam, rot))
        else:
            out.extend(bicop.candidates_for([item]))
    return tuple(dict.fromkeys(out))


@dataclass(frozen=True)
class FitConfig:
    """Estimation settings.

    ``threshold`` and ``trunc_level`` take a number or ``"auto"``;
    ``trunc_level=None`` means no truncation.  ``families`` accepts family
    names (expanded to all rotations) or explicit ``(family, rotation)``
    pairs; an empty set restricts every edge to independence.
    """

    families: tuple = bicop.ALL_CANDIDATES
    criterion: CriterionConfig = field(default_factory=CriterionConfig)
    threshold: float | str = 0.0
    trunc_level: int | str | None = None
    seed: int = 0
    memory_mode: MemoryMode = MemoryMode.FULL
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "families", _normalize_families(self.families))
        object.__setattr__(self, "memory_mode", MemoryMode(self.memory_mode))
        if self.threshold != AUTO:
            try:
                theta = float(self.threshold)
            except (TypeError, ValueError):
                raise ConfigError(f"threshold must be a number or 'auto', got {self.threshold!r}") from None
            if not theta >= 0.0 or not math.isfinite(theta):
                raise ConfigError(f"threshold must be >= 0, got {self.threshold!r}")
            object.__setattr__(self, "threshold", theta)
        if self.trunc_level not in (None, AUTO):
            if isinstance(self.trunc_level, bool) or int(self.trunc_level) != self.trunc_level:
                raise ConfigError(f"truncation level must be an integer, got {self.trunc_level!r}")
            if int(self.trunc_level) < 1:
                raise ConfigError(f"truncation level must be >= 1, got {self.trunc_level!r}")
            object.__setattr__(self, "trunc_level", int(self.trunc_level))
        if int(self.threads) < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads!r}")

    @property
    def signature(self) -> tuple:
        """Everything besides the data that determines a pair-copula fit."""
        return (self.families, self.criterion.kind.value, self.criterion.psi0)

    def replace(self, **changes) -> "FitConfig":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True, eq=True)
class VineModel:
    """A fitted (or hand-built) vine copula.

    ``pair_copulas`` and ``edge_taus`` are keyed by :class:`VineEdge`;
    edges above the truncation level carry no empirical tau.
    """

    structure: RVineStructure
    pair_copulas: Mapping[VineEdge, BicopModel]
    threshold: float = 0.0
    trunc_level: int | None = None
    tally: ModelTally | None = None
    edge_taus: Mapping[VineEdge, float] = field(default_factory=dict)
    criterion: CriterionConfig = field(default_factory=CriterionConfig)

    def __post_init__(self):
        if self.trunc_level is None:
            object.__setattr__(self, "trunc_level", self.structure.d - 1)
        if self.tally is None:
            object.__setattr__(self, "tally", tally_for(self.structure, self.pair_copulas, 0.0, 0))

    @property
    def d(self) -> int:
        return self.structure.d

    @property
    def nobs(self) -> int:
        return self.tally.nobs

    @property
    def q(self) -> int:
        return self.tally.q

    @property
    def sparsity(self) -> float:
        """Fraction of non-independence pair-copulas, ``q / q_max``."""
        return self.tally.q / self.tally.q_max

    @property
    def bic(self) -> float:
        return criteria.bic(self.tally)

    @property
    def mbicv(self) -> float:
        return criteria.mbicv(self.tally, self.criterion)

    @property
    def criterion_value(self) -> float:
        return self.bic if self.criterion.kind is CriterionKind.BIC else self.mbicv

    def edges(self) -> Iterable[VineEdge]:
        return self.structure.all_edges()


def tally_for(structure: RVineStructure, pcs: Mapping[VineEdge, BicopModel], loglik: float, nobs: int) -> ModelTally:
    d = structure.d
    q = [0] * (d - 1)
    npars = 0
    for e in structure.all_edges():
        pc = pcs[e]
        if not pc.is_independence:
            q[e.tree_level - 1] += 1
            npars += pc.npars
    return ModelTally(loglik=loglik, npars=npars, nobs=nobs, d=d, q_per_tree=tuple(q))


def independence_model(structure: RVineStructure, criterion: CriterionConfig | None = None) -> VineModel:
    pcs = {e: bicop.INDEPENDENCE for e in structure.all_edges()}
    return VineModel(structure, pcs, criterion=criterion or CriterionConfig())


# ---------------------------------------------------------------------------
# Fingerprints and the fit cache
# ---------------------------------------------------------------------------


def cache_fingerprint(column) -> int:
    """64-bit fingerprint of a column, values quantized to 1e-12."""
    col = np.asarray(column, dtype=float)
    if not np.all(np.isfinite(col)):
        raise InputError("cannot fingerprint non-finite values")
    q = np.rint(col * 1e12) + 0.0  # + 0.0 folds -0.0 into 0.0
    digest = hashlib.blake2b(np.ascontiguousarray(q).tobytes(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


class FitCache:
    """Pair-copula fits and empirical taus keyed by input fingerprints.

    In ``full`` memory mode the input columns are kept and compared on
    every hit, so a fingerprint collision can never return a wrong fit;
    ``lean`` mode keeps fingerprints only.
    """

    def __init__(self, memory_mode: MemoryMode | str = MemoryMode.FULL):
        self.memory_mode = MemoryMode(memory_mode)
        self._fits: dict = {}
        self._taus: dict = {}
        self._lock = threading.Lock()
        self.fits = 0
        self.hits = 0

    def __len__(self) -> int:
        return len(self._fits)

    def get_tau(self, key):
        return self._taus.get(key)

    def put_tau(self, key, value: float) -> None:
        with self._lock:
            self._taus.setdefault(key, value)

    def get_fit(self, key, u: np.ndarray, v: np.ndarray) -> BicopModel | None:
        entry = self._fits.get(key)
        if entry is None:
            return None
        model, cols = entry
        if cols is not None and not (np.array_equal(cols[0], u) and np.array_equal(cols[1], v)):
            return None
        return model

    def put_fit(self, key, model: BicopModel, u: np.ndarray, v: np.ndarray) -> None:
        cols = (u.copy(), v.copy()) if self.memory_mode is MemoryMode.FULL else None
        with self._lock:
            self._fits[key] = (model, cols)


# ---------------------------------------------------------------------------
# Sequential estimation
# ---------------------------------------------------------------------------


def check_data(data, min_nobs: int = MIN_NOBS) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2:
        raise InputError(f"data must be a 2-d array, got {arr.ndim} dimension(s)")
    n, d = arr.shape
    if d < 2:
        raise InputError(f"need at least 2 variables, got {d}")
    if n < min_nobs:
        raise InputError(f"need at least {min_nobs} observations, got {n}")
    if not np.all(np.isfinite(arr)):
        bad = np.argwhere(~np.isfinite(arr))[0]
        raise InputError(f"non-finite value at row {bad[0]}, column {bad[1]}")
    if arr.min() < 0.0 or arr.max() > 1.0:
        bad = np.argwhere((arr < 0.0) | (arr > 1.0))[0]
        raise InputError(
            f"value {arr[bad[0], bad[1]]!r} at row {bad[0]}, column {bad[1]} is not on the copula scale [0, 1]"
        )
    return np.clip(arr, bicop.CLAMP, 1.0 - bicop.CLAMP)


class _Pool:
    """Ordered map, optionally over a thread pool."""

    def __init__(self, threads: int):
        self.threads = threads
        self._ex = ThreadPoolExecutor(threads) if threads > 1 else None

    def map(self, fn, items):
        items = list(items)
        if self._ex is None or len(items) < 2:
            return [fn(x) for x in items]
        return list(self._ex.map(fn, items))

    def close(self):
        if self._ex is not None:
            self._ex.shutdown()


class _SequentialFit:
    """Builds a vine tree by tree; higher trees can be added later."""

    def __init__(
        self,
        data: np.ndarray,
        config: FitConfig,
        threshold: float,
        cache: FitCache,
        pool: _Pool,
        structure: RVineStructure | None = None,
        taus: bool = True,
    ):
        self.data = data
        self.n, self.d = data.shape
        self.config = config
        self.threshold = float(threshold)
        self.cache = cache
        self.pool = pool
        self.fixed = structure
        # without taus (fixed structure, zero threshold) every edge goes to family selection
        self.want_taus = taus or structure is None or self.threshold > 0.0
        self.trees: list[tuple[VineEdge, ...]] = []
        self.pcs: dict[VineEdge, BicopModel] = {}
        self.taus: dict[VineEdge, float] = {}
        self.loglik = 0.0
        self.fits = 0
        self.hits = 0
        self._cols: dict = {}
        for i in range(self.d):
            col = np.ascontiguousarray(data[:, i])
            self._cols[(i, frozenset())] = (col, cache_fingerprint(col))

    @property
    def level(self) -> int:
        return len(self.trees)

    def _inputs(self, edge: VineEdge):
        a, b = edge.conditioned
        cond = frozenset(edge.conditioning)
        return self._cols[(a, cond)], self._cols[(b, cond)]

    def _tau(self, edge: VineEdge) -> float:
        (u, fu), (v, fv) = self._inputs(edge)
        if fv < fu:
            u, v, fu, fv = v, u, fv, fu
        key = (fu, fv)
        tau = self.cache.get_tau(key)
        if tau is None:
            tau = bicop.empirical_tau(u, v)
            self.cache.put_tau(key, tau)
        return tau

    def _fit_edge(self, item):
        edge, tau = item
        (u, fu), (v, fv) = self._inputs(edge)
        key = (edge, fu, fv, self.config.signature)
        hit = self.cache.get_fit(key, u, v)
        if hit is not None:
            return hit, True
        model = bicop.select_family(
            np.column_stack((u, v)),
            self.config.families or ((FamilyId.INDEPENDENCE, 0),),
            self.config.criterion,
            edge.tree_level,
            tau=tau,
        )
        return model, False

    def _select_edges(self, m: int) -> tuple[VineEdge, ...]:
        if self.fixed is not None:
            return tuple(self.fixed.edges(m))
        partial = RVineStructure(self.d, tuple(self.trees))
        cands = allowed_pairs(partial, m)
        taus = self.pool.map(lambda c: self._tau(c.edge), cands)
        chosen = max_spanning_tree(
            [(c.left, c.right, min(abs(t), 1.0)) for c, t in zip(cands, taus)],
            range(self.d - m + 1),
        )
        lookup = {(c.left, c.right): c.edge for c in cands}
        return tuple(sorted(lookup[pair] for pair in chosen))

    def add_tree(self) -> tuple[VineEdge, ...]:
        m = self.level + 1
        if m > self.d - 1:
            raise ConfigError("all trees are already fitted")
        edges = self._select_edges(m)
        if self.want_taus:
            taus = self.pool.map(self._tau, edges)
            todo = [(e, t) for e, t in zip(edges, taus) if abs(t) > self.threshold]
        else:
            taus = [None] * len(edges)
            todo = [(e, None) for e in edges]
        results = self.pool.map(self._fit_edge, todo)
        fitted = {}
        for (e, _), (model, hit) in zip(todo, results):
            if hit:
                self.hits += 1
                self.cache.hits += 1
            else:
                self.fits += 1
                self.cache.fits += 1
                (u, fu), (v, fv) = self._inputs(e)
                self.cache.put_fit((e, fu, fv, self.config.signature), model, u, v)
            fitted[e] = model
        for e, t in zip(edges, taus):
            if t is not None:
                self.taus[e] = t
            pc = fitted.get(e, bicop.INDEPENDENCE)
            self.pcs[e] = pc
            self.loglik += pc.loglik
        if m < self.d - 1:
            self._propagate(edges)
        self.trees.append(edges)
        if self.config.memory_mode is MemoryMode.LEAN:
            # inputs of tree m are no longer needed
            self._cols = {k: val for k, val in self._cols.items() if len(k[1]) >= m}
        return edges

    def _propagate(self, edges: Sequence[VineEdge]) -> None:
        for e in edges:
            a, b = e.conditioned
            (u, fu), (v, fv) = self._inputs(e)
            pc = self.pcs[e]
            cond = frozenset(e.conditioning)
            if pc.is_independence:
                ga, gb = (u, fu), (v, fv)
            else:
                hv, hu = bicop.hfuncs(pc, u, v)
                ga = (hu, cache_fingerprint(hu))
                gb = (hv, cache_fingerprint(hv))
            self._cols.setdefault((a, cond | {b}), ga)
            self._cols.setdefault((b, cond | {a}), gb)

    def model(self) -> VineModel:
        """The current fit, with independence trees above the fitted level."""
        trees = list(self.trees)
        pcs = dict(self.pcs)
        for m in range(len(trees) + 1, self.d):
            if self.fixed is not None:
                edges = tuple(self.fixed.edges(m))
            else:
                partial = RVineStructure(self.d, tuple(trees))
                cands = allowed_pairs(partial, m)
                chosen = max_spanning_tree([(c.left, c.right, 0.0) for c in cands], range(self.d - m + 1))
                lookup = {(c.left, c.right): c.edge for c in cands}
                edges = tuple(sorted(lookup[p] for p in chosen))
            trees.append(edges)
            for e in edges:
                pcs[e] = bicop.INDEPENDENCE
        structure = RVineStructure(self.d, tuple(trees))
        pcs = {e: pcs[e] for e in structure.all_edges()}
        return VineModel(
            structure=structure,
            pair_copulas=pcs,
            threshold=self.threshold,
            trunc_level=self.level,
            tally=tally_for(structure, pcs, self.loglik, self.n),
            edge_taus=dict(self.taus),
            criterion=self.config.criterion,
        )


def _resolve_trunc(config: FitConfig, d: int) -> int:
    if config.trunc_level in (None, AUTO):
        return d - 1
    return min(int(config.trunc_level), d - 1)


def _check_structure(structure: RVineStructure | None, d: int) -> None:
    if structure is None:
        return
    if structure.d != d:
        raise InputError(f"structure has dimension {structure.d}, data has {d} columns")
    report = validate(structure)
    if not report.valid or not structure.is_complete:
        raise InputError("invalid fixed structure: " + "; ".join(report.violations or ("incomplete",)))


def fit_vine(
    data,
    config: FitConfig | None = None,
    *,
    structure: RVineStructure | None = None,
    cache: FitCache | None = None,
    taus: bool = True,
) -> VineModel:
    """Fit a vine at fixed threshold and truncation level.

    With ``"auto"`` hyper-parameters this dispatches to the matching
    selection routine and returns the selected model.  A ``structure``
    skips tree selection and fits pair-copulas on the given trees; with a
    structure and a zero threshold, ``taus=False`` skips the empirical
    taus (``edge_taus`` stays empty).
    """
    config = config or FitConfig()
    if config.threshold == AUTO or config.trunc_level == AUTO:
        return fit(data, config, structure=structure, cache=cache)
    u = check_data(data)
    _check_structure(structure, u.shape[1])
    cache = FitCache(config.memory_mode) if cache is None else cache
    pool = _Pool(config.threads)
    try:
        builder = _SequentialFit(u, config, config.threshold, cache, pool, structure, taus)
        for _ in range(_resolve_trunc(config, u.shape[1])):
            builder.add_tree()
        return builder.model()
    finally:
        pool.close()


# ---------------------------------------------------------------------------
# Hyper-parameter selection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThresholdStep:
    theta: float
    criterion: float
    q: int
    refits: int
    seconds: float
    trunc_level: int | None = None
    reused: int = 0  # pair fits served from the cache


@dataclass
class ThresholdTrace:
    steps: list[ThresholdStep] = field(default_factory=list)
    best_index: int = 0

    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class TruncationStep:
    trunc_level: int
    criterion: float
    q: int
    refits: int
    seconds: float


def next_threshold(abs_taus: Iterable[float], theta: float) -> float | None:
    """Next threshold of the automatic schedule, or ``None`` when exhausted.

    Among the absolute taus not exceeding ``theta`` (``N`` of them), take
    the ``ceil(0.05 N)``-th largest.  If that would not lower the
    threshold, fall back to the largest value strictly below it; once no
    such value exists the schedule ends at 0.
    """
    pool = sorted((t for t in abs_taus if t <= theta), reverse=True)
    if not pool:
        return 0.0 if theta > 0.0 else None
    k = math.ceil(0.05 * len(pool))
    nxt = pool[k - 1]
    if nxt >= theta:
        below = [t for t in pool if t < theta]
        nxt = below[0] if below else 0.0
    if nxt >= theta:
        return None
    return nxt


def _max_pair_tau(u: np.ndarray, cache: FitCache, pool: _Pool) -> list[float]:
    d = u.shape[1]
    fps = [cache_fingerprint(u[:, i]) for i in range(d)]

    def tau(pair):
        i, j = pair
        a, b = (i, j) if fps[i] <= fps[j] else (j, i)
        key = (fps[a], fps[b])
        t = cache.get_tau(key)
        if t is None:
            t = bicop.empirical_tau(u[:, a], u[:, b])
            cache.put_tau(key, t)
        return abs(t)

    return pool.map(tau, [(i, j) for i in range(d) for j in range(i + 1, d)])


def _run_threshold_search(u, config, structure, cache, inner):
    """Shared outer loop; ``inner(theta)`` returns (model, refits, reused)."""
    pool = _Pool(config.threads)
    try:
        pair_taus = _max_pair_tau(u, cache, pool)
    finally:
        pool.close()
    theta = max(pair_taus) if pair_taus else 0.0
    trace = ThresholdTrace()
    best = None
    distinct = len(set(pair_taus))
    while True:
        start = time.perf_counter()
        model, refits, reused = inner(theta)
        elapsed = time.perf_counter() - start
        trace.steps.append(
            ThresholdStep(theta, model.criterion_value, model.q, refits, elapsed, model.trunc_level, reused)
        )
        if best is not None and not model.criterion_value < best.criterion_value:
            break
        best = model
        trace.best_index = len(trace.steps) - 1
        if distinct < 2:
            break
        nxt = next_threshold((abs(t) for t in model.edge_taus.values()), theta)
        if nxt is None:
            break
        theta = nxt
    return best, trace


def select_threshold(
    data,
    config: FitConfig | None = None,
    *,
    structure: RVineStructure | None = None,
    cache: FitCache | None = None,
) -> tuple[VineModel, ThresholdTrace]:
    """Automatic threshold search.

    Starts at the largest absolute pairwise tau (the all-independence
    model) and lowers the threshold along :func:`next_threshold` until the
    criterion stops improving strictly.  The truncation level in
    ``config`` is held fixed.
    """
    config = config or FitConfig()
    u = check_data(data)
    _check_structure(structure, u.shape[1])
    cache = FitCache(config.memory_mode) if cache is None else cache
    trunc = _resolve_trunc(config, u.shape[1])

    def inner(theta):
        pool = _Pool(config.threads)
        try:
            builder = _SequentialFit(u, config, theta, cache, pool, structure)
            for _ in range(trunc):
                builder.add_tree()
            return builder.model(), builder.fits, builder.hits
        finally:
            pool.close()

    return _run_threshold_search(u, config, structure, cache, inner)


def _truncation_search(u, config, theta, cache, structure, max_level=None):
    pool = _Pool(config.threads)
    try:
        builder = _SequentialFit(u, config, theta, cache, pool, structure)
        trace: list[TruncationStep] = []
        best = None
        max_level = max_level or u.shape[1] - 1
        while builder.level < max_level:
            start = time.perf_counter()
            before = builder.fits
            builder.add_tree()
            model = builder.model()
            trace.append(
                TruncationStep(
                    builder.level, model.criterion_value, model.q, builder.fits - before, time.perf_counter() - start
                )
            )
            if best is not None and not model.criterion_value < best.criterion_value:
                break
            best = model
        return best, trace, builder
    finally:
        pool.close()


def select_truncation(
    data,
    config: FitConfig | None = None,
    *,
    structure: RVineStructure | None = None,
    cache: FitCache | None = None,
) -> tuple[VineModel, list[TruncationStep]]:
    """Automatic truncation level: add trees until the criterion stops improving.

    Lower trees are never re-estimated; the threshold in ``config`` is held
    fixed (0 when it is ``"auto"``).
    """
    config = config or FitConfig()
    u = check_data(data)
    _check_structure(structure, u.shape[1])
    cache = FitCache(config.memory_mode) if cache is None else cache
    theta = 0.0 if config.threshold == AUTO else float(config.threshold)
    best, trace, _ = _truncation_search(u, config, theta, cache, structure)
    return best, trace


def select_joint(
    data,
    config: FitConfig | None = None,
    *,
    structure: RVineStructure | None = None,
    cache: FitCache | None = None,
) -> tuple[VineModel, ThresholdTrace]:
    """Threshold search with an inner truncation search at every threshold."""
    config = config or FitConfig()
    u = check_data(data)
    _check_structure(structure, u.shape[1])
    cache = FitCache(config.memory_mode) if cache is None else cache

    def inner(theta):
        model, _, builder = _truncation_search(u, config, theta, cache, structure)
        return model, builder.fits, builder.hits

    return _run_threshold_search(u, config, structure, cache, inner)


def fit(
    data,
    config: FitConfig | None = None,
    *,
    structure: RVineStructure | None = None,
    cache: FitCache | None = None,
) -> VineModel:
    """Fit with whatever combination of fixed and automatic hyper-parameters ``config`` asks for."""
    config = config or FitConfig()
    auto_theta = config.threshold == AUTO
    auto_trunc = config.trunc_level == AUTO
    if auto_theta and auto_trunc:
        return select_joint(data, config, structure=structure, cache=cache)[0]
    if auto_theta:
        return select_threshold(data, config, structure=structure, cache=cache)[0]
    if auto_trunc:
        return select_truncation(data, config, structure=structure, cache=cache)[0]
    return fit_vine(data, config, structure=structure, cache=cache)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Evaluation:
    loglik: float
    bic: float
    mbicv: float
    sparsity: float
    nobs: int


def edge_logliks(model: VineModel, data) -> dict[VineEdge, float]:
    """Log-likelihood contribution of every edge on ``data``."""
    u = check_data(data, min_nobs=1)
    if u.shape[1] != model.d:
        raise InputError(f"model has dimension {model.d}, data has {u.shape[1]} columns")
    cols = {(i, frozenset()): u[:, i] for i in range(model.d)}
    out = {}
    for tree in model.structure.trees:
        for e in tree:
            a, b = e.conditioned
            cond = frozenset(e.conditioning)
            x, y = cols[(a, cond)], cols[(b, cond)]
            pc = model.pair_copulas[e]
            if pc.is_independence:
                out[e] = 0.0
                cols.setdefault((a, cond | {b}), x)
                cols.setdefault((b, cond | {a}), y)
                continue
            out[e] = float(np.sum(bicop.logpdf(pc, x, y)))
            if e.tree_level < model.d - 1:
                h1, h2 = bicop.hfuncs(pc, x, y)
                cols.setdefault((a, cond | {b}), h2)
                cols.setdefault((b, cond | {a}), h1)
    return out


def evaluate(model: VineModel, data) -> Evaluation:
    """Log-likelihood and criteria of ``model`` on ``data``."""
    ll = sum(edge_logliks(model, data).values())
    n = np.asarray(data).shape[0]
    tally = ModelTally(ll, model.tally.npars, n, model.d, model.tally.q_per_tree)
    return Evaluation(
        loglik=ll,
        bic=criteria.bic(tally),
        mbicv=criteria.mbicv(tally, model.criterion),
        sparsity=tally.q / tally.q_max,
        nobs=n,
    )


def cross_validate(data, config: FitConfig | None = None, folds: int = 5, seed: int = 0) -> list[float]:
    """Held-out log-likelihood of each fold.

    Rows are shuffled once with ``seed`` and split into ``folds`` parts;
    each part is scored by a model fit on the others with ``config``.
    """
    config = config or FitConfig()
    u = check_data(data)
    if folds < 2 or folds > u.shape[0]:
        raise ConfigError(f"folds must lie in 2..{u.shape[0]}, got {folds}")
    perm = np.random.default_rng(seed).permutation(u.shape[0])
    parts = np.array_split(perm, folds)
    out = []
    for k in range(folds):
        test = np.sort(parts[k])
        train = np.sort(np.concatenate([parts[j] for j in range(folds) if j != k]))
        model = fit(u[train], config)
        out.append(evaluate(model, u[test]).loglik)
    return out
