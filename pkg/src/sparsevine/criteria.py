"""Selection criteria for vine copula models.

Two criteria are supported: the classical BIC and the modified BIC for
vines (mBICV).  The latter replaces the uniform model prior of the BIC by
independent Bernoulli priors on the non-independence indicator of every
pair-copula, with success probability ``psi0 ** m`` for an edge in tree
``m``.  Both criteria decompose into a sum of per-edge terms, which is
what makes sequential selection of pair-copulas possible.

All logarithms are natural.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .errors import ConfigError

__all__ = [
    "CriterionKind",
    "CriterionConfig",
    "ModelTally",
    "bic",
    "mbicv",
    "prior_penalty",
    "bic_edge",
    "mbicv_edge",
    "edge_criterion",
    "expected_nonindep",
]


class CriterionKind(str, enum.Enum):
    BIC = "bic"
    MBICV = "mbicv"


@dataclass(frozen=True)
class CriterionConfig:
    kind: CriterionKind = CriterionKind.MBICV
    psi0: float = 0.9

    def __post_init__(self):
        object.__setattr__(self, "kind", CriterionKind(self.kind))
        if not (0.0 < self.psi0 < 1.0) or not math.isfinite(self.psi0):
            raise ConfigError(f"psi0 must lie in (0, 1), got {self.psi0!r}")


@dataclass(frozen=True)
class ModelTally:
    """Sufficient summary of a fitted vine for evaluating the criteria.

    ``q_per_tree[m - 1]`` is the number of non-independence pair-copulas in
    tree ``m``; ``npars`` counts all free parameters.
    """

    loglik: float
    npars: int
    nobs: int
    d: int
    q_per_tree: tuple[int, ...] = field(default=())

    def __post_init__(self):
        q = tuple(int(x) for x in self.q_per_tree)
        if not q:
            q = (0,) * max(self.d - 1, 0)
        object.__setattr__(self, "q_per_tree", q)
        if len(q) != self.d - 1:
            raise ConfigError(
                f"q_per_tree has {len(q)} entries, expected d - 1 = {self.d - 1}"
            )
        for m, qm in enumerate(q, start=1):
            if not 0 <= qm <= self.d - m:
                raise ConfigError(f"q_{m} = {qm} outside [0, {self.d - m}]")

    @property
    def q(self) -> int:
        return sum(self.q_per_tree)

    @property
    def q_max(self) -> int:
        return self.d * (self.d - 1) // 2


def bic(tally: ModelTally) -> float:
    if tally.nobs < 1:
        raise ConfigError("BIC needs at least one observation")
    return -2.0 * tally.loglik + tally.npars * math.log(tally.nobs)


def _log_prior_terms(psi0: float, m: int) -> tuple[float, float]:
    """Return ``(ln psi0^m, ln(1 - psi0^m))``."""
    log_p = m * math.log(psi0)
    return log_p, math.log(-math.expm1(log_p))


def prior_penalty(tally: ModelTally, psi0: float) -> float:
    """The term mBICV adds on top of the BIC."""
    total = 0.0
    for m, qm in enumerate(tally.q_per_tree, start=1):
        log_p, log_1mp = _log_prior_terms(psi0, m)
        total += qm * log_p + (tally.d - m - qm) * log_1mp
    return -2.0 * total


def mbicv(tally: ModelTally, config: CriterionConfig | None = None) -> float:
    config = config or CriterionConfig()
    return bic(tally) + prior_penalty(tally, config.psi0)


def bic_edge(loglik_e: float, npars_e: int, nobs: int) -> float:
    return -2.0 * loglik_e + npars_e * math.log(nobs)


def mbicv_edge(
    loglik_e: float,
    npars_e: int,
    nobs: int,
    tree_level: int,
    is_indep: bool,
    config: CriterionConfig | None = None,
) -> float:
    """Per-edge contribution to the mBICV.

    Independence edges must be passed with ``loglik_e = 0`` and
    ``npars_e = 0``; summing this function over all edges of a vine
    reproduces :func:`mbicv` of the whole model.
    """
    config = config or CriterionConfig()
    if tree_level < 1:
        raise ConfigError(f"tree level must be >= 1, got {tree_level}")
    log_p, log_1mp = _log_prior_terms(config.psi0, tree_level)
    prior = log_1mp if is_indep else log_p
    return bic_edge(loglik_e, npars_e, nobs) - 2.0 * prior


def edge_criterion(
    loglik_e: float,
    npars_e: int,
    nobs: int,
    tree_level: int,
    is_indep: bool,
    config: CriterionConfig,
) -> float:
    """Per-edge value of whichever criterion ``config`` selects."""
    if config.kind is CriterionKind.BIC:
        return bic_edge(loglik_e, npars_e, nobs)
    return mbicv_edge(loglik_e, npars_e, nobs, tree_level, is_indep, config)


def expected_nonindep(d: int, psi0: float) -> float:
    """Prior expectation of the number of non-independence pair-copulas."""
    if d < 2:
        raise ConfigError("dimension must be at least 2")
    return sum((d - m) * psi0**m for m in range(1, d))
