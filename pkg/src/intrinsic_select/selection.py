"""Model-space ranking and stochastic search.

Two encompassing schemes rank the 2^(k-1) intercept-containing submodels:
"from below" (VSB) scores every model by its Bayes factor against the
intercept-only model nested inside it; "from above" (VSA) scores it against
the full model containing it.  Normalizing either score set gives a
probability table whose ordering coincides exactly with the corresponding
pairwise posterior probabilities.  For model spaces too large to enumerate,
a Metropolis-Hastings single-flip walk explores the space instead.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .bayes_factor import (
    METHOD_INTRINSIC,
    METHOD_SCHWARZ,
    intrinsic_log_bf,
    schwarz_log_bf,
)
from .errors import EnumerationCapError, NestingViolationError
from .linear import BetaRatio, Dataset, ModelSpec, beta_ratio

SCHEME_VSA = "vsa"
SCHEME_VSB = "vsb"

ENUMERATION_CAP = 25

_METHOD_ALIASES = {
    "intrinsic": METHOD_INTRINSIC,
    METHOD_INTRINSIC: METHOD_INTRINSIC,
    "schwarz": METHOD_SCHWARZ,
    METHOD_SCHWARZ: METHOD_SCHWARZ,
}


def resolve_method(method: str) -> str:
    try:
        return _METHOD_ALIASES[method]
    except KeyError:
        raise ValueError(
            f"unknown method {method!r}; expected 'intrinsic' or 'schwarz'"
        ) from None


def _log_bf(b: BetaRatio, method: str) -> float:
    if method == METHOD_SCHWARZ:
        return schwarz_log_bf(b).log_bf_ij
    return intrinsic_log_bf(b).log_bf_ij


@dataclass(frozen=True)
class TableRow:
    model: ModelSpec
    log_score: float
    probability: float


@dataclass
class PosteriorTable:
    """Ranked models with normalized scores under one encompassing scheme."""

    scheme: str
    method: str
    rows: list

    def probability_of(self, model: ModelSpec) -> float:
        for row in self.rows:
            if row.model == model:
                return row.probability
        raise KeyError(f"model {model.indices} not in table")

    def rank_of(self, model: ModelSpec) -> int:
        for rank, row in enumerate(self.rows):
            if row.model == model:
                return rank
        raise KeyError(f"model {model.indices} not in table")

    @property
    def top(self) -> ModelSpec:
        return self.rows[0].model


@dataclass
class SearchTrace:
    """Outcome of a Metropolis-Hastings walk over the model space."""

    visited: dict
    best_by_score: list
    chain_length: int
    seed: int
    acceptance_rate: float


def enumerate_models(k: int) -> list:
    """All 2^(k-1) intercept-containing submodels, by size then index order."""
    return list(iter_models(k))


def iter_models(k: int):
    """Generator form of ``enumerate_models`` for streaming evaluation."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if k > ENUMERATION_CAP:
        raise EnumerationCapError(
            f"k={k} exceeds the enumeration cap {ENUMERATION_CAP}; "
            "use mh_search instead"
        )
    from itertools import combinations

    rest = range(1, k)
    for size in range(k):
        for combo in combinations(rest, size):
            yield ModelSpec((0,) + combo)


def _normalize(models, scores, scheme, method) -> PosteriorTable:
    scores = np.asarray(scores, dtype=np.float64)
    m = scores.max()
    log_z = m + np.log(np.sum(np.exp(scores - m)))
    probs = np.exp(scores - log_z)
    order = sorted(
        range(len(models)),
        key=lambda t: (-probs[t], models[t].size, models[t].indices),
    )
    rows = [
        TableRow(models[t], float(scores[t]), float(probs[t])) for t in order
    ]
    return PosteriorTable(scheme=scheme, method=method, rows=rows)


def vsb_table(dataset: Dataset, method: str = "intrinsic") -> PosteriorTable:
    """Rank all submodels by encompassing from below.

    Every model J except the intercept-only one is scored by
    ``log BF(J vs intercept-only) = -log BF(intercept-only vs J)``; the
    intercept-only model scores 0.  Probabilities are the log-sum-exp
    normalization of the scores.
    """
    method = resolve_method(method)
    base = ModelSpec.intercept_only()
    models, scores = [], []
    for model in iter_models(dataset.k):
        if model == base:
            score = 0.0
        else:
            score = -_log_bf(beta_ratio(dataset, base, model), method)
        models.append(model)
        scores.append(score)
    return _normalize(models, scores, SCHEME_VSB, method)


def vsa_table(dataset: Dataset, method: str = "intrinsic") -> PosteriorTable:
    """Rank all submodels by encompassing from above (against the full model)."""
    method = resolve_method(method)
    full = ModelSpec.full(dataset.k)
    models, scores = [], []
    for model in iter_models(dataset.k):
        if model == full:
            score = 0.0
        else:
            score = _log_bf(beta_ratio(dataset, model, full), method)
        models.append(model)
        scores.append(score)
    return _normalize(models, scores, SCHEME_VSA, method)


def pairwise_posterior(
    dataset: Dataset, inner: ModelSpec, outer: ModelSpec, method: str = "intrinsic"
) -> float:
    """Posterior probability of the inner model in the two-model space.

    Equal prior odds on the pair give ``BF / (1 + BF)`` with BF oriented
    inner vs outer; computed as a stable sigmoid of the log Bayes factor.
    The outer model's posterior is the complement.
    """
    method = resolve_method(method)
    if not inner.is_nested_in(outer):
        raise NestingViolationError(
            f"model {inner.indices} is not nested in {outer.indices}"
        )
    log_bf = _log_bf(beta_ratio(dataset, inner, outer), method)
    if log_bf >= 0:
        return 1.0 / (1.0 + math.exp(-log_bf))
    e = math.exp(log_bf)
    return e / (1.0 + e)


def mh_search(
    dataset: Dataset,
    chain_length: int,
    seed: int,
    method: str = "intrinsic",
    scheme: str = SCHEME_VSB,
    top: int = 10,
    score_fn=None,
) -> SearchTrace:
    """Metropolis-Hastings walk over the model space.

    The proposal flips one uniformly chosen non-intercept index (a symmetric
    kernel on the hypercube); a proposed model is accepted with probability
    ``min(1, exp(score_proposed - score_current))`` where the score is the
    scheme's log Bayes factor.  Scores are memoized per model, the walk is
    deterministic given ``seed``, and visit counts over the ``chain_length``
    post-move states are recorded.

    Parameters
    ----------
    score_fn : callable, optional
        ``ModelSpec -> float`` override of the scheme scoring; intended for
        tests and custom criteria.
    """
    if chain_length < 1:
        raise ValueError(f"chain_length must be >= 1, got {chain_length}")
    if dataset.k < 2:
        raise ValueError("mh_search needs at least one non-intercept covariate")
    method = resolve_method(method)
    if scheme not in (SCHEME_VSA, SCHEME_VSB):
        raise ValueError(f"unknown scheme {scheme!r}")

    base = ModelSpec.intercept_only()
    full = ModelSpec.full(dataset.k)

    if score_fn is None:
        if scheme == SCHEME_VSB:

            def score_fn(model):
                if model == base:
                    return 0.0
                return -_log_bf(beta_ratio(dataset, base, model), method)

        else:

            def score_fn(model):
                if model == full:
                    return 0.0
                return _log_bf(beta_ratio(dataset, model, full), method)

    # models are carried as frozensets -> tuples; memoized scores per model
    scores = {}

    def get_score(indices: tuple) -> float:
        s = scores.get(indices)
        if s is None:
            s = float(score_fn(ModelSpec(indices)))
            scores[indices] = s
        return s

    rng = np.random.default_rng(np.random.SeedSequence(seed))
    flips = rng.integers(1, dataset.k, size=chain_length)
    unifs = rng.random(chain_length)

    current = base.indices
    current_score = get_score(current)
    visits = {}
    accepted = 0
    for t in range(chain_length):
        flip = int(flips[t])
        if flip in current:
            proposal = tuple(ix for ix in current if ix != flip)
        else:
            proposal = tuple(sorted(current + (flip,)))
        prop_score = get_score(proposal)
        if prop_score >= current_score or unifs[t] < math.exp(
            prop_score - current_score
        ):
            current = proposal
            current_score = prop_score
            accepted += 1
        visits[current] = visits.get(current, 0) + 1

    best = sorted(scores.items(), key=lambda kv: (-kv[1], len(kv[0]), kv[0]))[:top]
    return SearchTrace(
        visited={ModelSpec(ix): c for ix, c in sorted(visits.items())},
        best_by_score=[(ModelSpec(ix), s) for ix, s in best],
        chain_length=chain_length,
        seed=seed,
        acceptance_rate=accepted / chain_length,
    )
