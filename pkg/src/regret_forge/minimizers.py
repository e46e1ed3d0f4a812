"""Local regret minimizers for one decision node (or many at once).

Every rule works on flat arrays, so the solver can update all sequences
of a player in one call and a single :class:`RegretState` can reuse the
same code for one simplex.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .exceptions import UnknownVariantError
from .sdp import LocalStrategy, normalize_simplex


class Variant(str, enum.Enum):
    CFR = "cfr"
    CFR_PLUS = "cfrplus"
    LINEAR = "linear"
    DCFR = "dcfr"
    DCFR_PLUS = "dcfrplus"
    PCFR_PLUS = "pcfrplus"
    PDCFR_PLUS = "pdcfrplus"
    WCFR_PLUS = "wcfrplus"
    PWCFR_PLUS = "pwcfrplus"

    @classmethod
    def parse(cls, name) -> "Variant":
        if isinstance(name, Variant):
            return name
        key = str(name).strip().lower().replace("+", "plus").replace("-", "").replace("_", "")
        key = {"linearcfr": "linear", "lcfr": "linear", "rm": "cfr", "rmplus": "cfrplus"}.get(key, key)
        try:
            return cls(key)
        except ValueError:
            valid = ", ".join(v.value for v in cls)
            raise UnknownVariantError(f"unknown variant {name!r}; expected one of: {valid}") from None

    @property
    def predictive(self) -> bool:
        return self in (Variant.PCFR_PLUS, Variant.PDCFR_PLUS, Variant.PWCFR_PLUS)

    @property
    def clipped(self) -> bool:
        """Regret-matching+ family: cumulative regrets stay in the orthant."""
        return self not in (Variant.CFR, Variant.LINEAR, Variant.DCFR)


# Hyperparameters each variant accepts, with defaults.
DEFAULTS = {
    Variant.CFR: {},
    Variant.CFR_PLUS: {},
    Variant.LINEAR: {},
    Variant.DCFR: {"alpha": 1.5, "beta": 0.0, "gamma": 2.0},
    Variant.DCFR_PLUS: {"alpha": 1.5, "gamma": 4.0},
    Variant.PCFR_PLUS: {"gamma": 2.0},
    Variant.PDCFR_PLUS: {"alpha": 2.3, "gamma": 5.0},
    Variant.WCFR_PLUS: {},
    Variant.PWCFR_PLUS: {},
}


def _power(base: float, exponent: float) -> float:
    # 0^a := 0 for every exponent, so nothing is carried over from t = 0.
    return 0.0 if base == 0 else float(base) ** exponent


@dataclass(frozen=True)
class DiscountSchedule:
    """Discount factors of the DCFR family.

    ``loss_weight`` and ``average_weight`` give the additive weights
    ``w(t)`` and ``tau(t)`` the multiplicative discounts are equivalent to
    (up to a common scale that cancels in normalization).
    """

    alpha: float = 1.5
    beta: float = 0.0
    gamma: float = 2.0

    def regret_discount(self, t: int) -> float:
        """Multiplier on R^{t-1} inside the iteration-t update."""
        k = _power(t - 1, self.alpha)
        return k / (k + 1)

    def prediction_discount(self, t: int) -> float:
        k = _power(t, self.alpha)
        return k / (k + 1)

    def strategy_discount(self, t: int) -> float:
        return ((t - 1) / t) ** self.gamma

    def dcfr_discount(self, t: int) -> tuple[float, float]:
        """(positive, negative) multipliers applied to R^t before adding r^{t+1}."""
        pos, neg = _power(t, self.alpha), _power(t, self.beta)
        return pos / (pos + 1), neg / (neg + 1)

    def loss_weight(self, t: int) -> float:
        # [d R + r]^+ = c [R/c' + r/c]^+ with c = prod of discounts, so w(t) = prod_{k<t}(1 + k^-alpha).
        return float(np.prod([1.0 + k ** -self.alpha for k in range(1, t)]))

    def average_weight(self, t: int) -> float:
        return float(t) ** self.gamma


@dataclass(frozen=True)
class WeightSchedule:
    """Caller-supplied ``w`` (loss weights) and ``tau`` (averaging weights)."""

    w: Callable[[int], float] = field(default=lambda t: 1.0)
    tau: Callable[[int], float] = field(default=lambda t: float(t))

    def loss_weight(self, t: int) -> float:
        return float(self.w(t))

    def average_weight(self, t: int) -> float:
        return float(self.tau(t))


def ratio_nonincreasing(schedule, t_max: int, rtol: float = 1e-12) -> bool:
    """Check that ``tau(t)/w(t)`` is positive and non-increasing for ``t <= t_max``."""
    t = np.arange(1, t_max + 1, dtype=float)
    if isinstance(schedule, DiscountSchedule):
        log_w = np.concatenate([[0.0], np.cumsum(np.log1p(t[:-1] ** -schedule.alpha))])
        log_ratio = schedule.gamma * np.log(t) - log_w
        return bool(np.all(np.diff(log_ratio) <= rtol))
    ratio = np.array([schedule.average_weight(int(k)) / schedule.loss_weight(int(k)) for k in t])
    if np.any(ratio <= 0):
        return False
    return bool(np.all(np.diff(ratio) <= rtol * np.abs(ratio[:-1])))


@dataclass(frozen=True)
class UpdateRule:
    """One variant with its hyperparameters, as vectorized array updates."""

    variant: Variant
    discount: DiscountSchedule | None = None
    weights: WeightSchedule | None = None

    @property
    def predictive(self) -> bool:
        return self.variant.predictive

    @property
    def discounted_average(self) -> bool:
        return self.variant in (Variant.DCFR, Variant.DCFR_PLUS, Variant.PDCFR_PLUS)

    def params(self) -> dict:
        d = self.discount
        names = DEFAULTS[self.variant]
        return {k: getattr(d, k) for k in names} if d is not None else {}

    def update_regrets(self, R: np.ndarray, r: np.ndarray, t: int) -> np.ndarray:
        v = self.variant
        if v is Variant.CFR:
            return R + r
        if v in (Variant.CFR_PLUS, Variant.PCFR_PLUS):
            return np.maximum(R + r, 0.0)
        if v is Variant.LINEAR:
            return R + t * r
        if v is Variant.DCFR:
            pos, neg = self.discount.dcfr_discount(t - 1)
            return R * np.where(R > 0, pos, neg) + r
        if v in (Variant.DCFR_PLUS, Variant.PDCFR_PLUS):
            return np.maximum(R * self.discount.regret_discount(t) + r, 0.0)
        return np.maximum(R + self.weights.loss_weight(t) * r, 0.0)

    def strategy_input(self, R: np.ndarray, v: np.ndarray | None, t: int) -> np.ndarray:
        """Unnormalized nonnegative vector the iteration-(t+1) strategy is read from."""
        var = self.variant
        if var is Variant.PCFR_PLUS:
            return np.maximum(R + v, 0.0)
        if var is Variant.PDCFR_PLUS:
            return np.maximum(R * self.discount.prediction_discount(t) + v, 0.0)
        if var is Variant.PWCFR_PLUS:
            return np.maximum(R + self.weights.loss_weight(t + 1) * v, 0.0)
        return np.maximum(R, 0.0)

    def average_weight(self, t: int) -> float:
        """Additive weight tau(t) of iterate t in the average strategy."""
        v = self.variant
        if v is Variant.CFR:
            return 1.0
        if v in (Variant.CFR_PLUS, Variant.LINEAR):
            return float(t)
        if v in (Variant.WCFR_PLUS, Variant.PWCFR_PLUS):
            return self.weights.average_weight(t)
        return float(t) ** self.discount.gamma

    def accumulate(self, X: np.ndarray, W: float, x: np.ndarray, t: int) -> tuple[np.ndarray, float]:
        """Fold iterate ``x`` into the running (X, W) pair."""
        if self.discounted_average:
            d = self.discount.strategy_discount(t)
            return X * d + x, W * d + 1.0
        tau = self.average_weight(t)
        return X + tau * x, W + tau

    def loss_weight(self, t: int) -> float:
        v = self.variant
        if v is Variant.LINEAR:
            return float(t)
        if v in (Variant.DCFR_PLUS, Variant.PDCFR_PLUS):
            return self.discount.loss_weight(t)
        if v in (Variant.WCFR_PLUS, Variant.PWCFR_PLUS):
            return self.weights.loss_weight(t)
        return 1.0


def make_rule(variant, alpha=None, beta=None, gamma=None, schedule: WeightSchedule | None = None) -> UpdateRule:
    v = Variant.parse(variant)
    allowed = DEFAULTS[v]
    given = {"alpha": alpha, "beta": beta, "gamma": gamma}
    for name, value in given.items():
        if value is not None and name not in allowed:
            raise ValueError(f"{v.value} does not take {name}")
    if schedule is not None and v not in (Variant.WCFR_PLUS, Variant.PWCFR_PLUS):
        raise ValueError(f"{v.value} does not take a weight schedule")
    discount = None
    if allowed:
        merged = {k: float(given[k]) if given[k] is not None else allowed[k] for k in allowed}
        if merged.get("gamma", 1.0) <= 0 or merged.get("alpha", 1.0) <= 0:
            raise ValueError("alpha and gamma must be positive")
        discount = DiscountSchedule(**merged)
    weights = None
    if v in (Variant.WCFR_PLUS, Variant.PWCFR_PLUS):
        weights = schedule if schedule is not None else WeightSchedule()
    return UpdateRule(v, discount, weights)


# Per-node API ---------------------------------------------------------------


@dataclass(frozen=True)
class RegretState:
    node_id: int
    R: np.ndarray
    rule: UpdateRule
    t: int = 0
    v: np.ndarray | None = None  # pending prediction for the next strategy
    m: np.ndarray | None = None  # last observed loss

    @property
    def variant(self) -> Variant:
        return self.rule.variant


def instantiate(node_id: int, n_actions: int, rule: UpdateRule | str) -> RegretState:
    if not isinstance(rule, UpdateRule):
        rule = make_rule(rule)
    return RegretState(node_id, np.zeros(n_actions), rule)


def instantaneous_regret(x, loss) -> np.ndarray:
    x = np.asarray(getattr(x, "probs", x), dtype=float)
    loss = np.asarray(loss, dtype=float)
    if x.shape != loss.shape:
        raise ValueError(f"strategy has shape {x.shape}, loss has shape {loss.shape}")
    return float(x @ loss) - loss


def make_prediction(last_loss, x) -> np.ndarray:
    """Prediction ``<m, x> 1 - m`` of the next regret; zero before any loss."""
    x = np.asarray(getattr(x, "probs", x), dtype=float)
    if last_loss is None:
        return np.zeros_like(x)
    return instantaneous_regret(x, last_loss)


def update(state: RegretState, r, t: int) -> RegretState:
    if t != state.t + 1:
        raise ValueError(f"update for iteration {t} on a state at iteration {state.t}")
    R = state.rule.update_regrets(state.R, np.asarray(r, dtype=float), t)
    return replace(state, R=R, t=t)


def observe(state: RegretState, loss, x) -> RegretState:
    """Record the loss seen with strategy ``x`` and refresh the prediction."""
    loss = np.asarray(loss, dtype=float)
    v = make_prediction(loss, x) if state.rule.predictive else None
    return replace(state, m=loss, v=v)


def next_strategy(state: RegretState, v_next=None) -> LocalStrategy:
    if state.rule.predictive:
        if v_next is None:
            v_next = state.v if state.v is not None else np.zeros_like(state.R)
    elif v_next is not None:
        raise ValueError(f"{state.variant.value} is not predictive; got a prediction")
    raw = state.rule.strategy_input(state.R, None if v_next is None else np.asarray(v_next, float), state.t)
    return LocalStrategy(state.node_id, normalize_simplex(raw))


# Online mirror descent on the nonnegative orthant ---------------------------


@dataclass(frozen=True)
class OmdState:
    """OMD with the regularizer ``0.5 * ||x||^2`` on the nonnegative orthant."""

    decision: np.ndarray
    eta: float
    z: np.ndarray | None = None

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("step size must be positive")


def omd_init(n: int, eta: float, optimistic: bool = False) -> OmdState:
    # argmin of the regularizer over the orthant is the origin.
    return OmdState(np.zeros(n), float(eta), np.zeros(n) if optimistic else None)


def omd_step(state: OmdState, loss) -> OmdState:
    return replace(state, decision=np.maximum(state.decision - state.eta * np.asarray(loss, float), 0.0))


def optimistic_omd_step(state: OmdState, loss, prediction) -> OmdState:
    z = state.z if state.z is not None else np.zeros_like(state.decision)
    z = np.maximum(z - state.eta * np.asarray(loss, float), 0.0)
    decision = np.maximum(z - state.eta * np.asarray(prediction, float), 0.0)
    return replace(state, decision=decision, z=z)


class OmdSimplexMinimizer:
    """Simplex regret minimizer built from (optimistic) OMD.

    The orthant learner is fed ``-w(t) r^t`` (and the prediction
    ``-w(t+1) v^{t+1}`` when optimistic); its decision is normalized onto
    the simplex.
    """

    def __init__(self, n: int, eta: float, weights: WeightSchedule | None = None, optimistic: bool = False):
        self.weights = weights or WeightSchedule()
        self.optimistic = optimistic
        self.state = omd_init(n, eta, optimistic)
        self.t = 0
        self.x = normalize_simplex(self.state.decision)

    def next_strategy(self) -> np.ndarray:
        return self.x

    def observe_loss(self, loss) -> np.ndarray:
        self.t += 1
        r = instantaneous_regret(self.x, loss)
        w = self.weights.loss_weight
        if self.optimistic:
            v = make_prediction(loss, self.x)
            self.state = optimistic_omd_step(self.state, -w(self.t) * r, -w(self.t + 1) * v)
        else:
            self.state = omd_step(self.state, -w(self.t) * r)
        self.x = normalize_simplex(self.state.decision)
        return self.x


class RegretMatchingMinimizer:
    """Closed-form counterpart of :class:`OmdSimplexMinimizer` on a single simplex."""

    def __init__(self, n: int, rule: UpdateRule | str):
        self.state = instantiate(0, n, rule)
        self.x = next_strategy(self.state)

    def next_strategy(self) -> np.ndarray:
        return self.x.probs

    def observe_loss(self, loss) -> np.ndarray:
        r = instantaneous_regret(self.x, loss)
        self.state = observe(update(self.state, r, self.state.t + 1), loss, self.x)
        self.x = next_strategy(self.state)
        return self.x.probs


def simplex_adapter(losses, eta: float, weights: WeightSchedule | None = None, optimistic: bool = False) -> list[np.ndarray]:
    """Run :class:`OmdSimplexMinimizer` over a loss stream; returns x^1..x^{T+1}."""
    losses = [np.asarray(l, dtype=float) for l in losses]
    if not losses:
        return []
    m = OmdSimplexMinimizer(len(losses[0]), eta, weights, optimistic)
    out = [m.next_strategy()]
    for loss in losses:
        out.append(m.observe_loss(loss))
    return out
