import numpy as np
import pytest
from sklearn.base import clone

from regret_forge.games import load, make_game
from regret_forge.metrics import weighted_regret
from regret_forge.minimizers import make_rule
from regret_forge.sdp import SequentialDecisionProcess
from regret_forge.solver import (
    CFRSolver,
    SolverConfig,
    SolverState,
    average_strategy,
    counterfactual_losses,
    iterate,
    solve,
)

from oracles import matrix_rm, tree_expectation


def first_iteration(game, variant, alternating=True):
    state = SolverState.start(load(game), make_rule(variant), alternating)
    return iterate(state)


def test_counterfactual_losses_leaf_and_chain():
    sdp = SequentialDecisionProcess.from_parents([("j1", ("a", "b"), None), ("j2", ("c", "d"), (0, 0))])
    local = np.array([1.0, 0.5, 0.5, 0.5, 0.5])
    cf = counterfactual_losses(sdp, local, [0.0, 0.0, 7.0, 1.0, 3.0])
    assert np.allclose(cf[2], [1, 3])
    assert np.allclose(cf[1], [2, 7])
    cf = counterfactual_losses(sdp, {1: [0.5, 0.5], 2: [0.5, 0.5]}, [0.0, 0.0, 7.0, 1.0, 3.0])
    assert np.allclose(cf[1], [2, 7])


def test_kuhn_root_counterfactual_value_is_expected_loss():
    ext = make_game("kuhn")
    g = load("kuhn")
    x_local, y_local = g.sdp_x.uniform, g.sdp_y.uniform
    y = g.sdp_y.reach(y_local)
    cf = counterfactual_losses(g.sdp_x, x_local, g.A.loss_p1(y))
    want = -tree_expectation(ext, g.sdp_x, g.sdp_y, g.sdp_x.reach(x_local), y)[0]
    assert float(cf[0] @ [1.0]) == pytest.approx(want, abs=1e-15)


def test_first_iteration_starts_uniform():
    g = load("nfg:3")
    for variant in ("cfr", "cfrplus", "linear", "dcfr", "dcfrplus", "pcfrplus", "pdcfrplus"):
        state = SolverState.start(g, make_rule(variant))
        assert np.allclose(state.players[0].seq[1:], 1 / 3)
        assert np.allclose(state.players[1].seq[1:], 1 / 3)


@pytest.mark.parametrize("variant", ["pcfrplus", "pdcfrplus"])
def test_nfg3_trace(variant):
    state = first_iteration("nfg:3", variant)
    p1, p2 = state.players
    assert np.allclose(p1.R[1:], [0, 0, 64 / 3], atol=1e-12)
    assert np.allclose(p1.seq[1:], [0, 0, 1])
    assert np.allclose(p2.R[1:], [100 / 3, 100 / 3, 0], atol=1e-12)


def test_nfg3_simultaneous_first_iteration_differs():
    state = first_iteration("nfg:3", "pcfrplus", alternating=False)
    assert np.allclose(state.players[1].R[1:], [35 / 3, 34 / 3, 0], atol=1e-12)


@pytest.mark.parametrize("alternating", [True, False])
def test_nfg2_cfr_matches_matrix_rm(alternating):
    g = load("nfg:2")
    state = SolverState.start(g, make_rule("cfr"), alternating)
    for _ in range(10):
        iterate(state)
    Rx, Ry, Sx, Sy = matrix_rm([[1, 0], [0, 2]], 10, alternating)
    assert np.allclose(state.players[0].R[1:], Rx, atol=1e-12)
    assert np.allclose(state.players[1].R[1:], Ry, atol=1e-12)
    assert np.allclose(average_strategy(state, 1)[1:], Sx / 10, atol=1e-12)
    assert np.allclose(average_strategy(state, 2)[1:], Sy / 10, atol=1e-12)


def test_nfg3_cfr_plus_matches_matrix_rm_plus():
    g = load("nfg:3")
    state = SolverState.start(g, make_rule("cfrplus"))
    for _ in range(25):
        iterate(state)
    Rx, Ry, _, _ = matrix_rm([[1, 0, 5], [0, 2, 0], [0, 0, 100]], 25, plus=True)
    assert np.allclose(state.players[0].R[1:], Rx, atol=1e-9)
    assert np.allclose(state.players[1].R[1:], Ry, atol=1e-9)


def test_average_after_one_iteration_is_uniform():
    result = solve("kuhn", SolverConfig(variant="cfr", iterations=1, eval_interval=1))
    g = load("kuhn")
    assert np.allclose(result.x, g.sdp_x.reach(g.sdp_x.uniform))
    assert np.allclose(result.y, g.sdp_y.reach(g.sdp_y.uniform))


def _iterates(game, variant, T, **kw):
    g = load(game)
    state = SolverState.start(g, make_rule(variant, **kw))
    seen = []
    for _ in range(T):
        seen.append(state.players[0].seq.copy())
        iterate(state)
    return state, seen


def test_cfr_average_is_plain_mean():
    state, seen = _iterates("kuhn", "cfr", 2)
    assert np.allclose(average_strategy(state, 1), (seen[0] + seen[1]) / 2)


def test_dcfr_average_weights():
    state, seen = _iterates("kuhn", "dcfr", 3)
    w = np.array([1.0, 4.0, 9.0])
    want = sum(wi * s for wi, s in zip(w, seen)) / w.sum()
    assert np.allclose(average_strategy(state, 1), want, atol=1e-14)


def test_pcfr_plus_gamma_average_weights():
    state, seen = _iterates("kuhn", "pcfrplus", 4, gamma=5.0)
    w = np.arange(1, 5, dtype=float) ** 5
    want = sum(wi * s for wi, s in zip(w, seen)) / w.sum()
    assert np.allclose(average_strategy(state, 1), want, atol=1e-14)


def test_average_is_sequence_form_every_iteration():
    from regret_forge.sdp import validate_seq

    g = load("leduc")
    state = SolverState.start(g, make_rule("pdcfrplus"))
    for _ in range(30):
        iterate(state)
        for p, sdp in ((1, g.sdp_x), (2, g.sdp_y)):
            assert validate_seq(sdp, average_strategy(state, p), tol=1e-9) == []


@pytest.mark.parametrize("game", ["kuhn", "leduc"])
@pytest.mark.parametrize("variant", ["cfr", "cfrplus", "dcfr", "pdcfrplus"])
def test_counterfactual_decomposition_bound(game, variant):
    g = load(game)
    rule = make_rule(variant)
    T = 60 if game == "leduc" else 200
    hist = {1: ([], []), 2: ([], [])}
    node_regret = {1: np.zeros(g.sdp_x.n_sequences), 2: np.zeros(g.sdp_y.n_sequences)}

    def hook(ev):
        tau = rule.average_weight(ev.t)
        hist[ev.player][0].append(ev.seq_loss.copy())
        hist[ev.player][1].append(ev.strategy.copy())
        node_regret[ev.player] += tau * ev.regret

    state = SolverState.start(g, rule)
    for _ in range(T):
        iterate(state, hook)
    taus = [rule.average_weight(t) for t in range(1, T + 1)]
    for p, sdp in ((1, g.sdp_x), (2, g.sdp_y)):
        total = weighted_regret(sdp, hist[p][0], hist[p][1], taus)
        per_node = np.maximum.reduceat(node_regret[p], sdp.node_first_seq)
        assert total <= np.maximum(per_node, 0).sum() + 1e-9


def test_determinism():
    cfg = SolverConfig(variant="pdcfrplus", iterations=300, eval_interval=7)
    a = solve("leduc", cfg).records
    b = solve("leduc", cfg).records
    assert a == b


def test_records_schedule():
    recs = solve("kuhn", SolverConfig(iterations=45, eval_interval=10)).records
    assert [r.iteration for r in recs] == [10, 20, 30, 40, 45]


def test_kuhn_cfr_plus_converges():
    recs = solve("kuhn", SolverConfig(variant="cfrplus", iterations=1000, eval_interval=100)).records
    assert recs[-1].exploitability < 1e-3


def test_nfg3_pcfr_plus_stall():
    recs = solve("nfg:3", SolverConfig(variant="pcfrplus", iterations=1500, eval_interval=1)).records
    first = next(r.iteration for r in recs if r.exploitability < 1e-2)
    assert 500 <= first <= 1500


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(iterations=0)
    with pytest.raises(ValueError):
        SolverConfig(eval_interval=0)
    with pytest.raises(ValueError, match="beta"):
        SolverConfig(variant="cfrplus", beta=0.1)
    with pytest.raises(ValueError):
        SolverConfig(variant="nope")


def test_estimator_api():
    est = CFRSolver(variant="pcfrplus", iterations=200, eval_interval=50)
    assert est.get_params()["variant"] == "pcfrplus"
    twin = clone(est).set_params(variant="cfrplus")
    assert twin.variant == "cfrplus" and est.variant == "pcfrplus"
    est.fit("kuhn")
    assert len(est.records_) == 4
    assert est.score() == pytest.approx(-est.exploitability_, rel=1e-9)
    policy = est.policy(1)
    assert set(policy) == {("J", ""), ("Q", ""), ("K", ""), ("J", "cb"), ("Q", "cb"), ("K", "cb")}
    # player 1 never calls a bet holding J at equilibrium
    assert policy[("J", "cb")]["call"] < 0.05
    [probs] = est.predict([(1, ("J", "cb"))])
    assert probs.sum() == pytest.approx(1.0)


def test_estimator_requires_fit():
    from sklearn.exceptions import NotFittedError

    with pytest.raises(NotFittedError):
        CFRSolver().policy()
    with pytest.raises(TypeError):
        CFRSolver(iterations=2).fit(42)
