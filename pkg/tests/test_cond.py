import numpy as np
import pytest

from gausslang.cond import (
    CondMorphism,
    J,
    canonicalize,
    condition_effect,
    effect_normal_form,
    equiv,
    obs_compose,
    obs_identity,
    obs_tensor,
    obs_tupling,
    probe,
    reduce_constraint,
    state_normalize,
    success_region,
)
from gausslang.errors import ContractError
from gausslang.gauss import (
    GaussMap,
    GaussState,
    affine,
    compose,
    constant,
    identity,
    is_failure,
    standard_normal,
    states_close,
    tensor,
)
from gausslang.generate import random_invertible
from gausslang.linalg import subspace_contains

from conftest import random_psd


def enforced(o, keep_variable):
    """x |-> (x =:= o); x   or   x |-> (x =:= o); o."""
    if keep_variable:
        return CondMorphism.build(affine([[1.0], [1.0]]), 1, [o])
    return CondMorphism.build(affine([[0.0], [1.0]], [o, 0.0]), 1, [o])


def random_morphism(rng, dom, cod, k):
    """A noisy Gauss map with k condition wires of random noise rank."""
    n = cod + k
    Sigma = random_psd(rng, n, rank=int(rng.integers(0, n + 1)))
    f = GaussMap.make(rng.standard_normal((n, dom)), rng.standard_normal(n), Sigma)
    return CondMorphism.build(f, cod, rng.standard_normal(k))


def recombined(m, S):
    """The same conditions with their wires recombined by the invertible S."""
    f = compose(tensor(identity(m.cod), affine(S)), m.f)
    return CondMorphism(m.dom, m.cod, m.k, f, S @ m.o)


def test_morphism_shape_checks():
    with pytest.raises(ContractError):
        CondMorphism(1, 1, 1, affine(np.eye(1)), np.zeros(1))
    with pytest.raises(ContractError):
        CondMorphism(1, 1, 0, affine(np.eye(1)), np.zeros(1))
    m = CondMorphism.build(affine(np.ones((3, 2))), 1, [0.0, 0.0])
    assert (m.dom, m.cod, m.k) == (2, 1, 2)
    assert list(m.condition_block) == [1, 2]


def test_exact_conditioning_on_equality():
    # X, Y ~ N(0, 1); (X - Y =:= 0); (X, Y)
    joint = compose(affine([[1.0, 0.0], [0.0, 1.0], [1.0, -1.0]]), standard_normal(2))
    post = state_normalize(CondMorphism.build(joint, 2, [0.0]))
    assert np.allclose(post.mean, 0.0, atol=1e-12)
    assert np.allclose(post.cov, 0.5, atol=1e-12)


def test_state_normalize_fails_off_support():
    s = CondMorphism.build(constant([0.0, 1.0]), 1, [2.0])
    assert is_failure(state_normalize(s))
    with pytest.raises(ContractError):
        state_normalize(obs_identity(1))


def test_composition_threads_conditions():
    prior = J(standard_normal(1))
    post = state_normalize(obs_compose(enforced(0.7, True), prior))
    assert states_close(post, constant([0.7]))
    with pytest.raises(ContractError):
        obs_compose(enforced(0.7, True), J(standard_normal(2)))


def test_tensor_and_tupling_keep_conditions_apart():
    both = obs_tensor(enforced(1.0, True), enforced(-2.0, True))
    assert (both.dom, both.cod, both.k) == (2, 2, 2)
    post = state_normalize(obs_compose(both, J(standard_normal(2))))
    assert states_close(post, constant([1.0, -2.0]))
    paired = obs_tupling(obs_identity(1), enforced(3.0, False))
    assert (paired.dom, paired.cod, paired.k) == (1, 2, 1)


def test_effect_normal_form_of_a_point_condition():
    nf = effect_normal_form(condition_effect([0.5]))
    assert not nf.is_bot
    assert np.allclose(nf.A, [[1.0]]) and np.allclose(nf.c, [0.5]) and np.allclose(nf.S, [[0.0]])


def test_redundant_rows_are_dropped():
    nf = reduce_constraint([[1.0, 0.0], [2.0, 0.0]], [1.0, 2.0], np.zeros((2, 2)))
    assert nf.rank == 1
    assert np.allclose(nf.A, [[1.0, 0.0]]) and np.allclose(nf.c, [1.0])


def test_inconsistent_rows_give_bot():
    nf = reduce_constraint([[1.0], [1.0]], [1.0, 2.0], np.zeros((2, 2)))
    assert nf.is_bot


def test_noisy_closed_row_updates_the_others():
    # x =:= 1 + e1, 0 =:= e1 with e1 ~ N(0, 1): x is pinned to 1
    nf = reduce_constraint([[1.0], [0.0]], [1.0, 0.0], [[1.0, 1.0], [1.0, 1.0]])
    assert np.allclose(nf.c, [1.0]) and np.allclose(nf.S, [[0.0]], atol=1e-12)


def test_normal_form_ignores_row_order(rng):
    A = rng.standard_normal((3, 4))
    c = rng.standard_normal(3)
    B = rng.standard_normal((3, 2))
    Sigma = B @ B.T
    nf = reduce_constraint(A, c, Sigma)
    perm = [2, 0, 1]
    other = reduce_constraint(A[perm], c[perm], Sigma[np.ix_(perm, perm)])
    assert nf.close_to(other)


def test_success_region():
    point = success_region(effect_normal_form(condition_effect([2.0])))
    assert point.dim == 0 and np.allclose(point.point, [2.0])
    noisy = reduce_constraint([[1.0, 1.0]], [0.0], [[1.0]])
    assert success_region(noisy).dim == 2
    assert success_region(reduce_constraint([[1.0], [1.0]], [1.0, 2.0], np.zeros((2, 2)))) is None


def test_success_region_of_a_partially_noisy_effect():
    # x1 + x2 =:= 1 exactly, x1 =:= N(0, 1)
    nf = reduce_constraint([[1.0, 1.0], [1.0, 0.0]], [1.0, 0.0], np.diag([0.0, 1.0]))
    W = success_region(nf)
    assert W.dim == 1
    assert subspace_contains(W, [3.0, -2.0])
    assert not subspace_contains(W, [0.0, 0.0])


def test_enforcing_conditions(rng):
    for o in rng.uniform(-3, 3, size=20):
        assert equiv(enforced(o, True), enforced(o, False))


def test_equiv_distinguishes_outputs():
    assert not equiv(J(affine([[1.0]])), J(affine([[1.0]], [0.5])))
    assert not equiv(J(standard_normal(1)), J(compose(affine([[2.0]]), standard_normal(1))))


def test_equiv_checks_types():
    with pytest.raises(ContractError):
        equiv(obs_identity(1), obs_identity(2))


def test_bot_morphisms_are_equivalent():
    fail_a = CondMorphism.build(constant([0.0]), 0, [1.0])
    fail_b = CondMorphism.build(constant([3.0, 0.0]), 0, [1.0, 0.0])
    assert canonicalize(fail_a).is_bot
    assert equiv(fail_a, fail_b)


def test_posterior_is_only_compared_on_the_success_region():
    # x |-> (x =:= 0); x + 5  and  x |-> (x =:= 0); 5 agree wherever the condition can hold
    m1 = CondMorphism.build(affine([[1.0], [1.0]], [5.0, 0.0]), 1, [0.0])
    m2 = CondMorphism.build(affine([[0.0], [1.0]], [5.0, 0.0]), 1, [0.0])
    assert equiv(m1, m2)


def test_probe_with_a_correlated_prior():
    psi = GaussState.of([0.0, 0.0], [[1.0, 0.9], [0.9, 1.0]])
    out = probe(enforced(1.0, True), psi)
    # the extra coordinate is updated through the correlation
    assert np.allclose(out.mean, [0.9, 1.0])
    assert np.allclose(out.cov, [[0.19, 0.0], [0.0, 0.0]], atol=1e-12)
    with pytest.raises(ContractError):
        probe(obs_identity(2), standard_normal(1))


def test_composition_is_associative_up_to_equivalence(rng):
    for _ in range(20):
        f, g, h = random_morphism(rng, 2, 2, 1), random_morphism(rng, 2, 1, 1), random_morphism(rng, 1, 2, 1)
        assert equiv(obs_compose(h, obs_compose(g, f)), obs_compose(obs_compose(h, g), f))


def test_tensor_interchanges_with_composition(rng):
    for _ in range(20):
        f1, g1 = random_morphism(rng, 1, 2, 1), random_morphism(rng, 2, 1, 1)
        f2, g2 = random_morphism(rng, 2, 1, 1), random_morphism(rng, 1, 1, 2)
        lhs = obs_compose(obs_tensor(g1, g2), obs_tensor(f1, f2))
        rhs = obs_tensor(obs_compose(g1, f1), obs_compose(g2, f2))
        assert equiv(lhs, rhs)


def test_failure_absorbs_everything_after_it(rng):
    bottom = CondMorphism.build(constant([0.0, 0.0, 1.0]), 2, [2.0])
    assert is_failure(state_normalize(bottom))
    for _ in range(10):
        m = random_morphism(rng, 2, 1, 1)
        assert is_failure(state_normalize(obs_compose(m, bottom)))
        other = CondMorphism.build(GaussState.of(rng.standard_normal(1), [[1.0]]), 1, [])
        assert is_failure(state_normalize(obs_tensor(other, bottom)))
        assert is_failure(state_normalize(obs_tensor(bottom, other)))


def test_recombined_conditions_are_equivalent(rng):
    for _ in range(30):
        m = random_morphism(rng, 2, 1, 3)
        order = np.eye(3)[rng.permutation(3)]
        assert equiv(m, recombined(m, order))
        assert equiv(m, recombined(m, random_invertible(rng, 3)))


def test_normalising_commutes_with_tensor(rng):
    outcomes = set()
    for _ in range(30):
        s1, s2 = random_morphism(rng, 0, 2, 1), random_morphism(rng, 0, 1, 2)
        joint = state_normalize(obs_tensor(s1, s2))
        p1, p2 = state_normalize(s1), state_normalize(s2)
        if is_failure(p1) or is_failure(p2):
            outcomes.add("bot")
            assert is_failure(joint)
        else:
            outcomes.add("ok")
            assert states_close(joint, tensor(p1, p2), 1e-7)
    assert outcomes == {"bot", "ok"}


@pytest.mark.slow
def test_runs_against_priors_agree_with_equivalence(rng):
    seen = set()
    for _ in range(40):
        m1 = random_morphism(rng, 2, 1, 2)
        kind = rng.choice(["recombined", "shifted-output", "shifted-observation"])
        if kind == "recombined":
            m2 = recombined(m1, random_invertible(rng, 2))
        elif kind == "shifted-output":
            m2 = CondMorphism(m1.dom, m1.cod, m1.k, compose(affine(np.eye(3), [0.5, 0.0, 0.0]), m1.f), m1.o)
        else:
            m2 = CondMorphism(m1.dom, m1.cod, m1.k, m1.f, m1.o + [0.5, 0.0])
        priors = [GaussState.of(rng.standard_normal(3), random_psd(rng, 3) + np.eye(3)) for _ in range(3)]
        agree = all(states_close(probe(m1, psi), probe(m2, psi), 1e-7) for psi in priors)
        same = equiv(m1, m2)
        assert agree == same, kind
        seen.add(same)
    assert seen == {True, False}
