import random
from fractions import Fraction

import pytest

from conftest import CHAIN_NO_B, TWO_BRANCH, W, xyzu_graph
from treescm import expr as ex
from treescm.covariance import SigmaPoints, rational_assignment, sample_assignment, sigma_matrix
from treescm.cyclefind import CycleClass, EquationGraph, cycle_edges, walk_weight
from treescm.fastp import (Fastp, FastpError, ZERO_FASTP, common_root, eval_fastp, fastp_rational,
                           fastp_satisfies, parse_fastp, propagate, roots_from_cycle, serialize_fastp)
from treescm.identify import propagate_component
from treescm.model import M1
from treescm.oracle import exact_sigma
from treescm.pit import DEFAULT_PRIME, PitSession
from treescm.rank import rank_table

P = DEFAULT_PRIME


def field_point(m, seed):
    a = sample_assignment(m, PitSession(seed))
    return a, sigma_matrix(m, a, P)


def rank2_graph(m, session):
    ranks = rank_table(m, session)
    return EquationGraph.from_model(m, [r.edge for r in ranks if r.rank == 2], nodes=range(1, m.n + 1))


def two_branch_forms(seed=0):
    s = PitSession(seed)
    pts = SigmaPoints(TWO_BRANCH, s)
    g = rank2_graph(TWO_BRANCH, s)
    w = walk_weight(g, cycle_edges([1, 2, 3]), symbolic=True)
    roots = roots_from_cycle(w, pts)
    return g, pts, roots, propagate_component(g, [1, 2, 3], 1, roots.fastp, pts)


def test_parse_rational_instrument_form():
    f = parse_fastp("σ[0,2]/σ[0,1]")
    assert f.is_rational
    for seed in range(5):
        a, S = field_point(M1, seed)
        assert eval_fastp(f, S, modulus=P) == a.lam[(1, 2)]


def test_parse_zero_form():
    f = parse_fastp("(0)/(1)")
    assert f.p.is_zero_const and f.r.value == 1
    assert eval_fastp(f, None) == 0


@pytest.mark.parametrize("text", ["σ[0,1]/(0)", "σ[0,1]/", "σ[0,1]))", "sqrt(sqrt(σ[0,0]))", "σ[0,1]#"])
def test_parse_rejects(text):
    with pytest.raises(FastpError):
        parse_fastp(text)


def test_xyzu_cycle_roots():
    g = xyzu_graph()
    w = walk_weight(g, cycle_edges(["x", "u", "z"]))
    assert w == W([[-1, 1], [2, 1]])
    roots = roots_from_cycle(w, SigmaPoints.constant(PitSession(0)))
    assert roots.kind is CycleClass.TWO_SOLUTIONS and roots.branches == 2
    f = roots.fastp
    assert f.r.value == 4 and f.s.value == 12
    for branch in (1, -1):
        x = eval_fastp(f, None, branch)
        assert x == pytest.approx((-x + 1) / (2 * x + 1), abs=1e-12)


def test_scalar_weight_has_infinitely_many_roots():
    roots = roots_from_cycle(W([[3, 0], [0, 3]]), SigmaPoints.constant(PitSession(0)))
    assert roots.kind is CycleClass.INFINITE and roots.fastp is None


def test_triangular_weight_linear_root():
    roots = roots_from_cycle(W([[1, 3], [0, 2]]), SigmaPoints.constant(PitSession(0)))
    assert roots.kind is CycleClass.ONE_SOLUTION
    assert eval_fastp(roots.fastp, None) == 3


def test_double_root():
    roots = roots_from_cycle(W([[3, -1], [1, 1]]), SigmaPoints.constant(PitSession(0)))
    assert roots.kind is CycleClass.ONE_SOLUTION
    assert eval_fastp(roots.fastp, None) == 1


def test_no_solution_weight():
    roots = roots_from_cycle(W([[1, 1], [0, 1]]), SigmaPoints.constant(PitSession(0)))
    assert roots.kind is CycleClass.NO_SOLUTION and roots.fastp is None


def test_propagate_round_trip_and_satisfaction():
    s = PitSession(4)
    pts = SigmaPoints(TWO_BRANCH, s)
    e = rank2_graph(TWO_BRANCH, s).equations[frozenset((1, 2))]
    y = fastp_rational(ex.sigma(1, 3), ex.sigma(0, 2))
    x = propagate(e, y, pts)
    assert fastp_satisfies(x, y, e, pts)
    back = propagate(e, x, pts, forward=True)
    assert pts.is_zero(back.p * y.r - back.r * y.p)


def test_cycle_closure_satisfies_every_equation():
    g, pts, roots, forms = two_branch_forms()
    assert all(forms[v].s is roots.fastp.s for v in forms)
    for e in g.equations.values():
        assert fastp_satisfies(forms[e.i], forms[e.j], e, pts)


def test_conjugate_swap_and_zero_form_fail():
    g, pts, _, forms = two_branch_forms(1)
    e = g.equations[frozenset((1, 2))]
    f1 = forms[1]
    swapped = Fastp(f1.p, -f1.q, f1.r, -f1.t, f1.s)
    assert not fastp_satisfies(swapped, forms[2], e, pts)
    assert not fastp_satisfies(ZERO_FASTP, forms[2], e, pts)


def test_two_branches_are_the_truth_and_its_partner():
    # formal satisfaction of every equation must match exact rational evaluation of both branches
    g, _, _, forms = two_branch_forms(2)
    rng = random.Random(50)
    for _ in range(50):
        a = rational_assignment(TWO_BRANCH, rng, bound=50)
        sig = exact_sigma(TWO_BRANCH, a)
        vals = {b: {v: eval_fastp(forms[v], sig, b) for v in forms} for b in (1, -1)}
        assert all(isinstance(x, Fraction) for b in vals for x in vals[b].values())
        truth = {v: a.lam[(TWO_BRANCH.parent[v], v)] for v in forms}
        assert truth in (vals[1], vals[-1])
        for b in (1, -1):
            for e in g.equations.values():
                x, y = vals[b][e.i], vals[b][e.j]
                assert (sig[e.p, e.q] * x * y - sig[e.p, e.j] * x - sig[e.i, e.q] * y + sig[e.i, e.j]) == 0


def test_eval_field_and_exact_modes():
    f = parse_fastp("σ[0,1]/σ[0,0]")
    a, S = field_point(M1, 9)
    assert eval_fastp(f, S, modulus=P) == a.lam[(0, 1)]
    ra = rational_assignment(M1, random.Random(3))
    assert eval_fastp(f, exact_sigma(M1, ra)) == ra.lam[(0, 1)]
    with pytest.raises(ValueError):
        eval_fastp(f, S, branch=0)


def test_serialize_round_trip_both_branches():
    _, _, _, forms = two_branch_forms(3)
    for seed in range(5):
        _, S = field_point(TWO_BRANCH, 100 + seed)
        for f in forms.values():
            plus = parse_fastp(serialize_fastp(f, 1))
            minus = parse_fastp(serialize_fastp(f, -1))
            assert eval_fastp(plus, S, 1, P) == eval_fastp(f, S, 1, P)
            assert eval_fastp(minus, S, 1, P) == eval_fastp(f, S, -1, P)


def test_serialize_rational_chain_form():
    f = fastp_rational(ex.sigma(0, 2), ex.sigma(0, 1))
    assert serialize_fastp(f) == "σ[0,2]/σ[0,1]"
    a, S = field_point(CHAIN_NO_B, 1)
    assert eval_fastp(parse_fastp(serialize_fastp(f)), S, modulus=P) == a.lam[(1, 2)]


def test_length_three_cycle_root_is_small():
    _, _, roots, _ = two_branch_forms()
    assert ex.size(*roots.fastp.roots()) <= 200


def test_common_root_of_two_quadratics():
    # (x - 1)(x - 2) and (x - 1)(x + 3) share only x = 1
    w1 = W([[0, -2], [1, -3]])
    w2 = W([[0, 3], [1, 2]])
    pts = SigmaPoints.constant(PitSession(0))
    assert eval_fastp(common_root(w1, w2, pts), None) == 1
    with pytest.raises(FastpError):
        common_root(w1, w1, pts)
