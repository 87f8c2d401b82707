"""Class complexes, invariant distributions, and the obstruction rank."""

from fractions import Fraction

import pytest

from conftest import rand_function, rng

from adic.cohomology import (birkhoff_cochain, cohomology_basis,
                             distributions, induced_map,
                             is_coboundary_class, limit_rank)
from adic.diagrams import LazyPath, TAIL_MIN, enumerate_paths
from adic.martingale import (CylinderFunction, compose_phi,
                             constant_function, lift, nu_mean)
from adic.measures import renorm_data
from adic.solenoid import build_complex


def _tower(d, max_level=8):
    return limit_rank(d, renorm_data(d), max_level=max_level)


def test_h1_dimensions(odo2, fib, pisot31):
    for d, dim in ((odo2, 1), (fib, 2), (pisot31, 2)):
        rd = renorm_data(d)
        for k in (0, 1, 2):
            sp = cohomology_basis(build_complex(d, rd, k))
            assert sp.dim_h1 == dim


def test_induced_maps_hand_values(odo2, fib):
    # odometer: the single loop wraps twice; fib: the substitution matrix
    rd2, rdf = renorm_data(odo2), renorm_data(fib)
    assert induced_map(odo2, rd2, 1) == ((2,),)
    assert induced_map(fib, rdf, 1) == ((1, 1), (1, 0))


def test_limit_rank_values(odo2, fib):
    t2 = _tower(odo2)
    assert t2.d == 1 and t2.stabilized and t2.k_prime <= 5
    tf = _tower(fib)
    assert tf.d == 2 and tf.stabilized and tf.k_prime <= 5


def test_birkhoff_cochain_matches_direct_sums(odo2, fib):
    r = rng(301)
    for d in (odo2, fib):
        h = rand_function(r, d, 2)
        k = 3
        co = birkhoff_cochain(d, h, k)
        # direct oracle: sum h over E_v in tower order for each vertex v
        num_v = build_complex(d, renorm_data(d), k).num_edges
        for v in range(num_v):
            total = Fraction(0)
            for p in enumerate_paths(d, 0, k, target=v):
                total += h.evaluate(d, LazyPath(p, TAIL_MIN))
            assert co[v] == total


def test_single_distribution_is_the_mean_functional(odo2):
    # rank one: the only distribution is a fixed positive multiple of the
    # nu-mean and vanishes exactly when the mean does
    r = rng(302)
    tower = _tower(odo2)
    ratio = None
    for _ in range(20):
        h = rand_function(r, odo2, 2)
        (dv,) = distributions(h, tower, at_level=4)
        mean = nu_mean(odo2, h)
        assert dv.exact_zero == (mean == 0)
        if mean != 0:
            got = dv.value / float(mean)
            assert got > 0
            if ratio is None:
                ratio = got
            assert abs(got - ratio) < 1e-9 * abs(ratio)


def test_distribution_values_are_linear(fib):
    # the numerators are exact linear functionals at a pinned level
    r = rng(303)
    tower = _tower(fib)
    for _ in range(10):
        h1 = rand_function(r, fib, 2)
        h2 = rand_function(r, fib, 2)
        d1 = distributions(h1, tower, at_level=4)
        d2 = distributions(h2, tower, at_level=4)
        ds = distributions(h1 + h2, tower, at_level=4)
        for a, b, s in zip(d1, d2, ds):
            assert a.numerator + b.numerator == s.numerator


def test_constant_has_only_a_measure_component(fib):
    # the Gram step orthogonalizes the higher distributions against the
    # measure direction, so the constant function pairs to exactly zero
    # beyond the first entry
    tower = _tower(fib)
    one = constant_function(fib, Fraction(1), 0)
    dvs = distributions(one, tower)
    assert dvs[0].value > 0 and not dvs[0].exact_zero
    assert all(dv.exact_zero for dv in dvs[1:])


def test_nonzero_mean_obstructs(fib):
    # unique ergodicity: a coboundary has zero mean, so a nonzero mean must
    # show up in at least one distribution
    r = rng(304)
    tower = _tower(fib)
    seen = 0
    for _ in range(20):
        h = rand_function(r, fib, 2)
        if nu_mean(fib, h) == 0:
            continue
        seen += 1
        dvs = distributions(h, tower)
        assert not all(dv.exact_zero for dv in dvs)
    assert seen >= 10


def test_fib_distributions_are_independent(fib):
    # the two distributions restricted to level-1 indicators have rank 2
    import numpy as np
    tower = _tower(fib)
    cols = []
    for e in range(3):
        vals = {(i,): Fraction(1 if i == e else 0) for i in range(3)}
        dvs = distributions(CylinderFunction(level=1, values=vals), tower)
        assert len(dvs) == 2
        cols.append([dv.value for dv in dvs])
    assert np.linalg.matrix_rank(np.array(cols).T) == 2


def test_coboundary_round_trip_class(odo2, fib):
    r = rng(303)
    for d in (odo2, fib):
        tower = _tower(d)
        for _ in range(10):
            g0 = rand_function(r, d, 2)
            f = compose_phi(d, g0, 1) - lift(d, g0, compose_phi(d, g0, 1).level)
            rep = is_coboundary_class(f, tower)
            assert rep["is_coboundary"] is True
            assert all(dv.exact_zero for dv in rep["distributions"])
            assert rep["certificate"]["level"] >= f.level


def test_constant_obstructed(odo2):
    tower = _tower(odo2)
    one = constant_function(odo2, Fraction(1), 0)
    rep = is_coboundary_class(one, tower)
    assert rep["is_coboundary"] is False
    assert rep["distributions"][0].value == 1.0


def test_rank_sequence_decreasing(fib, pisot31):
    for d in (fib, pisot31):
        t = _tower(d)
        rs = list(t.ranks)
        assert all(rs[i] >= rs[i + 1] for i in range(len(rs) - 1))
        assert rs[-1] == t.d
