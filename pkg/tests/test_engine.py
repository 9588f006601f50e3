"""Engine: universe construction, evolution semantics, equivalences.

The evolution is pinned two ways: frozen hand-derived traces for the
canonical examples, and a straight-line per-pixel reference
implementation (tests/oracles.py) that must agree bit-for-bit with the
production kernel on randomized universes.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import gbpc.engine as engine
from gbpc import _evolve_py
from gbpc.engine import (BND, POS, EngineConfig, build_universe,
                         coarse_equivalent, evolve, fine_equivalent)

from synth import make_pair, random_pair
from oracles import evolve_reference


def evolve_pair(a, b, config=None, **kw):
    return evolve(build_universe(make_pair(a, b)), config, **kw)


def assert_matches_reference(pair, config):
    """Production evolve vs the per-pixel straight-line reference."""
    assignment = evolve(build_universe(pair), config)
    la = pair.a.data.ravel()
    lb = pair.b.data.ravel()
    labels, mus, rs, domains, n_domains = evolve_reference(
        la, lb, config.delta_d, config.k)
    assert np.array_equal(assignment.label_map.ravel(), np.array(labels))
    assert np.array_equal(assignment.mu_map.ravel(), np.array(mus))
    assert np.array_equal(assignment.r_map.ravel(), np.array(rs))
    assert np.array_equal(assignment.domain_map.ravel(), np.array(domains))
    assert assignment.n_domains == n_domains


class TestUniverse:
    def test_dedup_and_inverse(self):
        a = np.array([[10, 10], [10, 20]], dtype=np.uint8)
        b = np.array([[12, 12], [12, 12]], dtype=np.uint8)
        uni = build_universe(make_pair(a, b))
        assert uni.n_balls == 2
        assert uni.n_pixels == 4
        assert list(zip(uni.pair_la.tolist(), uni.pair_lb.tolist())) == [
            (10, 12), (20, 12)]
        assert uni.counts.tolist() == [3, 1]
        assert uni.inverse.tolist() == [[0, 0], [0, 1]]
        assert uni.residual.tolist() == [0, 1]

    def test_meta_balls_coordinates(self):
        a = np.array([[5, 7]], dtype=np.uint8)
        b = np.array([[5, 5]], dtype=np.uint8)
        balls = build_universe(make_pair(a, b)).meta_balls()
        assert [(m.l_a, m.l_b) for m in balls] == [(5, 5), (7, 5)]
        assert balls[0].coords.tolist() == [[0, 0]]
        assert balls[1].coords.tolist() == [[1, 0]]

    def test_counts_cover_all_pixels(self, rng):
        pair = random_pair(rng, 13, 17)
        uni = build_universe(pair)
        assert int(uni.counts.sum()) == 13 * 17


class TestConfig:
    def test_defaults_are_published_operating_point(self):
        config = EngineConfig()
        assert config.delta_d == 10.0 and config.k == 6

    @pytest.mark.parametrize("kwargs", [
        {"delta_d": 0.0}, {"delta_d": -1.0}, {"k": 0}, {"k": 2.5},
    ])
    def test_rejects_bad_parameters(self, kwargs):
        with pytest.raises(ValueError):
            EngineConfig(**kwargs)


class TestWorkedExamples:
    def test_two_ball_hand_trace(self):
        # Universe {(10,12),(10,200)}, k=6, delta_d=10.  Hand derivation:
        # two expansions to r=20, then 200 > 20 + 10 forces a slide whose
        # flush sends (10,12) to BND and (10,200) to POS, both at the
        # scale in force (mu=0, r=20).
        a = np.array([[10, 10]], dtype=np.uint8)
        b = np.array([[12, 200]], dtype=np.uint8)
        asg = evolve_pair(a, b, EngineConfig(), collect_trace=True)
        assert asg.ball_labels.tolist() == [BND, POS]
        assert asg.ball_mu.tolist() == [0.0, 0.0]
        assert asg.ball_r.tolist() == [20.0, 20.0]
        assert asg.ball_domain.tolist() == [0, 1]
        assert asg.n_domains == 2
        assert [(e["event"], e["mu"], e["r"]) for e in asg.trace] == [
            ("expand", 0.0, 10.0),
            ("expand", 0.0, 20.0),
            ("slide", 180.0, 20.0),
        ]

    def test_distant_constant_pair_is_separable(self):
        # A=20, B=230: two slides; the second flushes (20,230) as POS at
        # (mu=20, r=0) because 20 sits exactly on the degenerate ball.
        a = np.full((4, 4), 20, dtype=np.uint8)
        b = np.full((4, 4), 230, dtype=np.uint8)
        asg = evolve_pair(a, b)
        assert asg.ball_labels.tolist() == [POS]
        assert asg.ball_mu.tolist() == [20.0]
        assert asg.ball_r.tolist() == [0.0]
        assert asg.n_domains == 1

    def test_identical_constant_pair_goes_boundary(self):
        # A=B=40, defaults: slide to 40, expand to r=60, split; both
        # elements sit at mu so they fall to the left child (10, 30).
        a = np.full((3, 3), 40, dtype=np.uint8)
        asg = evolve_pair(a, a.copy())
        assert asg.ball_labels.tolist() == [BND]
        assert asg.ball_mu.tolist() == [10.0]
        assert asg.ball_r.tolist() == [30.0]
        assert asg.n_domains == 1

    def test_element_exactly_at_center_goes_left(self):
        # {(30,30)}, k=3, delta_d=10: split fires at r=30 with mu=30;
        # 30 <= mu lands in the left child (15, 15) as BND.
        a = np.array([[30]], dtype=np.uint8)
        asg = evolve_pair(a, a.copy(), EngineConfig(delta_d=10.0, k=3))
        assert asg.ball_labels.tolist() == [BND]
        assert asg.ball_mu.tolist() == [15.0]
        assert asg.ball_r.tolist() == [15.0]

    def test_split_straddler_is_separable_at_parent_scale(self):
        # {(55,65)}, k=3, delta_d=10: slide to 55, expand to r=30 and
        # split with mu=55: 55 left child, 65 right child -> POS at the
        # parent scale (55, 30).
        a = np.array([[55]], dtype=np.uint8)
        b = np.array([[65]], dtype=np.uint8)
        asg = evolve_pair(a, b, EngineConfig(delta_d=10.0, k=3))
        assert asg.ball_labels.tolist() == [POS]
        assert asg.ball_mu.tolist() == [55.0]
        assert asg.ball_r.tolist() == [30.0]

    def test_terminal_flush_near_top_of_axis(self):
        # A single ball near 255 keeps expanding until the right edge
        # passes 255, then the terminal flush labels it BND.
        a = np.array([[250]], dtype=np.uint8)
        asg = evolve_pair(a, a.copy(), collect_trace=True)
        assert asg.ball_labels.tolist() == [BND]
        assert asg.trace[-1]["event"] == "flush"

    def test_trace_schema(self):
        asg = evolve_pair(np.array([[10, 10]], dtype=np.uint8),
                          np.array([[12, 200]], dtype=np.uint8),
                          collect_trace=True)
        for event in asg.trace:
            assert set(event) == {"t", "event", "mu", "r", "bnd", "pos"}
            assert event["event"] in {"slide", "expand", "split", "flush"}
        assert asg.trace == sorted(asg.trace, key=lambda e: e["t"])


class TestReferenceAgreement:
    @pytest.mark.parametrize("seed", range(40))
    def test_random_universes_default_config(self, seed):
        rng = np.random.default_rng(seed)
        h, w = rng.integers(1, 9, 2)
        assert_matches_reference(random_pair(rng, h, w), EngineConfig())

    @pytest.mark.parametrize("delta_d,k", [
        (1.0, 1), (2.5, 2), (5.0, 4), (10.0, 6), (25.0, 3), (70.0, 1),
        (128.0, 2), (300.0, 1),
    ])
    def test_random_universes_config_grid(self, delta_d, k):
        rng = np.random.default_rng(hash((delta_d, k)) % 2 ** 32)
        for _ in range(10):
            h, w = rng.integers(1, 7, 2)
            assert_matches_reference(random_pair(rng, h, w),
                                     EngineConfig(delta_d=delta_d, k=k))

    def test_boundary_values_universe(self):
        # 0 and 255 at both ends plus midrange duplicates.
        a = np.array([[0, 0, 255, 128, 128]], dtype=np.uint8)
        b = np.array([[0, 255, 255, 128, 129]], dtype=np.uint8)
        for k in (1, 2, 6):
            assert_matches_reference(make_pair(a, b),
                                     EngineConfig(delta_d=10.0, k=k))


class TestAssignmentStructure:
    def test_every_pixel_labelled_once(self, rng):
        asg = evolve(build_universe(random_pair(rng, 24, 31)))
        labels = asg.label_map
        assert labels.shape == (24, 31)
        assert np.isin(labels, [BND, POS]).all()
        assert (asg.domain_map >= 0).all()

    def test_domains_are_label_homogeneous_and_dense(self, rng):
        for _ in range(10):
            h, w = rng.integers(2, 20, 2)
            asg = evolve(build_universe(random_pair(rng, h, w)))
            seen = set()
            for dom in range(asg.n_domains):
                members = asg.ball_labels[asg.ball_domain == dom]
                assert members.size > 0
                assert len(set(members.tolist())) == 1
                seen.add(dom)
            assert seen == set(range(asg.n_domains))

    def test_fine_implies_coarse(self, rng):
        pair = random_pair(rng, 10, 10)
        asg = evolve(build_universe(pair))
        coords = [(x, y) for x in range(10) for y in range(10)]
        picks = rng.choice(len(coords), size=(200, 2))
        for i, j in picks:
            p, q = coords[int(i)], coords[int(j)]
            if fine_equivalent(p, q, asg):
                assert coarse_equivalent(p, q, asg)

    def test_pixel_accessors(self):
        a = np.array([[10, 10]], dtype=np.uint8)
        b = np.array([[12, 200]], dtype=np.uint8)
        asg = evolve_pair(a, b)
        assert asg.label_at((0, 0)) == BND
        assert asg.label_at((1, 0)) == POS
        ball = asg.scale_at((0, 0))
        assert (ball.mu, ball.r) == (0.0, 20.0)
        assert ball.interval == (-20.0, 20.0)
        assert asg.domain_at((0, 0)) != asg.domain_at((1, 0))
        with pytest.raises(IndexError):
            asg.label_at((2, 0))

    def test_determinism(self, rng):
        pair = random_pair(rng, 16, 16)
        a = evolve(build_universe(pair))
        b = evolve(build_universe(pair))
        assert np.array_equal(a.ball_labels, b.ball_labels)
        assert np.array_equal(a.ball_mu, b.ball_mu)
        assert np.array_equal(a.ball_domain, b.ball_domain)

    def test_empty_image_rejected(self):
        from gbpc.imaging import LumaPlane
        with pytest.raises(ValueError):
            LumaPlane(np.zeros((0, 0), dtype=np.uint8))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 6), st.integers(1, 6))
def test_property_partition_and_refinement(seed, h, w):
    """Every pixel gets exactly one label; fine refines coarse."""
    rng = np.random.default_rng(seed)
    pair = random_pair(rng, h, w)
    asg = evolve(build_universe(pair))
    assert np.isin(asg.label_map, [BND, POS]).all()
    # Fine partition refines the coarse one: each domain maps into a
    # single label class.
    for dom in range(asg.n_domains):
        labels = asg.ball_labels[asg.ball_domain == dom]
        assert len(set(labels.tolist())) == 1


@pytest.mark.skipif(engine.BACKEND != "compiled",
                    reason="compiled kernel not built")
class TestBackendParity:
    def test_bit_identical_outputs_and_trace(self):
        from gbpc import _evolve_cy
        rng = np.random.default_rng(7)
        for _ in range(60):
            n = int(rng.integers(1, 300))
            la = rng.integers(0, 256, n)
            lb = rng.integers(0, 256, n)
            lo = np.minimum(la, lb).astype(np.float64)
            hi = np.maximum(la, lb).astype(np.float64)
            delta_d = float(rng.choice([0.5, 1.0, 2.5, 10.0, 33.0, 200.0]))
            k = int(rng.integers(1, 9))
            trace_py, trace_cy = [], []
            out_py = _evolve_py.evolve_arrays(lo, hi, delta_d, k, trace_py)
            out_cy = _evolve_cy.evolve_arrays(lo, hi, delta_d, k, trace_cy)
            for lhs, rhs in zip(out_py[:4], out_cy[:4]):
                assert np.array_equal(lhs, rhs)
            assert out_py[4] == out_cy[4]
            assert trace_py == trace_cy
