import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from glyphs import draw_path, ideal_eight, ideal_one, ideal_six, ideal_x, ideal_zero
from numeral_hmm.errors import EmptySkeleton, NotAdjacent, NotForeground
from numeral_hmm.features import (
    DIRECTIONS,
    ENDMARK,
    JUNCTMARK,
    N_SYMBOLS,
    build_graph,
    chain_code,
    characteristic_points,
    collapse_runs,
    loop_count,
    observation_sequence,
    render,
    summarize,
    transition_count,
)
from numeral_hmm.imageproc import thin

# clockwise from north, as (dr, dc)
RING = [(-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1)]


def oracle_transitions(patch):
    """Count background-to-ink steps walking once round the 3x3 border."""
    seq = [bool(patch[1 + dr, 1 + dc]) for dr, dc in RING]
    return sum(1 for a, b in zip(seq, seq[1:] + seq[:1]) if not a and b)


def patch_from_code(code):
    patch = np.zeros((3, 3), bool)
    patch[1, 1] = True
    for bit, (dr, dc) in enumerate(RING):
        if code >> bit & 1:
            patch[1 + dr, 1 + dc] = True
    return patch


class TestTransitionCount:
    def test_all_256_neighbourhoods(self):
        for code in range(256):
            patch = patch_from_code(code)
            assert transition_count(patch, (1, 1)) == oracle_transitions(patch), code

    def test_line_end(self):
        img = np.zeros((5, 5), bool)
        img[2, 2:4] = True
        assert transition_count(img, (2, 2)) == 1

    def test_line_interior(self):
        img = np.zeros((5, 5), bool)
        img[2, 1:4] = True
        assert transition_count(img, (2, 2)) == 2

    def test_y_centre(self):
        img = np.zeros((5, 5), bool)
        img[2, 2] = img[1, 1] = img[1, 3] = img[3, 2] = True
        assert transition_count(img, (2, 2)) == 3

    def test_border_pixel_sees_background_outside(self):
        img = np.zeros((3, 3), bool)
        img[0, 0] = img[0, 1] = True
        assert transition_count(img, (0, 0)) == 1

    def test_background_pixel_rejected(self):
        with pytest.raises(NotForeground):
            transition_count(np.zeros((3, 3), bool), (1, 1))

    def test_ten_thousand_random_neighbourhoods(self):
        rng = np.random.default_rng(8)
        for patch in rng.random((10_000, 3, 3)) < 0.5:
            patch[1, 1] = True
            assert transition_count(patch, (1, 1)) == oracle_transitions(patch)

    @settings(max_examples=300)
    @given(arrays(np.bool_, (3, 3)))
    def test_matches_oracle_random(self, patch):
        patch[1, 1] = True
        assert transition_count(patch, (1, 1)) == oracle_transitions(patch)


class TestCharacteristicPoints:
    def test_one(self):
        cp = characteristic_points(ideal_one())
        assert cp.endpoints == {(2, 11), (21, 11)} and not cp.junctions

    def test_six(self):
        cp = characteristic_points(ideal_six())
        assert len(cp.endpoints) == 1 and len(cp.junctions) == 1

    def test_zero(self):
        cp = characteristic_points(ideal_zero())
        assert not cp.endpoints and not cp.junctions

    def test_blank(self):
        cp = characteristic_points(np.zeros((4, 4), bool))
        assert not cp.endpoints and not cp.junctions

    @given(arrays(np.bool_, st.tuples(st.integers(1, 10), st.integers(1, 10))))
    def test_partition_by_transition_count(self, img):
        cp = characteristic_points(img)
        assert not cp.endpoints & cp.junctions
        for r, c in zip(*np.nonzero(img)):
            t = transition_count(img, (r, c))
            assert ((r, c) in cp.endpoints) == (t == 1)
            assert ((r, c) in cp.junctions) == (t >= 3)


class TestLoops:
    def test_zero(self):
        assert loop_count(ideal_zero()) == 1

    def test_one(self):
        assert loop_count(ideal_one()) == 0

    def test_eight(self):
        assert loop_count(ideal_eight()) == 2

    def test_summaries(self):
        assert str(summarize(ideal_six())) == "endpoints=1 junctions=1 loops=1"
        assert str(summarize(ideal_zero())) == "endpoints=0 junctions=0 loops=1"
        assert str(summarize(ideal_one())) == "endpoints=2 junctions=0 loops=0"
        assert str(summarize(ideal_x())) == "endpoints=4 junctions=1 loops=0"


class TestGraph:
    def test_zero(self):
        g = build_graph(ideal_zero())
        assert [n.kind for n in g.nodes] == ["anchor"]
        assert len(g.edges) == 1
        edge = g.edges[0]
        assert edge.u == edge.v == 0
        assert edge.path[0] == edge.path[-1]
        assert set(edge.path) == set(zip(*np.nonzero(ideal_zero())))

    def test_six(self):
        g = build_graph(ideal_six())
        assert sorted(n.kind for n in g.nodes) == ["end", "junction"]
        kinds = {n.id: n.kind for n in g.nodes}
        shapes = sorted(tuple(sorted((kinds[e.u], kinds[e.v]))) for e in g.edges)
        assert shapes == [("end", "junction"), ("junction", "junction")]

    def test_one(self):
        g = build_graph(ideal_one())
        assert [n.kind for n in g.nodes] == ["end", "end"]
        assert len(g.edges) == 1 and len(g.edges[0].path) == 20

    @settings(max_examples=100, deadline=None)
    @given(arrays(np.bool_, st.tuples(st.integers(3, 12), st.integers(3, 12))))
    def test_edges_cover_skeleton(self, img):
        skel = thin(img)
        g = build_graph(skel)
        covered = {p for e in g.edges for p in e.path} | {n.pixel for n in g.nodes}
        covered |= {p for n in g.nodes for p in n.members}
        assert covered == set(zip(*np.nonzero(skel)))
        for e in g.edges:
            chain_code(e.path)  # every step is a unit move


class TestChainCode:
    def test_east(self):
        assert chain_code([(0, 0), (0, 1), (0, 2)]) == [0, 0]

    def test_north_east(self):
        assert chain_code([(2, 0), (1, 1), (0, 2)]) == [1, 1]

    def test_south(self):
        assert chain_code([(0, 0), (1, 0)]) == [6]

    def test_all_directions(self):
        for code, (dr, dc) in enumerate(DIRECTIONS):
            assert chain_code([(5, 5), (5 + dr, 5 + dc)]) == [code]
        # counter-clockwise from east with rows growing downward
        assert DIRECTIONS[2] == (-1, 0) and DIRECTIONS[4] == (0, -1)

    def test_not_adjacent(self):
        with pytest.raises(NotAdjacent):
            chain_code([(0, 0), (0, 2)])
        with pytest.raises(NotAdjacent):
            chain_code([(0, 0), (0, 0)])

    @given(st.lists(st.integers(0, 7), max_size=30), st.integers(-5, 5), st.integers(-5, 5))
    def test_round_trip(self, codes, r0, c0):
        path = [(r0, c0)]
        for k in codes:
            dr, dc = DIRECTIONS[k]
            path.append((path[-1][0] + dr, path[-1][1] + dc))
        assert chain_code(path) == codes


class TestObservationSequence:
    def test_eastward_line(self):
        img = np.zeros((5, 9), bool)
        img[2, 2:7] = True
        assert observation_sequence(img) == [0, 0, 0, 0, ENDMARK]

    def test_blank(self):
        with pytest.raises(EmptySkeleton):
            observation_sequence(np.zeros((5, 5), bool))

    def test_single_pixel(self):
        img = np.zeros((5, 5), bool)
        img[2, 2] = True
        with pytest.raises(EmptySkeleton):
            observation_sequence(img)

    def test_zero_loop(self):
        img = ideal_zero()
        seq = observation_sequence(img)
        assert len(seq) == img.sum()  # perimeter steps back to the anchor
        assert all(s < 8 for s in seq)

    def test_one(self):
        assert observation_sequence(ideal_one()) == [6] * 19 + [ENDMARK]

    def test_six_markers(self):
        seq = observation_sequence(ideal_six())
        assert seq[:9] == [6] * 8 + [JUNCTMARK]
        assert seq[-1] == JUNCTMARK
        assert seq.count(JUNCTMARK) == 2 and ENDMARK not in seq

    def test_collapse(self):
        assert collapse_runs([6, 6, 6, 9, 0, 0, 8]) == [6, 9, 0, 8]
        assert collapse_runs([9, 9, 8, 8]) == [9, 9, 8, 8]
        assert observation_sequence(ideal_one(), collapse=True) == [6, ENDMARK]

    def test_deterministic_under_copy(self):
        img = ideal_eight()
        assert observation_sequence(img) == observation_sequence(img.copy())

    @settings(max_examples=100, deadline=None)
    @given(arrays(np.bool_, st.tuples(st.integers(3, 12), st.integers(3, 12))))
    def test_symbols_in_range(self, img):
        skel = thin(img)
        try:
            seq = observation_sequence(skel)
        except EmptySkeleton:
            return
        assert seq and all(0 <= s < N_SYMBOLS for s in seq)

    def test_every_two_pixel_skeleton(self):
        for dr, dc in DIRECTIONS:
            img = np.zeros((3, 3), bool)
            img[1, 1] = img[1 + dr, 1 + dc] = True
            seq = observation_sequence(img)
            assert seq[-1] == ENDMARK and len(seq) == 2


def test_render_marks():
    img = draw_path(np.zeros((3, 5), bool), [(1, 0), (1, 4)])
    text = render(img, characteristic_points(img))
    assert text.splitlines() == [".....", "E###E", "....."]


def test_exhaustive_small_skeletons_traverse():
    # every 3x3 ink pattern with at least two pixels yields a valid sequence
    for bits in itertools.product([False, True], repeat=9):
        img = np.array(bits).reshape(3, 3)
        if img.sum() < 2:
            continue
        try:
            seq = observation_sequence(img)
        except EmptySkeleton:
            continue
        assert all(0 <= s < N_SYMBOLS for s in seq)
