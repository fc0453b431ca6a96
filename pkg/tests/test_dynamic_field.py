"""Trace field: recording, stochastic decay, diffusion."""

from __future__ import annotations

import math

import numpy as np
from scipy import stats

from evacsim.dynamic_field import DynamicField
from evacsim.scenario import EXIT, FLOOR, WALL, Grid


def open_grid(side: int) -> Grid:
    kind = np.full((side, side), FLOOR, dtype=np.int8)
    kind[0, 0] = EXIT
    return Grid.from_kind(kind)


def walled_grid(side: int) -> Grid:
    kind = np.full((side, side), FLOOR, dtype=np.int8)
    kind[0, :] = kind[-1, :] = WALL
    kind[:, 0] = kind[:, -1] = WALL
    kind[0, 1] = EXIT
    return Grid.from_kind(kind)


def test_record_single_move():
    f = DynamicField(open_grid(6))
    f.record_moves([((2, 2), (4, 3))])
    assert f.field_at((2, 2)) == (2, 1)
    assert f.field_at((4, 3)) == (0, 0)


def test_record_crossing_moves_are_additive():
    f = DynamicField(open_grid(6))
    f.record_moves([((1, 1), (2, 1)), ((3, 1), (2, 1))])
    assert f.field_at((1, 1)) == (1, 0)
    assert f.field_at((3, 1)) == (-1, 0)
    assert f.field_at((2, 1)) == (0, 0)


def test_record_empty_moves_is_noop():
    f = DynamicField(open_grid(4))
    f.record_moves([])
    assert f.dx.sum() == 0 and f.dy.sum() == 0


def test_fresh_field_reads_zero():
    f = DynamicField(open_grid(4))
    assert f.field_at((2, 2)) == (0, 0)


def test_full_decay_clears_field():
    f = DynamicField(open_grid(8))
    f.record_moves([((2, 2), (5, 4)), ((4, 4), (1, 3))])
    f.decay_and_diffuse(1.0, 0.5, np.random.default_rng(0))
    assert not f.dx.any() and not f.dy.any()


def test_no_decay_no_diffusion_is_identity():
    f = DynamicField(open_grid(8))
    f.record_moves([((2, 2), (5, 4)), ((4, 4), (1, 3))])
    dx0, dy0 = f.dx.copy(), f.dy.copy()
    for i in range(10):
        f.decay_and_diffuse(0.0, 0.0, np.random.default_rng(i))
    assert np.array_equal(f.dx, dx0) and np.array_equal(f.dy, dy0)


def test_diffusion_conserves_signed_sums_away_from_walls():
    g = open_grid(101)
    f = DynamicField(g)
    f.record_moves([((50, 50), (53, 48))] * 111)  # dx=+333, dy=-222
    for i in range(40):  # quanta travel at most 40 cells, walls are 50 away
        f.decay_and_diffuse(0.0, 0.7, np.random.default_rng(i))
    assert int(f.dx.sum()) == 333
    assert int(f.dy.sum()) == -222


def test_diffusion_moves_quanta_at_most_one_step():
    g = open_grid(15)
    f = DynamicField(g)
    f.record_moves([((7, 7), (8, 7))] * 500)
    f.decay_and_diffuse(0.0, 1.0, np.random.default_rng(3))
    nonzero = {tuple(p) for p in np.argwhere(f.dx != 0)}
    allowed = {(7, 7), (6, 7), (8, 7), (7, 6), (7, 8)}  # (y, x) von Neumann star
    assert nonzero <= allowed


def test_component_separation():
    f = DynamicField(open_grid(21))
    f.record_moves([((10, 10), (13, 10))] * 300)  # pure x-trace
    for i in range(8):
        f.decay_and_diffuse(0.1, 0.6, np.random.default_rng(i))
    assert not f.dy.any()


def test_sign_preserved_under_diffusion():
    f = DynamicField(open_grid(31))
    f.record_moves([((15, 15), (12, 15))] * 400)  # dx = -1200
    for i in range(5):
        f.decay_and_diffuse(0.0, 0.5, np.random.default_rng(i))
    assert (f.dx <= 0).all()
    assert int(f.dx.sum()) == -1200


def test_walls_absorb_all_quanta_when_fully_enclosed():
    kind = np.full((3, 3), WALL, dtype=np.int8)
    kind[1, 1] = FLOOR
    g = Grid.from_kind(kind)
    f = DynamicField(g)
    f.record_moves([((1, 1), (1, 0))] * 50)
    assert f.field_at((1, 1)) == (0, -50)
    f.decay_and_diffuse(0.0, 1.0, np.random.default_rng(0))
    assert not f.dx.any() and not f.dy.any()


def test_wall_cells_stay_zero():
    g = walled_grid(8)
    f = DynamicField(g)
    f.record_moves([((1, 1), (3, 2))] * 200)
    for i in range(20):
        f.decay_and_diffuse(0.05, 0.9, np.random.default_rng(i))
        wall_mask = g.kind == WALL
        assert not f.dx[wall_mask].any() and not f.dy[wall_mask].any()


def test_decay_is_binomial():
    n = 10_000
    pvals = []
    for trial in range(10):
        f = DynamicField(open_grid(9))
        f.record_moves([((4, 4), (5, 4))] * n)
        f.decay_and_diffuse(0.5, 0.0, np.random.default_rng(trial))
        survivors = int(f.dx[4, 4])
        res = stats.binomtest(survivors, n, 0.5)
        pvals.append(res.pvalue)
        assert res.pvalue >= 1e-6, (trial, survivors)
    # p-values should not all be tiny either
    assert max(pvals) > 1e-3


def test_mean_survival_matches_expectation_within_5_sigma():
    n, delta, trials = 2_000, 0.3, 60
    total = 0
    for trial in range(trials):
        f = DynamicField(open_grid(9))
        f.record_moves([((4, 4), (5, 4))] * n)
        f.decay_and_diffuse(delta, 0.0, np.random.default_rng(1000 + trial))
        total += int(f.dx[4, 4])
    mean = total / trials
    sigma = math.sqrt(n * delta * (1 - delta) / trials)
    assert abs(mean - n * (1 - delta)) <= 5 * sigma


def test_pgm_pair_shapes():
    f = DynamicField(open_grid(5))
    f.record_moves([((2, 2), (4, 3))])
    for text in f.to_pgm_pair():
        lines = text.strip().splitlines()
        assert lines[0] == "P2"
        assert lines[1] == "5 5"
