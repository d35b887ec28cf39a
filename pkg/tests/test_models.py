"""Tests for rectangle samplers, height fields, exit laws, and matching."""

import json
import math
import random

import pytest

from coloredvertex.qcore import QQ
from coloredvertex.models import (
    ExitData,
    exit_law,
    height_field,
    height_field_csv,
    sample_rectangle,
    verify_matching,
)
from coloredvertex.strip import TruncationPolicy

Q = QQ(1, 3)
S = QQ(1, 5)


class TestSampleRectangle:
    def test_z_equal_one_deterministic(self):
        # at z = 1 the staying weights vanish, so every vertex swaps its
        # incoming pair: north = west, east = south
        x = (QQ(1, 2),) * 3
        y = (QQ(1, 2),) * 3
        rng = random.Random(7)
        ens = sample_rectangle("six_vertex", Q, 3, 3, (1, 2, 1), x, y, rng)
        assert ens.check_consistent()
        for (i, j), (south, west, north, east) in ens.cells.items():
            assert north == west and east == south
        # a second seed gives the identical ensemble
        ens2 = sample_rectangle("six_vertex", Q, 3, 3, (1, 2, 1), x, y,
                                random.Random(123))
        assert ens.cells == ens2.cells

    def test_no_colors_empty(self):
        ens = sample_rectangle("six_vertex", Q, 2, 0, (), (), (QQ(1, 2),) * 2,
                               random.Random(0))
        assert ens.n == 0 and ens.cells == {}
        assert ens.exit_data() == ExitData(north=(0, 0), east=())

    def test_single_vertex_frequencies(self):
        # incoming (south, west) = (0, 1); staying probability (1-z)/(1-qz)
        x = (QQ(1, 2),)
        y = (QQ(1, 5),)
        z = y[0] / x[0]
        p_stay = float((1 - z) / (1 - Q * z))
        rng = random.Random(11)
        trials = 10 ** 5
        stays = 0
        for _ in range(trials):
            ens = sample_rectangle("six_vertex", Q, 1, 1, (1,), x, y, rng)
            south, west, north, east = ens.cells[(1, 1)]
            assert (north, east) in ((0, 1), (1, 0))
            stays += east == 1
        sigma4 = 4.0 * math.sqrt(trials * p_stay * (1 - p_stay))
        assert abs(stays - trials * p_stay) <= sigma4

    def test_conservation_fuzz(self):
        rng = random.Random(3)
        for _ in range(1000):
            M = rng.randint(1, 3)
            N = rng.randint(1, 3)
            n = rng.randint(1, 2)
            sigma = tuple(rng.randint(1, n) for _ in range(N))
            x = tuple(QQ(rng.randint(2, 9), 1) for _ in range(N))
            y = tuple(QQ(1, rng.randint(2, 9)) for _ in range(M))
            ens = sample_rectangle("six_vertex", Q, M, N, sigma, x, y, rng)
            assert ens.check_consistent()

    def test_fused_and_qboson_consistent(self):
        # nonnegative sampling regime: x_j / y_i >= 1 with negative row
        # spin squares
        rng = random.Random(5)
        for _ in range(50):
            ens = sample_rectangle(
                "fused", Q, 2, 2, (1, 2), (QQ(3, 2), QQ(2, 1)),
                (QQ(1, 2), QQ(2, 3)), rng,
                t2=(QQ(-1, 4), QQ(-1, 5)), R=(2, 1))
            assert ens.check_consistent()
            ens = sample_rectangle(
                "qboson", Q, 2, 2, (1, 2), (QQ(3, 2), QQ(2, 1)),
                (QQ(1, 2), QQ(2, 3)), rng, t2=(QQ(-1, 4), QQ(-1, 5)))
            assert ens.check_consistent()

    def test_unknown_model(self):
        with pytest.raises(ValueError):
            sample_rectangle("seven_vertex", Q, 1, 1, (1,), (S,), (S,),
                             random.Random(0))


class TestHeightField:
    def test_empty_all_zero(self):
        ens = sample_rectangle("six_vertex", Q, 2, 0, (), (),
                               (QQ(1, 2),) * 2, random.Random(0))
        hf = height_field(ens)
        assert hf.totals == ()

    def test_single_path_ray_counts(self):
        # z = 1 staircase: the path from row 1 turns north at column 1, so
        # only the entrance edge (column 0) crosses the rays at row 1
        x = (QQ(1, 2),)
        y = (QQ(1, 2),) * 3
        ens = sample_rectangle("six_vertex", Q, 3, 1, (1,), x, y,
                               random.Random(0))
        hf = height_field(ens)
        assert hf.h_right(1, 0, 1) == 1
        for i in range(1, 4):
            assert hf.h_right(1, i, 1) == 0

    def test_left_right_split_total(self):
        rng = random.Random(9)
        x = (QQ(2, 1), QQ(3, 1))
        y = (QQ(1, 2), QQ(1, 3))
        for _ in range(20):
            ens = sample_rectangle("six_vertex", Q, 2, 2, (1, 2), x, y, rng)
            hf = height_field(ens)
            for c in (1, 2):
                total = sum(hf.totals[k - 1] for k in range(c, 3))
                for i in range(3):
                    for j in range(3):
                        assert (hf.h_ge_left(c, i, j)
                                + hf.h_ge_right(c, i, j) == total)

    def test_dual_route_counts(self):
        # crossings of the ray at (i + 1/2, j + 1/2) also equal the west
        # entrances at rows <= j minus the north flux through the top edge
        # of the region at columns <= i
        rng = random.Random(13)
        x = (QQ(2, 1), QQ(3, 1), QQ(5, 2))
        y = (QQ(1, 2), QQ(1, 3))
        for _ in range(20):
            ens = sample_rectangle("six_vertex", Q, 2, 3, (1, 2, 1), x, y,
                                   rng)
            hf = height_field(ens)
            for c in (1, 2):
                for i in range(ens.M + 1):
                    for j in range(ens.N + 1):
                        entered = sum(ens.west_entrance(jj) == c
                                      for jj in range(1, j + 1))
                        exited = sum(ens.cells[(k, j)][2] == c
                                     for k in range(1, i + 1)) if j else 0
                        assert hf.h_right(c, i, j) == entered - exited

    def test_csv_export(self):
        ens = sample_rectangle("six_vertex", Q, 1, 1, (1,), (QQ(2, 1),),
                               (QQ(1, 2),), random.Random(0))
        text = height_field_csv(height_field(ens))
        lines = text.strip().splitlines()
        assert lines[0] == "c,i,j,h_right,h_left,h_ge_right,h_ge_left"
        assert len(lines) == 1 + 1 * 2 * 2


class TestExitLaw:
    def test_single_vertex_probabilities(self):
        x = (QQ(1, 2),)
        y = (QQ(1, 5),)
        z = y[0] / x[0]
        law = exit_law("six_vertex", Q, 1, 1, (1,), x, y)
        assert law[((0,), (1,))] == (1 - z) / (1 - Q * z)
        assert law[((1,), (0,))] == z * (1 - Q) / (1 - Q * z)
        assert sum(law.values()) == 1

    def test_z_one_deterministic_exit(self):
        law = exit_law("six_vertex", Q, 2, 2, (1, 2), (S, S), (S, S))
        assert len(law) == 1
        assert sum(law.values()) == 1

    def test_no_colors_trivial(self):
        law = exit_law("six_vertex", Q, 2, 0, (), (), (S, S))
        assert law == {((0, 0), ()): 1}

    def test_mass_one_all_models(self):
        assert sum(exit_law("six_vertex", Q, 2, 2, (1, 2),
                            (QQ(1, 2), QQ(2, 3)), (S, QQ(1, 7))).values()) == 1
        assert sum(exit_law("fused", Q, 1, 2, (1, 2),
                            (QQ(1, 2), QQ(2, 3)), (S,),
                            t2=(QQ(1, 4),), R=(2, 1)).values()) == 1
        assert sum(exit_law("qboson", Q, 1, 2, (1, 2),
                            (QQ(3, 2), QQ(2, 1)), (QQ(1, 2),),
                            t2=(QQ(-1, 4),)).values()) == 1

    def test_state_cap_refusal(self):
        with pytest.raises(ValueError, match="state count"):
            exit_law("six_vertex", Q, 2, 2, (1, 2),
                     (QQ(1, 2), QQ(2, 3)), (S, S), state_cap=3)


class TestMatching:
    def test_one_one_one_exact(self):
        rep = verify_matching(Q, 1, 1, 1, (1,), (QQ(1, 2),), (S,), S)
        assert rep.ok and rep.difference == 0.0

    def test_one_two_two_exact(self):
        rep = verify_matching(Q, 1, 2, 2, (1, 1), (QQ(1, 2), QQ(2, 3)),
                              (S, S), S)
        assert rep.ok and rep.difference == 0.0

    def test_two_one_two_exact(self):
        rep = verify_matching(Q, 2, 1, 2, (1, 2), (QQ(1, 2), QQ(2, 3)),
                              (S,), S)
        assert rep.ok and rep.difference == 0.0

    def test_two_two_two_exact(self):
        rep = verify_matching(Q, 2, 2, 2, (1, 2), (QQ(1, 2), QQ(2, 3)),
                              (S, S), S)
        assert rep.ok and rep.difference == 0.0

    def test_distinct_column_rapidities_float(self):
        rep = verify_matching(Q, 1, 2, 1, (1,), (QQ(1, 2),),
                              (S, QQ(1, 7)), S)
        assert rep.ok
        assert rep.difference < 1e-6

    def test_fused_exact(self):
        rep = verify_matching(Q, 2, 1, 2, (1, 2), (QQ(1, 2), QQ(2, 3)),
                              (S,), S, R=(2, 1), t2=(QQ(1, 4),))
        assert rep.ok and rep.difference == 0.0

    def test_fused_distinct_row_spins_exact(self):
        rep = verify_matching(Q, 2, 2, 2, (1, 2), (QQ(1, 2), QQ(2, 3)),
                              (S, S), S, R=(2, 1),
                              t2=(QQ(1, 4), QQ(1, 5)))
        assert rep.ok and rep.difference == 0.0

    def test_s_independence(self):
        rep = verify_matching(Q, 2, 1, 2, (1, 2), (QQ(1, 2), QQ(2, 3)),
                              (S,), S, s_alt=QQ(1, 7),
                              trunc=TruncationPolicy(tol=1e-6))
        assert rep.ok
        assert "s-independence" in rep.detail


class TestSerialization:
    def test_json_roundtrip(self):
        ens = sample_rectangle("fused", Q, 2, 2, (1, 2),
                               (QQ(3, 2), QQ(2, 1)), (QQ(1, 2), QQ(2, 3)),
                               random.Random(1), t2=(QQ(-1, 4), QQ(-1, 5)),
                               R=(2, 1))
        blob = json.dumps(ens.to_jsonable())
        data = json.loads(blob)
        assert data["M"] == 2 and data["N"] == 2 and data["R"] == [2, 1]
        assert len(data["cells"]) == 4
