"""Tests for colored line ensembles, window laws, and their verifiers."""

import json
import random

import pytest

from coloredvertex.qcore import QQ, NComposition
from coloredvertex.kernels import weight_L
from coloredvertex.ensembles import (
    ColoredLineEnsemble,
    WindowSpec,
    check_merge_ensembles,
    compatible_ensembles,
    configs_from_ensemble,
    ensemble_from_sequence,
    ensemble_svg,
    gibbs_conditional_law,
    q0_constraint_violations,
    verify_gibbs,
    verify_top_curves,
)
from coloredvertex.strip import TruncationPolicy, measure_fG

Q = QQ(1, 3)
S = QQ(1, 5)


def NC(*blocks):
    return NComposition(tuple(tuple(b) for b in blocks))


# two-color sequence on [0, 7] with totals (2, 2); curve 1 of color 1
# takes the value 2 at abscissa 4
SEQ = (
    NC((), ()),
    NC((2,), ()),
    NC((0,), (3,)),
    NC((0,), (3, 1)),
    NC((3, 0), (3, 0)),
    NC((2, 0), (3, 0)),
    NC((0, 0), (2, 0)),
    NC((0, 0), (0, 0)),
)

# vector-valued counterpart with totals (5, 3); its depth-one curves are
# pinned below
SEQ_FUSED = (
    NC((), ()),
    NC((2, 2, 0), ()),
    NC((2, 0, 0), (3,)),
    NC((2, 0, 0), (4, 1, 0)),
    NC((5, 3, 0, 0, 0), (3, 0, 0)),
    NC((2, 1, 0, 0, 0), (3, 0, 0)),
    NC((1, 0, 0, 0, 0), (1, 0, 0)),
    NC((0,) * 5, (0,) * 3),
)


def small_measure(q=Q, n=2, M=1, N=2, sigma=(1, 2),
                  x=(QQ(1, 2), QQ(2, 3)), y=(S,), s=S, **kw):
    return measure_fG(q, n, M, N, sigma, x, y, s, **kw)


class TestEnsembleFromSequence:
    def test_simple_example_values(self):
        ens = ensemble_from_sequence(SEQ)
        assert ens.L(1, 1, 4) == 2
        assert ens.simple and ens.check_valid()
        assert ens.L(1, 1, 0) == 4 and ens.L(2, 1, 0) == 2
        assert ens.L(1, 1, 7) == 0

    def test_vector_example_curves(self):
        ens = ensemble_from_sequence(SEQ_FUSED)
        assert tuple(ens.L(2, 1, i) for i in range(8)) == (
            3, 3, 3, 2, 1, 1, 1, 0)
        assert tuple(ens.L(1, 1, i) for i in range(8)) == (
            8, 7, 6, 5, 3, 3, 2, 0)
        assert ens.check_valid() and not ens.simple

    def test_empty_sequence(self):
        ens = ensemble_from_sequence((NC(()),))
        assert ens.length == 0 and ens.L(1, 1, 0) == 0
        assert ens.simple and ens.check_valid()

    def test_non_ascending_rejected(self):
        with pytest.raises(ValueError, match="not ascending"):
            ensemble_from_sequence((NC(()), NC((0,)), NC((1,))))

    def test_gap_multiplicity_identity(self):
        # the gap between consecutive-depth curves of color c equals the
        # part multiplicity of that color
        for seq, _ in small_measure().atoms:
            ens = ensemble_from_sequence(seq)
            for i, mu in enumerate(seq):
                for c in range(1, ens.n + 1):
                    for k in range(1, ens.k_depth + 2):
                        gap = (ens.Lambda(c, k, i)
                               - ens.Lambda(c, k + 1, i))
                        assert gap == mu.m(k, c)

    def test_saturation_beyond_depth(self):
        ens = ensemble_from_sequence(SEQ)
        deep = ens.k_depth + 5
        assert ens.L(1, deep, 3) == ens.L(1, ens.k_depth, 3)


class TestConfigsFromEnsemble:
    def test_incoming_outgoing_oracle(self):
        # vertical labels are the column multiplicity vectors of the
        # neighboring compositions; colors conserve per channel
        for seq, _ in small_measure().atoms:
            ens = ensemble_from_sequence(seq)
            for k in range(1, ens.k_depth + 2):
                for i in range(1, ens.length + 1):
                    A, b, C, d = configs_from_ensemble(ens, (-k, i))
                    assert A == seq[i - 1].column_vector(k)
                    assert C == seq[i].column_vector(k)
                    for c in range(1, ens.n + 1):
                        assert (A[c - 1] + (b == c)
                                == C[c - 1] + (d == c))

    def test_vector_conservation(self):
        ens = ensemble_from_sequence(SEQ_FUSED)
        for k in range(1, ens.k_depth + 2):
            for i in range(1, ens.length + 1):
                A, B, C, D = configs_from_ensemble(ens, (-k, i), fused=True)
                assert tuple(a + b for a, b in zip(A, B)) == tuple(
                    c + d for c, d in zip(C, D))
                seq = SEQ_FUSED
                assert A == seq[i - 1].column_vector(k)
                assert C == seq[i].column_vector(k)

    def test_single_arrow_needs_simple(self):
        ens = ensemble_from_sequence(SEQ_FUSED)
        with pytest.raises(ValueError, match="simple"):
            configs_from_ensemble(ens, (-1, 4))

    def test_outside_domain(self):
        ens = ensemble_from_sequence(SEQ)
        with pytest.raises(ValueError):
            configs_from_ensemble(ens, (-1, 0))
        with pytest.raises(ValueError):
            configs_from_ensemble(ens, (0, 1))


class TestWindows:
    def test_window_validation(self):
        with pytest.raises(ValueError):
            WindowSpec(2, 1, 1, 1)
        with pytest.raises(ValueError):
            WindowSpec(1, 1, 3, 2)
        with pytest.raises(ValueError):
            WindowSpec(0, 1, 1, 1)

    def test_constant_ensemble_single_candidate(self):
        ens = ColoredLineEnsemble(1, 4, (((0,) * 5,),))
        found = compatible_ensembles(ens, WindowSpec(1, 2, 1, 3))
        assert found == [ens]

    def test_candidates_agree_off_window(self):
        ens = ensemble_from_sequence(SEQ)
        window = WindowSpec(1, 1, 3, 4)
        found = compatible_ensembles(ens, window, simple=True)
        assert ens in found and len(found) > 1
        for cand in found:
            for c in range(1, 3):
                for k in range(1, ens.k_depth + 2):
                    for i in range(ens.length + 1):
                        if not window.contains(k, i):
                            assert cand.L(c, k, i) == ens.L(c, k, i)

    def test_window_outside_interval(self):
        ens = ensemble_from_sequence(SEQ)
        with pytest.raises(ValueError):
            compatible_ensembles(ens, WindowSpec(1, 1, 6, 7))


class TestGibbsLaws:
    def test_generic_mass_exactly_one(self):
        ens = ensemble_from_sequence(small_measure().atoms[0][0])
        law = gibbs_conditional_law(
            ens, WindowSpec(1, 1, 1, 1), "generic",
            {"q": Q, "s": S, "x": (QQ(1, 2), QQ(2, 3)), "y": (S,)})
        assert sum(law.values()) == 1
        assert all(p > 0 for p in law.values())

    def test_generic_matches_bayes_exactly(self):
        rep = verify_gibbs(Q, 1, 1, 2, (1, 1), (QQ(1, 2), QQ(2, 3)),
                           (S,), S, WindowSpec(1, 1, 1, 1))
        assert rep.ok and rep.difference == 0.0
        rep = verify_gibbs(Q, 2, 1, 2, (1, 2), (QQ(1, 2), QQ(2, 3)),
                           (S,), S, WindowSpec(1, 1, 1, 1))
        assert rep.ok and rep.difference == 0.0

    def test_generic_two_cell_window(self):
        rep = verify_gibbs(Q, 2, 1, 2, (1, 2), (QQ(1, 2), QQ(2, 3)),
                           (S,), S, WindowSpec(1, 2, 1, 2))
        assert rep.ok and rep.difference == 0.0

    def test_fused_matches_bayes_exactly(self):
        rep = verify_gibbs(Q, 2, 1, 2, (1, 2), (QQ(1, 2), QQ(2, 3)),
                           (S,), S, WindowSpec(1, 1, 1, 1),
                           variant="fused", R=(2, 1), t2=(QQ(1, 4),))
        assert rep.ok and rep.difference == 0.0

    def test_n1_matches_bayes(self):
        trunc = TruncationPolicy(part_cutoff=12, certify=False)
        rep = verify_gibbs(Q, 1, 2, 2, (1, 1), (QQ(1, 3), QQ(1, 3)),
                           (QQ(1, 2), QQ(1, 2)), QQ(0),
                           WindowSpec(1, 2, 1, 2), variant="n1",
                           trunc=trunc)
        assert rep.ok
        assert rep.difference < 1e-12

    def test_n1_requires_s_zero(self):
        with pytest.raises(ValueError, match="s = 0"):
            verify_gibbs(Q, 1, 1, 1, (1,), (QQ(1, 2),), (S,), S,
                         WindowSpec(1, 1, 1, 1), variant="n1")

    def test_n1_depends_only_on_ratio(self):
        # scaling x and y by a common factor leaves the law unchanged
        trunc = TruncationPolicy(part_cutoff=10, certify=False)
        m = measure_fG(Q, 1, 2, 2, (1, 1), (QQ(1, 3), QQ(1, 3)),
                       (QQ(1, 2), QQ(1, 2)), QQ(0), trunc)
        ens = ensemble_from_sequence(m.atoms[4][0])
        for window in (WindowSpec(1, 1, 1, 1), WindowSpec(2, 2, 3, 3)):
            laws = [gibbs_conditional_law(
                        ens, window, "n1",
                        {"q": Q, "x": scale * QQ(1, 3),
                         "y": scale * QQ(1, 2), "N": 2})
                    for scale in (QQ(1), QQ(7, 2))]
            assert laws[0] == laws[1]

    def test_q0_uniform_and_matches_generic(self):
        # at q = 0 and s = 0 the conditional law is uniform and the
        # generic weights reproduce it atom for atom
        trunc = TruncationPolicy(part_cutoff=12, certify=False)
        m = measure_fG(QQ(0), 2, 2, 1, (2,), (QQ(1, 3),),
                       (QQ(1, 2), QQ(1, 2)), QQ(0), trunc)
        ens = ensemble_from_sequence(m.atoms[3][0])
        window = WindowSpec(1, 1, 2, 2)
        uniform = gibbs_conditional_law(ens, window, "q0", {"N": 1})
        assert len(set(uniform.values())) == 1
        assert sum(uniform.values()) == 1
        generic = gibbs_conditional_law(
            ens, window, "generic",
            {"q": QQ(0), "s": QQ(0), "x": (QQ(1, 3),),
             "y": (QQ(1, 2), QQ(1, 2))})
        assert generic == uniform

    def test_q0_matches_bayes(self):
        trunc = TruncationPolicy(part_cutoff=12, certify=False)
        rep = verify_gibbs(QQ(0), 2, 2, 1, (2,), (QQ(1, 3),),
                           (QQ(1, 2), QQ(1, 2)), QQ(0),
                           WindowSpec(1, 1, 2, 2), variant="q0",
                           trunc=trunc)
        assert rep.ok
        assert rep.difference < 1e-12

    def test_q0_preconditions(self):
        ens = ensemble_from_sequence(SEQ)
        with pytest.raises(ValueError, match="N cut"):
            gibbs_conditional_law(ens, WindowSpec(1, 1, 3, 5), "q0",
                                  {"N": 4})
        trunc = TruncationPolicy(part_cutoff=8, certify=False)
        with pytest.raises(ValueError, match="one rapidity"):
            verify_gibbs(QQ(0), 1, 2, 1, (1,), (QQ(1, 3),),
                         (QQ(1, 2), QQ(2, 5)), QQ(0),
                         WindowSpec(1, 1, 2, 2), variant="q0",
                         trunc=trunc)

    def test_qboson_mass_and_cut(self):
        m = measure_fG(Q, 2, 2, 2, (1, 2), (QQ(3, 2), QQ(2, 1)),
                       (S, S), S)
        ens = ensemble_from_sequence(m.atoms[2][0])
        law = gibbs_conditional_law(
            ens, WindowSpec(1, 1, 3, 3), "qboson",
            {"q": Q, "nu": (QQ(1, 4), QQ(1, 5))})
        assert sum(law.values()) == 1
        assert all(p > 0 for p in law.values())
        with pytest.raises(ValueError, match="N cut"):
            gibbs_conditional_law(ens, WindowSpec(1, 1, 1, 1), "qboson",
                                  {"q": Q, "nu": (QQ(1, 4), QQ(1, 5))})

    def test_qboson_is_small_s_limit(self):
        # the vector law at x = y = s, r^2 = 1/q, t^2 = -nu approaches
        # the q-boson law as s shrinks
        m = measure_fG(Q, 2, 2, 2, (1, 2), (QQ(3, 2), QQ(2, 1)),
                       (S, S), S)
        ens = ensemble_from_sequence(m.atoms[2][0])
        window = WindowSpec(1, 1, 3, 3)
        nu = (QQ(1, 4), QQ(1, 5))
        target = gibbs_conditional_law(ens, window, "qboson",
                                       {"q": Q, "nu": nu})
        gaps = []
        for s in (QQ(1, 10), QQ(1, 100)):
            law = gibbs_conditional_law(
                ens, window, "fused",
                {"q": Q, "s": s, "x": (s, s), "y": (s, s),
                 "r2": (1 / Q, 1 / Q), "t2": tuple(-v for v in nu)})
            gaps.append(max(abs(float(target.get(k, 0) - law.get(k, 0)))
                            for k in set(target) | set(law)))
        assert gaps[1] < gaps[0] / 50
        assert gaps[1] < 1e-3

    def test_unknown_variant(self):
        ens = ensemble_from_sequence(SEQ)
        with pytest.raises(ValueError, match="variant"):
            gibbs_conditional_law(ens, WindowSpec(1, 1, 1, 1),
                                  "mystery", {})


class TestZeroQInvariants:
    def test_parallel_step_holds_on_support(self):
        # every atom of the q = 0, s = 0 measure satisfies the
        # parallel-step constraint at every site, inhomogeneities included
        trunc = TruncationPolicy(part_cutoff=10, certify=False)
        m = measure_fG(QQ(0), 2, 2, 2, (1, 2), (QQ(1, 3), QQ(1, 4)),
                       (QQ(1, 2), QQ(2, 5)), QQ(0), trunc)
        assert len(m.atoms) > 100
        for seq, p in m.atoms:
            if p == 0:
                continue
            assert q0_constraint_violations(
                ensemble_from_sequence(seq)) == []

    def test_vertex_weight_is_constraint_indicator(self):
        # the single-arrow weight at q = 0, s = 0, x = 1 is 1 or 0
        # according to the per-site constraint
        trunc = TruncationPolicy(part_cutoff=8, certify=False)
        m = measure_fG(QQ(0), 2, 1, 2, (1, 2), (QQ(1, 3), QQ(1, 4)),
                       (QQ(1, 2),), QQ(0), trunc)
        for seq, _ in m.atoms[:40]:
            ens = ensemble_from_sequence(seq)
            for k in range(1, ens.k_depth + 2):
                for i in range(1, ens.length + 1):
                    A, b, C, d = configs_from_ensemble(ens, (-k, i))
                    w = weight_L(QQ(0), QQ(1), QQ(0), A, b, C, d)
                    violated = q0_constraint_violations(ens, [k], [i])
                    assert w == (0 if violated else 1)


class TestTopCurves:
    def test_six_vertex_exact(self):
        rep = verify_top_curves(Q, 2, 1, 2, (1, 2),
                                (QQ(1, 2), QQ(2, 3)), (S,), S)
        assert rep.ok and rep.difference == 0.0

    def test_two_rows_exact(self):
        rep = verify_top_curves(Q, 2, 2, 2, (1, 2),
                                (QQ(1, 2), QQ(2, 3)), (S, S), S)
        assert rep.ok and rep.difference == 0.0

    def test_fused_exact(self):
        rep = verify_top_curves(Q, 2, 1, 2, (1, 2),
                                (QQ(1, 2), QQ(2, 3)), (S,), S,
                                R=(2, 1), t2=(QQ(1, 4),))
        assert rep.ok and rep.difference == 0.0


class TestMergeEnsembles:
    def test_single_color_vacuous(self):
        rep = check_merge_ensembles(Q, 1, 1, 1, (1,), (QQ(1, 2),),
                                    (S,), S)
        assert rep.ok and "vacuous" in rep.detail

    def test_two_to_one_exact(self):
        rep = check_merge_ensembles(Q, 2, 1, 2, (1, 2),
                                    (QQ(1, 2), QQ(2, 3)), (S,), S)
        assert rep.ok and rep.difference == 0.0

    def test_three_to_two_exact(self):
        rep = check_merge_ensembles(Q, 3, 1, 1, (2,), (QQ(1, 2),),
                                    (S,), S)
        assert rep.ok and rep.difference == 0.0


class TestRoundtripFuzz:
    def test_measure_atoms_valid_and_recoverable(self):
        rng = random.Random(17)
        for _ in range(10):
            n = rng.randint(1, 2)
            N = rng.randint(1, 2)
            M = rng.randint(1, 2)
            sigma = tuple(rng.randint(1, n) for _ in range(N))
            x = tuple(QQ(rng.randint(2, 5), rng.randint(6, 9))
                      for _ in range(N))
            m = measure_fG(Q, n, M, N, sigma, x, (S,) * M, S)
            for seq, _ in m.atoms:
                ens = ensemble_from_sequence(seq)
                assert ens.check_valid() and ens.simple
                # rebuild every composition from the curve gaps
                for i, mu in enumerate(seq):
                    for c in range(1, n + 1):
                        for k in range(1, ens.k_depth + 2):
                            assert (ens.Lambda(c, k, i)
                                    - ens.Lambda(c, k + 1, i)
                                    == mu.m(k, c))


class TestSerialization:
    def test_json_roundtrip(self):
        ens = ensemble_from_sequence(SEQ_FUSED)
        blob = json.dumps(ens.to_jsonable())
        back = ColoredLineEnsemble.from_jsonable(json.loads(blob))
        assert back == ens
        data = json.loads(blob)
        assert data["n"] == 2 and data["interval"] == [0, 7]

    def test_svg_smoke(self):
        svg = ensemble_svg(ensemble_from_sequence(SEQ))
        assert svg.startswith("<svg")
        assert svg.count("polyline") >= 4
        assert "color 2" in svg
