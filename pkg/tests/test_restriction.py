"""Tests for restriction, greedy decomposition and the determinant formula.

Oracles: classical C3 tensor-product decompositions (omega_1 squared and the
worked 2*omega_2 determinant identity), Weyl dimension bookkeeping, and the
Freudenthal weight tables — none of which go through `restrict` itself.
"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from c3qchar.cartan import Weight, freudenthal_weight_mults, weyl_dim
from c3qchar.fm import fm_qcharacter
from c3qchar.monomial import LMonomial
from c3qchar.qchar import QCharacter
from c3qchar.restriction import (
    WeightCharacter,
    conjecture_prediction,
    decompose,
    h_lambda_character,
    irreducible_character,
    restrict,
    weight_of,
)

parse = LMonomial.parse


def w(a: int, b: int, c: int) -> Weight:
    return Weight((a, b, c))


@pytest.fixture(scope="module")
def fundamentals() -> dict[int, QCharacter]:
    return {i: fm_qcharacter(LMonomial([(i, 0, 1)])) for i in (1, 2, 3)}


class TestWeightOf:
    def test_single_variables(self):
        assert weight_of(parse("1_0")) == w(1, 0, 0)
        assert weight_of(parse("3_-4")) == w(0, 0, 1)
        assert weight_of(LMonomial.one()) == Weight.zero()

    def test_spectral_parameter_forgotten(self):
        assert weight_of(parse("2_0")) == weight_of(parse("2_6"))

    def test_additive_on_products(self):
        m1, m2 = parse("1_0 2_3^-1"), parse("3_2 1_4^2")
        assert weight_of(m1 * m2) == weight_of(m1) + weight_of(m2)

    def test_inverse_factors_subtract(self):
        assert weight_of(parse("1_0 2_1^-1 3_2")) == w(1, -1, 1)


class TestRestrict:
    def test_fundamentals_restrict_irreducibly(self, fundamentals):
        for node, dim in ((1, 6), (2, 14), (3, 14)):
            wc = restrict(fundamentals[node])
            assert wc.dimension() == dim
            assert decompose(wc) == {Weight.fundamental(node): 1}

    def test_node1_weights_are_short_vectors_and_zero(self, fundamentals):
        wc = restrict(fundamentals[1])
        # V(omega_1) of C3 is the vector representation: six extreme weights
        assert set(wc.weights) == {
            w(1, 0, 0), w(-1, 1, 0), w(0, -1, 1), w(0, 1, -1), w(1, -1, 0), w(-1, 0, 0),
        }
        assert all(c == 1 for c in wc.weights.values())

    def test_constant_restricts_to_zero_weight(self):
        assert restrict(QCharacter.one()) == WeightCharacter({Weight.zero(): 1})
        assert restrict(QCharacter.zero()) == WeightCharacter.zero()

    def test_multiplicative(self, fundamentals):
        a, b = fundamentals[1], fundamentals[3]
        assert restrict(a * b) == restrict(a) * restrict(b)


class TestDecompose:
    def test_freudenthal_round_trip(self):
        for lam in (w(0, 0, 2), w(1, 1, 0), w(2, 0, 1)):
            assert decompose(irreducible_character(lam)) == {lam: 1}

    def test_vector_rep_square(self, fundamentals):
        # omega_1 tensor omega_1 = V(2w1) + V(w2) + V(0): 21 + 14 + 1 = 36
        square = restrict(fundamentals[1] * fundamentals[1])
        assert decompose(square) == {w(2, 0, 0): 1, w(0, 1, 0): 1, Weight.zero(): 1}

    def test_kirillov_reshetikhin_220(self):
        ch = fm_qcharacter(parse("2_0 2_2"))
        dec = decompose(restrict(ch))
        assert dec == {w(2, 0, 0): 1, w(0, 2, 0): 1, Weight.zero(): 1}
        assert sum(c * weyl_dim(lam) for lam, c in dec.items()) == ch.dimension() == 112

    def test_dimension_bookkeeping(self, fundamentals):
        for node in (1, 2, 3):
            ch = fundamentals[node]
            dec = decompose(restrict(ch))
            assert sum(c * weyl_dim(lam) for lam, c in dec.items()) == ch.dimension()

    def test_rejects_non_invariant_input(self):
        broken = WeightCharacter({w(1, 0, 0): 1, w(-1, 1, 0): 1})  # orbit cut short
        with pytest.raises(ValueError):
            decompose(broken)

    def test_rejects_negative_multiplicity(self):
        bad = irreducible_character(w(1, 0, 0)).scaled(-1)
        with pytest.raises(ValueError):
            decompose(bad)

    @settings(max_examples=15, deadline=None)
    @given(st.lists(st.sampled_from([1, 2, 3]), min_size=1, max_size=2),
           st.integers(min_value=0, max_value=2))
    def test_products_of_fundamentals_split_cleanly(self, nodes, spread):
        chars = [fm_qcharacter(LMonomial([(n, 2 * i * spread, 1)]))
                 for i, n in enumerate(nodes)]
        prod = chars[0]
        for c in chars[1:]:
            prod = prod * c
        dec = decompose(restrict(prod))
        assert all(c > 0 for c in dec.values())
        assert sum(c * weyl_dim(lam) for lam, c in dec.items()) == prod.dimension()


class TestConjecturePrediction:
    def test_covered_shapes(self):
        assert conjecture_prediction("T", 0, 2, 0) == {
            w(2, 0, 0): 1, w(0, 2, 0): 1, Weight.zero(): 1,
        }
        assert conjecture_prediction("T", 1, 0, 2) == {w(2, 0, 1): 1, w(0, 0, 1): 1}
        assert conjecture_prediction("Ttilde", 0, 0, 1) == {w(0, 0, 1): 1}

    def test_double_sum_shape(self):
        # T[1,3,0]: i <= 1, j <= i, all with the k omega_3 tail
        assert conjecture_prediction("T", 1, 3, 0) == {
            w(0, 3, 1): 1, w(2, 1, 1): 1, w(0, 1, 1): 1,
        }

    def test_uncovered_shapes_rejected(self):
        with pytest.raises(ValueError):
            conjecture_prediction("T", 1, 1, 1)
        with pytest.raises(ValueError):
            conjecture_prediction("Ttilde", 1, 2, 1)
        with pytest.raises(ValueError):
            conjecture_prediction("T", 1, -1, 0)

    @pytest.mark.parametrize(
        "family,k,l,m",
        [("T", 1, 2, 0), ("T", 2, 0, 2), ("Ttilde", 2, 0, 1), ("Ttilde", 3, 0, 0)],
    )
    def test_matches_computed_decomposition(self, family, k, l, m):
        from c3qchar import tsystem

        ch = tsystem.fm_character(tsystem.label(family, k, l, m))
        assert decompose(restrict(ch)) == conjecture_prediction(family, k, l, m)


class TestHLambda:
    def test_single_row(self):
        assert h_lambda_character(w(1, 0, 0)) == irreducible_character(w(1, 0, 0))
        # h_3 = V(3w1) + V(w1)
        got = h_lambda_character(w(3, 0, 0))
        want = irreducible_character(w(3, 0, 0)) + irreducible_character(w(1, 0, 0))
        assert got == want

    def test_omega2_via_determinant(self):
        # h_1^2 - h_2 h_0 collapses the tensor square down to ch V(w2)
        assert h_lambda_character(w(0, 1, 0)) == irreducible_character(w(0, 1, 0))

    def test_two_omega2_worked_example(self):
        got = h_lambda_character(w(0, 2, 0))
        want = (
            irreducible_character(w(2, 0, 0))
            + irreducible_character(w(0, 2, 0))
            + WeightCharacter.one()
        )
        assert got == want
        assert got == restrict(fm_qcharacter(parse("2_0 2_2")))

    def test_zero_weight_gives_trivial_character(self):
        assert h_lambda_character(Weight.zero()) == WeightCharacter.one()

    def test_long_node_rejected(self):
        with pytest.raises(ValueError):
            h_lambda_character(w(0, 0, 1))
        with pytest.raises(ValueError):
            h_lambda_character(w(-1, 1, 0))

    @pytest.mark.parametrize("m1,m2", [(1, 1), (2, 1), (0, 3), (3, 0), (1, 2)])
    def test_matches_restriction_of_minimal_affinization(self, m1, m2):
        from c3qchar import tsystem

        ch = tsystem.fm_character(tsystem.label("T", 0, m2, m1))
        assert h_lambda_character(w(m1, m2, 0)) == restrict(ch)


class TestWeightCharacterRing:
    def test_json_round_trip(self):
        wc = irreducible_character(w(1, 0, 1))
        assert WeightCharacter.from_json(wc.to_json()) == wc

    def test_ring_identities(self):
        a = irreducible_character(w(1, 0, 0))
        z, o = WeightCharacter.zero(), WeightCharacter.one()
        assert a + z == a
        assert a * o == a
        assert a - a == z
        assert (a + a) == a.scaled(2)

    def test_zero_multiplicities_dropped(self):
        wc = WeightCharacter({w(1, 0, 0): 0, Weight.zero(): 2})
        assert set(wc.weights) == {Weight.zero()}
