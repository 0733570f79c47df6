import numpy as np
import pytest

from qcopysim import (
    Distribution,
    SubsystemLayout,
    build_ngram,
    make_state,
    observer_surprisal,
    quantum_mutual_information,
    shannon_entropy,
    transinformation,
    von_neumann_entropy,
)

# frozen by direct formula evaluation: -0.25*log2(0.25) - 0.75*log2(0.75)
H_QUARTER = 0.8112781244591328
RT2 = 1 / np.sqrt(2)


def pair_state(alpha2):
    layout = SubsystemLayout.build(("A", 2), ("B1", 2, ("pm", "um")))
    return make_state(layout, amps=[np.sqrt(alpha2), 0, 0, np.sqrt(1 - alpha2)])


def chain_state(alpha2, n):
    systems = [("A", 2)] + [(f"B{i}", 2, ("pm", "um")) for i in range(1, n + 1)]
    layout = SubsystemLayout.build(*systems)
    vec = np.zeros(layout.total_dim, dtype=complex)
    vec[0], vec[-1] = np.sqrt(alpha2), np.sqrt(1 - alpha2)
    return make_state(layout, amps=vec)


class TestShannonEntropy:
    def test_uniform_bit(self):
        assert shannon_entropy([0.5, 0.5]) == 1.0

    def test_deterministic(self):
        assert shannon_entropy([1.0, 0.0]) == 0.0

    def test_skewed_pair(self):
        assert abs(shannon_entropy([0.25, 0.75]) - H_QUARTER) < 1e-6

    def test_accepts_distribution_objects(self):
        d = Distribution(np.array([0.25, 0.75]))
        assert abs(shannon_entropy(d) - H_QUARTER) < 1e-12

    def test_invalid_distribution_rejected(self):
        with pytest.raises(ValueError, match="sum"):
            Distribution(np.array([0.5, 0.2]))
        with pytest.raises(ValueError, match="nonnegative"):
            Distribution(np.array([1.5, -0.5]))


class TestTransinformation:
    def test_perfect_binary_copy(self):
        assert abs(transinformation(np.diag([0.5, 0.5])) - 1.0) < 1e-12

    def test_independent_pair(self):
        assert transinformation(np.full((2, 2), 0.25)) == 0.0

    def test_pi_third_channel_with_uniform_source(self):
        joint = 0.5 * np.array([[0.75, 0.25], [0.25, 0.75]])
        assert abs(transinformation(joint) - (1 - H_QUARTER)) < 1e-6

    @pytest.mark.parametrize("seed", range(6))
    def test_identity_with_conditional_entropy(self, seed):
        # I(X;Y) = H(X) - H(X|Y), with X the row variable
        rng = np.random.default_rng(seed)
        joint = rng.random((3, 4))
        joint /= joint.sum()
        h_x = shannon_entropy(joint.sum(axis=1))
        h_x_given_y = sum(
            shannon_entropy(col / col.sum()) * col.sum() for col in joint.T
        )
        assert abs(transinformation(joint) - (h_x - h_x_given_y)) < 1e-10

    def test_nonnegative_output(self):
        rng = np.random.default_rng(99)
        for _ in range(20):
            joint = rng.random((2, 2))
            joint /= joint.sum()
            assert transinformation(joint) >= 0.0

    def test_bad_joint_rejected(self):
        with pytest.raises(ValueError, match="sum"):
            transinformation(np.array([[0.5, 0.5], [0.5, 0.5]]))


class TestVonNeumannEntropy:
    def test_pure_projector(self):
        s = pair_state(0.5)
        rho = np.outer(s.amps, s.amps.conj())
        assert von_neumann_entropy(rho) == 0.0

    def test_maximally_mixed_qubit(self):
        assert abs(von_neumann_entropy(np.eye(2) / 2) - 1.0) < 1e-12

    def test_diagonal_mixture(self):
        # oracle: eigenvalues of a diagonal matrix are its entries
        assert abs(von_neumann_entropy(np.diag([0.25, 0.75])) - H_QUARTER) < 1e-6

    def test_tiny_negative_eigenvalues_clamped(self):
        rho = np.diag([1.0 + 5e-13, -5e-13])
        assert von_neumann_entropy(rho) == 0.0


class TestQuantumMutualInformation:
    def test_product_state_uncorrelated(self):
        layout = SubsystemLayout.build(("A", 2), ("B1", 2, ("pm", "um")))
        s = make_state(layout, amps=[RT2, 0, RT2, 0])
        assert quantum_mutual_information(s, {"A"}, {"B1"}) < 1e-12

    def test_bell_pair_two_bits(self):
        assert abs(quantum_mutual_information(pair_state(0.5), {"A"}, {"B1"}) - 2.0) < 1e-8

    def test_skewed_pair_twice_binary_entropy(self):
        got = quantum_mutual_information(pair_state(0.25), {"A"}, {"B1"})
        assert abs(got - 2 * H_QUARTER) < 1e-8

    def test_overlapping_sets_rejected(self):
        with pytest.raises(ValueError, match="overlap"):
            quantum_mutual_information(pair_state(0.5), {"A"}, {"A", "B1"})

    @pytest.mark.parametrize("n", [2, 3, 6])
    def test_chain_correlations(self, n):
        # With other copies around, A shares exactly the classical content
        # H(|alpha|^2) with any single holder; against all holders together the
        # global state is pure and the correlation doubles.
        alpha2 = 0.3
        h = shannon_entropy([alpha2, 1 - alpha2])
        s = chain_state(alpha2, n)
        single = quantum_mutual_information(s, {"A"}, {"B1"})
        assert abs(single - h) < 1e-8
        union = quantum_mutual_information(s, {"A"}, {f"B{i}" for i in range(1, n + 1)})
        assert abs(union - 2 * h) < 1e-8

    def test_pair_without_spectators_doubles(self):
        h = shannon_entropy([0.3, 0.7])
        assert abs(quantum_mutual_information(chain_state(0.3, 1), {"A"}, {"B1"}) - 2 * h) < 1e-8


class TestNGram:
    def test_order0_counts(self):
        model = build_ngram("ababab", 0)
        assert model.probability((), "a") == 0.5
        assert model.probability((), "b") == 0.5

    def test_single_symbol_corpus(self):
        model = build_ngram("aaaa", 0)
        assert model.probability((), "a") == 1.0

    def test_order1_deterministic_transitions(self):
        model = build_ngram("ababab", 1)
        assert model.probability(("a",), "b") == 1.0
        assert model.probability(("b",), "a") == 1.0

    def test_corpus_too_short(self):
        with pytest.raises(ValueError, match="too short"):
            build_ngram("ab", 2)

    def test_unseen_event_gets_laplace_fallback(self):
        model = build_ngram("aaaa", 0, alphabet="ab")
        # 4 sightings of 'a', alphabet size 2: unseen 'b' costs 1/(4+2)
        assert model.probability((), "b") == pytest.approx(1 / 6)


class TestObserverSurprisal:
    def test_memorized_reader_is_never_surprised(self):
        text = "to be or not to be"
        assert observer_surprisal(text, text) == 0.0

    def test_memorized_reader_rejects_other_text(self):
        assert observer_surprisal("to be", "or not") == float("inf")

    def test_order0_uniform_pair(self):
        model = build_ngram("ababab", 0)
        assert abs(observer_surprisal(model, "ab") - 1.0) < 1e-10

    def test_order1_deterministic_text(self):
        model = build_ngram("ababab", 1)
        assert abs(observer_surprisal(model, "abab")) < 1e-12

    def test_unknown_symbol_rejected(self):
        model = build_ngram("ababab", 0)
        with pytest.raises(ValueError, match="alphabet"):
            observer_surprisal(model, "abc")

    def test_unseen_context_is_finite(self):
        model = build_ngram("abab", 2)
        value = observer_surprisal(model, "bba")
        assert np.isfinite(value) and value > 0

    @pytest.mark.parametrize("corpus", ["ababab", "abcabcabc", "aaaa", "abbaabba"])
    def test_higher_order_does_not_increase_training_surprisal(self, corpus):
        base = observer_surprisal(build_ngram(corpus, 0), corpus)
        for order in (1, 2):
            higher = observer_surprisal(build_ngram(corpus, order), corpus)
            assert higher <= base + 1e-10
