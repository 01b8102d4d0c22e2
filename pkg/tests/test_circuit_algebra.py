import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from samegate import circuit_algebra as ca
from samegate.errors import (
    DuplicateGate,
    IllegalSwap,
    InvalidClassParameters,
    InvalidP,
    MissingGate,
    OutOfRange,
    TooLarge,
)


def orders(min_n=2, max_n=10):
    return st.integers(min_n, max_n).flatmap(
        lambda n: st.permutations(list(range(1, n + 1))).map(lambda o: ca.GateSequence(n, tuple(o)))
    )


def c_by_definition(order, n):
    """Direct transcription of the counting definition, quadratic in N."""
    count = 0
    for l, gl in enumerate(order):
        if any((order[k] - gl) % n == 1 for k in range(l)):
            count += 1
    return count


KNOWN_LABELS = {
    6: {(6, 1), (6, 5), (2, 1), (3, 1), (3, 2)},
    7: {(7, 1), (7, 2), (7, 3), (7, 4), (7, 5), (7, 6)},
    8: {(8, 1), (8, 3), (8, 5), (8, 7), (2, 1), (4, 1), (4, 3)},
    9: {(9, 1), (9, 2), (9, 4), (9, 5), (9, 7), (9, 8), (3, 1), (3, 2)},
    10: {(10, 1), (10, 3), (10, 7), (10, 9), (2, 1), (5, 1), (5, 2), (5, 3), (5, 4)},
}


class TestValidate:
    def test_identity_staircase(self):
        assert ca.validate([1, 2, 3], 3).order == (1, 2, 3)

    def test_duplicate_names_gate(self):
        with pytest.raises(DuplicateGate) as err:
            ca.validate([1, 1, 2], 3)
        assert err.value.gate == 1

    def test_missing_and_out_of_range(self):
        with pytest.raises(MissingGate) as err:
            ca.validate([1, 2], 3)
        assert err.value.gate == 3
        with pytest.raises(OutOfRange) as err:
            ca.validate([1, 2, 4], 3)
        assert err.value.gate == 4

    def test_expanded_class_order_is_valid(self):
        assert ca.validate([1, 4, 3, 6, 5, 2], 6).n_sites == 6

    def test_parse_and_format_roundtrip(self):
        seq = ca.parse_sequence("1,4,3,6,5,2")
        assert str(seq) == "1,4,3,6,5,2"
        assert seq.n_sites == 6


class TestAllowedQR:
    @pytest.mark.parametrize("n", sorted(KNOWN_LABELS))
    def test_known_labels(self, n):
        assert set(ca.allowed_qr(n)) == KNOWN_LABELS[n]

    def test_count_is_n_minus_1(self):
        for n in range(2, 2001):
            assert len(ca.allowed_qr(n)) == n - 1

    def test_partition_into_families(self):
        qr = ca.allowed_qr(12)
        s = [x for x in qr if x[0] == 12]
        bw = [x for x in qr if x[0] < 12]
        assert len(s) == 4 and len(bw) == 7
        assert sum(1 for _ in range(1, 12) if math.gcd(_, 12) == 1) == len(s)


class TestCanonicalForms:
    def test_fqr_examples(self):
        assert ca.canonical_fqr(6, 2, 1).order == (1, 3, 5, 2, 4, 6)
        assert ca.canonical_fqr(6, 3, 2).order == (1, 4, 3, 6, 5, 2)

    def test_fqr_twelve_site_layers_match_three_layer_example(self):
        # layers f1, f3, f2 of the introductory 3-layer circuit; order inside a layer is free
        seq = ca.canonical_fqr(12, 3, 2)
        layers = [set(seq.order[i : i + 4]) for i in range(0, 12, 4)]
        assert layers == [{1, 4, 7, 10}, {3, 6, 9, 12}, {2, 5, 8, 11}]
        example = ca.parse_sequence("1,4,7,10,3,6,9,12,2,5,8,11")
        assert ca.classify(example) == ca.classify(seq)

    def test_fqr_rejects_bad_parameters(self):
        with pytest.raises(InvalidClassParameters):
            ca.canonical_fqr(6, 4, 1)
        with pytest.raises(InvalidClassParameters):
            ca.canonical_fqr(6, 3, 3)

    @pytest.mark.parametrize("n", range(2, 25))
    def test_fqr_always_valid(self, n):
        for q, r in ca.allowed_qr(n):
            seq = ca.canonical_fqr(n, q, r)
            ca.validate(seq.order, n)

    def test_fp_examples(self):
        assert ca.canonical_fp(5, 1).order == (1, 2, 3, 4, 5)
        assert ca.canonical_fp(5, 4).order == (1, 5, 4, 3, 2)
        assert ca.canonical_fp(6, 3).order == (1, 2, 3, 6, 5, 4)
        with pytest.raises(InvalidP):
            ca.canonical_fp(5, 5)


class TestInvariant:
    def test_examples(self):
        assert ca.invariant_c(ca.validate(range(1, 8), 7)) == 1
        assert ca.invariant_c(ca.validate([1, 3, 2, 4], 4)) == 2

    def test_fp_has_invariant_p(self):
        for n in range(2, 13):
            for p in range(1, n):
                assert ca.invariant_c(ca.canonical_fp(n, p)) == p

    @given(orders())
    def test_matches_definition(self, seq):
        c = ca.invariant_c(seq)
        assert c == c_by_definition(seq.order, seq.n_sites)
        assert 1 <= c <= seq.n_sites - 1

    def test_c_of_class_examples(self):
        assert ca.c_of_class(10, 2, 1) == 5
        assert ca.c_of_class(10, 10, 1) == 1

    def test_ten_site_table(self):
        table = {qr: ca.c_of_class(10, *qr) for qr in ca.allowed_qr(10)}
        assert len(set(table.values())) == 9
        assert table == {
            (10, 1): 1, (10, 3): 7, (10, 7): 3, (10, 9): 9,
            (2, 1): 5, (5, 1): 2, (5, 2): 6, (5, 3): 4, (5, 4): 8,
        }

    def test_staircase_value_from_position_of_gate_n(self):
        # C = N - k_N + 1 with k_N the 1-based time index of gate N
        for n in range(3, 40):
            for q, r in ca.allowed_qr(n):
                if q != n:
                    continue
                seq = ca.canonical_fqr(n, q, r)
                k_n = seq.order.index(n) + 1
                assert ca.c_of_class(n, q, r) == n - k_n + 1

    @pytest.mark.parametrize("n", range(2, 201))
    def test_injective_and_family_ranges(self, n):
        values = {}
        for q, r in ca.allowed_qr(n):
            c = ca.c_of_class(n, q, r)
            values[(q, r)] = c
            if q == n:
                assert math.gcd(c, n) == 1
            else:
                assert c % (n // q) == 0 and math.gcd(c // (n // q), q) == 1 and c // (n // q) < q
        assert len(set(values.values())) == n - 1
        s_range = {c for (q, _), c in values.items() if q == n}
        bw_range = {c for (q, _), c in values.items() if q < n}
        assert not s_range & bw_range


class TestClassify:
    def test_examples(self):
        assert (ca.classify(ca.parse_sequence("1,4,7,10,3,6,9,12,2,5,8,11")).q,
                ca.classify(ca.parse_sequence("1,4,7,10,3,6,9,12,2,5,8,11")).r) == (3, 2)
        for n in range(2, 15):
            cls = ca.classify(ca.validate(range(1, n + 1), n))
            assert (cls.q, cls.r, cls.p) == (n, 1, 1)
        cls = ca.classify(ca.parse_sequence("1,3,2,4"))
        assert (cls.q, cls.r) == (2, 1)

    def test_json_record(self):
        rec = ca.classify(ca.parse_sequence("1,4,3,6,5,2")).to_json()
        assert rec == {"n": 6, "q": 3, "r": 2, "p": ca.c_of_class(6, 3, 2)}

    @given(orders(2, 12))
    def test_classify_returns_canonical_with_same_invariant(self, seq):
        cls = ca.classify(seq)
        assert ca.c_of_class(seq.n_sites, cls.q, cls.r) == ca.invariant_c(seq) == cls.p


class TestMoves:
    def test_examples(self):
        seq = ca.parse_sequence("1,3,2,4")
        assert ca.apply_move(ca.parse_sequence("1,2,3"), ca.ROTATE).order == (2, 3, 1)
        assert ca.apply_move(seq, ca.SWAP(1)).order == (3, 1, 2, 4)
        with pytest.raises(IllegalSwap):
            ca.apply_move(seq, ca.SWAP(2))

    def test_wrapped_neighbours_cannot_swap(self):
        with pytest.raises(IllegalSwap):
            ca.apply_move(ca.parse_sequence("5,1,2,3,4"), ca.SWAP(1))

    @given(orders(2, 12), st.data())
    def test_moves_preserve_invariant(self, seq, data):
        n = seq.n_sites
        legal = [ca.ROTATE] + [
            ca.SWAP(l) for l in range(1, n) if not ca.are_neighbors(seq.order[l - 1], seq.order[l], n)
        ]
        move = data.draw(st.sampled_from(legal))
        assert ca.invariant_c(ca.apply_move(seq, move)) == ca.invariant_c(seq)


class TestReduction:
    def test_already_canonical(self):
        p, moves = ca.reduce_to_fp(ca.canonical_fp(6, 3))
        assert p == 3
        assert ca.replay(ca.canonical_fp(6, 3), moves) == ca.canonical_fp(6, 3)

    def test_reverse_staircase(self):
        p, _ = ca.reduce_to_fp(ca.parse_sequence("1,6,5,4,3,2"))
        assert p == 5

    def test_trace_is_deterministic(self):
        seq = ca.parse_sequence("4,2,6,1,3,5")
        assert ca.reduce_to_fp(seq) == ca.reduce_to_fp(seq)

    @settings(max_examples=300)
    @given(orders(2, 12))
    def test_replay_reaches_fp(self, seq):
        p, moves = ca.reduce_to_fp(seq)
        assert p == ca.invariant_c(seq)
        assert ca.replay(seq, moves) == ca.canonical_fp(seq.n_sites, p)

    def test_random_seven_site(self):
        rng = random.Random(7)
        for _ in range(500):
            order = list(range(1, 8))
            rng.shuffle(order)
            seq = ca.GateSequence(7, tuple(order))
            p, moves = ca.reduce_to_fp(seq)
            assert ca.replay(seq, moves).order == ca.canonical_fp(7, p).order


class TestBruteForce:
    def test_three_sites(self):
        assert len(ca.equivalence_classes_bruteforce(3)) == 2

    def test_six_sites(self):
        classes = ca.equivalence_classes_bruteforce(6)
        assert len(classes) == 5
        assert sum(len(c) for c in classes) == math.factorial(6)
        fqr = {ca.canonical_fqr(6, q, r).order for q, r in ca.allowed_qr(6)}
        fp = {ca.canonical_fp(6, p).order for p in range(1, 6)}
        for members in classes:
            m = set(members)
            assert len(m & fqr) == 1 and len(m & fp) == 1
            assert len({ca.invariant_c(ca.GateSequence(6, o)) for o in members}) == 1

    def test_guard(self):
        with pytest.raises(TooLarge):
            ca.equivalence_classes_bruteforce(9)


class TestCompress:
    def test_published_fillings(self):
        r52 = ca.compress(ca.canonical_fqr(10, 5, 2), 2)
        assert r52.layer_count == 5 and r52.filling == Fraction(8, 10)
        assert ca.compress(ca.canonical_fqr(10, 5, 1), 1).filling == Fraction(4, 10)
        for n in (4, 6, 8, 10, 12):
            assert ca.compress(ca.canonical_fqr(n, 2, 1), 1).filling == 1

    def test_asymptotic_filling(self):
        assert ca.asymptotic_filling(ca.canonical_fqr(10, 5, 2)) == Fraction(4, 5)
        assert ca.asymptotic_filling(ca.canonical_fqr(10, 5, 1)) == Fraction(2, 5)
        assert ca.asymptotic_filling(ca.canonical_fqr(10, 2, 1)) == 1

    @settings(max_examples=100)
    @given(orders(3, 10), st.integers(1, 4))
    def test_layers_are_commuting_and_order_preserving(self, seq, t):
        n = seq.n_sites
        report = ca.compress(seq, t)
        assert 0 < report.filling <= 1
        assert sum(len(layer) for layer in report.layers) == t * n
        for layer in report.layers:
            for i, a in enumerate(layer):
                for b in layer[i + 1 :]:
                    assert (a - b) % n not in (0, 1, n - 1)
        # every non-commuting pair keeps its time order
        timeline = list(seq.order) * t
        slot = {}
        counters = {}
        for layer_idx, layer in enumerate(report.layers):
            for g in layer:
                counters[g] = counters.get(g, 0) + 1
                slot[(g, counters[g])] = layer_idx
        seen = {}
        occ = []
        for g in timeline:
            seen[g] = seen.get(g, 0) + 1
            occ.append((g, seen[g]))
        for i, (a, ka) in enumerate(occ):
            for b, kb in occ[i + 1 :]:
                if (a - b) % n in (0, 1, n - 1):
                    assert slot[(a, ka)] < slot[(b, kb)]


@pytest.mark.parametrize("n", range(2, 201))
def test_closed_form_c_agrees_with_counting(n):
    for q, r in ca.allowed_qr(n):
        assert ca.c_of_class_closed_form(n, q, r) == ca.c_of_class(n, q, r)


def test_label_count_matches_generated_labels():
    for n in range(2, 1001):
        labels = list(ca.allowed_qr(n))
        assert len(labels) == len(set(labels)) == len(ca.allowed_qr(n))
        assert all(ca.is_allowed(n, q, r) for q, r in labels)


def test_labels_support_indexing_and_equality():
    labels = ca.allowed_qr(8)
    assert labels[0] == (8, 1) and labels[-1] == (4, 3)
    assert labels == [(8, 1), (8, 3), (8, 5), (8, 7), (2, 1), (4, 1), (4, 3)]
