import random
from fractions import Fraction
from itertools import product

import pytest

from zkmech.codec import (
    Message,
    TAG_COMMIT,
    TAG_EVAL_PROOF,
    TAG_OUTCOME,
    TAG_TYPE_REPORT,
    transcript_dumps,
    transcript_loads,
)
from zkmech.errors import ICViolation, ParameterError, VerificationFailed
from zkmech.protocols import (
    BuyerSession,
    MechanismSpec,
    Outcome,
    SellerSession,
    run_local,
    verify_transcript,
)

# Independent outcome oracles, coded straight from the mechanism
# definitions (exact halves via Fraction, not the protocol's integerized
# thresholds).


def oracle_ex1(s, v):
    if s <= v:
        return Outcome(trade=True, item=0, payment=s)
    return Outcome(trade=False, payment=0)


def oracle_ex1multi(s, bids):
    top = max(bids)
    winner = bids.index(top)
    second = sorted(bids, reverse=True)[1]
    if s > top:
        return Outcome(trade=False, payment=0)
    if s > second:
        return Outcome(trade=True, item=winner, payment=s)
    return Outcome(trade=True, item=winner, payment=second)


def oracle_ex2(prices, values):
    feasible = [i for i in (0, 1) if values[i] >= prices[i]]
    if not feasible:
        return Outcome(trade=False, payment=0)
    best = max(feasible, key=lambda i: (values[i] - prices[i], -i))
    return Outcome(trade=True, item=best, payment=prices[best])


def oracle_ex3(prices, v, coin_z=None):
    s1, s2 = prices
    half = Fraction(v, 2)
    if half < s1:
        return Outcome(trade=False, payment=0)
    if half < s2:
        won = coin_z == 1
        return Outcome(
            trade=won, item=0 if won else None, payment=s1, lottery=None
        )
    return Outcome(trade=True, item=0, payment=s1 + s2)


def oracle_ex4(s, v, bound, z=None):
    if v < s:
        return Outcome(trade=False, payment=0)
    return Outcome(trade=True, item=0, payment=bound if z < s else 0)


def run(ref, spec, values, seed=0, **kw):
    return run_local(
        ref, spec, values, random.Random(f"{seed}/s"), random.Random(f"{seed}/b"), **kw
    )


class TestMechanismSpec:
    def test_ic_precondition_enforced_at_construction(self):
        ok = bad = 0
        for s1 in range(8):
            for s2 in range(8):
                if s1 <= s2:
                    MechanismSpec("ex3", 8, (s1, s2))
                    ok += 1
                else:
                    with pytest.raises(ICViolation):
                        MechanismSpec("ex3", 8, (s1, s2))
                    bad += 1
        assert (ok, bad) == (36, 28)

    def test_bound_must_be_power_of_two(self):
        with pytest.raises(ParameterError):
            MechanismSpec("ex1", 6, (1,))
        with pytest.raises(ParameterError):
            MechanismSpec("ex1", 1, (0,))

    def test_prices_in_range(self):
        with pytest.raises(ParameterError):
            MechanismSpec("ex1", 8, (8,))

    def test_value_out_of_range_is_an_input_error(self, ref23, rng):
        with pytest.raises(ParameterError):
            BuyerSession(ref23, "ex3", 8, [12], rng)


class TestHiddenPriceSale:
    def test_boundary_trade(self, ref23):
        spec = MechanismSpec("ex1", 8, (5,))
        out, _ = run(ref23, spec, [5])
        assert out == Outcome(trade=True, item=0, payment=5)

    def test_no_trade_with_proof(self, ref23):
        spec = MechanismSpec("ex1", 8, (5,))
        out, tr = run(ref23, spec, [3])
        assert out == Outcome(trade=False, payment=0)
        assert verify_transcript(ref23, tr) == out

    def test_exhaustive_small_bound(self, ref23):
        for s in range(4):
            spec = MechanismSpec("ex1", 4, (s,))
            for v in range(4):
                out, tr = run(ref23, spec, [v], seed=(s, v))
                assert out == oracle_ex1(s, v)
                assert verify_transcript(ref23, tr) == out

    def test_no_trade_leaks_no_openings(self, ref23):
        # structural information-flow check: a failed sale leaves only
        # commitments, the report, proofs, and the outcome in the log
        spec = MechanismSpec("ex1", 8, (5,))
        _, tr = run(ref23, spec, [2])
        assert tr.tags() == [TAG_COMMIT, TAG_TYPE_REPORT, TAG_EVAL_PROOF, TAG_OUTCOME]


class TestSecondPriceWithReserve:
    def test_reveal_case(self, ref23):
        out, _ = run(ref23, MechanismSpec("ex1multi", 8, (5,), n_buyers=2), [7, 3])
        assert out == Outcome(trade=True, item=0, payment=5)

    def test_second_price_case(self, ref23):
        out, _ = run(ref23, MechanismSpec("ex1multi", 8, (2,), n_buyers=2), [7, 6])
        assert out == Outcome(trade=True, item=0, payment=6)

    def test_reserve_above_all(self, ref23):
        out, _ = run(ref23, MechanismSpec("ex1multi", 8, (7,), n_buyers=2), [3, 2])
        assert out == Outcome(trade=False, payment=0)

    def test_ties_break_to_lowest_index(self, ref23):
        out, _ = run(ref23, MechanismSpec("ex1multi", 8, (1,), n_buyers=3), [5, 5, 2])
        assert out.item == 0 and out.payment == 5

    def test_exhaustive_three_bidders_small_bound(self, ref23):
        for s in range(4):
            spec = MechanismSpec("ex1multi", 4, (s,), n_buyers=2)
            for bids in product(range(4), repeat=2):
                out, tr = run(ref23, spec, list(bids), seed=(s, bids))
                assert out == oracle_ex1multi(s, list(bids))
                assert verify_transcript(ref23, tr) == out


class TestTwoItemUnitDemand:
    def test_worked_example(self, ref23):
        out, tr = run(ref23, MechanismSpec("ex2", 8, (3, 6)), [5, 5])
        assert out == Outcome(trade=True, item=0, payment=3)
        assert verify_transcript(ref23, tr) == out

    def test_double_no_trade(self, ref23):
        out, _ = run(ref23, MechanismSpec("ex2", 8, (7, 7)), [0, 0])
        assert out == Outcome(trade=False, payment=0)

    def test_negative_bound_omits_proof(self, ref23):
        # unsold item's required bound is non-positive: vacuous, no proof
        out, tr = run(ref23, MechanismSpec("ex2", 8, (0, 1)), [5, 0])
        assert out.trade and out.item == 0
        assert TAG_EVAL_PROOF not in tr.tags()
        assert verify_transcript(ref23, tr) == out

    def test_exhaustive_small_bound(self, ref23):
        for s1, s2 in product(range(4), repeat=2):
            spec = MechanismSpec("ex2", 4, (s1, s2))
            for v1, v2 in product(range(4), repeat=2):
                out, tr = run(ref23, spec, [v1, v2], seed=(s1, s2, v1, v2))
                assert out == oracle_ex2((s1, s2), [v1, v2])
                assert verify_transcript(ref23, tr) == out


class TestTwoPartPricing:
    def test_case_selection_matches_definition(self, ref23):
        # enumerate every value against the exact-halves definition
        spec = MechanismSpec("ex3", 8, (2, 5))
        for v in range(8):
            out, tr = run(ref23, spec, [v], seed=v, coin_value=1, mask_value=0)
            expected = oracle_ex3((2, 5), v, coin_z=1)
            assert (out.trade, out.payment) == (expected.trade, expected.payment)
            assert verify_transcript(ref23, tr) == out

    def test_lottery_coin_drives_allocation(self, ref23):
        spec = MechanismSpec("ex3", 8, (2, 5))
        for x, y in product((0, 1), repeat=2):
            out, tr = run(ref23, spec, [7], seed=(x, y), coin_value=x, mask_value=y)
            z = x ^ y
            assert out == Outcome(
                trade=z == 1, item=0 if z == 1 else None, payment=2, lottery=(y, z)
            )
            assert verify_transcript(ref23, tr) == out

    def test_full_allocation_announces_sum(self, ref23):
        out, tr = run(ref23, MechanismSpec("ex3", 8, (1, 2)), [7])
        assert out == Outcome(trade=True, item=0, payment=3)
        assert verify_transcript(ref23, tr) == out

    def test_value_out_of_range_rejected(self, ref23, rng):
        spec = MechanismSpec("ex3", 8, (2, 5))
        seller = SellerSession(ref23, spec, rng)
        seller.begin()
        from zkmech.protocols import _report_payload

        bad = Message(TAG_TYPE_REPORT, _report_payload(0, [12]))
        with pytest.raises(VerificationFailed):
            seller.receive_reports([bad])


class TestRandomizedPayment:
    def test_zero_price_never_charges(self, ref23):
        spec = MechanismSpec("ex4", 4, (0,))
        for x, y in product(range(4), repeat=2):
            out, tr = run(ref23, spec, [3], seed=(x, y), coin_value=x, mask_value=y)
            assert out.trade and out.payment == 0
            assert verify_transcript(ref23, tr) == out

    def test_charge_frequency_matches_price(self, ref23):
        # fixed mask, all four seller draws: exactly s of them pay H
        spec = MechanismSpec("ex4", 4, (2,))
        charged = 0
        for x in range(4):
            out, _ = run(ref23, spec, [3], seed=x, coin_value=x, mask_value=1)
            charged += out.payment == 4
        assert charged == 2

    def test_no_trade_below_price(self, ref23):
        out, tr = run(ref23, MechanismSpec("ex4", 8, (5,)), [3])
        assert out == Outcome(trade=False, payment=0)
        assert verify_transcript(ref23, tr) == out

    def test_exhaustive_coin_space(self, ref23):
        spec = MechanismSpec("ex4", 4, (2,))
        for v in range(4):
            for x, y in product(range(4), repeat=2):
                out, tr = run(ref23, spec, [v], seed=(v, x, y), coin_value=x, mask_value=y)
                assert out == verify_transcript(ref23, tr)
                expected = oracle_ex4(2, v, 4, z=x ^ y)
                assert (out.trade, out.payment) == (expected.trade, expected.payment)


class TestTranscriptVerification:
    def test_truncated_transcript_fails_with_phase(self, ref23):
        _, tr = run(ref23, MechanismSpec("ex1", 8, (5,)), [3])
        tr.messages = tr.messages[:-1]
        with pytest.raises(VerificationFailed) as err:
            verify_transcript(ref23, tr)
        assert err.value.phase == "outcome"

    def test_substituted_commitment_rejected(self, ref23):
        _, tr = run(ref23, MechanismSpec("ex1", 8, (5,)), [3])
        payload = bytearray(tr.messages[0].payload)
        # swap the first committed element for another subgroup member
        from zkmech.codec import Reader
        from zkmech.commitments import read_int_commitment

        r = Reader(bytes(payload))
        r.u8()
        com = read_int_commitment(r, ref23.params.q)
        old = com.bits[0].value
        new = next(
            x for x in (2, 3, 4) if ref23.params.is_member(x) and x != old
        )
        idx = bytes(payload).find(old.to_bytes(1, "big"), 2)
        payload[idx] = new
        tr.messages[0] = Message(TAG_COMMIT, bytes(payload))
        with pytest.raises(VerificationFailed):
            verify_transcript(ref23, tr)

    def test_wrong_seed_rejected(self, ref23):
        _, tr = run(ref23, MechanismSpec("ex1", 8, (5,)), [3])
        tr.seed = b"different"
        with pytest.raises(VerificationFailed):
            verify_transcript(ref23, tr)

    def test_outcome_substitution_rejected(self, ref23):
        from zkmech.protocols import encode_outcome

        _, tr = run(ref23, MechanismSpec("ex1", 8, (5,)), [3])
        fake = Outcome(trade=True, item=0, payment=0)
        tr.messages[-1] = Message(TAG_OUTCOME, encode_outcome(fake))
        with pytest.raises(VerificationFailed) as err:
            verify_transcript(ref23, tr)
        assert err.value.phase == "outcome"

    def test_unknown_kind_rejected(self, ref23):
        _, tr = run(ref23, MechanismSpec("ex1", 8, (5,)), [3])
        tr.kind = "nonsense"
        with pytest.raises(VerificationFailed):
            verify_transcript(ref23, tr)

    def test_round_trip_through_text(self, ref23):
        out, tr = run(ref23, MechanismSpec("ex3", 8, (2, 5)), [7], coin_value=1, mask_value=1)
        again = transcript_loads(transcript_dumps(tr))
        assert verify_transcript(ref23, again) == out

    def test_no_trade_against_maximal_report_auto_rejected(self, ref23):
        # a price above H-1 cannot exist, so a no-trade claim against the
        # top report is rejected before any proof is even read
        from zkmech.codec import Transcript
        from zkmech.commitments import commit_int
        from zkmech.gadgets import encode_bundle
        from zkmech.protocols import (
            CLAIM_GE0,
            _commit_payload,
            _proof_payload,
            _report_payload,
            encode_outcome,
        )

        com, _ = commit_int(ref23, 7, 3, random.Random(5))
        messages = [
            Message(TAG_COMMIT, _commit_payload([com])),
            Message(TAG_TYPE_REPORT, _report_payload(0, [7])),
            Message(TAG_EVAL_PROOF, _proof_payload(CLAIM_GE0, encode_bundle([]))),
            Message(TAG_OUTCOME, encode_outcome(Outcome(trade=False, payment=0))),
        ]
        forged = Transcript(kind="ex1", bound=8, seed=ref23.seed, messages=messages)
        with pytest.raises(VerificationFailed) as err:
            verify_transcript(ref23, forged)
        assert "maximal" in err.value.detail


class TestSessionPhases:
    def test_seller_rejects_out_of_order_calls(self, ref23, rng):
        spec = MechanismSpec("ex1", 8, (5,))
        seller = SellerSession(ref23, spec, rng)
        with pytest.raises(VerificationFailed):
            seller.receive_reports([])
        seller.begin()
        with pytest.raises(VerificationFailed):
            seller.begin()

    def test_buyer_poisoned_after_failure(self, ref23, rng):
        spec = MechanismSpec("ex3", 8, (2, 5))
        seller = SellerSession(ref23, spec, rng)
        msgs = seller.begin()
        buyer = BuyerSession(ref23, "ex3", 8, [7], random.Random(5))
        # corrupt the certificate message
        bad = [msgs[0], Message(msgs[1].tag, msgs[1].payload[:-1] + b"\x00")]
        with pytest.raises(VerificationFailed):
            buyer.receive_commit(bad)
        with pytest.raises(VerificationFailed):
            buyer.receive_commit(msgs)
