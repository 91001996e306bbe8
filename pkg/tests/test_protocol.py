"""Тесты сообщений и переходов автомата узла."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from async_election.models import ProtocolParams
from async_election.protocol import (
    NO_RANK,
    WAKEUP,
    Approved,
    CandState,
    Declined,
    Dispute,
    Leader,
    Loses,
    NodeState,
    NoticeKind,
    RefState,
    Request,
    candidate_dispute_response,
    candidate_on_reply,
    decode,
    encode,
    initialize,
    next_to_send,
    on_receive,
    referee_dispatch,
    referee_dispute_reply_response,
    referee_request_response,
    relay,
)
from async_election.protocol.messages import describe
from async_election.utils.exceptions import ProtocolInvariantError, TraceParseError

REFEREE_RANK = 10 ** 7


@pytest.fixture
def params() -> ProtocolParams:
    return ProtocolParams.build(4, quorum_low=2, rank_space_max=2 ** 40)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0)


def referee(degree: int = 2, **fields) -> NodeState:
    state = NodeState(degree=degree, awake=True, rank=REFEREE_RANK, ref_state=RefState.READY)
    for key, value in fields.items():
        setattr(state, key, value)
    return state


def candidate(rank: int = 50, degree: int = 2) -> NodeState:
    return NodeState(degree=degree, awake=True, rank=rank, cand_state=CandState.CANDIDATE)


def generated(emission):
    return [n.message for n in emission.notices if n.kind == NoticeKind.GENERATED]


class TestMessages:
    """Кодирование и инварианты сообщений."""

    def test_layout(self):
        data = encode(Approved(42, 7))
        assert len(data) == 17
        assert data[0] == 2
        assert decode(data) == Approved(42, 7)

    def test_wakeup_is_one_byte(self):
        assert encode(WAKEUP) == b"\x00"

    def test_unknown_tag(self):
        with pytest.raises(TraceParseError):
            decode(b"\x09")

    def test_wrong_length(self):
        with pytest.raises(TraceParseError):
            decode(encode(Request(3))[:-1])

    def test_dispute_order(self):
        with pytest.raises(ProtocolInvariantError):
            Dispute(5, 3)

    def test_decode_rejects_reversed_dispute(self):
        wire = encode(Dispute(3, 5))
        with pytest.raises(TraceParseError):
            decode(wire[:1] + wire[9:] + wire[1:9])

    def test_describe(self):
        assert describe(Approved(42, 7)) == "<42, 7, approved>"
        assert describe(WAKEUP) == "<wakeup>"

    def test_value_identity(self):
        assert len({Request(3), Request(3), Loses(3), Leader(3)}) == 3


class TestInitialize:
    """Пробуждение: Wakeup во все порты, ранг, роли."""

    def test_forced_roles(self, params, rng):
        state, emission = initialize(NodeState(degree=3), params, rng, roles=(True, True))
        assert state.awake and state.is_candidate and state.ref_state == RefState.READY
        assert 1 <= state.rank <= params.rank_space_max
        assert [list(q) for q in state.send_list] == [[WAKEUP, Request(state.rank)]] * 3
        roles = [n for n in emission.notices if n.kind == NoticeKind.ROLES]
        assert roles[0].detail == (1, 1)

    def test_no_roles(self, params, rng):
        state, emission = initialize(NodeState(degree=1), params, rng, roles=(False, False))
        assert state.cand_state == CandState.NON_ELECTED
        assert state.ref_state == RefState.NON_SELECTED
        assert generated(emission) == [WAKEUP]

    def test_unforced_role_uses_coin(self, rng):
        # вероятность роли 1 при n=4 и c=16
        params = ProtocolParams.build(4, rank_space_max=2 ** 40)
        state, _ = initialize(NodeState(degree=1), params, rng, roles=(False, None))
        assert state.ref_state == RefState.READY
        assert not state.is_candidate

    def test_tiebreak_appends_index(self, params, rng):
        state, _ = initialize(NodeState(degree=1), params, rng, roles=(False, False), tiebreak=(7, 100))
        assert state.rank % 100 == 7

    def test_twice(self, params, rng):
        state, _ = initialize(NodeState(degree=1), params, rng)
        with pytest.raises(ProtocolInvariantError):
            initialize(state, params, rng)


class TestRelay:
    """Затопление и вычеркивание повторов."""

    def test_new_message(self):
        state = NodeState(degree=3, awake=True)
        fresh, emission = relay(state, 1, Request(9))
        assert fresh
        assert emission.ports == {0, 2}
        assert Request(9) in state.m_list

    def test_duplicate_removed_from_arrival_port(self):
        state = NodeState(degree=2, awake=True)
        relay(state, 0, Request(9))
        assert list(state.send_list[1]) == [Request(9)]
        fresh, emission = relay(state, 1, Request(9))
        assert not fresh and not emission.sends
        assert not state.send_list[1]

    def test_order_policy(self):
        state = NodeState(degree=2, awake=True)
        relay(state, 0, Request(1))
        relay(state, 0, Request(2))
        assert next_to_send(state, 1, lambda queue: len(queue) - 1) == Request(2)
        assert next_to_send(state, 1) == Request(1)
        assert next_to_send(state, 1) is None

    def test_order_policy_out_of_range(self):
        state = NodeState(degree=2, awake=True)
        relay(state, 0, Request(1))
        with pytest.raises(ProtocolInvariantError):
            next_to_send(state, 1, lambda queue: 5)


class TestReferee:
    """Ответы рефери на запросы и споры."""

    def test_ready_approves(self, params):
        state, emission = referee_request_response(referee(), 30, params)
        assert state.ref_state == RefState.CHOSEN_SELECTED and state.chosen == 30
        assert generated(emission) == [Approved(30, REFEREE_RANK)]

    def test_weaker_declined(self, params):
        state, emission = referee_request_response(referee(ref_state=RefState.CHOSEN_SELECTED, chosen=30), 20, params)
        assert generated(emission) == [Declined(20, REFEREE_RANK)]
        assert state.chosen == 30

    def test_stronger_opens_dispute(self, params):
        state, emission = referee_request_response(referee(ref_state=RefState.CHOSEN_SELECTED, chosen=30), 40, params)
        assert state.ref_state == RefState.IN_DISPUTE and state.contender == 40
        assert generated(emission) == [Dispute(30, 40)]

    def test_known_dispute_not_repeated(self, params):
        state = referee(ref_state=RefState.CHOSEN_SELECTED, chosen=30)
        state.m_list.add(Dispute(30, 40))
        state, emission = referee_request_response(state, 40, params)
        assert state.ref_state == RefState.IN_DISPUTE
        assert generated(emission) == []

    def test_known_loss_approves(self, params):
        state = referee(ref_state=RefState.CHOSEN_SELECTED, chosen=30)
        state.m_list.add(Loses(30))
        state, emission = referee_request_response(state, 40, params)
        assert state.chosen == 40 and state.ref_state == RefState.CHOSEN_SELECTED
        assert generated(emission) == [Approved(40, REFEREE_RANK)]

    def test_dispute_weaker_than_contender(self, params):
        state = referee(ref_state=RefState.IN_DISPUTE, chosen=30, contender=40)
        state, emission = referee_request_response(state, 35, params)
        assert generated(emission) == [Declined(35, REFEREE_RANK)]
        assert state.contender == 40

    def test_dispute_stronger_than_contender(self, params):
        state = referee(ref_state=RefState.IN_DISPUTE, chosen=30, contender=40)
        state, emission = referee_request_response(state, 45, params)
        assert generated(emission) == [Declined(40, REFEREE_RANK), Dispute(30, 45)]
        assert state.contender == 45

    def test_dispute_resolved(self):
        state = referee(ref_state=RefState.IN_DISPUTE, chosen=30, contender=40)
        state, emission = referee_dispute_reply_response(state)
        assert (state.chosen, state.ref_state) == (40, RefState.CHOSEN_SELECTED)
        assert generated(emission) == [Approved(40, REFEREE_RANK)]

    def test_loses_through_on_receive(self, params, rng):
        state = referee(ref_state=RefState.IN_DISPUTE, chosen=30, contender=40)
        state, emission = on_receive(state, 0, Loses(30), params, rng)
        assert state.chosen == 40
        assert Approved(40, REFEREE_RANK) in generated(emission)

    def test_dispatch_routes_request(self, params):
        state, emission = referee_dispatch(referee(), Request(30), params)
        assert state.chosen == 30
        assert generated(emission) == [Approved(30, REFEREE_RANK)]

    def test_dispatch_ignores_foreign_loses(self, params):
        state = referee(ref_state=RefState.IN_DISPUTE, chosen=30, contender=40)
        state, emission = referee_dispatch(state, Loses(25), params)
        assert (state.chosen, state.contender) == (30, 40)
        assert generated(emission) == []

    def test_dispatch_ignores_loses_outside_dispute(self, params):
        state = referee(ref_state=RefState.CHOSEN_SELECTED, chosen=30)
        state, emission = referee_dispatch(state, Loses(30), params)
        assert state.ref_state == RefState.CHOSEN_SELECTED
        assert generated(emission) == []

    def test_collision_notice(self, params):
        state = referee(ref_state=RefState.CHOSEN_SELECTED, chosen=30)
        _, emission = referee_request_response(state, 30, params)
        assert any(n.kind == NoticeKind.RANK_COLLISION for n in emission.notices)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.integers(min_value=1, max_value=10 ** 6), min_size=1, max_size=20, unique=True))
    def test_bounded_output_without_losses(self, ranks):
        params = ProtocolParams.build(4, quorum_low=2, rank_space_max=2 ** 40)
        state = referee(degree=1)
        produced = []
        for rank in ranks:
            state, emission = referee_request_response(state, rank, params)
            produced.extend(generated(emission))
            assert state.chosen == ranks[0]
        assert len(produced) <= 2 * len(ranks) + 1
        assert sum(isinstance(m, Approved) for m in produced) == 1


class TestCandidate:
    """Кандидат копит одобрения или выбывает."""

    def test_declined(self, params):
        state, emission = candidate_on_reply(candidate(), Declined(50, 1), params)
        assert state.cand_state == CandState.NON_ELECTED
        assert generated(emission) == [Loses(50)]

    def test_quorum_elects(self, params):
        state = candidate()
        state, emission = candidate_on_reply(state, Approved(50, 1), params)
        assert state.is_candidate and not generated(emission)
        state, emission = candidate_on_reply(state, Approved(50, 2), params)
        assert state.cand_state == CandState.ELECTED and state.terminated
        assert generated(emission) == [Leader(50)]
        became = [n for n in emission.notices if n.kind == NoticeKind.BECAME_LEADER]
        assert became[0].detail == (1, 2)

    def test_dispute_concedes(self):
        state, emission = candidate_dispute_response(candidate(), Dispute(50, 60))
        assert state.cand_state == CandState.NON_ELECTED
        assert generated(emission) == [Loses(50)]

    def test_non_candidate_ignores_dispute(self):
        state = NodeState(degree=1, awake=True, rank=50)
        _, emission = candidate_dispute_response(state, Dispute(50, 60))
        assert not emission.notices


class TestOnReceive:
    """Диспетчеризация входящих сообщений."""

    def test_referee_relays_then_answers(self, params, rng):
        state, _ = on_receive(referee(), 0, Request(5), params, rng)
        assert list(state.send_list[0]) == [Approved(5, REFEREE_RANK)]
        assert list(state.send_list[1]) == [Request(5), Approved(5, REFEREE_RANK)]

    def test_plain_node_only_relays_request(self, params, rng):
        state = NodeState(degree=2, awake=True, rank=7)
        assert not state.is_referee and not state.is_candidate
        state, emission = on_receive(state, 0, Request(5), params, rng)
        assert state.chosen == NO_RANK
        assert generated(emission) == []
        assert list(state.send_list[1]) == [Request(5)]

    def test_leader_terminates(self, params, rng):
        state, emission = on_receive(NodeState(degree=1, awake=True, rank=3), 0, Leader(99), params, rng)
        assert state.terminated and state.leader_rank == 99
        assert [n.kind for n in emission.notices] == [NoticeKind.LEARNED_LEADER, NoticeKind.TERMINATED]

    def test_terminated_drops_new(self, params, rng):
        state = NodeState(degree=2, awake=True, terminated=True)
        state, emission = on_receive(state, 0, Request(5), params, rng)
        assert not emission.sends and Request(5) not in state.m_list

    def test_terminated_still_prunes_duplicates(self, params, rng):
        state = NodeState(degree=2, awake=True)
        relay(state, 0, Request(5))
        state.terminated = True
        on_receive(state, 1, Request(5), params, rng)
        assert not state.send_list[1]

    def test_first_message_wakes(self, params, rng):
        state, emission = on_receive(NodeState(degree=2), 0, Request(5), params, rng, roles=(False, False))
        assert state.awake
        kinds = [n.kind for n in emission.notices]
        assert NoticeKind.ROLES in kinds
        assert Request(5) in state.send_list[1]

    def test_wakeup_message_wakes(self, params, rng):
        state, emission = on_receive(NodeState(degree=2), 0, WAKEUP, params, rng, roles=(False, False))
        assert state.awake
        # Wakeup уже услышан, повторно узел его не рассылает
        assert list(state.send_list[0]) == []
        assert list(state.send_list[1]) == [WAKEUP]
