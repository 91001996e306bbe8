"""Автомат выборов лидера."""

from async_election.protocol.messages import (
    WAKEUP,
    Approved,
    Declined,
    Dispute,
    Leader,
    Loses,
    Message,
    MessageKind,
    Request,
    Wakeup,
    decode,
    encode,
)
from async_election.protocol.state import (
    NO_RANK,
    CandState,
    Emission,
    NodeState,
    Notice,
    NoticeKind,
    RefState,
)
from async_election.protocol.transitions import (
    candidate_dispute_response,
    candidate_on_reply,
    initialize,
    next_to_send,
    on_receive,
    referee_dispatch,
    referee_dispute_reply_response,
    referee_request_response,
    relay,
)

__all__ = [
    "WAKEUP",
    "Approved",
    "Declined",
    "Dispute",
    "Leader",
    "Loses",
    "Message",
    "MessageKind",
    "Request",
    "Wakeup",
    "decode",
    "encode",
    "NO_RANK",
    "CandState",
    "Emission",
    "NodeState",
    "Notice",
    "NoticeKind",
    "RefState",
    "candidate_dispute_response",
    "candidate_on_reply",
    "initialize",
    "next_to_send",
    "on_receive",
    "referee_dispatch",
    "referee_dispute_reply_response",
    "referee_request_response",
    "relay",
]
