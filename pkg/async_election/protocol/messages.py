"""Семь видов сообщений протокола и их двоичное кодирование."""

import struct
from dataclasses import dataclass, fields
from enum import IntEnum
from typing import ClassVar, Dict, Tuple, Type, Union

from async_election.utils.exceptions import ProtocolInvariantError, TraceParseError


class MessageKind(IntEnum):
    """Однобайтовый тег вида сообщения."""

    WAKEUP = 0
    REQUEST = 1
    APPROVED = 2
    DECLINED = 3
    DISPUTE = 4
    LOSES = 5
    LEADER = 6


@dataclass(frozen=True)
class Wakeup:
    kind: ClassVar[MessageKind] = MessageKind.WAKEUP


@dataclass(frozen=True)
class Request:
    rank: int
    kind: ClassVar[MessageKind] = MessageKind.REQUEST


@dataclass(frozen=True)
class Approved:
    candidate_rank: int
    referee_rank: int
    kind: ClassVar[MessageKind] = MessageKind.APPROVED


@dataclass(frozen=True)
class Declined:
    candidate_rank: int
    referee_rank: int
    kind: ClassVar[MessageKind] = MessageKind.DECLINED


@dataclass(frozen=True)
class Dispute:
    """Спор: рефери просит выбранного ``chosen_rank`` уступить ``contender_rank``."""

    chosen_rank: int
    contender_rank: int
    kind: ClassVar[MessageKind] = MessageKind.DISPUTE

    def __post_init__(self) -> None:
        # равенство допустимо только при совпадении рангов, его помечают метрики
        if self.chosen_rank > self.contender_rank:
            raise ProtocolInvariantError(
                f"Dispute требует chosen <= contender: {self.chosen_rank} > {self.contender_rank}"
            )


@dataclass(frozen=True)
class Loses:
    rank: int
    kind: ClassVar[MessageKind] = MessageKind.LOSES


@dataclass(frozen=True)
class Leader:
    rank: int
    kind: ClassVar[MessageKind] = MessageKind.LEADER


Message = Union[Wakeup, Request, Approved, Declined, Dispute, Loses, Leader]

WAKEUP = Wakeup()

_BY_KIND: Dict[MessageKind, Type] = {
    cls.kind: cls for cls in (Wakeup, Request, Approved, Declined, Dispute, Loses, Leader)
}


def rank_fields(msg: Message) -> Tuple[int, ...]:
    """Поля рангов в каноническом порядке."""
    return tuple(getattr(msg, f.name) for f in fields(msg))


def encode(msg: Message) -> bytes:
    """
    Кодирует сообщение: байт вида и до двух беззнаковых 64-битных рангов.

    Args:
        msg: Сообщение

    Returns:
        Байтовое представление (big-endian)
    """
    values = rank_fields(msg)
    return struct.pack(">B" + "Q" * len(values), int(msg.kind), *values)


def decode(data: bytes) -> Message:
    """
    Декодирует сообщение из байтов.

    Args:
        data: Результат encode

    Returns:
        Сообщение

    Raises:
        TraceParseError: Неизвестный тег, неверная длина или недопустимые поля
    """
    if not data:
        raise TraceParseError("Пустое сообщение")
    try:
        cls = _BY_KIND[MessageKind(data[0])]
    except ValueError as e:
        raise TraceParseError(f"Неизвестный вид сообщения: {data[0]}") from e

    width = len(fields(cls))
    if len(data) != 1 + 8 * width:
        raise TraceParseError(f"{cls.__name__}: ожидалось {1 + 8 * width} байт, получено {len(data)}")
    values = struct.unpack(">" + "Q" * width, data[1:]) if width else ()
    try:
        return cls(*values)
    except ProtocolInvariantError as e:
        raise TraceParseError(f"Недопустимые поля {cls.__name__}: {values}") from e


def to_hex(msg: Message) -> str:
    return encode(msg).hex()


def from_hex(text: str) -> Message:
    try:
        return decode(bytes.fromhex(text))
    except ValueError as e:
        raise TraceParseError(f"Некорректная запись сообщения: {text!r}") from e


def describe(msg: Message) -> str:
    """Человекочитаемая форма, как в логах: <42, 7, approved>."""
    values = ", ".join(str(v) for v in rank_fields(msg))
    name = msg.kind.name.lower()
    return f"<{values + ', ' if values else ''}{name}>"
