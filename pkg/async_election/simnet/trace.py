"""Трасса прогона и ее построчный JSON-формат."""

import gzip
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Tuple, Union

from async_election.protocol.messages import Message, from_hex, to_hex
from async_election.protocol.state import Notice, NoticeKind
from async_election.utils.exceptions import OutputError, TraceParseError
from async_election.utils.logger import get_logger

logger = get_logger(__name__)

WAKEUP_EVENT = "wakeup"
DELIVER_EVENT = "deliver"


@dataclass(frozen=True)
class TraceRecord:
    """Одно обработанное событие: внешнее пробуждение или доставка по ребру src->dst."""

    index: int
    time: float
    kind: str
    dst: int
    src: Optional[int] = None
    message: Optional[Message] = None
    sent_at: Optional[float] = None
    notices: Tuple[Notice, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "i": self.index,
            "time": self.time,
            "kind": self.kind,
            "src": self.src,
            "dst": self.dst,
            "payload": to_hex(self.message) if self.message is not None else None,
            "sent_at": self.sent_at,
            "notices": [_notice_to_dict(n) for n in self.notices],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TraceRecord":
        try:
            payload = data.get("payload")
            return cls(
                index=int(data["i"]),
                time=float(data["time"]),
                kind=str(data["kind"]),
                src=data.get("src"),
                dst=int(data["dst"]),
                message=from_hex(payload) if payload is not None else None,
                sent_at=data.get("sent_at"),
                notices=tuple(_notice_from_dict(n) for n in data.get("notices", [])),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise TraceParseError(f"Некорректная запись трассы: {data!r}") from e


def _notice_to_dict(notice: Notice) -> Dict[str, Any]:
    out: Dict[str, Any] = {"kind": notice.kind.value}
    if notice.rank is not None:
        out["rank"] = notice.rank
    if notice.message is not None:
        out["payload"] = to_hex(notice.message)
    if notice.detail:
        out["detail"] = list(notice.detail)
    return out


def _notice_from_dict(data: Dict[str, Any]) -> Notice:
    return Notice(
        kind=NoticeKind(data["kind"]),
        rank=data.get("rank"),
        message=from_hex(data["payload"]) if "payload" in data else None,
        detail=tuple(data.get("detail", ())),
    )


class Trace:
    """Упорядоченный журнал событий прогона с заголовком входных данных."""

    def __init__(self, header: Optional[Dict[str, Any]] = None, records: Optional[List[TraceRecord]] = None):
        self.header: Dict[str, Any] = header or {}
        self.records: List[TraceRecord] = records or []

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[TraceRecord]:
        return iter(self.records)

    def __getitem__(self, index: int) -> TraceRecord:
        return self.records[index]

    def append(self, record: TraceRecord) -> None:
        self.records.append(record)

    def deliveries(self) -> Iterator[TraceRecord]:
        return (r for r in self.records if r.kind == DELIVER_EVENT)

    def notices(self, *kinds: NoticeKind) -> Iterator[Tuple[TraceRecord, Notice]]:
        """Пары (запись, уведомление) указанных видов в порядке трассы."""
        wanted = set(kinds)
        for record in self.records:
            for notice in record.notices:
                if not wanted or notice.kind in wanted:
                    yield record, notice

    def to_jsonl(self, path: Union[str, Path], compress: bool = False) -> Path:
        """
        Сохраняет трассу: первая строка заголовок, далее по записи на строку.

        Args:
            path: Путь к файлу
            compress: Сжать gzip

        Returns:
            Путь к записанному файлу

        Raises:
            OutputError: При ошибке записи
        """
        path = Path(path)
        if compress and path.suffix != ".gz":
            path = path.with_name(path.name + ".gz")
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            opener = gzip.open if compress else open
            with opener(path, "wt", encoding="utf-8") as f:
                f.write(json.dumps({"header": self.header}, sort_keys=True) + "\n")
                for record in self.records:
                    f.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")
        except OSError as e:
            raise OutputError(f"Ошибка записи трассы {path}: {e}") from e
        logger.debug(f"Трасса сохранена: {path} ({len(self.records)} записей)")
        return path

    @classmethod
    def from_jsonl(cls, path: Union[str, Path]) -> "Trace":
        """
        Загружает трассу, записанную to_jsonl.

        Args:
            path: Путь к файлу (.jsonl или .jsonl.gz)

        Returns:
            Трасса

        Raises:
            TraceParseError: При ошибках формата
        """
        path = Path(path)
        if not path.exists():
            raise TraceParseError(f"Файл трассы не найден: {path}")

        opener = gzip.open if path.suffix == ".gz" else open
        try:
            with opener(path, "rt", encoding="utf-8") as f:
                lines = [line for line in f if line.strip()]
        except OSError as e:
            raise TraceParseError(f"Ошибка чтения трассы {path}: {e}") from e

        if not lines:
            raise TraceParseError(f"Пустая трасса: {path}")
        try:
            first = json.loads(lines[0])
            header = first["header"]
            records = [TraceRecord.from_dict(json.loads(line)) for line in lines[1:]]
        except (json.JSONDecodeError, KeyError, TypeError) as e:
            raise TraceParseError(f"Ошибка разбора трассы {path}: {e}") from e
        return cls(header=header, records=records)
