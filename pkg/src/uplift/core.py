"""Small value types shared by the engine, the trusted parties and the reductions."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Any, FrozenSet, Iterable, Iterator, Optional, Tuple

from .errors import SpecError

BROADCAST = 0


class _Absent:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "ABSENT"

    def __reduce__(self):
        return (_Absent, ())


ABSENT = _Absent()


@dataclass(frozen=True)
class Bot:
    """Abort output.  ``identified`` is empty for a plain abort."""

    identified: FrozenSet[int] = frozenset()

    def __repr__(self) -> str:
        if not self.identified:
            return "Bot()"
        return f"Bot({sorted(self.identified)})"


def is_bot(value: Any) -> bool:
    return isinstance(value, Bot)


@dataclass(frozen=True)
class Committee:
    members: Tuple[int, ...]

    def __post_init__(self):
        members = tuple(sorted(set(int(m) for m in self.members)))
        if not members:
            raise SpecError("a committee must be nonempty")
        if members[0] < 1:
            raise SpecError("party ids start at 1")
        object.__setattr__(self, "members", members)

    @classmethod
    def of(cls, members: Iterable[int]) -> "Committee":
        return cls(tuple(members))

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, pid: object) -> bool:
        return pid in self.members

    @property
    def lowest(self) -> int:
        return self.members[0]

    def as_set(self) -> FrozenSet[int]:
        return frozenset(self.members)

    def check_within(self, n: int) -> None:
        if self.members[-1] > n:
            raise SpecError(f"committee {self.members} exceeds party count {n}")

    def __repr__(self) -> str:
        return "C{" + ", ".join(str(m) for m in self.members) + "}"


def digest(payload: Any) -> str:
    """Short stable hash used in transcripts in place of payloads."""
    return hashlib.blake2b(repr(payload).encode(), digest_size=8).hexdigest()


def jsonable(value: Any) -> Any:
    """Best-effort conversion of outputs and parameters to JSON values."""
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    if isinstance(value, Bot):
        return {"bot": sorted(value.identified)}
    if isinstance(value, Committee):
        return list(value.members)
    if isinstance(value, (bytes, bytearray)):
        return bytes(value).hex()
    if isinstance(value, (frozenset, set)):
        return sorted(jsonable(v) for v in value)
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if value is ABSENT:
        return "ABSENT"
    return repr(value)
