from __future__ import annotations

import enum


class Tri(str, enum.Enum):
    """Three-valued answer used for declared flags and verdicts."""

    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"

    @classmethod
    def coerce(cls, value) -> "Tri":
        if isinstance(value, Tri):
            return value
        if value is True:
            return cls.YES
        if value is False:
            return cls.NO
        if value is None:
            return cls.UNKNOWN
        return cls(str(value).lower())

    def __bool__(self) -> bool:  # pragma: no cover - guard against misuse
        raise TypeError("Tri has no truth value; compare against Tri.YES explicitly")


def all_of(*values: Tri) -> Tri:
    if any(v is Tri.NO for v in values):
        return Tri.NO
    if all(v is Tri.YES for v in values):
        return Tri.YES
    return Tri.UNKNOWN
