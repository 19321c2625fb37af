"""Typed two-way classical messages and their line-delimited log.

One message per line: ordinal, sender, type, then the payload fields as
key=value tokens. Bit strings are ASCII '0'/'1'; id lists are
comma-separated; '-' stands for an empty list or an absent field. The log
round-trips through parse() so sessions can be replayed and audited.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Union


def _join(ids: Iterable[int]) -> str:
    items = [str(i) for i in ids]
    return ",".join(items) if items else "-"


def _split(text: str) -> tuple[int, ...]:
    return () if text == "-" else tuple(int(x) for x in text.split(","))


@dataclass(frozen=True)
class Received:
    """Receiver's receipt note: which rounds arrived complete, which did not."""

    received_ids: tuple[int, ...]
    lost_ids: tuple[int, ...]

    sender = "bob"
    kind = "received"

    def payload_fields(self) -> list[tuple[str, str]]:
        return [("received", _join(self.received_ids)), ("lost", _join(self.lost_ids))]


@dataclass(frozen=True)
class PairingAnnouncement:
    """Sender reveals, per round, which codeword pair encoded the bit.

    ``trits`` holds one value in {0,1,2} per announced round; ``discards``
    runs parallel to it for the quartet-then-discard variant and is None
    otherwise.
    """

    round_ids: tuple[int, ...]
    trits: tuple[int, ...]
    discards: tuple[int, ...] | None = None

    sender = "alice"
    kind = "pairing"

    def __post_init__(self):
        if len(self.trits) != len(self.round_ids):
            raise ValueError("one trit per announced round required")
        if any(t not in (0, 1, 2) for t in self.trits):
            raise ValueError("trits must lie in {0, 1, 2}")
        if self.discards is not None and len(self.discards) != len(self.round_ids):
            raise ValueError("one discard position per announced round required")

    def payload_fields(self) -> list[tuple[str, str]]:
        fields = [
            ("rounds", _join(self.round_ids)),
            ("trits", "".join(str(t) for t in self.trits) or "-"),
        ]
        if self.discards is not None:
            fields.append(("discards", _join(self.discards)))
        return fields


@dataclass(frozen=True)
class Verdicts:
    """Receiver announces which rounds were conclusive and which looked tampered."""

    conclusive_ids: tuple[int, ...]
    tamper_ids: tuple[int, ...]

    sender = "bob"
    kind = "verdicts"

    def payload_fields(self) -> list[tuple[str, str]]:
        return [("conclusive", _join(self.conclusive_ids)), ("tamper", _join(self.tamper_ids))]


@dataclass(frozen=True)
class TestSubset:
    """Positions (into the sifted key) sacrificed for error estimation."""

    indices: tuple[int, ...]

    sender = "alice"
    kind = "test_subset"
    __test__ = False  # not a pytest class, despite the name

    def payload_fields(self) -> list[tuple[str, str]]:
        return [("indices", _join(self.indices))]


@dataclass(frozen=True)
class BitReveal:
    party: str
    indices: tuple[int, ...]
    bits: str

    kind = "bit_reveal"

    def __post_init__(self):
        if self.party not in ("alice", "bob"):
            raise ValueError("party must be alice or bob")
        if len(self.bits) != len(self.indices) or any(b not in "01" for b in self.bits):
            raise ValueError("bits must be a 0/1 string parallel to indices")

    @property
    def sender(self) -> str:
        return self.party

    def payload_fields(self) -> list[tuple[str, str]]:
        return [("indices", _join(self.indices)), ("bits", self.bits or "-")]


@dataclass(frozen=True)
class Abort:
    party: str
    reason: str

    kind = "abort"

    @property
    def sender(self) -> str:
        return self.party

    def payload_fields(self) -> list[tuple[str, str]]:
        return [("reason", self.reason)]


Message = Union[Received, PairingAnnouncement, Verdicts, TestSubset, BitReveal, Abort]

_KINDS = {cls.kind: cls for cls in (Received, PairingAnnouncement, Verdicts, TestSubset, BitReveal, Abort)}


class Transcript:
    """Ordered classical-channel log for one session."""

    def __init__(self):
        self.messages: list[Message] = []

    def append(self, message: Message) -> None:
        self.messages.append(message)

    def kinds(self) -> list[str]:
        return [m.kind for m in self.messages]

    def first_index(self, kind: str) -> int | None:
        for i, m in enumerate(self.messages):
            if m.kind == kind:
                return i
        return None

    def lines(self) -> list[str]:
        out = []
        for ordinal, message in enumerate(self.messages):
            tokens = [str(ordinal), message.sender, message.kind]
            tokens += [f"{key}={value}" for key, value in message.payload_fields()]
            out.append(" ".join(tokens))
        return out

    def write(self, path: str | Path) -> None:
        Path(path).write_text("\n".join(self.lines()) + "\n")

    @staticmethod
    def parse_line(line: str) -> Message:
        tokens = line.split(" ")
        if len(tokens) < 3:
            raise ValueError(f"malformed transcript line: {line!r}")
        _, sender, kind = tokens[:3]
        fields = dict(token.split("=", 1) for token in tokens[3:])
        if kind == "received":
            return Received(_split(fields["received"]), _split(fields["lost"]))
        if kind == "pairing":
            trits_text = fields["trits"]
            trits = () if trits_text == "-" else tuple(int(t) for t in trits_text)
            discards = _split(fields["discards"]) if "discards" in fields else None
            return PairingAnnouncement(_split(fields["rounds"]), trits, discards)
        if kind == "verdicts":
            return Verdicts(_split(fields["conclusive"]), _split(fields["tamper"]))
        if kind == "test_subset":
            return TestSubset(_split(fields["indices"]))
        if kind == "bit_reveal":
            bits = fields["bits"]
            return BitReveal(sender, _split(fields["indices"]), "" if bits == "-" else bits)
        if kind == "abort":
            return Abort(sender, fields["reason"])
        raise ValueError(f"unknown message kind {kind!r}")

    @classmethod
    def parse(cls, text: str) -> "Transcript":
        transcript = cls()
        for line in text.splitlines():
            if line.strip():
                transcript.append(cls.parse_line(line))
        return transcript
