"""Two-endpoint classical channel with an optional protocol transcript.

Both BB84 parties run in one process and talk only through this channel, so a
real transport could replace it without touching the protocol code.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Any, TextIO


@dataclass(frozen=True)
class Message:
    sender: str
    kind: str
    payload: Any


def _summarize(payload) -> Any:
    # numpy arrays and long sequences are logged by length only
    if hasattr(payload, "shape"):
        return {"len": int(payload.shape[0])}
    if isinstance(payload, dict):
        return {k: _summarize(v) for k, v in payload.items()}
    if isinstance(payload, (list, tuple)) and len(payload) > 8:
        return {"len": len(payload)}
    if isinstance(payload, float):
        return round(payload, 6)
    return payload


@dataclass
class Transcript:
    """In-memory log of protocol messages, one record per message."""

    records: list[dict] = field(default_factory=list)

    def log(self, direction: str, kind: str, payload) -> None:
        self.records.append(
            {"seq": len(self.records), "direction": direction, "kind": kind,
             "payload": _summarize(payload)}
        )

    def dump(self, fh: TextIO) -> None:
        for rec in self.records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")

    def dumps(self) -> str:
        return "".join(json.dumps(rec, sort_keys=True) + "\n" for rec in self.records)


class Endpoint:
    def __init__(self, name: str, channel: ClassicalChannel):
        self.name = name
        self._channel = channel

    def send(self, kind: str, payload=None) -> None:
        self._channel._deliver(self.name, kind, payload)

    def recv(self, kind: str | None = None) -> Message:
        msg = self._channel._take(self.name)
        if kind is not None and msg.kind != kind:
            raise RuntimeError(f"{self.name} expected {kind!r}, got {msg.kind!r}")
        return msg


class ClassicalChannel:
    """Authenticated public channel between exactly two named parties.

    Messages are delivered in order per direction.
    """

    def __init__(self, a: str = "alice", b: str = "bob", transcript: Transcript | None = None):
        self._queues = {a: deque(), b: deque()}
        self._peer = {a: b, b: a}
        self.transcript = transcript
        self.endpoints = {a: Endpoint(a, self), b: Endpoint(b, self)}

    def endpoint(self, name: str) -> Endpoint:
        return self.endpoints[name]

    def _deliver(self, sender: str, kind: str, payload) -> None:
        peer = self._peer[sender]
        self._queues[peer].append(Message(sender, kind, payload))
        if self.transcript is not None:
            self.transcript.log(f"{sender}->{peer}", kind, payload)

    def _take(self, receiver: str) -> Message:
        q = self._queues[receiver]
        if not q:
            raise RuntimeError(f"no pending message for {receiver}")
        return q.popleft()

    def pending(self, name: str) -> int:
        return len(self._queues[name])
