"""Agent identity, registration and message routing kernel.

A platform owns the active-agent table, per-agent inboxes and the AMS
message log. The AMS registry agent is the first to activate; every
delivered message is copied to its log while it stays active, and peers
keep routing to each other even after the AMS is deactivated.
"""

from __future__ import annotations

import json
import threading
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

AMS_NAME = "ams"


class AclError(Exception):
    """Base class for platform failures."""


class DuplicateName(AclError):
    """Registration with a name already in the active-agent table."""


class UnknownReceiver(AclError):
    """Route target is not in the active-agent table."""


class Performative(str, Enum):
    REQUEST = "request"
    INFORM = "inform"
    FAILURE = "failure"
    CONFIRM = "confirm"


@dataclass(frozen=True)
class AgentId:
    """Unique name plus logical endpoint address."""

    name: str
    address: str = "local"

    def __post_init__(self) -> None:
        if not self.name:
            raise AclError("agent name must be non-empty")
        if not self.address:
            raise AclError("agent address must be non-empty")


@dataclass(frozen=True)
class AclMessage:
    performative: Performative
    sender: AgentId
    receiver: AgentId
    conversation_id: str
    content: str
    timestamp: int

    def __post_init__(self) -> None:
        if self.sender.name == self.receiver.name:
            raise AclError("sender and receiver must differ")
        if not self.conversation_id:
            raise AclError("conversation_id must be non-empty")

    def to_record(self) -> dict:
        return {
            "performative": self.performative.value,
            "sender": self.sender.name,
            "receiver": self.receiver.name,
            "conversation_id": self.conversation_id,
            "content": self.content,
            "timestamp": self.timestamp,
        }


@dataclass(frozen=True)
class DeliveryReceipt:
    delivered: bool
    receiver: str
    timestamp: int
    logged: bool


@dataclass
class AgentTable:
    """Name -> identity map with a strictly monotone version counter."""

    entries: dict[str, AgentId] = field(default_factory=dict)
    version: int = 0


class AgentPlatform:
    """In-process transport: single-consumer inboxes, thread-safe routing.

    Timestamps are logical ticks assigned at send time, so replaying a
    registration/traffic sequence reproduces the table and log exactly.
    ``log_capacity`` bounds the AMS log (None = unbounded, bench default).
    """

    def __init__(self, log_capacity: int | None = None):
        self._lock = threading.Lock()
        self.table = AgentTable()
        self._inboxes: dict[str, deque[AclMessage]] = {}
        self._log: deque[AclMessage] = deque(maxlen=log_capacity)
        self._tick = 0

    @classmethod
    def bootstrap(cls, log_capacity: int | None = None) -> "AgentPlatform":
        """Fresh platform with the AMS registry agent activated first."""
        platform = cls(log_capacity=log_capacity)
        platform.register(AgentId(AMS_NAME))
        return platform

    def _next_tick(self) -> int:
        self._tick += 1
        return self._tick

    def register(self, agent: AgentId) -> AgentTable:
        """Add an agent; notify previously registered agents of the update."""
        with self._lock:
            if agent.name in self.table.entries:
                raise DuplicateName(agent.name)
            peers = [name for name in self.table.entries if name != AMS_NAME]
            self.table.entries[agent.name] = agent
            self.table.version += 1
            self._inboxes[agent.name] = deque()
            self._notify_table_update(peers, f"registered:{agent.name}")
            return self.table

    def deactivate(self, name: str) -> AgentTable:
        """Remove an agent; later routes to it fail with UnknownReceiver."""
        with self._lock:
            if name not in self.table.entries:
                raise UnknownReceiver(name)
            del self.table.entries[name]
            del self._inboxes[name]
            self.table.version += 1
            peers = [n for n in self.table.entries if n != AMS_NAME]
            self._notify_table_update(peers, f"deactivated:{name}")
            return self.table

    def _notify_table_update(self, peers: list[str], change: str) -> None:
        # Called with the lock held. The AMS distributes the table change to
        # every other registered agent; skipped entirely when the AMS itself
        # is not active.
        if AMS_NAME not in self.table.entries:
            return
        ams = self.table.entries[AMS_NAME]
        for name in peers:
            msg = AclMessage(
                performative=Performative.INFORM,
                sender=ams,
                receiver=self.table.entries[name],
                conversation_id="table-update",
                content=change,
                timestamp=self._next_tick(),
            )
            self._deliver(msg)

    def _deliver(self, msg: AclMessage) -> bool:
        self._inboxes[msg.receiver.name].append(msg)
        logged = AMS_NAME in self.table.entries
        if logged:
            self._log.append(msg)
        return logged

    def send(
        self,
        sender: str,
        receiver: str,
        performative: Performative,
        conversation_id: str,
        content: str,
    ) -> DeliveryReceipt:
        """Build, stamp and route one message."""
        with self._lock:
            if sender not in self.table.entries:
                raise UnknownReceiver(f"sender not registered: {sender}")
            if receiver not in self.table.entries:
                raise UnknownReceiver(receiver)
            msg = AclMessage(
                performative=performative,
                sender=self.table.entries[sender],
                receiver=self.table.entries[receiver],
                conversation_id=conversation_id,
                content=content,
                timestamp=self._next_tick(),
            )
            logged = self._deliver(msg)
            return DeliveryReceipt(
                delivered=True, receiver=receiver, timestamp=msg.timestamp, logged=logged
            )

    def route(self, msg: AclMessage) -> DeliveryReceipt:
        """Route a pre-built message; the receiver must be in the table."""
        with self._lock:
            if msg.receiver.name not in self.table.entries:
                raise UnknownReceiver(msg.receiver.name)
            logged = self._deliver(msg)
            return DeliveryReceipt(
                delivered=True, receiver=msg.receiver.name, timestamp=msg.timestamp, logged=logged
            )

    def drain_inbox(self, name: str) -> list[AclMessage]:
        """Pop every pending message for one agent, in delivery order."""
        with self._lock:
            if name not in self._inboxes:
                raise UnknownReceiver(name)
            inbox = self._inboxes[name]
            drained = list(inbox)
            inbox.clear()
            return drained

    def inbox_size(self, name: str) -> int:
        with self._lock:
            if name not in self._inboxes:
                raise UnknownReceiver(name)
            return len(self._inboxes[name])

    @property
    def message_log(self) -> list[AclMessage]:
        with self._lock:
            return list(self._log)

    def export_log(self) -> str:
        """AMS log as line-delimited JSON records."""
        with self._lock:
            return "\n".join(json.dumps(m.to_record(), sort_keys=True) for m in self._log)
