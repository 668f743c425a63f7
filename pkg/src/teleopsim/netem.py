"""Deterministic emulation of one-way impaired links.

A channel applies a fixed base delay, a truncated-Gaussian jitter sample, an
optional serialization delay from a bandwidth cap, and (for datagram
channels) independent per-record loss. Ordered channels model a reliable
stream: FIFO delivery, never any drops. Every random draw comes from a
per-channel generator seeded from (seed, channel id), so adding a channel to
an experiment never perturbs another channel's draws.
"""

from __future__ import annotations

import hashlib
import heapq
from dataclasses import dataclass

import numpy as np


class ChannelError(RuntimeError):
    """Misuse of a channel: send after close, or non-monotone send times."""


@dataclass(frozen=True)
class ChannelSpec:
    """One-way link impairment parameters. Delays in microseconds.

    bandwidth_bps of 0 means infinite (no serialization delay). Jitter is a
    zero-mean Gaussian with sigma jitter_sigma_us, truncated so the total
    propagation delay never falls below min_delay_us. Ordered channels are
    FIFO and lossless; loss_prob applies to datagram channels only.
    """

    base_delay_us: int = 0
    jitter_sigma_us: float = 0.0
    min_delay_us: int = 0
    loss_prob: float = 0.0
    bandwidth_bps: float = 0.0
    ordered: bool = False
    seed: int | None = None

    def problems(self, path: str = "") -> list[str]:
        prefix = f"{path}." if path else ""
        out = []
        if self.min_delay_us < 0:
            out.append(f"{prefix}min_delay_us: must be >= 0")
        if self.base_delay_us < self.min_delay_us:
            out.append(f"{prefix}base_delay_us: must be >= min_delay_us")
        if self.jitter_sigma_us < 0:
            out.append(f"{prefix}jitter_sigma_us: must be >= 0")
        if not (0.0 <= self.loss_prob <= 1.0):
            out.append(f"{prefix}loss_prob: must be in [0, 1]")
        if self.bandwidth_bps < 0:
            out.append(f"{prefix}bandwidth_bps: must be >= 0 (0 = infinite)")
        return out


@dataclass(frozen=True)
class ScheduledDelivery:
    record_id: int
    send_time_us: int
    delivery_time_us: int
    size_bytes: int
    dropped: bool


def channel_rng(seed: int, channel_id: str) -> np.random.Generator:
    """Independent, portable per-channel stream derived from (seed, id)."""
    digest = hashlib.sha256(channel_id.encode("utf-8")).digest()
    sub = int.from_bytes(digest[:8], "big")
    return np.random.default_rng(np.random.SeedSequence([seed, sub]))


class EmulatedChannel:
    """Single-owner impaired link: one sender calls send, one receiver polls."""

    def __init__(self, spec: ChannelSpec, channel_id: str, seed: int = 0):
        problems = spec.problems()
        if problems:
            raise ValueError("; ".join(problems))
        self.spec = spec
        self.channel_id = channel_id
        self._rng = channel_rng(spec.seed if spec.seed is not None else seed, channel_id)
        self._pending: list[tuple[int, int, object]] = []  # (delivery_us, send idx, record)
        self._last_send_us: int | None = None
        self._last_delivery_us = 0
        self._next_id = 0
        self._closed = False
        self.sent = 0
        self.dropped = 0
        self.delivered = 0

    def send(self, record, now_us: int, size_bytes: int | None = None) -> ScheduledDelivery:
        """Schedule one record for delivery; returns the delivery ledger entry.

        Delivery time is now + max(min_delay, base_delay + jitter) plus the
        serialization time of size_bytes at the channel bandwidth. Ordered
        channels additionally clamp to the last scheduled delivery (FIFO);
        datagram channels may instead drop the record with loss_prob.
        """
        if self._closed:
            raise ChannelError(f"send on closed channel {self.channel_id!r}")
        if self._last_send_us is not None and now_us < self._last_send_us:
            raise ChannelError(
                f"non-monotone send time on {self.channel_id!r}: "
                f"{now_us} < {self._last_send_us}"
            )
        self._last_send_us = now_us
        if size_bytes is None:
            size_bytes = len(record) if hasattr(record, "__len__") else 0

        spec = self.spec
        delay = float(spec.base_delay_us)
        if spec.jitter_sigma_us > 0:
            delay += self._rng.normal(0.0, spec.jitter_sigma_us)
        delay = max(float(spec.min_delay_us), delay)
        if spec.bandwidth_bps > 0:
            delay += size_bytes * 8 * 1e6 / spec.bandwidth_bps
        delivery_us = now_us + int(round(delay))

        dropped = False
        if spec.ordered:
            delivery_us = max(delivery_us, self._last_delivery_us)
            self._last_delivery_us = delivery_us
        elif spec.loss_prob > 0:
            dropped = bool(self._rng.random() < spec.loss_prob)

        record_id = self._next_id
        self._next_id += 1
        self.sent += 1
        if dropped:
            self.dropped += 1
        else:
            heapq.heappush(self._pending, (delivery_us, record_id, record))
        return ScheduledDelivery(record_id, now_us, delivery_us, size_bytes, dropped)

    def poll(self, now_us: int) -> list[tuple[int, object]]:
        """Return all (delivery_time_us, record) due at or before now_us.

        Records come out in delivery-time order, ties broken by send order,
        and each record is returned exactly once.
        """
        due = []
        while self._pending and self._pending[0][0] <= now_us:
            delivery_us, _, record = heapq.heappop(self._pending)
            due.append((delivery_us, record))
            self.delivered += 1
        return due

    def pending(self) -> int:
        return len(self._pending)

    def next_delivery_us(self) -> int | None:
        """Delivery time of the earliest undelivered record, if any."""
        return self._pending[0][0] if self._pending else None

    def close(self) -> None:
        self._closed = True
