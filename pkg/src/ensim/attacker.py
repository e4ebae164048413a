"""Confused-deputy attack infrastructure.

Deputies are ordinary bystander devices whose scan results reach the
attacker (the embedded-SDK vector); the server aggregates their uploads,
picks identifiers harvested in the configured zones, and orders deputies
in the target zones to re-emit them, optionally with a blind XOR mask over
the encrypted metadata. The server object deliberately has no position:
only deputies stand inside the simulated country.

The relay machinery never touches key material. Tampering is ciphertext
XOR; selection uses only upload metadata (time, place). Key-dependent
work appears solely in `reidentify`, which runs on *published* keys, the
same public data every phone downloads.

Relay timing: an identifier heard at time h was broadcast during the
10-minute slot containing h (slot boundaries are public protocol
structure), and receivers tolerate `replay_horizon` (2 h) of clock skew
around that slot, so re-emission is productive until slot_end + horizon.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

from . import beacon, crypto
from .radio import Emission, Sighting

DEFAULT_RELAY_MAC = "f0:0d:00:00:00:01"


@dataclass(frozen=True)
class Zone:
    """Axis-aligned rectangle, bounds inclusive."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def contains(self, x: float, y: float) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max


@dataclass(frozen=True)
class AttackPolicy:
    """Targeting configuration.

    harvest_zones empty = accept uploads from anywhere; target_zones empty =
    relaying disabled (harvest-only operation). relay_window, when set,
    restricts emission to ages [start, end] measured from the harvested
    slot's start.
    """

    harvest_zones: tuple = ()
    target_zones: tuple = ()
    tamper_mask: Optional[bytes] = None
    relay_latency: int = 5
    collect_all: bool = False
    relay_window: Optional[tuple[int, int]] = None
    replay_horizon: int = 7200
    max_relays_per_deputy: Optional[int] = 1
    relay_mac: str = DEFAULT_RELAY_MAC

    def __post_init__(self):
        if self.relay_latency < 0:
            raise ValueError("relay_latency must be non-negative")
        if self.tamper_mask is not None and len(self.tamper_mask) != 4:
            raise ValueError("tamper_mask must be 4 bytes")


@dataclass(frozen=True)
class HarvestRecord:
    frame: beacon.BeaconFrame  # raw advertising bytes preserved on the frame
    rssi: float
    location: tuple[float, float]
    time: int
    deputy_id: str

    @property
    def payload(self) -> bytes:
        return self.frame.payload

    @property
    def mac(self) -> str:
        return self.frame.mac


@dataclass(frozen=True)
class RelayOrder:
    rpi: bytes
    aem: bytes  # already masked when the policy tampers
    deputy_id: str
    source: HarvestRecord


def tamper(aem: bytes, mask: bytes) -> bytes:
    """Blind ciphertext XOR; no decryption happens or is possible here."""
    if len(mask) != 4 or len(aem) != 4:
        raise ValueError("aem and mask are 4 bytes each")
    return bytes(a ^ m for a, m in zip(aem, mask))


def slot_start(harvest_time: int) -> int:
    return (harvest_time // crypto.INTERVAL_SECONDS) * crypto.INTERVAL_SECONDS


def slot_end(harvest_time: int) -> int:
    return slot_start(harvest_time) + crypto.INTERVAL_SECONDS


class AttackerServer:
    def __init__(self, policy: AttackPolicy):
        self.policy = policy
        self.db: list[HarvestRecord] = []
        self.plan_log: list[dict] = []
        # first in-zone hearing per identifier; selection works off this index.
        # First hearing is what matters: it starts the upload clock, and the
        # relay deadline depends only on the slot, which repeats hearings share.
        self._relay_candidates: dict[bytes, HarvestRecord] = {}

    # -- deputy side ------------------------------------------------------

    def deputy_on_scan(self, deputy_id: str, sighting: Sighting) -> Optional[HarvestRecord]:
        """Forward one hearing to the server. One hearing is all it takes."""
        if sighting.mac == self.policy.relay_mac:
            return None  # don't harvest our own re-emissions
        frame = beacon.decode(sighting.payload, sighting.mac)
        if not self.policy.collect_all and not isinstance(frame.kind, beacon.Gaen):
            return None
        record = HarvestRecord(
            frame=frame,
            rssi=sighting.rssi,
            location=sighting.rx_location,
            time=sighting.time,
            deputy_id=deputy_id,
        )
        self.db.append(record)
        if isinstance(frame.kind, beacon.Gaen) and self._in_harvest_zone(record):
            self._relay_candidates.setdefault(frame.kind.rpi, record)
        return record

    def _in_harvest_zone(self, record: HarvestRecord) -> bool:
        zones = self.policy.harvest_zones
        return not zones or any(z.contains(*record.location) for z in zones)

    # -- server side ------------------------------------------------------

    def relay_deadline(self, record: HarvestRecord) -> int:
        return slot_end(record.time) + self.policy.replay_horizon

    def select_relays(self, t: int, deputy_positions: dict) -> list[RelayOrder]:
        """Relay plan for time t; every decision is appended to the plan log."""
        pol = self.policy
        if not pol.target_zones:
            return []
        targets = [
            d for d in sorted(deputy_positions)
            if any(z.contains(*deputy_positions[d]) for z in pol.target_zones)
        ]
        if not targets:
            return []

        candidates: dict[bytes, HarvestRecord] = {}
        for rpi, r in self._relay_candidates.items():
            if r.time + pol.relay_latency > t:  # not uploaded yet
                continue
            if t > self.relay_deadline(r):
                continue
            if pol.relay_window is not None:
                age = t - slot_start(r.time)
                if not pol.relay_window[0] <= age <= pol.relay_window[1]:
                    continue
            candidates[rpi] = r

        # freshest first hearing first; ties broken by identifier bytes
        ranked = sorted(candidates.items(), key=lambda kv: (-kv[1].time, kv[0]))
        if pol.max_relays_per_deputy is not None:
            ranked = ranked[:pol.max_relays_per_deputy]

        orders = []
        for deputy in targets:
            for rpi, record in ranked:
                aem = record.frame.kind.aem
                if pol.tamper_mask is not None:
                    aem = tamper(aem, pol.tamper_mask)
                orders.append(RelayOrder(rpi=rpi, aem=aem, deputy_id=deputy, source=record))
                self.plan_log.append({
                    "t": t,
                    "deputy": deputy,
                    "rpi_hex": rpi.hex(),
                    "aem_hex": aem.hex(),
                    "tampered": pol.tamper_mask is not None,
                    "source_deputy": record.deputy_id,
                    "harvest_t": record.time,
                    "harvest_x": record.location[0],
                    "harvest_y": record.location[1],
                    "age_s": t - record.time,
                    "deadline_t": self.relay_deadline(record),
                })
        return orders

    def rebroadcast(self, order: RelayOrder, t: int, tx_power: int) -> Emission:
        """Emission a deputy makes for one plan entry, under the attacker's MAC."""
        payload = beacon.encode_gaen(order.rpi, order.aem)
        return Emission(
            node_id=order.deputy_id,
            payload=payload,
            mac=self.policy.relay_mac,
            tx_power=tx_power,
            relay=True,
        )

    # -- analysis over published keys --------------------------------------

    def reidentify(self, published) -> list[dict]:
        """Per published key: every harvested hearing of that person.

        Joins the key's regenerated identifiers against the harvest by exact
        identifier equality, so nothing is ever attributed to a key whose
        schedule does not contain the sighted identifier. Our own
        re-emissions are excluded by MAC.
        """
        gaen_records = [
            (r, r.frame.kind.rpi)
            for r in self.db
            if r.mac != self.policy.relay_mac and isinstance(r.frame.kind, beacon.Gaen)
        ]

        dossiers = []
        for entry in sorted(published, key=lambda e: e.tek.key.hex()):
            rpis = {r.rpi for r in crypto.regenerate_day(entry.tek)}
            hits = [
                {"t": r.time, "x": r.location[0], "y": r.location[1],
                 "rssi": r.rssi, "mac": r.mac}
                for r, rpi in gaen_records
                if rpi in rpis
            ]
            hits.sort(key=lambda h: (h["t"], h["x"], h["y"]))
            dossiers.append({"tek_hex": entry.tek.key.hex(), "sightings": hits})
        return dossiers

    def correlate_mac_rpi(self) -> list[dict]:
        """(mac, rpi) co-occurrence table: the linkage a side database joins on."""
        spans: dict[tuple[str, bytes], list[int]] = {}
        for r in self.db:
            kind = r.frame.kind
            if not isinstance(kind, beacon.Gaen):
                continue
            span = spans.setdefault((r.mac, kind.rpi), [r.time, r.time])
            span[0] = min(span[0], r.time)
            span[1] = max(span[1], r.time)
        rows = [
            {"mac": mac, "rpi_hex": rpi.hex(), "first_seen": lo, "last_seen": hi}
            for (mac, rpi), (lo, hi) in spans.items()
        ]
        rows.sort(key=lambda row: (row["first_seen"], row["mac"], row["rpi_hex"]))
        return rows


def plan_log_lines(plan_log) -> list[str]:
    return [json.dumps(entry) for entry in plan_log]


def dossier_json(dossiers) -> str:
    return json.dumps(dossiers, indent=2)
