"""Honest device state machine: key rotation, broadcast, storage, matching.

Matching semantics:

  * A stored sighting matches a published key when its payload carries one
    of the key's 144 regenerated identifiers AND its timestamp lies within
    `tolerance` (default 2 h) of that identifier's nominal 10-minute
    broadcast window. The wide tolerance is the protocol's replay window:
    an identifier heard once can be productively re-emitted for about two
    hours afterwards.
  * Matched sightings are scored by attenuation = claimed tx power (from
    the decrypted metadata) minus received rssi; only sightings at or
    below `attenuation_threshold` count as close. The claimed power is
    attacker-malleable, which is what makes metadata tampering matter.
  * Close matched sightings accumulate duration per (key, day), counting
    each tick at most once; a notification is emitted at
    `duration_threshold` (default 15 min).

Devices store every sighting unfiltered at receive time; all filtering
happens here at matching time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from random import Random
from typing import Optional

from . import beacon, crypto
from .radio import Sighting, attenuation

TEK_RETENTION_DAYS = 14


@dataclass(frozen=True)
class MatchingParams:
    tolerance: int = 7200
    attenuation_threshold: float = 55.0
    duration_threshold: int = 900
    tick: int = 1


@dataclass(frozen=True)
class ExposureNotification:
    matched_tek: crypto.TemporaryExposureKey
    day: int
    cumulative_duration: int
    min_attenuation: float


@dataclass
class DeviceState:
    id: str
    rng: Random
    tx_power: int = 0
    app_enabled: bool = True
    current_tek: Optional[crypto.TemporaryExposureKey] = None
    tek_history: list = field(default_factory=list)
    sightings: list = field(default_factory=list)
    notified: list = field(default_factory=list)
    mac_history: list = field(default_factory=list)  # (interval, mac) ground truth
    # cached per-interval broadcast state
    _interval: int = -1
    _mac: str = ""
    _rpik: bytes = b""
    _aemk: bytes = b""
    _rpi: bytes = b""


def _random_mac(rng: Random) -> str:
    raw = bytearray(rng.randbytes(6))
    raw[0] = (raw[0] & 0xFE) | 0x02  # locally administered, unicast
    return ":".join(f"{b:02x}" for b in raw)


def _roll_keys(state: DeviceState, t: int) -> None:
    interval = crypto.interval_number(t)
    day_start = crypto.day_start_interval(interval)
    if state.current_tek is None or state.current_tek.rolling_start != day_start:
        if state.current_tek is not None:
            state.tek_history.append(state.current_tek)
            del state.tek_history[:-(TEK_RETENTION_DAYS - 1)]
        state.current_tek = crypto.new_tek(state.rng, day_start)
        state._rpik = crypto.derive_rpik(state.current_tek)
        state._aemk = crypto.derive_aemk(state.current_tek)
        state._interval = -1
    if interval != state._interval:
        # identifier and MAC rotate together, on the same boundary
        state._interval = interval
        state._rpi = crypto.generate_rpi(state._rpik, interval).rpi
        state._mac = _random_mac(state.rng)
        state.mac_history.append((interval, state._mac))


def broadcast_current(state: DeviceState, t: int) -> Optional[beacon.BeaconFrame]:
    """The frame this device advertises at time t, or None while disabled."""
    if not state.app_enabled:
        return None
    _roll_keys(state, t)
    meta = crypto.Metadata(tx_power=state.tx_power)
    aem = crypto.encrypt_aem(state._aemk, state._rpi, meta)
    payload = beacon.encode_gaen(state._rpi, aem)
    return beacon.BeaconFrame(mac=state._mac, payload=payload, kind=beacon.Gaen(state._rpi, aem))


def on_scan(state: DeviceState, sighting: Sighting) -> None:
    state.sightings.append(sighting)


def diagnose_and_upload(state: DeviceState, server, t: int) -> list:
    """Publish the retained daily keys; the registry is world-readable."""
    teks = list(state.tek_history)
    if state.current_tek is not None:
        teks.append(state.current_tek)
    teks = teks[-TEK_RETENTION_DAYS:]
    server.publish(teks, t)
    return teks


def match_exposures(state: DeviceState, published_teks, params: MatchingParams) -> list:
    """Run exposure matching against published keys; appends to state.notified."""
    own = {tek.key for tek in state.tek_history}
    if state.current_tek is not None:
        own.add(state.current_tek.key)

    parsed = []
    for s in state.sightings:
        kind = beacon.decode(s.payload, s.mac).kind
        if isinstance(kind, beacon.Gaen):
            parsed.append((s.time, s.rssi, kind.rpi, kind.aem))

    notifications = []
    for tek in published_teks:
        if tek.key in own:
            continue
        aemk = crypto.derive_aemk(tek)
        rpi_interval = {r.rpi: r.interval for r in crypto.regenerate_day(tek)}
        matched_ticks: set[int] = set()
        min_att: Optional[float] = None
        for s_time, s_rssi, rpi, aem in parsed:
            interval = rpi_interval.get(rpi)
            if interval is None:
                continue
            window_start = interval * crypto.INTERVAL_SECONDS
            window_end = window_start + crypto.INTERVAL_SECONDS
            if not (window_start - params.tolerance <= s_time <= window_end + params.tolerance):
                continue
            meta = crypto.decrypt_aem(aemk, rpi, aem)
            att = attenuation(meta.tx_power, s_rssi)
            if att <= params.attenuation_threshold:
                matched_ticks.add(s_time)
                min_att = att if min_att is None else min(min_att, att)
        duration = len(matched_ticks) * params.tick
        if duration >= params.duration_threshold:
            note = ExposureNotification(
                matched_tek=tek,
                day=tek.rolling_start // crypto.INTERVALS_PER_DAY,
                cumulative_duration=duration,
                min_attenuation=min_att,
            )
            notifications.append(note)
            state.notified.append(note)
    return notifications
