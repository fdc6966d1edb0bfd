"""Domain types, radio energy arithmetic and packet sizing."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterator, Mapping

DEFAULT_HEADER_BYTES = 16
DEFAULT_PREAMBLE_BITS = 32
DEFAULT_BITRATE_BPS = 19200
MAX_PAYLOAD_BYTES = 127
MAX_EXTRA_PAYLOAD_BITS = 1023


class ConfigError(ValueError):
    """Bad configuration text or out-of-range parameter."""

    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        where = []
        if key is not None:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.key = key
        self.line = line


class RadioState(enum.IntEnum):
    TRANSMIT = 0
    RECEIVE = 1
    LISTEN = 2
    SLEEP = 3


class Direction(enum.Enum):
    UPSTREAM = "up"
    DOWNSTREAM = "down"
    BROADCAST = "broadcast"


@dataclass(frozen=True)
class Area:
    width_cm: float = 800.0
    height_cm: float = 500.0

    def __post_init__(self):
        if not (self.width_cm > 0 and self.height_cm > 0):
            raise ConfigError("area dimensions must be strictly positive")

    def contains(self, x: float, y: float) -> bool:
        return 0.0 <= x <= self.width_cm and 0.0 <= y <= self.height_cm


@dataclass(frozen=True)
class Position:
    x_cm: float
    y_cm: float


@dataclass(frozen=True)
class ChipsetProfile:
    name: str
    supply_voltage: float
    current_ma: Mapping[RadioState, float]
    bitrate_bps: float = DEFAULT_BITRATE_BPS
    preamble_bits: int = DEFAULT_PREAMBLE_BITS

    def __post_init__(self):
        missing = set(RadioState) - set(self.current_ma)
        if missing:
            raise ConfigError(f"chipset {self.name}: missing currents for {sorted(s.name for s in missing)}")
        cur = self.current_ma
        if any(v < 0 for v in cur.values()):
            raise ConfigError(f"chipset {self.name}: negative current")
        if not (cur[RadioState.SLEEP] < cur[RadioState.LISTEN]
                <= cur[RadioState.RECEIVE] <= cur[RadioState.TRANSMIT]):
            raise ConfigError(f"chipset {self.name}: currents must satisfy sleep < listen <= receive <= transmit")
        if self.bitrate_bps <= 0:
            raise ConfigError(f"chipset {self.name}: bitrate must be positive")
        if self.preamble_bits < 0:
            raise ConfigError(f"chipset {self.name}: preamble must be non-negative")

    def dominated_by(self, other: ChipsetProfile) -> bool:
        """True if this profile draws strictly less current than ``other`` in every state."""
        return all(self.current_ma[s] < other.current_ma[s] for s in RadioState)


@dataclass
class Packet:
    src: int
    origin_zone: int
    direction: Direction
    payload_bytes: int = 0
    extra_payload_bits: int = 0
    header_bytes: int = DEFAULT_HEADER_BYTES
    created_at: float = 0.0
    # simulator bookkeeping
    pid: int = 0
    retries: int = 0
    trace: list[int] = field(default_factory=list)

    def __post_init__(self):
        if not 0 <= self.payload_bytes <= MAX_PAYLOAD_BYTES:
            raise ConfigError(f"payload_bytes must be in [0, {MAX_PAYLOAD_BYTES}]")
        if not 0 <= self.extra_payload_bits <= MAX_EXTRA_PAYLOAD_BITS:
            raise ConfigError(f"extra_payload_bits must be in [0, {MAX_EXTRA_PAYLOAD_BITS}]")
        if self.header_bytes < 0:
            raise ConfigError("header_bytes must be non-negative")


@dataclass(frozen=True)
class EnergyAccount:
    state_durations: Mapping[RadioState, float] = field(
        default_factory=lambda: {s: 0.0 for s in RadioState})
    energy_joules: float = 0.0

    @property
    def elapsed(self) -> float:
        return sum(self.state_durations.values())


def power_draw(profile: ChipsetProfile, state: RadioState) -> float:
    """Electrical power in watts drawn in ``state``."""
    return profile.supply_voltage * profile.current_ma[state] / 1000.0


def packet_bits(pkt: Packet, profile: ChipsetProfile) -> int:
    return profile.preamble_bits + 8 * (pkt.header_bytes + pkt.payload_bytes) + pkt.extra_payload_bits


def airtime(bits: float, profile: ChipsetProfile) -> float:
    if bits < 0:
        raise ValueError("bits must be non-negative")
    return bits / profile.bitrate_bps


def accumulate(account: EnergyAccount, state: RadioState, duration: float,
               profile: ChipsetProfile) -> EnergyAccount:
    """Return a new account with ``duration`` seconds spent in ``state``."""
    if duration < 0:
        raise ValueError(f"negative duration {duration}")
    durations = dict(account.state_durations)
    durations[state] = durations.get(state, 0.0) + duration
    return EnergyAccount(durations, account.energy_joules + power_draw(profile, state) * duration)


def energy_from_durations(durations: Mapping[RadioState, float], profile: ChipsetProfile) -> float:
    return sum(power_draw(profile, s) * d for s, d in durations.items())


# -- structured text ---------------------------------------------------------

def iter_key_values(text: str) -> Iterator[tuple[int, str, str]]:
    """Yield ``(line_no, key, value)`` for ``key = value`` lines.

    ``#`` starts a comment; blank lines are skipped.  Section headers such
    as ``[chipset]`` are yielded with an empty value and the bracketed name
    as key.
    """
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            yield lineno, line, ""
            continue
        if "=" not in line:
            raise ConfigError(f"malformed line {raw.strip()!r}, expected 'key = value'", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError("empty key", line=lineno)
        yield lineno, key, value


_PROFILE_KEYS = {
    "name", "voltage_v", "i_tx_ma", "i_rx_ma", "i_listen_ma", "i_sleep_ma",
    "bitrate_bps", "preamble_bits",
}


def parse_profiles(text: str) -> dict[str, ChipsetProfile]:
    """Parse a chipset profile file: one ``[chipset]`` record per radio."""
    records: list[tuple[int, dict[str, tuple[int, str]]]] = []
    for lineno, key, value in iter_key_values(text):
        if key == "[chipset]":
            records.append((lineno, {}))
            continue
        if key.startswith("["):
            raise ConfigError(f"unknown section {key}", line=lineno)
        if not records:
            raise ConfigError("key outside a [chipset] record", key=key, line=lineno)
        if key not in _PROFILE_KEYS:
            raise ConfigError("unknown chipset key", key=key, line=lineno)
        records[-1][1][key] = (lineno, value)

    profiles: dict[str, ChipsetProfile] = {}
    for start, rec in records:
        missing = _PROFILE_KEYS - set(rec) - {"bitrate_bps", "preamble_bits"}
        if missing:
            raise ConfigError(f"chipset record missing {sorted(missing)}", line=start)

        def num(key: str, default: float | None = None) -> float:
            if key not in rec:
                return default
            line, value = rec[key]
            try:
                return float(value)
            except ValueError:
                raise ConfigError(f"not a number: {value!r}", key=key, line=line) from None

        name = rec["name"][1]
        try:
            profiles[name] = ChipsetProfile(
                name=name,
                supply_voltage=num("voltage_v"),
                current_ma={
                    RadioState.TRANSMIT: num("i_tx_ma"),
                    RadioState.RECEIVE: num("i_rx_ma"),
                    RadioState.LISTEN: num("i_listen_ma"),
                    RadioState.SLEEP: num("i_sleep_ma"),
                },
                bitrate_bps=num("bitrate_bps", DEFAULT_BITRATE_BPS),
                preamble_bits=int(num("preamble_bits", DEFAULT_PREAMBLE_BITS)),
            )
        except ConfigError as exc:
            raise ConfigError(str(exc), line=start) from None
    return profiles


def format_profiles(profiles: Mapping[str, ChipsetProfile]) -> str:
    out = []
    for p in profiles.values():
        c = p.current_ma
        out += [
            "[chipset]",
            f"name = {p.name}",
            f"voltage_v = {p.supply_voltage!r}",
            f"i_tx_ma = {c[RadioState.TRANSMIT]!r}",
            f"i_rx_ma = {c[RadioState.RECEIVE]!r}",
            f"i_listen_ma = {c[RadioState.LISTEN]!r}",
            f"i_sleep_ma = {c[RadioState.SLEEP]!r}",
            f"bitrate_bps = {p.bitrate_bps!r}",
            f"preamble_bits = {p.preamble_bits}",
            "",
        ]
    return "\n".join(out)


def load_profiles(path: str | Path | None = None) -> dict[str, ChipsetProfile]:
    """Load chipset profiles from ``path`` or the bundled defaults."""
    if path is None:
        text = resources.files("wsn_sched").joinpath("data/chipsets.txt").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return parse_profiles(text)
