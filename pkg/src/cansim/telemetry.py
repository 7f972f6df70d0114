"""Wire protocol: 52-byte telemetry frames, CRC-16 integrity, stream resync.

Frame layout (little-endian, normative):

    offset  size  field
    0       2     sync 0xC5 0xA7
    2       1     version, currently 0x01
    3       1     flight phase (0..5)
    4       2     sequence counter, u16, wraps
    6       4     time since boot, u32 ms
    10      2     temperature, i16 centi-degC
    12      4     pressure, u32 Pa
    16      4     altitude, i32 cm
    20      2     uv adc counts, u16
    22      1     uv index, u8
    23      1     reserved, 0x00
    24      2     air quality, u16 ppm
    26      6     accel x/y/z, i16 milli-g each
    32      6     pitch/roll/yaw, i16 centi-degree each
    38      4     latitude, i32 in 1e-7 degree
    42      4     longitude, i32 in 1e-7 degree
    46      2     bus voltage, u16 mV
    48      2     bus current, u16 mA
    50      2     CRC-16/CCITT-FALSE over bytes [2..50)

The CRC excludes the sync word so that hunting for sync and checking
integrity stay independent.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterator, NamedTuple

SYNC = b"\xc5\xa7"
VERSION = 1
FRAME_LEN = 52
CRC_START, CRC_END = 2, 50

_PAYLOAD = struct.Struct("<BBHIhIiHBBHhhhhhhiiHH")
_CRC_FIELD = struct.Struct("<H")

MILLI_G = 9.80665 / 1000.0  # m/s^2 per milli-g


class FlightPhase(IntEnum):
    BOOT = 0
    CALIBRATING = 1
    READY = 2
    ASCENT = 3
    DESCENT = 4
    LANDED = 5


@dataclass(frozen=True)
class TelemetryRecord:
    """One engineering-unit telemetry sample; every field fits the wire scaling."""

    t_ms: int
    phase: FlightPhase
    temperature_c: float
    pressure_pa: float
    altitude_m: float
    uv_adc: int
    uv_index: int
    air_quality_ppm: float
    accel_mps2: tuple[float, float, float]
    pitch_deg: float
    roll_deg: float
    yaw_deg: float
    lat_deg: float
    lon_deg: float
    bus_voltage_v: float
    bus_current_ma: float


class DecodedFrame(NamedTuple):
    record: TelemetryRecord
    seq: int
    phase: FlightPhase


class FrameError(ValueError):
    """Base class for frame decode failures."""


class BadLength(FrameError):
    pass


class BadSync(FrameError):
    pass


class BadVersion(FrameError):
    pass


class CrcMismatch(FrameError):
    pass


class BadPhase(FrameError):
    pass


class BadReserved(FrameError):
    pass


class RangeOverflow(ValueError):
    """A record field does not fit its wire scaling."""

    def __init__(self, field_name: str, value: float) -> None:
        super().__init__(f"field {field_name}={value!r} outside wire range")
        self.field_name = field_name
        self.value = value


def _make_crc_table() -> tuple[int, ...]:
    table = []
    for byte in range(256):
        crc = byte << 8
        for _ in range(8):
            crc = ((crc << 1) ^ 0x1021) & 0xFFFF if crc & 0x8000 else (crc << 1) & 0xFFFF
        table.append(crc)
    return tuple(table)


_CRC_TABLE = _make_crc_table()


def crc16(data: bytes) -> int:
    """CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, unreflected, no final xor."""
    crc = 0xFFFF
    for byte in data:
        crc = ((crc << 8) & 0xFFFF) ^ _CRC_TABLE[(crc >> 8) ^ byte]
    return crc


def _scaled(value: float, scale: float, lo: int, hi: int, name: str) -> int:
    wire = round(value * scale)
    if not lo <= wire <= hi:
        raise RangeOverflow(name, value)
    return wire


def encode_frame(record: TelemetryRecord, seq: int, phase: FlightPhase | int | None = None) -> bytes:
    """Serialize a record into one 52-byte frame.

    ``phase`` defaults to ``record.phase``. Raises :class:`RangeOverflow`
    naming the first field that does not fit its wire scaling.
    """
    if phase is None:
        phase = record.phase
    phase = int(phase)
    if not 0 <= phase <= 5:
        raise RangeOverflow("phase", phase)
    if not 0 <= seq <= 0xFFFF:
        raise RangeOverflow("seq", seq)
    if not 0 <= record.t_ms <= 0xFFFFFFFF:
        raise RangeOverflow("t_ms", record.t_ms)

    ax, ay, az = record.accel_mps2
    payload = _PAYLOAD.pack(
        VERSION,
        phase,
        seq,
        record.t_ms,
        _scaled(record.temperature_c, 100.0, -32768, 32767, "temperature_c"),
        _scaled(record.pressure_pa, 1.0, 0, 0xFFFFFFFF, "pressure_pa"),
        _scaled(record.altitude_m, 100.0, -(2**31), 2**31 - 1, "altitude_m"),
        _scaled(record.uv_adc, 1.0, 0, 0xFFFF, "uv_adc"),
        _scaled(record.uv_index, 1.0, 0, 0xFF, "uv_index"),
        0,
        _scaled(record.air_quality_ppm, 1.0, 0, 0xFFFF, "air_quality_ppm"),
        _scaled(ax / MILLI_G, 1.0, -32768, 32767, "accel_x"),
        _scaled(ay / MILLI_G, 1.0, -32768, 32767, "accel_y"),
        _scaled(az / MILLI_G, 1.0, -32768, 32767, "accel_z"),
        _scaled(record.pitch_deg, 100.0, -32768, 32767, "pitch_deg"),
        _scaled(record.roll_deg, 100.0, -32768, 32767, "roll_deg"),
        _scaled(record.yaw_deg, 100.0, -32768, 32767, "yaw_deg"),
        _scaled(record.lat_deg, 1e7, -(2**31), 2**31 - 1, "lat_deg"),
        _scaled(record.lon_deg, 1e7, -(2**31), 2**31 - 1, "lon_deg"),
        _scaled(record.bus_voltage_v, 1000.0, 0, 0xFFFF, "bus_voltage_v"),
        _scaled(record.bus_current_ma, 1.0, 0, 0xFFFF, "bus_current_ma"),
    )
    frame = SYNC + payload
    return frame + _CRC_FIELD.pack(crc16(frame[CRC_START:CRC_END]))


def decode_frame(data: bytes) -> DecodedFrame:
    """Parse and validate one frame; exact inverse of :func:`encode_frame`.

    Validates, in order: length, sync, version, CRC, phase, reserved byte.
    """
    if len(data) != FRAME_LEN:
        raise BadLength(f"frame must be {FRAME_LEN} bytes, got {len(data)}")
    if data[:2] != SYNC:
        raise BadSync(f"bad sync {data[:2].hex()}")
    if data[2] != VERSION:
        raise BadVersion(f"unsupported version {data[2]}")
    (claimed,) = _CRC_FIELD.unpack_from(data, CRC_END)
    actual = crc16(data[CRC_START:CRC_END])
    if claimed != actual:
        raise CrcMismatch(f"crc {claimed:#06x} != computed {actual:#06x}")

    (_version, phase_raw, seq, t_ms, temp, pressure, alt_cm, uv_adc, uv_index,
     reserved, air_ppm, ax, ay, az, pitch, roll, yaw, lat, lon, bus_mv,
     bus_ma) = _PAYLOAD.unpack(data[CRC_START:CRC_END])

    if phase_raw > 5:
        raise BadPhase(f"phase {phase_raw} outside 0..5")
    if reserved != 0:
        raise BadReserved(f"reserved byte {reserved:#04x} != 0")

    phase = FlightPhase(phase_raw)
    record = TelemetryRecord(
        t_ms=t_ms,
        phase=phase,
        temperature_c=temp / 100.0,
        pressure_pa=float(pressure),
        altitude_m=alt_cm / 100.0,
        uv_adc=uv_adc,
        uv_index=uv_index,
        air_quality_ppm=float(air_ppm),
        accel_mps2=(ax * MILLI_G, ay * MILLI_G, az * MILLI_G),
        pitch_deg=pitch / 100.0,
        roll_deg=roll / 100.0,
        yaw_deg=yaw / 100.0,
        lat_deg=lat * 1e-7,
        lon_deg=lon * 1e-7,
        bus_voltage_v=bus_mv / 1000.0,
        bus_current_ma=float(bus_ma),
    )
    return DecodedFrame(record, seq, phase)


@dataclass
class DecodeStats:
    """Stream decoder health counters; all monotone non-decreasing."""

    frames_ok: int = 0
    crc_failures: int = 0
    resyncs: int = 0
    bytes_skipped: int = 0
    seq_gaps: int = 0
    frames_lost_estimate: int = 0

    def as_dict(self) -> dict[str, int]:
        return {
            "frames_ok": self.frames_ok,
            "crc_failures": self.crc_failures,
            "resyncs": self.resyncs,
            "bytes_skipped": self.bytes_skipped,
            "seq_gaps": self.seq_gaps,
            "frames_lost_estimate": self.frames_lost_estimate,
        }


class StreamDecoder:
    """Resynchronizing frame extractor over an arbitrarily-chunked byte stream.

    Feed bytes in any fragmentation; the decoded output and final stats
    depend only on the concatenated stream. On a failed candidate the scanner
    advances a single byte past the sync and rescans, so an intact frame is
    never lost to preceding garbage. A "resync" is one episode of discarding
    bytes, however long.
    """

    def __init__(self, stats: DecodeStats | None = None) -> None:
        self.stats = stats if stats is not None else DecodeStats()
        self._buf = bytearray()
        self._hunting = False
        self._last_seq: int | None = None

    def _skip(self, n: int) -> None:
        if n <= 0:
            return
        self.stats.bytes_skipped += n
        if not self._hunting:
            self.stats.resyncs += 1
            self._hunting = True

    def _accept(self, decoded: DecodedFrame) -> None:
        self.stats.frames_ok += 1
        self._hunting = False
        if self._last_seq is not None:
            gap = (decoded.seq - self._last_seq - 1) % 0x10000
            if gap:
                self.stats.seq_gaps += 1
                self.stats.frames_lost_estimate += gap
        self._last_seq = decoded.seq

    def feed(self, data: bytes) -> list[DecodedFrame]:
        """Consume a chunk and return every frame completed by it."""
        self._buf.extend(data)
        out: list[DecodedFrame] = []
        buf = self._buf
        while True:
            start = buf.find(SYNC[0])
            if start < 0:
                self._skip(len(buf))
                buf.clear()
                break
            if start > 0:
                self._skip(start)
                del buf[:start]
            if len(buf) < 2:
                break  # second sync byte may arrive later
            if buf[1] != SYNC[1]:
                self._skip(1)
                del buf[:1]
                continue
            if len(buf) < FRAME_LEN:
                break  # frame incomplete, wait for more bytes
            try:
                decoded = decode_frame(bytes(buf[:FRAME_LEN]))
            except CrcMismatch:
                self.stats.crc_failures += 1
                self._skip(1)
                del buf[:1]
                continue
            except FrameError:
                self._skip(1)
                del buf[:1]
                continue
            del buf[:FRAME_LEN]
            self._accept(decoded)
            out.append(decoded)
        return out

    def flush(self) -> None:
        """Declare end of stream: any buffered remnant is garbage."""
        self._skip(len(self._buf))
        self._buf.clear()

    @property
    def pending_bytes(self) -> int:
        return len(self._buf)


def stream_decode(data: bytes, stats: DecodeStats | None = None) -> tuple[list[DecodedFrame], DecodeStats]:
    """Decode a complete captured stream in one call."""
    decoder = StreamDecoder(stats)
    frames = decoder.feed(data)
    decoder.flush()
    return frames, decoder.stats


def iter_frames(data: bytes) -> Iterator[DecodedFrame]:
    """Iterate frames of a captured stream, ignoring stats."""
    yield from stream_decode(data)[0]
