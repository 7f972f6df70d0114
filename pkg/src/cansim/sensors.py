"""Sensor models and the flight-side unit conversions.

Two directions live here. Forward models turn an
:class:`~cansim.atmos.EnvironmentState` into the raw register/ADC values the
flight computer would read (with noise and quantization). Inverse conversions
are what the flight computer runs to get engineering units back out; each one
is the algebraic inverse of its forward model, so the pair round-trips to
within quantization.
"""

from __future__ import annotations

import dataclasses
import math
import random
from dataclasses import dataclass

from .atmos import BARO_SCALE_M, GRAVITY_MPS2, ISA_EXPONENT, EnvironmentState

ADC_MAX = 4095          # 12-bit converter
ADC_VREF_V = 3.3
UV_VOLTS_PER_INDEX = 0.1

ACCEL_LSB_PER_G = 16384.0   # +/- 2 g full scale
GYRO_LSB_PER_DPS = 131.0    # +/- 250 deg/s full scale
MAG_LSB = 1090.0            # counts per gauss, field modeled as 0.4 gauss horizontal
MAG_FIELD_GAUSS = 0.4
INT16_MIN, INT16_MAX = -32768, 32767

# MQ-135 CO2 curve: ppm = A * (Rs/R0)^B, voltage divider with RL against a
# 5 V supply, output pre-scaled into the 3.3 V ADC range.
MQ135_A = 116.602
MQ135_B = -2.769
MQ135_R0_OHM = 76630.0
MQ135_RL_OHM = 10000.0
MQ135_SUPPLY_V = 5.0
MQ135_MAX_PPM = 2000.0

METERS_PER_DEG_LAT = 111320.0


class GgaError(ValueError):
    """Base for NMEA GGA parse failures."""


class ChecksumMismatch(GgaError):
    """Sentence checksum does not match its body."""


class MalformedField(GgaError):
    """Sentence structure or a field value is not parseable."""


class NotGga(GgaError):
    """Valid NMEA sentence of some other type; callers skip these."""


class DegenerateAccelError(ValueError):
    """Accelerometer vector too small to define an attitude."""


class InsufficientSamples(ValueError):
    """Not enough frames to calibrate."""


@dataclass(frozen=True)
class RawSensorFrame:
    """Register/ADC-level sensor outputs, as read over I2C/UART."""

    bmp_temp_centi_c: int
    bmp_pressure_pa: int
    uv_adc: int
    mq_adc: int
    accel_raw: tuple[int, int, int]
    gyro_raw: tuple[int, int, int]
    mag_raw: tuple[int, int, int]
    gga_sentence: str


@dataclass(frozen=True)
class CalibrationState:
    """Accelerometer/gyro offsets measured while stationary on the pad."""

    accel_offset_raw: tuple[int, int, int]
    gyro_bias_raw: tuple[int, int, int]
    calibrated_at_s: float


@dataclass(frozen=True)
class SensorNoiseConfig:
    """Per-channel gaussian noise levels; zero everywhere gives ideal sensors."""

    temp_sigma_c: float = 0.33       # 3 sigma ~ 1 degC
    pressure_sigma_pa: float = 12.0
    uv_sigma_counts: float = 2.0
    mq_sigma_counts: float = 4.0
    accel_sigma_mg: float = 8.0
    gps_sigma_m: float = 2.0

    def __post_init__(self) -> None:
        for name in ("temp_sigma_c", "pressure_sigma_pa", "uv_sigma_counts",
                     "mq_sigma_counts", "accel_sigma_mg", "gps_sigma_m"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


NOISELESS = SensorNoiseConfig(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


def _clamp(value: int, lo: int, hi: int) -> int:
    return lo if value < lo else hi if value > hi else value


# --- UV channel (GUVA-S12SD style: 0.1 V per index unit into the ADC) ---

def uv_forward(uv_index_true: float) -> int:
    """ADC counts for a continuous UV index; clamps at the 3.3 V rail."""
    if uv_index_true < 0:
        raise ValueError("UV index must be >= 0")
    voltage = min(uv_index_true * UV_VOLTS_PER_INDEX, ADC_VREF_V)
    return round(voltage / ADC_VREF_V * ADC_MAX)


def uv_from_adc(adc: int) -> tuple[float, int]:
    """(sensor voltage, integer UV index) from raw counts.

    The index is floor(voltage / 0.1 V): 0.27 V reads as index 2.
    """
    if not 0 <= adc <= ADC_MAX:
        raise ValueError(f"uv adc {adc} outside 0..{ADC_MAX}")
    voltage = adc / ADC_MAX * ADC_VREF_V
    return voltage, int(math.floor(voltage * 10.0))


# --- Air quality channel (MQ-135 resistance divider) ---

def mq135_forward(ppm: float) -> int:
    """ADC counts for a gas concentration; strictly increasing in ppm."""
    if ppm <= 0 or ppm > MQ135_MAX_PPM:
        raise ValueError(f"ppm must be in (0, {MQ135_MAX_PPM:.0f}]")
    rs = MQ135_R0_OHM * (ppm / MQ135_A) ** (1.0 / MQ135_B)
    vout = MQ135_SUPPLY_V * MQ135_RL_OHM / (MQ135_RL_OHM + rs)
    return _clamp(round(vout / ADC_VREF_V * ADC_MAX), 0, ADC_MAX)


def ppm_from_adc(adc: int) -> float:
    """Gas concentration from raw counts, clamped to [0, 2000] ppm."""
    if not 0 <= adc <= ADC_MAX:
        raise ValueError(f"mq adc {adc} outside 0..{ADC_MAX}")
    if adc == 0:
        return 0.0
    vout = adc / ADC_MAX * ADC_VREF_V
    rs = MQ135_RL_OHM * (MQ135_SUPPLY_V / vout - 1.0)
    ppm = MQ135_A * (rs / MQ135_R0_OHM) ** MQ135_B
    return min(max(ppm, 0.0), MQ135_MAX_PPM)


# --- Barometric altitude (BMP180 standard formula) ---

def altitude_from_pressure(p_pa: float, p0_pa: float) -> float:
    """h = 44330 * (1 - (p/p0)^(1/5.255)); negative when p exceeds p0."""
    if p_pa <= 0 or p0_pa <= 0:
        raise ValueError("pressures must be > 0")
    return BARO_SCALE_M * (1.0 - (p_pa / p0_pa) ** (1.0 / ISA_EXPONENT))


# --- IMU ---

def accel_from_raw(raw: int, offset: int = 0) -> float:
    """m/s^2 from a signed 16-bit register at 16384 LSB/g."""
    return (raw - offset) / ACCEL_LSB_PER_G * GRAVITY_MPS2


def attitude_from_imu(
    accel_mps2: tuple[float, float, float],
    mag_raw: tuple[float, float, float],
) -> tuple[float, float, float]:
    """(pitch, roll, yaw) in degrees from gravity direction plus compass.

    Pitch and roll come from the accelerometer assuming quasi-static flight;
    yaw from the magnetometer after de-rotating it by roll then pitch.
    """
    ax, ay, az = accel_mps2
    if math.sqrt(ax * ax + ay * ay + az * az) < 0.1:
        raise DegenerateAccelError("acceleration magnitude below 0.1 m/s^2")
    pitch = math.atan2(-ax, math.hypot(ay, az))
    roll = math.atan2(ay, az)

    mx, my, mz = mag_raw
    cr, sr = math.cos(roll), math.sin(roll)
    cp, sp = math.cos(pitch), math.sin(pitch)
    # Undo roll, then pitch, to get the horizontal field components.
    my1 = my * cr - mz * sr
    mz1 = my * sr + mz * cr
    mx1 = mx * cp + mz1 * sp
    yaw = math.atan2(my1, mx1)

    def wrap(deg: float) -> float:
        return (deg + 180.0) % 360.0 - 180.0

    return math.degrees(pitch), wrap(math.degrees(roll)), wrap(math.degrees(yaw))


def _mag_forward(pitch_deg: float, roll_deg: float, yaw_deg: float) -> tuple[int, int, int]:
    """Magnetometer counts for an attitude: horizontal unit field tilted into the body frame."""
    p = math.radians(pitch_deg)
    r = math.radians(roll_deg)
    y = math.radians(yaw_deg)
    lx, ly, lz = math.cos(y), math.sin(y), 0.0
    # Ry(-pitch) then Rx(-roll): exact inverse of the de-rotation above.
    vx = lx * math.cos(p) - lz * math.sin(p)
    vy = ly
    vz = lx * math.sin(p) + lz * math.cos(p)
    mx = vx
    my = vy * math.cos(r) + vz * math.sin(r)
    mz = -vy * math.sin(r) + vz * math.cos(r)
    scale = MAG_FIELD_GAUSS * MAG_LSB
    return (
        _clamp(round(mx * scale), INT16_MIN, INT16_MAX),
        _clamp(round(my * scale), INT16_MIN, INT16_MAX),
        _clamp(round(mz * scale), INT16_MIN, INT16_MAX),
    )


# --- GPS (NMEA 0183 GGA) ---

def _nmea_checksum(body: str) -> int:
    """XOR fold of every byte between '$' and '*'."""
    value = 0
    for ch in body:
        value ^= ord(ch)
    return value


def _format_ddmm(deg_abs: float, width: int) -> str:
    whole = int(deg_abs)
    minutes = (deg_abs - whole) * 60.0
    if minutes >= 59.999995:  # avoid printing 60.00000 after rounding
        whole += 1
        minutes = 0.0
    return f"{whole:0{width}d}{minutes:08.5f}"


def emit_gga(env: EnvironmentState, t_utc_s: float) -> str:
    """Build a $GPGGA sentence for the state's position, CRLF-terminated."""
    if not -90.0 <= env.lat_deg <= 90.0 or not -180.0 <= env.lon_deg <= 180.0:
        raise ValueError("position outside valid latitude/longitude range")
    t = t_utc_s % 86400.0
    hh = int(t // 3600)
    mm = int(t % 3600 // 60)
    ss = t % 60.0
    lat_field = _format_ddmm(abs(env.lat_deg), 2)
    lon_field = _format_ddmm(abs(env.lon_deg), 3)
    body = (
        f"GPGGA,{hh:02d}{mm:02d}{ss:05.2f},"
        f"{lat_field},{'N' if env.lat_deg >= 0 else 'S'},"
        f"{lon_field},{'E' if env.lon_deg >= 0 else 'W'},"
        f"1,08,1.0,{env.altitude_agl_m:.1f},M,0.0,M,,"
    )
    return f"${body}*{_nmea_checksum(body):02X}\r\n"


def _parse_ddmm(field: str, hemisphere: str, positive: str, negative: str) -> float:
    try:
        value = float(field)
    except ValueError as exc:
        raise MalformedField(f"bad coordinate field {field!r}") from exc
    degrees = int(value // 100)
    minutes = value - degrees * 100
    if minutes >= 60.0:
        raise MalformedField(f"minutes out of range in {field!r}")
    result = degrees + minutes / 60.0
    if hemisphere == negative:
        return -result
    if hemisphere == positive:
        return result
    raise MalformedField(f"bad hemisphere {hemisphere!r}")


def parse_gga(sentence: str) -> tuple[float, float, int, float]:
    """(lat_deg, lon_deg, fix_quality, altitude_m) from a GGA sentence.

    The checksum is validated before any field is interpreted. Raises
    :class:`ChecksumMismatch`, :class:`MalformedField`, or :class:`NotGga`
    (the last one meaning "valid, but some other sentence type").
    """
    text = sentence.rstrip("\r\n")
    if not text.startswith("$"):
        raise MalformedField("sentence must start with '$'")
    star = text.rfind("*")
    if star < 0 or len(text) - star != 3:
        raise MalformedField("sentence must end with '*HH' checksum")
    body, checksum_text = text[1:star], text[star + 1:]
    try:
        claimed = int(checksum_text, 16)
    except ValueError as exc:
        raise MalformedField(f"non-hex checksum {checksum_text!r}") from exc
    actual = _nmea_checksum(body)
    if claimed != actual:
        raise ChecksumMismatch(f"checksum {claimed:02X} != computed {actual:02X}")

    fields = body.split(",")
    if not fields[0].endswith("GGA"):
        raise NotGga(fields[0])
    if len(fields) != 15:
        raise MalformedField(f"GGA needs 15 fields, got {len(fields)}")

    lat = _parse_ddmm(fields[2], fields[3], "N", "S")
    lon = _parse_ddmm(fields[4], fields[5], "E", "W")
    try:
        fix_quality = int(fields[6])
        altitude_m = float(fields[9]) if fields[9] else 0.0
    except ValueError as exc:
        raise MalformedField("non-numeric fix quality or altitude") from exc
    return lat, lon, fix_quality, altitude_m


# --- Calibration ---

def calibrate(raw_frames: list[RawSensorFrame] | tuple[RawSensorFrame, ...],
              window_s: float = 2.0) -> CalibrationState:
    """Average stationary frames into accel offsets and gyro biases.

    The accel offset subtracts the 1 g the z axis sees on the pad, so a
    perfect sensor calibrates to (0, 0, 0).
    """
    frames = list(raw_frames)
    if len(frames) < 2:
        raise InsufficientSamples(f"need at least 2 frames, got {len(frames)}")
    n = len(frames)
    accel_mean = [sum(f.accel_raw[i] for f in frames) / n for i in range(3)]
    gyro_mean = [sum(f.gyro_raw[i] for f in frames) / n for i in range(3)]
    gravity = (0.0, 0.0, ACCEL_LSB_PER_G)
    return CalibrationState(
        accel_offset_raw=tuple(round(accel_mean[i] - gravity[i]) for i in range(3)),
        gyro_bias_raw=tuple(round(g) for g in gyro_mean),
        calibrated_at_s=window_s,
    )


# --- Forward sampling ---

def sample_sensors(env: EnvironmentState, noise: SensorNoiseConfig,
                   rng: random.Random) -> RawSensorFrame:
    """One raw frame: forward transfer of truth plus noise, quantized.

    Draws from ``rng`` in a fixed order, so a re-seeded stream reproduces the
    frame exactly.
    """
    temp_c = env.temperature_c + rng.gauss(0.0, noise.temp_sigma_c)
    pressure = env.pressure_pa + rng.gauss(0.0, noise.pressure_sigma_pa)

    uv = uv_forward(env.uv_index_true) + rng.gauss(0.0, noise.uv_sigma_counts)
    if env.air_quality_ppm > 0:
        mq = mq135_forward(min(env.air_quality_ppm, MQ135_MAX_PPM))
    else:
        mq = 0
    mq = mq + rng.gauss(0.0, noise.mq_sigma_counts)

    sigma_counts = noise.accel_sigma_mg * ACCEL_LSB_PER_G / 1000.0
    accel_raw = tuple(
        _clamp(round(a / GRAVITY_MPS2 * ACCEL_LSB_PER_G + rng.gauss(0.0, sigma_counts)),
               INT16_MIN, INT16_MAX)
        for a in env.accel_body_mps2
    )
    gyro_raw = tuple(
        _clamp(round(rate * GYRO_LSB_PER_DPS), INT16_MIN, INT16_MAX)
        for rate in env.gyro_rate_dps
    )
    mag_raw = _mag_forward(env.pitch_deg, env.roll_deg, env.yaw_deg)

    dlat = rng.gauss(0.0, noise.gps_sigma_m) / METERS_PER_DEG_LAT
    meters_per_deg_lon = METERS_PER_DEG_LAT * max(math.cos(math.radians(env.lat_deg)), 1e-6)
    dlon = rng.gauss(0.0, noise.gps_sigma_m) / meters_per_deg_lon
    gps_env = dataclasses.replace(env, lat_deg=env.lat_deg + dlat, lon_deg=env.lon_deg + dlon)

    return RawSensorFrame(
        bmp_temp_centi_c=round(temp_c * 100.0),
        bmp_pressure_pa=max(round(pressure), 0),
        uv_adc=_clamp(round(uv), 0, ADC_MAX),
        mq_adc=_clamp(round(mq), 0, ADC_MAX),
        accel_raw=accel_raw,
        gyro_raw=gyro_raw,
        mag_raw=mag_raw,
        gga_sentence=emit_gga(gps_env, env.t_s),
    )
