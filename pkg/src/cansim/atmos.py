"""Ground-truth atmosphere and flight kinematics.

Everything here is a pure function of (time, profile): no randomness, no
hidden state. Sensor noise is added downstream, in :mod:`cansim.sensors`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

GRAVITY_MPS2 = 9.80665

# Barometric constants. The altitude scale 44330 m equals T0/L for the
# reference atmosphere baked into the standard BMP180 altitude formula;
# sharing one constant between the forward model and the inverse makes the
# pressure<->altitude round trip exact.
ISA_LAPSE_K_PER_M = 0.0065
ISA_EXPONENT = 5.255
BARO_SCALE_M = 44330.0

STANDARD_SEA_LEVEL_PA = 101325.0

# UV model: +1% per 100 m of altitude, clouds attenuate up to 50%.
UV_ALTITUDE_GAIN_PER_M = 0.0001
UV_CLOUD_ATTENUATION = 0.5


@dataclass(frozen=True)
class FlightProfile:
    """Mission flight profile: pad location, kinematic rates, base environment."""

    ground_altitude_m: float = 0.0
    apogee_agl_m: float = 60.0
    ascent_rate_mps: float = 10.0
    descent_rate_mps: float = 4.0
    launch_time_s: float = 5.0
    ground_temperature_c: float = 32.66
    sea_level_pressure_pa: float = STANDARD_SEA_LEVEL_PA
    base_uv_index: float = 2.7
    cloud_factor: float = 0.0
    base_air_quality_ppm: float = 83.0
    ground_lat_deg: float = 20.278863
    ground_lon_deg: float = 72.878662
    drift_rate_deg_per_s: float = 1e-5
    heading_deg: float = 0.0
    swing_amplitude_deg: float = 15.0
    swing_period_s: float = 4.0
    descent_spin_dps: float = 10.0

    def __post_init__(self) -> None:
        if self.apogee_agl_m <= 0:
            raise ValueError("apogee_agl_m must be > 0")
        if self.ascent_rate_mps <= 0:
            raise ValueError("ascent_rate_mps must be > 0")
        if self.descent_rate_mps <= 0:
            raise ValueError("descent_rate_mps must be > 0")
        if not 0.0 <= self.cloud_factor <= 1.0:
            raise ValueError("cloud_factor must be in [0, 1]")
        if not 0.0 <= self.base_air_quality_ppm <= 2000.0:
            raise ValueError("base_air_quality_ppm must be in [0, 2000]")
        if self.sea_level_pressure_pa <= 0:
            raise ValueError("sea_level_pressure_pa must be > 0")
        if not 0.0 <= self.swing_amplitude_deg <= 20.0:
            raise ValueError("swing_amplitude_deg must be in [0, 20]")
        if self.swing_period_s <= 0:
            raise ValueError("swing_period_s must be > 0")
        if self.launch_time_s < 0:
            raise ValueError("launch_time_s must be >= 0")

    @property
    def ascent_duration_s(self) -> float:
        return self.apogee_agl_m / self.ascent_rate_mps

    @property
    def descent_duration_s(self) -> float:
        return self.apogee_agl_m / self.descent_rate_mps

    @property
    def apogee_time_s(self) -> float:
        return self.launch_time_s + self.ascent_duration_s

    @property
    def landing_time_s(self) -> float:
        return self.apogee_time_s + self.descent_duration_s


@dataclass(frozen=True)
class EnvironmentState:
    """Physical truth at one simulation instant (what an ideal sensor would see)."""

    t_s: float
    altitude_agl_m: float
    temperature_c: float
    pressure_pa: float
    uv_index_true: float
    air_quality_ppm: float
    lat_deg: float
    lon_deg: float
    pitch_deg: float
    roll_deg: float
    yaw_deg: float
    accel_body_mps2: tuple[float, float, float]
    gyro_rate_dps: tuple[float, float, float]


def pressure_at_altitude(h_m: float, p0_pa: float, t0_c: float | None = None) -> float:
    """Barometric pressure at altitude ``h_m`` above the ``p0_pa`` reference level.

    p = p0 * (1 - h/H)^5.255, where H = T0/L. With ``t0_c`` omitted, H is the
    44330 m scale of the standard BMP180 altitude formula, making this the
    exact inverse of :func:`cansim.sensors.altitude_from_pressure`. Passing a
    reference temperature rescales H to (t0_c + 273.15)/0.0065.
    """
    if p0_pa <= 0:
        raise ValueError("reference pressure must be > 0")
    if t0_c is None:
        scale_m = BARO_SCALE_M
    else:
        scale_m = (t0_c + 273.15) / ISA_LAPSE_K_PER_M
    if h_m >= scale_m:
        raise ValueError(f"altitude {h_m} m is at or beyond the model ceiling {scale_m:.0f} m")
    return p0_pa * (1.0 - h_m / scale_m) ** ISA_EXPONENT


def temperature_at_altitude(h_m: float, ground_temp_c: float) -> float:
    """Linear lapse: 0.0065 degC colder per meter of altitude."""
    if h_m < 0:
        raise ValueError("altitude must be >= 0")
    return ground_temp_c - ISA_LAPSE_K_PER_M * h_m


def uv_index_at_altitude(h_m: float, base_uv: float, cloud_factor: float) -> float:
    """Continuous UV index: grows with altitude, attenuated by cloud cover."""
    if base_uv < 0:
        raise ValueError("base UV index must be >= 0")
    if not 0.0 <= cloud_factor <= 1.0:
        raise ValueError("cloud_factor must be in [0, 1]")
    return base_uv * (1.0 + UV_ALTITUDE_GAIN_PER_M * h_m) * (1.0 - UV_CLOUD_ATTENUATION * cloud_factor)


def altitude_agl_at(t_s: float, profile: FlightProfile) -> float:
    """Piecewise-linear altitude above ground: pad, ascent, descent, landed."""
    if t_s < profile.launch_time_s:
        return 0.0
    if t_s < profile.apogee_time_s:
        return (t_s - profile.launch_time_s) * profile.ascent_rate_mps
    if t_s < profile.landing_time_s:
        return profile.apogee_agl_m - (t_s - profile.apogee_time_s) * profile.descent_rate_mps
    return 0.0


def _wrap_deg(angle: float) -> float:
    """Wrap an angle to [-180, 180)."""
    return (angle + 180.0) % 360.0 - 180.0


def _body_accel_and_gyro(
    t_s: float, profile: FlightProfile
) -> tuple[float, float, float, tuple[float, float, float], tuple[float, float, float]]:
    """Attitude (pitch, roll, yaw deg), body specific force, and body rates.

    On the pad and during ascent the vehicle hangs level; under parachute it
    swings sinusoidally in pitch/roll and spins slowly in yaw. The
    accelerometer model is quasi-static: it reads the gravity reaction
    rotated into the body frame, so attitude is recoverable from it.
    """
    descending = profile.apogee_time_s <= t_s < profile.landing_time_s
    if descending:
        tau = t_s - profile.apogee_time_s
        omega = 2.0 * math.pi / profile.swing_period_s
        amp = profile.swing_amplitude_deg
        pitch = amp * math.sin(omega * tau)
        roll = amp * math.sin(omega * tau + math.pi / 2.0)
        yaw = _wrap_deg(profile.heading_deg + profile.descent_spin_dps * tau)
        pitch_rate = amp * omega * math.cos(omega * tau)
        roll_rate = amp * omega * math.cos(omega * tau + math.pi / 2.0)
        yaw_rate = profile.descent_spin_dps
    else:
        pitch = roll = 0.0
        yaw = _wrap_deg(profile.heading_deg)
        pitch_rate = roll_rate = yaw_rate = 0.0

    p = math.radians(pitch)
    r = math.radians(roll)
    g = GRAVITY_MPS2
    accel = (-g * math.sin(p), g * math.cos(p) * math.sin(r), g * math.cos(p) * math.cos(r))
    gyro = (roll_rate, pitch_rate, yaw_rate)
    return pitch, roll, yaw, accel, gyro


def environment_at(t_s: float, profile: FlightProfile) -> EnvironmentState:
    """Full truth state at mission time ``t_s``. Pure and deterministic."""
    if t_s < 0:
        raise ValueError("time must be >= 0")
    alt_agl = altitude_agl_at(t_s, profile)
    alt_amsl = profile.ground_altitude_m + alt_agl

    lat = profile.ground_lat_deg
    lon = profile.ground_lon_deg
    if t_s >= profile.apogee_time_s:
        # Parachute drift, eastward, frozen at touchdown.
        drift_s = min(t_s, profile.landing_time_s) - profile.apogee_time_s
        lon = lon + profile.drift_rate_deg_per_s * drift_s

    pitch, roll, yaw, accel, gyro = _body_accel_and_gyro(t_s, profile)

    return EnvironmentState(
        t_s=t_s,
        altitude_agl_m=alt_agl,
        temperature_c=temperature_at_altitude(alt_agl, profile.ground_temperature_c),
        pressure_pa=pressure_at_altitude(alt_amsl, profile.sea_level_pressure_pa),
        uv_index_true=uv_index_at_altitude(alt_agl, profile.base_uv_index, profile.cloud_factor),
        air_quality_ppm=profile.base_air_quality_ppm,
        lat_deg=lat,
        lon_deg=lon,
        pitch_deg=pitch,
        roll_deg=roll,
        yaw_deg=yaw,
        accel_body_mps2=accel,
        gyro_rate_dps=gyro,
    )
