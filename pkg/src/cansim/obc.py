"""Flight computer: calibrate, sample, convert, frame — once per tick.

The state machine only ever moves forward through
BOOT -> CALIBRATING -> READY -> ASCENT -> DESCENT -> LANDED, and it never
reads simulation truth: everything downstream of :func:`Obc.step` is derived
from raw sensor frames, exactly as real firmware would.
"""

from __future__ import annotations

import dataclasses
import random
from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

from . import power, sensors, telemetry
from .atmos import EnvironmentState, STANDARD_SEA_LEVEL_PA
from .sensors import (
    CalibrationState,
    GgaError,
    RawSensorFrame,
    SensorNoiseConfig,
    accel_from_raw,
    altitude_from_pressure,
    attitude_from_imu,
    calibrate,
    parse_gga,
    ppm_from_adc,
    uv_from_adc,
)
from .telemetry import FlightPhase, TelemetryRecord, encode_frame

DEFAULT_SAMPLE_PERIOD_S = 1.0
DEFAULT_CALIBRATION_WINDOW_S = 2.0
ALTITUDE_WINDOW_SAMPLES = 8


@dataclass(frozen=True)
class PhaseDetectConfig:
    """Thresholds for the flight-phase transitions."""

    ascent_rise_m: float = 2.0       # above pad reference
    descent_drop_m: float = 1.0      # below running peak
    landed_altitude_m: float = 1.0
    landed_rate_mps: float = 0.2
    landed_dwell_samples: int = 3


def detect_phase(
    history: Sequence[tuple[float, float]],
    phase: FlightPhase,
    cfg: PhaseDetectConfig = PhaseDetectConfig(),
    pad_altitude_m: float | None = None,
    peak_altitude_m: float | None = None,
) -> FlightPhase:
    """Next phase from a chronological window of (t_s, altitude_m) samples.

    Forward-only. The pad reference defaults to the oldest sample in the
    window and the peak to the window maximum; long-running callers should
    pass their own anchored values. The ascent test smooths over the last
    three samples to ride out barometric noise.
    """
    if len(history) < 3:
        raise ValueError("history must hold at least 3 samples")
    alts = [alt for _, alt in history]
    latest = alts[-1]

    if phase == FlightPhase.READY:
        pad = pad_altitude_m if pad_altitude_m is not None else alts[0]
        smoothed = sum(alts[-3:]) / 3.0
        if smoothed - pad > cfg.ascent_rise_m:
            return FlightPhase.ASCENT
        return phase

    if phase == FlightPhase.ASCENT:
        peak = max(alts)
        if peak_altitude_m is not None:
            peak = max(peak, peak_altitude_m)
        if peak - latest > cfg.descent_drop_m:
            return FlightPhase.DESCENT
        return phase

    if phase == FlightPhase.DESCENT:
        need = cfg.landed_dwell_samples
        if len(history) < need + 1:
            return phase
        recent = list(history)[-(need + 1):]
        for (t0, a0), (t1, a1) in zip(recent, recent[1:]):
            rate = abs(a1 - a0) / (t1 - t0)
            if a1 >= cfg.landed_altitude_m or rate >= cfg.landed_rate_mps:
                return phase
        return FlightPhase.LANDED

    return phase


def build_record(
    raw: RawSensorFrame,
    cal: CalibrationState,
    t_ms: int,
    phase: FlightPhase,
    power_bus: tuple[float, float],
    p0_pa: float = STANDARD_SEA_LEVEL_PA,
    previous: Optional[TelemetryRecord] = None,
) -> TelemetryRecord:
    """Convert one raw frame to engineering units.

    Any conversion that rejects its input (zero pressure, degenerate accel,
    mangled GPS sentence) falls back to the matching field of ``previous``
    rather than raising: the flight computer degrades, it does not abort.
    """
    _, uv_index = uv_from_adc(raw.uv_adc)  # voltage is derivable from uv_adc
    ppm = ppm_from_adc(raw.mq_adc)
    accel = tuple(
        accel_from_raw(raw.accel_raw[i], cal.accel_offset_raw[i]) for i in range(3)
    )

    try:
        altitude_m = altitude_from_pressure(float(raw.bmp_pressure_pa), p0_pa)
    except ValueError:
        altitude_m = previous.altitude_m if previous else 0.0

    try:
        pitch, roll, yaw = attitude_from_imu(accel, raw.mag_raw)
    except sensors.DegenerateAccelError:
        if previous is not None:
            pitch, roll, yaw = previous.pitch_deg, previous.roll_deg, previous.yaw_deg
        else:
            pitch = roll = yaw = 0.0

    try:
        lat, lon, _fix, _gga_alt = parse_gga(raw.gga_sentence)
    except GgaError:
        lat = previous.lat_deg if previous else 0.0
        lon = previous.lon_deg if previous else 0.0

    bus_voltage_v, bus_current_ma = power_bus
    return TelemetryRecord(
        t_ms=t_ms,
        phase=phase,
        temperature_c=raw.bmp_temp_centi_c / 100.0,
        pressure_pa=float(raw.bmp_pressure_pa),
        altitude_m=altitude_m,
        uv_adc=raw.uv_adc,
        uv_index=uv_index,
        air_quality_ppm=ppm,
        accel_mps2=accel,
        pitch_deg=pitch,
        roll_deg=roll,
        yaw_deg=yaw,
        lat_deg=lat,
        lon_deg=lon,
        bus_voltage_v=bus_voltage_v,
        bus_current_ma=bus_current_ma,
    )


class Obc:
    """Mission state machine, advanced once per sample tick by the mission clock."""

    def __init__(
        self,
        sample_period_s: float = DEFAULT_SAMPLE_PERIOD_S,
        p0_pa: float = STANDARD_SEA_LEVEL_PA,
        detect_cfg: PhaseDetectConfig | None = None,
        components: Sequence[power.PowerComponent] | None = None,
        bus_voltage_v: float = power.DEFAULT_BUS_VOLTAGE_V,
        bus_rng: random.Random | None = None,
        calibration_window_s: float = DEFAULT_CALIBRATION_WINDOW_S,
    ) -> None:
        if sample_period_s <= 0:
            raise ValueError("sample period must be > 0")
        self.phase = FlightPhase.BOOT
        self.seq = 0
        self.calibration: CalibrationState | None = None
        self.sample_period_s = sample_period_s
        self.altitude_history: deque[tuple[float, float]] = deque(maxlen=ALTITUDE_WINDOW_SAMPLES)

        self.p0_pa = p0_pa
        self.detect_cfg = detect_cfg if detect_cfg is not None else PhaseDetectConfig()
        self.components = tuple(components) if components is not None else power.default_components()
        self.bus_voltage_v = bus_voltage_v
        self.bus_rng = bus_rng
        self.calibration_window_s = calibration_window_s

        self._cal_frames: list[RawSensorFrame] = []
        self._cal_start_s: float | None = None
        self._pad_altitude_m: float | None = None
        self._peak_altitude_m: float | None = None
        self._last_record: TelemetryRecord | None = None

    @property
    def last_record(self) -> TelemetryRecord | None:
        return self._last_record

    def step(
        self,
        env: EnvironmentState,
        noise: SensorNoiseConfig,
        rng: random.Random,
    ) -> bytes | None:
        """One tick: sample, maybe calibrate, maybe emit one encoded frame."""
        if self.phase == FlightPhase.BOOT:
            self.phase = FlightPhase.CALIBRATING

        if self.phase == FlightPhase.CALIBRATING:
            frame = sensors.sample_sensors(env, noise, rng)
            if self._cal_start_s is None:
                self._cal_start_s = env.t_s
            self._cal_frames.append(frame)
            if env.t_s - self._cal_start_s < self.calibration_window_s:
                return None
            cal = calibrate(self._cal_frames, self.calibration_window_s)
            self.calibration = CalibrationState(
                accel_offset_raw=cal.accel_offset_raw,
                gyro_bias_raw=cal.gyro_bias_raw,
                calibrated_at_s=env.t_s,
            )
            self._cal_frames.clear()
            self.phase = FlightPhase.READY
            # fall through: the first telemetry frame goes out this same tick

        raw = sensors.sample_sensors(env, noise, rng)
        assert self.calibration is not None
        bus = power.bus_telemetry(
            self.components, radio_active=False, rng=self.bus_rng,
            bus_voltage_v=self.bus_voltage_v,
        )
        record = build_record(
            raw,
            self.calibration,
            t_ms=round(env.t_s * 1000.0),
            phase=self.phase,
            power_bus=bus,
            p0_pa=self.p0_pa,
            previous=self._last_record,
        )
        self._track_altitude(env.t_s, record.altitude_m)
        if record.phase != self.phase:  # detection just advanced the phase
            record = dataclasses.replace(record, phase=self.phase)
        self._last_record = record

        frame_bytes = encode_frame(record, self.seq)
        self.seq = (self.seq + 1) & 0xFFFF
        return frame_bytes

    def _track_altitude(self, t_s: float, altitude_m: float) -> None:
        self.altitude_history.append((t_s, altitude_m))
        if self._pad_altitude_m is None:
            self._pad_altitude_m = altitude_m
        if self._peak_altitude_m is None or altitude_m > self._peak_altitude_m:
            self._peak_altitude_m = altitude_m
        if len(self.altitude_history) >= 3:
            self.phase = detect_phase(
                self.altitude_history,
                self.phase,
                self.detect_cfg,
                pad_altitude_m=self._pad_altitude_m,
                peak_altitude_m=self._peak_altitude_m,
            )
