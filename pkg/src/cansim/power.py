"""Power budget arithmetic (P = V * I), battery runtime, and live bus readings.

Two current figures per component: the datasheet maximum drives the design
budget (the 511 mA total), the typical figure drives the simulated in-flight
bus current (the ~127 mA the telemetry shows).
"""

from __future__ import annotations

import random
from dataclasses import dataclass

RADIO_COMPONENT_NAME = "HC-12"
RADIO_TX_CURRENT_MA = 30.0  # transmit draw; typical holds the 19 mA receive draw
DEFAULT_BUS_VOLTAGE_V = 5.0
BUS_VOLTAGE_JITTER_V = 0.01


@dataclass(frozen=True)
class PowerComponent:
    name: str
    voltage_v: float
    current_ma: float          # datasheet max
    typical_current_ma: float  # in-flight draw
    duty: float = 1.0

    def __post_init__(self) -> None:
        if self.voltage_v <= 0:
            raise ValueError(f"{self.name}: voltage must be > 0")
        if not 0 <= self.typical_current_ma <= self.current_ma:
            raise ValueError(f"{self.name}: need 0 <= typical <= max current")
        if not 0.0 <= self.duty <= 1.0:
            raise ValueError(f"{self.name}: duty must be in [0, 1]")

    @property
    def power_mw(self) -> float:
        return component_power_mw(self.voltage_v, self.current_ma)


@dataclass(frozen=True)
class Battery:
    nominal_voltage_v: float = 3.7
    capacity_mah: float = 2200.0
    usable_fraction: float = 1.0

    def __post_init__(self) -> None:
        if self.capacity_mah <= 0:
            raise ValueError("capacity must be > 0")
        if not 0.0 < self.usable_fraction <= 1.0:
            raise ValueError("usable_fraction must be in (0, 1]")


@dataclass(frozen=True)
class PowerBudget:
    components: tuple[PowerComponent, ...]
    total_current_ma: float
    total_power_mw: float
    duty_weighted_current_ma: float


def default_components() -> tuple[PowerComponent, ...]:
    """The stock six-component board."""
    return (
        PowerComponent("GY-87", 3.3, 4.034, 4.0),
        PowerComponent("Neo-6M", 3.3, 67.0, 45.0),
        PowerComponent("MQ-135", 5.0, 20.0, 20.0),
        PowerComponent("GUVA-S12SD", 5.0, 20.0, 1.0),
        PowerComponent(RADIO_COMPONENT_NAME, 5.0, 150.0, 19.0),
        PowerComponent("ESP32", 5.0, 250.0, 38.0),
    )


def component_power_mw(voltage_v: float, current_ma: float) -> float:
    if voltage_v < 0 or current_ma < 0:
        raise ValueError("voltage and current must be >= 0")
    return voltage_v * current_ma


def total_budget(components: list[PowerComponent] | tuple[PowerComponent, ...]) -> PowerBudget:
    """Sum the component table: per-row power, worst-case and duty-weighted current."""
    comps = tuple(components)
    if not comps:
        raise ValueError("component list must be non-empty")
    return PowerBudget(
        components=comps,
        total_current_ma=sum(c.current_ma for c in comps),
        total_power_mw=sum(c.power_mw for c in comps),
        duty_weighted_current_ma=sum(c.current_ma * c.duty for c in comps),
    )


def runtime_hours(battery: Battery, load_current_ma: float) -> float:
    """Ideal-battery endurance. Converter losses and peak draw are not modeled,
    which is why observed runtimes fall well short of this figure."""
    if load_current_ma <= 0:
        raise ValueError("load current must be > 0")
    return battery.capacity_mah * battery.usable_fraction / load_current_ma


def bus_telemetry(
    components: list[PowerComponent] | tuple[PowerComponent, ...],
    radio_active: bool,
    rng: random.Random | None = None,
    bus_voltage_v: float = DEFAULT_BUS_VOLTAGE_V,
    radio_tx_current_ma: float = RADIO_TX_CURRENT_MA,
) -> tuple[float, float]:
    """Instantaneous (bus voltage V, bus current mA) as the OBC's ADC sees them.

    Current sums the typical draws, with the radio swapped to its transmit
    current while keyed. Voltage carries a +/-0.01 V jitter when an rng is
    supplied.
    """
    current = 0.0
    for comp in components:
        if radio_active and comp.name == RADIO_COMPONENT_NAME:
            current += radio_tx_current_ma
        else:
            current += comp.typical_current_ma
    voltage = bus_voltage_v
    if rng is not None:
        voltage += rng.uniform(-BUS_VOLTAGE_JITTER_V, BUS_VOLTAGE_JITTER_V)
    return voltage, current
