"""System parameter record and JSON parameter files.

All quantities are stored internally in angular units (rad/s). Parameter
files use ordinary frequencies in Hz; the loader converts on the way in and
the writer converts back on the way out.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi

PARAMS_SCHEMA = "optolev-params/1"

# Keys of the JSON file that carry ordinary frequencies (Hz). Everything
# else is dimensionless or an angle in radians.
_HZ_FIELDS = {
    "omega_x_hz": "omega_x",
    "omega_y_hz": "omega_y",
    "gamma_x_hz": "gamma_x",
    "gamma_y_hz": "gamma_y",
    "Gamma_x_hz": "Gamma_x",
    "Gamma_y_hz": "Gamma_y",
    "kappa_hz": "kappa",
    "delta_a_hz": "delta_a",
    "delta_b_hz": "delta_b",
    "g_a_hz": "g_a",
    "g_b_hz": "g_b",
}
_PLAIN_FIELDS = {
    "eta": "eta",
    "theta_rad": "theta",
    "phi_a_rad": "phi_a",
    "phi_b_rad": "phi_b",
    "nbar_x": "nbar_x",
    "nbar_y": "nbar_y",
}


@dataclass(frozen=True)
class SystemParams:
    """Physical configuration of the two-tone levitated cavity system.

    Angular frequencies and rates are in rad/s. ``delta_a``/``delta_b``
    follow the convention drive minus cavity resonance, so the cooling tone
    has ``delta_a < 0``. ``theta`` is the angle between the tweezer
    polarization-frame mechanical axes and the cavity axis; the bright
    coordinate is ``cos(theta) x_x + sin(theta) x_y``. ``Gamma_x``/``Gamma_y``
    are heating rates in quanta/s expressed as angular rates, ``gamma_*`` are
    intrinsic (viscous) damping rates and ``nbar_*`` the matching bath
    occupations (only relevant when the damping is non-zero).
    """

    omega_x: float
    omega_y: float
    kappa: float
    eta: float
    g_a: float
    g_b: float
    delta_a: float
    delta_b: float
    Gamma_x: float = 0.0
    Gamma_y: float = 0.0
    gamma_x: float = 0.0
    gamma_y: float = 0.0
    theta: float = math.pi / 4.0
    phi_a: float = 0.0
    phi_b: float = 0.0
    omega_b: float | None = None
    nbar_x: float = 0.0
    nbar_y: float = 0.0

    def __post_init__(self):
        if self.omega_b is None:
            object.__setattr__(self, "omega_b", 0.5 * (self.omega_x + self.omega_y))
        self.validate()

    def validate(self):
        if not (self.kappa > 0.0):
            raise ValueError("kappa must be positive")
        if not (0.0 < self.eta <= 1.0):
            raise ValueError("eta must lie in (0, 1]")
        if self.omega_x <= 0.0 or self.omega_y <= 0.0:
            raise ValueError("mechanical frequencies must be positive")
        if min(self.Gamma_x, self.Gamma_y) < 0.0:
            raise ValueError("heating rates must be non-negative")
        if min(self.gamma_x, self.gamma_y) < 0.0:
            raise ValueError("damping rates must be non-negative")
        if min(self.nbar_x, self.nbar_y) < 0.0:
            raise ValueError("bath occupations must be non-negative")
        if not (0.0 <= self.theta < math.pi / 2.0):
            raise ValueError("theta must lie in [0, pi/2)")
        lo = min(self.omega_x, self.omega_y)
        hi = max(self.omega_x, self.omega_y)
        if not (lo <= self.omega_b <= hi):
            raise ValueError("omega_b must lie between omega_x and omega_y")

    def replace(self, **kwargs) -> "SystemParams":
        """Return a copy with the given fields overridden.

        ``omega_b`` is recomputed from the new mechanical frequencies unless
        given explicitly.
        """
        fields = dataclasses.asdict(self)
        if ("omega_x" in kwargs or "omega_y" in kwargs) and "omega_b" not in kwargs:
            fields["omega_b"] = None
        fields.update(kwargs)
        return SystemParams(**fields)

    def to_dict(self) -> dict:
        """Serializable form, frequencies in Hz."""
        out = {"schema": PARAMS_SCHEMA}
        for key, attr in _HZ_FIELDS.items():
            out[key] = getattr(self, attr) / TWO_PI
        for key, attr in _PLAIN_FIELDS.items():
            out[key] = getattr(self, attr)
        out["omega_b_hz"] = self.omega_b / TWO_PI
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "SystemParams":
        if data.get("schema") != PARAMS_SCHEMA:
            raise ValueError(
                f"unsupported or missing params schema: {data.get('schema')!r}"
            )
        kwargs = {}
        for key, attr in _HZ_FIELDS.items():
            if key in data:
                kwargs[attr] = float(data[key]) * TWO_PI
        for key, attr in _PLAIN_FIELDS.items():
            if key in data:
                kwargs[attr] = float(data[key])
        if "omega_b_hz" in data:
            kwargs["omega_b"] = float(data["omega_b_hz"]) * TWO_PI
        return cls(**kwargs)

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "SystemParams":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def digest(self) -> str:
        """Short stable hash of the configuration, used to tag outputs."""
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def reference_params(**overrides) -> SystemParams:
    """Benchmark parameter set used throughout the tests and examples.

    Bright-mode frequency 106 kHz with a 12.2 kHz x-y split, cooling and
    squeezing tones detuned by -/+ the bright-mode frequency.
    """
    base = dict(
        omega_x=TWO_PI * 112.1e3,
        omega_y=TWO_PI * 99.9e3,
        kappa=TWO_PI * 58e3,
        eta=0.283,
        g_a=TWO_PI * 11.7e3,
        g_b=TWO_PI * 6.3e3,
        delta_a=-TWO_PI * 106e3,
        delta_b=TWO_PI * 106e3,
        Gamma_x=TWO_PI * 3.00e3,
        Gamma_y=TWO_PI * 2.67e3,
        omega_b=TWO_PI * 106e3,
    )
    base.update(overrides)
    return SystemParams(**base)
