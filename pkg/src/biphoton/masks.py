"""Analytic spectral masks M(omega) used by every experiment.

Positions, widths and periods are detunings from omega_pc / 2 in rad/fs.
Boundaries are open on the pass side, so a sample that sits exactly on a
boundary is blocked; combined with exact negation of mirrored detunings this
keeps the blocking tests exact.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

# kind -> (parameter defaults, required names)
KINDS = {
    "open": ({}, ()),
    "edge": ({"side": "low"}, ("position",)),
    "slice": ({}, ("center", "width")),
    "grating": ({"offset": 0.0, "duty": 0.5}, ("period",)),
    "quadratic_phase": ({}, ("phi2",)),
    "v_phase": ({}, ("slope",)),
    "interferometer": ({"gamma": 1.0, "phi": 0.0}, ("tau",)),
    "compose": ({}, ("parts",)),
}
AMPLITUDE_KINDS = ("open", "edge", "slice", "grating")
PHASE_KINDS = ("quadratic_phase", "v_phase")


@dataclass(frozen=True)
class MaskSpec:
    kind: str
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown mask kind {self.kind!r}")
        defaults, required = KINDS[self.kind]
        given = dict(self.params)
        unknown = set(given) - set(defaults) - set(required)
        if unknown:
            raise ConfigError(f"mask {self.kind}: unknown parameter(s) {sorted(unknown)}")
        missing = [k for k in required if k not in given]
        if missing:
            raise ConfigError(f"mask {self.kind}: missing parameter(s) {missing}")
        full = {**defaults, **given}
        _validate(self.kind, full)
        object.__setattr__(self, "params", tuple(sorted(full.items())))

    @classmethod
    def make(cls, kind: str, **params) -> "MaskSpec":
        if kind == "compose":
            params["parts"] = tuple(params.get("parts", ()))
        return cls(kind, tuple(params.items()))

    def get(self, name):
        return dict(self.params)[name]

    def with_params(self, **changes) -> "MaskSpec":
        return MaskSpec(self.kind, tuple({**dict(self.params), **changes}.items()))

    def is_amplitude(self) -> bool:
        if self.kind == "compose":
            return all(p.is_amplitude() for p in self.get("parts"))
        return self.kind in AMPLITUDE_KINDS

    def is_phase(self) -> bool:
        if self.kind == "compose":
            return all(p.is_phase() or p.kind == "open" for p in self.get("parts"))
        return self.kind in PHASE_KINDS


def _validate(kind, p):
    def positive(name):
        v = p[name]
        if not (isinstance(v, (int, float)) and np.isfinite(v) and v > 0):
            raise ConfigError(f"mask {kind}: {name} must be positive, got {v!r}")

    def finite(name):
        v = p[name]
        if not (isinstance(v, (int, float)) and np.isfinite(v)):
            raise ConfigError(f"mask {kind}: {name} must be a finite number, got {v!r}")

    if kind == "edge":
        finite("position")
        if p["side"] not in ("low", "high"):
            raise ConfigError("mask edge: side must be 'low' or 'high'")
    elif kind == "slice":
        finite("center")
        positive("width")
    elif kind == "grating":
        positive("period")
        finite("offset")
        if not 0 < p["duty"] < 1:
            raise ConfigError("mask grating: duty must lie in (0, 1)")
    elif kind == "quadratic_phase":
        finite("phi2")
    elif kind == "v_phase":
        finite("slope")
    elif kind == "interferometer":
        finite("tau")
        finite("phi")
        finite("gamma")
        if not 0 <= p["gamma"] <= 1:
            raise ConfigError(f"mask interferometer: gamma must lie in [0, 1], got {p['gamma']!r}")
    elif kind == "compose":
        if not all(isinstance(q, MaskSpec) for q in p["parts"]):
            raise ConfigError("mask compose: parts must be mask specs")


def evaluate(spec: MaskSpec, delta, omega_pc: float) -> np.ndarray:
    """Complex transmission at detunings ``delta`` (rad/fs)."""
    d = np.asarray(delta, dtype=float)
    p = dict(spec.params)
    kind = spec.kind
    if kind == "open":
        return np.ones(d.shape, dtype=complex)
    if kind == "edge":
        passed = d > p["position"] if p["side"] == "low" else d < p["position"]
        return passed.astype(complex)
    if kind == "slice":
        blocked = np.abs(d - p["center"]) < 0.5 * p["width"]
        return (~blocked).astype(complex)
    if kind == "grating":
        a = (d - p["offset"]) / p["period"]
        y = a - np.floor(a)
        return ((y > 0) & (y < p["duty"])).astype(complex)
    if kind == "quadratic_phase":
        return np.exp(0.5j * p["phi2"] * d * d)
    if kind == "v_phase":
        return np.exp(1j * p["slope"] * np.abs(d))
    if kind == "interferometer":
        # -i omega tau + i (1 - gamma) (omega_pc / 2) tau, with omega = omega_pc/2 + delta
        tau, g = p["tau"], p["gamma"]
        arg = d * tau + g * (0.5 * omega_pc) * tau + p["phi"]
        return 0.5 * (1.0 + np.exp(-1j * arg))
    out = np.ones(d.shape, dtype=complex)
    for part in p["parts"]:
        out = out * evaluate(part, d, omega_pc)
    return out
