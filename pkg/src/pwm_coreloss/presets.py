"""Bundled cores, synthetic material parameters and the PWM example operating point."""

from __future__ import annotations

from .errors import ValidationError
from .excitation import SpwmConfig
from .loss import SteinmetzParams
from .magnetics import CoreSpec

# 109.3 mW/cm^3 read off the Mix-26 chart at 2.5 kHz gives 2.61 mJ per cycle,
# so ve = q * f0 / density.
T300_26D_VE = 2.61e-3 * 2500.0 / 109.3e3
T300_26D_LE = 0.142

CORES = {
    "T300-26D": CoreSpec(n1=28, n2=28, ae=T300_26D_VE / T300_26D_LE, le=T300_26D_LE, ve=T300_26D_VE,
                         name="T300-26D"),
    # TDK R34.0x20.5x12.5 toroid, N87
    "B64290L0084X087": CoreSpec(n1=9, n2=9, ae=82.6e-6, le=82.06e-3, ve=6778e-9, name="B64290L0084X087"),
}

# Synthetic power-law material, scaled so the SE density at the PWM example's
# fundamental (2.5 kHz, ~0.151 T) lands near 109 mW/cm^3.  Not a fitted Mix-26 law.
SYNTHETIC_MIX26 = SteinmetzParams(k=221.0, alpha=1.3, beta=2.1, valid_f=(1e3, 1e6), valid_b=(1e-3, 0.5))

TABLE_V = SpwmConfig(vdc=35.0, f0=2500.0, ratio=16, m=0.8, samples_per_sw_cycle=1000)
TABLE_V_INDUCTANCE = 105e-6
TABLE_V_DENSITY_MW_PER_CM3 = 109.3

TABLE_I = SpwmConfig(vdc=20.0, f0=2500.0, ratio=8, m=0.8, samples_per_sw_cycle=1000)
TABLE_I_INDUCTANCE = 264e-6


def core_preset(name: str) -> CoreSpec:
    try:
        return CORES[name]
    except KeyError:
        raise ValidationError(f"core.preset {name!r} is unknown; choose from {sorted(CORES)}") from None
