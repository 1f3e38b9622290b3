"""Central tolerance record.  Every checker reads its thresholds from here."""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    gradient: float = 1e-6
    identity: float = 1e-8
    eigen_residual: float = 1e-10
    eigen_group: float = 1e-7
    spread_abs: float = 1e-6
    spread_rel: float = 1e-6
    critical: float = 1e-8
    profile_identity: float = 1e-4
    newton: float = 1e-12
    max_exclusion: float = 0.10

    def with_overrides(self, **kw) -> "Tolerances":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def constant(self, spread: float, mean: float) -> bool:
        return spread < self.spread_abs + self.spread_rel * abs(mean)


DEFAULT = Tolerances()
