from __future__ import annotations

from dataclasses import asdict, dataclass, field


@dataclass(frozen=True)
class BoundPair:
    """A certified interval with the method behind each endpoint."""

    lower: float
    upper: float
    lower_method: str
    upper_method: str
    details: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError(
                f"inconsistent bounds: {self.lower_method}={self.lower} > {self.upper_method}={self.upper}"
            )

    @property
    def tight(self) -> bool:
        return self.lower == self.upper

    @property
    def gap(self) -> float:
        return self.upper - self.lower

    def to_json(self) -> dict:
        return asdict(self)
