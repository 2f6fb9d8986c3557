from decimal import ROUND_HALF_UP, Decimal
from typing import Optional


def round_half_up(value: float, places: int = 1) -> float:
    """Round like a person does: 29.15 → 29.2, -29.166 → -29.2."""
    quantum = Decimal(1).scaleb(-places)
    return float(Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP))


def percent(part: int, whole: int) -> float:
    if whole <= 0:
        return 0.0
    return round_half_up(part / whole * 100)


def percent_change(before: int, after: int) -> Optional[float]:
    """None when there is no baseline."""
    if before == 0:
        return None
    return round_half_up((after - before) / before * 100)
