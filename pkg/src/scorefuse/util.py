"""Small shared helpers: deterministic seed derivation and rounding."""

_MASK64 = (1 << 64) - 1


def mix_seed(master: int, *parts: int) -> int:
    """Derive a child seed from a master seed and integer coordinates.

    Uses the splitmix64 avalanche finalizer, folding one coordinate per step.
    The result depends only on the arguments, never on call order, so grid
    cells can be seeded positionally and reproduced in isolation.
    """
    state = master & _MASK64
    for part in parts:
        state = (state + 0x9E3779B97F4A7C15 + (part & _MASK64)) & _MASK64
        state = _avalanche(state)
    return _avalanche(state)


def _avalanche(x: int) -> int:
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def round_half_up(x: float) -> int:
    """Round to nearest integer, halves away from zero (platform-stable,
    unlike Python's banker's rounding)."""
    import math

    if x >= 0:
        return int(math.floor(x + 0.5))
    return int(math.ceil(x - 0.5))
