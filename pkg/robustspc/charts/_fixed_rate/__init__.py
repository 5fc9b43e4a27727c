from ._fixed_rate import _FixedRate
