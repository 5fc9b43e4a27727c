from .trimmed_ewma import TrimmedEWMA
