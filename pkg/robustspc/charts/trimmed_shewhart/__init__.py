from .trimmed_shewhart import TrimmedShewhart
