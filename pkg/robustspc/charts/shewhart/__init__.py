from .shewhart import Shewhart
