from .ewma import EWMA
