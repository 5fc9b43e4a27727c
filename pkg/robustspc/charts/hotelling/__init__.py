from .hotelling import Hotelling
