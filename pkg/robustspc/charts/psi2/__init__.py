from .psi2 import Psi2
