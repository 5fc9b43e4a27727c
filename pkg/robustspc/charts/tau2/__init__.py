from .tau2 import Tau2
