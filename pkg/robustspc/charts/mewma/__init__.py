from .mewma import MEWMA
