from .rates import *
from .fit import *
