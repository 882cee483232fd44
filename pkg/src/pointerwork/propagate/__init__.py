from .grid import *
from .evolve import *
from .basis import *
