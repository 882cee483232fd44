from .bath import *
from .protocol import *
from .total import *
