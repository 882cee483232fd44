from .constants import *
from .plot import *
