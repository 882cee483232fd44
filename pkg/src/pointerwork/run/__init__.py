from .io import *
from .experiments import *
from .selftest import *
from . import tracking
