from .param_keys import *
from . import read
