# pylint: disable=wildcard-import
from .base import FohorseError # noqa
from .problem import * # noqa
from .mps import * # noqa
from .numeric import * # noqa
